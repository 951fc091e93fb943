//! Adaptive moment estimation over parameter blocks.

use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Parameters, Real};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamConfig {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone)]
pub struct Adam<R> {
    pub config: AdamConfig,
    m: Vec<Vec<R>>,
    v: Vec<Vec<R>>,
    t: i32,
}

impl<R: Real> Adam<R> {
    pub fn new<P: Parameters<R> + ?Sized>(config: AdamConfig, params: &P) -> Self {
        let m: Vec<Vec<R>> = params.blocks().iter().map(|b| vec![R::zero(); b.len()]).collect();
        Self { config, v: m.clone(), m, t: 0 }
    }

    pub fn steps(&self) -> i32 {
        self.t
    }

    /// One update; `learning_rates[b]` applies to block `b`.
    pub fn step<P, G>(&mut self, params: &mut P, grads: &G, learning_rates: &[f64]) -> Result<()>
    where
        P: Parameters<R> + ?Sized,
        G: Parameters<R> + ?Sized,
    {
        let grads = grads.blocks();
        let mut params = params.blocks_mut();
        if grads.len() != self.m.len() || params.len() != self.m.len() || learning_rates.len() != self.m.len() {
            return Err(Error::LengthMismatch { expected: self.m.len(), actual: grads.len() });
        }
        self.t += 1;
        let AdamConfig { beta1, beta2, eps } = self.config;
        let c1 = 1.0 - libm::pow(beta1, self.t as f64);
        let c2 = 1.0 - libm::pow(beta2, self.t as f64);
        let (b1, b2) = (R::of(beta1), R::of(beta2));
        let (one_b1, one_b2) = (R::of(1.0 - beta1), R::of(1.0 - beta2));
        let eps = R::of(eps);
        for (b, ((p, g), (m, v))) in params.iter_mut().zip(&grads).zip(self.m.iter_mut().zip(self.v.iter_mut())).enumerate() {
            if p.len() != g.len() {
                return Err(Error::LengthMismatch { expected: p.len(), actual: g.len() });
            }
            // Bias corrections folded into the step size and epsilon.
            let step = R::of(learning_rates[b] * libm::sqrt(c2) / c1);
            let eps_hat = eps * R::of(libm::sqrt(c2));
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = b1 * m[i] + one_b1 * gi;
                v[i] = b2 * v[i] + one_b2 * gi * gi;
                p[i] -= step * m[i] / (v[i].sqrt() + eps_hat);
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { layer: "optimizer" });
            }
        }
        Ok(())
    }
}
