//! Logistic classifier with first-order and pairwise interaction terms:
//! z = b + Σ θ_i x_i + Σ_{i<l} θ_il x_i x_l.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use super::real::{sigmoid, Real};
use super::Parameters;
use crate::error::{Error, Result};

/// Which unordered feature pairs contribute to the logit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InteractionMode {
    None,
    Full,
    /// Pairs among the `m` highest-relevance features of each study.
    TopM(usize),
}

impl fmt::Display for InteractionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InteractionMode::None => f.write_str("none"),
            InteractionMode::Full => f.write_str("full"),
            InteractionMode::TopM(m) => write!(f, "top_m:{m}"),
        }
    }
}

impl FromStr for InteractionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(InteractionMode::None),
            "full" => Ok(InteractionMode::Full),
            _ => s
                .strip_prefix("top_m:")
                .and_then(|m| m.parse().ok())
                .map(InteractionMode::TopM)
                .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown interaction mode {s:?}"))),
        }
    }
}

/// Number of unordered pairs i < l among `dim` features.
pub const fn pair_count(dim: usize) -> usize {
    dim * dim.saturating_sub(1) / 2
}

/// Position of pair (i, l), i < l, in row-major upper-triangle storage.
#[inline]
pub const fn pair_index(i: usize, l: usize, dim: usize) -> usize {
    debug_assert!(i < l && l < dim);
    i * (2 * dim - i - 1) / 2 + (l - i - 1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classifier<R> {
    pub mode: InteractionMode,
    /// Single element.
    pub bias: Vec<R>,
    pub linear: Vec<R>,
    /// Upper triangle, empty when `mode` is `None`.
    pub pairwise: Vec<R>,
}

impl<R: Real> Classifier<R> {
    pub fn zeros(dim: usize, mode: InteractionMode) -> Self {
        let pairs = if mode == InteractionMode::None { 0 } else { pair_count(dim) };
        Self { mode, bias: vec![R::zero()], linear: vec![R::zero(); dim], pairwise: vec![R::zero(); pairs] }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    pub fn pair(&self, i: usize, l: usize) -> R {
        let (a, b) = if i < l { (i, l) } else { (l, i) };
        self.pairwise[pair_index(a, b, self.dim())]
    }

    /// Sorted feature indices whose pairs are active for one study.
    /// `relevance` is only consulted in `TopM` mode (ties go to the lower index).
    pub fn active_set(&self, relevance: &[R]) -> Vec<usize> {
        match self.mode {
            InteractionMode::None => Vec::new(),
            InteractionMode::Full => (0..self.dim()).collect(),
            InteractionMode::TopM(m) => {
                let mut idx: Vec<usize> = (0..self.dim()).collect();
                idx.sort_by(|&a, &b| relevance[b].partial_cmp(&relevance[a]).unwrap_or(core::cmp::Ordering::Equal).then(a.cmp(&b)));
                idx.truncate(m.min(self.dim()));
                idx.sort_unstable();
                idx
            }
        }
    }

    pub fn logit(&self, x: &[R], active: &[usize]) -> Result<R> {
        if x.len() != self.dim() {
            return Err(Error::LengthMismatch { expected: self.dim(), actual: x.len() });
        }
        let mut z = self.bias[0] + dot(&self.linear, x);
        if self.mode == InteractionMode::Full {
            let d = self.dim();
            for i in 0..d {
                if x[i] == R::zero() {
                    continue;
                }
                let row = &self.pairwise[pair_index_row(i, d)..][..d - i - 1];
                z += x[i] * dot(row, &x[i + 1..]);
            }
        } else {
            for (a, &i) in active.iter().enumerate() {
                for &l in &active[a + 1..] {
                    z += self.pair(i, l) * x[i] * x[l];
                }
            }
        }
        if !z.is_finite() {
            return Err(Error::NonFinite { layer: "classifier" });
        }
        Ok(z)
    }

    /// ĉ = sigmoid(z) with every pair of `active` contributing.
    pub fn probability(&self, x: &[R], active: &[usize]) -> Result<R> {
        Ok(sigmoid(self.logit(x, active)?))
    }

    /// Accumulates `dz · ∂z/∂ψ` into `grad` and returns `dz · ∂z/∂x`.
    pub fn backward(&self, x: &[R], active: &[usize], dz: R, grad: &mut Classifier<R>) -> Vec<R> {
        let d = self.dim();
        grad.bias[0] += dz;
        let mut gx: Vec<R> = self.linear.iter().map(|&t| t * dz).collect();
        for (g, &v) in grad.linear.iter_mut().zip(x) {
            *g += dz * v;
        }
        if self.mode == InteractionMode::Full {
            for i in 0..d {
                let start = pair_index_row(i, d);
                let row = &self.pairwise[start..][..d - i - 1];
                let grow = &mut grad.pairwise[start..][..d - i - 1];
                let dxi = dz * x[i];
                let mut acc = R::zero();
                for (k, l) in (i + 1..d).enumerate() {
                    acc += row[k] * x[l];
                    if dxi != R::zero() {
                        grow[k] += dxi * x[l];
                        gx[l] += dxi * row[k];
                    }
                }
                gx[i] += dz * acc;
            }
        } else {
            for (a, &i) in active.iter().enumerate() {
                for &l in &active[a + 1..] {
                    let p = pair_index(i, l, d);
                    grad.pairwise[p] += dz * x[i] * x[l];
                    gx[i] += dz * self.pairwise[p] * x[l];
                    gx[l] += dz * self.pairwise[p] * x[i];
                }
            }
        }
        gx
    }

    pub fn cast<S: Real>(&self) -> Classifier<S> {
        use super::network::cast_slice;
        Classifier {
            mode: self.mode,
            bias: cast_slice(&self.bias),
            linear: cast_slice(&self.linear),
            pairwise: cast_slice(&self.pairwise),
        }
    }

    pub fn zeros_like(&self) -> Self {
        Self::zeros(self.dim(), self.mode)
    }
}

/// Four independent partial sums, so the loop pipelines.
#[inline]
fn dot<R: Real>(a: &[R], b: &[R]) -> R {
    let mut acc = [R::zero(); 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: R = ca.remainder().iter().zip(cb.remainder()).map(|(&x, &y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

#[inline]
fn pair_index_row(i: usize, dim: usize) -> usize {
    i * (2 * dim - i - 1) / 2
}

impl<R> Parameters<R> for Classifier<R> {
    fn blocks(&self) -> Vec<&[R]> {
        vec![&self.bias, &self.linear, &self.pairwise]
    }

    fn blocks_mut(&mut self) -> Vec<&mut [R]> {
        vec![&mut self.bias, &mut self.linear, &mut self.pairwise]
    }
}
