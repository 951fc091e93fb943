use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::real::Real;
use crate::error::{Error, Result};

pub const SCALE_FLOOR: f64 = 1e-8;

/// Per-feature z-scoring statistics, fitted on the training split only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StandardizationStats<R> {
    pub mean: Vec<R>,
    pub scale: Vec<R>,
}

impl<R: Real> StandardizationStats<R> {
    /// Mean and population standard deviation of each column, accumulated in f64.
    pub fn fit<'a>(rows: impl IntoIterator<Item = &'a [f64]>) -> Result<Self> {
        let mut n = 0usize;
        let mut sum: Vec<f64> = Vec::new();
        let mut sum_sq: Vec<f64> = Vec::new();
        let mut rows_seen: Vec<&[f64]> = Vec::new();
        for row in rows {
            if n == 0 {
                sum = alloc::vec![0.0; row.len()];
            } else if row.len() != sum.len() {
                return Err(Error::LengthMismatch { expected: sum.len(), actual: row.len() });
            }
            sum.iter_mut().zip(row).for_each(|(s, v)| *s += v);
            rows_seen.push(row);
            n += 1;
        }
        if n == 0 {
            return Err(Error::InvalidConfig("no rows to fit standardization".into()));
        }
        let mean: Vec<f64> = sum.iter().map(|s| s / n as f64).collect();
        sum_sq.resize(mean.len(), 0.0);
        for row in rows_seen {
            for ((acc, v), m) in sum_sq.iter_mut().zip(row).zip(&mean) {
                *acc += (v - m) * (v - m);
            }
        }
        let scale = sum_sq.iter().map(|s| R::of(libm::sqrt(s / n as f64).max(SCALE_FLOOR))).collect();
        Ok(Self { mean: mean.into_iter().map(R::of).collect(), scale })
    }

    pub fn identity(dim: usize) -> Self {
        Self { mean: alloc::vec![R::zero(); dim], scale: alloc::vec![R::one(); dim] }
    }

    pub fn cast<S: Real>(&self) -> StandardizationStats<S> {
        StandardizationStats {
            mean: self.mean.iter().map(|v| S::of(v.as_f64())).collect(),
            scale: self.scale.iter().map(|v| S::of(v.as_f64())).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// (f − μ) / σ, evaluated in f64 from the stored values.
    pub fn apply(&self, features: &[f64]) -> Result<Vec<R>> {
        if features.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), actual: features.len() });
        }
        let z: Vec<R> = features
            .iter()
            .zip(self.mean.iter().zip(&self.scale))
            .map(|(&f, (&m, &s))| R::of((f - m.as_f64()) / s.as_f64()))
            .collect();
        if z.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: "standardization" });
        }
        Ok(z)
    }
}
