use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::real::Real;
use crate::error::{Error, Result};

/// f^w = f ⊙ q.
pub fn weighted_fusion<R: Real>(f: &[R], q: &[R]) -> Result<Vec<R>> {
    if f.len() != q.len() {
        return Err(Error::LengthMismatch { expected: f.len(), actual: q.len() });
    }
    Ok(f.iter().zip(q).map(|(&a, &b)| a * b).collect())
}

/// Per-study sparse feature vector: mask_i = (q_i ≥ T), values = f ⊙ mask.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Fingerprint<R> {
    pub mask: Vec<bool>,
    pub values: Vec<R>,
    pub threshold: f64,
}

impl<R> Fingerprint<R> {
    pub fn selected(&self) -> usize {
        self.mask.iter().filter(|&&m| m).count()
    }
}

pub fn binarize_and_fingerprint<R: Real>(f: &[R], q: &[R], threshold: f64) -> Result<Fingerprint<R>> {
    if f.len() != q.len() {
        return Err(Error::LengthMismatch { expected: f.len(), actual: q.len() });
    }
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidConfig(alloc::format!("threshold {threshold} outside [0, 1]")));
    }
    let mask: Vec<bool> = q.iter().map(|&v| v.as_f64() >= threshold).collect();
    let values = f.iter().zip(&mask).map(|(&v, &m)| if m { v } else { R::zero() }).collect();
    Ok(Fingerprint { mask, values, threshold })
}
