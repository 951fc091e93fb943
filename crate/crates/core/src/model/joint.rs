//! The full model: G_ω → weighted fusion → R_ψ, with the joint loss gradient.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::classifier::{Classifier, InteractionMode};
use super::fingerprint::{binarize_and_fingerprint, weighted_fusion};
use super::network::WeightingNetwork;
use super::real::{sigmoid, Real};
use super::standardize::StandardizationStats;
use super::Parameters;
use crate::error::{Error, Result};
use crate::radiomics::{Family, FEATURES_PER_PATCH};
use crate::volume::PatchGrid;

/// Lower clamp on ĉ (upper is 1 − PROB_CLAMP) inside the loss.
pub const PROB_CLAMP: f64 = 1e-7;

pub const DEFAULT_CHANNELS: [usize; 3] = [8, 16, 32];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// ROI extent fed to the network, per view channel.
    pub roi_dims: [usize; 3],
    pub grid: PatchGrid,
    pub n_bins: usize,
    /// Width of each convolution stage.
    pub channels: Vec<usize>,
    pub interaction: InteractionMode,
    /// When false q ≡ 1 in training and inference and the network is unused.
    pub selection: bool,
    /// Feature families fed to the classifier; the rest are zeroed.
    pub families: Vec<Family>,
    /// Dense-layer init range as a multiple of 1/√fan_in.
    #[serde(default = "one")]
    pub dense_init_scale: f64,
}

fn one() -> f64 {
    1.0
}

impl ModelConfig {
    pub fn new(roi_dims: [usize; 3], grid: PatchGrid, n_bins: usize) -> Self {
        Self {
            roi_dims,
            grid,
            n_bins,
            channels: DEFAULT_CHANNELS.to_vec(),
            interaction: InteractionMode::Full,
            selection: true,
            families: Family::ALL.to_vec(),
            dense_init_scale: 1.0,
        }
    }

    /// 3JK.
    pub fn dim(&self) -> usize {
        3 * self.grid.patch_count() * FEATURES_PER_PATCH
    }

    /// True for flat positions whose family is enabled.
    pub fn feature_mask(&self) -> Vec<bool> {
        let mut per_patch = [false; FEATURES_PER_PATCH];
        for f in &self.families {
            per_patch[f.offset()..f.offset() + f.len()].iter_mut().for_each(|b| *b = true);
        }
        (0..self.dim()).map(|i| per_patch[i % FEATURES_PER_PATCH]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.roi_dims.contains(&0) || self.channels.is_empty() || self.channels.contains(&0) {
            return Err(Error::InvalidConfig("network dimensions must be positive".into()));
        }
        if !(self.dense_init_scale >= 0.0 && self.dense_init_scale.is_finite()) {
            return Err(Error::InvalidConfig("dense_init_scale must be finite and ≥ 0".into()));
        }
        if self.families.is_empty() {
            return Err(Error::InvalidConfig("at least one feature family is required".into()));
        }
        if self.interaction == InteractionMode::TopM(0) {
            return Err(Error::InvalidConfig("top_m needs m ≥ 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FingerprintModel<R> {
    pub config: ModelConfig,
    pub network: WeightingNetwork<R>,
    pub classifier: Classifier<R>,
    pub stats: StandardizationStats<R>,
    /// Selection threshold T used at inference.
    pub threshold: f64,
}

/// One study prepared for the model: standardized features and the stacked
/// 3-channel ROI.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a, R> {
    pub features: &'a [R],
    pub roi: &'a [R],
    pub label: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub probability: f64,
    pub logit: f64,
    pub selected: usize,
}

impl<R: Real> FingerprintModel<R> {
    /// Fan-in uniform network weights, zero biases, zero classifier.
    pub fn init<G: Rng + ?Sized>(config: ModelConfig, stats: StandardizationStats<R>, rng: &mut G) -> Result<Self> {
        config.validate()?;
        let dim = config.dim();
        if stats.len() != dim {
            return Err(Error::LengthMismatch { expected: dim, actual: stats.len() });
        }
        let mut channels = vec![3];
        channels.extend_from_slice(&config.channels);
        let network = WeightingNetwork::init(config.roi_dims, &channels, dim, config.dense_init_scale, rng)?;
        let classifier = Classifier::zeros(dim, config.interaction);
        Ok(Self { config, network, classifier, stats, threshold: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.classifier.dim()
    }

    /// Standardizes raw features and zeroes disabled families.
    pub fn prepare_features(&self, raw: &[f64]) -> Result<Vec<R>> {
        let mut z = self.stats.apply(raw)?;
        if self.config.families.len() < Family::ALL.len() {
            for (v, keep) in z.iter_mut().zip(self.config.feature_mask()) {
                if !keep {
                    *v = R::zero();
                }
            }
        }
        Ok(z)
    }

    /// q = G_ω(x), or all ones with selection disabled.
    pub fn relevance(&self, roi: &[R]) -> Result<Vec<R>> {
        if self.config.selection {
            self.network.forward(roi)
        } else {
            Ok(vec![R::one(); self.dim()])
        }
    }

    /// Training path: ĉ = R_ψ(f ⊙ q).
    pub fn predict_weighted(&self, features: &[R], q: &[R]) -> Result<Prediction> {
        let fw = weighted_fusion(features, q)?;
        let active = self.classifier.active_set(q);
        let z = self.classifier.logit(&fw, &active)?;
        Ok(Prediction { probability: sigmoid(z).as_f64(), logit: z.as_f64(), selected: self.dim() })
    }

    /// Inference path: ĉ = R_ψ(f ⊙ q^(b)) with mask q_i ≥ T.
    pub fn predict_fingerprint(&self, features: &[R], q: &[R], threshold: f64) -> Result<Prediction> {
        let fp = binarize_and_fingerprint(features, q, threshold)?;
        let active = self.classifier.active_set(q);
        let z = self.classifier.logit(&fp.values, &active)?;
        Ok(Prediction { probability: sigmoid(z).as_f64(), logit: z.as_f64(), selected: fp.selected() })
    }

    /// Inference with `threshold` or, when `None`, the stored T.
    pub fn predict(&self, features: &[R], roi: &[R], threshold: Option<f64>) -> Result<Prediction> {
        let q = self.relevance(roi)?;
        self.predict_fingerprint(features, &q, threshold.unwrap_or(self.threshold))
    }

    /// Same parameters in another scalar type (exact when widening).
    pub fn cast<S: Real>(&self) -> FingerprintModel<S> {
        FingerprintModel {
            config: self.config.clone(),
            network: self.network.cast(),
            classifier: self.classifier.cast(),
            stats: self.stats.cast(),
            threshold: self.threshold,
        }
    }

    pub fn zero_gradients(&self) -> JointGradients<R> {
        JointGradients { network: self.network.zeros_like(), classifier: self.classifier.zeros_like() }
    }
}

impl<R> Parameters<R> for FingerprintModel<R> {
    fn blocks(&self) -> Vec<&[R]> {
        let mut b = self.network.blocks();
        b.extend(self.classifier.blocks());
        b
    }

    fn blocks_mut(&mut self) -> Vec<&mut [R]> {
        let mut b = self.network.blocks_mut();
        b.extend(self.classifier.blocks_mut());
        b
    }
}

/// Gradients with the same shape as the trainable parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct JointGradients<R> {
    pub network: WeightingNetwork<R>,
    pub classifier: Classifier<R>,
}

impl<R: Real> JointGradients<R> {
    pub fn clear(&mut self) {
        self.blocks_mut().into_iter().for_each(|b| b.iter_mut().for_each(|v| *v = R::zero()));
    }
}

impl<R> Parameters<R> for JointGradients<R> {
    fn blocks(&self) -> Vec<&[R]> {
        let mut b = self.network.blocks();
        b.extend(self.classifier.blocks());
        b
    }

    fn blocks_mut(&mut self) -> Vec<&mut [R]> {
        let mut b = self.network.blocks_mut();
        b.extend(self.classifier.blocks_mut());
        b
    }
}

pub(crate) fn clamped_bce<R: Real>(c_hat: R, label: u8) -> R {
    let lo = R::of(PROB_CLAMP);
    let clamped = c_hat.max(lo).min(R::one() - lo);
    let target = R::of(label as f64);
    -(target * clamped.ln() + (R::one() - target) * (R::one() - clamped).ln())
}

/// Forward-only loss of one sample on the training path.
pub fn sample_loss<R: Real>(model: &FingerprintModel<R>, sample: Sample<'_, R>) -> Result<R> {
    let q = model.relevance(sample.roi)?;
    let fw = weighted_fusion(sample.features, &q)?;
    let z = model.classifier.logit(&fw, &model.classifier.active_set(&q))?;
    Ok(clamped_bce(sigmoid(z), sample.label))
}

/// Binary cross-entropy of one sample. Adds `weight · ∂L/∂θ` for every
/// parameter into `grads` and returns the unweighted loss. Features are
/// constants; the gradient flows through R_ψ, the product f ⊙ q and G_ω.
pub fn loss_and_gradients<R: Real>(
    model: &FingerprintModel<R>,
    sample: Sample<'_, R>,
    grads: &mut JointGradients<R>,
    weight: R,
) -> Result<R> {
    if sample.label > 1 {
        return Err(Error::InvalidConfig("label must be 0 or 1".into()));
    }
    if sample.features.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { layer: "input features" });
    }
    let trace = if model.config.selection { Some(model.network.forward_trace(sample.roi)?) } else { None };
    let ones;
    let q: &[R] = match &trace {
        Some(t) => &t.relevance,
        None => {
            ones = vec![R::one(); model.dim()];
            &ones
        }
    };
    let fw = weighted_fusion(sample.features, q)?;
    let active = model.classifier.active_set(q);
    let z = model.classifier.logit(&fw, &active)?;
    let c_hat = sigmoid(z);
    let lo = R::of(PROB_CLAMP);
    let hi = R::one() - lo;
    let target = R::of(sample.label as f64);
    let loss = clamped_bce(c_hat, sample.label);
    if !loss.is_finite() {
        return Err(Error::NonFinite { layer: "loss" });
    }
    // The clamp is flat outside [lo, hi].
    let dz = if c_hat >= lo && c_hat <= hi { (c_hat - target) * weight } else { R::zero() };
    if dz == R::zero() {
        return Ok(loss);
    }
    let g_fw = model.classifier.backward(&fw, &active, dz, &mut grads.classifier);
    if let Some(t) = &trace {
        let g_q: Vec<R> = g_fw.iter().zip(sample.features).map(|(&g, &f)| g * f).collect();
        if g_q.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { layer: "fusion" });
        }
        model.network.backward(t, &g_q, &mut grads.network);
    }
    Ok(loss)
}
