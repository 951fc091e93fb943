//! The relevance-weighting network, weighted fusion, and the interaction-aware
//! logistic classifier, with analytic gradients for joint training.

mod classifier;
mod fingerprint;
mod gradcheck;
mod joint;
mod network;
mod real;
mod standardize;

pub use classifier::{pair_index, pair_count, Classifier, InteractionMode};
pub use gradcheck::{check_gradients, check_tiny_configuration, GradCheckReport};
pub use fingerprint::{binarize_and_fingerprint, weighted_fusion, Fingerprint};
pub use joint::{
    loss_and_gradients, sample_loss, FingerprintModel, JointGradients, ModelConfig, Prediction, Sample, DEFAULT_CHANNELS, PROB_CLAMP,
};
pub use network::{Conv3d, Dense, NetworkTrace, WeightingNetwork};
pub use real::{sigmoid, Real};
pub use standardize::StandardizationStats;

/// Visits parameter blocks in their fixed serialization order.
pub trait Parameters<R> {
    fn blocks(&self) -> alloc::vec::Vec<&[R]>;
    fn blocks_mut(&mut self) -> alloc::vec::Vec<&mut [R]>;

    fn parameter_count(&self) -> usize {
        self.blocks().iter().map(|b| b.len()).sum()
    }
}
