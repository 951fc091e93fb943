//! Patient-specific radiomic fingerprints.
//!
//! The crate covers the pure part of the pipeline: volume preprocessing and
//! patch decomposition, a 110-feature 3D radiomics engine, the relevance
//! weighting network and interaction-aware logistic classifier with exact
//! gradients, joint training with validation-driven threshold selection,
//! classification metrics, and a seeded phantom generator.
//!
//! It is `no_std` (with `alloc`); file formats and the command-line tool live
//! in the companion `radfp` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod metrics;
pub mod model;
pub mod optim;
pub mod radiomics;
pub mod synth;
pub mod trainer;
pub mod volume;

pub use error::{Error, Result};
pub use volume::{PatchGrid, RoiSpec, Study, Task, View, Volume};
