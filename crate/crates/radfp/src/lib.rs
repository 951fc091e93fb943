//! File formats, the feature cache and the command-line front end around
//! `radfp-core`.

pub mod artifact;
pub mod cli;
pub mod cohort;
pub mod config;
pub mod error;
pub mod features;
pub mod manifest;
pub mod nrrd;
pub mod outputs;
pub mod report;

pub use error::{Error, Result};
