//! Hand-crafted 3D radiomic features.
//!
//! Every patch yields the K = 110 features of [`catalog`]; the study vector
//! concatenates them patch by patch, view by view (see [`FeatureLayout`]).

pub mod catalog;
pub mod discretize;
pub mod eigen;
pub mod first_order;
pub mod glcm;
pub mod gldm;
pub mod glrlm;
pub mod glszm;
pub(crate) mod math;
pub mod ngtdm;
pub mod shape;
pub mod size_matrix;

mod extract;

pub use catalog::{catalog_hash, Family, FEATURES_PER_PATCH};
pub use discretize::{discretize, DiscretizedPatch, DIRECTIONS};
pub use glcm::{glcm_matrices, Glcm};
pub use gldm::gldm_matrix;
pub use glrlm::glrlm_matrices;
pub use glszm::glszm_matrix;
pub use ngtdm::{ngtdm_matrix, Ngtdm};
pub use size_matrix::SizeMatrix;
pub use extract::{
    extract_study_features, feature_index, patch_features, unindex, FeatureLayout, FeatureLocation, FeatureVector,
    DEFAULT_BINS,
};
