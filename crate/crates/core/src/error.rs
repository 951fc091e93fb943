use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid volume: {0}")]
    InvalidVolume(String),
    #[error("invalid dimensions: {0}")]
    InvalidDims(String),
    #[error("ROI does not fit inside volume: {0}")]
    RoiOutOfBounds(String),
    #[error("patch grid {grid:?} exceeds ROI dims {roi:?}")]
    GridTooLarge { grid: [usize; 3], roi: [usize; 3] },
    #[error("empty patch")]
    EmptyPatch,
    #[error("empty shape mask")]
    EmptyShapeMask,
    #[error("patch too small for any co-occurrence offset")]
    PatchTooSmall,
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite value in {layer}")]
    NonFinite { layer: &'static str },
    #[error("degenerate label distribution: {0}")]
    DegenerateLabels(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("patch out of range: {0}")]
    PatchOutOfRange(String),
}
