//! The frozen, ordered catalog of the K = 110 per-patch features.

use alloc::string::String;
use core::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Bumped whenever a formula or the catalog order changes.
pub const CATALOG_VERSION: &str = "radfp-catalog-1";

/// Features per patch and view.
pub const FEATURES_PER_PATCH: usize = 110;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Family {
    FirstOrder,
    Shape3D,
    Glcm,
    Glrlm,
    Glszm,
    Ngtdm,
    Gldm,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::FirstOrder,
        Family::Shape3D,
        Family::Glcm,
        Family::Glrlm,
        Family::Glszm,
        Family::Ngtdm,
        Family::Gldm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::FirstOrder => "firstorder",
            Family::Shape3D => "shape",
            Family::Glcm => "glcm",
            Family::Glrlm => "glrlm",
            Family::Glszm => "glszm",
            Family::Ngtdm => "ngtdm",
            Family::Gldm => "gldm",
        }
    }

    pub fn from_name(name: &str) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn len(self) -> usize {
        self.names().len()
    }

    /// Offset of the family's first feature within the per-patch block.
    pub fn offset(self) -> usize {
        Family::ALL.iter().take_while(|&&f| f != self).map(|f| f.len()).sum()
    }

    pub fn names(self) -> &'static [&'static str] {
        match self {
            Family::FirstOrder => &FIRST_ORDER,
            Family::Shape3D => &SHAPE,
            Family::Glcm => &GLCM,
            Family::Glrlm => &GLRLM,
            Family::Glszm => &GLSZM,
            Family::Ngtdm => &NGTDM,
            Family::Gldm => &GLDM,
        }
    }
}

pub const FIRST_ORDER: [&str; 19] = [
    "Energy",
    "TotalEnergy",
    "Entropy",
    "Minimum",
    "10Percentile",
    "90Percentile",
    "Maximum",
    "Mean",
    "Median",
    "InterquartileRange",
    "Range",
    "MeanAbsoluteDeviation",
    "RobustMeanAbsoluteDeviation",
    "RootMeanSquared",
    "StandardDeviation",
    "Skewness",
    "Kurtosis",
    "Variance",
    "Uniformity",
];

pub const SHAPE: [&str; 16] = [
    "VoxelVolume",
    "SurfaceArea",
    "SurfaceVolumeRatio",
    "Sphericity",
    "Compactness1",
    "Compactness2",
    "SphericalDisproportion",
    "Maximum3DDiameter",
    "Maximum2DDiameterSlice",
    "Maximum2DDiameterColumn",
    "Maximum2DDiameterRow",
    "MajorAxisLength",
    "MinorAxisLength",
    "LeastAxisLength",
    "Elongation",
    "Flatness",
];

pub const GLCM: [&str; 24] = [
    "Autocorrelation",
    "JointAverage",
    "ClusterProminence",
    "ClusterShade",
    "ClusterTendency",
    "Contrast",
    "Correlation",
    "DifferenceAverage",
    "DifferenceEntropy",
    "DifferenceVariance",
    "JointEnergy",
    "JointEntropy",
    "Imc1",
    "Imc2",
    "Idm",
    "Idmn",
    "Id",
    "Idn",
    "InverseVariance",
    "MaximumProbability",
    "SumAverage",
    "SumEntropy",
    "SumSquares",
    "MCC",
];

pub const GLRLM: [&str; 16] = [
    "ShortRunEmphasis",
    "LongRunEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "RunLengthNonUniformity",
    "RunLengthNonUniformityNormalized",
    "RunPercentage",
    "GrayLevelVariance",
    "RunVariance",
    "RunEntropy",
    "LowGrayLevelRunEmphasis",
    "HighGrayLevelRunEmphasis",
    "ShortRunLowGrayLevelEmphasis",
    "ShortRunHighGrayLevelEmphasis",
    "LongRunLowGrayLevelEmphasis",
    "LongRunHighGrayLevelEmphasis",
];

pub const GLSZM: [&str; 16] = [
    "SmallAreaEmphasis",
    "LargeAreaEmphasis",
    "GrayLevelNonUniformity",
    "GrayLevelNonUniformityNormalized",
    "SizeZoneNonUniformity",
    "SizeZoneNonUniformityNormalized",
    "ZonePercentage",
    "GrayLevelVariance",
    "ZoneVariance",
    "ZoneEntropy",
    "LowGrayLevelZoneEmphasis",
    "HighGrayLevelZoneEmphasis",
    "SmallAreaLowGrayLevelEmphasis",
    "SmallAreaHighGrayLevelEmphasis",
    "LargeAreaLowGrayLevelEmphasis",
    "LargeAreaHighGrayLevelEmphasis",
];

pub const NGTDM: [&str; 5] = ["Coarseness", "Contrast", "Busyness", "Complexity", "Strength"];

pub const GLDM: [&str; 14] = [
    "SmallDependenceEmphasis",
    "LargeDependenceEmphasis",
    "GrayLevelNonUniformity",
    "DependenceNonUniformity",
    "DependenceNonUniformityNormalized",
    "GrayLevelVariance",
    "DependenceVariance",
    "DependenceEntropy",
    "LowGrayLevelEmphasis",
    "HighGrayLevelEmphasis",
    "SmallDependenceLowGrayLevelEmphasis",
    "SmallDependenceHighGrayLevelEmphasis",
    "LargeDependenceLowGrayLevelEmphasis",
    "LargeDependenceHighGrayLevelEmphasis",
];

/// Catalog entry for zero-based per-patch feature position `k`.
pub fn entry(k: usize) -> Option<(Family, &'static str)> {
    let mut rest = k;
    for family in Family::ALL {
        let names = family.names();
        if rest < names.len() {
            return Some((family, names[rest]));
        }
        rest -= names.len();
    }
    None
}

pub fn entries() -> impl Iterator<Item = (Family, &'static str)> {
    Family::ALL.into_iter().flat_map(|f| f.names().iter().map(move |&n| (f, n)))
}

/// SHA-256 over the version tag and the ordered `family:name` list, as hex.
pub fn catalog_hash() -> String {
    let mut hasher = Sha256::new();
    hasher.update(CATALOG_VERSION.as_bytes());
    for (family, name) in entries() {
        hasher.update(b"\n");
        hasher.update(family.name().as_bytes());
        hasher.update(b":");
        hasher.update(name.as_bytes());
    }
    let mut out = String::with_capacity(64);
    for b in hasher.finalize() {
        let _ = write!(out, "{b:02x}");
    }
    out
}
