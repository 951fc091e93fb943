use alloc::format;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::catalog::{self, Family, FEATURES_PER_PATCH};
use super::discretize::discretize;
use super::{first_order, glcm, gldm, glrlm, glszm, ngtdm, shape};
use crate::error::{Error, Result};
use crate::volume::{decompose_patches, extract_roi, PatchGrid, RoiSpec, Study, View, Volume};

pub const DEFAULT_BINS: usize = 32;

/// Maps (view, patch, feature) to positions in the flat study vector.
///
/// Zero-based position = patch·3K + view·K + k, i.e. all three views of a
/// patch are adjacent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureLayout {
    patches: usize,
}

/// Metadata for one flat index.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureLocation {
    pub view: View,
    /// Zero-based patch index.
    pub patch: usize,
    /// Zero-based position in the catalog.
    pub feature: usize,
    pub family: Family,
    pub name: &'static str,
}

impl FeatureLayout {
    pub fn new(patches: usize) -> Self {
        Self { patches }
    }

    pub fn for_grid(grid: &PatchGrid) -> Self {
        Self::new(grid.patch_count())
    }

    pub fn patches(&self) -> usize {
        self.patches
    }

    /// 3JK.
    pub fn len(&self) -> usize {
        3 * self.patches * FEATURES_PER_PATCH
    }

    pub fn is_empty(&self) -> bool {
        self.patches == 0
    }

    #[inline]
    pub fn position(&self, view: View, patch: usize, feature: usize) -> usize {
        (patch * 3 + view.position()) * FEATURES_PER_PATCH + feature
    }

    pub fn location(&self, position: usize) -> Option<FeatureLocation> {
        if position >= self.len() {
            return None;
        }
        let feature = position % FEATURES_PER_PATCH;
        let view = View::from_position((position / FEATURES_PER_PATCH) % 3)?;
        let patch = position / (3 * FEATURES_PER_PATCH);
        let (family, name) = catalog::entry(feature)?;
        Some(FeatureLocation { view, patch, feature, family, name })
    }
}

/// One-based flat index i = (j-1)·3K + (v-1)·K + k for one-based v, j, k.
pub fn feature_index(v: usize, j: usize, k: usize, patches: usize) -> Result<usize> {
    if !(1..=3).contains(&v) || !(1..=patches).contains(&j) || !(1..=FEATURES_PER_PATCH).contains(&k) {
        return Err(Error::IndexOutOfRange(format!("(v={v}, j={j}, k={k}) with J={patches}")));
    }
    Ok((j - 1) * 3 * FEATURES_PER_PATCH + (v - 1) * FEATURES_PER_PATCH + k)
}

/// Inverse of [`feature_index`]: one-based (v, j, k) plus catalog metadata.
pub fn unindex(i: usize, patches: usize) -> Result<(usize, usize, usize, Family, &'static str)> {
    let layout = FeatureLayout::new(patches);
    let loc = i
        .checked_sub(1)
        .and_then(|p| layout.location(p))
        .ok_or_else(|| Error::IndexOutOfRange(format!("flat index {i} with J={patches}")))?;
    Ok((loc.view.position() + 1, loc.patch + 1, loc.feature + 1, loc.family, loc.name))
}

/// The full pool f for one study, in [`FeatureLayout`] order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub layout: FeatureLayout,
    pub values: Vec<f64>,
}

impl FeatureVector {
    pub fn new(layout: FeatureLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::LengthMismatch { expected: layout.len(), actual: values.len() });
        }
        Ok(Self { layout, values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, view: View, patch: usize, feature: usize) -> f64 {
        self.values[self.layout.position(view, patch, feature)]
    }
}

/// All 110 catalog features of one patch.
pub fn patch_features(patch: &Volume, n_bins: usize) -> Result<[f64; FEATURES_PER_PATCH]> {
    let dp = discretize(patch, n_bins)?;
    let mut out = [0.0; FEATURES_PER_PATCH];
    let mut put = |family: Family, values: &[f64]| {
        let o = family.offset();
        out[o..o + values.len()].copy_from_slice(values);
    };
    put(Family::FirstOrder, &first_order::first_order_features(patch, &dp)?);
    put(Family::Shape3D, &shape::shape_features(patch, &shape::otsu_mask(&dp))?);
    put(Family::Glcm, &glcm::glcm_features(&dp)?);
    put(Family::Glrlm, &glrlm::glrlm_features(&dp));
    put(Family::Glszm, &glszm::glszm_features(&dp));
    put(Family::Ngtdm, &ngtdm::ngtdm_features(&dp));
    put(Family::Gldm, &gldm::gldm_features(&dp));
    if let Some(k) = out.iter().position(|v| !v.is_finite()) {
        let (family, name) = catalog::entry(k).unwrap_or((Family::FirstOrder, "?"));
        return Err(Error::InvalidVolume(format!("non-finite {}:{name}", family.name())));
    }
    Ok(out)
}

/// Features of every patch of one view's ROI, in patch order.
pub fn view_patch_features(
    volume: &Volume,
    roi: &RoiSpec,
    grid: &PatchGrid,
    n_bins: usize,
) -> Result<Vec<[f64; FEATURES_PER_PATCH]>> {
    let roi_volume = extract_roi(volume, roi)?;
    decompose_patches(&roi_volume, grid)?.iter().map(|p| patch_features(p, n_bins)).collect()
}

/// f ∈ R^{3JK} for a preprocessed study.
pub fn extract_study_features(study: &Study, roi: &RoiSpec, grid: &PatchGrid, n_bins: usize) -> Result<FeatureVector> {
    if !study.is_aligned() {
        return Err(Error::InvalidDims(format!("views of study {} differ in dims", study.study_id)));
    }
    let layout = FeatureLayout::for_grid(grid);
    let mut values = alloc::vec![0.0; layout.len()];
    for view in View::ALL {
        for (j, feats) in view_patch_features(study.view(view), roi, grid, n_bins)?.iter().enumerate() {
            let start = layout.position(view, j, 0);
            values[start..start + FEATURES_PER_PATCH].copy_from_slice(feats);
        }
    }
    FeatureVector::new(layout, values)
}
