//! Seeded three-view phantom cohorts with a planted, patch-localized lesion.
//!
//! Each view is `base_v + σ · n_v`, where `n_v` mixes a study-wide field with
//! a view-specific one. Both fields are white Gaussian noise smoothed with a
//! separable box kernel of radius 2 (edges clamped) and rescaled to unit
//! standard deviation. Lesions cover the designated patch of the ROI grid in
//! every view of a lesion-bearing study.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{PatchGrid, Region, RoiSpec, Study, Task, Volume};

/// Background noise standard deviation, the unit of `effect_size`.
pub const SIGMA: f64 = 10.0;
pub const SMOOTHING_RADIUS: usize = 2;
const VIEW_BASE: [f64; 3] = [100.0, 120.0, 140.0];
/// Share of background variance common to all three views.
const SHARED_VARIANCE: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LesionKind {
    IntensityShift,
    TextureRoughening,
    Mixed,
}

impl LesionKind {
    pub fn name(self) -> &'static str {
        match self {
            LesionKind::IntensityShift => "intensity-shift",
            LesionKind::TextureRoughening => "texture-roughening",
            LesionKind::Mixed => "mixed",
        }
    }
}

impl fmt::Display for LesionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LesionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [LesionKind::IntensityShift, LesionKind::TextureRoughening, LesionKind::Mixed]
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(alloc::format!("unknown lesion kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomConfig {
    pub n_studies: usize,
    pub dims: [usize; 3],
    pub roi: RoiSpec,
    pub grid: PatchGrid,
    /// Linear patch index in `grid` (depth-major).
    pub lesion_patch: usize,
    pub lesion_kind: LesionKind,
    /// In units of the background σ. Zero gives a null cohort.
    pub effect_size: f64,
    pub label_noise: f64,
    pub seed: u64,
    pub id_prefix: String,
}

impl Default for PhantomConfig {
    fn default() -> Self {
        Self {
            n_studies: 200,
            dims: [16, 48, 48],
            roi: RoiSpec::default(),
            grid: PatchGrid::cube(2).expect("2×2×2 is valid"),
            lesion_patch: 0,
            lesion_kind: LesionKind::IntensityShift,
            effect_size: 3.0,
            label_noise: 0.0,
            seed: 0,
            id_prefix: "phantom".into(),
        }
    }
}

impl PhantomConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_studies == 0 {
            return Err(Error::InvalidConfig("n_studies must be positive".into()));
        }
        if self.lesion_patch >= self.grid.patch_count() {
            return Err(Error::PatchOutOfRange(alloc::format!(
                "lesion patch {} with a {} grid ({} patches)",
                self.lesion_patch,
                self.grid,
                self.grid.patch_count()
            )));
        }
        if !(self.effect_size >= 0.0 && self.effect_size.is_finite()) {
            return Err(Error::InvalidConfig("effect_size must be finite and ≥ 0".into()));
        }
        if !(0.0..0.5).contains(&self.label_noise) {
            return Err(Error::InvalidConfig("label_noise must lie in [0, 0.5)".into()));
        }
        self.lesion_region().map(|_| ())
    }

    /// Voxel region of the lesion in volume coordinates.
    pub fn lesion_region(&self) -> Result<Region> {
        let roi = self.roi.region(self.dims)?;
        let patches = self.grid.regions(roi.dims)?;
        let patch = patches.get(self.lesion_patch).ok_or_else(|| Error::PatchOutOfRange(alloc::format!("{}", self.lesion_patch)))?;
        Ok(patch.offset_by(&roi))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub lesion_patch: usize,
    pub lesion_kind: LesionKind,
    pub effect_size: f64,
    pub lesion_region: Region,
    /// Whether each study carries the lesion (before label noise).
    pub lesion_present: Vec<bool>,
}

/// Generates the cohort. Study `i` uses its own RNG stream derived from
/// `(seed, i)`, so any subset can be regenerated independently.
pub fn generate_cohort(cfg: &PhantomConfig) -> Result<(Vec<Study>, GroundTruth)> {
    cfg.validate()?;
    let region = cfg.lesion_region()?;
    let mut studies = Vec::with_capacity(cfg.n_studies);
    let mut present = Vec::with_capacity(cfg.n_studies);
    for i in 0..cfg.n_studies {
        let (study, lesion) = generate_study(cfg, &region, i)?;
        studies.push(study);
        present.push(lesion);
    }
    let truth = GroundTruth {
        lesion_patch: cfg.lesion_patch,
        lesion_kind: cfg.lesion_kind,
        effect_size: cfg.effect_size,
        lesion_region: region,
        lesion_present: present,
    };
    Ok((studies, truth))
}

pub fn study_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

fn generate_study(cfg: &PhantomConfig, region: &Region, index: usize) -> Result<(Study, bool)> {
    let mut rng = study_rng(cfg.seed, index);
    let lesion = index % 2 == 1;
    let flipped = rng.random::<f64>() < cfg.label_noise;
    let label = u8::from(lesion != flipped);

    let shared = smooth_field(cfg.dims, &mut rng);
    let (ws, wv) = (libm::sqrt(SHARED_VARIANCE), libm::sqrt(1.0 - SHARED_VARIANCE));
    // Backgrounds are drawn before any lesion noise so they never depend on the label.
    let mut fields: Vec<Vec<f64>> = VIEW_BASE
        .iter()
        .map(|&base| {
            let own = smooth_field(cfg.dims, &mut rng);
            shared.iter().zip(&own).map(|(s, o)| base + SIGMA * (ws * s + wv * o)).collect()
        })
        .collect();
    if lesion && cfg.effect_size > 0.0 {
        for voxels in &mut fields {
            plant(voxels, cfg.dims, region, cfg.lesion_kind, cfg.effect_size, &mut rng);
        }
    }
    let views = fields.into_iter().map(|v| Volume::from_voxels(cfg.dims, v)).collect::<Result<Vec<_>>>()?;
    let labels: BTreeMap<Task, u8> = Task::ALL.iter().map(|&t| (t, label)).collect();
    let views: [Volume; 3] = views.try_into().map_err(|_| Error::InvalidVolume("view count".into()))?;
    let id = alloc::format!("{}-{:04}", cfg.id_prefix, index);
    Ok((Study::new(id, views, labels)?, lesion))
}

fn region_indices(dims: [usize; 3], region: &Region) -> Vec<usize> {
    let mut out = Vec::with_capacity(region.voxel_count());
    for z in region.start[0]..region.start[0] + region.dims[0] {
        for y in region.start[1]..region.start[1] + region.dims[1] {
            for x in region.start[2]..region.start[2] + region.dims[2] {
                out.push((z * dims[1] + y) * dims[2] + x);
            }
        }
    }
    out
}

fn plant(voxels: &mut [f64], dims: [usize; 3], region: &Region, kind: LesionKind, effect: f64, rng: &mut ChaCha8Rng) {
    let idx = region_indices(dims, region);
    let (shift, rough) = match kind {
        LesionKind::IntensityShift => (effect, 0.0),
        LesionKind::TextureRoughening => (0.0, effect),
        LesionKind::Mixed => (effect / 2.0, effect / 2.0),
    };
    if rough > 0.0 {
        // White noise, then an affine map restoring the region's mean and std.
        let (m0, s0) = moments(idx.iter().map(|&i| voxels[i]));
        for &i in &idx {
            voxels[i] += rough * SIGMA * rng.sample::<f64, _>(StandardNormal);
        }
        let (m1, s1) = moments(idx.iter().map(|&i| voxels[i]));
        let gain = if s1 > 0.0 { s0 / s1 } else { 1.0 };
        for &i in &idx {
            voxels[i] = m0 + (voxels[i] - m1) * gain;
        }
    }
    if shift > 0.0 {
        for &i in &idx {
            voxels[i] += shift * SIGMA;
        }
    }
}

fn moments(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, libm::sqrt(var))
}

/// Box-smoothed Gaussian noise with zero mean and unit standard deviation.
pub fn smooth_field<G: Rng + ?Sized>(dims: [usize; 3], rng: &mut G) -> Vec<f64> {
    let n: usize = dims.iter().product();
    let mut field: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
    for axis in 0..3 {
        field = box_smooth_axis(&field, dims, axis, SMOOTHING_RADIUS);
    }
    let (mean, std) = moments(field.iter().copied());
    let scale = if std > 0.0 { 1.0 / std } else { 0.0 };
    field.iter_mut().for_each(|v| *v = (*v - mean) * scale);
    field
}

/// Moving average of width 2r+1 along `axis`, indices clamped to the edge.
fn box_smooth_axis(src: &[f64], dims: [usize; 3], axis: usize, r: usize) -> Vec<f64> {
    let stride = match axis {
        0 => dims[1] * dims[2],
        1 => dims[2],
        _ => 1,
    };
    let len = dims[axis];
    let width = (2 * r + 1) as f64;
    let mut out = vec![0.0; src.len()];
    for (i, o) in out.iter_mut().enumerate() {
        let pos = (i / stride) % len;
        let line_start = i - pos * stride;
        let mut acc = 0.0;
        for k in 0..=2 * r {
            let p = (pos + k).saturating_sub(r).min(len - 1);
            acc += src[line_start + p * stride];
        }
        *o = acc / width;
    }
    out
}
