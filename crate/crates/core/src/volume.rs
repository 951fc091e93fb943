//! Volumes, studies, and the deterministic geometric preprocessing steps:
//! trilinear resizing, ROI cropping and patch decomposition.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One 3D scalar image. Voxels are stored depth-major, then height, then width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Volume {
    dims: [usize; 3],
    voxels: Vec<f64>,
    spacing: [f64; 3],
}

impl Volume {
    pub fn new(dims: [usize; 3], voxels: Vec<f64>, spacing: [f64; 3]) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidDims(format!("{dims:?} has a zero axis")));
        }
        let n = dims[0] * dims[1] * dims[2];
        if voxels.len() != n {
            return Err(Error::InvalidVolume(format!(
                "{} voxels for dims {dims:?} (expected {n})",
                voxels.len()
            )));
        }
        if let Some(pos) = voxels.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidVolume(format!("non-finite intensity at voxel {pos}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidVolume(format!("spacing {spacing:?} must be positive")));
        }
        Ok(Self { dims, voxels, spacing })
    }

    /// Unit-spacing volume.
    pub fn from_voxels(dims: [usize; 3], voxels: Vec<f64>) -> Result<Self> {
        Self::new(dims, voxels, [1.0; 3])
    }

    pub fn filled(dims: [usize; 3], value: f64) -> Result<Self> {
        Self::from_voxels(dims, alloc::vec![value; dims.iter().product()])
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn voxels(&self) -> &[f64] {
        &self.voxels
    }

    pub fn into_voxels(self) -> Vec<f64> {
        self.voxels
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    #[inline]
    pub fn index(&self, z: usize, y: usize, x: usize) -> usize {
        (z * self.dims[1] + y) * self.dims[2] + x
    }

    #[inline]
    pub fn get(&self, z: usize, y: usize, x: usize) -> f64 {
        self.voxels[self.index(z, y, x)]
    }

    pub fn min_max(&self) -> (f64, f64) {
        self.voxels
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
    }

    /// Voxel volume in mm³.
    pub fn voxel_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Copies the voxels of `region` into a new volume.
    pub fn crop(&self, region: &Region) -> Result<Volume> {
        for axis in 0..3 {
            if region.dims[axis] == 0 || region.start[axis] + region.dims[axis] > self.dims[axis] {
                return Err(Error::RoiOutOfBounds(format!(
                    "region {region:?} vs volume dims {:?}",
                    self.dims
                )));
            }
        }
        let [d, h, w] = region.dims;
        let mut out = Vec::with_capacity(d * h * w);
        for z in 0..d {
            for y in 0..h {
                let row = self.index(region.start[0] + z, region.start[1] + y, region.start[2]);
                out.extend_from_slice(&self.voxels[row..row + w]);
            }
        }
        Ok(Volume { dims: region.dims, voxels: out, spacing: self.spacing })
    }
}

/// An axis-aligned box inside a volume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub start: [usize; 3],
    pub dims: [usize; 3],
}

impl Region {
    pub fn contains(&self, p: [usize; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.start[a] && p[a] < self.start[a] + self.dims[a])
    }

    /// Region expressed in the coordinates of an enclosing volume where `self`
    /// is relative to `outer.start`.
    pub fn offset_by(&self, outer: &Region) -> Region {
        Region {
            start: core::array::from_fn(|a| self.start[a] + outer.start[a]),
            dims: self.dims,
        }
    }

    pub fn voxel_count(&self) -> usize {
        self.dims.iter().product()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Axial,
    Coronal,
    Sagittal,
}

impl View {
    pub const ALL: [View; 3] = [View::Axial, View::Coronal, View::Sagittal];

    /// Zero-based position in the per-patch feature block.
    pub fn position(self) -> usize {
        self as usize
    }

    pub fn from_position(p: usize) -> Option<View> {
        View::ALL.get(p).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            View::Axial => "axial",
            View::Coronal => "coronal",
            View::Sagittal => "sagittal",
        }
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Abnormal,
    Acl,
    Meniscus,
}

impl Task {
    pub const ALL: [Task; 3] = [Task::Abnormal, Task::Acl, Task::Meniscus];

    pub fn name(self) -> &'static str {
        match self {
            Task::Abnormal => "abnormal",
            Task::Acl => "acl",
            Task::Meniscus => "meniscus",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown task {s:?}")))
    }
}

/// Three co-registered views of one exam plus its binary labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Study {
    pub study_id: String,
    /// Indexed by [`View::position`].
    pub views: [Volume; 3],
    pub labels: BTreeMap<Task, u8>,
}

impl Study {
    pub fn new(study_id: impl Into<String>, views: [Volume; 3], labels: BTreeMap<Task, u8>) -> Result<Self> {
        if let Some((task, v)) = labels.iter().find(|(_, &v)| v > 1) {
            return Err(Error::InvalidConfig(format!("label {task} = {v} is not binary")));
        }
        Ok(Self { study_id: study_id.into(), views, labels })
    }

    pub fn view(&self, view: View) -> &Volume {
        &self.views[view.position()]
    }

    pub fn label(&self, task: Task) -> Option<u8> {
        self.labels.get(&task).copied()
    }

    /// Whether all three views share the same dims.
    pub fn is_aligned(&self) -> bool {
        self.views.iter().all(|v| v.dims() == self.views[0].dims())
    }

    /// Resizes every view to `target`; a no-op clone when dims already match.
    pub fn resized(&self, target: [usize; 3]) -> Result<Study> {
        let views = [
            resize_trilinear(&self.views[0], target)?,
            resize_trilinear(&self.views[1], target)?,
            resize_trilinear(&self.views[2], target)?,
        ];
        Ok(Study { study_id: self.study_id.clone(), views, labels: self.labels.clone() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RoiAnchor {
    Centered,
    Offsets([usize; 3]),
}

/// ROI as fractions of the volume extent along (depth, height, width).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoiSpec {
    pub fractions: [f64; 3],
    pub anchor: RoiAnchor,
}

impl Default for RoiSpec {
    /// Half the depth, 30% of the height and half the width, centered.
    fn default() -> Self {
        Self { fractions: [0.5, 0.3, 0.5], anchor: RoiAnchor::Centered }
    }
}

impl RoiSpec {
    pub fn centered(fractions: [f64; 3]) -> Result<Self> {
        let spec = Self { fractions, anchor: RoiAnchor::Centered };
        spec.validate()?;
        Ok(spec)
    }

    pub fn full() -> Self {
        Self { fractions: [1.0; 3], anchor: RoiAnchor::Centered }
    }

    pub fn validate(&self) -> Result<()> {
        if self.fractions.iter().any(|&f| !(f > 0.0 && f <= 1.0)) {
            return Err(Error::InvalidConfig(format!(
                "ROI fractions {:?} must lie in (0, 1]",
                self.fractions
            )));
        }
        Ok(())
    }

    /// ROI box for a volume of `dims`: floor(fraction * dim) per axis, at least 1.
    pub fn region(&self, dims: [usize; 3]) -> Result<Region> {
        self.validate()?;
        let roi_dims: [usize; 3] =
            core::array::from_fn(|a| ((self.fractions[a] * dims[a] as f64) as usize).max(1));
        let start = match self.anchor {
            RoiAnchor::Centered => core::array::from_fn(|a| (dims[a] - roi_dims[a]) / 2),
            RoiAnchor::Offsets(off) => {
                for a in 0..3 {
                    if off[a] + roi_dims[a] > dims[a] {
                        return Err(Error::RoiOutOfBounds(format!(
                            "offset {off:?} with ROI dims {roi_dims:?} exceeds volume dims {dims:?}"
                        )));
                    }
                }
                off
            }
        };
        Ok(Region { start, dims: roi_dims })
    }
}

/// Number of patches along (depth, height, width); each axis in 1..=3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatchGrid {
    shape: [usize; 3],
}

impl PatchGrid {
    pub fn new(shape: [usize; 3]) -> Result<Self> {
        if shape.iter().any(|&n| !(1..=3).contains(&n)) {
            return Err(Error::InvalidConfig(format!("patch grid {shape:?}: each axis must be 1, 2 or 3")));
        }
        Ok(Self { shape })
    }

    pub fn cube(n: usize) -> Result<Self> {
        Self::new([n; 3])
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    /// Number of patches J.
    pub fn patch_count(&self) -> usize {
        self.shape.iter().product()
    }

    /// 1×1×1, 2×2×2 and 3×3×3 are the standard configurations.
    pub fn is_standard(&self) -> bool {
        self.shape[0] == self.shape[1] && self.shape[1] == self.shape[2]
    }

    /// Zero-based patch index of grid coordinate (z, y, x).
    pub fn patch_index(&self, coord: [usize; 3]) -> usize {
        (coord[0] * self.shape[1] + coord[1]) * self.shape[2] + coord[2]
    }

    pub fn patch_coord(&self, index: usize) -> [usize; 3] {
        let x = index % self.shape[2];
        let y = (index / self.shape[2]) % self.shape[1];
        let z = index / (self.shape[2] * self.shape[1]);
        [z, y, x]
    }

    /// Patch boxes relative to an ROI of `roi_dims`, in patch-index order.
    /// Cut points sit at round(dim * i / n), so patches tile the ROI exactly.
    pub fn regions(&self, roi_dims: [usize; 3]) -> Result<Vec<Region>> {
        if (0..3).any(|a| self.shape[a] > roi_dims[a]) {
            return Err(Error::GridTooLarge { grid: self.shape, roi: roi_dims });
        }
        let cuts: [Vec<usize>; 3] = core::array::from_fn(|a| {
            let (dim, n) = (roi_dims[a], self.shape[a]);
            (0..=n).map(|i| (2 * dim * i + n) / (2 * n)).collect()
        });
        let mut out = Vec::with_capacity(self.patch_count());
        for z in 0..self.shape[0] {
            for y in 0..self.shape[1] {
                for x in 0..self.shape[2] {
                    let c = [z, y, x];
                    out.push(Region {
                        start: core::array::from_fn(|a| cuts[a][c[a]]),
                        dims: core::array::from_fn(|a| cuts[a][c[a] + 1] - cuts[a][c[a]]),
                    });
                }
            }
        }
        Ok(out)
    }
}

impl fmt::Display for PatchGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.shape[0], self.shape[1], self.shape[2])
    }
}

impl FromStr for PatchGrid {
    type Err = Error;

    /// Accepts `2`, `2x2x2` or `1x2x3`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(['x', 'X', '*', ',']).collect();
        let parse = |p: &str| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidConfig(format!("bad patch grid {s:?}")))
        };
        match parts.as_slice() {
            [n] => PatchGrid::cube(parse(n)?),
            [a, b, c] => PatchGrid::new([parse(a)?, parse(b)?, parse(c)?]),
            _ => Err(Error::InvalidConfig(format!("bad patch grid {s:?}"))),
        }
    }
}

/// Corner-aligned trilinear resampling to `target` dims.
pub fn resize_trilinear(v: &Volume, target: [usize; 3]) -> Result<Volume> {
    if target.iter().any(|&t| t == 0) {
        return Err(Error::InvalidDims(format!("zero-size resize target {target:?}")));
    }
    let src = v.dims();
    if src == target {
        return Ok(v.clone());
    }
    // Per-axis (lower index, upper index, upper weight).
    let axis_samples = |a: usize| -> Vec<(usize, usize, f64)> {
        (0..target[a])
            .map(|i| {
                if target[a] == 1 || src[a] == 1 {
                    return (0, 0, 0.0);
                }
                let pos = (i * (src[a] - 1)) as f64 / (target[a] - 1) as f64;
                let lo = (pos as usize).min(src[a] - 1);
                let hi = (lo + 1).min(src[a] - 1);
                (lo, hi, pos - lo as f64)
            })
            .collect()
    };
    let (zs, ys, xs) = (axis_samples(0), axis_samples(1), axis_samples(2));
    let lerp = |a: f64, b: f64, t: f64| if t == 0.0 { a } else { a + (b - a) * t };
    let mut out = Vec::with_capacity(target.iter().product());
    for &(z0, z1, tz) in &zs {
        for &(y0, y1, ty) in &ys {
            for &(x0, x1, tx) in &xs {
                let plane = |z: usize| {
                    let r0 = lerp(v.get(z, y0, x0), v.get(z, y0, x1), tx);
                    let r1 = lerp(v.get(z, y1, x0), v.get(z, y1, x1), tx);
                    lerp(r0, r1, ty)
                };
                let val = if tz == 0.0 { plane(z0) } else { lerp(plane(z0), plane(z1), tz) };
                out.push(val);
            }
        }
    }
    let spacing: [f64; 3] = core::array::from_fn(|a| v.spacing()[a] * src[a] as f64 / target[a] as f64);
    Volume::new(target, out, spacing)
}

pub fn extract_roi(v: &Volume, spec: &RoiSpec) -> Result<Volume> {
    v.crop(&spec.region(v.dims())?)
}

/// Splits an ROI into the grid's J patches in patch-index order.
pub fn decompose_patches(roi: &Volume, grid: &PatchGrid) -> Result<Vec<Volume>> {
    grid.regions(roi.dims())?.iter().map(|r| roi.crop(r)).collect()
}
