use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::volume::Volume;

/// The 13 unique 3D offsets at distance 1 as (dz, dy, dx); each stands for
/// itself and its negation.
pub const DIRECTIONS: [[isize; 3]; 13] = [
    [0, 0, 1],
    [0, 1, -1],
    [0, 1, 0],
    [0, 1, 1],
    [1, -1, -1],
    [1, -1, 0],
    [1, -1, 1],
    [1, 0, -1],
    [1, 0, 0],
    [1, 0, 1],
    [1, 1, -1],
    [1, 1, 0],
    [1, 1, 1],
];

/// Gray levels in `1..=n_levels`, one per voxel, same layout as the source patch.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretizedPatch {
    dims: [usize; 3],
    levels: Vec<u16>,
    n_levels: usize,
}

impl DiscretizedPatch {
    /// Builds a patch from explicit levels. Levels must lie in `1..=n_levels`.
    pub fn from_levels(dims: [usize; 3], levels: Vec<u16>, n_levels: usize) -> Result<Self> {
        if levels.is_empty() || dims.iter().product::<usize>() != levels.len() {
            return Err(Error::EmptyPatch);
        }
        if n_levels == 0 || levels.iter().any(|&l| l == 0 || l as usize > n_levels) {
            return Err(Error::InvalidVolume("gray level outside 1..=n_levels".into()));
        }
        Ok(Self { dims, levels, n_levels })
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    pub fn levels(&self) -> &[u16] {
        &self.levels
    }

    /// N_g.
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    pub fn voxel_count(&self) -> usize {
        self.levels.len()
    }

    #[inline]
    pub fn index(&self, p: [usize; 3]) -> usize {
        (p[0] * self.dims[1] + p[1]) * self.dims[2] + p[2]
    }

    #[inline]
    pub fn level(&self, p: [usize; 3]) -> u16 {
        self.levels[self.index(p)]
    }

    /// `p + step * dir` when it stays inside the patch.
    #[inline]
    pub fn step(&self, p: [usize; 3], dir: [isize; 3], step: isize) -> Option<[usize; 3]> {
        let mut q = [0usize; 3];
        for a in 0..3 {
            let c = p[a] as isize + step * dir[a];
            if c < 0 || c >= self.dims[a] as isize {
                return None;
            }
            q[a] = c as usize;
        }
        Some(q)
    }

    pub fn coords(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        let [d, h, w] = self.dims;
        (0..d).flat_map(move |z| (0..h).flat_map(move |y| (0..w).map(move |x| [z, y, x])))
    }

    /// In-bounds members of the 26-neighborhood of `p`.
    pub fn neighbors(&self, p: [usize; 3]) -> impl Iterator<Item = [usize; 3]> + '_ {
        DIRECTIONS
            .iter()
            .flat_map(move |&d| [self.step(p, d, 1), self.step(p, d, -1)])
            .flatten()
    }

    /// Voxel count per level; index 0 is level 1.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = alloc::vec![0usize; self.n_levels];
        for &l in &self.levels {
            h[l as usize - 1] += 1;
        }
        h
    }
}

/// Min-max equal-width binning into `n_bins` levels. A constant patch maps to
/// a single level.
pub fn discretize(patch: &Volume, n_bins: usize) -> Result<DiscretizedPatch> {
    if patch.is_empty() {
        return Err(Error::EmptyPatch);
    }
    if n_bins == 0 || n_bins > u16::MAX as usize {
        return Err(Error::InvalidConfig("bin count must be in 1..=65535".into()));
    }
    let (lo, hi) = patch.min_max();
    let range = hi - lo;
    if range <= 0.0 {
        return DiscretizedPatch::from_levels(patch.dims(), alloc::vec![1; patch.len()], 1);
    }
    let levels = patch
        .voxels()
        .iter()
        .map(|&v| {
            let bin = ((v - lo) * n_bins as f64 / range) as usize;
            (bin.min(n_bins - 1) + 1) as u16
        })
        .collect();
    DiscretizedPatch::from_levels(patch.dims(), levels, n_bins)
}
