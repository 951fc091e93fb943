//! Voxel-based 3D shape descriptors of a binary mask.
//!
//! Surface area counts exposed voxel faces; diameters are distances between
//! voxel centers; axis lengths come from the principal moments of the
//! foreground voxel centers.

use alloc::vec::Vec;
use core::f64::consts::PI;

use super::discretize::DiscretizedPatch;
use super::eigen::symmetric_eigenvalues;
use super::math::{cbrt, sq, sqrt};
use crate::error::{Error, Result};
use crate::volume::Volume;

pub const COUNT: usize = 16;

/// Otsu foreground (levels above the threshold maximizing between-class
/// variance, smallest threshold on ties). Constant patches use the full patch.
pub fn otsu_mask(dp: &DiscretizedPatch) -> Vec<bool> {
    let hist = dp.histogram();
    let total = dp.voxel_count() as f64;
    let sum_all: f64 = hist.iter().enumerate().map(|(i, &c)| (i + 1) as f64 * c as f64).sum();
    let mut best = (f64::NEG_INFINITY, None);
    let (mut w0, mut sum0) = (0.0, 0.0);
    for t in 1..dp.n_levels() {
        let c = hist[t - 1] as f64;
        w0 += c;
        sum0 += t as f64 * c;
        let w1 = total - w0;
        if w0 == 0.0 || w1 == 0.0 {
            continue;
        }
        let diff = sum0 / w0 - (sum_all - sum0) / w1;
        let between = w0 * w1 * diff * diff;
        if between > best.0 {
            best = (between, Some(t as u16));
        }
    }
    match best.1 {
        Some(t) => dp.levels().iter().map(|&l| l > t).collect(),
        None => alloc::vec![true; dp.voxel_count()],
    }
}

/// Eigenvalues of a symmetric 3×3 matrix, descending, negatives clamped to 0.
/// Iterative rather than closed form so exactly decoupled axes stay exactly 0.
pub fn symmetric3_eigenvalues(m: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a: [f64; 9] = core::array::from_fn(|k| m[k / 3][k % 3]);
    let e = symmetric_eigenvalues(&mut a, 3);
    [e[0], e[1], e[2]].map(|v| v.max(0.0))
}

fn max_pairwise(points: &[[f64; 3]], same_group: impl Fn(&[f64; 3], &[f64; 3]) -> bool) -> f64 {
    let mut best = 0.0f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            if same_group(a, b) {
                let d2 = sq(a[0] - b[0]) + sq(a[1] - b[1]) + sq(a[2] - b[2]);
                best = best.max(d2);
            }
        }
    }
    sqrt(best)
}

/// The 16 shape descriptors for `mask` over `patch` (spacing taken from the patch).
pub fn shape_features(patch: &Volume, mask: &[bool]) -> Result<[f64; COUNT]> {
    if mask.len() != patch.len() {
        return Err(Error::LengthMismatch { expected: patch.len(), actual: mask.len() });
    }
    let dims = patch.dims();
    let sp = patch.spacing();
    let face_area = [sp[1] * sp[2], sp[0] * sp[2], sp[0] * sp[1]];
    let inside = |p: [isize; 3]| -> bool {
        (0..3).all(|a| p[a] >= 0 && (p[a] as usize) < dims[a])
            && mask[(p[0] as usize * dims[1] + p[1] as usize) * dims[2] + p[2] as usize]
    };

    let mut n_fg = 0usize;
    let mut area = 0.0;
    let mut centers = Vec::new();
    let mut boundary = Vec::new();
    for z in 0..dims[0] {
        for y in 0..dims[1] {
            for x in 0..dims[2] {
                if !mask[patch.index(z, y, x)] {
                    continue;
                }
                n_fg += 1;
                let p = [z as isize, y as isize, x as isize];
                let mut exposed = false;
                for a in 0..3 {
                    for s in [-1, 1] {
                        let mut q = p;
                        q[a] += s;
                        if !inside(q) {
                            area += face_area[a];
                            exposed = true;
                        }
                    }
                }
                let c = [z as f64 * sp[0], y as f64 * sp[1], x as f64 * sp[2]];
                centers.push(c);
                if exposed {
                    boundary.push(c);
                }
            }
        }
    }
    if n_fg == 0 {
        return Err(Error::EmptyShapeMask);
    }

    let volume = n_fg as f64 * patch.voxel_volume();
    let v2 = volume * volume;
    let sphere_term = cbrt(36.0 * PI * v2);
    let sphericity = sphere_term / area;
    let compactness1 = volume / (sqrt(PI) * area * sqrt(area));
    let compactness2 = 36.0 * PI * v2 / (area * area * area);
    let disproportion = area / sphere_term;

    let max3d = max_pairwise(&boundary, |_, _| true);
    let max_slice = max_pairwise(&boundary, |a, b| a[0] == b[0]);
    // Column: coronal plane (fixed row y); Row: sagittal plane (fixed column x).
    let max_column = max_pairwise(&boundary, |a, b| a[1] == b[1]);
    let max_row = max_pairwise(&boundary, |a, b| a[2] == b[2]);

    let n = centers.len() as f64;
    let mean: [f64; 3] = core::array::from_fn(|a| centers.iter().map(|c| c[a]).sum::<f64>() / n);
    let mut cov = [[0.0; 3]; 3];
    for c in &centers {
        let d = [c[0] - mean[0], c[1] - mean[1], c[2] - mean[2]];
        for i in 0..3 {
            for j in 0..3 {
                cov[i][j] += d[i] * d[j] / n;
            }
        }
    }
    let [major, minor, least] = symmetric3_eigenvalues(cov);
    let (elongation, flatness) = if major > 0.0 { (sqrt(minor / major), sqrt(least / major)) } else { (1.0, 1.0) };

    Ok([
        volume,
        area,
        area / volume,
        sphericity,
        compactness1,
        compactness2,
        disproportion,
        max3d,
        max_slice,
        max_column,
        max_row,
        4.0 * sqrt(major),
        4.0 * sqrt(minor),
        4.0 * sqrt(least),
        elongation,
        flatness,
    ])
}
