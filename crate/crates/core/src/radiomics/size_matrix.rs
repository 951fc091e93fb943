//! Gray level × size count matrices shared by the run-length, size-zone and
//! dependence families, and the emphasis statistics they have in common.

use alloc::vec;
use alloc::vec::Vec;

use super::math::entropy_term;

/// `counts[(level-1) * n_sizes + (size-1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeMatrix {
    pub n_levels: usize,
    pub n_sizes: usize,
    pub counts: Vec<f64>,
}

impl SizeMatrix {
    pub fn new(n_levels: usize, n_sizes: usize) -> Self {
        Self { n_levels, n_sizes, counts: vec![0.0; n_levels * n_sizes] }
    }

    #[inline]
    pub fn add(&mut self, level: u16, size: usize) {
        self.counts[(level as usize - 1) * self.n_sizes + size - 1] += 1.0;
    }

    pub fn get(&self, level: usize, size: usize) -> f64 {
        self.counts[(level - 1) * self.n_sizes + size - 1]
    }

    /// Number of runs / zones / dependence entries.
    pub fn total(&self) -> f64 {
        self.counts.iter().sum()
    }

    /// Σ size · count, which equals the voxel count for runs and zones.
    pub fn weighted_mass(&self) -> f64 {
        self.counts.iter().enumerate().map(|(idx, c)| ((idx % self.n_sizes) + 1) as f64 * c).sum()
    }
}

/// Statistics of a normalized gray-level × size matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeStats {
    pub small_emphasis: f64,
    pub large_emphasis: f64,
    pub gray_nonuniformity: f64,
    pub gray_nonuniformity_norm: f64,
    pub size_nonuniformity: f64,
    pub size_nonuniformity_norm: f64,
    /// Entries over voxels.
    pub percentage: f64,
    pub gray_variance: f64,
    pub size_variance: f64,
    pub entropy: f64,
    pub low_gray: f64,
    pub high_gray: f64,
    pub small_low_gray: f64,
    pub small_high_gray: f64,
    pub large_low_gray: f64,
    pub large_high_gray: f64,
}

impl SizeStats {
    pub fn compute(m: &SizeMatrix, n_voxels: usize) -> SizeStats {
        let total = m.total();
        let mut row = vec![0.0; m.n_levels];
        let mut col = vec![0.0; m.n_sizes];
        let mut s = SizeStats {
            small_emphasis: 0.0,
            large_emphasis: 0.0,
            gray_nonuniformity: 0.0,
            gray_nonuniformity_norm: 0.0,
            size_nonuniformity: 0.0,
            size_nonuniformity_norm: 0.0,
            percentage: total / n_voxels as f64,
            gray_variance: 0.0,
            size_variance: 0.0,
            entropy: 0.0,
            low_gray: 0.0,
            high_gray: 0.0,
            small_low_gray: 0.0,
            small_high_gray: 0.0,
            large_low_gray: 0.0,
            large_high_gray: 0.0,
        };
        let (mut mean_i, mut mean_j) = (0.0, 0.0);
        for i in 0..m.n_levels {
            for j in 0..m.n_sizes {
                let c = m.counts[i * m.n_sizes + j];
                if c == 0.0 {
                    continue;
                }
                let p = c / total;
                let (gi, sj) = ((i + 1) as f64, (j + 1) as f64);
                let (i2, j2) = (gi * gi, sj * sj);
                row[i] += c;
                col[j] += c;
                mean_i += p * gi;
                mean_j += p * sj;
                s.small_emphasis += p / j2;
                s.large_emphasis += p * j2;
                s.entropy += entropy_term(p);
                s.low_gray += p / i2;
                s.high_gray += p * i2;
                s.small_low_gray += p / (i2 * j2);
                s.small_high_gray += p * i2 / j2;
                s.large_low_gray += p * j2 / i2;
                s.large_high_gray += p * i2 * j2;
            }
        }
        for i in 0..m.n_levels {
            for j in 0..m.n_sizes {
                let c = m.counts[i * m.n_sizes + j];
                if c == 0.0 {
                    continue;
                }
                let p = c / total;
                let (gi, sj) = ((i + 1) as f64, (j + 1) as f64);
                s.gray_variance += p * (gi - mean_i) * (gi - mean_i);
                s.size_variance += p * (sj - mean_j) * (sj - mean_j);
            }
        }
        let row_sq: f64 = row.iter().map(|r| r * r).sum();
        let col_sq: f64 = col.iter().map(|c| c * c).sum();
        s.gray_nonuniformity = row_sq / total;
        s.gray_nonuniformity_norm = row_sq / (total * total);
        s.size_nonuniformity = col_sq / total;
        s.size_nonuniformity_norm = col_sq / (total * total);
        s
    }

    /// The 16-entry layout used by the run-length and size-zone families.
    pub fn as_sixteen(&self) -> [f64; 16] {
        [
            self.small_emphasis,
            self.large_emphasis,
            self.gray_nonuniformity,
            self.gray_nonuniformity_norm,
            self.size_nonuniformity,
            self.size_nonuniformity_norm,
            self.percentage,
            self.gray_variance,
            self.size_variance,
            self.entropy,
            self.low_gray,
            self.high_gray,
            self.small_low_gray,
            self.small_high_gray,
            self.large_low_gray,
            self.large_high_gray,
        ]
    }
}
