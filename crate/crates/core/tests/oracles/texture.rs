//! Brute-force reference for every texture matrix and direct evaluation of all
//! 110 per-patch features on small random patches.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::time::Instant;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use radfp_core::radiomics::{
    discretize, gldm_matrix, glcm_matrices, glrlm_matrices, glszm_matrix, ngtdm_matrix, patch_features, DiscretizedPatch,
    SizeMatrix, FEATURES_PER_PATCH,
};
use radfp_core::volume::Volume;

const PATCHES: usize = 50;
const REL_TOL: f64 = 1e-9;
/// Values at rounding-noise scale are compared absolutely.
const ABS_FLOOR: f64 = 1e-12;

type Coord = [usize; 3];

struct Patch {
    dims: [usize; 3],
    spacing: [f64; 3],
    values: Vec<f64>,
    n_bins: usize,
}

impl Patch {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        loop {
            let dims = [rng.random_range(1..=4), rng.random_range(1..=4), rng.random_range(1..=4)];
            if dims.iter().product::<usize>() < 2 {
                continue;
            }
            let n = dims.iter().product();
            // Coarse values so ties and equal levels are common.
            let values = (0..n).map(|_| rng.random_range(0..6) as f64 * 0.75 + 10.0).collect();
            let spacing = [rng.random_range(0.5..2.0), rng.random_range(0.5..2.0), rng.random_range(0.5..2.0)];
            return Self { dims, spacing, values, n_bins: rng.random_range(1..=4) };
        }
    }

    fn volume(&self) -> Volume {
        Volume::new(self.dims, self.values.clone(), self.spacing).unwrap()
    }

    fn coords(&self) -> Vec<Coord> {
        let [d, h, w] = self.dims;
        let mut out = Vec::new();
        for z in 0..d {
            for y in 0..h {
                for x in 0..w {
                    out.push([z, y, x]);
                }
            }
        }
        out
    }

    fn idx(&self, c: Coord) -> usize {
        (c[0] * self.dims[1] + c[1]) * self.dims[2] + c[2]
    }

    fn shifted(&self, c: Coord, d: [i64; 3], k: i64) -> Option<Coord> {
        let mut out = [0; 3];
        for a in 0..3 {
            let v = c[a] as i64 + k * d[a];
            if v < 0 || v >= self.dims[a] as i64 {
                return None;
            }
            out[a] = v as usize;
        }
        Some(out)
    }
}

/// Levels by the equal-width bin rule, written out independently.
fn oracle_levels(p: &Patch) -> (Vec<usize>, usize) {
    let lo = p.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = p.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if hi == lo {
        return (vec![1; p.values.len()], 1);
    }
    let levels = p
        .values
        .iter()
        .map(|v| {
            let b = ((v - lo) / (hi - lo) * p.n_bins as f64).floor() as usize;
            b.min(p.n_bins - 1) + 1
        })
        .collect();
    (levels, p.n_bins)
}

/// 13 half-space directions, built by filtering the 26-neighborhood.
fn directions() -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                let first_nonzero = [dz, dy, dx].into_iter().find(|&v| v != 0);
                if first_nonzero == Some(1) {
                    out.push([dz, dy, dx]);
                }
            }
        }
    }
    out
}

fn neighbors26() -> Vec<[i64; 3]> {
    let mut out = Vec::new();
    for dz in -1i64..=1 {
        for dy in -1i64..=1 {
            for dx in -1i64..=1 {
                if (dz, dy, dx) != (0, 0, 0) {
                    out.push([dz, dy, dx]);
                }
            }
        }
    }
    out
}

// ---- matrices ----

/// Pair enumeration: every ordered voxel pair whose displacement is ±d.
fn glcm_oracle(p: &Patch, lv: &[usize], ng: usize, d: [i64; 3]) -> Vec<f64> {
    let mut m = vec![0.0; ng * ng];
    let cs = p.coords();
    for &a in &cs {
        for &b in &cs {
            let disp: Vec<i64> = (0..3).map(|k| b[k] as i64 - a[k] as i64).collect();
            let plus = (0..3).all(|k| disp[k] == d[k]);
            let minus = (0..3).all(|k| disp[k] == -d[k]);
            if plus || minus {
                m[(lv[p.idx(a)] - 1) * ng + lv[p.idx(b)] - 1] += 1.0;
            }
        }
    }
    m
}

/// Run scan along every line parallel to d.
fn glrlm_oracle(p: &Patch, lv: &[usize], d: [i64; 3]) -> BTreeMap<(usize, usize), f64> {
    let mut runs = BTreeMap::new();
    for c in p.coords() {
        if p.shifted(c, d, -1).is_some() {
            continue;
        }
        let mut line = vec![lv[p.idx(c)]];
        let mut k = 1;
        while let Some(q) = p.shifted(c, d, k) {
            line.push(lv[p.idx(q)]);
            k += 1;
        }
        let mut start = 0;
        for i in 1..=line.len() {
            if i == line.len() || line[i] != line[start] {
                *runs.entry((line[start], i - start)).or_insert(0.0) += 1.0;
                start = i;
            }
        }
    }
    runs
}

fn find(parent: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while parent[r] != r {
        r = parent[r];
    }
    let mut y = x;
    while parent[y] != r {
        let next = parent[y];
        parent[y] = r;
        y = next;
    }
    r
}

/// Union-find over equal-level 26-adjacent voxels.
fn glszm_oracle(p: &Patch, lv: &[usize]) -> BTreeMap<(usize, usize), f64> {
    let n = lv.len();
    let mut parent: Vec<usize> = (0..n).collect();
    for c in p.coords() {
        for d in neighbors26() {
            if let Some(q) = p.shifted(c, d, 1) {
                let (a, b) = (p.idx(c), p.idx(q));
                if lv[a] == lv[b] {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
    }
    let mut size: BTreeMap<usize, (usize, usize)> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        size.entry(r).or_insert((lv[i], 0)).1 += 1;
    }
    let mut zones = BTreeMap::new();
    for (_, (level, s)) in size {
        *zones.entry((level, s)).or_insert(0.0) += 1.0;
    }
    zones
}

fn gldm_oracle(p: &Patch, lv: &[usize]) -> BTreeMap<(usize, usize), f64> {
    let mut m = BTreeMap::new();
    for c in p.coords() {
        let equal = neighbors26()
            .into_iter()
            .filter_map(|d| p.shifted(c, d, 1))
            .filter(|&q| lv[p.idx(q)] == lv[p.idx(c)])
            .count();
        *m.entry((lv[p.idx(c)], equal + 1)).or_insert(0.0) += 1.0;
    }
    m
}

/// (n_i, s_i) per level.
fn ngtdm_oracle(p: &Patch, lv: &[usize], ng: usize) -> (Vec<f64>, Vec<f64>) {
    let (mut n, mut s) = (vec![0.0; ng], vec![0.0; ng]);
    for c in p.coords() {
        let nb: Vec<f64> =
            neighbors26().into_iter().filter_map(|d| p.shifted(c, d, 1)).map(|q| lv[p.idx(q)] as f64).collect();
        if nb.is_empty() {
            continue;
        }
        let avg = nb.iter().sum::<f64>() / nb.len() as f64;
        let l = lv[p.idx(c)];
        n[l - 1] += 1.0;
        s[l - 1] += (l as f64 - avg).abs();
    }
    (n, s)
}

fn sparse(m: &SizeMatrix) -> BTreeMap<(usize, usize), f64> {
    let mut out = BTreeMap::new();
    for g in 1..=m.n_levels {
        for s in 1..=m.n_sizes {
            let c = m.get(g, s);
            if c != 0.0 {
                out.insert((g, s), c);
            }
        }
    }
    out
}

// ---- features ----

fn plog(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

fn glcm_feature_oracle(counts: &[f64], ng: usize) -> Vec<f64> {
    let total: f64 = counts.iter().sum();
    let p = |i: usize, j: usize| counts[(i - 1) * ng + (j - 1)] / total;
    let levels: Vec<usize> = (1..=ng).collect();
    let px = |i: usize| levels.iter().map(|&j| p(i, j)).sum::<f64>();
    let py = |j: usize| levels.iter().map(|&i| p(i, j)).sum::<f64>();
    let mut mux = 0.0;
    let mut muy = 0.0;
    for &i in &levels {
        for &j in &levels {
            mux += i as f64 * p(i, j);
            muy += j as f64 * p(i, j);
        }
    }
    let sigx = levels.iter().map(|&i| (i as f64 - mux).powi(2) * px(i)).sum::<f64>().sqrt();
    let sigy = levels.iter().map(|&j| (j as f64 - muy).powi(2) * py(j)).sum::<f64>().sqrt();
    let pxpy: Vec<f64> = (2..=2 * ng).map(|k| {
        let mut acc = 0.0;
        for &i in &levels {
            for &j in &levels {
                if i + j == k {
                    acc += p(i, j);
                }
            }
        }
        acc
    }).collect();
    let pxmy: Vec<f64> = (0..ng).map(|k| {
        let mut acc = 0.0;
        for &i in &levels {
            for &j in &levels {
                if i.abs_diff(j) == k {
                    acc += p(i, j);
                }
            }
        }
        acc
    }).collect();
    let sum_ij = |f: &dyn Fn(f64, f64, f64) -> f64| {
        let mut acc = 0.0;
        for &i in &levels {
            for &j in &levels {
                acc += f(i as f64, j as f64, p(i, j));
            }
        }
        acc
    };
    let autocorrelation = sum_ij(&|i, j, v| i * j * v);
    let cluster = |e: i32| sum_ij(&|i, j, v| (i + j - mux - muy).powi(e) * v);
    let contrast = sum_ij(&|i, j, v| (i - j).powi(2) * v);
    let correlation = if sigx * sigy == 0.0 {
        1.0
    } else {
        sum_ij(&|i, j, v| (i - mux) * (j - muy) * v) / (sigx * sigy)
    };
    let da: f64 = pxmy.iter().enumerate().map(|(k, v)| k as f64 * v).sum();
    let de: f64 = pxmy.iter().map(|&v| plog(v)).sum();
    let dv: f64 = pxmy.iter().enumerate().map(|(k, v)| (k as f64 - da).powi(2) * v).sum();
    let energy = sum_ij(&|_, _, v| v * v);
    let hxy = sum_ij(&|_, _, v| plog(v));
    let hx: f64 = levels.iter().map(|&i| plog(px(i))).sum();
    let hy: f64 = levels.iter().map(|&j| plog(py(j))).sum();
    let mut hxy1 = 0.0;
    let mut hxy2 = 0.0;
    for &i in &levels {
        for &j in &levels {
            let m = px(i) * py(j);
            if m > 0.0 {
                hxy1 -= p(i, j) * m.log2();
                hxy2 -= m * m.log2();
            }
        }
    }
    let imc1 = if hx.max(hy) == 0.0 { 0.0 } else { (hxy - hxy1) / hx.max(hy) };
    let imc2 = if hxy2 <= hxy { 0.0 } else { (1.0 - (-2.0 * (hxy2 - hxy)).exp()).sqrt() };
    let n = ng as f64;
    let idm = sum_ij(&|i, j, v| v / (1.0 + (i - j).powi(2)));
    let idmn = sum_ij(&|i, j, v| v / (1.0 + (i - j).powi(2) / (n * n)));
    let id = sum_ij(&|i, j, v| v / (1.0 + (i - j).abs()));
    let idn = sum_ij(&|i, j, v| v / (1.0 + (i - j).abs() / n));
    let inverse_variance = sum_ij(&|i, j, v| if i == j { 0.0 } else { v / (i - j).powi(2) });
    let max_probability = counts.iter().cloned().fold(0.0, f64::max) / total;
    let sa: f64 = pxpy.iter().enumerate().map(|(k, v)| (k + 2) as f64 * v).sum();
    let se: f64 = pxpy.iter().map(|&v| plog(v)).sum();
    let sum_squares = sum_ij(&|i, _, v| (i - mux).powi(2) * v);
    vec![
        autocorrelation,
        mux,
        cluster(4),
        cluster(3),
        cluster(2),
        contrast,
        correlation,
        da,
        de,
        dv,
        energy,
        hxy,
        imc1,
        imc2,
        idm,
        idmn,
        id,
        idn,
        inverse_variance,
        max_probability,
        sa,
        se,
        sum_squares,
        mcc_oracle(counts, ng),
    ]
}

/// √ of the second largest eigenvalue of Q(i,j) = Σ_k p(i,k)p(j,k)/(px(i)px(k)),
/// restricted to occupied levels; 1 when fewer than two levels occur.
fn mcc_oracle(counts: &[f64], ng: usize) -> f64 {
    let total: f64 = counts.iter().sum();
    let p = |i: usize, j: usize| counts[i * ng + j] / total;
    let px: Vec<f64> = (0..ng).map(|i| (0..ng).map(|j| p(i, j)).sum()).collect();
    let occ: Vec<usize> = (0..ng).filter(|&i| px[i] > 0.0).collect();
    if occ.len() < 2 {
        return 1.0;
    }
    let m = occ.len();
    let q = DMatrix::from_fn(m, m, |r, c| {
        let (i, j) = (occ[r], occ[c]);
        occ.iter().map(|&k| p(i, k) * p(j, k) / (px[i] * px[k])).sum::<f64>()
    });
    let mut ev: Vec<f64> = q.complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev[1].clamp(0.0, 1.0).sqrt()
}

struct SizeFeatures {
    sre: f64,
    lre: f64,
    gln: f64,
    glnn: f64,
    rln: f64,
    rlnn: f64,
    pct: f64,
    glv: f64,
    rv: f64,
    entropy: f64,
    lgl: f64,
    hgl: f64,
    slgl: f64,
    shgl: f64,
    llgl: f64,
    lhgl: f64,
}

fn size_feature_oracle(m: &BTreeMap<(usize, usize), f64>, n_voxels: usize) -> SizeFeatures {
    let nz: f64 = m.values().sum();
    let pr = |g: usize, s: usize| m.get(&(g, s)).copied().unwrap_or(0.0) / nz;
    let gmax = m.keys().map(|k| k.0).max().unwrap();
    let smax = m.keys().map(|k| k.1).max().unwrap();
    let sum = |f: &dyn Fn(f64, f64, f64) -> f64| {
        let mut acc = 0.0;
        for g in 1..=gmax {
            for s in 1..=smax {
                let v = pr(g, s);
                if v > 0.0 {
                    acc += f(g as f64, s as f64, v);
                }
            }
        }
        acc
    };
    let gln = (1..=gmax).map(|g| (1..=smax).map(|s| pr(g, s) * nz).sum::<f64>().powi(2)).sum::<f64>();
    let rln = (1..=smax).map(|s| (1..=gmax).map(|g| pr(g, s) * nz).sum::<f64>().powi(2)).sum::<f64>();
    let mu_g = sum(&|g, _, v| g * v);
    let mu_s = sum(&|_, s, v| s * v);
    SizeFeatures {
        sre: sum(&|_, s, v| v / (s * s)),
        lre: sum(&|_, s, v| v * s * s),
        gln: gln / nz,
        glnn: gln / (nz * nz),
        rln: rln / nz,
        rlnn: rln / (nz * nz),
        pct: nz / n_voxels as f64,
        glv: sum(&|g, _, v| v * (g - mu_g).powi(2)),
        rv: sum(&|_, s, v| v * (s - mu_s).powi(2)),
        entropy: sum(&|_, _, v| plog(v)),
        lgl: sum(&|g, _, v| v / (g * g)),
        hgl: sum(&|g, _, v| v * g * g),
        slgl: sum(&|g, s, v| v / (g * g * s * s)),
        shgl: sum(&|g, s, v| v * g * g / (s * s)),
        llgl: sum(&|g, s, v| v * s * s / (g * g)),
        lhgl: sum(&|g, s, v| v * g * g * s * s),
    }
}

impl SizeFeatures {
    fn sixteen(&self) -> Vec<f64> {
        vec![
            self.sre, self.lre, self.gln, self.glnn, self.rln, self.rlnn, self.pct, self.glv, self.rv, self.entropy,
            self.lgl, self.hgl, self.slgl, self.shgl, self.llgl, self.lhgl,
        ]
    }

    fn gldm(&self) -> Vec<f64> {
        vec![
            self.sre, self.lre, self.gln, self.rln, self.rlnn, self.glv, self.rv, self.entropy, self.lgl, self.hgl,
            self.slgl, self.shgl, self.llgl, self.lhgl,
        ]
    }
}

fn ngtdm_feature_oracle(n: &[f64], s: &[f64]) -> Vec<f64> {
    let nvp: f64 = n.iter().sum();
    if nvp == 0.0 {
        return vec![1e6, 0.0, 0.0, 0.0, 0.0];
    }
    let p: Vec<f64> = n.iter().map(|v| v / nvp).collect();
    let occ: Vec<usize> = (0..n.len()).filter(|&i| p[i] > 0.0).collect();
    let ngp = occ.len() as f64;
    let psum: f64 = occ.iter().map(|&i| p[i] * s[i]).sum();
    let ssum: f64 = s.iter().sum();
    let g = |i: usize| (i + 1) as f64;
    let coarseness = if psum == 0.0 { 1e6 } else { 1.0 / psum };
    let mut c = 0.0;
    let mut b = 0.0;
    let mut x = 0.0;
    let mut st = 0.0;
    for &i in &occ {
        for &j in &occ {
            c += p[i] * p[j] * (g(i) - g(j)).powi(2);
            b += (g(i) * p[i] - g(j) * p[j]).abs();
            x += (g(i) - g(j)).abs() * (p[i] * s[i] + p[j] * s[j]) / (p[i] + p[j]);
            st += (p[i] + p[j]) * (g(i) - g(j)).powi(2);
        }
    }
    let contrast = if ngp > 1.0 { c / (ngp * (ngp - 1.0)) * ssum / nvp } else { 0.0 };
    let busyness = if b == 0.0 { 0.0 } else { psum / b };
    let strength = if ssum == 0.0 { 0.0 } else { st / ssum };
    vec![coarseness, contrast, busyness, x / nvp, strength]
}

/// Linear interpolation between closest ranks.
fn pct(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let (f, c) = (h.floor() as usize, h.ceil() as usize);
    sorted[f] + (h - f as f64) * (sorted[c] - sorted[f])
}

fn first_order_oracle(p: &Patch, lv: &[usize], ng: usize) -> Vec<f64> {
    let x = &p.values;
    let n = x.len() as f64;
    let mut s = x.clone();
    s.sort_by(f64::total_cmp);
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let (skew, kurt) = if var == 0.0 {
        (0.0, 0.0)
    } else {
        (
            x.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n / var.powf(1.5),
            x.iter().map(|v| (v - mean).powi(4)).sum::<f64>() / n / (var * var),
        )
    };
    let (p10, p90) = (pct(&s, 0.1), pct(&s, 0.9));
    let r: Vec<f64> = x.iter().cloned().filter(|v| (p10..=p90).contains(v)).collect();
    let rmean = r.iter().sum::<f64>() / r.len() as f64;
    let energy: f64 = x.iter().map(|v| v * v).sum();
    let hist: Vec<f64> = (1..=ng).map(|g| lv.iter().filter(|&&l| l == g).count() as f64 / n).collect();
    vec![
        energy,
        energy * p.spacing.iter().product::<f64>(),
        hist.iter().map(|&v| plog(v)).sum(),
        s[0],
        p10,
        p90,
        s[s.len() - 1],
        mean,
        pct(&s, 0.5),
        pct(&s, 0.75) - pct(&s, 0.25),
        s[s.len() - 1] - s[0],
        x.iter().map(|v| (v - mean).abs()).sum::<f64>() / n,
        if r.is_empty() { 0.0 } else { r.iter().map(|v| (v - rmean).abs()).sum::<f64>() / r.len() as f64 },
        (energy / n).sqrt(),
        var.sqrt(),
        skew,
        kurt,
        var,
        hist.iter().map(|v| v * v).sum(),
    ]
}

/// Otsu by exhaustive search over thresholds t (foreground = level > t),
/// first maximum wins; no valid split → whole patch.
fn otsu_oracle(lv: &[usize], ng: usize) -> Vec<bool> {
    let mut best: Option<(f64, usize)> = None;
    for t in 1..ng {
        let (lo, hi): (Vec<f64>, Vec<f64>) = {
            let lo = lv.iter().filter(|&&l| l <= t).map(|&l| l as f64).collect();
            let hi = lv.iter().filter(|&&l| l > t).map(|&l| l as f64).collect();
            (lo, hi)
        };
        if lo.is_empty() || hi.is_empty() {
            continue;
        }
        let m0 = lo.iter().sum::<f64>() / lo.len() as f64;
        let m1 = hi.iter().sum::<f64>() / hi.len() as f64;
        let score = lo.len() as f64 * hi.len() as f64 * (m0 - m1).powi(2);
        if best.is_none_or(|(b, _)| score > b) {
            best = Some((score, t));
        }
    }
    match best {
        Some((_, t)) => lv.iter().map(|&l| l > t).collect(),
        None => vec![true; lv.len()],
    }
}

fn shape_oracle(p: &Patch, mask: &[bool]) -> Vec<f64> {
    let sp = p.spacing;
    let fg: Vec<Coord> = p.coords().into_iter().filter(|&c| mask[p.idx(c)]).collect();
    let voxel = sp[0] * sp[1] * sp[2];
    let v = fg.len() as f64 * voxel;
    let mut a = 0.0;
    for &c in &fg {
        for axis in 0..3 {
            for sign in [-1i64, 1] {
                let mut d = [0i64; 3];
                d[axis] = sign;
                let covered = p.shifted(c, d, 1).is_some_and(|q| mask[p.idx(q)]);
                if !covered {
                    a += voxel / sp[axis];
                }
            }
        }
    }
    let pos = |c: Coord| [c[0] as f64 * sp[0], c[1] as f64 * sp[1], c[2] as f64 * sp[2]];
    let diam = |keep: &dyn Fn(Coord, Coord) -> bool| {
        let mut best = 0.0f64;
        for &i in &fg {
            for &j in &fg {
                if keep(i, j) {
                    let (x, y) = (pos(i), pos(j));
                    best = best.max(((x[0] - y[0]).powi(2) + (x[1] - y[1]).powi(2) + (x[2] - y[2]).powi(2)).sqrt());
                }
            }
        }
        best
    };
    let pts: Vec<[f64; 3]> = fg.iter().map(|&c| pos(c)).collect();
    let n = pts.len() as f64;
    let mean = [0, 1, 2].map(|k| pts.iter().map(|q| q[k]).sum::<f64>() / n);
    let cov = Matrix3::from_fn(|r, c| pts.iter().map(|q| (q[r] - mean[r]) * (q[c] - mean[c])).sum::<f64>() / n);
    let mut ev: Vec<f64> = SymmetricEigen::new(cov).eigenvalues.iter().map(|e| e.max(0.0)).collect();
    ev.sort_by(|x, y| y.total_cmp(x));
    let (elong, flat) = if ev[0] > 0.0 { ((ev[1] / ev[0]).sqrt(), (ev[2] / ev[0]).sqrt()) } else { (1.0, 1.0) };
    let sph = (36.0 * PI * v * v).cbrt();
    vec![
        v,
        a,
        a / v,
        sph / a,
        v / (PI.sqrt() * a.powf(1.5)),
        36.0 * PI * v * v / a.powi(3),
        a / sph,
        diam(&|_, _| true),
        diam(&|i, j| i[0] == j[0]),
        diam(&|i, j| i[1] == j[1]),
        diam(&|i, j| i[2] == j[2]),
        4.0 * ev[0].sqrt(),
        4.0 * ev[1].sqrt(),
        4.0 * ev[2].sqrt(),
        elong,
        flat,
    ]
}

fn features_oracle(p: &Patch) -> Vec<f64> {
    let (lv, ng) = oracle_levels(p);
    let mut out = first_order_oracle(p, &lv, ng);
    out.extend(shape_oracle(p, &otsu_oracle(&lv, ng)));

    let mut glcm = vec![0.0; 24];
    let mut used = 0;
    for d in directions() {
        let m = glcm_oracle(p, &lv, ng, d);
        if m.iter().sum::<f64>() > 0.0 {
            used += 1;
            glcm.iter_mut().zip(glcm_feature_oracle(&m, ng)).for_each(|(a, v)| *a += v);
        }
    }
    out.extend(glcm.iter().map(|v| v / used as f64));

    let mut glrlm = vec![0.0; 16];
    let dirs = directions();
    for &d in &dirs {
        let f = size_feature_oracle(&glrlm_oracle(p, &lv, d), lv.len()).sixteen();
        glrlm.iter_mut().zip(f).for_each(|(a, v)| *a += v);
    }
    out.extend(glrlm.iter().map(|v| v / dirs.len() as f64));

    out.extend(size_feature_oracle(&glszm_oracle(p, &lv), lv.len()).sixteen());
    let (n, s) = ngtdm_oracle(p, &lv, ng);
    out.extend(ngtdm_feature_oracle(&n, &s));
    out.extend(size_feature_oracle(&gldm_oracle(p, &lv), lv.len()).gldm());
    out
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()) || (a - b).abs() <= ABS_FLOOR
}

const AXIS_MAJOR: usize = 19 + 11;
const AXIS_MINOR: usize = 19 + 12;
const AXIS_LEAST: usize = 19 + 13;
const ELONGATION: usize = 19 + 14;
const FLATNESS: usize = 19 + 15;

fn close_squared(a: f64, b: f64, scale: f64) -> bool {
    (a * a - b * b).abs() <= REL_TOL * (scale * scale).max(a * a).max(b * b)
}

fn patches() -> Vec<Patch> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7e57);
    (0..PATCHES).map(|_| Patch::random(&mut rng)).collect()
}

fn discretized(p: &Patch) -> DiscretizedPatch {
    discretize(&p.volume(), p.n_bins).unwrap()
}

pub fn discretization_matches_bin_rule() {
    for p in patches() {
        let dp = discretized(&p);
        let (lv, ng) = oracle_levels(&p);
        assert_eq!(dp.n_levels(), ng);
        assert!(dp.levels().iter().map(|&l| l as usize).eq(lv.iter().copied()));
    }
}

pub fn texture_matrices_match_brute_force() {
    for (n, p) in patches().iter().enumerate() {
        let dp = discretized(p);
        let (lv, ng) = oracle_levels(p);

        let mats = glcm_matrices(&dp);
        let mut seen = 0;
        for d in directions() {
            let expected = glcm_oracle(p, &lv, ng, d);
            let dir = [d[0] as isize, d[1] as isize, d[2] as isize];
            match mats.iter().find(|m| m.direction == dir) {
                Some(m) => {
                    assert_eq!(m.counts, expected, "patch {n} GLCM {d:?}");
                    seen += 1;
                }
                None => assert!(expected.iter().all(|&c| c == 0.0), "patch {n} GLCM {d:?} missing"),
            }
        }
        assert_eq!(seen, mats.len());

        let runs = glrlm_matrices(&dp);
        assert_eq!(runs.len(), 13);
        for d in directions() {
            let dir = [d[0] as isize, d[1] as isize, d[2] as isize];
            let k = radfp_core::radiomics::DIRECTIONS.iter().position(|&x| x == dir).unwrap();
            assert_eq!(sparse(&runs[k]), glrlm_oracle(p, &lv, d), "patch {n} GLRLM {d:?}");
        }

        assert_eq!(sparse(&glszm_matrix(&dp)), glszm_oracle(p, &lv), "patch {n} GLSZM");
        assert_eq!(sparse(&gldm_matrix(&dp)), gldm_oracle(p, &lv), "patch {n} GLDM");

        let m = ngtdm_matrix(&dp);
        let (on, os) = ngtdm_oracle(p, &lv, ng);
        assert_eq!(m.n, on, "patch {n} NGTDM n");
        for (a, b) in m.s.iter().zip(&os) {
            assert!(close(*a, *b), "patch {n} NGTDM s {a} vs {b}");
        }
    }
}

pub fn all_features_match_direct_formulas() {
    let start = Instant::now();
    for (n, p) in patches().iter().enumerate() {
        let got = patch_features(&p.volume(), p.n_bins).unwrap();
        let expected = features_oracle(p);
        assert_eq!(expected.len(), FEATURES_PER_PATCH);
        let major = got[AXIS_MAJOR];
        for k in 0..FEATURES_PER_PATCH {
            let (family, name) = radfp_core::radiomics::catalog::entry(k).unwrap();
            // Eigenvalues are only defined to ~ε·λ_max, so √λ near zero is
            // compared through its square on the scale of the major axis.
            let ok = match k {
                AXIS_MINOR | AXIS_LEAST => close_squared(got[k], expected[k], major),
                ELONGATION | FLATNESS => close_squared(got[k], expected[k], 1.0),
                _ => close(got[k], expected[k]),
            };
            assert!(
                ok,
                "patch {n} dims {:?} bins {}: {}:{name} got {} expected {}",
                p.dims,
                p.n_bins,
                family.name(),
                got[k],
                expected[k]
            );
        }
    }
    assert!(start.elapsed().as_secs() < 30);
}
