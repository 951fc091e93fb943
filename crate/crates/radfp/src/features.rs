//! Cohort feature extraction with an optional on-disk cache, and the
//! per-feature CSV export.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use radfp_core::radiomics::{catalog_hash, extract_study_features, FeatureLayout};
use radfp_core::trainer::PreparedStudy;
use radfp_core::{PatchGrid, RoiSpec, Study};
use sha2::{Digest, Sha256};

use crate::error::{Error, IoContext, Result};
use crate::manifest::Manifest;

/// Environment variable naming the cache directory. Unset disables caching.
pub const CACHE_ENV: &str = "RADFP_CACHE_DIR";

/// What determines a study's feature vector besides its voxels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtractionSpec {
    pub roi: RoiSpec,
    pub grid: PatchGrid,
    pub n_bins: usize,
}

impl ExtractionSpec {
    pub fn layout(&self) -> FeatureLayout {
        FeatureLayout::for_grid(&self.grid)
    }
}

#[derive(Debug, Clone, Default)]
pub struct FeatureCache {
    dir: Option<PathBuf>,
}

impl FeatureCache {
    pub fn disabled() -> Self {
        Self { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        Self { dir: Some(dir.into()) }
    }

    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::at(d),
            _ => Self::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    /// Key over (study_id, grid, n_bins, catalog hash), plus the ROI and a
    /// digest of the voxels so regenerated cohorts never hit stale entries.
    pub fn key(study: &Study, spec: &ExtractionSpec) -> String {
        let mut h = Sha256::new();
        h.update(study.study_id.as_bytes());
        h.update([0]);
        h.update(spec.grid.to_string().as_bytes());
        h.update(spec.n_bins.to_le_bytes());
        h.update(catalog_hash().as_bytes());
        h.update(serde_json::to_vec(&spec.roi).expect("ROI serializes"));
        for v in &study.views {
            for d in v.dims() {
                h.update((d as u64).to_le_bytes());
            }
            for x in v.voxels() {
                h.update(x.to_le_bytes());
            }
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Features of `study`, read from the cache when present.
    pub fn features(&self, study: &Study, spec: &ExtractionSpec) -> Result<Vec<f64>> {
        let Some(dir) = &self.dir else {
            return Ok(extract_study_features(study, &spec.roi, &spec.grid, spec.n_bins)?.values);
        };
        let expected = spec.layout().len();
        let path = dir.join(format!("{}.f64", Self::key(study, spec)));
        if let Ok(bytes) = fs::read(&path) {
            if bytes.len() == 8 * expected {
                return Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect());
            }
        }
        let values = extract_study_features(study, &spec.roi, &spec.grid, spec.n_bins)?.values;
        fs::create_dir_all(dir).at(dir)?;
        // Write-then-rename keeps concurrent readers from seeing partial files.
        let tmp = path.with_extension(format!("{}.tmp", std::process::id()));
        let bytes: Vec<u8> = values.iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(&tmp, bytes).at(&tmp)?;
        fs::rename(&tmp, &path).at(&path)?;
        Ok(values)
    }
}

/// Raw feature vectors of every manifest study, in manifest order.
pub fn extract_manifest(manifest: &Manifest, spec: &ExtractionSpec, cache: &FeatureCache) -> Result<Vec<(String, Vec<f64>)>> {
    manifest
        .entries
        .par_iter()
        .map(|e| {
            let study = manifest.load_study(e)?;
            Ok((e.study_id.clone(), cache.features(&study, spec)?))
        })
        .collect()
}

/// Features plus network input for every study, in manifest order. ROIs are
/// resampled to `roi_dims` when given.
pub fn prepare_manifest(
    manifest: &Manifest,
    spec: &ExtractionSpec,
    cache: &FeatureCache,
    roi_dims: Option<[usize; 3]>,
) -> Result<Vec<PreparedStudy>> {
    manifest
        .entries
        .par_iter()
        .map(|e| {
            let study = manifest.load_study(e)?;
            let f = cache.features(&study, spec)?;
            Ok(PreparedStudy::new(&study, f, &spec.roi, roi_dims)?)
        })
        .collect()
}

/// Same as [`prepare_manifest`] for studies already in memory.
pub fn prepare_studies(
    studies: &[Study],
    spec: &ExtractionSpec,
    cache: &FeatureCache,
    roi_dims: Option<[usize; 3]>,
) -> Result<Vec<PreparedStudy>> {
    studies
        .par_iter()
        .map(|s| Ok(PreparedStudy::new(s, cache.features(s, spec)?, &spec.roi, roi_dims)?))
        .collect()
}

/// One row per feature: `study_id,flat_index,view,patch,family,feature_name,value`.
/// `flat_index` is one-based; `patch` is the zero-based linear patch index.
pub fn write_feature_csv(path: &Path, layout: &FeatureLayout, rows: &[(String, Vec<f64>)]) -> Result<()> {
    let file = fs::File::create(path).at(path)?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    let csv_err = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["study_id", "flat_index", "view", "patch", "family", "feature_name", "value"]).map_err(csv_err)?;
    for (id, values) in rows {
        if values.len() != layout.len() {
            return Err(radfp_core::Error::LengthMismatch { expected: layout.len(), actual: values.len() }.into());
        }
        for (i, v) in values.iter().enumerate() {
            let loc = layout.location(i).expect("index within layout");
            w.write_record([
                id.as_str(),
                &(i + 1).to_string(),
                loc.view.name(),
                &loc.patch.to_string(),
                loc.family.name(),
                loc.name,
                &v.to_string(),
            ])
            .map_err(csv_err)?;
        }
    }
    let mut inner = w.into_inner().map_err(|e| Error::io(path, e.into_error()))?;
    inner.flush().at(path)
}
