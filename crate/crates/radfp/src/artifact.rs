//! Model artifact: one JSON header line, then little-endian f32 parameter
//! blocks (conv stages, dense, bias, linear, pairwise, μ, σ).

use std::fs;
use std::path::Path;

use radfp_core::model::{Classifier, FingerprintModel, ModelConfig, Parameters, StandardizationStats, WeightingNetwork};
use radfp_core::radiomics::{catalog_hash, FEATURES_PER_PATCH};
use radfp_core::trainer::{ModelBundle, TrainConfig};
use radfp_core::{RoiSpec, Task};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, IoContext, Result};

pub const FORMAT: &str = "radfp-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockInfo {
    pub name: String,
    pub len: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactHeader {
    pub format: String,
    pub format_version: u32,
    /// 3JK.
    pub dim: usize,
    pub patches: usize,
    pub features_per_patch: usize,
    pub grid: [usize; 3],
    pub n_bins: usize,
    pub interaction: String,
    pub catalog_hash: String,
    pub threshold: f64,
    pub task: Task,
    pub roi: RoiSpec,
    pub model: ModelConfig,
    /// Training configuration, when known.
    pub training: Option<TrainConfig>,
    pub blocks: Vec<BlockInfo>,
}

/// A loaded artifact.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub bundle: ModelBundle,
    pub training: Option<TrainConfig>,
}

fn block_names(model: &FingerprintModel<f32>) -> Vec<String> {
    let mut names = Vec::new();
    for i in 0..model.network.convs.len() {
        names.push(format!("conv{}.weight", i + 1));
        names.push(format!("conv{}.bias", i + 1));
    }
    names.extend(["dense.weight", "dense.bias", "bias", "linear", "pairwise", "mean", "scale"].map(String::from));
    names
}

fn all_blocks(model: &FingerprintModel<f32>) -> Vec<&[f32]> {
    let mut b = model.blocks();
    b.push(&model.stats.mean);
    b.push(&model.stats.scale);
    b
}

pub fn header_for(bundle: &ModelBundle, training: Option<&TrainConfig>) -> ArtifactHeader {
    let m = &bundle.model;
    ArtifactHeader {
        format: FORMAT.into(),
        format_version: FORMAT_VERSION,
        dim: m.dim(),
        patches: m.config.grid.patch_count(),
        features_per_patch: FEATURES_PER_PATCH,
        grid: m.config.grid.shape(),
        n_bins: m.config.n_bins,
        interaction: m.config.interaction.to_string(),
        catalog_hash: catalog_hash(),
        threshold: m.threshold,
        task: bundle.task,
        roi: bundle.roi,
        model: m.config.clone(),
        training: training.cloned(),
        blocks: block_names(m)
            .into_iter()
            .zip(all_blocks(m))
            .map(|(name, b)| BlockInfo { name, len: b.len() })
            .collect(),
    }
}

pub fn to_bytes(bundle: &ModelBundle, training: Option<&TrainConfig>) -> Vec<u8> {
    let header = header_for(bundle, training);
    let mut out = serde_json::to_vec(&header).expect("header serializes");
    out.push(b'\n');
    for b in all_blocks(&bundle.model) {
        out.extend(b.iter().flat_map(|v| v.to_le_bytes()));
    }
    out
}

pub fn save_model(bundle: &ModelBundle, training: Option<&TrainConfig>, path: &Path) -> Result<()> {
    fs::write(path, to_bytes(bundle, training)).at(path)
}

fn field<T: DeserializeOwned>(path: &Path, obj: &Map<String, Value>, name: &str) -> Result<T> {
    let v = obj.get(name).ok_or_else(|| Error::parse(path, name, "missing"))?;
    T::deserialize(v).map_err(|e| Error::parse(path, name, e.to_string()))
}

fn parse_header(path: &Path, line: &[u8]) -> Result<ArtifactHeader> {
    let value: Value = serde_json::from_slice(line).map_err(|e| Error::parse(path, "header", e.to_string()))?;
    let obj = value.as_object().ok_or_else(|| Error::parse(path, "header", "not a JSON object"))?;
    let format: String = field(path, obj, "format")?;
    if format != FORMAT {
        return Err(Error::parse(path, "format", format!("expected {FORMAT:?}, got {format:?}")));
    }
    let format_version: u32 = field(path, obj, "format_version")?;
    if format_version != FORMAT_VERSION {
        return Err(Error::Incompatible {
            path: path.into(),
            message: format!("format version {format_version}, this build reads version {FORMAT_VERSION}"),
        });
    }
    let catalog: String = field(path, obj, "catalog_hash")?;
    if catalog != catalog_hash() {
        return Err(Error::Incompatible {
            path: path.into(),
            message: format!("feature catalog hash {catalog} does not match {}; the feature ordering changed", catalog_hash()),
        });
    }
    Ok(ArtifactHeader {
        format,
        format_version,
        dim: field(path, obj, "dim")?,
        patches: field(path, obj, "patches")?,
        features_per_patch: field(path, obj, "features_per_patch")?,
        grid: field(path, obj, "grid")?,
        n_bins: field(path, obj, "n_bins")?,
        interaction: field(path, obj, "interaction")?,
        catalog_hash: catalog,
        threshold: field(path, obj, "threshold")?,
        task: field(path, obj, "task")?,
        roi: field(path, obj, "roi")?,
        model: field(path, obj, "model")?,
        training: field(path, obj, "training")?,
        blocks: field(path, obj, "blocks")?,
    })
}

fn check(path: &Path, ok: bool, name: &str, msg: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::parse(path, name, msg()))
    }
}

pub fn from_bytes(path: &Path, bytes: &[u8]) -> Result<Artifact> {
    let nl = bytes.iter().position(|&b| b == b'\n').ok_or_else(|| Error::parse(path, "header", "no header line"))?;
    let h = parse_header(path, &bytes[..nl])?;
    let cfg = &h.model;
    cfg.validate().map_err(|e| Error::parse(path, "model", e.to_string()))?;
    check(path, h.features_per_patch == FEATURES_PER_PATCH, "features_per_patch", || {
        format!("{} (expected {FEATURES_PER_PATCH})", h.features_per_patch)
    })?;
    check(path, h.grid == cfg.grid.shape() && h.patches == cfg.grid.patch_count(), "grid", || {
        format!("{:?} disagrees with the model configuration", h.grid)
    })?;
    check(path, h.dim == cfg.dim(), "dim", || format!("{} (expected 3JK = {})", h.dim, cfg.dim()))?;
    check(path, h.n_bins == cfg.n_bins, "n_bins", || "disagrees with the model configuration".into())?;
    check(path, h.interaction == cfg.interaction.to_string(), "interaction", || {
        format!("{:?} disagrees with the model configuration", h.interaction)
    })?;
    check(path, (0.0..=1.0).contains(&h.threshold), "threshold", || format!("{} outside [0, 1]", h.threshold))?;

    let mut channels = vec![3];
    channels.extend_from_slice(&cfg.channels);
    let network = WeightingNetwork::<f32>::zeros(cfg.roi_dims, &channels, h.dim)?;
    let classifier = Classifier::<f32>::zeros(h.dim, cfg.interaction);
    let stats = StandardizationStats { mean: vec![0.0f32; h.dim], scale: vec![0.0f32; h.dim] };
    let mut model = FingerprintModel { config: cfg.clone(), network, classifier, stats, threshold: h.threshold };

    let names = block_names(&model);
    let expected: Vec<BlockInfo> =
        names.into_iter().zip(all_blocks(&model)).map(|(name, b)| BlockInfo { name, len: b.len() }).collect();
    check(path, h.blocks == expected, "blocks", || "block layout disagrees with the model configuration".into())?;

    let payload = &bytes[nl + 1..];
    let total: usize = expected.iter().map(|b| b.len).sum();
    if payload.len() != 4 * total {
        return Err(Error::PayloadSize { path: path.into(), expected: 4 * total, actual: payload.len() });
    }
    let mut floats = payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().expect("4 bytes")));
    let mut fill = |block: &mut [f32]| block.iter_mut().for_each(|v| *v = floats.next().expect("payload length checked"));
    model.blocks_mut().into_iter().for_each(&mut fill);
    fill(&mut model.stats.mean);
    fill(&mut model.stats.scale);
    if model.stats.scale.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::parse(path, "scale", "standardization scales must be positive"));
    }
    Ok(Artifact { bundle: ModelBundle { task: h.task, roi: h.roi, model }, training: h.training })
}

pub fn load_model(path: &Path) -> Result<Artifact> {
    let bytes = fs::read(path).at(path)?;
    from_bytes(path, &bytes)
}
