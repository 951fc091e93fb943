//! Writing generated phantom cohorts to disk.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use radfp_core::synth::{GroundTruth, LesionKind};
use radfp_core::{Study, View};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{IoContext, Result};
use crate::manifest::{Manifest, ManifestEntry, ViewPaths};
use crate::nrrd::save_volume;

pub const MANIFEST_FILE: &str = "manifest.jsonl";
pub const TRUTH_FILE: &str = "ground_truth.json";
pub const VOLUME_DIR: &str = "volumes";

/// Sidecar describing the planted lesion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthSidecar {
    pub lesion_patch: usize,
    pub lesion_kind: LesionKind,
    pub effect_size: f64,
}

/// Writes `<out>/volumes/<id>_<view>.nrrd`, `<out>/manifest.jsonl` and
/// `<out>/ground_truth.json`. Manifest paths are relative to `out`.
pub fn write_cohort(out: &Path, studies: &[Study], truth: &GroundTruth) -> Result<Manifest> {
    let vol_dir = out.join(VOLUME_DIR);
    fs::create_dir_all(&vol_dir).at(&vol_dir)?;
    let entries = studies
        .par_iter()
        .map(|s| {
            let rel = |v: View| PathBuf::from(VOLUME_DIR).join(format!("{}_{}.nrrd", s.study_id, v.name()));
            for v in View::ALL {
                save_volume(s.view(v), &out.join(rel(v)))?;
            }
            Ok(ManifestEntry {
                study_id: s.study_id.clone(),
                views: ViewPaths { axial: rel(View::Axial), coronal: rel(View::Coronal), sagittal: rel(View::Sagittal) },
                labels: s.labels.iter().map(|(&t, &l)| (t, l)).collect::<BTreeMap<_, _>>(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest { base: out.to_path_buf(), entries };
    manifest.write(&out.join(MANIFEST_FILE))?;
    let sidecar = TruthSidecar { lesion_patch: truth.lesion_patch, lesion_kind: truth.lesion_kind, effect_size: truth.effect_size };
    crate::outputs::write_json(&out.join(TRUTH_FILE), &sidecar)?;
    Ok(manifest)
}
