//! JSON Lines dataset manifests. View paths are resolved against the
//! manifest's directory unless absolute.

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};

use radfp_core::{Study, Task, View};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};
use crate::nrrd::load_volume;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViewPaths {
    pub axial: PathBuf,
    pub coronal: PathBuf,
    pub sagittal: PathBuf,
}

impl ViewPaths {
    pub fn get(&self, view: View) -> &Path {
        match view {
            View::Axial => &self.axial,
            View::Coronal => &self.coronal,
            View::Sagittal => &self.sagittal,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub study_id: String,
    pub views: ViewPaths,
    pub labels: BTreeMap<Task, u8>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    /// Directory relative view paths are resolved against.
    pub base: PathBuf,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).at(path)?;
        let mut entries = Vec::new();
        let mut seen = HashSet::new();
        for (n, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let field = format!("line {}", n + 1);
            let e: ManifestEntry = serde_json::from_str(line).map_err(|e| Error::parse(path, &field, e.to_string()))?;
            if let Some((t, v)) = e.labels.iter().find(|(_, &v)| v > 1) {
                return Err(Error::parse(path, &field, format!("label {t} = {v} is not 0 or 1")));
            }
            if !seen.insert(e.study_id.clone()) {
                return Err(Error::parse(path, &field, format!("duplicate study_id {:?}", e.study_id)));
            }
            entries.push(e);
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self { base, entries })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for e in &self.entries {
            out.push_str(&serde_json::to_string(e).expect("manifest entries serialize"));
            out.push('\n');
        }
        fs::write(path, out).at(path)
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn load_study(&self, e: &ManifestEntry) -> Result<Study> {
        let load = |v: View| load_volume(&self.resolve(e.views.get(v)));
        let views = [load(View::Axial)?, load(View::Coronal)?, load(View::Sagittal)?];
        Ok(Study::new(e.study_id.clone(), views, e.labels.clone())?)
    }
}
