//! Interpretation report: the features each study's fingerprint leans on,
//! and where they sit (view, patch, family).
//!
//! Ranking uses q evaluated in f64 from the stored f32 parameters; in f32 many
//! relevances saturate at exactly 1 and the order collapses to index ties.
//! Contributions θ_i·f^s_i use the f32 inference mask, matching predictions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use radfp_core::radiomics::{FeatureLayout, Family};
use radfp_core::trainer::{ModelBundle, PreparedStudy};
use radfp_core::{Task, View};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub rank: usize,
    /// One-based flat index.
    pub flat_index: usize,
    pub view: View,
    /// Zero-based linear patch index.
    pub patch: usize,
    /// Patch position (z, y, x) in the grid.
    pub patch_coord: [usize; 3],
    pub family: String,
    pub feature_name: String,
    pub q: f64,
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histograms {
    pub by_view: BTreeMap<View, usize>,
    /// Indexed by linear patch index.
    pub by_patch: Vec<usize>,
    pub by_family: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub entries: Vec<ReportEntry>,
    pub histograms: Histograms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyRanking {
    pub study_id: String,
    pub score: f64,
    pub n_selected_features: usize,
    #[serde(flatten)]
    pub ranking: Ranking,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub task: Task,
    pub k: usize,
    #[serde(rename = "threshold_T")]
    pub threshold_t: f64,
    pub grid: [usize; 3],
    pub n_studies: usize,
    /// Ranked by mean q over the cohort; contributions are cohort means.
    pub cohort: Ranking,
    pub studies: Vec<StudyRanking>,
}

impl Report {
    /// Share of the cohort top-k lying in `patch`.
    pub fn cohort_share_in_patch(&self, patch: usize) -> f64 {
        self.cohort.histograms.by_patch.get(patch).copied().unwrap_or(0) as f64 / self.k as f64
    }
}

struct StudyScores {
    q: Vec<f64>,
    contribution: Vec<f64>,
    score: f64,
    selected: usize,
}

fn study_scores(bundle: &ModelBundle, m64: &radfp_core::model::FingerprintModel<f64>, s: &PreparedStudy) -> Result<StudyScores> {
    let model = &bundle.model;
    let z = model.prepare_features(&s.features)?;
    let q32 = bundle.relevance(s)?;
    let q = m64.relevance(&s.roi)?;
    let t = model.threshold;
    let contribution = (0..z.len())
        .map(|i| if q32[i] as f64 >= t { model.classifier.linear[i] as f64 * z[i] as f64 } else { 0.0 })
        .collect();
    let p = bundle.predict_prepared(s, None)?;
    Ok(StudyScores { q, contribution, score: p.probability, selected: p.selected })
}

/// Top `k` positions by `q` descending, ties by index.
pub fn top_k(q: &[f64], k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..q.len()).collect();
    idx.sort_by(|&a, &b| q[b].total_cmp(&q[a]).then(a.cmp(&b)));
    idx.truncate(k);
    idx
}

fn ranking(bundle: &ModelBundle, q: &[f64], contribution: &[f64], k: usize) -> Ranking {
    let grid = bundle.model.config.grid;
    let layout = FeatureLayout::for_grid(&grid);
    let mut hist = Histograms {
        by_view: View::ALL.iter().map(|&v| (v, 0)).collect(),
        by_patch: vec![0; grid.patch_count()],
        by_family: Family::ALL.iter().map(|f| (f.name().to_string(), 0)).collect(),
    };
    let entries = top_k(q, k)
        .into_iter()
        .enumerate()
        .map(|(r, i)| {
            let loc = layout.location(i).expect("index within layout");
            *hist.by_view.entry(loc.view).or_default() += 1;
            hist.by_patch[loc.patch] += 1;
            *hist.by_family.entry(loc.family.name().to_string()).or_default() += 1;
            ReportEntry {
                rank: r + 1,
                flat_index: i + 1,
                view: loc.view,
                patch: loc.patch,
                patch_coord: grid.patch_coord(loc.patch),
                family: loc.family.name().to_string(),
                feature_name: loc.name.to_string(),
                q: q[i],
                contribution: contribution[i],
            }
        })
        .collect();
    Ranking { entries, histograms: hist }
}

pub fn build_report(bundle: &ModelBundle, studies: &[PreparedStudy], k: usize) -> Result<Report> {
    let dim = bundle.model.dim();
    if k == 0 || k > dim {
        return Err(Error::Usage(format!("k = {k} must lie in 1..={dim} (3JK)")));
    }
    if studies.is_empty() {
        return Err(Error::Usage("no studies to report on".into()));
    }
    let m64 = bundle.model.cast::<f64>();
    let scores: Vec<StudyScores> = studies.par_iter().map(|s| study_scores(bundle, &m64, s)).collect::<Result<_>>()?;

    let n = scores.len() as f64;
    let mut mean_q = vec![0.0; dim];
    let mut mean_c = vec![0.0; dim];
    for s in &scores {
        mean_q.iter_mut().zip(&s.q).for_each(|(m, v)| *m += v);
        mean_c.iter_mut().zip(&s.contribution).for_each(|(m, v)| *m += v);
    }
    mean_q.iter_mut().chain(mean_c.iter_mut()).for_each(|m| *m /= n);

    Ok(Report {
        task: bundle.task,
        k,
        threshold_t: bundle.model.threshold,
        grid: bundle.model.config.grid.shape(),
        n_studies: studies.len(),
        cohort: ranking(bundle, &mean_q, &mean_c, k),
        studies: studies
            .iter()
            .zip(&scores)
            .map(|(s, sc)| StudyRanking {
                study_id: s.study_id.clone(),
                score: sc.score,
                n_selected_features: sc.selected,
                ranking: ranking(bundle, &sc.q, &sc.contribution, k),
            })
            .collect(),
    })
}

fn table(out: &mut String, r: &Ranking) {
    let _ = writeln!(out, "{:>4} {:>6} {:<8} {:>5} {:<10} {:<40} {:>12} {:>12}", "rank", "index", "view", "patch", "family", "feature", "q", "contrib");
    for e in &r.entries {
        let _ = writeln!(
            out,
            "{:>4} {:>6} {:<8} {:>5} {:<10} {:<40} {:>12.6} {:>12.6}",
            e.rank,
            e.flat_index,
            e.view.name(),
            e.patch,
            e.family,
            e.feature_name,
            e.q,
            e.contribution
        );
    }
    let h = &r.histograms;
    let views: Vec<String> = h.by_view.iter().map(|(v, c)| format!("{}={c}", v.name())).collect();
    let patches: Vec<String> = h.by_patch.iter().enumerate().map(|(p, c)| format!("{p}={c}")).collect();
    let families: Vec<String> = h.by_family.iter().map(|(f, c)| format!("{f}={c}")).collect();
    let _ = writeln!(out, "by view:   {}", views.join(" "));
    let _ = writeln!(out, "by patch:  {}", patches.join(" "));
    let _ = writeln!(out, "by family: {}", families.join(" "));
}

pub fn to_text(report: &Report) -> String {
    let mut out = String::new();
    let g = report.grid;
    let _ = writeln!(
        out,
        "task {} | {} studies | grid {}x{}x{} | T = {} | top {}",
        report.task, report.n_studies, g[0], g[1], g[2], report.threshold_t, report.k
    );
    let _ = writeln!(out, "\ncohort (mean q)");
    table(&mut out, &report.cohort);
    for s in &report.studies {
        let _ = writeln!(out, "\n{} (score {:.4}, {} features selected)", s.study_id, s.score, s.n_selected_features);
        table(&mut out, &s.ranking);
    }
    out
}

/// Long format for plotting: one row per (scope, rank); scope is `cohort` or a study id.
pub fn write_csv(path: &Path, report: &Report) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let err = |e: csv::Error| Error::io(path, e.into());
    w.write_record([
        "scope", "rank", "flat_index", "view", "patch", "patch_z", "patch_y", "patch_x", "family", "feature_name", "q", "contribution",
    ])
    .map_err(err)?;
    let scopes = std::iter::once(("cohort", &report.cohort)).chain(report.studies.iter().map(|s| (s.study_id.as_str(), &s.ranking)));
    for (scope, r) in scopes {
        for e in &r.entries {
            let [z, y, x] = e.patch_coord;
            w.write_record([
                scope.to_string(),
                e.rank.to_string(),
                e.flat_index.to_string(),
                e.view.name().to_string(),
                e.patch.to_string(),
                z.to_string(),
                y.to_string(),
                x.to_string(),
                e.family.clone(),
                e.feature_name.clone(),
                e.q.to_string(),
                e.contribution.to_string(),
            ])
            .map_err(err)?;
        }
    }
    w.flush().at(path)
}

/// Writes `report.json`, `report.txt` and `report.csv` into `dir`.
pub fn write_report(dir: &Path, report: &Report) -> Result<()> {
    fs::create_dir_all(dir).at(dir)?;
    crate::outputs::write_json(&dir.join("report.json"), report)?;
    let txt = dir.join("report.txt");
    fs::write(&txt, to_text(report)).at(&txt)?;
    write_csv(&dir.join("report.csv"), report)
}
