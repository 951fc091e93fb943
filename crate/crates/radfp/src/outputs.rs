//! History CSV, metric JSON and prediction JSON Lines.

use std::fs;
use std::path::Path;

use radfp_core::metrics::EvalReport;
use radfp_core::trainer::TrainHistory;
use radfp_core::Task;
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

pub fn write_history(path: &Path, history: &TrainHistory) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::io(path, e.into()))?;
    let err = |e: csv::Error| Error::io(path, e.into());
    w.write_record(["epoch", "train_loss", "val_loss", "val_auc"]).map_err(err)?;
    for r in &history.records {
        w.write_record([r.epoch.to_string(), r.train_loss.to_string(), r.val_loss.to_string(), r.val_auc.to_string()])
            .map_err(err)?;
    }
    w.flush().at(path)
}

/// Undefined ratios serialize as `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub task: Task,
    pub n: usize,
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub auc: Option<f64>,
    pub youden: Option<f64>,
    pub cutoff: f64,
    #[serde(rename = "threshold_T")]
    pub threshold_t: f64,
}

impl MetricsRecord {
    pub fn new(task: Task, report: &EvalReport, threshold: f64) -> Self {
        Self {
            task,
            n: report.n,
            accuracy: report.accuracy,
            sensitivity: report.sensitivity,
            specificity: report.specificity,
            auc: report.auc,
            youden: report.youden,
            cutoff: report.cutoff,
            threshold_t: threshold,
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("value serializes");
    text.push('\n');
    fs::write(path, text).at(path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub study_id: String,
    pub task: Task,
    pub score: f64,
    pub prediction: u8,
    pub n_selected_features: usize,
}

pub fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = String::new();
    for r in rows {
        out.push_str(&serde_json::to_string(r).expect("row serializes"));
        out.push('\n');
    }
    fs::write(path, out).at(path)
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let text = fs::read_to_string(path).at(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, l)| serde_json::from_str(l).map_err(|e| Error::parse(path, &format!("line {}", n + 1), e.to_string())))
        .collect()
}
