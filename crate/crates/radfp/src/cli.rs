//! The `radfp` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use radfp_core::metrics::evaluate;
use radfp_core::model::InteractionMode;
use radfp_core::synth::{generate_cohort, LesionKind, PhantomConfig};
use radfp_core::trainer::{train, TrainConfig, DECISION_CUTOFF};
use radfp_core::{PatchGrid, RoiSpec, Task};

use crate::artifact::{load_model, save_model};
use crate::cohort::write_cohort;
use crate::config;
use crate::error::{Error, Result};
use crate::features::{extract_manifest, prepare_manifest, write_feature_csv, ExtractionSpec, FeatureCache};
use crate::manifest::Manifest;
use crate::outputs::{write_history, write_json, write_jsonl, MetricsRecord, PredictionRecord};
use crate::report::{build_report, to_text, write_report};

fn parse_triple<T: std::str::FromStr>(s: &str, seps: &[char]) -> std::result::Result<[T; 3], String> {
    let parts: Vec<T> = s
        .split(seps)
        .map(|p| p.trim().parse().map_err(|_| format!("cannot parse {p:?}")))
        .collect::<std::result::Result<_, _>>()?;
    parts.try_into().map_err(|_| format!("expected three values, got {s:?}"))
}

fn parse_dims(s: &str) -> std::result::Result<[usize; 3], String> {
    let d: [usize; 3] = parse_triple(s, &['x', 'X', ','])?;
    if d.contains(&0) {
        return Err("dims must be positive".into());
    }
    Ok(d)
}

fn parse_roi(s: &str) -> std::result::Result<RoiSpec, String> {
    RoiSpec::centered(parse_triple(s, &[','])?).map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> std::result::Result<PatchGrid, String> {
    s.parse().map_err(|e: radfp_core::Error| e.to_string())
}

fn parse_threshold(s: &str) -> std::result::Result<f64, String> {
    match s.parse::<f64>() {
        Ok(t) if (0.0..=1.0).contains(&t) => Ok(t),
        _ => Err(format!("threshold must lie in [0, 1], got {s:?}")),
    }
}

#[derive(Debug, Parser)]
#[command(name = "radfp", version, about = "Patient-specific radiomic fingerprints for 3-view volumetric studies")]
#[command(after_help = "Feature vectors are cached under $RADFP_CACHE_DIR when it is set.\n\
Exit status: 0 success, 1 runtime failure, 2 usage error.")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a seeded phantom cohort with a planted lesion.
    Synth(SynthArgs),
    /// Export the radiomic feature pool of every study as CSV.
    Extract(ExtractArgs),
    /// Train one task model.
    Train(TrainArgs),
    /// Score studies with a trained model.
    Predict(PredictArgs),
    /// Rank the features each fingerprint relies on.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Number of studies.
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Volume dims DxHxW.
    #[arg(long, default_value = "16x48x48", value_parser = parse_dims)]
    pub dims: [usize; 3],
    /// Linear lesion patch index (depth-major) in --grid.
    #[arg(long, default_value_t = 0)]
    pub lesion_patch: usize,
    /// intensity-shift, texture-roughening or mixed.
    #[arg(long, default_value = "intensity-shift")]
    pub kind: String,
    /// Lesion strength in background standard deviations.
    #[arg(long, default_value_t = 3.0)]
    pub effect: f64,
    /// Probability of flipping a label.
    #[arg(long, default_value_t = 0.0)]
    pub label_noise: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Patch grid the lesion patch refers to.
    #[arg(long, default_value = "2x2x2", value_parser = parse_grid)]
    pub grid: PatchGrid,
    /// ROI fractions f_D,f_H,f_W (centered).
    #[arg(long, default_value = "0.5,0.3,0.5", value_parser = parse_roi)]
    pub roi: RoiSpec,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long, default_value = "2x2x2", value_parser = parse_grid)]
    pub grid: PatchGrid,
    /// Gray-level bins per patch.
    #[arg(long, default_value_t = 32)]
    pub bins: usize,
    #[arg(long, default_value = "0.5,0.3,0.5", value_parser = parse_roi)]
    pub roi: RoiSpec,
    /// Feature CSV path.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// key = value training configuration; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub task: Option<Task>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_parser = parse_grid)]
    pub grid: Option<PatchGrid>,
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_parser = parse_roi)]
    pub roi: Option<RoiSpec>,
    /// none, full or top_m:<m>.
    #[arg(long)]
    pub interaction: Option<InteractionMode>,
    /// Extra config settings, e.g. --set learning_rate=5e-4.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Model artifact path.
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch history CSV.
    #[arg(long)]
    pub history: Option<PathBuf>,
    /// Validation metrics JSON at the selected threshold.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Selection threshold T; defaults to the one stored in the model.
    #[arg(long, value_parser = parse_threshold)]
    pub threshold: Option<f64>,
    /// Predictions JSONL path.
    #[arg(long)]
    pub out: PathBuf,
    /// Metrics JSON against the manifest labels.
    #[arg(long)]
    pub metrics: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub manifest: PathBuf,
    /// Entries per ranking.
    #[arg(long, default_value_t = 20)]
    pub k: usize,
    /// Directory for report.json, report.txt and report.csv; prints the text
    /// report when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            if matches!(e, Error::Usage(_)) {
                2
            } else {
                1
            }
        }
    }
}

fn usage(e: impl std::fmt::Display) -> Error {
    Error::Usage(e.to_string())
}

pub fn execute(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => synth(a),
        Command::Extract(a) => extract(a),
        Command::Train(a) => train_cmd(a),
        Command::Predict(a) => predict(a),
        Command::Report(a) => report(a),
    }
}

fn synth(a: SynthArgs) -> Result<()> {
    let cfg = PhantomConfig {
        n_studies: a.n,
        dims: a.dims,
        roi: a.roi,
        grid: a.grid,
        lesion_patch: a.lesion_patch,
        lesion_kind: a.kind.parse::<LesionKind>().map_err(usage)?,
        effect_size: a.effect,
        label_noise: a.label_noise,
        seed: a.seed,
        ..Default::default()
    };
    cfg.validate().map_err(usage)?;
    let (studies, truth) = generate_cohort(&cfg)?;
    write_cohort(&a.out, &studies, &truth)?;
    eprintln!("wrote {} studies to {}", studies.len(), a.out.display());
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<()> {
    if a.bins == 0 {
        return Err(usage("--bins must be positive"));
    }
    let manifest = Manifest::read(&a.manifest)?;
    let spec = ExtractionSpec { roi: a.roi, grid: a.grid, n_bins: a.bins };
    let rows = extract_manifest(&manifest, &spec, &FeatureCache::from_env())?;
    write_feature_csv(&a.out, &spec.layout(), &rows)?;
    eprintln!("wrote {} rows to {}", rows.len() * spec.layout().len(), a.out.display());
    Ok(())
}

/// Defaults, then the config file, then explicit flags.
pub fn train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(p) => config::load(p).map_err(|e| match e {
            Error::Parse { .. } => usage(e),
            other => other,
        })?,
        None => TrainConfig::default(),
    };
    if let Some(t) = a.task {
        cfg.task = t;
    }
    if let Some(e) = a.epochs {
        cfg.epochs = e;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(g) = a.grid {
        cfg.grid = g;
    }
    if let Some(b) = a.bins {
        cfg.n_bins = b;
    }
    if let Some(r) = a.roi {
        cfg.roi = r;
    }
    if let Some(m) = a.interaction {
        cfg.interaction = m;
    }
    for kv in &a.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| usage(format!("--set expects KEY=VALUE, got {kv:?}")))?;
        config::apply(&mut cfg, k.trim(), v).map_err(|m| usage(format!("--set {}: {m}", k.trim())))?;
    }
    cfg.validate().map_err(usage)?;
    Ok(cfg)
}

fn train_cmd(a: TrainArgs) -> Result<()> {
    let cfg = train_config(&a)?;
    let manifest = Manifest::read(&a.manifest)?;
    let spec = ExtractionSpec { roi: cfg.roi, grid: cfg.grid, n_bins: cfg.n_bins };
    let data = prepare_manifest(&manifest, &spec, &FeatureCache::from_env(), None)?;
    let outcome = train(&data, &cfg)?;
    save_model(&outcome.bundle, Some(&cfg), &a.out)?;
    if let Some(h) = &a.history {
        write_history(h, &outcome.history)?;
    }
    if let Some(m) = &a.metrics {
        write_json(m, &MetricsRecord::new(cfg.task, &outcome.validation, outcome.selection.threshold))?;
    }
    eprintln!(
        "task {}: best epoch {}, validation AUC {}, T = {}",
        cfg.task,
        outcome.history.best_epoch,
        outcome.validation.auc.map_or("n/a".into(), |v| format!("{v:.4}")),
        outcome.selection.threshold
    );
    Ok(())
}

fn model_inputs(model: &Path, manifest: &Path) -> Result<(crate::artifact::Artifact, Vec<radfp_core::trainer::PreparedStudy>)> {
    let art = load_model(model)?;
    let manifest = Manifest::read(manifest)?;
    let m = &art.bundle.model;
    let spec = ExtractionSpec { roi: art.bundle.roi, grid: m.config.grid, n_bins: m.config.n_bins };
    let data = prepare_manifest(&manifest, &spec, &FeatureCache::from_env(), Some(m.config.roi_dims))?;
    Ok((art, data))
}

fn predict(a: PredictArgs) -> Result<()> {
    let (art, data) = model_inputs(&a.model, &a.manifest)?;
    let task = art.bundle.task;
    let rows = data
        .iter()
        .map(|s| {
            let p = art.bundle.predict_prepared(s, a.threshold)?;
            Ok(PredictionRecord {
                study_id: s.study_id.clone(),
                task,
                score: p.probability,
                prediction: u8::from(p.probability >= DECISION_CUTOFF),
                n_selected_features: p.selected,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    write_jsonl(&a.out, &rows)?;
    if let Some(path) = &a.metrics {
        let labels = data
            .iter()
            .map(|s| s.label(task).ok_or_else(|| usage(format!("study {} has no {task} label", s.study_id))))
            .collect::<Result<Vec<_>>>()?;
        let scores: Vec<f64> = rows.iter().map(|r| r.score).collect();
        let report = evaluate(&scores, &labels, DECISION_CUTOFF)?;
        write_json(path, &MetricsRecord::new(task, &report, a.threshold.unwrap_or(art.bundle.model.threshold)))?;
    }
    Ok(())
}

fn report(a: ReportArgs) -> Result<()> {
    let dim = load_model(&a.model)?.bundle.model.dim();
    if a.k == 0 || a.k > dim {
        return Err(usage(format!("--k {} must lie in 1..={dim} (3JK)", a.k)));
    }
    let (art, data) = model_inputs(&a.model, &a.manifest)?;
    let report = build_report(&art.bundle, &data, a.k)?;
    match &a.out {
        Some(dir) => write_report(dir, &report),
        None => {
            print!("{}", to_text(&report));
            Ok(())
        }
    }
}
