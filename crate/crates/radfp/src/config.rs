//! Flat `key = value` training configuration files.
//!
//! ```text
//! # comments and blank lines are ignored
//! task = acl
//! epochs = 60
//! grid = 2x2x2
//! families = firstorder,shape
//! ```

use std::fs;
use std::path::Path;
use std::str::FromStr;

use radfp_core::model::InteractionMode;
use radfp_core::radiomics::Family;
use radfp_core::trainer::TrainConfig;
use radfp_core::volume::RoiAnchor;
use radfp_core::{PatchGrid, Task};

use crate::error::{Error, IoContext, Result};

pub const KEYS: &[&str] = &[
    "task",
    "epochs",
    "batch_size",
    "learning_rate",
    "linear_lr_scale",
    "pairwise_lr_scale",
    "weight_decay",
    "pairwise_decay_scale",
    "network_decay",
    "dense_init_scale",
    "beta1",
    "beta2",
    "eps",
    "seed",
    "roi",
    "roi_offsets",
    "grid",
    "n_bins",
    "interaction",
    "channels",
    "patience",
    "train_fraction",
    "selection",
    "families",
];

fn list<T: FromStr>(v: &str) -> Option<Vec<T>> {
    v.split(',').map(|s| s.trim().parse().ok()).collect()
}

fn triple<T: FromStr + Copy>(v: &str) -> Option<[T; 3]> {
    list(v)?.try_into().ok()
}

/// Applies one `key = value` setting to `cfg`.
pub fn apply(cfg: &mut TrainConfig, key: &str, value: &str) -> std::result::Result<(), String> {
    fn num<T: FromStr>(v: &str) -> std::result::Result<T, String> {
        v.parse().map_err(|_| format!("cannot parse {v:?}"))
    }
    let value = value.trim();
    match key {
        "task" => cfg.task = Task::from_str(value).map_err(|e| e.to_string())?,
        "epochs" => cfg.epochs = num(value)?,
        "batch_size" => cfg.batch_size = num(value)?,
        "learning_rate" => cfg.learning_rate = num(value)?,
        "linear_lr_scale" => cfg.linear_lr_scale = num(value)?,
        "pairwise_lr_scale" => cfg.pairwise_lr_scale = num(value)?,
        "weight_decay" => cfg.weight_decay = num(value)?,
        "pairwise_decay_scale" => cfg.pairwise_decay_scale = num(value)?,
        "network_decay" => cfg.network_decay = num(value)?,
        "dense_init_scale" => cfg.dense_init_scale = num(value)?,
        "beta1" => cfg.adam.beta1 = num(value)?,
        "beta2" => cfg.adam.beta2 = num(value)?,
        "eps" => cfg.adam.eps = num(value)?,
        "seed" => cfg.seed = num(value)?,
        "roi" => cfg.roi.fractions = triple(value).ok_or("expected three fractions, e.g. 0.5,0.3,0.5")?,
        "roi_offsets" => {
            cfg.roi.anchor = if value == "centered" {
                RoiAnchor::Centered
            } else {
                RoiAnchor::Offsets(triple(value).ok_or("expected `centered` or three offsets z,y,x")?)
            }
        }
        "grid" => cfg.grid = PatchGrid::from_str(value).map_err(|e| e.to_string())?,
        "n_bins" => cfg.n_bins = num(value)?,
        "interaction" => cfg.interaction = InteractionMode::from_str(value).map_err(|e| e.to_string())?,
        "channels" => cfg.channels = list(value).ok_or("expected comma-separated widths, e.g. 8,16,32")?,
        "patience" => cfg.patience = num(value)?,
        "train_fraction" => cfg.train_fraction = num(value)?,
        "selection" => cfg.selection = num(value)?,
        "families" => {
            cfg.families = if value == "all" {
                Family::ALL.to_vec()
            } else {
                value
                    .split(',')
                    .map(|s| Family::from_name(s.trim()).ok_or_else(|| format!("unknown family {:?}", s.trim())))
                    .collect::<std::result::Result<_, _>>()?
            }
        }
        _ => return Err(format!("unknown key (known keys: {})", KEYS.join(", "))),
    }
    Ok(())
}

pub fn parse(path: &Path, text: &str, cfg: &mut TrainConfig) -> Result<()> {
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(path, &format!("line {}", n + 1), "expected `key = value`"))?;
        apply(cfg, key.trim(), value).map_err(|m| Error::parse(path, key.trim(), m))?;
    }
    Ok(())
}

/// Reads a config file on top of the defaults.
pub fn load(path: &Path) -> Result<TrainConfig> {
    let text = fs::read_to_string(path).at(path)?;
    let mut cfg = TrainConfig::default();
    parse(path, &text, &mut cfg)?;
    Ok(cfg)
}

/// Serializes every key so that [`parse`] reproduces `cfg`.
pub fn to_text(cfg: &TrainConfig) -> String {
    let join = |v: &[String]| v.join(",");
    let roi_offsets = match cfg.roi.anchor {
        RoiAnchor::Centered => "centered".to_string(),
        RoiAnchor::Offsets(o) => join(&o.map(|x| x.to_string())),
    };
    let lines = [
        ("task", cfg.task.to_string()),
        ("epochs", cfg.epochs.to_string()),
        ("batch_size", cfg.batch_size.to_string()),
        ("learning_rate", cfg.learning_rate.to_string()),
        ("linear_lr_scale", cfg.linear_lr_scale.to_string()),
        ("pairwise_lr_scale", cfg.pairwise_lr_scale.to_string()),
        ("weight_decay", cfg.weight_decay.to_string()),
        ("pairwise_decay_scale", cfg.pairwise_decay_scale.to_string()),
        ("network_decay", cfg.network_decay.to_string()),
        ("dense_init_scale", cfg.dense_init_scale.to_string()),
        ("beta1", cfg.adam.beta1.to_string()),
        ("beta2", cfg.adam.beta2.to_string()),
        ("eps", cfg.adam.eps.to_string()),
        ("seed", cfg.seed.to_string()),
        ("roi", join(&cfg.roi.fractions.map(|x| x.to_string()))),
        ("roi_offsets", roi_offsets),
        ("grid", cfg.grid.to_string()),
        ("n_bins", cfg.n_bins.to_string()),
        ("interaction", cfg.interaction.to_string()),
        ("channels", join(&cfg.channels.iter().map(|c| c.to_string()).collect::<Vec<_>>())),
        ("patience", cfg.patience.to_string()),
        ("train_fraction", cfg.train_fraction.to_string()),
        ("selection", cfg.selection.to_string()),
        ("families", join(&cfg.families.iter().map(|f| f.name().to_string()).collect::<Vec<_>>())),
    ];
    lines.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
