#![allow(dead_code)]

use std::path::{Path, PathBuf};

pub fn radfp(args: &[&str]) -> i32 {
    radfp::cli::run(std::iter::once("radfp").chain(args.iter().copied()))
}

pub fn s(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Small phantom cohort; returns the manifest path.
pub fn cohort(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let out = dir.join(format!("cohort-{seed}"));
    let code = radfp(&[
        "synth", "--n", &n.to_string(), "--dims", "8x24x24", "--lesion-patch", "5", "--effect", "3", "--seed", &seed.to_string(),
        "--out", s(&out),
    ]);
    assert_eq!(code, 0);
    out.join("manifest.jsonl")
}

/// Trains a short model on `manifest`; returns the artifact path.
pub fn trained(dir: &Path, manifest: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let out = dir.join(name);
    let mut args = vec!["train", "--manifest", s(manifest), "--epochs", "2", "--seed", "7", "--out", s(&out)];
    args.extend_from_slice(extra);
    assert_eq!(radfp(&args), 0);
    out
}
