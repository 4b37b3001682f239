#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_treespace"))
}

pub fn run_in(dir: &Path, args: &[&str]) -> Output {
    Command::new(bin())
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

/// Every subcommand on small inputs, in `dir`, with `--threads threads`.
/// Returns each command's stdout plus the bytes of every non-manifest file
/// written, keyed by relative path.
pub fn run_every_subcommand(dir: &Path, threads: usize) -> Result<BTreeMap<String, Vec<u8>>, String> {
    let t = threads.to_string();
    let common = ["--seed", "11", "--threads", t.as_str(), "--deterministic"];
    let steps: &[&[&str]] = &[
        &["gen", "trees", "--n", "6", "--n-case", "6", "--shift", "LLB=0.8", "--attr-sigma", "0.1", "-o", "pop.json"],
        &["gen", "corner", "--n", "24", "-o", "corner.json"],
        &["gen", "sheets", "--sheets", "3", "--per-sheet", "8", "-o", "sheets.json"],
        &["dist", "--input", "pop.json", "-o", "dist.csv"],
        &["dist", "--input", "pop.json"],
        &["mean", "--input", "pop.json", "--class", "control", "--max-iterations", "120", "-o", "mean.json"],
        &["permtest", "--groups", "pop.json", "--M", "19", "--max-iterations", "60", "--include-permuted", "-o", "perm.json"],
        &["permtest", "--groups", "pop.json", "--statistic", "variance", "--M", "9", "--label", "LLB", "--max-iterations", "60", "-o", "permv.json"],
        &["subtree-features", "--input", "pop.json", "--max-iterations", "60", "-o", "features.csv"],
        &["classify", "--features", "features.csv", "--folds", "3", "--repeats", "2", "--n-lambda", "8", "--alphas", "1,0.5", "-o", "cls.json"],
        &["classify", "--input", "pop.json", "--scheme", "LLB,RLL", "--folds", "3", "--repeats", "1", "--n-lambda", "5", "--alphas", "1", "--max-iterations", "60", "-o", "clst.json"],
        &["knn", "--input", "dist.csv", "--k", "3", "--folds", "3", "-o", "knn.json"],
        &["correlate", "--input", "pop.json", "--scheme", "LLB,RLL,LUL", "--bins", "4", "--max-iterations", "60", "--svg-dir", "corr_svg", "-o", "corr.json"],
        &["embed", "--method", "mds", "--input", "sheets.csv", "-o", "emb_mds"],
        &["embed", "--method", "isomap", "--input", "sheets.json", "--k", "6", "-o", "emb_iso"],
        &["embed", "--method", "hmds", "--input", "corner.csv", "--restarts", "3", "--max-iterations", "400", "-o", "emb_hmds"],
        &["embed", "--method", "hisomap", "--input", "sheets.csv", "--k", "6", "--restarts", "2", "--max-iterations", "300", "-o", "emb_hiso"],
        &["distortion", "--original", "corner.csv", "--coords", "emb_hmds/coordinates.csv", "--metric", "hyperbolic", "--svg", "dist.svg", "-o", "distortion.json"],
    ];
    let mut out = BTreeMap::new();
    for (i, step) in steps.iter().enumerate() {
        let mut args: Vec<&str> = common.to_vec();
        args.extend_from_slice(step);
        let o = run_in(dir, &args);
        if !o.status.success() {
            return Err(format!("{:?} failed: {}", step, String::from_utf8_lossy(&o.stderr)));
        }
        out.insert(format!("stdout#{i:02}"), o.stdout);
    }
    collect(dir, dir, &mut out);
    Ok(out)
}

fn collect(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
    let mut entries: Vec<_> = std::fs::read_dir(dir).expect("readable").map(|e| e.unwrap().path()).collect();
    entries.sort();
    for p in entries {
        if p.is_dir() {
            collect(root, &p, out);
        } else if !p.to_string_lossy().ends_with("manifest.json") {
            let rel = p.strip_prefix(root).unwrap().to_string_lossy().into_owned();
            out.insert(rel, std::fs::read(&p).unwrap());
        }
    }
}

/// Names of outputs that differ between two runs, or are missing from one.
pub fn differences(a: &BTreeMap<String, Vec<u8>>, b: &BTreeMap<String, Vec<u8>>) -> Vec<String> {
    let mut keys: Vec<&String> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter().filter(|k| a.get(*k) != b.get(*k)).cloned().collect()
}
