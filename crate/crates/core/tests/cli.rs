//! The `bnflow` binary: subcommand sequence, output files and exit codes.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

fn bnflow(config: &Path, out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bnflow"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

/// Small configuration over the bundled data; `extra` is appended verbatim.
fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let d = data_dir();
    let text = format!(
        "[data]\ndataset = {}\nschema = {}\ntarget = Y\n\n\
         [learn]\nlearners = hc, naive\nstructures = {}\n\n\
         [split]\nfold_count = 5\nfold_fraction = 0.1\n\n\
         [mcmc]\nsample_iters = 1000\n{extra}",
        d.join("demo.csv").display(),
        d.join("schema.txt").display(),
        d.join("truth.dag").display(),
    );
    let text = if extra.contains("[run]") { text } else { format!("{text}\n[run]\nseed = 3\n") };
    let path = dir.join("bnflow.ini");
    fs::write(&path, text).unwrap();
    path
}

fn run_phases(config: &Path, out: &Path, flags: &[&str], phases: &[&str]) {
    for cmd in phases {
        let o = bnflow(config, out, &[flags, &[cmd]].concat());
        assert_eq!(code(&o), 0, "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

const THROUGH_CV: [&str; 4] = ["select", "learn", "compare", "cv"];

fn run_all(config: &Path, out: &Path) {
    run_phases(config, out, &[], &[&THROUGH_CV[..], &["fit-predict", "report"]].concat());
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

fn line_count(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count()
}

#[test]
fn full_sequence_writes_every_phase() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "");
    let out = tmp.path().join("out");
    run_all(&config, &out);

    for f in [
        "effective_config.ini",
        "select/pairwise.csv",
        "select/triple.csv",
        "select/delta.csv",
        "select/selection.csv",
        "select/selected_variables.txt",
        "learn/hc.dag",
        "learn/naive.dag",
        "learn/truth.dag",
        "learn/structures.csv",
        "compare/scores.csv",
        "compare/pairwise_bf.csv",
        "compare/vs_naive.csv",
        "compare/ranking.csv",
        "cv/split.csv",
        "cv/chosen.txt",
        "cv/chosen.dag",
        "fit/network.csv",
        "fit/metrics.csv",
        "fit/confusion.csv",
        "fit/sensitivity.csv",
        "report.md",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }

    assert_eq!(
        header(&out.join("fit/predictions.csv")),
        "record,state_1,state_2,state_3,state_4,state_5,mean,predicted,true"
    );
    // 1000 rows, 15% held out
    assert_eq!(line_count(&out.join("fit/predictions.csv")), 1 + 150);
    assert_eq!(header(&out.join("fit/metrics.csv")), "Cases,Correct,Error>=1,Accuracy,RMSE");
    assert_eq!(header(&out.join("fit/rhat.csv")), "parameter,mean,r_hat");
    assert_eq!(line_count(&out.join("fit/rhat.csv")), 1 + 5);
    assert_eq!(header(&out.join("cv/cv_summary.csv")), "Algorithm,Accuracy,RMSE");
    // 3 models x 5 folds, then one mean row per model
    assert_eq!(line_count(&out.join("cv/cv_folds.csv")), 1 + 15 + 3);

    let trace = out.join("fit/traces/trace_Y_1.csv");
    assert_eq!(header(&trace), "chain,iteration,value");
    assert_eq!(line_count(&trace), 1 + 3 * 1000);
    assert_eq!(header(&out.join("fit/traces/density_Y_1.csv")), "chain,value,density");

    let report = fs::read_to_string(out.join("report.md")).unwrap();
    assert!(report.contains("Chosen model: **"));
    assert!(!report.contains("_not run_"));
}

#[test]
fn effective_config_reproduces_the_run() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "");
    let first = tmp.path().join("first");
    run_all(&config, &first);
    let second = tmp.path().join("second");
    run_all(&first.join("effective_config.ini"), &second);
    for f in ["cv/cv_folds.csv", "fit/predictions.csv", "fit/rhat.csv", "effective_config.ini"] {
        assert_eq!(fs::read(first.join(f)).unwrap(), fs::read(second.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let config = write_config(tmp.path(), "");
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_phases(&config, &a, &[], &THROUGH_CV);
    run_phases(&config, &b, &["--seed", "4"], &THROUGH_CV);
    assert_ne!(fs::read(a.join("cv/split.csv")).unwrap(), fs::read(b.join("cv/split.csv")).unwrap());
    let effective = fs::read_to_string(b.join("effective_config.ini")).unwrap();
    assert!(effective.contains("seed = 4"), "{effective}");
}

#[test]
fn configuration_errors_exit_2() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");

    let no_seed = write_config(tmp.path(), "[run]\n");
    assert_eq!(code(&bnflow(&no_seed, &out, &["select"])), 2);

    let unknown_key = write_config(tmp.path(), "[mcmc2]\nchains = 3\n");
    assert_eq!(code(&bnflow(&unknown_key, &out, &["select"])), 2);

    // fit-predict needs the cv phase's outputs
    let ok = write_config(tmp.path(), "");
    let o = bnflow(&ok, &out, &["fit-predict"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("run `cv` first"));

    // more validation rows than training rows
    let big_folds = write_config(tmp.path(), "");
    let text = fs::read_to_string(&big_folds).unwrap().replace("fold_fraction = 0.1", "fold_fraction = 0.3");
    fs::write(&big_folds, text).unwrap();
    assert_eq!(code(&bnflow(&big_folds, &out, &["learn"])), 2);
}

#[test]
fn data_errors_exit_3() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("out");
    let config = write_config(tmp.path(), "");

    let bad = tmp.path().join("bad.csv");
    let mut text = fs::read_to_string(data_dir().join("demo.csv")).unwrap();
    text.push_str("7,1,1,1,1,1,1,1,1,1\n");
    fs::write(&bad, text).unwrap();
    let cfg = fs::read_to_string(&config).unwrap().replace(
        &data_dir().join("demo.csv").display().to_string(),
        &bad.display().to_string(),
    );
    fs::write(&config, cfg).unwrap();
    let o = bnflow(&config, &out, &["select"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains('7'));

    let missing = tmp.path().join("missing.csv");
    let cfg = fs::read_to_string(&config)
        .unwrap()
        .replace(&bad.display().to_string(), &missing.display().to_string());
    fs::write(&config, cfg).unwrap();
    assert_eq!(code(&bnflow(&config, &out, &["select"])), 3);
}

#[test]
fn failed_convergence_check_exits_4() {
    let tmp = TempDir::new().unwrap();
    // split r_hat hovers around 1, so no run passes this threshold
    let config = write_config(tmp.path(), "\n[fit]\nrhat_threshold = 0.5\n");
    let out = tmp.path().join("out");
    run_phases(&config, &out, &[], &THROUGH_CV);
    let o = bnflow(&config, &out, &["fit-predict"]);
    assert_eq!(code(&o), 4);
    // diagnostics are still written for inspection
    assert!(out.join("fit/rhat.csv").is_file());
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_bnflow")).output().unwrap();
    assert_eq!(code(&o), 2);
}
