//! Exercises the installed command surface end to end by spawning the
//! binary: synth -> train -> reconstruct -> evaluate -> explain ->
//! sweep-lambda, plus the documented exit codes.

use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sixlead"))
}

fn temp_dir(tag: &str) -> PathBuf {
    tempfile::Builder::new()
        .prefix(&format!("sixlead_cli_{tag}_"))
        .tempdir()
        .unwrap()
        .keep()
}

fn run_ok(args: &[&str]) -> String {
    let output = bin().args(args).output().unwrap();
    assert!(
        output.status.success(),
        "command {:?} failed:\nstdout: {}\nstderr: {}",
        args,
        String::from_utf8_lossy(&output.stdout),
        String::from_utf8_lossy(&output.stderr)
    );
    String::from_utf8_lossy(&output.stdout).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_workflow_through_the_binary() {
    let dir = temp_dir("workflow");
    let dir_s = path_str(&dir);

    run_ok(&[
        "synth",
        "--out-dir",
        dir_s,
        "--map",
        "strong",
        "--icm-noise",
        "0.02",
        "--seed",
        "42",
    ]);
    let record = dir.join("record.csv");
    assert!(record.exists());
    assert!(dir.join("synth_config.txt").exists());

    let stdout = run_ok(&[
        "train",
        "--input",
        path_str(&record),
        "--out-dir",
        dir_s,
        "--trace",
        "--shift-offsets",
        "0,5",
    ]);
    assert!(stdout.contains("test pearson"));
    for artifact in [
        "f_i.model",
        "f_ii.model",
        "run_manifest.txt",
        "f_i_trace.csv",
        "shift_report.csv",
    ] {
        assert!(dir.join(artifact).exists(), "{artifact} missing");
    }

    run_ok(&[
        "reconstruct",
        "--model-i",
        path_str(&dir.join("f_i.model")),
        "--model-ii",
        path_str(&dir.join("f_ii.model")),
        "--input",
        path_str(&record),
        "--out-dir",
        dir_s,
    ]);
    assert!(dir.join("reconstruction.csv").exists());
    assert!(dir.join("reconstruction.svg").exists());
    assert!(dir.join("truth_sixlead.csv").exists());

    let stdout = run_ok(&[
        "evaluate",
        "--pred",
        path_str(&dir.join("reconstruction.csv")),
        "--truth",
        path_str(&dir.join("truth_sixlead.csv")),
        "--skip",
        "125",
        "--out-dir",
        dir_s,
    ]);
    assert!(stdout.contains("mean pearson"));
    assert!(dir.join("report.csv").exists());

    run_ok(&[
        "explain",
        "--model",
        path_str(&dir.join("f_i.model")),
        "--input",
        path_str(&record),
        "--out-dir",
        dir_s,
    ]);
    assert!(dir.join("breakpoints.csv").exists());
    assert!(dir.join("curve.svg").exists());
    assert!(dir.join("training.svg").exists());

    run_ok(&[
        "sweep-lambda",
        "--input",
        path_str(&record),
        "--out-dir",
        dir_s,
        "--lambdas",
        "0.001,0.01,0.1,10",
    ]);
    let sweep = std::fs::read_to_string(dir.join("sweep.csv")).unwrap();
    assert!(sweep.lines().count() >= 5);
    // the grid value beyond the critical weight has empty support
    let last = sweep.lines().find(|l| l.starts_with("10,")).unwrap();
    assert!(last.starts_with("10,0,0,"), "expected null support: {last}");
}

#[test]
fn separate_processes_produce_identical_bytes() {
    let dir = temp_dir("procdeterm");
    let dir_s = path_str(&dir);
    run_ok(&[
        "synth",
        "--out-dir",
        dir_s,
        "--map",
        "strong",
        "--icm-noise",
        "0.02",
    ]);
    let record = dir.join("record.csv");

    let train_args = [
        "train",
        "--input",
        path_str(&record),
        "--out-dir",
        dir_s,
        "--trace",
    ];
    run_ok(&train_args);
    let artifacts = [
        "f_i.model",
        "f_ii.model",
        "run_manifest.txt",
        "f_i_trace.csv",
    ];
    let first: Vec<Vec<u8>> = artifacts
        .iter()
        .map(|n| std::fs::read(dir.join(n)).unwrap())
        .collect();
    run_ok(&train_args); // a second, fully separate process
    for (name, bytes) in artifacts.iter().zip(&first) {
        assert_eq!(
            &std::fs::read(dir.join(name)).unwrap(),
            bytes,
            "{name} differs across processes"
        );
    }
}

#[test]
fn preprocess_command_writes_decimated_record() {
    let dir = temp_dir("preprocess");
    let dir_s = path_str(&dir);
    run_ok(&["synth", "--out-dir", dir_s]);
    run_ok(&[
        "preprocess",
        "--input",
        path_str(&dir.join("record.csv")),
        "--out-dir",
        dir_s,
    ]);
    let text = std::fs::read_to_string(dir.join("preprocessed.csv")).unwrap();
    assert_eq!(text.lines().count(), 1251); // header + 2500 / 2 samples
}

#[test]
fn config_file_drives_training_and_flags_override() {
    let dir = temp_dir("config");
    let dir_s = path_str(&dir);
    run_ok(&["synth", "--out-dir", dir_s]);
    let config_path = dir.join("run.cfg");
    std::fs::write(
        &config_path,
        format!(
            "# pinned run\ninput = {}\nout_dir = {}\nlambda = 0.02\n",
            dir.join("record.csv").display(),
            dir.display()
        ),
    )
    .unwrap();
    run_ok(&["train", "--config", path_str(&config_path)]);
    let manifest = std::fs::read_to_string(dir.join("run_manifest.txt")).unwrap();
    assert!(manifest.contains("config.lambda 0.02"));

    run_ok(&[
        "train",
        "--config",
        path_str(&config_path),
        "--lambda",
        "0.03",
    ]);
    let manifest = std::fs::read_to_string(dir.join("run_manifest.txt")).unwrap();
    assert!(
        manifest.contains("config.lambda 0.03"),
        "flag must override file"
    );
}

#[test]
fn exit_codes_distinguish_failure_stages() {
    let dir = temp_dir("codes");
    let dir_s = path_str(&dir);

    // 2: config error (bad key in config file)
    let config_path = dir.join("bad.cfg");
    std::fs::write(&config_path, "nonsense = 1\n").unwrap();
    let status = bin()
        .args(["train", "--config", path_str(&config_path)])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));

    // 3: io error (missing input file)
    let status = bin()
        .args([
            "train",
            "--input",
            "/nonexistent/record.csv",
            "--out-dir",
            dir_s,
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));

    // 3: missing channel
    run_ok(&["synth", "--out-dir", dir_s]);
    let record = std::fs::read_to_string(dir.join("record.csv")).unwrap();
    let broken: String = record
        .lines()
        .map(|l| {
            let mut cells = l.split(',');
            let t = cells.next().unwrap();
            let icm = cells.next().unwrap();
            format!("{t},{icm}\n")
        })
        .collect();
    let broken_path = dir.join("broken.csv");
    std::fs::write(&broken_path, broken).unwrap();
    let status = bin()
        .args([
            "train",
            "--input",
            path_str(&broken_path),
            "--out-dir",
            dir_s,
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(3));

    // 4: preprocessing error (cutoffs above Nyquist)
    let status = bin()
        .args([
            "train",
            "--input",
            path_str(&dir.join("record.csv")),
            "--out-dir",
            dir_s,
            "--sample-rate",
            "100",
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(4));

    // 8: explain digest mismatch
    run_ok(&[
        "train",
        "--input",
        path_str(&dir.join("record.csv")),
        "--out-dir",
        dir_s,
    ]);
    let other_dir = temp_dir("codes_other");
    run_ok(&["synth", "--out-dir", path_str(&other_dir), "--seed", "9"]);
    let status = bin()
        .args([
            "explain",
            "--model",
            path_str(&dir.join("f_i.model")),
            "--input",
            path_str(&other_dir.join("record.csv")),
            "--out-dir",
            dir_s,
        ])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(8));

    // 2: unknown map preset
    let status = bin()
        .args(["synth", "--out-dir", dir_s, "--map", "wat"])
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(2));
}
