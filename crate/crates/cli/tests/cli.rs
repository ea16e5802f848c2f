use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dispersim_cli::{plot, run, Experiment, Manifest, RunOptions};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn dispersim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispersim")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn error_json(out: &Output) -> serde_json::Value {
    let line = String::from_utf8_lossy(&out.stderr);
    serde_json::from_str(line.lines().last().unwrap()).expect("stderr ends with a JSON error")
}

#[test]
fn kernel_at_time_zero_is_a_delta() {
    let dir = tempfile::tempdir().unwrap();
    let config = configs().join("kernel_origin.toml");
    let out = dispersim(&["kernel", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    let csv = std::fs::read_to_string(dir.path().join("kernel.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# schema: dispersim/kernel/v1");
    assert_eq!(lines[1], "t,j,re,im,modulus");
    assert_eq!(
        lines[2],
        "0.0000000000000000e0,0,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0"
    );
    assert_eq!(lines.len(), 3);
}

#[test]
fn alphap_manifest_records_the_fit() {
    let dir = tempfile::tempdir().unwrap();
    let outcome = run(
        Experiment::Alphap,
        &configs().join("alphap_6.toml"),
        &RunOptions {
            out_dir: Some(dir.path().to_path_buf()),
            threads: Some(1),
        },
    )
    .unwrap();
    let text = std::fs::read_to_string(&outcome.manifest_path).unwrap();
    let manifest = Manifest::parse(&text).unwrap();
    assert_eq!(manifest, outcome.manifest);
    assert_eq!(manifest.run.experiment, "alphap");
    assert_eq!(manifest.run.rows, 30);
    let slope = manifest.diagnostics["fit_slope"].as_float().unwrap();
    assert!((slope + 5.0 / 18.0).abs() < 0.01, "{slope}");
    assert!(manifest.flags.is_empty());
    assert_eq!(manifest.config.alphap.as_ref().unwrap().p, 6.0);
    assert!(manifest.config.kernel.is_none());
}

#[test]
fn coupling_check_reports_validity() {
    let valid = dispersim(&["coupling-check", "--config", configs().join("coupling_kirchhoff_d3.toml").to_str().unwrap(), "--out", tempfile::tempdir().unwrap().path().to_str().unwrap()]);
    assert!(valid.status.success());
    assert_eq!(String::from_utf8_lossy(&valid.stdout).trim(), "valid");

    let dir = tempfile::tempdir().unwrap();
    let invalid = dispersim(&["coupling-check", "--config", configs().join("coupling_rank_deficient.toml").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(invalid.status.success());
    assert!(String::from_utf8_lossy(&invalid.stdout).starts_with("invalid: rank-deficient"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad.toml", "[kernel]\nt_min = 0.0\nt_max = 1.0\nj_maxx = 3\n");
    let out = dispersim(&["kernel", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = error_json(&out);
    assert_eq!(err["kind"], "config");
    assert_eq!(err["exit_code"], 2);
    assert_eq!(err["line"], 4);

    let missing = write(dir.path(), "missing.toml", "[line]\nt_min = 1.0\nt_max = 2.0\n");
    let out = dispersim(&["kernel", "--config", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = dispersim(&["kernel", "--config", dir.path().join("absent.toml").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let out = dispersim(&["kernel"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_json(&out)["exit_code"], 2);
}

#[test]
fn resource_caps_exit_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "capped.toml",
        "[alphap]\nt_min = 1000.0\nt_max = 2000.0\nt_count = 2\np = 4.0\nmax_sites = 100\n",
    );
    let out = dispersim(&["alphap", "--config", config.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(error_json(&out)["kind"], "resource-cap");
}

#[test]
fn thread_override_is_recorded() {
    let dir = tempfile::tempdir().unwrap();
    let out = dispersim(&[
        "torus",
        "--config",
        configs().join("torus_32.toml").to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--threads",
        "2",
    ]);
    assert!(out.status.success());
    let manifest = Manifest::parse(&std::fs::read_to_string(dir.path().join("torus.manifest.toml")).unwrap()).unwrap();
    assert_eq!(manifest.run.threads, 2);
    let out = dispersim(&["torus", "--config", configs().join("torus_32.toml").to_str().unwrap(), "--threads", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn plot_scripts_follow_the_schema() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        threads: Some(1),
    };
    let decay = run(Experiment::Alphap, &configs().join("alphap_6.toml"), &opts).unwrap();
    let script = plot::plot_script(&decay.csv_path).unwrap();
    assert!(script.contains("set logscale xy"));
    assert!(script.contains("guide(x)"));
    assert!(script.contains("'alphap.csv'"));

    let kernel = run(Experiment::Kernel, &configs().join("kernel_quadrature.toml"), &opts).unwrap();
    let script = plot::plot_script(&kernel.csv_path).unwrap();
    assert!(!script.contains("logscale"));
    assert!(!script.contains("guide"));

    let out = dispersim(&["plot-script", "--csv", decay.csv_path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(dir.path().join("alphap.gp").exists());

    let empty = write(dir.path(), "empty.csv", "# schema: dispersim/line/v1\nt,sup_norm,mass,mass_drift,truncation_margin,contamination\n");
    assert!(plot::plot_script(&empty).is_err());
    let out = dispersim(&["plot-script", "--csv", empty.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    let unschematized = write(dir.path(), "plain.csv", "t,norm\n1,2\n");
    assert!(plot::plot_script(&unschematized).is_err());
}

#[test]
fn fit_reads_an_earlier_result() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions {
        out_dir: Some(dir.path().to_path_buf()),
        threads: Some(1),
    };
    let source = run(Experiment::Alphap, &configs().join("alphap_6.toml"), &opts).unwrap();
    let config = write(
        dir.path(),
        "fit.toml",
        "[fit]\ninput = \"alphap.csv\"\nt_column = \"t\"\nnorm_column = \"norm\"\nwindow_min = 100.0\nwindow_max = 10000.0\ntheoretical = -0.2777777777777778\n",
    );
    let fitted = run(Experiment::Fit, &config, &opts).unwrap();
    let expected = source.manifest.diagnostics["fit_slope"].as_float().unwrap();
    let slope = fitted.manifest.diagnostics["slope"].as_float().unwrap();
    assert_eq!(slope, expected);
    assert_eq!(fitted.table.rows.len(), 1);
}
