use std::path::PathBuf;
use std::process::{Command, Output};

fn stirap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stirap")).args(args).env("RPL_THREADS", "2").output().expect("binary runs")
}

fn config(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn propagate_writes_trajectory_csv() {
    let o = stirap(&["propagate", "--config", &config("baseline.conf"), "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,P1,P2,P3,norm,P1r,P2r,P3r");
    assert_eq!(lines.len(), 3001);
}

#[test]
fn traditional_transfer_check_passes() {
    let o = stirap(&["propagate", "--config", &config("traditional.conf"), "--check", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("\"final_p3\""));
}

#[test]
fn failed_check_exits_with_three() {
    let o = stirap(&["propagate", "--config", &config("traditional.conf"), "--set", "check.P3.min=0.99", "--check"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("check failed"));
    // Without --check the same run succeeds.
    let o = stirap(&["propagate", "--config", &config("traditional.conf"), "--set", "check.P3.min=0.99"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn config_errors_exit_with_one() {
    for args in [
        &["propagate", "--set", "pulse.gamma=abc"][..],
        &["propagate", "--set", "no.such.key=1"],
        &["propagate", "--detuning", "fitted:spline"],
        &["propagate", "--config", "/nonexistent/file.conf"],
        &["propagate", "--set", "epsilon=0.9"],
        &["scan", "--set", "scan.axis1=bogus"],
        &["design", "--set", "pulse.tau=0.3"],
        &["propagate", "--format", "gnuplot-script"],
        &["propagate", "--unknown-flag"],
    ] {
        let o = stirap(args);
        assert_eq!(o.status.code(), Some(1), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn design_reports_fit_and_checks_decoupling() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("design.json");
    let o = stirap(&["design", "--config", &config("design_weak.conf"), "--format", "json", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.contains("\"residuals\"") && text.contains("\"fourier\""));

    let exact = stirap(&["design", "--config", &config("design_weak.conf"), "--set", "detuning.form=exact", "--check"]);
    assert_eq!(exact.status.code(), Some(0), "{}", String::from_utf8_lossy(&exact.stderr));
}

#[test]
fn gnuplot_script_references_written_csv() {
    let dir = tempfile::tempdir().unwrap();
    let script = dir.path().join("run.gp");
    let o = stirap(&["propagate", "--config", &config("traditional.conf"), "--format", "gnuplot-script", "--out", script.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let csv = dir.path().join("run.csv");
    assert!(std::fs::read_to_string(&script).unwrap().contains(csv.to_str().unwrap()));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 3001);
}

#[test]
fn scan_writes_long_format() {
    let o = stirap(&[
        "scan",
        "--set",
        "preset=baseline_transfer",
        "--set",
        "scan.axis1=dev.omega",
        "--set",
        "scan.axis1.values=-0.05,0.05",
        "--set",
        "scan.axis2=dev.tau",
        "--set",
        "scan.axis2.range=-0.05:0.05:3",
        "--set",
        "scan.quantities=P3,P3r",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "axis1,axis2,quantity,value");
    assert_eq!(lines.len(), 1 + 2 * 3 * 2);
    assert!(lines[1].contains(",P3,"));
}

#[test]
fn scans_are_reproducible() {
    let args = [
        "scan",
        "--set",
        "preset=baseline_transfer",
        "--set",
        "scan.axis1=epsilon",
        "--set",
        "scan.axis1.range=-0.1:0.1:3",
        "--set",
        "scan.axis2=t",
        "--set",
        "scan.axis2.range=-1.5:1.5:7",
    ];
    let a = stdout(&stirap(&args));
    let b = Command::new(env!("CARGO_BIN_EXE_stirap")).args(args).env("RPL_THREADS", "1").output().unwrap();
    assert_eq!(a, String::from_utf8(b.stdout).unwrap());
}

#[test]
fn table2_report_passes_its_check() {
    let o = stirap(&["report-table2", "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(stdout(&o).lines().count(), 17);
}

#[test]
fn fit_reads_sample_file() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("samples.csv");
    let mut text = String::from("t,delta\n");
    for k in 0..=200 {
        let t = -1.5 + 0.015 * k as f64;
        text.push_str(&format!("{t},{}\n", 0.8 + 1.3 * (1.7 * t).cos()));
    }
    std::fs::write(&data, text).unwrap();
    let o = stirap(&["fit", "--set", &format!("fit.input={}", data.display()), "--format", "json", "--check"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let json = stdout(&o);
    let params: Vec<f64> = json
        .split("\"parameters\": [")
        .nth(1)
        .unwrap()
        .split(']')
        .next()
        .unwrap()
        .split(',')
        .map(|v| v.trim().parse().unwrap())
        .collect();
    for (p, want) in params.iter().zip([0.8, 1.3, 1.7]) {
        assert!((p - want).abs() < 1e-6, "{params:?}");
    }
}
