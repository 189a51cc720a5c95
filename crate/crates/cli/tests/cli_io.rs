//! End-to-end checks of the binary: CSV determinism across reruns and
//! thread counts, config-file handling, SVG emission, and exit codes.

use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_subdiff"))
}

/// Numeric fields excluding the runtime column.
fn strip_runtime(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let cols: Vec<&str> = l.split(',').collect();
            cols[..cols.len().saturating_sub(1)].join(",")
        })
        .collect()
}

#[test]
fn csv_identical_across_reruns_and_threads() {
    let run = |threads: &str| -> String {
        let out = bin()
            .args([
                "convergence",
                "--experiment",
                "compact-support",
                "--alpha",
                "0.6",
                "--tau",
                "0.125",
                "--refinements",
                "3",
                "--threads",
                threads,
            ])
            .output()
            .expect("binary runs");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        String::from_utf8(out.stdout).unwrap()
    };
    let a = run("1");
    let b = run("1");
    let c = run("3");
    assert_eq!(strip_runtime(&a), strip_runtime(&b), "rerun changed numeric fields");
    assert_eq!(strip_runtime(&a), strip_runtime(&c), "thread count changed numeric fields");
    assert!(a.starts_with(
        "experiment,alpha,s,h,tau,X,T,error_max,error_at_T,order_est,runtime_seconds"
    ));
}

#[test]
fn config_file_and_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("exp.conf");
    std::fs::write(
        &cfg_path,
        "# compact support defaults\nexperiment = compact-support\nalpha = 0.4\ntau = 0.25\nrefinements = 2\n",
    )
    .unwrap();
    let out = bin()
        .args([
            "convergence",
            "--config",
            cfg_path.to_str().unwrap(),
            "--alpha",
            "0.7",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let first_row = text.lines().nth(1).unwrap();
    // alpha comes from the flag, tau from the file.
    assert!(first_row.starts_with("compact-support,0.7,"), "{first_row}");
    assert!(first_row.contains(",0.25,"), "{first_row}");
}

#[test]
fn svg_written_for_convergence() {
    let dir = tempfile::tempdir().unwrap();
    let svg_path = dir.path().join("plot.svg");
    let csv_path = dir.path().join("rows.csv");
    let out = bin()
        .args([
            "convergence",
            "--experiment",
            "compact-support",
            "--tau",
            "0.25",
            "--refinements",
            "2",
            "--svg",
            svg_path.to_str().unwrap(),
            "--out",
            csv_path.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let svg = std::fs::read_to_string(&svg_path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("polyline"));
    let csv = std::fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().count(), 3);
}

#[test]
fn validate_exit_codes() {
    let ok = bin().args(["validate", "--suite", "special-functions"]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let bad = bin().args(["validate", "--suite", "no-such-suite"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn unknown_experiment_is_configuration_error() {
    let out = bin().args(["solve", "--experiment", "heat-death"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("unknown experiment"), "{msg}");
}

#[test]
fn order_table_rejects_exact_experiments() {
    let out = bin()
        .args(["order-table", "--experiment", "sine-eigen"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
