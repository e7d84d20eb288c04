//! Black-box checks of the binary: exit codes, file formats, config
//! handling and determinism of the output writer.

use std::path::PathBuf;
use std::process::{Command, Output};

fn capasym(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_capasym"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmpdir() -> PathBuf {
    let dir = std::env::temp_dir().join(format!("capasym-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn degenerate_interval_is_a_config_error() {
    let out = capasym(&["simulate", "--epsilon", "0.8", "--t-end", "0"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("\"kind\": \"config\""), "stderr: {err}");
}

#[test]
fn missing_parameter_source_is_a_config_error() {
    let out = capasym(&["simulate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn two_epsilons_are_rejected() {
    let out = capasym(&["eps-study", "--epsilons", "0.1,0.01", "--t-end", "6"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn empty_delta_list_is_rejected() {
    let out = capasym(&["delta-study", "--family", "A", "--deltas", ""]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_preset_is_rejected() {
    let out = capasym(&["asym", "--preset", "fig9"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_passes_and_fault_injection_fails() {
    let out = capasym(&["validate"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("j_moments_vs_quadrature"));
    assert!(text.contains("# summary all_pass=true"));

    let out = capasym(&["validate", "--fault", "sigma"]);
    assert_eq!(out.status.code(), Some(1));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("sigma_series_tail_ratio") && text.contains("fail"));
}

#[test]
fn csv_layout_and_row_count() {
    let out = capasym(&[
        "simulate",
        "--epsilon",
        "0.8",
        "--t-end",
        "2",
        "--grid",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "# schema=capillary-asym/1");
    assert_eq!(lines[1], "kind,s,u,du,u0,dev");
    let grid_rows = lines.iter().filter(|l| l.starts_with("grid,")).count();
    assert_eq!(grid_rows, 21);
    assert!(text.contains("# summary energy_residual="));
}

#[test]
fn json_output_is_well_formed() {
    let out = capasym(&[
        "asym",
        "--epsilon",
        "0.8",
        "--anchor-T",
        "2.0",
        "--window",
        "4",
        "--grid",
        "0.5",
        "--iterations",
        "2",
        "--format",
        "json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with('{') && text.trim_end().ends_with('}'));
    assert!(text.contains("\"schema\": \"capillary-asym/1\""));
    assert!(text.contains("\"columns\": [\"s\", \"v_numeric\", \"v_asym_0\", \"v_asym_n\", \"u_numeric\", \"u_asym_n\"]"));
    assert!(text.contains("\"supdist_0\""));
}

#[test]
fn physical_block_resolves_to_dimensionless_pair() {
    let dir = tmpdir();
    let cfg = dir.join("water.cfg");
    std::fs::write(
        &cfg,
        "[physical]\ndensity=1000\ngravity=9.81\nradius=1e-3\nviscosity=1e-3\n\
         surface_tension=0.0727\ncontact_angle=0\n[run]\nt_end=2\ngrid=0.5\n",
    )
    .unwrap();
    let out = capasym(&["simulate", "--physical", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    // omega ~ 10.34, eps ~ 0.311 in exponent form
    assert!(
        text.contains("# config omega=1.03417"),
        "omega echo missing:\n{text}"
    );
    assert!(
        text.contains("# config epsilon=3.10959"),
        "epsilon echo missing"
    );
    // [run] block supplied t_end = 2
    assert!(text.contains("# config t_end=2.0000000000000000e0"));
    // flags override the file
    let out = capasym(&[
        "simulate",
        "--physical",
        cfg.to_str().unwrap(),
        "--t-end",
        "1",
    ]);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# config t_end=1.0000000000000000e0"));
}

#[test]
fn epsilon_and_physical_are_mutually_exclusive() {
    let dir = tmpdir();
    let cfg = dir.join("x.cfg");
    std::fs::write(&cfg, "[physical]\ndensity=1000\n").unwrap();
    let out = capasym(&[
        "simulate",
        "--epsilon",
        "0.5",
        "--physical",
        cfg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn small_anchor_asym_still_produces_a_record() {
    // early anchors fit poorly, but the run must succeed and report both
    // sup-distances
    let out = capasym(&[
        "asym",
        "--epsilon",
        "0.8",
        "--anchor-T",
        "0.5",
        "--window",
        "8",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# summary supdist_0=") && text.contains("# summary supdist_n="));
}

#[test]
fn flags_override_preset_values() {
    let out = capasym(&[
        "asym",
        "--preset",
        "fig3",
        "--iterations",
        "2",
        "--window",
        "5",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("# config iterations=2.0000000000000000e0"));
    assert!(text.contains("# config window=5.0000000000000000e0"));
    assert!(text.contains("# config epsilon=8.0000000000000004e-1"));
}

#[test]
fn thread_cap_does_not_change_results() {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_capasym"))
            .args(["eps-study", "--epsilons", "0.1,0.05,0.02", "--t-end", "6"])
            .env("CAPASYM_THREADS", threads)
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(0));
        out.stdout
    };
    assert_eq!(run("1"), run("4"));
}
