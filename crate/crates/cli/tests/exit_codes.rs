use std::process::Command;

fn hydride(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_hydride")).args(args).output().unwrap()
}

#[test]
fn success_writes_outputs_and_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cfg = tmp.path().join("c.cfg");
    std::fs::write(&cfg, "grid.cells = 16\nrun.t_end = 0.02\noutput.interval = 0.01\nstepper.dt = 0.005\n").unwrap();
    let res = hydride(&["--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--mode", "run"]);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    assert!(String::from_utf8_lossy(&res.stdout).contains("4 steps"));
    assert!(out.join("timeseries.csv").exists());
    assert!(out.join("snapshot_0002.csv").exists());
}

#[test]
fn validation_failures_exit_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().to_str().unwrap();
    for extra in [["--override", "model.mu=-1"], ["--override", "no.such.key=1"], ["--mode", "decay-study"]] {
        let mut args = vec!["--out", out];
        args.extend(extra);
        let res = hydride(&args);
        assert_eq!(res.status.code(), Some(2), "{extra:?}");
        assert!(!res.stderr.is_empty());
    }
}

#[test]
fn solver_failures_exit_with_three_and_name_the_dump() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    // a single Newton iteration cannot reach the tolerance and dt_min forbids any halving
    let res = hydride(&[
        "run",
        "--out",
        out.to_str().unwrap(),
        "--override",
        "grid.cells=8",
        "--override",
        "stepper.max_newton=1",
        "--override",
        "stepper.max_outer=1",
        "--override",
        "stepper.dt_min=1e-3",
        "--override",
        "init.chi.profile=ramp",
    ]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("failure_state.csv"), "{stderr}");
    assert!(out.join("failure_state.csv").exists());
}
