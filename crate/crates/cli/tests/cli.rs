use std::process::Command;

fn explore(args: &[&str]) -> std::process::Output {
    let out = Command::new(env!("CARGO_BIN_EXE_explore")).args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    out
}

#[test]
fn generate_run_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let map = dir.path().join("maze.txt");
    let out = dir.path().join("out");
    explore(&["gen-env", "--kind", "maze", "--size", "48x40", "--seed", "3", "--out", map.to_str().unwrap()]);
    let text = std::fs::read_to_string(&map).unwrap();
    assert_eq!(text.lines().count(), 40);

    let config = dir.path().join("run.cfg");
    std::fs::write(&config, "starts = 2\nmethod = NF\nmethod = DA\ncp = 2\n").unwrap();
    let run = explore(&[
        "run",
        "--config",
        config.to_str().unwrap(),
        "--env",
        map.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    let table = String::from_utf8(run.stdout).unwrap();
    assert!(table.contains("DA/cp=2/window=30"), "{table}");
    let csv = std::fs::read_to_string(out.join("runs.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.contains("/start=0,") || l.contains("/start=1,")));

    let report = explore(&["report", "--out", out.to_str().unwrap()]);
    assert_eq!(String::from_utf8(report.stdout).unwrap(), table);
}

#[test]
fn bad_arguments_fail() {
    let status = Command::new(env!("CARGO_BIN_EXE_explore"))
        .args(["run", "--method", "XX"])
        .output()
        .unwrap()
        .status;
    assert!(!status.success());
}
