use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fockforge::zx::fixtures;
use fockforge::zx::DiagramBuilder;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockforge"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_fixture(dir: &Path, name: &str) -> PathBuf {
    let d = fixtures::by_name(name).unwrap()().unwrap();
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, d.to_json()).unwrap();
    path
}

#[test]
fn kraus_tables() {
    let o = run(&["--no-timing", "kraus", "--kind", "bell"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with('K') && !l.starts_with("K ")).count(), 4);
    assert!(text.ends_with("P_S = 1/2\n"));

    let o = run(&["--quiet", "kraus", "--kind", "ghz", "-n", "3"]);
    assert_eq!(stdout(&o), "P_S = 1/4\n");
    let o = run(&["--quiet", "kraus", "--kind", "bell", "--boost", "0"]);
    assert_eq!(stdout(&o), "P_S = 5/8\n");
}

#[test]
fn bad_device_spec_is_a_usage_error() {
    assert_eq!(run(&["kraus", "--kind", "qutrit"]).status.code(), Some(2));
    assert_eq!(run(&["kraus", "--kind", "ghz", "-n", "1"]).status.code(), Some(2));
    assert_eq!(run(&["kraus", "--kind", "fusion", "--boost", "0"]).status.code(), Some(2));
}

#[test]
fn loss_sweep_csv() {
    let o = run(&["--quiet", "loss-sweep", "--kind", "bell", "--boost", "0", "--boost", "1", "--eta-steps", "3"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "eta,p_success\n0,0\n0.5,0.03515625\n1,0.75\n");

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = run(&[
        "--quiet", "loss-sweep", "--kind", "bell", "--eta-start", "0.9", "--eta-stop", "0.9",
        "--eta-steps", "1", "--out", out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(out).unwrap();
    let value: f64 = csv.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
    assert!((value - 0.5 * 0.9f64.powi(2)).abs() < 1e-11);

    let o = run(&["loss-sweep", "--kind", "bell", "--eta-stop", "1.5"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compile_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let diagram = write_fixture(dir.path(), "ghz4-bell-seeds");
    let o = run(&["--no-timing", "compile", diagram.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("success probability: 1/8"));
    assert!(text.contains("seeds: 4 x Bell"));
    assert!(text.contains("fully loss-detecting: yes"));
    let scheme = dir.path().join("ghz4-bell-seeds.scheme.json");
    assert!(scheme.exists());

    let o = run(&["--no-timing", "verify", scheme.to_str().unwrap(), "--target", "ghz:4"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).ends_with("PASS\n"));
    let o = run(&["--quiet", "verify", scheme.to_str().unwrap()]);
    assert!(o.status.success());

    let o = run(&["--no-timing", "verify", scheme.to_str().unwrap(), "--target", "ring:4"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("worst fidelity"));

    let o = run(&["verify", scheme.to_str().unwrap(), "--max-photons", "4"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn two_seed_scheme_passes_at_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let diagram = write_fixture(dir.path(), "ghz4-two-seeds");
    let scheme = dir.path().join("s.json");
    let o = run(&["--quiet", "compile", diagram.to_str().unwrap(), "--out", scheme.to_str().unwrap()]);
    assert!(o.status.success());
    let o = run(&["--quiet", "verify", scheme.to_str().unwrap(), "--target", "ghz:4"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("total probability: 0.500000000000"));
}

#[test]
fn two_chain_compiles_to_its_probability() {
    let dir = tempfile::tempdir().unwrap();
    let diagram = write_fixture(dir.path(), "two-chain-bell-seeds");
    let o = run(&["--quiet", "compile", diagram.to_str().unwrap()]);
    assert!(stdout(&o).contains("success probability: 1/32768"));
}

#[test]
fn compile_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(run(&["compile", bad.to_str().unwrap()]).status.code(), Some(2));

    let mut b = DiagramBuilder::new();
    b.spider("x", 2, 2);
    for i in 0..2 {
        let (e, p) = (b.input(), b.inp("x", i));
        b.wire(e, p);
    }
    for j in 0..2 {
        let (p, e) = (b.out("x", j), b.output());
        b.wire(p, e);
    }
    let path = dir.path().join("x.json");
    std::fs::write(&path, b.build().unwrap().to_json()).unwrap();
    let o = run(&["compile", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("spider x is 2->2"));
}

#[test]
fn output_is_deterministic() {
    let args = ["--no-timing", "kraus", "--kind", "ghz", "-n", "3", "--boost", "1"];
    assert_eq!(stdout(&run(&args)), stdout(&run(&args)));
}

#[test]
fn reproduce_filter() {
    let o = run(&["--no-timing", "reproduce", "--filter", "rules"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("criterion  3 PASS"));
    assert!(!text.contains("criterion  1 "));
    assert!(text.ends_with("1 of 1 criteria pass\n"));

    let o = run(&["--no-timing", "reproduce", "--filter", "5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("n = 2: simulated 3/4"));

    assert_eq!(run(&["reproduce", "--filter", "nothing"]).status.code(), Some(2));
}
