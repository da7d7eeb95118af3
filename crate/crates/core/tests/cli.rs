//! End-to-end runs of the `sthdg` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn sthdg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sthdg")).args(args).output().expect("binary runs")
}

fn config(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn mesh_info_prints_counts() {
    let out = sthdg(&["mesh-info"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("elements = 128"), "{text}");
}

#[test]
fn taylor_green_ledger_has_one_row_per_slab() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tg");
    let cfg = config(dir.path(), "tg.cfg", "mesh = builtin:8\nks = 2\nkt = 1\nslabs = 8\nbenchmark = taylor-green\n");
    let run = sthdg(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let ledger = fs::read_to_string(out.join("energy_ledger.csv")).unwrap();
    assert_eq!(ledger.lines().count(), 9);
    assert_eq!(fs::read_to_string(out.join("conformity.csv")).unwrap().lines().count(), 9);
    for m in 1..=8 {
        let vtk = fs::read_to_string(out.join(format!("solution_{m:04}.vtk"))).unwrap();
        assert!(vtk.starts_with("# vtk DataFile Version 3.0\n"));
        assert!(vtk.contains("POINT_DATA 384\nVECTORS velocity double\n"));
    }
}

#[test]
fn custom_bump_benchmark_runs() {
    let dir = tempfile::tempdir().unwrap();
    let bumps = dir.path().join("bumps.txt");
    fs::write(&bumps, "# two vortices\nbump 0.35 0.5 0.25 1\nbump 0.65 0.5 0.25 -1\n").unwrap();
    let text = format!(
        "mesh = builtin:4\nks = 1\nkt = 0\nslabs = 2\nfinal_time = 0.2\nbenchmark = custom-file\nbenchmark_file = {}\n",
        bumps.display()
    );
    let cfg = config(dir.path(), "c.cfg", &text);
    let out = dir.path().join("out");
    let run = sthdg(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(out.join("solution_0002.vtk").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = config(dir.path(), "bad.cfg", "ks = zero\n");
    assert_eq!(sthdg(&["run", "--config", &bad]).status.code(), Some(2));
    let missing = dir.path().join("missing.cfg");
    assert_eq!(sthdg(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));

    let blocker = dir.path().join("blocker");
    fs::write(&blocker, "").unwrap();
    let small = config(dir.path(), "small.cfg", "mesh = builtin:2\nks = 1\nkt = 0\nslabs = 1\nbenchmark = zero\n");
    let target = blocker.join("out");
    assert_eq!(sthdg(&["run", "--config", &small, "--out", target.to_str().unwrap()]).status.code(), Some(5));

    let stalled = config(dir.path(), "stall.cfg", "mesh = builtin:2\nks = 1\nkt = 0\nslabs = 2\nmax_iterations = 1\n");
    let out = dir.path().join("stall");
    assert_eq!(sthdg(&["run", "--config", &stalled, "--out", out.to_str().unwrap()]).status.code(), Some(3));
    assert!(out.join("energy_ledger.csv").exists());
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let dir = tempfile::tempdir().unwrap();
    let good = config(dir.path(), "good.cfg", "mesh = builtin:2\nks = 1\nkt = 0\nslabs = 2\nsamples = 3\n");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let run_a = sthdg(&["verify", "--config", &good, "--out", a.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(run_a.status.code(), Some(0), "{}", String::from_utf8_lossy(&run_a.stderr));
    let run_b = sthdg(&["verify", "--config", &good, "--out", b.to_str().unwrap(), "--seed", "5"]);
    assert_eq!(run_b.status.code(), Some(0));
    for f in ["identities.csv", "constants.csv", "energy.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let weak = config(dir.path(), "weak.cfg", "mesh = builtin:2\nks = 1\nkt = 0\nslabs = 2\nsamples = 3\nalpha = 0.01\n");
    let c = dir.path().join("c");
    assert_eq!(sthdg(&["verify", "--config", &weak, "--out", c.to_str().unwrap()]).status.code(), Some(4));
}

#[test]
fn convergence_csv_shape_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(dir.path(), "conv.cfg", "mesh = builtin:2\nks = 1\nkt = 0\nslabs = 1\nfinal_time = 0.5\n");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let r = sthdg(&["convergence", "--config", &cfg, "--out", out.to_str().unwrap(), "--levels", "3"]);
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stderr));
    }
    let text = fs::read_to_string(a.join("convergence.csv")).unwrap();
    assert_eq!(text.as_bytes(), fs::read(b.join("convergence.csv")).unwrap().as_slice());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    let header: Vec<&str> = lines[0].split(',').collect();
    let orders: Vec<&str> = lines[4].split(',').collect();
    assert_eq!(orders[0], "order");
    for (name, value) in header.iter().zip(&orders).skip(5) {
        assert!(value.parse::<f64>().is_ok(), "order of {name} missing: '{value}'");
    }
    assert!(header.contains(&"cauchy_increment") && header.contains(&"viscous"));
    assert_eq!(sthdg(&["convergence", "--config", &cfg, "--levels", "2"]).status.code(), Some(2));
}
