use std::path::Path;
use std::process::{Command, Output};

fn podlab(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_podlab"))
        .args(args)
        .current_dir(cwd)
        .env_remove("PODLAB_OUTPUT_ROOT")
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stdout:\n{}\nstderr:\n{}", String::from_utf8_lossy(&out.stdout), String::from_utf8_lossy(&out.stderr));
}

const SMALL: &str = r#"{"problem": "multi_vortex", "mesh": {"nx": 4, "ny": 4, "levels": 2}, "dt": 0.05, "t_final": 1.0}"#;

fn small_trajectory(dir: &Path) {
    std::fs::write(dir.join("c.json"), SMALL).unwrap();
    ok(&podlab(&["fom", "run", "--config", "c.json", "--output", "fom"], dir));
}

#[test]
fn zero_forcing_gives_zero_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"problem": "zero", "mesh": {"nx": 4}, "dt": 0.1, "t_final": 0.5}"#).unwrap();
    ok(&podlab(&["fom", "run", "--config", "c.json", "--output", "out"], dir.path()));
    let traj = podlab::fom::Trajectory::read(&dir.path().join("out/trajectory")).unwrap();
    assert_eq!(traj.velocities.len(), 6);
    assert!(traj.velocities.iter().all(|u| u.values.iter().all(|&v| v == 0.0)));
}

#[test]
fn pod_build_writes_requested_rank_reproducibly() {
    let dir = tempfile::tempdir().unwrap();
    small_trajectory(dir.path());
    let args = |out: &'static str| ["pod", "build", "--traj", "fom/trajectory", "--variant", "mean_plus_derivatives", "--x", "H1", "--r", "8", "--output", out];
    ok(&podlab(&args("a"), dir.path()));
    ok(&podlab(&args("b"), dir.path()));
    let basis = podlab::pod::PodBasis::read(&dir.path().join("a/basis")).unwrap();
    assert_eq!(basis.r, 8);
    assert_eq!(basis.vectors.len(), 8);
    for name in ["basis/eigenvalues.csv", "singular_values.csv"] {
        let a = std::fs::read(dir.path().join("a").join(name)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("b").join(name)).unwrap(), "{name}");
    }
}

#[test]
fn rom_run_against_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    small_trajectory(dir.path());
    ok(&podlab(&["pod", "build", "--traj", "fom/trajectory", "--config", "c.json", "--output", "pod"], dir.path()));
    let out = podlab(&["rom", "run", "--basis", "pod/basis", "--traj", "fom/trajectory", "--config", "c.json", "--output", "rom"], dir.path());
    ok(&out);
    let errors = std::fs::read_to_string(dir.path().join("rom/rom_errors.csv")).unwrap();
    assert_eq!(errors.lines().count(), 22);
    let coeffs = std::fs::read_to_string(dir.path().join("rom/rom_coefficients.csv")).unwrap();
    assert!(coeffs.starts_with("t,a_1"));
}

#[test]
fn invariants_and_report() {
    let dir = tempfile::tempdir().unwrap();
    small_trajectory(dir.path());
    ok(&podlab(&["check", "invariants", "--traj", "fom/trajectory", "--config", "c.json", "--r", "4", "--output", "chk"], dir.path()));
    let report = std::fs::read_to_string(dir.path().join("chk/report.csv")).unwrap();
    assert!(report.starts_with("check_id,time_index,lhs,rhs,margin,pass"));
    assert!(report.lines().skip(1).all(|l| l.ends_with(",true")));
    assert!(dir.path().join("chk/constants.json").exists());
    let out = podlab(&["report", "--dir", "chk"], dir.path());
    ok(&out);
    assert!(String::from_utf8_lossy(&out.stdout).contains("0 failed"));
}

#[test]
fn compare_sets_curves_have_d_v_rows() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), SMALL).unwrap();
    ok(&podlab(&["study", "compare-sets", "--config", "c.json", "--t-final", "0.5", "--output", "cs"], dir.path()));
    let summary = std::fs::read_to_string(dir.path().join("cs/compare_sets/summary.csv")).unwrap();
    let rows: Vec<Vec<String>> = summary.lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect();
    assert_eq!(rows.len(), 8);
    for row in rows {
        let sv = std::fs::read_to_string(dir.path().join("cs/compare_sets").join(&row[0]).join(&row[1]).join("singular_values.csv")).unwrap();
        assert_eq!(sv.lines().count() - 1, row[2].parse::<usize>().unwrap());
    }
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(podlab(&["fom", "run", "--bogus"], dir.path()).status.code(), Some(1));
    assert_eq!(podlab(&["frobnicate"], dir.path()).status.code(), Some(1));
    std::fs::write(dir.path().join("bad.json"), r#"{"nx": 4"#).unwrap();
    let out = podlab(&["fom", "run", "--config", "bad.json"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.json"));
    assert_eq!(podlab(&["fom", "run", "--dt", "0.3", "--t-final", "1"], dir.path()).status.code(), Some(1));
    assert_eq!(podlab(&["report", "--dir", "."], dir.path()).status.code(), Some(1));
}

#[test]
fn output_root_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_podlab"))
        .args(["fom", "run", "--problem", "zero", "--nx", "2", "--dt", "0.5"])
        .current_dir(dir.path())
        .env("PODLAB_OUTPUT_ROOT", dir.path().join("env_root"))
        .output()
        .unwrap();
    ok(&out);
    assert!(dir.path().join("env_root/trajectory/meta.json").exists());
}
