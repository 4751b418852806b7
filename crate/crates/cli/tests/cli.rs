use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};
use tempfile::TempDir;

fn base() -> Value {
    json!({
        "material": {"mu": 1.0, "lambda": 1.0, "mu_c": 0.5, "l_c": 0.1, "rho": 1.0, "rho_rot": 0.01},
        "model": {"kind": "non_chiral", "coupling": "polar"},
        "grid": {"nx": 16, "ny": 16, "lx": 1.0, "ly": 1.0},
        "sim": {"dt": 0.001, "steps": 20, "output_every": 10},
        "wave": {"k_min": 1.0, "k_max": 20.0, "k_steps": 8},
        "initial": {"kind": "random_smooth", "seed": 7, "amplitude": 0.05, "modes": 3}
    })
}

fn liu() -> Value {
    let mut c = base();
    let a = 0.2;
    c["model"] = json!({"kind": "chiral"});
    c["material"] = json!({
        "mu": 1.0, "lambda": 1.0, "mu_c": 0.5, "l_c": 0.1, "rho": 1.0, "rho_rot": 0.01,
        "mu_s": a, "mu_c_s": -a, "lambda_s": -2.0 * a, "m2": -a
    });
    c
}

fn write_config(dir: &Path, cfg: &Value) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, serde_json::to_string_pretty(cfg).unwrap()).unwrap();
    p
}

fn run(cmd: &str, cfg: &Value, dir: &Path, extra: &[&str]) -> (Output, PathBuf) {
    let config = write_config(dir, cfg);
    let out = dir.join(format!("out_{cmd}"));
    let o = Command::new(env!("CARGO_BIN_EXE_cosserat"))
        .arg(cmd)
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    (o, out)
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    (header, rows)
}

fn all_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

#[test]
fn simulate_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let (oa, da) = run("simulate", &base(), a.path(), &[]);
    let (ob, db) = run("simulate", &base(), b.path(), &[]);
    assert_eq!((code(&oa), code(&ob)), (0, 0));
    let (fa, fb) = (all_files(&da), all_files(&db));
    assert_eq!(fa.len(), 4);
    assert_eq!(fa, fb);
}

#[test]
fn simulate_writes_series_and_snapshots() {
    let d = TempDir::new().unwrap();
    let (o, out) = run("simulate", &base(), d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (h, rows) = csv(&out.join("time_series.csv"));
    assert_eq!(
        h.join(","),
        "step,time,elastic,curvature,interaction,coupling,chiral_elastic,mixing,kin_trans,kin_rot,total"
    );
    assert_eq!(rows.len(), 21);
    for n in [0, 10, 20] {
        let (h, rows) = csv(&out.join(format!("snapshots/snapshot_{n:06}.csv")));
        assert_eq!(h.join(","), "i,j,x,y,u1,u2,theta,v1,v2,omega");
        assert_eq!(rows.len(), 256);
    }
    let e: Vec<f64> = rows.iter().map(|r| r[10].parse().unwrap()).collect();
    assert!(e.iter().all(|v| (v - e[0]).abs() < 1e-3 * e[0]));
}

#[test]
fn zero_state_has_zero_energy_rows() {
    let mut cfg = base();
    cfg["initial"] = json!({"kind": "zero"});
    let d = TempDir::new().unwrap();
    let (o, out) = run("simulate", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv(&out.join("time_series.csv"));
    for r in rows {
        assert!(
            r[2..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0),
            "{r:?}"
        );
    }
}

#[test]
fn unstable_time_step_exits_with_numerical_failure() {
    let mut cfg = base();
    // About 100 times the explicit stability limit.
    cfg["sim"] = json!({"dt": 0.2, "steps": 500, "output_every": 100});
    let d = TempDir::new().unwrap();
    let (o, out) = run("simulate", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("time_series.csv").exists());
}

#[test]
fn config_errors_exit_with_one() {
    let d = TempDir::new().unwrap();
    let mut cfg = base();
    cfg["unexpected"] = json!(1);
    assert_eq!(code(&run("simulate", &cfg, d.path(), &[]).0), 1);
    let mut cfg = base();
    cfg["material"]["mu"] = json!(-1.0);
    assert_eq!(code(&run("verify", &cfg, d.path(), &[]).0), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_cosserat"))
        .args(["simulate", "--config"])
        .arg(d.path().join("missing.json"))
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_cosserat"))
        .arg("bogus")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn plane_wave_initial_condition_runs() {
    let mut cfg = liu();
    cfg["initial"] = json!({"kind": "plane_wave", "k": 2.0 * std::f64::consts::TAU, "branch": 0, "amplitude": 1e-3});
    let d = TempDir::new().unwrap();
    let (o, _) = run("simulate", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    cfg["initial"]["branch"] = json!(7);
    assert_eq!(code(&run("simulate", &cfg, d.path(), &[]).0), 1);
}

#[test]
fn decoupled_sweep_has_zero_ratio_column() {
    let d = TempDir::new().unwrap();
    let (o, out) = run("dispersion", &base(), d.path(), &[]);
    assert_eq!(code(&o), 0);
    let (h, rows) = csv(&out.join("dispersion.csv"));
    assert_eq!(
        h.join(","),
        "k,branch_index,omega,u_hat,v_hat,phi_hat_imag,ratio,phase_velocity"
    );
    assert_eq!(rows.len(), 3 * 8);
    assert!(rows.iter().all(|r| r[6].parse::<f64>().unwrap() == 0.0));
    assert!(!out.join("dispersion.svg").exists());
}

#[test]
fn chiral_sweep_has_three_branches_and_limit_speeds() {
    let d = TempDir::new().unwrap();
    let (o, out) = run("dispersion", &liu(), d.path(), &["--svg"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let (_, rows) = csv(&out.join("dispersion.csv"));
    assert_eq!(rows.len(), 3 * 8);
    let idx: Vec<&str> = rows.iter().map(|r| r[1].as_str()).collect();
    assert!(idx.chunks(3).all(|c| c == ["0", "1", "2"]));

    let (h, rows) = csv(&out.join("velocity_ratio.csv"));
    assert_eq!(h.join(","), "ratio,velocity");
    let first: f64 = rows[0][1].parse().unwrap();
    let last: f64 = rows.last().unwrap()[1].parse().unwrap();
    let (a, mu, lambda, mu_c, rho): (f64, f64, f64, f64, f64) = (0.2, 1.0, 1.0, 0.5, 1.0);
    assert!((first - (mu / rho).sqrt()).abs() < 1e-12);
    let vl = ((lambda + 2.0 * mu) / rho - a * a / (rho * mu_c)).sqrt();
    assert!((last - vl).abs() < 1e-12);
    assert_eq!(rows.last().unwrap()[0], "inf");
    for f in ["dispersion.svg", "velocity_ratio.svg"] {
        assert!(fs::read_to_string(out.join(f))
            .unwrap()
            .contains("<polyline"));
    }
}

#[test]
fn dispersion_is_deterministic() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    let (_, da) = run("dispersion", &liu(), a.path(), &["--svg"]);
    let (_, db) = run("dispersion", &liu(), b.path(), &["--svg"]);
    assert_eq!(all_files(&da), all_files(&db));
}

#[test]
fn homogeneous_reports_roots_and_flags_quarter_turn() {
    let d = TempDir::new().unwrap();
    let (o, out) = run("homogeneous", &base(), d.path(), &[]);
    assert_eq!(code(&o), 0);
    let roots: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(roots["feasible"], json!(false));
    assert_eq!(roots["nontrivial_roots"], json!([]));
    let (h, rows) = csv(&out.join("homogeneous.csv"));
    assert_eq!(h.join(","), "kind,theta0,cos_theta0,residual");
    for r in rows.iter().filter(|r| r[0] == "trivial") {
        assert!(r[3].parse::<f64>().unwrap().abs() < 1e-14);
    }
    let q = rows
        .iter()
        .find(|r| r[0] == "quarter_turn_without_couple_modulus")
        .unwrap();
    assert!((q[3].parse::<f64>().unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn verify_passes_on_default_config() {
    let d = TempDir::new().unwrap();
    let cfg: Value = serde_json::from_str(
        &fs::read_to_string(concat!(
            env!("CARGO_MANIFEST_DIR"),
            "/../../configs/default.json"
        ))
        .unwrap(),
    )
    .unwrap();
    let (o, out) = run("verify", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let (h, rows) = csv(&out.join("verification.csv"));
    assert_eq!(h.join(","), "check_name,max_abs_error,tolerance,pass");
    assert!(rows.len() > 30);
    assert!(rows.iter().all(|r| r[3] == "true"));
}

#[test]
fn verify_skips_interaction_at_kink() {
    let mut cfg = base();
    cfg["material"]["chi"] = json!(0.3);
    cfg["sim"]["eps_reg"] = json!(0.0);
    cfg["initial"] = json!({"kind": "zero"});
    let d = TempDir::new().unwrap();
    let (o, out) = run("verify", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let (_, rows) = csv(&out.join("verification.csv"));
    let r = rows
        .iter()
        .find(|r| r[0] == "fd_gradient_interaction")
        .unwrap();
    assert_eq!(r[3], "skipped");
    let notes = fs::read_to_string(out.join("verification_notes.txt")).unwrap();
    assert!(notes.contains("fd_gradient_interaction skipped: "));
}

#[test]
fn zero_tolerance_fails_verification() {
    let mut cfg = base();
    cfg["verify"] = json!({"tolerance_override": 0.0});
    let d = TempDir::new().unwrap();
    let (o, out) = run("verify", &cfg, d.path(), &[]);
    assert_eq!(code(&o), 3);
    let (_, rows) = csv(&out.join("verification.csv"));
    assert!(rows.iter().any(|r| r[3] == "false"));
    assert_eq!(code(&run("reduce3d", &cfg, d.path(), &[]).0), 3);
}

#[test]
fn reduce3d_passes() {
    let d = TempDir::new().unwrap();
    let (o, out) = run("reduce3d", &base(), d.path(), &[]);
    assert_eq!(code(&o), 0);
    let (_, rows) = csv(&out.join("reduce3d.csv"));
    assert!(rows
        .iter()
        .any(|r| r[0] == "inversion_rotation_determinant"));
    assert!(rows.iter().all(|r| r[3] == "true"));
}
