//! Subcommand drivers. Each writes its files under the output directory.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use cosserat_core::dynamics::{
    homogeneous_residual, homogeneous_roots, verify_variational_consistency, HomogeneousRoots,
    Leapfrog, RhsKind,
};
use cosserat_core::energy::{total_energy, EnergyBreakdown, ModelSelector};
use cosserat_core::reduction3d::reduction_suite;
use cosserat_core::waves::{
    amplitude_ratio, dispersion_branches, nullspace_residual, relative_determinant_residual,
    velocity_curve, vl, vt, WaveBranch, WaveParams,
};
use cosserat_core::{Error, FieldState, MaterialParams, ScalarField, VerificationReport};
use thiserror::Error;

use crate::config::{ConfigError, InitialCondition, ScenarioConfig};
use crate::svg::{line_plot, Series};

pub const DEFAULT_SEED: u64 = 2024;
pub const WAVE_TOL: f64 = 1e-10;
pub const HOMOGENEOUS_TOL: f64 = 1e-14;

#[derive(Debug, Error)]
#[error("{failed} of {total} checks failed")]
pub struct VerificationFailed {
    pub failed: usize,
    pub total: usize,
}

/// Process exit code for an error: 1 config or IO, 2 numerical, 3 verification.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<VerificationFailed>() {
            return 3;
        }
        if cause.is::<ConfigError>() {
            return 1;
        }
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e {
                Error::InvalidGrid(_) | Error::InvalidParams(_) | Error::GridMismatch => 1,
                _ => 2,
            };
        }
    }
    1
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn prepare(out: &Path) -> Result<()> {
    fs::create_dir_all(out).with_context(|| format!("cannot create {}", out.display()))
}

fn num(v: f64) -> String {
    // Prints −0 as 0.
    format!("{:.16e}", v + 0.0)
}

/// Initial fields described by the scenario.
pub fn initial_state(cfg: &ScenarioConfig) -> Result<FieldState> {
    let grid = cfg.grid;
    Ok(match cfg.initial {
        InitialCondition::Zero => FieldState::zeros(grid),
        InitialCondition::RandomSmooth {
            seed,
            amplitude,
            modes,
        } => FieldState::random_smooth(grid, seed, amplitude, modes),
        InitialCondition::PlaneWave {
            k,
            branch,
            amplitude,
        } => {
            let wp = WaveParams::from_material(&cfg.material);
            let branches = dispersion_branches(k, &wp)?;
            let b = branches.get(branch).ok_or_else(|| {
                ConfigError::Invalid(format!(
                    "plane_wave.branch {branch} out of range, {} branches at k = {k}",
                    branches.len()
                ))
            })?;
            plane_wave_state(cfg, b, amplitude)
        }
    })
}

/// `u = a û cos ξ`, `v = a v̂ cos ξ`, `ϑ = −a ψ sin ξ` at `t = 0` with
/// `ξ = kx − ωt` and `φ̂ = iψ`, together with the matching velocities.
fn plane_wave_state(cfg: &ScenarioConfig, b: &WaveBranch, a: f64) -> FieldState {
    let grid = cfg.grid;
    let (k, w) = (b.k, b.omega);
    let (uh, vh, ps) = (a * b.u_hat(), a * b.v_hat(), a * b.phi_hat_imag());
    let f = |g: &dyn Fn(f64, f64) -> f64| {
        ScalarField::from_fn(grid, |x, _| {
            let (s, c) = (k * x).sin_cos();
            g(s, c)
        })
    };
    let mut st = FieldState::zeros(grid);
    st.u1 = f(&|_, c| uh * c);
    st.u2 = f(&|_, c| vh * c);
    st.theta = f(&|s, _| -ps * s);
    st.v1 = f(&|s, _| w * uh * s);
    st.v2 = f(&|s, _| w * vh * s);
    st.omega = f(&|_, c| w * ps * c);
    st
}

fn write_snapshot(dir: &Path, step: usize, state: &FieldState) -> Result<()> {
    let mut w = create(&dir.join(format!("snapshot_{step:06}.csv")))?;
    state.write_snapshot(&mut w)?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulateSummary {
    pub steps: usize,
    pub initial: EnergyBreakdown,
    pub last: EnergyBreakdown,
}

impl SimulateSummary {
    pub fn relative_drift(&self) -> f64 {
        let e0 = self.initial.total();
        let d = self.last.total() - e0;
        if e0 != 0.0 {
            d.abs() / e0.abs()
        } else {
            d.abs()
        }
    }
}

/// Writes `time_series.csv` and `snapshots/snapshot_NNNNNN.csv`.
///
/// On a numerical failure the rows written so far are kept and the error is
/// returned.
pub fn simulate(cfg: &ScenarioConfig, out: &Path) -> Result<SimulateSummary> {
    prepare(out)?;
    let snaps = out.join("snapshots");
    prepare(&snaps)?;
    let p = cfg.params();
    let dt = cfg.sim.dt;
    let mut lf = Leapfrog::new(initial_state(cfg)?, RhsKind::for_model(cfg.model), p)?;
    let mut series = create(&out.join("time_series.csv"))?;
    writeln!(series, "step,time,{}", EnergyBreakdown::CSV_HEADER)?;

    let initial = total_energy(lf.state(), &p, cfg.model)?;
    writeln!(series, "0,{},{}", num(0.0), initial.csv_row())?;
    write_snapshot(&snaps, 0, lf.state())?;
    let mut last = initial;
    for n in 1..=cfg.sim.steps {
        let stepped = lf
            .step(dt)
            .and_then(|_| total_energy(lf.state(), &p, cfg.model));
        match stepped {
            Ok(e) => last = e,
            Err(e) => {
                series.flush()?;
                return Err(e).with_context(|| format!("simulation failed at step {n}"));
            }
        }
        writeln!(series, "{n},{},{}", num(n as f64 * dt), last.csv_row())?;
        if n % cfg.sim.output_every == 0 {
            write_snapshot(&snaps, n, lf.state())?;
        }
    }
    series.flush()?;
    Ok(SimulateSummary {
        steps: cfg.sim.steps,
        initial,
        last,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct DispersionSummary {
    pub wavenumbers: usize,
    pub rows: usize,
    pub min_branches: usize,
    pub max_branches: usize,
    /// Wavenumbers without any real non-negative branch.
    pub no_real_branch: Vec<f64>,
    pub vt: f64,
    pub vl: f64,
}

/// Writes `dispersion.csv`, `velocity_ratio.csv` and, with `svg`,
/// `dispersion.svg` and `velocity_ratio.svg`.
pub fn dispersion(cfg: &ScenarioConfig, out: &Path, svg: bool) -> Result<DispersionSummary> {
    prepare(out)?;
    let wp = WaveParams::from_material(&cfg.material);
    let ks = cfg.wave.wavenumbers();
    let mut w = create(&out.join("dispersion.csv"))?;
    writeln!(
        w,
        "k,branch_index,omega,u_hat,v_hat,phi_hat_imag,ratio,phase_velocity"
    )?;
    let mut curves: Vec<Vec<(f64, f64)>> = Vec::new();
    let mut summary = DispersionSummary {
        wavenumbers: ks.len(),
        rows: 0,
        min_branches: usize::MAX,
        max_branches: 0,
        no_real_branch: Vec::new(),
        vt: f64::NAN,
        vl: f64::NAN,
    };
    for &k in &ks {
        let branches = match dispersion_branches(k, &wp) {
            Ok(b) => b,
            Err(Error::NoRealBranch { .. }) => {
                summary.no_real_branch.push(k);
                Vec::new()
            }
            Err(e) => return Err(e.into()),
        };
        summary.min_branches = summary.min_branches.min(branches.len());
        summary.max_branches = summary.max_branches.max(branches.len());
        for (i, b) in branches.iter().enumerate() {
            let ratio = amplitude_ratio(k, b.omega, &wp).unwrap_or(f64::NAN);
            writeln!(
                w,
                "{},{i},{},{},{},{},{},{}",
                num(k),
                num(b.omega),
                num(b.u_hat()),
                num(b.v_hat()),
                num(b.phi_hat_imag()),
                num(ratio),
                num(b.omega / k)
            )?;
            if curves.len() <= i {
                curves.resize(i + 1, Vec::new());
            }
            curves[i].push((k, b.omega));
            summary.rows += 1;
        }
        for c in curves.iter_mut().skip(branches.len()) {
            c.push((k, f64::NAN));
        }
    }
    w.flush()?;
    if summary.min_branches == usize::MAX {
        summary.min_branches = 0;
    }

    let curve = velocity_curve(&wp, cfg.wave.ratio_samples)?;
    let mut w = create(&out.join("velocity_ratio.csv"))?;
    writeln!(w, "ratio,velocity")?;
    for &(r, v) in &curve {
        writeln!(w, "{},{}", num(r), num(v))?;
    }
    w.flush()?;
    summary.vt = vt(&wp)?;
    summary.vl = vl(&wp)?;

    if svg {
        let series: Vec<Series> = curves
            .into_iter()
            .enumerate()
            .map(|(i, c)| Series::new(format!("branch {i}"), c))
            .collect();
        fs::write(
            out.join("dispersion.svg"),
            line_plot("Dispersion branches", "k", "omega", &series),
        )?;
        let inner: Vec<(f64, f64)> = curve
            .iter()
            .filter(|(r, _)| *r != 0.0 && r.is_finite())
            .map(|&(r, v)| (r.abs().log10(), v))
            .collect();
        let (r0, r1) = (
            inner.first().map_or(-3.0, |p| p.0),
            inner.last().map_or(3.0, |p| p.0),
        );
        let series = [
            Series::new("v(ratio)", inner),
            Series::new("vt", vec![(r0, summary.vt), (r1, summary.vt)]).dashed(),
            Series::new("vl", vec![(r0, summary.vl), (r1, summary.vl)]).dashed(),
        ];
        fs::write(
            out.join("velocity_ratio.svg"),
            line_plot(
                "Phase velocity against amplitude ratio",
                "log10 |u_hat/v_hat|",
                "v",
                &series,
            ),
        )?;
    }
    Ok(summary)
}

/// Writes `homogeneous.csv` with `kind,theta0,cos_theta0,residual`.
pub fn homogeneous(cfg: &ScenarioConfig, out: &Path) -> Result<HomogeneousRoots> {
    prepare(out)?;
    let p = cfg.params();
    let roots = homogeneous_roots(&p, cfg.model)?;
    let mut w = create(&out.join("homogeneous.csv"))?;
    writeln!(w, "kind,theta0,cos_theta0,residual")?;
    let mut row = |kind: &str, t: f64, q: &MaterialParams, sel: ModelSelector| -> Result<()> {
        let r = homogeneous_residual(t, q, sel);
        writeln!(w, "{kind},{},{},{}", num(t), num(t.cos()), num(r))?;
        Ok(())
    };
    for &t in &roots.trivial_roots {
        row("trivial", t, &p, cfg.model)?;
    }
    for &t in &roots.nontrivial_roots {
        row("nontrivial", t, &p, cfg.model)?;
    }
    if let ModelSelector::NonChiral { .. } = cfg.model {
        let q = MaterialParams { mu_c: 0.0, ..p };
        row(
            "quarter_turn_without_couple_modulus",
            std::f64::consts::FRAC_PI_2,
            &q,
            cfg.model,
        )?;
    }
    w.flush()?;
    Ok(roots)
}

/// Largest determinant and null-space residuals over the sweep.
pub fn wave_residuals(cfg: &ScenarioConfig) -> Result<VerificationReport> {
    let wp = WaveParams::from_material(&cfg.material);
    let mut rep = VerificationReport::new();
    let (mut det, mut null, mut count) = (0.0_f64, 0.0_f64, 0usize);
    for k in cfg.wave.wavenumbers() {
        match dispersion_branches(k, &wp) {
            Ok(bs) => {
                for b in &bs {
                    det = det.max(relative_determinant_residual(b, &wp));
                    null = null.max(nullspace_residual(b, &wp));
                }
                count += bs.len();
            }
            Err(Error::NoRealBranch { k }) => {
                rep.note(format!("no real dispersion branch at k = {k}"))
            }
            Err(e) => return Err(e.into()),
        }
    }
    if count > 0 {
        rep.record("wave_determinant_residual", det, WAVE_TOL);
        rep.record("wave_nullspace_residual", null, WAVE_TOL);
    } else {
        rep.skip(
            "wave_determinant_residual",
            WAVE_TOL,
            "no real dispersion branch in the sweep",
        );
        rep.skip(
            "wave_nullspace_residual",
            WAVE_TOL,
            "no real dispersion branch in the sweep",
        );
    }
    Ok(rep)
}

fn finish_report(
    cfg: &ScenarioConfig,
    rep: VerificationReport,
    path: &Path,
) -> Result<VerificationReport> {
    let rep = match cfg.verify.and_then(|v| v.tolerance_override) {
        Some(t) => rep.with_tolerance(t),
        None => rep,
    };
    let mut w = create(path)?;
    rep.write_csv(&mut w)?;
    w.flush()?;
    Ok(rep)
}

fn seed(cfg: &ScenarioConfig) -> u64 {
    cfg.verify.and_then(|v| v.seed).unwrap_or(DEFAULT_SEED)
}

/// Full identity suite on the initial state of the scenario; writes
/// `verification.csv` and `verification_notes.txt`.
pub fn verify(cfg: &ScenarioConfig, out: &Path) -> Result<VerificationReport> {
    prepare(out)?;
    let p = cfg.params();
    let state = initial_state(cfg)?;
    let mut rep = verify_variational_consistency(&state, &p, cfg.model)?;
    let trivial = [0.0, std::f64::consts::PI]
        .iter()
        .map(|&t| homogeneous_residual(t, &p, cfg.model).abs())
        .fold(0.0, f64::max);
    rep.record("homogeneous_trivial_residual", trivial, HOMOGENEOUS_TOL);
    rep.extend(wave_residuals(cfg)?);
    rep.extend(reduction_suite(seed(cfg)));
    let rep = finish_report(cfg, rep, &out.join("verification.csv"))?;
    let mut w = create(&out.join("verification_notes.txt"))?;
    for n in &rep.notes {
        writeln!(w, "{n}")?;
    }
    for c in &rep.checks {
        if let cosserat_core::CheckStatus::Skipped(reason) = &c.status {
            writeln!(w, "{} skipped: {reason}", c.name)?;
        }
    }
    w.flush()?;
    Ok(rep)
}

/// Reduction identities; writes `reduce3d.csv`.
pub fn reduce3d(cfg: &ScenarioConfig, out: &Path) -> Result<VerificationReport> {
    prepare(out)?;
    finish_report(cfg, reduction_suite(seed(cfg)), &out.join("reduce3d.csv"))
}

/// Turns a report with failures into [`VerificationFailed`].
pub fn require_pass(rep: &VerificationReport) -> Result<()> {
    let failed = rep.failures().count();
    if failed > 0 {
        return Err(VerificationFailed {
            failed,
            total: rep.checks.len(),
        }
        .into());
    }
    Ok(())
}
