use cosserat_core::dynamics::{
    rhs_chiral, rhs_linear_chiral, rhs_nonlinear, LinearChiralParams, RhsFields,
};
use cosserat_core::energy::{total_energy, CouplingKind, ModelSelector};
use cosserat_core::{FieldState, Grid, MaterialParams, ScalarField};

use std::f64::consts::TAU;

fn params() -> MaterialParams {
    MaterialParams {
        mu: 1.2,
        lambda: 0.8,
        mu_c: 0.5,
        l_c: 0.2,
        rho: 1.1,
        rho_rot: 0.02,
        ..MaterialParams::default()
    }
}

fn chiral_params() -> MaterialParams {
    MaterialParams {
        mu_s: 0.3,
        lambda_s: -0.2,
        mu_c_s: 0.15,
        m1: 0.25,
        m2: -0.1,
        m3: 0.05,
        mu_c1: 0.2,
        ..params()
    }
}

/// Plane-wave test vector `(u₁, u₂, ϑ)` with mode `(kx, ky)`.
fn plane_wave(grid: Grid, kx: f64, ky: f64, amp: [f64; 3], phase: f64) -> FieldState {
    let f = |a: f64, shift: f64| {
        ScalarField::from_fn(grid, |x, y| {
            a * (TAU * (kx * x + ky * y) + phase + shift).sin()
        })
    };
    let mut s = FieldState::zeros(grid);
    s.u1 = f(amp[0], 0.0);
    s.u2 = f(amp[1], 0.7);
    s.theta = f(amp[2], 1.9);
    s
}

fn scaled(s: &FieldState, c: f64) -> FieldState {
    let mut t = s.clone();
    t.u1 = t.u1.map(|v| c * v);
    t.u2 = t.u2.map(|v| c * v);
    t.theta = t.theta.map(|v| c * v);
    t
}

fn sum(a: &FieldState, b: &FieldState, cb: f64) -> FieldState {
    let mut t = a.clone();
    t.u1 = a.u1.axpy(cb, &b.u1);
    t.u2 = a.u2.axpy(cb, &b.u2);
    t.theta = a.theta.axpy(cb, &b.theta);
    t
}

/// `(rhs(εv) − rhs(−εv))/2ε`.
fn jacobian(rhs: impl Fn(&FieldState) -> RhsFields, v: &FieldState, eps: f64) -> RhsFields {
    let p = rhs(&scaled(v, eps));
    let m = rhs(&scaled(v, -eps));
    RhsFields {
        acc_u: p.acc_u.zip_map(&m.acc_u, |a, b| (a - b).scale(0.5 / eps)),
        acc_theta: p
            .acc_theta
            .zip_map(&m.acc_theta, |a, b| (a - b) * (0.5 / eps)),
    }
}

/// `−Σ area (ρ J v·w_u + 2ρ_rot J v w_ϑ)`, the Hessian form implied by the
/// equations of motion.
fn eom_form(jv: &RhsFields, w: &FieldState, p: &MaterialParams) -> f64 {
    let area = w.grid().cell_area();
    let n = w.grid().len();
    let mut s = 0.0;
    for k in 0..n {
        let a = jv.acc_u.data()[k];
        s += p.rho * (a.x * w.u1.data()[k] + a.y * w.u2.data()[k]);
        s += 2.0 * p.rho_rot * jv.acc_theta.data()[k] * w.theta.data()[k];
    }
    -s * area
}

/// Mixed second difference of the potential energy.
fn energy_form(
    v: &FieldState,
    w: &FieldState,
    p: &MaterialParams,
    sel: ModelSelector,
    h: f64,
) -> f64 {
    let e = |a: f64, b: f64| {
        let s = sum(&scaled(v, a * h), w, b * h);
        total_energy(&s, p, sel).unwrap().potential()
    };
    (e(1.0, 1.0) - e(1.0, -1.0) - e(-1.0, 1.0) + e(-1.0, -1.0)) / (4.0 * h * h)
}

fn test_vectors(grid: Grid) -> Vec<FieldState> {
    vec![
        plane_wave(grid, 1.0, 0.0, [1.0, 0.5, 0.8], 0.1),
        plane_wave(grid, 0.0, 1.0, [0.3, 1.0, -0.6], 0.4),
        plane_wave(grid, 1.0, 1.0, [0.7, -0.4, 1.0], 1.1),
        plane_wave(grid, 2.0, -1.0, [-0.5, 0.9, 0.3], 2.3),
        plane_wave(grid, 1.0, 0.0, [0.0, 0.0, 1.0], 0.0),
    ]
}

#[test]
fn nonchiral_jacobian_matches_energy_hessian() {
    let grid = Grid::new(16, 16, 1.0, 1.0).unwrap();
    let p = params();
    for coupling in [CouplingKind::Polar, CouplingKind::Skew] {
        let sel = ModelSelector::NonChiral { coupling };
        let vs = test_vectors(grid);
        let mut worst = 0.0_f64;
        let mut scale = 0.0_f64;
        for v in &vs {
            let jv = jacobian(|s| rhs_nonlinear(s, &p, coupling).unwrap(), v, 1e-6);
            for w in &vs {
                let a = eom_form(&jv, w, &p);
                let b = energy_form(v, w, &p, sel, 1e-4);
                worst = worst.max((a - b).abs());
                scale = scale.max(b.abs());
            }
        }
        assert!(worst / scale < 1e-6, "{coupling:?}: {}", worst / scale);
    }
}

#[test]
fn chiral_jacobian_matches_energy_hessian() {
    let grid = Grid::new(16, 16, 1.0, 1.0).unwrap();
    let p = chiral_params();
    let vs = test_vectors(grid);
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for v in &vs {
        let jv = jacobian(|s| rhs_chiral(s, &p).unwrap(), v, 1e-6);
        for w in &vs {
            let a = eom_form(&jv, w, &p);
            let b = energy_form(v, w, &p, ModelSelector::Chiral, 1e-4);
            worst = worst.max((a - b).abs());
            scale = scale.max(b.abs());
        }
    }
    assert!(worst / scale < 1e-6, "{}", worst / scale);
}

/// Largest relative mismatch between the Jacobian of the nonlinear chiral
/// equations and the linearised equations evaluated with `φ = sign·ϑ` and
/// rotational inertia `ϱ = 2ρ_rot`.
fn linear_vs_jacobian(p: &MaterialParams, grid: Grid, sign: f64) -> (f64, f64) {
    let mut lp = LinearChiralParams::from_material(p);
    lp.varrho_rot = 2.0 * p.rho_rot;
    let (mut eu, mut et, mut s) = (0.0_f64, 0.0_f64, 0.0_f64);
    for v in test_vectors(grid) {
        let jv = jacobian(|s| rhs_chiral(s, p).unwrap(), &v, 1e-6);
        // The linear operator reads its rotation as φ = −ϑ.
        let mut w = v.clone();
        w.theta = w.theta.map(|t| -sign * t);
        let lin = rhs_linear_chiral(&w, &lp).unwrap();
        eu = eu.max(
            jv.acc_u
                .zip_map(&lin.acc_u, |a, b| (a - b).norm())
                .max_abs(),
        );
        et = et.max(
            jv.acc_theta
                .zip_map(&lin.acc_theta, |a, b| a + sign * b)
                .max_abs(),
        );
        s = s.max(jv.acc_u.max_abs()).max(jv.acc_theta.max_abs());
    }
    (eu / s, et / s)
}

#[test]
fn linear_equations_linearize_the_chiral_model_with_counterclockwise_angle() {
    let grid = Grid::new(128, 128, 1.0, 1.0).unwrap();
    let base = params();
    for p in [
        base,
        MaterialParams {
            mu_c_s: 0.3,
            ..base
        },
        MaterialParams {
            m1: 0.3,
            m2: -0.2,
            ..base
        },
        MaterialParams { mu_c1: 0.3, ..base },
    ] {
        // Agreement up to the O(h²) difference of the second-derivative stencils.
        let (eu, et) = linear_vs_jacobian(&p, grid, 1.0);
        assert!(eu < 5e-3 && et < 5e-3, "{eu:e} {et:e}");
        let (eu, et) = linear_vs_jacobian(&p, grid, -1.0);
        assert!(eu.max(et) > 1e-2);
    }
}

#[test]
fn starred_rotational_stiffness_is_absent_from_the_energy() {
    let grid = Grid::new(64, 64, 1.0, 1.0).unwrap();
    let base = params();
    for p in [
        MaterialParams { mu_s: 0.3, ..base },
        MaterialParams {
            lambda_s: 0.3,
            ..base
        },
        MaterialParams { m3: 0.3, ..base },
    ] {
        let (eu, et) = linear_vs_jacobian(&p, grid, 1.0);
        assert!(eu.max(et) > 0.1, "{eu:e} {et:e}");
    }
}
