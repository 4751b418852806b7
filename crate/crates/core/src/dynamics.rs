//! Equations of motion, homogeneous special solutions and time integration.
//!
//! Kinetic energy is `ρ/2 ‖u̇‖² + ρ_rot ϑ̇²`, so the equations of motion read
//! `ρ ü = −δV/δu` and `2ρ_rot ϑ̈ = −δV/δϑ`. The right-hand sides below are
//! assembled from closed-form stress expressions rather than from the energy
//! conjugates, which makes the comparison with [`crate::energy`] a genuine
//! consistency check.
//!
//! The curvature vector is `κ = grad ϑ`. With the row-wise matrix curl
//! `(Curl M)ᵢ = ∂ₓMᵢ₂ − ∂ᵧMᵢ₁` one has `R̄ᵀ Curl R̄ = −κ`; the energies only see
//! `‖κ‖`, and the divergence terms are written in terms of `κ` directly.

use serde::{Deserialize, Serialize};

use crate::algebra::{polar_rotation, rot2, Mat2, Vec2};
use crate::energy::{
    analytic_variations, fd_gradient_check, regularized_norm, CouplingKind, FdCheckOptions,
    MaterialParams, ModelSelector,
};
use crate::error::{Error, Result};
use crate::fields::{
    deformation_gradients, div_matrix, div_vec, grad_scalar, FieldState, Mat2Field, ScalarField,
    Vec2Field,
};
use crate::report::VerificationReport;

/// Accelerations `(ü, ϑ̈)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RhsFields {
    pub acc_u: Vec2Field,
    pub acc_theta: ScalarField,
}

impl RhsFields {
    pub fn is_finite(&self) -> bool {
        self.acc_theta.is_finite() && self.acc_u.data().iter().all(|v| v.is_finite())
    }
}

fn eps() -> Mat2<f64> {
    Mat2::levi_civita()
}

/// Curvature flux `tr Ū · κ/√(‖κ‖² + ε²)`; zero where the denominator vanishes.
fn interaction_flux(tr_u: f64, kappa: &Vec2<f64>, eps_reg: f64) -> Vec2<f64> {
    let d = (kappa.norm_sq() + eps_reg * eps_reg).sqrt();
    if d > 0.0 {
        kappa.scale(tr_u / d)
    } else {
        Vec2::zero()
    }
}

/// Fully nonlinear non-chiral equations:
///
/// `ρ ü = Div[2μ R̄ sym Ū + λ tr Ū R̄ − 2(μ+λ) R̄ + S_c + μL_cχ ‖κ‖ R̄]`
///
/// `ρ_rot ϑ̈ = μL_c² div κ − (μ+λ) ε:Ū + μ/2 ε:Ū² + λ/2 tr Ū ε:Ū
///   + ½μL_cχ {div[tr Ū κ/‖κ‖] + ‖κ‖ ε:Ū} + C`
///
/// with `S_c = 4μ_c/tr U · R skew(R̄ᵀR)`, `C = −μ_c ε:(R̄ᵀR)` for the polar
/// coupling (`R = polar F`) and `S_c = μ_c(F − R̄FᵀR̄)`, `C = −μ_c/2 ε:Ū²` for
/// the skew coupling. `ε:M = M₁₂ − M₂₁`.
pub fn rhs_nonlinear(
    state: &FieldState,
    p: &MaterialParams<f64>,
    coupling: CouplingKind,
) -> Result<RhsFields> {
    let grid = *state.grid();
    let (f_field, _) = deformation_gradients(state);
    let kappa = grad_scalar(&state.theta);
    let (mu, lambda, mu_c) = (p.mu, p.lambda, p.mu_c);
    let cint = p.mu * p.l_c * p.chi;
    let n = grid.len();
    let mut stress = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(n);
    let mut flux = Vec::with_capacity(n);
    for k in 0..n {
        let f = f_field.data()[k];
        let rbar = rot2(state.theta.data()[k]);
        let ub = rbar.transpose() * f;
        let tr = ub.trace();
        let kap = kappa.data()[k];
        let nk = regularized_norm(&kap, p.eps_reg);
        let ub2 = ub * ub;

        let mut s =
            (rbar * ub.sym()).scale(2.0 * mu) + rbar.scale(lambda * tr - 2.0 * (mu + lambda));
        let mut l = -(mu + lambda) * ub.eps_contract()
            + 0.5 * mu * ub2.eps_contract()
            + 0.5 * lambda * tr * ub.eps_contract();
        match coupling {
            CouplingKind::Polar => {
                let (r, tr_u) = polar_rotation(&f)?;
                s += (r * (rbar.transpose() * r).skew()).scale(4.0 * mu_c / tr_u);
                l -= mu_c * (rbar.transpose() * r).eps_contract();
            }
            CouplingKind::Skew => {
                s += (f - rbar * f.transpose() * rbar).scale(mu_c);
                l -= 0.5 * mu_c * ub2.eps_contract();
            }
        }
        if cint != 0.0 {
            s += rbar.scale(cint * nk);
            l += 0.5 * cint * nk * ub.eps_contract();
            flux.push(interaction_flux(tr, &kap, p.eps_reg).scale(0.5 * cint));
        } else {
            flux.push(Vec2::zero());
        }
        stress.push(s);
        local.push(l);
    }
    let acc_u = div_matrix(&Mat2Field::from_vec(grid, stress)?).map(|v| v.scale(1.0 / p.rho));
    let curv = div_vec(&kappa).map(|d| p.mu * p.l_c * p.l_c * d);
    let inter = div_vec(&Vec2Field::from_vec(grid, flux)?);
    let local = ScalarField::from_vec(grid, local)?;
    let acc_theta = curv
        .zip_map(&inter, |a, b| a + b)
        .zip_map(&local, |a, b| (a + b) / p.rho_rot);
    Ok(RhsFields { acc_u, acc_theta })
}

/// Fully nonlinear chiral equations (skew coupling, starred and mixing terms):
///
/// `ρ ü = Div[P + εᵀP*]` with
/// `P = 2μ R̄ sym Ū + λ tr Ū R̄ − 2(μ+λ)R̄ + μ_c(F − R̄FᵀR̄)
///      + m₁(½R̄F*ᵀR̄ + ½F* − R̄) + m₂(a−2)R̄ + m₃/2 (F* − R̄F*ᵀR̄)`,
/// `P* = μ*(R̄F*ᵀR̄ + F*) − 2(μ*+λ*)R̄ + λ* a R̄ + μ_c*(F* − R̄F*ᵀR̄)
///      + m₁(½R̄FᵀR̄ + ½F − R̄) + m₂(b−2)R̄ + m₃/2 (F − R̄FᵀR̄)`,
/// `a = tr Ū*`, `b = tr Ū`, and
///
/// `ρ_rot ϑ̈ = μL_c² div κ − (μ+λ) ε:Ū + μ/2 ε:Ū² + λ/2 b ε:Ū − μ_c/2 ε:Ū²
///   + ½[(μ* − μ_c*) ε:Ū*² − 2(μ*+λ*) ε:Ū* + λ* a ε:Ū*
///   + (m₁ − m₃)/2 ε:(Ū*Ū + ŪŪ*) − m₁ ε:(Ū* + Ū) + m₂((b−2) ε:Ū* + (a−2) ε:Ū)]`.
pub fn rhs_chiral(state: &FieldState, p: &MaterialParams<f64>) -> Result<RhsFields> {
    let grid = *state.grid();
    let (f_field, fs_field) = deformation_gradients(state);
    let kappa = grad_scalar(&state.theta);
    let (mu, lambda, mu_c) = (p.mu, p.lambda, p.mu_c);
    let (mus, las, mucs) = (p.mu_s, p.lambda_s, p.mu_c_s);
    let (m1, m2, m3) = (p.m1, p.m2, p.m3);
    let eps_t = eps().transpose();
    let n = grid.len();
    let mut stress = Vec::with_capacity(n);
    let mut local = Vec::with_capacity(n);
    for k in 0..n {
        let f = f_field.data()[k];
        let fs = fs_field.data()[k];
        let rbar = rot2(state.theta.data()[k]);
        let rt = rbar.transpose();
        let (ub, ubs) = (rt * f, rt * fs);
        let (a, b) = (ubs.trace(), ub.trace());
        let rfr = rbar * f.transpose() * rbar;
        let rfsr = rbar * fs.transpose() * rbar;

        let p_main = (rbar * ub.sym()).scale(2.0 * mu)
            + rbar.scale(lambda * b - 2.0 * (mu + lambda))
            + (f - rfr).scale(mu_c)
            + (rfsr.scale(0.5) + fs.scale(0.5) - rbar).scale(m1)
            + rbar.scale(m2 * (a - 2.0))
            + (fs - rfsr).scale(0.5 * m3);
        let p_star = (rfsr + fs).scale(mus)
            + rbar.scale(las * a - 2.0 * (mus + las))
            + (fs - rfsr).scale(mucs)
            + (rfr.scale(0.5) + f.scale(0.5) - rbar).scale(m1)
            + rbar.scale(m2 * (b - 2.0))
            + (f - rfr).scale(0.5 * m3);
        stress.push(p_main + eps_t * p_star);

        let (e, es) = (ub.eps_contract(), ubs.eps_contract());
        let e2 = (ub * ub).eps_contract();
        let es2 = (ubs * ubs).eps_contract();
        let cross = (ubs * ub + ub * ubs).eps_contract();
        let l = -(mu + lambda) * e + 0.5 * mu * e2 + 0.5 * lambda * b * e - 0.5 * mu_c * e2
            + 0.5
                * ((mus - mucs) * es2 - 2.0 * (mus + las) * es
                    + las * a * es
                    + 0.5 * (m1 - m3) * cross
                    - m1 * (es + e)
                    + m2 * ((b - 2.0) * es + (a - 2.0) * e));
        local.push(l);
    }
    let acc_u = div_matrix(&Mat2Field::from_vec(grid, stress)?).map(|v| v.scale(1.0 / p.rho));
    let curv = div_vec(&kappa).map(|d| p.mu * p.l_c * p.l_c * d);
    let local = ScalarField::from_vec(grid, local)?;
    let acc_theta = curv.zip_map(&local, |a, b| (a + b) / p.rho_rot);
    Ok(RhsFields { acc_u, acc_theta })
}

/// Constants of the linearised chiral model, written for the rotation
/// variable `φ = −ϑ` and the rotational inertia `ϱ_rot = 4ρ_rot`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearChiralParams {
    pub rho: f64,
    pub varrho_rot: f64,
    /// Curvature stiffness, `d₁ = μL_c²`.
    pub d1: f64,
    pub lambda: f64,
    pub mu: f64,
    pub mu_c: f64,
    pub mu_s: f64,
    pub lambda_s: f64,
    pub mu_c_s: f64,
    /// `m₁/2 + m₂`.
    pub m12: f64,
}

impl LinearChiralParams {
    pub fn from_material(p: &MaterialParams<f64>) -> Self {
        Self {
            rho: p.rho,
            varrho_rot: 4.0 * p.rho_rot,
            d1: p.mu * p.l_c * p.l_c,
            lambda: p.lambda,
            mu: p.mu,
            mu_c: p.mu_c,
            mu_s: p.mu_s,
            lambda_s: p.lambda_s,
            mu_c_s: p.mu_c_s,
            m12: 0.5 * p.m1 + p.m2,
        }
    }

    /// Chiral-lattice identification `γ = 2d₁`, `μ* = −μ_c* = A`,
    /// `λ* = −2A`, `m₁/2 + m₂ = −A`.
    #[allow(clippy::too_many_arguments)]
    pub fn liu(
        rho: f64,
        varrho_rot: f64,
        gamma: f64,
        lambda: f64,
        mu: f64,
        mu_c: f64,
        a: f64,
    ) -> Self {
        Self {
            rho,
            varrho_rot,
            d1: 0.5 * gamma,
            lambda,
            mu,
            mu_c,
            mu_s: a,
            lambda_s: -2.0 * a,
            mu_c_s: -a,
            m12: -a,
        }
    }

    pub fn gamma(&self) -> f64 {
        2.0 * self.d1
    }
}

/// Spatial derivatives entering the linearised equations at one point.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinearJet {
    pub u1x: f64,
    pub u1y: f64,
    pub u1xx: f64,
    pub u1xy: f64,
    pub u1yy: f64,
    pub u2x: f64,
    pub u2y: f64,
    pub u2xx: f64,
    pub u2xy: f64,
    pub u2yy: f64,
    pub phi: f64,
    pub phix: f64,
    pub phiy: f64,
    pub phixx: f64,
    pub phiyy: f64,
}

/// Accelerations `(ü₁, ü₂, φ̈)` of the linearised chiral model:
///
/// `ρ ü₁ = (λ+2μ+μ*+μ_c*) u₁,ₓₓ + (μ+μ_c+λ*+2μ*) u₁,ᵧᵧ + (λ+μ−μ_c−λ*−μ*+μ_c*) u₂,ₓᵧ
///   + m(−2u₁,ₓᵧ + u₂,ₓₓ − u₂,ᵧᵧ) − 2(2λ*+2μ*−μ_c*) φₓ + 2μ_c φᵧ`
///
/// `ρ ü₂ = (μ+μ_c+λ*+2μ*) u₂,ₓₓ + (λ+2μ+μ*+μ_c*) u₂,ᵧᵧ + (λ+μ−μ_c−λ*−μ*+μ_c*) u₁,ₓᵧ
///   + m(u₁,ₓₓ − u₁,ᵧᵧ + 2u₂,ₓᵧ) − 2μ_c φₓ − 2(2λ*+2μ*−μ_c*) φᵧ`
///
/// `ϱ φ̈ = 2d₁ Δφ + 4(2λ*+2μ*−μ_c*−μ_c) φ + 2μ_c(u₂,ₓ − u₁,ᵧ) − 2(μ_c*−2λ*−2μ*)(u₁,ₓ + u₂,ᵧ)`
///
/// with `m = m₁/2 + m₂`.
pub fn linear_chiral_accel(j: &LinearJet, lp: &LinearChiralParams) -> [f64; 3] {
    let (la, mu, mc) = (lp.lambda, lp.mu, lp.mu_c);
    let (ms, ls, mcs) = (lp.mu_s, lp.lambda_s, lp.mu_c_s);
    let c_long = la + 2.0 * mu + ms + mcs;
    let c_tran = mu + mc + ls + 2.0 * ms;
    let c_mix = la + mu - mc - ls - ms + mcs;
    let c_phi = 2.0 * ls + 2.0 * ms - mcs;
    let u1 = c_long * j.u1xx
        + c_tran * j.u1yy
        + c_mix * j.u2xy
        + lp.m12 * (-2.0 * j.u1xy + j.u2xx - j.u2yy)
        - 2.0 * c_phi * j.phix
        + 2.0 * mc * j.phiy;
    let u2 = c_tran * j.u2xx
        + c_long * j.u2yy
        + c_mix * j.u1xy
        + lp.m12 * (j.u1xx - j.u1yy + 2.0 * j.u2xy)
        - 2.0 * mc * j.phix
        - 2.0 * c_phi * j.phiy;
    let ph =
        2.0 * lp.d1 * (j.phixx + j.phiyy) + 4.0 * (c_phi - mc) * j.phi + 2.0 * mc * (j.u2x - j.u1y)
            - 2.0 * (mcs - 2.0 * ls - 2.0 * ms) * (j.u1x + j.u2y);
    [u1 / lp.rho, u2 / lp.rho, ph / lp.varrho_rot]
}

/// Rotational equation of the chiral-lattice model including the extra
/// `−4Aφ` stiffness:
/// `ϱ φ̈ = γ Δφ − 4(μ_c + A) φ + 2μ_c(u₂,ₓ − u₁,ᵧ) − 2A(u₁,ₓ + u₂,ᵧ)`.
/// Returns `φ̈`.
pub fn lattice_rotation_accel(
    j: &LinearJet,
    gamma: f64,
    a: f64,
    mu_c: f64,
    varrho_rot: f64,
) -> f64 {
    (gamma * (j.phixx + j.phiyy) - 4.0 * (mu_c + a) * j.phi + 2.0 * mu_c * (j.u2x - j.u1y)
        - 2.0 * a * (j.u1x + j.u2y))
        / varrho_rot
}

/// Discrete jets of a state (`φ = −ϑ`), three-point second differences and
/// the four-point mixed stencil.
pub fn linear_jets(state: &FieldState) -> Vec<LinearJet> {
    let phi = state.theta.map(|t| -t);
    let parts = |f: &ScalarField| (f.dx(), f.dy(), f.d2x(), f.dxy(), f.d2y());
    let (a1, b1, c1, d1, e1) = parts(&state.u1);
    let (a2, b2, c2, d2, e2) = parts(&state.u2);
    let (px, py, pxx, _, pyy) = parts(&phi);
    (0..state.grid().len())
        .map(|k| LinearJet {
            u1x: a1.data()[k],
            u1y: b1.data()[k],
            u1xx: c1.data()[k],
            u1xy: d1.data()[k],
            u1yy: e1.data()[k],
            u2x: a2.data()[k],
            u2y: b2.data()[k],
            u2xx: c2.data()[k],
            u2xy: d2.data()[k],
            u2yy: e2.data()[k],
            phi: phi.data()[k],
            phix: px.data()[k],
            phiy: py.data()[k],
            phixx: pxx.data()[k],
            phiyy: pyy.data()[k],
        })
        .collect()
}

/// Linearised chiral equations on the grid; the rotational acceleration is
/// returned for `ϑ = −φ`.
pub fn rhs_linear_chiral(state: &FieldState, lp: &LinearChiralParams) -> Result<RhsFields> {
    let grid = *state.grid();
    let acc: Vec<[f64; 3]> = linear_jets(state)
        .iter()
        .map(|j| linear_chiral_accel(j, lp))
        .collect();
    Ok(RhsFields {
        acc_u: Vec2Field::from_vec(grid, acc.iter().map(|a| Vec2::new(a[0], a[1])).collect())?,
        acc_theta: ScalarField::from_vec(grid, acc.iter().map(|a| -a[2]).collect())?,
    })
}

/// Which right-hand side drives the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhsKind {
    Nonlinear(CouplingKind),
    Chiral,
    LinearChiral(LinearChiralParams),
}

impl RhsKind {
    pub fn for_model(sel: ModelSelector) -> Self {
        match sel {
            ModelSelector::NonChiral { coupling } => RhsKind::Nonlinear(coupling),
            ModelSelector::Chiral => RhsKind::Chiral,
        }
    }

    pub fn evaluate(&self, state: &FieldState, p: &MaterialParams<f64>) -> Result<RhsFields> {
        match self {
            RhsKind::Nonlinear(c) => rhs_nonlinear(state, p, *c),
            RhsKind::Chiral => rhs_chiral(state, p),
            RhsKind::LinearChiral(lp) => rhs_linear_chiral(state, lp),
        }
    }
}

/// Velocity-Verlet integrator caching the acceleration of the current state.
#[derive(Debug, Clone)]
pub struct Leapfrog {
    state: FieldState,
    acc: RhsFields,
    rhs: RhsKind,
    params: MaterialParams<f64>,
    steps: usize,
}

impl Leapfrog {
    pub fn new(state: FieldState, rhs: RhsKind, params: MaterialParams<f64>) -> Result<Self> {
        let acc = rhs.evaluate(&state, &params)?;
        Ok(Self {
            state,
            acc,
            rhs,
            params,
            steps: 0,
        })
    }

    pub fn state(&self) -> &FieldState {
        &self.state
    }

    pub fn into_state(self) -> FieldState {
        self.state
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Half kick, drift, recompute accelerations, half kick. `dt` may be
    /// negative to integrate backwards.
    pub fn step(&mut self, dt: f64) -> Result<()> {
        let h = 0.5 * dt;
        let s = &mut self.state;
        kick(s, &self.acc, h);
        s.u1 = s.u1.axpy(dt, &s.v1);
        s.u2 = s.u2.axpy(dt, &s.v2);
        s.theta = s.theta.axpy(dt, &s.omega);
        self.steps += 1;
        if !s.is_finite() {
            return Err(Error::NonFiniteState { step: self.steps });
        }
        self.acc = self.rhs.evaluate(s, &self.params)?;
        kick(s, &self.acc, h);
        if !s.is_finite() || !self.acc.is_finite() {
            return Err(Error::NonFiniteState { step: self.steps });
        }
        Ok(())
    }
}

fn kick(s: &mut FieldState, acc: &RhsFields, h: f64) {
    s.v1 = s.v1.axpy(h, &acc.acc_u.component(0));
    s.v2 = s.v2.axpy(h, &acc.acc_u.component(1));
    s.omega = s.omega.axpy(h, &acc.acc_theta);
}

/// One velocity-Verlet step from `state`.
pub fn step_leapfrog(
    state: &FieldState,
    dt: f64,
    rhs: RhsKind,
    p: &MaterialParams<f64>,
) -> Result<FieldState> {
    let mut lf = Leapfrog::new(state.clone(), rhs, *p)?;
    lf.step(dt)?;
    Ok(lf.into_state())
}

/// Recommended time step `c·min(hx, hy)/√((λ+2μ)/ρ)`.
pub fn cfl_time_step(state: &FieldState, p: &MaterialParams<f64>, c: f64) -> f64 {
    let g = state.grid();
    c * g.hx().min(g.hy()) / ((p.lambda + 2.0 * p.mu) / p.rho).sqrt()
}

/// Homogeneous balance for `u ≡ 0`, `ϑ ≡ ϑ₀`.
///
/// Non-chiral: `(λ + μ + μ_c − (λ+μ) cos ϑ₀) sin ϑ₀`.
///
/// Chiral: `[−m₁ − 2m₂ − λ + λ* − μ − μ_c1 + μ*
///   + (m₁ + 2m₂ − m₃ − μ_c − μ_c* + λ + λ* + μ + μ*) cos ϑ₀] sin ϑ₀`.
pub fn homogeneous_residual(theta0: f64, p: &MaterialParams<f64>, sel: ModelSelector) -> f64 {
    let (s, c) = theta0.sin_cos();
    match sel {
        ModelSelector::NonChiral { .. } => (p.lambda + p.mu + p.mu_c - (p.lambda + p.mu) * c) * s,
        ModelSelector::Chiral => {
            let (alpha, beta) = chiral_homogeneous_coefficients(p);
            (alpha + beta * c) * s
        }
    }
}

fn chiral_homogeneous_coefficients(p: &MaterialParams<f64>) -> (f64, f64) {
    let alpha = -p.m1 - 2.0 * p.m2 - p.lambda + p.lambda_s - p.mu - p.mu_c1 + p.mu_s;
    let beta = p.m1 + 2.0 * p.m2 - p.m3 - p.mu_c - p.mu_c_s + p.lambda + p.lambda_s + p.mu + p.mu_s;
    (alpha, beta)
}

/// Fraction `N/D` of the chiral homogeneous branch `cos ϑ₀ = 1 + N/D` with
/// `N = μ_c1 + μ_c + μ_c* − 2λ* − 2μ* + m₃` and
/// `D = λ + λ* + μ + μ* − μ_c − μ_c* + m₁ + 2m₂ − m₃`.
pub fn chiral_homogeneous_fraction(p: &MaterialParams<f64>) -> Result<f64> {
    let num = p.mu_c1 + p.mu_c + p.mu_c_s - 2.0 * p.lambda_s - 2.0 * p.mu_s + p.m3;
    let den = p.lambda + p.lambda_s + p.mu + p.mu_s - p.mu_c - p.mu_c_s + p.m1 + 2.0 * p.m2 - p.m3;
    if den == 0.0 {
        return Err(Error::ZeroDenominator("chiral homogeneous fraction"));
    }
    Ok(num / den)
}

/// Angles solving the homogeneous balance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneousRoots {
    pub trivial_roots: Vec<f64>,
    /// Value of `cos ϑ₀` on the non-trivial branch.
    pub nontrivial_cos: Option<f64>,
    /// `±arccos` of the non-trivial branch when it lies in `[−1, 1]`, with
    /// duplicates of the trivial roots removed.
    pub nontrivial_roots: Vec<f64>,
    pub feasible: bool,
}

impl HomogeneousRoots {
    pub fn all_roots(&self) -> Vec<f64> {
        self.trivial_roots
            .iter()
            .chain(&self.nontrivial_roots)
            .copied()
            .collect()
    }
}

pub fn homogeneous_roots(p: &MaterialParams<f64>, sel: ModelSelector) -> Result<HomogeneousRoots> {
    let (cos0, feasible) = match sel {
        ModelSelector::NonChiral { .. } => {
            let d = p.lambda + p.mu;
            if d == 0.0 {
                return Err(Error::ZeroDenominator("lambda + mu"));
            }
            let c = 1.0 + p.mu_c / d;
            (c, (-1.0..=1.0).contains(&c))
        }
        ModelSelector::Chiral => {
            let frac = chiral_homogeneous_fraction(p)?;
            (1.0 + frac, (-2.0..=0.0).contains(&frac))
        }
    };
    let pi = std::f64::consts::PI;
    let mut nontrivial = Vec::new();
    if (-1.0..=1.0).contains(&cos0) {
        let t = cos0.acos();
        for r in [t, -t] {
            let dup = [0.0, pi, -pi]
                .iter()
                .chain(&nontrivial)
                .any(|q: &f64| (q - r).abs() < 1e-15);
            if !dup {
                nontrivial.push(r);
            }
        }
    }
    Ok(HomogeneousRoots {
        trivial_roots: vec![0.0, pi],
        nontrivial_cos: Some(cos0),
        nontrivial_roots: nontrivial,
        feasible,
    })
}

/// Compares the equations of motion with the negative energy gradient and
/// runs the finite-difference gradient oracle.
///
/// Errors are `max |ρ ü + δV/δu| / max |δV/δu|` and
/// `max |2ρ_rot ϑ̈ + δV/δϑ| / max |δV/δϑ|` (absolute when the gradient
/// vanishes). The tolerance is `1e−10`, relaxed to `1e−8` when the
/// regularised interaction term is active.
pub fn verify_variational_consistency(
    state: &FieldState,
    p: &MaterialParams<f64>,
    sel: ModelSelector,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let tol = match sel {
        ModelSelector::NonChiral { .. } if p.chi != 0.0 => 1e-8,
        _ => 1e-10,
    };
    let rhs = RhsKind::for_model(sel).evaluate(state, p)?;
    let (du, dth) = analytic_variations(state, p, sel)?;
    let rel = |e: f64, s: f64| if s > 0.0 { e / s } else { e };

    let eu = rhs
        .acc_u
        .zip_map(&du, |a, g| (a.scale(p.rho) + g).norm())
        .max_abs();
    report.record("eom_u_vs_energy_gradient", rel(eu, du.max_abs()), tol);
    let et = rhs
        .acc_theta
        .zip_map(&dth, |a, g| 2.0 * p.rho_rot * a + g)
        .max_abs();
    report.record("eom_theta_vs_energy_gradient", rel(et, dth.max_abs()), tol);

    // Least-squares factor c in c·ρ_rot·ϑ̈ = −δV/δϑ.
    let num: f64 = rhs.acc_theta.zip_map(&dth, |a, g| -a * g * p.rho_rot).sum();
    let den: f64 = rhs.acc_theta.map(|a| (a * p.rho_rot).powi(2)).sum();
    if den > 0.0 {
        report.note(format!(
            "rotational inertia factor fitted from the energy gradient: {:.12} (kinetic term rho_rot*omega^2 implies 2)",
            num / den
        ));
    }

    let total = rhs
        .acc_u
        .data()
        .iter()
        .fold(Vec2::zero(), |s, a| s + a.scale(p.rho));
    let scale = rhs.acc_u.max_abs() * p.rho * state.grid().len() as f64;
    report.record("momentum_balance", rel(total.norm(), scale), 1e-12);

    report.extend(fd_gradient_check(
        state,
        p,
        sel,
        &FdCheckOptions::default(),
    )?);
    Ok(report)
}
