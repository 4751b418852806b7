//! Energy densities of the planar Cosserat model, their discrete totals and
//! analytic first variations.
//!
//! Notation: `R̄ = rot2(ϑ)`, `Ū = R̄ᵀF`, `Ū* = R̄ᵀF*`, `g = grad ϑ`.
//! For a density `W(F, F*, R̄, g)` the conjugates are `P = ∂W/∂F`,
//! `P* = ∂W/∂F*`, `Q = ∂W/∂R̄` and `G = ∂W/∂g`. With `F = 1 + ∇u`,
//! `F* = 1 + ε∇u` and `δR̄ = −εR̄ δϑ`, the L²-gradients of the discrete total
//! energy are
//!
//! * `δV/δu = −Div P − εᵀ Div P*`
//! * `δV/δϑ = Q:(−εR̄) − div G`

use serde::{Deserialize, Serialize};

use crate::algebra::{polar_rotation, rot2, Mat2, Vec2};
use crate::error::{Error, Result};
use crate::fields::{
    deformation_gradients, div_matrix, div_vec, grad_scalar, FieldState, Mat2Field, ScalarField,
    Vec2Field,
};
use crate::report::VerificationReport;
use crate::rng::SampleRng;
use crate::scalar::Scalar;

fn default_eps_reg<T: Scalar>() -> T {
    T::lit(1e-8)
}

/// Constitutive constants.
///
/// `eps_reg` regularises the norm of the curvature vector in the interaction
/// term, `‖g‖ ≈ √(‖g‖² + eps_reg²) − eps_reg`. It is not part of the
/// serialised material description.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
#[serde(bound(
    serialize = "T: Serialize",
    deserialize = "T: Scalar + Deserialize<'de>"
))]
pub struct MaterialParams<T> {
    pub mu: T,
    pub lambda: T,
    #[serde(default)]
    pub mu_c: T,
    #[serde(default)]
    pub l_c: T,
    #[serde(default)]
    pub chi: T,
    pub rho: T,
    pub rho_rot: T,
    #[serde(default)]
    pub mu_s: T,
    #[serde(default)]
    pub lambda_s: T,
    #[serde(default)]
    pub mu_c_s: T,
    #[serde(default)]
    pub m1: T,
    #[serde(default)]
    pub m2: T,
    #[serde(default)]
    pub m3: T,
    /// Additional couple modulus appearing only in the chiral homogeneous
    /// balance.
    #[serde(default)]
    pub mu_c1: T,
    #[serde(skip, default = "default_eps_reg")]
    pub eps_reg: T,
}

impl<T: Scalar> Default for MaterialParams<T> {
    fn default() -> Self {
        Self {
            mu: T::one(),
            lambda: T::one(),
            mu_c: T::lit(0.5),
            l_c: T::lit(0.1),
            chi: T::zero(),
            rho: T::one(),
            rho_rot: T::lit(0.01),
            mu_s: T::zero(),
            lambda_s: T::zero(),
            mu_c_s: T::zero(),
            m1: T::zero(),
            m2: T::zero(),
            m3: T::zero(),
            mu_c1: T::zero(),
            eps_reg: default_eps_reg(),
        }
    }
}

impl<T: Scalar> MaterialParams<T> {
    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mu,
            self.lambda,
            self.mu_c,
            self.l_c,
            self.chi,
            self.rho,
            self.rho_rot,
            self.mu_s,
            self.lambda_s,
            self.mu_c_s,
            self.m1,
            self.m2,
            self.m3,
            self.mu_c1,
            self.eps_reg,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("all constants must be finite".into()));
        }
        let z = T::zero();
        let checks = [
            (self.mu > z, "mu must be positive"),
            (self.mu_c >= z, "mu_c must be non-negative"),
            (self.l_c >= z, "l_c must be non-negative"),
            (self.rho > z, "rho must be positive"),
            (self.rho_rot > z, "rho_rot must be positive"),
            (self.eps_reg >= z, "eps_reg must be non-negative"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::InvalidParams(msg.into()));
            }
        }
        Ok(())
    }

    /// Copy with every starred and mixing constant set to zero.
    pub fn without_chiral(&self) -> Self {
        let z = T::zero();
        Self {
            mu_s: z,
            lambda_s: z,
            mu_c_s: z,
            m1: z,
            m2: z,
            m3: z,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingKind {
    /// `μ_c ‖R̄ᵀ polar(F) − 1‖²`
    Polar,
    /// `μ_c ‖skew(R̄ᵀF − 1)‖²`
    Skew,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSelector {
    /// Elastic, curvature, interaction and coupling energies.
    NonChiral { coupling: CouplingKind },
    /// Elastic, curvature, skew coupling, starred elastic and mixing energies.
    Chiral,
}

impl ModelSelector {
    pub fn coupling(&self) -> CouplingKind {
        match self {
            ModelSelector::NonChiral { coupling } => *coupling,
            ModelSelector::Chiral => CouplingKind::Skew,
        }
    }

    pub fn terms(&self) -> &'static [Term] {
        match self {
            ModelSelector::NonChiral { .. } => &[
                Term::Elastic,
                Term::Curvature,
                Term::Interaction,
                Term::Coupling,
            ],
            ModelSelector::Chiral => &[
                Term::Elastic,
                Term::Curvature,
                Term::Coupling,
                Term::ChiralElastic,
                Term::Mixing,
            ],
        }
    }
}

/// Individual potential energy contributions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Elastic,
    Curvature,
    Interaction,
    Coupling,
    ChiralElastic,
    Mixing,
}

impl Term {
    pub const ALL: [Term; 6] = [
        Term::Elastic,
        Term::Curvature,
        Term::Interaction,
        Term::Coupling,
        Term::ChiralElastic,
        Term::Mixing,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Term::Elastic => "elastic",
            Term::Curvature => "curvature",
            Term::Interaction => "interaction",
            Term::Coupling => "coupling",
            Term::ChiralElastic => "chiral_elastic",
            Term::Mixing => "mixing",
        }
    }
}

/// Local kinematic quantities at one material point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Kinematics<T> {
    pub f: Mat2<T>,
    pub f_star: Mat2<T>,
    pub theta: T,
    pub grad_theta: Vec2<T>,
}

/// Partial derivatives of a density with respect to `F`, `F*`, `R̄` and `g`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conjugates<T> {
    pub p: Mat2<T>,
    pub p_star: Mat2<T>,
    pub q: Mat2<T>,
    pub g: Vec2<T>,
}

impl<T: Scalar> Conjugates<T> {
    pub fn zero() -> Self {
        Self {
            p: Mat2::zero(),
            p_star: Mat2::zero(),
            q: Mat2::zero(),
            g: Vec2::zero(),
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            p: self.p + o.p,
            p_star: self.p_star + o.p_star,
            q: self.q + o.q,
            g: self.g + o.g,
        }
    }

    /// Conjugates of a density depending on `F` only through `Ū = R̄ᵀF`, given
    /// `∂W/∂Ū`.
    fn from_ubar(rbar: &Mat2<T>, f: &Mat2<T>, w_u: &Mat2<T>) -> Self {
        Self {
            p: *rbar * *w_u,
            q: *f * w_u.transpose(),
            ..Self::zero()
        }
    }

    /// Same as [`Conjugates::from_ubar`] for a density of `Ū* = R̄ᵀF*`.
    fn from_ubar_star(rbar: &Mat2<T>, fs: &Mat2<T>, w_us: &Mat2<T>) -> Self {
        Self {
            p_star: *rbar * *w_us,
            q: *fs * w_us.transpose(),
            ..Self::zero()
        }
    }
}

#[inline]
fn two<T: Scalar>() -> T {
    T::lit(2.0)
}

#[inline]
fn half<T: Scalar>() -> T {
    T::lit(0.5)
}

/// `√(‖g‖² + ε²) − ε`; the exact norm for `ε = 0`.
#[inline]
pub fn regularized_norm<T: Scalar>(g: &Vec2<T>, eps: T) -> T {
    if eps == T::zero() {
        g.norm()
    } else {
        (g.norm_sq() + eps * eps).sqrt() - eps
    }
}

/// `μ‖sym Ū − 1‖² + λ/2 (tr(sym Ū − 1))²`.
pub fn elastic_density<T: Scalar>(f: &Mat2<T>, theta: T, p: &MaterialParams<T>) -> T {
    elastic_like(&(rot2(theta).transpose() * *f), p.mu, p.lambda)
}

fn elastic_like<T: Scalar>(ubar: &Mat2<T>, mu: T, lambda: T) -> T {
    let e = ubar.sym() - Mat2::identity();
    let t = e.trace();
    mu * e.norm_sq() + half::<T>() * lambda * t * t
}

/// Expanded algebraic form of [`elastic_density`]:
/// `2μ − 2μ tr(FR̄ᵀ) + μ/2 (tr(Ū²) + tr(FFᵀ)) + 2λ − 2λ tr Ū + λ/2 (tr Ū)²`.
pub fn elastic_density_expanded<T: Scalar>(f: &Mat2<T>, theta: T, p: &MaterialParams<T>) -> T {
    let rbar = rot2(theta);
    let ub = rbar.transpose() * *f;
    let t = ub.trace();
    let (mu, lambda) = (p.mu, p.lambda);
    two::<T>() * mu - two::<T>() * mu * (*f * rbar.transpose()).trace()
        + half::<T>() * mu * ((ub * ub).trace() + (*f * f.transpose()).trace())
        + two::<T>() * lambda
        - two::<T>() * lambda * t
        + half::<T>() * lambda * t * t
}

/// `μ L_c² ‖g‖²`.
pub fn curvature_density<T: Scalar>(grad_theta: &Vec2<T>, p: &MaterialParams<T>) -> T {
    p.mu * p.l_c * p.l_c * grad_theta.norm_sq()
}

/// `μ L_c χ ‖g‖_reg tr(R̄ᵀF)`.
pub fn interaction_density<T: Scalar>(
    f: &Mat2<T>,
    theta: T,
    grad_theta: &Vec2<T>,
    p: &MaterialParams<T>,
) -> T {
    if p.chi == T::zero() {
        return T::zero();
    }
    let tr = (rot2(theta).transpose() * *f).trace();
    p.mu * p.l_c * p.chi * regularized_norm(grad_theta, p.eps_reg) * tr
}

/// `μ_c ‖R̄ᵀ polar(F) − 1‖²`.
pub fn coupling_density<T: Scalar>(f: &Mat2<T>, theta: T, p: &MaterialParams<T>) -> Result<T> {
    let (r, _) = polar_rotation(f)?;
    Ok(p.mu_c * (rot2(theta).transpose() * r - Mat2::identity()).norm_sq())
}

/// Expanded form `4μ_c − 2μ_c tr(R̄ᵀ polar F)` of [`coupling_density`].
pub fn coupling_density_expanded<T: Scalar>(
    f: &Mat2<T>,
    theta: T,
    p: &MaterialParams<T>,
) -> Result<T> {
    let (r, _) = polar_rotation(f)?;
    Ok(T::lit(4.0) * p.mu_c - two::<T>() * p.mu_c * (rot2(theta).transpose() * r).trace())
}

/// `μ_c ‖skew(R̄ᵀF − 1)‖²`.
pub fn coupling2_density<T: Scalar>(f: &Mat2<T>, theta: T, p: &MaterialParams<T>) -> T {
    p.mu_c * (rot2(theta).transpose() * *f).skew().norm_sq()
}

/// Expanded form `μ_c/2 (tr(FᵀF) − tr(Ū²))` of [`coupling2_density`]; in two
/// dimensions the additive constant is zero.
pub fn coupling2_density_expanded<T: Scalar>(f: &Mat2<T>, theta: T, p: &MaterialParams<T>) -> T {
    let ub = rot2(theta).transpose() * *f;
    half::<T>() * p.mu_c * ((f.transpose() * *f).trace() - (ub * ub).trace())
}

/// Elastic energy of `F*` with `(μ*, λ*)` plus `μ_c* ‖skew(R̄ᵀF* − 1)‖²`.
pub fn chiral_elastic_density<T: Scalar>(fs: &Mat2<T>, theta: T, p: &MaterialParams<T>) -> T {
    let ub = rot2(theta).transpose() * *fs;
    elastic_like(&ub, p.mu_s, p.lambda_s) + p.mu_c_s * ub.skew().norm_sq()
}

/// `m₁ (sym Ū* − 1):(sym Ū − 1) + m₂ tr(Ū* − 1) tr(Ū − 1) + m₃ skew Ū*:skew Ū`.
pub fn mixing_density<T: Scalar>(f: &Mat2<T>, fs: &Mat2<T>, theta: T, p: &MaterialParams<T>) -> T {
    let rt = rot2(theta).transpose();
    let (ub, ubs) = (rt * *f, rt * *fs);
    let id = Mat2::identity();
    let two = two::<T>();
    p.m1 * (ubs.sym() - id).frobenius(&(ub.sym() - id))
        + p.m2 * (ubs.trace() - two) * (ub.trace() - two)
        + p.m3 * ubs.skew().frobenius(&ub.skew())
}

/// Density of one term at a point.
pub fn term_density<T: Scalar>(
    term: Term,
    k: &Kinematics<T>,
    p: &MaterialParams<T>,
    coupling: CouplingKind,
) -> Result<T> {
    Ok(match term {
        Term::Elastic => elastic_density(&k.f, k.theta, p),
        Term::Curvature => curvature_density(&k.grad_theta, p),
        Term::Interaction => interaction_density(&k.f, k.theta, &k.grad_theta, p),
        Term::Coupling => match coupling {
            CouplingKind::Polar => coupling_density(&k.f, k.theta, p)?,
            CouplingKind::Skew => coupling2_density(&k.f, k.theta, p),
        },
        Term::ChiralElastic => chiral_elastic_density(&k.f_star, k.theta, p),
        Term::Mixing => mixing_density(&k.f, &k.f_star, k.theta, p),
    })
}

/// Conjugates of one term at a point.
pub fn term_conjugates<T: Scalar>(
    term: Term,
    k: &Kinematics<T>,
    p: &MaterialParams<T>,
    coupling: CouplingKind,
) -> Result<Conjugates<T>> {
    let rbar = rot2(k.theta);
    let rt = rbar.transpose();
    let id = Mat2::identity();
    let two = two::<T>();
    Ok(match term {
        Term::Elastic => {
            let ub = rt * k.f;
            let w_u = (ub.sym() - id).scale(two * p.mu) + id.scale(p.lambda * (ub.trace() - two));
            Conjugates::from_ubar(&rbar, &k.f, &w_u)
        }
        Term::Curvature => Conjugates {
            g: k.grad_theta.scale(two * p.mu * p.l_c * p.l_c),
            ..Conjugates::zero()
        },
        Term::Interaction => {
            if p.chi == T::zero() {
                return Ok(Conjugates::zero());
            }
            let c = p.mu * p.l_c * p.chi;
            let n = regularized_norm(&k.grad_theta, p.eps_reg);
            let mut out = Conjugates::from_ubar(&rbar, &k.f, &id.scale(c * n));
            let denom = (k.grad_theta.norm_sq() + p.eps_reg * p.eps_reg).sqrt();
            if denom > T::zero() {
                let tr = (rt * k.f).trace();
                out.g = k.grad_theta.scale(c * tr / denom);
            }
            out
        }
        Term::Coupling => match coupling {
            CouplingKind::Polar => {
                let (r, tr_u) = polar_rotation(&k.f)?;
                Conjugates {
                    p: (rbar - r * rt * r).scale(-two * p.mu_c / tr_u),
                    q: r.scale(-two * p.mu_c),
                    ..Conjugates::zero()
                }
            }
            CouplingKind::Skew => {
                let w_u = (rt * k.f).skew().scale(two * p.mu_c);
                Conjugates::from_ubar(&rbar, &k.f, &w_u)
            }
        },
        Term::ChiralElastic => {
            let ubs = rt * k.f_star;
            let w_us = (ubs.sym() - id).scale(two * p.mu_s)
                + id.scale(p.lambda_s * (ubs.trace() - two))
                + ubs.skew().scale(two * p.mu_c_s);
            Conjugates::from_ubar_star(&rbar, &k.f_star, &w_us)
        }
        Term::Mixing => {
            let (ub, ubs) = (rt * k.f, rt * k.f_star);
            let (a, b) = (ubs.trace(), ub.trace());
            let w_u =
                (ubs.sym() - id).scale(p.m1) + id.scale(p.m2 * (a - two)) + ubs.skew().scale(p.m3);
            let w_us =
                (ub.sym() - id).scale(p.m1) + id.scale(p.m2 * (b - two)) + ub.skew().scale(p.m3);
            Conjugates::from_ubar(&rbar, &k.f, &w_u)
                .add(&Conjugates::from_ubar_star(&rbar, &k.f_star, &w_us))
        }
    })
}

/// Per-term totals of the discrete energy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub elastic: f64,
    pub curvature: f64,
    pub interaction: f64,
    pub coupling: f64,
    pub chiral_elastic: f64,
    pub mixing: f64,
    pub kinetic_translational: f64,
    pub kinetic_rotational: f64,
}

impl EnergyBreakdown {
    pub const CSV_HEADER: &'static str =
        "elastic,curvature,interaction,coupling,chiral_elastic,mixing,kin_trans,kin_rot,total";

    pub fn potential(&self) -> f64 {
        self.elastic
            + self.curvature
            + self.interaction
            + self.coupling
            + self.chiral_elastic
            + self.mixing
    }

    pub fn kinetic(&self) -> f64 {
        self.kinetic_translational + self.kinetic_rotational
    }

    pub fn total(&self) -> f64 {
        self.potential() + self.kinetic()
    }

    pub fn term(&self, t: Term) -> f64 {
        match t {
            Term::Elastic => self.elastic,
            Term::Curvature => self.curvature,
            Term::Interaction => self.interaction,
            Term::Coupling => self.coupling,
            Term::ChiralElastic => self.chiral_elastic,
            Term::Mixing => self.mixing,
        }
    }

    fn term_mut(&mut self, t: Term) -> &mut f64 {
        match t {
            Term::Elastic => &mut self.elastic,
            Term::Curvature => &mut self.curvature,
            Term::Interaction => &mut self.interaction,
            Term::Coupling => &mut self.coupling,
            Term::ChiralElastic => &mut self.chiral_elastic,
            Term::Mixing => &mut self.mixing,
        }
    }

    /// CSV row matching [`EnergyBreakdown::CSV_HEADER`], 17 significant digits.
    pub fn csv_row(&self) -> String {
        [
            self.elastic,
            self.curvature,
            self.interaction,
            self.coupling,
            self.chiral_elastic,
            self.mixing,
            self.kinetic_translational,
            self.kinetic_rotational,
            self.total(),
        ]
        .iter()
        .map(|v| format!("{v:.16e}"))
        .collect::<Vec<_>>()
        .join(",")
    }
}

/// Nodal kinematics of a state.
pub fn state_kinematics(state: &FieldState) -> Vec<Kinematics<f64>> {
    let (f, fs) = deformation_gradients(state);
    let g = grad_scalar(&state.theta);
    (0..state.grid().len())
        .map(|k| Kinematics {
            f: f.data()[k],
            f_star: fs.data()[k],
            theta: state.theta.data()[k],
            grad_theta: g.data()[k],
        })
        .collect()
}

/// Nodal densities of one term.
pub fn term_density_field(
    state: &FieldState,
    p: &MaterialParams<f64>,
    coupling: CouplingKind,
    term: Term,
) -> Result<ScalarField> {
    let data = state_kinematics(state)
        .iter()
        .map(|k| term_density(term, k, p, coupling))
        .collect::<Result<Vec<_>>>()?;
    ScalarField::from_vec(*state.grid(), data)
}

/// Discrete totals: nodal densities summed and multiplied by the cell area.
/// Kinetic parts are `ρ/2 ‖u̇‖²` and `ρ_rot ϑ̇²`.
pub fn total_energy(
    state: &FieldState,
    p: &MaterialParams<f64>,
    sel: ModelSelector,
) -> Result<EnergyBreakdown> {
    let kin = state_kinematics(state);
    let area = state.grid().cell_area();
    let coupling = sel.coupling();
    let mut out = EnergyBreakdown::default();
    for &term in sel.terms() {
        let mut acc = 0.0;
        for k in &kin {
            acc += term_density(term, k, p, coupling)?;
        }
        *out.term_mut(term) = acc * area;
    }
    out.kinetic_translational = 0.5
        * p.rho
        * state
            .v1
            .zip_map(&state.v2, |a, b| a * a + b * b)
            .integrate(|v| v);
    out.kinetic_rotational = p.rho_rot * state.omega.integrate(|w| w * w);
    Ok(out)
}

/// Conjugate fields summed over `terms`.
pub fn conjugate_fields(
    state: &FieldState,
    p: &MaterialParams<f64>,
    coupling: CouplingKind,
    terms: &[Term],
) -> Result<(Mat2Field, Mat2Field, Mat2Field, Vec2Field)> {
    let grid = *state.grid();
    let kin = state_kinematics(state);
    let mut conj = Vec::with_capacity(kin.len());
    for k in &kin {
        let mut c = Conjugates::zero();
        for &t in terms {
            c = c.add(&term_conjugates(t, k, p, coupling)?);
        }
        conj.push(c);
    }
    let pf = Mat2Field::from_vec(grid, conj.iter().map(|c| c.p).collect())?;
    let psf = Mat2Field::from_vec(grid, conj.iter().map(|c| c.p_star).collect())?;
    let qf = Mat2Field::from_vec(grid, conj.iter().map(|c| c.q).collect())?;
    let gf = Vec2Field::from_vec(grid, conj.iter().map(|c| c.g).collect())?;
    Ok((pf, psf, qf, gf))
}

/// L²-gradients `(δV/δu, δV/δϑ)` of the discrete potential restricted to `terms`.
pub fn variations_for_terms(
    state: &FieldState,
    p: &MaterialParams<f64>,
    coupling: CouplingKind,
    terms: &[Term],
) -> Result<(Vec2Field, ScalarField)> {
    let (pf, psf, qf, gf) = conjugate_fields(state, p, coupling, terms)?;
    let eps_t = Mat2::<f64>::levi_civita().transpose();
    let du = div_matrix(&pf).zip_map(&div_matrix(&psf), |a, b| -(a + eps_t.mul_vec(&b)));
    let eps = Mat2::<f64>::levi_civita();
    let local = qf.zip_map(&state.theta, |q, th| -q.frobenius(&(eps * rot2(th))));
    let dth = local.zip_map(&div_vec(&gf), |a, b| a - b);
    Ok((du, dth))
}

/// L²-gradients of the full discrete potential of the selected model.
pub fn analytic_variations(
    state: &FieldState,
    p: &MaterialParams<f64>,
    sel: ModelSelector,
) -> Result<(Vec2Field, ScalarField)> {
    variations_for_terms(state, p, sel.coupling(), sel.terms())
}

/// Which nodal unknown a finite-difference probe perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unknown {
    U1,
    U2,
    Theta,
}

/// Central difference of the discrete energy of `term` with respect to one
/// nodal unknown, divided by the cell area so that it approximates the
/// L²-gradient (the area factor of the quadrature cancels and is omitted).
///
/// The energy difference is accumulated node by node; nodes outside the
/// stencil of the perturbed unknown contribute exactly zero.
pub fn fd_term_gradient(
    state: &FieldState,
    p: &MaterialParams<f64>,
    coupling: CouplingKind,
    term: Term,
    node: usize,
    unknown: Unknown,
    step: f64,
) -> Result<f64> {
    let perturbed = |s: f64| {
        let mut st = state.clone();
        let field = match unknown {
            Unknown::U1 => &mut st.u1,
            Unknown::U2 => &mut st.u2,
            Unknown::Theta => &mut st.theta,
        };
        field.data_mut()[node] += s;
        term_density_field(&st, p, coupling, term)
    };
    let wp = perturbed(step)?;
    let wm = perturbed(-step)?;
    let diff: f64 = wp.data().iter().zip(wm.data()).map(|(a, b)| a - b).sum();
    Ok(diff / (2.0 * step))
}

/// Settings of the finite-difference gradient oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdCheckOptions {
    pub nodes: usize,
    pub step: f64,
    pub tolerance: f64,
    pub seed: u64,
}

impl Default for FdCheckOptions {
    fn default() -> Self {
        Self {
            nodes: 50,
            step: 1e-6,
            tolerance: 1e-6,
            seed: 2024,
        }
    }
}

/// Compares the analytic variation of every active term against central
/// differences of its discrete energy at randomly chosen nodes.
///
/// The error of each term is `max |fd − analytic| / max |analytic|`, the
/// maximum taken separately for the displacement and rotation unknowns and
/// the larger of the two reported. Terms whose analytic gradient vanishes
/// identically are compared in absolute terms.
pub fn fd_gradient_check(
    state: &FieldState,
    p: &MaterialParams<f64>,
    sel: ModelSelector,
    opts: &FdCheckOptions,
) -> Result<VerificationReport> {
    let mut report = VerificationReport::new();
    let coupling = sel.coupling();
    let g = grad_scalar(&state.theta);
    let kink = p.eps_reg == 0.0 && g.data().iter().any(|v| v.norm_sq() == 0.0);
    for &term in sel.terms() {
        let name = format!("fd_gradient_{}", term.name());
        if term == Term::Interaction && p.chi != 0.0 && kink {
            report.skip(
                name,
                opts.tolerance,
                "curvature norm is not differentiable where grad theta = 0 and eps_reg = 0",
            );
            continue;
        }
        let (du, dth) = variations_for_terms(state, p, coupling, &[term])?;
        let scale_u = du.max_abs();
        let scale_t = dth.max_abs();
        let mut rng = SampleRng::new(opts.seed);
        let (mut err_u, mut err_t) = (0.0_f64, 0.0_f64);
        for _ in 0..opts.nodes {
            let node = rng.index(state.grid().len());
            for unknown in [Unknown::U1, Unknown::U2, Unknown::Theta] {
                let fd = fd_term_gradient(state, p, coupling, term, node, unknown, opts.step)?;
                let an = match unknown {
                    Unknown::U1 => du.data()[node].x,
                    Unknown::U2 => du.data()[node].y,
                    Unknown::Theta => dth.data()[node],
                };
                let e = (fd - an).abs();
                match unknown {
                    Unknown::Theta => err_t = err_t.max(e),
                    _ => err_u = err_u.max(e),
                }
            }
        }
        let rel = |e: f64, s: f64| if s > 0.0 { e / s } else { e };
        report.record(
            name,
            rel(err_u, scale_u).max(rel(err_t, scale_t)),
            opts.tolerance,
        );
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::Grid;
    use proptest::prelude::*;

    type M = Mat2<f64>;

    fn params() -> MaterialParams<f64> {
        MaterialParams {
            mu: 1.3,
            lambda: 0.7,
            mu_c: 0.4,
            l_c: 0.3,
            chi: 0.2,
            rho: 1.1,
            rho_rot: 0.05,
            mu_s: 0.3,
            lambda_s: -0.2,
            mu_c_s: 0.15,
            m1: 0.25,
            m2: -0.1,
            m3: 0.05,
            mu_c1: 0.0,
            eps_reg: 1e-8,
        }
    }

    fn random_mat(rng: &mut SampleRng, s: f64) -> M {
        M::new(
            1.0 + rng.uniform(-s, s),
            rng.uniform(-s, s),
            rng.uniform(-s, s),
            1.0 + rng.uniform(-s, s),
        )
    }

    fn random_kin(rng: &mut SampleRng) -> Kinematics<f64> {
        let th = rng.uniform(-3.0, 3.0);
        Kinematics {
            f: rot2(th + rng.uniform(-0.3, 0.3)) * random_mat(rng, 0.3),
            f_star: rot2(th) * random_mat(rng, 0.3),
            theta: th,
            grad_theta: Vec2::new(rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)),
        }
    }

    #[test]
    fn elastic_reference_cases() {
        let p = params();
        assert_eq!(elastic_density(&M::identity(), 0.0, &p), 0.0);
        let mut rng = SampleRng::new(1);
        for _ in 0..50 {
            let t = rng.uniform(-4.0, 4.0);
            assert!(elastic_density(&rot2(t), t, &p).abs() < 1e-28);
        }
    }

    #[test]
    fn elastic_forms_agree() {
        let p = params();
        let mut rng = SampleRng::new(2);
        for _ in 0..1000 {
            let f = M::from_fn(|_, _| rng.uniform(-2.0, 2.0));
            let t = rng.uniform(-4.0, 4.0);
            let a = elastic_density(&f, t, &p);
            let b = elastic_density_expanded(&f, t, &p);
            assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "{a} {b}");
        }
    }

    #[test]
    fn curvature_reference_cases() {
        let mut p = params();
        assert_eq!(curvature_density(&Vec2::zero(), &p), 0.0);
        p.mu = 1.0;
        p.l_c = 0.5;
        assert_eq!(curvature_density(&Vec2::new(1.0, 2.0), &p), 1.25);
    }

    #[test]
    fn interaction_reference_cases() {
        let mut p = params();
        p.chi = 0.0;
        assert_eq!(
            interaction_density(&M::identity(), 0.3, &Vec2::new(1.0, 1.0), &p),
            0.0
        );
        p.chi = 1.0;
        p.eps_reg = 0.0;
        assert_eq!(
            interaction_density(&M::identity(), 0.3, &Vec2::zero(), &p),
            0.0
        );
        p.mu = 1.0;
        p.l_c = 1.0;
        assert_eq!(
            interaction_density(&M::identity(), 0.0, &Vec2::new(3.0, 4.0), &p),
            10.0
        );
        p.eps_reg = 1e-8;
        assert_eq!(
            interaction_density(&M::identity(), 0.0, &Vec2::zero(), &p),
            0.0
        );
    }

    #[test]
    fn coupling_reference_cases() {
        let p = params();
        assert_eq!(coupling_density(&M::identity(), 0.0, &p).unwrap(), 0.0);
        let mut rng = SampleRng::new(3);
        for _ in 0..20 {
            let t = rng.uniform(-3.0, 3.0);
            assert!(coupling_density(&rot2(t), t, &p).unwrap() < 1e-28);
        }
        let pi = std::f64::consts::PI;
        let direct = p.mu_c * (rot2(pi).transpose() - M::identity()).norm_sq();
        let v = coupling_density(&M::identity(), pi, &p).unwrap();
        assert!((v - 8.0 * p.mu_c).abs() < 1e-14 && (v - direct).abs() < 1e-14);
        assert!(coupling_density(&M::new(1.0, 0.0, 0.0, -1.0), 0.0, &p).is_err());
    }

    #[test]
    fn coupling_forms_agree() {
        let p = params();
        let mut rng = SampleRng::new(4);
        for _ in 0..200 {
            let k = random_kin(&mut rng);
            let a = coupling_density(&k.f, k.theta, &p).unwrap();
            let b = coupling_density_expanded(&k.f, k.theta, &p).unwrap();
            assert!((a - b).abs() < 1e-13);
            let a = coupling2_density(&k.f, k.theta, &p);
            let b = coupling2_density_expanded(&k.f, k.theta, &p);
            assert!((a - b).abs() < 1e-13, "{a} {b}");
        }
    }

    #[test]
    fn skew_coupling_cases() {
        let p = params();
        let s = M::new(1.2, 0.3, 0.3, 0.8);
        let t = 0.7;
        assert!(coupling2_density(&(rot2(t) * s), t, &p).abs() < 1e-28);
        for th in [1e-2, 3e-3, 1e-3] {
            let c2 = coupling2_density(&M::identity(), th, &p);
            assert!((c2 - 2.0 * p.mu_c * th.sin().powi(2)).abs() < 1e-16);
            let c1 = coupling_density(&M::identity(), th, &p).unwrap();
            assert!((c1 - c2).abs() < p.mu_c * th.powi(4), "{th}: {c1} {c2}");
        }
    }

    #[test]
    fn chiral_elastic_cases() {
        let mut p = params();
        assert_eq!(chiral_elastic_density(&M::identity(), 0.0, &p), 0.0);
        let mut rng = SampleRng::new(5);
        for _ in 0..100 {
            let k = random_kin(&mut rng);
            let direct = chiral_elastic_density(&k.f_star, k.theta, &p);
            let starred = MaterialParams {
                mu: p.mu_s,
                lambda: p.lambda_s,
                mu_c: p.mu_c_s,
                ..p
            };
            let composed = elastic_density(&k.f_star, k.theta, &starred)
                + coupling2_density(&k.f_star, k.theta, &starred);
            assert!((direct - composed).abs() < 1e-13);
        }
        p.mu_s = 0.0;
        p.lambda_s = 0.0;
        p.mu_c_s = 0.0;
        let k = random_kin(&mut rng);
        assert_eq!(chiral_elastic_density(&k.f_star, k.theta, &p), 0.0);
    }

    #[test]
    fn mixing_cases() {
        let mut p = params();
        assert_eq!(mixing_density(&M::identity(), &M::identity(), 0.0, &p), 0.0);
        let mut rng = SampleRng::new(6);
        let mut q = p;
        q.m3 = 0.0;
        for _ in 0..100 {
            let k = random_kin(&mut rng);
            let a = mixing_density(&k.f, &k.f_star, k.theta, &q);
            let b = mixing_density(&k.f_star, &k.f, k.theta, &q);
            assert!((a - b).abs() < 1e-13);
        }
        p.m1 = 0.0;
        p.m2 = 0.0;
        p.m3 = 0.0;
        let k = random_kin(&mut rng);
        assert_eq!(mixing_density(&k.f, &k.f_star, k.theta, &p), 0.0);
    }

    #[test]
    fn conjugates_match_pointwise_finite_differences() {
        let p = params();
        let mut rng = SampleRng::new(7);
        let h = 1e-6;
        for _ in 0..50 {
            let k = random_kin(&mut rng);
            for coupling in [CouplingKind::Polar, CouplingKind::Skew] {
                for term in Term::ALL {
                    let c = term_conjugates(term, &k, &p, coupling).unwrap();
                    let w = |kk: &Kinematics<f64>| term_density(term, kk, &p, coupling).unwrap();
                    let scale = 1.0 + c.p.max_abs() + c.p_star.max_abs() + c.q.max_abs();
                    for a in 0..2 {
                        for b in 0..2 {
                            let mut e = M::zero();
                            e.m[a][b] = h;
                            let fd_f = (w(&Kinematics { f: k.f + e, ..k })
                                - w(&Kinematics { f: k.f - e, ..k }))
                                / (2.0 * h);
                            let fd_s = (w(&Kinematics {
                                f_star: k.f_star + e,
                                ..k
                            }) - w(&Kinematics {
                                f_star: k.f_star - e,
                                ..k
                            })) / (2.0 * h);
                            assert!((fd_f - c.p.m[a][b]).abs() < 1e-7 * scale, "{term:?} P");
                            assert!(
                                (fd_s - c.p_star.m[a][b]).abs() < 1e-7 * scale,
                                "{term:?} P*"
                            );
                        }
                    }
                    // Q through the angle: dW/dϑ|_(F, g) = Q:(−εR̄).
                    let fd_t = (w(&Kinematics {
                        theta: k.theta + h,
                        ..k
                    }) - w(&Kinematics {
                        theta: k.theta - h,
                        ..k
                    })) / (2.0 * h);
                    let an_t = -c.q.frobenius(&(M::levi_civita() * rot2(k.theta)));
                    assert!((fd_t - an_t).abs() < 1e-7 * scale, "{term:?} Q");
                    for a in 0..2 {
                        let mut d = Vec2::zero();
                        if a == 0 {
                            d.x = h
                        } else {
                            d.y = h
                        }
                        let fd_g = (w(&Kinematics {
                            grad_theta: k.grad_theta + d,
                            ..k
                        }) - w(&Kinematics {
                            grad_theta: k.grad_theta - d,
                            ..k
                        })) / (2.0 * h);
                        let an_g = if a == 0 { c.g.x } else { c.g.y };
                        assert!((fd_g - an_g).abs() < 1e-7 * scale, "{term:?} G");
                    }
                }
            }
        }
    }

    #[test]
    fn rotational_kinetic_alternative_is_twice() {
        let mut rng = SampleRng::new(8);
        for _ in 0..100 {
            let (t, w) = (rng.uniform(-5.0, 5.0), rng.uniform(-3.0, 3.0));
            let rdot = M::levi_civita() * rot2(t) * (-w);
            assert!(((rdot.transpose() * rdot).trace() - 2.0 * w * w).abs() < 1e-12);
        }
    }

    #[test]
    fn total_energy_simple_states() {
        let g = Grid::new(8, 8, 2.0, 0.5).unwrap();
        let p = params();
        let sel = ModelSelector::NonChiral {
            coupling: CouplingKind::Polar,
        };
        let zero = total_energy(&FieldState::zeros(g), &p, sel).unwrap();
        assert_eq!(zero.total(), 0.0);
        let mut st = FieldState::zeros(g);
        st.omega = ScalarField::from_fn(g, |_, _| 1.5);
        let e = total_energy(&st, &p, sel).unwrap();
        assert!((e.kinetic_rotational - p.rho_rot * 2.25 * 1.0).abs() < 1e-15);
        assert_eq!(e.potential(), 0.0);
    }

    #[test]
    fn zero_state_is_critical() {
        let g = Grid::new(8, 8, 1.0, 1.0).unwrap();
        let p = params();
        for sel in [
            ModelSelector::NonChiral {
                coupling: CouplingKind::Polar,
            },
            ModelSelector::NonChiral {
                coupling: CouplingKind::Skew,
            },
            ModelSelector::Chiral,
        ] {
            let (du, dt) = analytic_variations(&FieldState::zeros(g), &p, sel).unwrap();
            assert!(du.max_abs() < 1e-15 && dt.max_abs() < 1e-15, "{sel:?}");
        }
    }

    #[test]
    fn interaction_gradient_vanishes_where_trace_and_curvature_vanish() {
        let mut p = params();
        p.eps_reg = 0.0;
        let k = Kinematics {
            f: M::new(0.0, 1.0, -1.0, 0.0),
            f_star: M::identity(),
            theta: 0.0,
            grad_theta: Vec2::zero(),
        };
        let c = term_conjugates(Term::Interaction, &k, &p, CouplingKind::Polar).unwrap();
        assert_eq!(c, Conjugates::zero());
    }

    #[test]
    fn params_validation_and_serde() {
        let p = MaterialParams::<f64>::default();
        assert!(p.validate().is_ok());
        assert!(MaterialParams { mu: 0.0, ..p }.validate().is_err());
        assert!(MaterialParams { rho_rot: -1.0, ..p }.validate().is_err());
        let json = serde_json::to_string(&p).unwrap();
        assert!(!json.contains("eps_reg"));
        let back: MaterialParams<f64> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        let minimal: MaterialParams<f64> =
            serde_json::from_str(r#"{"mu":1,"lambda":2,"rho":1,"rho_rot":0.1}"#).unwrap();
        assert_eq!((minimal.mu_c, minimal.eps_reg), (0.0, 1e-8));
        assert!(serde_json::from_str::<MaterialParams<f64>>(
            r#"{"mu":1,"lambda":2,"rho":1,"rho_rot":0.1,"bogus":1}"#
        )
        .is_err());
    }

    proptest! {
        #[test]
        fn densities_are_non_negative(
            a in proptest::array::uniform4(-2.0f64..2.0),
            t in -4.0f64..4.0,
            gx in -3.0f64..3.0, gy in -3.0f64..3.0,
        ) {
            let p = MaterialParams { lambda_s: 0.2, ..params() };
            let f = M::new(a[0], a[1], a[2], a[3]);
            prop_assert!(elastic_density(&f, t, &p) >= 0.0);
            prop_assert!(curvature_density(&Vec2::new(gx, gy), &p) >= 0.0);
            prop_assert!(coupling2_density(&f, t, &p) >= 0.0);
            prop_assert!(chiral_elastic_density(&f, t, &p) >= 0.0);
            if f.det() > 1e-3 {
                prop_assert!(coupling_density(&f, t, &p).unwrap() >= 0.0);
            }
        }

        #[test]
        fn non_chiral_densities_are_frame_indifferent(
            a in proptest::array::uniform4(-0.4f64..0.4),
            t in -4.0f64..4.0, alpha in -4.0f64..4.0,
            gx in -3.0f64..3.0, gy in -3.0f64..3.0,
        ) {
            let p = params();
            let f = M::new(1.0 + a[0], a[1], a[2], 1.0 + a[3]);
            let g = Vec2::new(gx, gy);
            let rf = rot2(alpha) * f;
            let ta = t + alpha;
            prop_assert!((elastic_density(&f, t, &p) - elastic_density(&rf, ta, &p)).abs() < 1e-13);
            prop_assert!((curvature_density(&g, &p) - curvature_density(&g, &p)).abs() == 0.0);
            prop_assert!((interaction_density(&f, t, &g, &p) - interaction_density(&rf, ta, &g, &p)).abs() < 1e-13);
            prop_assert!((coupling_density(&f, t, &p).unwrap() - coupling_density(&rf, ta, &p).unwrap()).abs() < 1e-13);
            prop_assert!((coupling2_density(&f, t, &p) - coupling2_density(&rf, ta, &p)).abs() < 1e-13);
        }
    }
}
