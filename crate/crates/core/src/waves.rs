//! Plane waves `(û, v̂, φ̂) e^{i(kx − ωt)}` of the linearised chiral model in the
//! chiral-lattice parametrisation (`μ* = −μ_c* = A`, `λ* = −2A`,
//! `m₁/2 + m₂ = −A`, `γ = 2d₁`).
//!
//! The wave matrix
//!
//! ```text
//! | k²(λ+2μ) − ρω²     −Ak²               2iAk               |
//! | −Ak²               k²(μ_c+μ) − ρω²    −2ikμ_c            |
//! | −2iAk              2ikμ_c             γk² + 4μ_c + 4A − ϱω² |
//! ```
//!
//! is Hermitian. Writing `φ̂ = iψ` turns it into the real symmetric pencil
//! `S(ω²) = S₀ − ω² diag(ρ, ρ, ϱ)` with the same determinant, so the squared
//! frequencies are the three real roots of a cubic.
//!
//! The amplitude `φ̂` of this matrix carries the opposite sign of the rotation
//! amplitude obtained by substituting the wave directly into the linearised
//! equations; the physical rotation is `φ = −Re(φ̂ e^{i(kx−ωt)})`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dynamics::LinearChiralParams;
use crate::energy::MaterialParams;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub mu_c: f64,
    pub rho: f64,
    pub varrho_rot: f64,
}

impl WaveParams {
    /// `γ = 2μL_c²`, `ϱ = 4ρ_rot`; the chiral modulus is `A = μ*`.
    pub fn from_material(p: &MaterialParams<f64>) -> Self {
        Self {
            a: p.mu_s,
            gamma: 2.0 * p.mu * p.l_c * p.l_c,
            mu: p.mu,
            lambda: p.lambda,
            mu_c: p.mu_c,
            rho: p.rho,
            varrho_rot: 4.0 * p.rho_rot,
        }
    }

    /// Material constants realising these wave parameters through the
    /// chiral-lattice identification (`m₁ = 0`, `m₂ = −A`). Requires `μ > 0`.
    pub fn to_material(&self) -> MaterialParams<f64> {
        MaterialParams {
            mu: self.mu,
            lambda: self.lambda,
            mu_c: self.mu_c,
            l_c: (self.gamma / (2.0 * self.mu)).sqrt(),
            chi: 0.0,
            rho: self.rho,
            rho_rot: self.varrho_rot / 4.0,
            mu_s: self.a,
            lambda_s: -2.0 * self.a,
            mu_c_s: -self.a,
            m1: 0.0,
            m2: -self.a,
            m3: 0.0,
            ..MaterialParams::default()
        }
    }

    pub fn linear_params(&self) -> LinearChiralParams {
        LinearChiralParams::liu(
            self.rho,
            self.varrho_rot,
            self.gamma,
            self.lambda,
            self.mu,
            self.mu_c,
            self.a,
        )
    }

    fn mass(&self) -> [f64; 3] {
        [self.rho, self.rho, self.varrho_rot]
    }
}

pub type CMat3 = [[Complex64; 3]; 3];

/// The Hermitian wave matrix.
pub fn wave_matrix(k: f64, omega: f64, wp: &WaveParams) -> CMat3 {
    let s = real_pencil(k, omega * omega, wp);
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    [
        [re(s[0][0]), re(s[0][1]), im(-s[0][2])],
        [re(s[1][0]), re(s[1][1]), im(-s[1][2])],
        [im(s[2][0]), im(s[2][1]), re(s[2][2])],
    ]
}

/// Real symmetric matrix `S(s)` with `s = ω²`; `P·(x, y, iz) = (S·(x, y, z))` up
/// to a factor `i` in the last row.
pub fn real_pencil(k: f64, s: f64, wp: &WaveParams) -> [[f64; 3]; 3] {
    let k2 = k * k;
    let a = k2 * (wp.lambda + 2.0 * wp.mu) - wp.rho * s;
    let b = k2 * (wp.mu_c + wp.mu) - wp.rho * s;
    let c = wp.gamma * k2 + 4.0 * wp.mu_c + 4.0 * wp.a - wp.varrho_rot * s;
    let off12 = -wp.a * k2;
    let off13 = -2.0 * wp.a * k;
    let off23 = 2.0 * k * wp.mu_c;
    [[a, off12, off13], [off12, b, off23], [off13, off23, c]]
}

fn det3_real(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Determinant of a complex 3×3 matrix by cofactor expansion.
pub fn det3(m: &CMat3) -> Complex64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

/// Coefficients `[c₀, c₁, c₂, c₃]` of `det S(s) = Σ cᵢ sⁱ`.
pub fn dispersion_cubic(k: f64, wp: &WaveParams) -> [f64; 4] {
    let a = real_pencil(k, 0.0, wp);
    let [d1, d2, d3] = wp.mass();
    let c3 = -d1 * d2 * d3;
    let c2 = a[0][0] * d2 * d3 + a[1][1] * d1 * d3 + a[2][2] * d1 * d2;
    let c1 = -(d1 * (a[1][1] * a[2][2] - a[1][2] * a[1][2])
        + d2 * (a[0][0] * a[2][2] - a[0][2] * a[0][2])
        + d3 * (a[0][0] * a[1][1] - a[0][1] * a[0][1]));
    let c0 = det3_real(&a);
    [c0, c1, c2, c3]
}

fn poly(c: &[f64; 4], s: f64) -> f64 {
    ((c[3] * s + c[2]) * s + c[1]) * s + c[0]
}

/// `Σ |cᵢ| |s|ⁱ`, the natural scale of rounding errors in `poly(c, s)`.
fn poly_scale(c: &[f64; 4], s: f64) -> f64 {
    let s = s.abs();
    ((c[3].abs() * s + c[2].abs()) * s + c[1].abs()) * s + c[0].abs()
}

fn bisect(c: &[f64; 4], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = poly(c, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = poly(c, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// All real roots of the cubic (with multiplicity), ascending.
///
/// The interval `[−B, B]` with `B` a Gershgorin bound of the symmetric
/// generalised eigenproblem is split at the critical points of the cubic and
/// each sign change is bisected. A critical point where the cubic vanishes to
/// rounding accuracy is a double root.
fn cubic_real_roots(c: &[f64; 4], bound: f64) -> Vec<f64> {
    let (lo, hi) = (-bound, bound);
    // p'(s) = 3c₃s² + 2c₂s + c₁
    let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
    let disc = qb * qb - 4.0 * qa * qc;
    let mut crit = Vec::new();
    if disc >= 0.0 {
        let sq = disc.sqrt();
        let q = -0.5 * (qb + qb.signum() * sq);
        let mut r = vec![];
        if q != 0.0 {
            r.push(q / qa);
            r.push(qc / q);
        } else {
            r.push(0.0);
            r.push(0.0);
        }
        r.sort_by(|a, b| a.partial_cmp(b).unwrap());
        crit = r.into_iter().filter(|s| *s > lo && *s < hi).collect();
    }
    let mut pts = vec![lo];
    pts.extend(&crit);
    pts.push(hi);
    let mut roots = Vec::new();
    for &cp in &crit {
        if poly(c, cp).abs() <= 1e-13 * poly_scale(c, cp) {
            roots.push(cp);
            roots.push(cp);
        }
    }
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (poly(c, a), poly(c, b));
        let near = |s: f64| {
            roots
                .iter()
                .any(|r| (r - s).abs() <= 1e-12 * (1.0 + s.abs()))
        };
        if fa == 0.0 && !near(a) {
            roots.push(a);
        } else if fa != 0.0 && fb != 0.0 && (fa > 0.0) != (fb > 0.0) && !near(a) && !near(b) {
            roots.push(bisect(c, a, b));
        }
    }
    let last = *pts.last().unwrap();
    if poly(c, last) == 0.0 && !roots.contains(&last) {
        roots.push(last);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots.truncate(3);
    roots
}

/// One dispersion branch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveBranch {
    pub k: f64,
    pub omega: f64,
    /// `(û, v̂, φ̂)` normalised to unit Euclidean length, `û, v̂` real and `φ̂`
    /// purely imaginary.
    pub amplitudes: [Complex64; 3],
}

impl WaveBranch {
    pub fn u_hat(&self) -> f64 {
        self.amplitudes[0].re
    }

    pub fn v_hat(&self) -> f64 {
        self.amplitudes[1].re
    }

    pub fn phi_hat_imag(&self) -> f64 {
        self.amplitudes[2].im
    }
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm3(a: &[f64; 3]) -> f64 {
    (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt()
}

fn normalized(a: [f64; 3]) -> [f64; 3] {
    let n = norm3(&a);
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Null vectors of a symmetric 3×3 matrix that is singular to rounding: one
/// vector when the rank is two, two orthonormal vectors when the rank is one.
fn null_vectors(m: &[[f64; 3]; 3]) -> Vec<[f64; 3]> {
    let scale = m.iter().flatten().fold(0.0_f64, |a, v| a.max(v.abs()));
    if scale == 0.0 {
        return vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
    }
    let pairs = [(0, 1), (0, 2), (1, 2)];
    let best = pairs
        .iter()
        .map(|&(i, j)| cross(&m[i], &m[j]))
        .max_by(|a, b| norm3(a).partial_cmp(&norm3(b)).unwrap())
        .unwrap();
    if norm3(&best) > 1e-8 * scale * scale {
        return vec![normalized(best)];
    }
    // Rank one: every null vector is orthogonal to the dominant row.
    let row = *m
        .iter()
        .max_by(|a, b| norm3(a).partial_cmp(&norm3(b)).unwrap())
        .unwrap();
    let r = normalized(row);
    let axis = (0..3)
        .min_by(|&i, &j| r[i].abs().partial_cmp(&r[j].abs()).unwrap())
        .unwrap();
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let v1 = normalized(cross(&r, &e));
    let v2 = normalized(cross(&r, &v1));
    vec![v1, v2]
}

/// All branches `ω ≥ 0` at wavenumber `k`.
pub fn dispersion_branches(k: f64, wp: &WaveParams) -> Result<Vec<WaveBranch>> {
    if !(k.is_finite() && k != 0.0) {
        return Err(Error::InvalidParams(format!(
            "wavenumber must be nonzero, got {k}"
        )));
    }
    let c = dispersion_cubic(k, wp);
    let s0 = real_pencil(k, 0.0, wp);
    let mass = wp.mass();
    let gersh = (0..3)
        .map(|i| {
            (0..3)
                .map(|j| s0[i][j].abs() / (mass[i] * mass[j]).sqrt())
                .sum::<f64>()
        })
        .fold(0.0, f64::max);
    let vmax = [
        vt(wp).unwrap_or(0.0),
        vl(wp).unwrap_or(0.0),
        (wp.gamma.abs() / wp.varrho_rot).sqrt(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    let bound = (2.0 * gersh).max((10.0 * k.abs() * vmax).powi(2)).max(1.0);
    let roots = cubic_real_roots(&c, bound);

    let mut branches = Vec::new();
    let mut i = 0;
    while i < roots.len() {
        let s = roots[i];
        let mult = roots[i..].iter().take_while(|r| **r == s).count();
        // Negative roots at rounding level are clamped to a static mode.
        if s < -1e-14 * bound {
            i += mult;
            continue;
        }
        let s = s.max(0.0);
        let omega = s.sqrt();
        let m = real_pencil(k, s, wp);
        let vecs = null_vectors(&m);
        for v in vecs.iter().take(mult).cycle().take(mult) {
            branches.push(WaveBranch {
                k,
                omega,
                amplitudes: [
                    Complex64::new(v[0], 0.0),
                    Complex64::new(v[1], 0.0),
                    Complex64::new(0.0, v[2]),
                ],
            });
        }
        i += mult;
    }
    if branches.is_empty() {
        return Err(Error::NoRealBranch { k });
    }
    Ok(branches)
}

/// `|det P| / Σ|cᵢ|ω²ⁱ`, the determinant residual relative to its rounding scale.
pub fn relative_determinant_residual(branch: &WaveBranch, wp: &WaveParams) -> f64 {
    let c = dispersion_cubic(branch.k, wp);
    let s = branch.omega * branch.omega;
    let d = det3(&wave_matrix(branch.k, branch.omega, wp));
    d.norm() / poly_scale(&c, s)
}

/// `‖P a‖ / (‖P‖_max ‖a‖)` for the branch amplitudes.
pub fn nullspace_residual(branch: &WaveBranch, wp: &WaveParams) -> f64 {
    let m = wave_matrix(branch.k, branch.omega, wp);
    let a = &branch.amplitudes;
    let scale = m.iter().flatten().fold(0.0_f64, |acc, z| acc.max(z.norm()));
    let an = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let r = (0..3)
        .map(|i| (0..3).map(|j| m[i][j] * a[j]).sum::<Complex64>().norm_sqr())
        .sum::<f64>()
        .sqrt();
    r / (scale * an)
}

/// `û/v̂ = A(k²μ − ρω²) / (A²k² − μ_c(k²(λ+2μ) − ρω²))`.
pub fn amplitude_ratio(k: f64, omega: f64, wp: &WaveParams) -> Result<f64> {
    if wp.a == 0.0 {
        return Ok(0.0);
    }
    let k2 = k * k;
    let w2 = omega * omega;
    let den = wp.a * wp.a * k2 - wp.mu_c * (k2 * (wp.lambda + 2.0 * wp.mu) - wp.rho * w2);
    if den == 0.0 {
        return Err(Error::ZeroDenominator("amplitude ratio"));
    }
    Ok(wp.a * (k2 * wp.mu - wp.rho * w2) / den)
}

/// `v = √[(r(μ_c(λ+2μ) − A²) + Aμ) / (ρ(μ_c r + A))]` for the amplitude ratio
/// `r = û/v̂`; infinite `r` gives [`vl`].
pub fn phase_velocity(ratio: f64, wp: &WaveParams) -> Result<f64> {
    if ratio.is_infinite() {
        return vl(wp);
    }
    let num = ratio * (wp.mu_c * (wp.lambda + 2.0 * wp.mu) - wp.a * wp.a) + wp.a * wp.mu;
    let den = wp.rho * (wp.mu_c * ratio + wp.a);
    if den == 0.0 {
        return Err(Error::ZeroDenominator("phase velocity"));
    }
    let rad = num / den;
    if rad < 0.0 {
        return Err(Error::ImaginarySpeed { radicand: rad });
    }
    Ok(rad.sqrt())
}

/// Transverse limit `√(μ/ρ)`.
pub fn vt(wp: &WaveParams) -> Result<f64> {
    let rad = wp.mu / wp.rho;
    if rad < 0.0 {
        return Err(Error::ImaginarySpeed { radicand: rad });
    }
    Ok(rad.sqrt())
}

/// Longitudinal limit `√((λ+2μ)/ρ − A²/(ρμ_c))`.
pub fn vl(wp: &WaveParams) -> Result<f64> {
    let chiral = if wp.a == 0.0 {
        0.0
    } else if wp.mu_c == 0.0 {
        return Err(Error::ZeroDenominator("longitudinal speed"));
    } else {
        wp.a * wp.a / (wp.rho * wp.mu_c)
    };
    let rad = (wp.lambda + 2.0 * wp.mu) / wp.rho - chiral;
    if rad < 0.0 {
        return Err(Error::ImaginarySpeed { radicand: rad });
    }
    Ok(rad.sqrt())
}

/// Samples of `v(r)`: `r = 0` first, then `samples` logarithmically spaced
/// magnitudes `|r|` in `[10⁻³, 10³]`, then `|r| = ∞`. The ratio carries the
/// sign of `A`, since `v(r; A) = v(−r; −A)`.
pub fn velocity_curve(wp: &WaveParams, samples: usize) -> Result<Vec<(f64, f64)>> {
    let sign = if wp.a < 0.0 { -1.0 } else { 1.0 };
    let mut out = vec![(0.0, vt(wp)?)];
    for i in 0..samples {
        let t = if samples > 1 {
            i as f64 / (samples - 1) as f64
        } else {
            0.0
        };
        let r = sign * 10f64.powf(-3.0 + 6.0 * t);
        out.push((r, phase_velocity(r, wp)?));
    }
    out.push((sign * f64::INFINITY, vl(wp)?));
    Ok(out)
}

/// Relations of the wave with `v = 0` and a quarter-period phase shift
/// between `u` and `φ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransverseFree {
    /// `û/φ̂ = −2μ_c/(Ak)`.
    pub u_over_phi: f64,
    /// `ρ = k²(μ_c(λ+2μ) − A²)/(μ_c ω²)`.
    pub rho_implied: f64,
    /// `ϱ = (γk² + 4A)/ω²`.
    pub varrho_implied: f64,
}

pub fn transverse_free_solution(k: f64, omega: f64, wp: &WaveParams) -> Result<TransverseFree> {
    if wp.a == 0.0 || k == 0.0 {
        return Err(Error::ZeroDenominator("A k"));
    }
    if wp.mu_c == 0.0 || omega == 0.0 {
        return Err(Error::ZeroDenominator("mu_c omega^2"));
    }
    let w2 = omega * omega;
    let rho = k * k * (wp.mu_c * (wp.lambda + 2.0 * wp.mu) - wp.a * wp.a) / (wp.mu_c * w2);
    let varrho = (wp.gamma * k * k + 4.0 * wp.a) / w2;
    if !(rho > 0.0 && varrho > 0.0) {
        return Err(Error::InfeasibleDensity {
            rho,
            varrho_rot: varrho,
        });
    }
    Ok(TransverseFree {
        u_over_phi: -2.0 * wp.mu_c / (wp.a * k),
        rho_implied: rho,
        varrho_implied: varrho,
    })
}

/// Substitutes `u = û cos ξ`, `v = 0`, `φ = −φ̂ sin ξ` (`ξ = kx − ωt`, `φ̂ = 1`)
/// with the implied densities into the pointwise linearised equations and
/// returns the largest residual relative to the largest inertial term, over
/// `samples` phases.
pub fn transverse_free_residual(
    k: f64,
    omega: f64,
    wp: &WaveParams,
    samples: usize,
) -> Result<f64> {
    use crate::dynamics::{linear_chiral_accel, LinearJet};
    let sol = transverse_free_solution(k, omega, wp)?;
    let params = WaveParams {
        rho: sol.rho_implied,
        varrho_rot: sol.varrho_implied,
        ..*wp
    };
    let lp = params.linear_params();
    let (uh, ph) = (sol.u_over_phi, 1.0);
    let w2 = omega * omega;
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..samples {
        let xi = std::f64::consts::TAU * i as f64 / samples as f64;
        let (s, c) = xi.sin_cos();
        let jet = LinearJet {
            u1x: -k * uh * s,
            u1xx: -k * k * uh * c,
            phi: -ph * s,
            phix: -k * ph * c,
            phixx: k * k * ph * s,
            ..LinearJet::default()
        };
        let acc = linear_chiral_accel(&jet, &lp);
        let exact = [-w2 * uh * c, 0.0, w2 * ph * s];
        for q in 0..3 {
            worst = worst.max((acc[q] - exact[q]).abs());
        }
        scale = scale.max(w2 * uh.abs()).max(w2 * ph);
    }
    Ok(worst / scale)
}
