//! Pointwise checks of the planar reductions of the three-dimensional
//! Cosserat curvature `R̄ᵀ Curl R̄` and of its behaviour under inversion.
//!
//! Fields are closed-form trigonometric expressions with analytic gradients,
//! so every identity is checked without discretisation error. The matrix curl
//! is taken row-wise, `(Curl M)ᵢⱼ = ε_jmn ∂ₘ M_in`.

use crate::algebra::Mat3;
use crate::report::VerificationReport;
use crate::rng::SampleRng;

type M3 = Mat3<f64>;

/// Tolerance of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Below this rotation magnitude the rotation formulas switch to series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// Value and gradient of a matrix field at a point; `grad[m] = ∂ₘ M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatJet3 {
    pub value: M3,
    pub grad: [M3; 3],
}

/// Smooth scalar field
/// `f(x) = c + ⟨g, x⟩ + Σ aₙ sin(⟨kₙ, x⟩ + pₙ)`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrigField3 {
    pub constant: f64,
    pub linear: [f64; 3],
    pub modes: Vec<TrigMode>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigMode {
    pub amplitude: f64,
    pub wave: [f64; 3],
    pub phase: f64,
}

fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

impl TrigField3 {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            ..Self::default()
        }
    }

    pub fn linear(c: f64, g: [f64; 3]) -> Self {
        Self {
            constant: c,
            linear: g,
            modes: Vec::new(),
        }
    }

    pub fn with_mode(mut self, amplitude: f64, wave: [f64; 3], phase: f64) -> Self {
        self.modes.push(TrigMode {
            amplitude,
            wave,
            phase,
        });
        self
    }

    /// Random field with `modes` modes of amplitude up to `amplitude`; `planar`
    /// removes the `z` dependence.
    pub fn random(rng: &mut SampleRng, amplitude: f64, modes: usize, planar: bool) -> Self {
        let mut f = Self::constant(rng.uniform(-amplitude, amplitude));
        for _ in 0..modes {
            let kz = if planar { 0.0 } else { rng.uniform(-2.0, 2.0) };
            f = f.with_mode(
                rng.uniform(-amplitude, amplitude),
                [rng.uniform(-2.0, 2.0), rng.uniform(-2.0, 2.0), kz],
                rng.uniform(0.0, std::f64::consts::TAU),
            );
        }
        f
    }

    pub fn value(&self, p: &[f64; 3]) -> f64 {
        self.constant
            + dot3(&self.linear, p)
            + self
                .modes
                .iter()
                .map(|m| m.amplitude * (dot3(&m.wave, p) + m.phase).sin())
                .sum::<f64>()
    }

    pub fn grad(&self, p: &[f64; 3]) -> [f64; 3] {
        let mut g = self.linear;
        for m in &self.modes {
            let c = m.amplitude * (dot3(&m.wave, p) + m.phase).cos();
            for (gi, ki) in g.iter_mut().zip(&m.wave) {
                *gi += c * ki;
            }
        }
        g
    }
}

/// `(Curl M)ᵢⱼ = ε_jmn ∂ₘ M_in` from the three partial derivatives of `M`.
pub fn curl3_matrix(grad: &[M3; 3]) -> M3 {
    M3::from_fn(|i, j| {
        let (m, n) = ((j + 1) % 3, (j + 2) % 3);
        grad[m].m[i][n] - grad[n].m[i][m]
    })
}

/// `R̄ᵀ Curl R̄`.
pub fn curvature(r: &MatJet3) -> M3 {
    r.value.transpose() * curl3_matrix(&r.grad)
}

/// Skew matrix `[a]×` with `[a]× b = a × b`.
pub fn skew3(a: &[f64; 3]) -> M3 {
    M3::from_rows([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
}

/// `sin ℓ / ℓ` and `(1 − cos ℓ)/ℓ²`.
fn rodrigues_coefficients(l: f64) -> (f64, f64) {
    if l < SERIES_THRESHOLD {
        let l2 = l * l;
        (1.0 - l2 / 6.0, 0.5 - l2 / 24.0)
    } else {
        (l.sin() / l, (1.0 - l.cos()) / (l * l))
    }
}

/// `f₁′(ℓ)/ℓ` and `f₂′(ℓ)/ℓ` for the coefficients above.
fn rodrigues_derivative_coefficients(l: f64) -> (f64, f64) {
    if l < 1e-2 {
        let l2 = l * l;
        (
            -1.0 / 3.0 + l2 / 30.0 - l2 * l2 / 840.0,
            -1.0 / 12.0 + l2 / 180.0 - l2 * l2 / 6720.0,
        )
    } else {
        let (s, c) = l.sin_cos();
        let l3 = l * l * l;
        ((l * c - s) / l3, (l * s - 2.0 * (1.0 - c)) / (l3 * l))
    }
}

/// Rotation `exp([a]×)` by the angle `|a|` about `a`.
pub fn rotation_from_vector(a: &[f64; 3]) -> M3 {
    let k = skew3(a);
    let (f1, f2) = rodrigues_coefficients(dot3(a, a).sqrt());
    M3::identity() + k.scale(f1) + (k * k).scale(f2)
}

/// `∂ exp([a]×)/∂aₖ` for `k = 0, 1, 2`.
pub fn rotation_vector_derivatives(a: &[f64; 3]) -> [M3; 3] {
    let k = skew3(a);
    let k2 = k * k;
    let l = dot3(a, a).sqrt();
    let (f1, f2) = rodrigues_coefficients(l);
    let (g1, g2) = rodrigues_derivative_coefficients(l);
    std::array::from_fn(|c| {
        let mut e = [0.0; 3];
        e[c] = 1.0;
        let ek = skew3(&e);
        (k.scale(g1) + k2.scale(g2)).scale(a[c]) + ek.scale(f1) + (ek * k + k * ek).scale(f2)
    })
}

/// Jet of `exp([a(x)]×)` from the value and gradients of the three components.
pub fn rotation_jet(a: &[f64; 3], grad_a: &[[f64; 3]; 3]) -> MatJet3 {
    let d = rotation_vector_derivatives(a);
    MatJet3 {
        value: rotation_from_vector(a),
        grad: std::array::from_fn(|m| {
            (0..3).fold(M3::zero(), |acc, c| acc + d[c].scale(grad_a[c][m]))
        }),
    }
}

/// Rotation of the second planar problem with `ℓ = √(α² + β²)`:
///
/// ```text
/// | α²/ℓ² + cos ℓ β²/ℓ²    (1 − cos ℓ)αβ/ℓ²       sin ℓ β/ℓ  |
/// | (1 − cos ℓ)αβ/ℓ²       cos ℓ α²/ℓ² + β²/ℓ²    −sin ℓ α/ℓ |
/// | −sin ℓ β/ℓ             sin ℓ α/ℓ              cos ℓ      |
/// ```
///
/// Below [`SERIES_THRESHOLD`] the equivalent form
/// `1 + (sin ℓ/ℓ)K + ((1 − cos ℓ)/ℓ²)K²`, `K = [(α, β, 0)]×`, is evaluated with
/// series coefficients.
pub fn second_problem_rotation(alpha: f64, beta: f64) -> M3 {
    let l = alpha.hypot(beta);
    if l < SERIES_THRESHOLD {
        return rotation_from_vector(&[alpha, beta, 0.0]);
    }
    let (s, c) = l.sin_cos();
    let l2 = l * l;
    M3::from_rows([
        [
            alpha * alpha / l2 + c * beta * beta / l2,
            (1.0 - c) * alpha * beta / l2,
            s * beta / l,
        ],
        [
            (1.0 - c) * alpha * beta / l2,
            c * alpha * alpha / l2 + beta * beta / l2,
            -s * alpha / l,
        ],
        [-s * beta / l, s * alpha / l, c],
    ])
}

/// Fields of both planar problems sampled at points of the plane.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanarSample3D {
    pub points: Vec<[f64; 2]>,
    pub phi1: TrigField3,
    pub phi2: TrigField3,
    /// Rotation angle about `z` of the first problem.
    pub angle: TrigField3,
    /// Out-of-plane deformation `φ₃` of the second problem.
    pub phi3: TrigField3,
    pub alpha: TrigField3,
    pub beta: TrigField3,
}

impl PlanarSample3D {
    /// `φ₁ = x + 0.1 sin y`, `φ₂ = y`, `φ = 0.2 cos x`, `φ₃ = z + 0.1 sin(x − y)`
    /// and moderate rotations `α`, `β`, at `n` random points of `[−π, π]²`.
    pub fn reference(seed: u64, n: usize) -> Self {
        let mut rng = SampleRng::new(seed);
        let points = random_points(&mut rng, n);
        let half_pi = std::f64::consts::FRAC_PI_2;
        Self {
            points,
            phi1: TrigField3::linear(0.0, [1.0, 0.0, 0.0]).with_mode(0.1, [0.0, 1.0, 0.0], 0.0),
            phi2: TrigField3::linear(0.0, [0.0, 1.0, 0.0]),
            angle: TrigField3::constant(0.0).with_mode(0.2, [1.0, 0.0, 0.0], half_pi),
            phi3: TrigField3::constant(0.0).with_mode(0.1, [1.0, -1.0, 0.0], 0.0),
            alpha: TrigField3::constant(0.3).with_mode(0.8, [0.7, -0.4, 0.0], 0.2),
            beta: TrigField3::constant(-0.2).with_mode(0.6, [0.3, 1.1, 0.0], 1.3),
        }
    }

    /// Random planar fields at `n` random points.
    pub fn random(seed: u64, n: usize) -> Self {
        let mut rng = SampleRng::new(seed);
        let points = random_points(&mut rng, n);
        let near_identity = |rng: &mut SampleRng, g: [f64; 3]| {
            let mut f = TrigField3::random(rng, 0.1, 3, true);
            f.linear = g;
            f
        };
        Self {
            points,
            phi1: near_identity(&mut rng, [1.0, 0.0, 0.0]),
            phi2: near_identity(&mut rng, [0.0, 1.0, 0.0]),
            angle: TrigField3::random(&mut rng, 1.0, 3, true),
            phi3: TrigField3::random(&mut rng, 0.3, 3, true),
            alpha: TrigField3::random(&mut rng, 0.7, 3, true),
            beta: TrigField3::random(&mut rng, 0.7, 3, true),
        }
    }

    /// Identity deformation with a constant angle.
    pub fn trivial(n: usize, angle: f64) -> Self {
        let mut rng = SampleRng::new(0);
        Self {
            points: random_points(&mut rng, n),
            phi1: TrigField3::linear(0.0, [1.0, 0.0, 0.0]),
            phi2: TrigField3::linear(0.0, [0.0, 1.0, 0.0]),
            angle: TrigField3::constant(angle),
            phi3: TrigField3::default(),
            alpha: TrigField3::constant(angle),
            beta: TrigField3::constant(0.5 * angle),
        }
    }
}

fn random_points(rng: &mut SampleRng, n: usize) -> Vec<[f64; 2]> {
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|_| [rng.uniform(-pi, pi), rng.uniform(-pi, pi)])
        .collect()
}

fn lift(p: &[f64; 2]) -> [f64; 3] {
    [p[0], p[1], 0.0]
}

/// `F` and the rotation jet of the first planar problem at a point.
pub fn first_problem_kinematics(s: &PlanarSample3D, p: &[f64; 2]) -> (M3, MatJet3) {
    let q = lift(p);
    let (g1, g2) = (s.phi1.grad(&q), s.phi2.grad(&q));
    let f = M3::from_rows([[g1[0], g1[1], 0.0], [g2[0], g2[1], 0.0], [0.0, 0.0, 1.0]]);
    let t = s.angle.value(&q);
    let gt = s.angle.grad(&q);
    (
        f,
        rotation_jet(&[0.0, 0.0, t], &[[0.0; 3], [0.0; 3], [gt[0], gt[1], 0.0]]),
    )
}

/// Symmetric trace-free, skew and trace parts.
fn irreducible(m: &M3) -> (M3, M3, f64) {
    (m.sym().dev(), m.skew(), m.trace())
}

/// Largest absolute entry outside the in-plane 2×2 block and the `(3,3)` entry.
fn off_block(m: &M3) -> f64 {
    [(0, 2), (1, 2), (2, 0), (2, 1)]
        .iter()
        .map(|&(i, j)| m.m[i][j].abs())
        .fold(0.0, f64::max)
}

/// Checks of the first planar problem at every sample point.
pub fn first_problem_check(s: &PlanarSample3D) -> VerificationReport {
    let tol = IDENTITY_TOL;
    let mut err = [0.0_f64; 13];
    let mut surrogate = 0.0_f64;
    for p in &s.points {
        let q = lift(p);
        let (f, r) = first_problem_kinematics(s, p);
        let k = curvature(&r);
        let gt = s.angle.grad(&q);
        let (px, py) = (gt[0], gt[1]);
        let t = s.angle.value(&q);
        let (sn, cs) = t.sin_cos();

        let expected_k = M3::from_rows([[0.0, 0.0, -px], [0.0, 0.0, -py], [0.0, 0.0, 0.0]]);
        err[0] = err[0].max((k - expected_k).max_abs());
        let (dk, sk, tk) = irreducible(&k);
        let dev_expected =
            M3::from_rows([[0.0, 0.0, -px], [0.0, 0.0, -py], [-px, -py, 0.0]]).scale(0.5);
        let skew_expected =
            M3::from_rows([[0.0, 0.0, -px], [0.0, 0.0, -py], [px, py, 0.0]]).scale(0.5);
        err[1] = err[1].max((dk - dev_expected).max_abs());
        err[2] = err[2].max((sk - skew_expected).max_abs());
        err[3] = err[3].max(tk.abs());

        let u = r.value.transpose() * f;
        let (g1, g2) = (s.phi1.grad(&q), s.phi2.grad(&q));
        let u_expected = M3::from_rows([
            [g1[0] * cs + g2[0] * sn, g1[1] * cs + g2[1] * sn, 0.0],
            [g2[0] * cs - g1[0] * sn, g2[1] * cs - g1[1] * sn, 0.0],
            [0.0, 0.0, 1.0],
        ]);
        err[4] = err[4].max((u - u_expected).max_abs());
        err[5] = err[5].max(off_block(&u));

        let (du, su, tu) = irreducible(&u);
        err[6] = err[6].max((tk * tu).abs());
        err[7] = err[7].max(dk.frobenius(&du).abs());
        err[8] = err[8].max(sk.frobenius(&su).abs());

        let c = f.transpose() * f;
        let (dc, sc, tc) = irreducible(&c);
        err[9] = err[9].max((tk * tc).abs());
        err[10] = err[10].max(dk.frobenius(&dc).abs());
        err[11] = err[11].max(sk.frobenius(&sc).abs());

        err[12] = err[12].max((k.frobenius(&k) - (px * px + py * py)).abs());
        surrogate = surrogate.max((k.norm() * u.trace()).abs());
    }
    let names = [
        "first_curvature_block_form",
        "first_curvature_dev_part",
        "first_curvature_skew_part",
        "first_curvature_trace",
        "first_stretch_entries",
        "first_stretch_block_form",
        "first_orthogonal_trace",
        "first_orthogonal_dev",
        "first_orthogonal_skew",
        "first_cauchy_green_trace",
        "first_cauchy_green_dev",
        "first_cauchy_green_skew",
        "first_curvature_norm",
    ];
    let mut rep = VerificationReport::new();
    for (n, e) in names.iter().zip(err) {
        rep.record(*n, e, tol);
    }
    rep.note(format!(
        "first problem: max |‖R̄ᵀCurl R̄‖ tr(R̄ᵀF)| = {surrogate:.6e} over {} points",
        s.points.len()
    ));
    rep
}

/// Largest `|‖R̄ᵀ Curl R̄‖ tr(R̄ᵀF)|` of the first problem over the sample.
pub fn first_problem_interaction_surrogate(s: &PlanarSample3D) -> f64 {
    s.points
        .iter()
        .map(|p| {
            let (f, r) = first_problem_kinematics(s, p);
            (curvature(&r).norm() * (r.value.transpose() * f).trace()).abs()
        })
        .fold(0.0, f64::max)
}

/// Rotation jet of the second planar problem for fields `α`, `β` at a point.
pub fn second_problem_jet(alpha: &TrigField3, beta: &TrigField3, p: &[f64; 2]) -> MatJet3 {
    let q = lift(p);
    let a = [alpha.value(&q), beta.value(&q), 0.0];
    let jet = rotation_jet(&a, &[alpha.grad(&q), beta.grad(&q), [0.0; 3]]);
    MatJet3 {
        value: second_problem_rotation(a[0], a[1]),
        grad: jet.grad,
    }
}

/// Exact `R̄ᵀ Curl R̄` of the second planar problem.
pub fn second_problem_curvature(alpha: &TrigField3, beta: &TrigField3, p: &[f64; 2]) -> M3 {
    curvature(&second_problem_jet(alpha, beta, p))
}

/// Leading-order curvature for small rotations:
///
/// ```text
/// | β_y    −β_x   0         |
/// | −α_y   α_x    0         |
/// | 0      0      α_x + β_y |
/// ```
pub fn small_rotation_curvature(alpha: &TrigField3, beta: &TrigField3, p: &[f64; 2]) -> M3 {
    let q = lift(p);
    let (ga, gb) = (alpha.grad(&q), beta.grad(&q));
    M3::from_rows([
        [gb[1], -gb[0], 0.0],
        [-ga[1], ga[0], 0.0],
        [0.0, 0.0, ga[0] + gb[1]],
    ])
}

fn scaled(f: &TrigField3, s: f64) -> TrigField3 {
    TrigField3 {
        constant: f.constant * s,
        linear: f.linear.map(|g| g * s),
        modes: f
            .modes
            .iter()
            .map(|m| TrigMode {
                amplitude: m.amplitude * s,
                ..*m
            })
            .collect(),
    }
}

/// Relative errors of the leading-order curvature for the rotation fields
/// scaled by `eps`: `(direct, odd)`, where `direct` compares the exact
/// curvature and `odd` its odd part `(C(ε) − C(−ε))/2`, whose error is
/// `O(ε²)` because the curvature is even at second order.
pub fn small_rotation_errors(s: &PlanarSample3D, eps: f64) -> (f64, f64) {
    let (a, b) = (scaled(&s.alpha, eps), scaled(&s.beta, eps));
    let (an, bn) = (scaled(&s.alpha, -eps), scaled(&s.beta, -eps));
    let (mut direct, mut odd) = (0.0_f64, 0.0_f64);
    for p in &s.points {
        let lead = small_rotation_curvature(&a, &b, p);
        let scale = lead.max_abs().max(f64::MIN_POSITIVE);
        let plus = second_problem_curvature(&a, &b, p);
        let minus = second_problem_curvature(&an, &bn, p);
        direct = direct.max((plus - lead).max_abs() / scale);
        odd = odd.max(((plus - minus).scale(0.5) - lead).max_abs() / scale);
    }
    (direct, odd)
}

/// Checks of the second planar problem at every sample point.
pub fn second_problem_check(s: &PlanarSample3D) -> VerificationReport {
    let tol = IDENTITY_TOL;
    let mut rep = VerificationReport::new();
    let (mut orth, mut zero31, mut fd, mut f_form) = (0.0_f64, 0.0_f64, 0.0_f64, 0.0_f64);
    let mut nonzero = f64::INFINITY;
    for p in &s.points {
        let jet = second_problem_jet(&s.alpha, &s.beta, p);
        let r = jet.value;
        orth = orth.max((r.transpose() * r - M3::identity()).max_abs());
        orth = orth.max((r.det() - 1.0).abs());
        let k = curvature(&jet);
        zero31 = zero31.max(k.m[2][0].abs()).max(k.m[2][1].abs());
        let others = (0..3)
            .flat_map(|i| (0..3).map(move |j| (i, j)))
            .filter(|&(i, j)| !(i == 2 && j < 2))
            .map(|(i, j)| k.m[i][j].abs())
            .fold(0.0, f64::max);
        nonzero = nonzero.min(others);

        let q = lift(p);
        let g3 = s.phi3.grad(&q);
        let f = M3::from_rows([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [g3[0], g3[1], 1.0]]);
        f_form = f_form.max((f.det() - 1.0).abs());

        // The rotation-vector jet agrees with differences of the printed matrix.
        let h = 1e-4;
        for m in 0..2 {
            let mut pp = *p;
            let mut pm = *p;
            pp[m] += h;
            pm[m] -= h;
            let mut pp2 = *p;
            let mut pm2 = *p;
            pp2[m] += 2.0 * h;
            pm2[m] -= 2.0 * h;
            let rot = |x: &[f64; 2]| {
                let y = lift(x);
                second_problem_rotation(s.alpha.value(&y), s.beta.value(&y))
            };
            let d =
                (rot(&pm2) - rot(&pp2) + (rot(&pp) - rot(&pm)).scale(8.0)).scale(1.0 / (12.0 * h));
            fd = fd.max((d - jet.grad[m]).max_abs());
        }
    }
    rep.record("second_rotation_orthogonal", orth, 1e-12);
    rep.record("second_deformation_unimodular", f_form, tol);
    rep.record("second_curvature_zero_31_32", zero31, tol);
    rep.record("second_rotation_jet_vs_differences", fd, 1e-8);
    rep.note(format!(
        "second problem: smallest largest-entry magnitude outside (3,1),(3,2) = {nonzero:.6e}"
    ));
    let eps = 1e-4;
    let (direct, odd) = small_rotation_errors(s, eps);
    rep.record("second_small_rotation_leading_order", odd, 1e-6);
    // The full curvature deviates from the leading order by a relative O(|a|).
    let amp = s
        .points
        .iter()
        .map(|p| {
            let q = lift(p);
            (eps * s.alpha.value(&q)).hypot(eps * s.beta.value(&q))
        })
        .fold(0.0, f64::max);
    rep.record("second_small_rotation_direct", direct, amp.max(eps));
    let (_, odd_half) = small_rotation_errors(s, 0.5 * eps);
    rep.note(format!(
        "second problem: small-rotation odd-part error {odd:.3e} at ε = {eps:e}, {odd_half:.3e} at ε/2"
    ));
    rep
}

/// Smooth deformation and rotation fields in three dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct ChiralProbe {
    /// Components of the deformation `φ`.
    pub phi: [TrigField3; 3],
    /// Rotation vector `a`, with `R = exp([a]×)`.
    pub rot: [TrigField3; 3],
    pub points: Vec<[f64; 3]>,
}

impl ChiralProbe {
    pub fn random(seed: u64, n: usize) -> Self {
        let mut rng = SampleRng::new(seed);
        let phi = std::array::from_fn(|i| {
            let mut f = TrigField3::random(&mut rng, 0.2, 3, false);
            f.linear[i] = 1.0;
            f
        });
        let rot = std::array::from_fn(|_| TrigField3::random(&mut rng, 0.8, 3, false));
        let pi = std::f64::consts::PI;
        let points = (0..n)
            .map(|_| std::array::from_fn(|_| rng.uniform(-pi, pi)))
            .collect();
        Self { phi, rot, points }
    }

    /// Identity deformation with a constant rotation.
    pub fn constant_rotation(n: usize, a: [f64; 3]) -> Self {
        let mut probe = Self::random(0, n);
        probe.phi = std::array::from_fn(|i| {
            let mut g = [0.0; 3];
            g[i] = 1.0;
            TrigField3::linear(0.0, g)
        });
        probe.rot = a.map(TrigField3::constant);
        probe
    }

    /// Planar fields of the first problem embedded in three dimensions.
    pub fn planar(seed: u64, n: usize) -> Self {
        let s = PlanarSample3D::random(seed, n);
        Self {
            phi: [s.phi1, s.phi2, TrigField3::linear(0.0, [0.0, 0.0, 1.0])],
            rot: [TrigField3::default(), TrigField3::default(), s.angle],
            points: s.points.iter().map(|p| [p[0], p[1], 0.0]).collect(),
        }
    }

    pub fn deformation_gradient(&self, p: &[f64; 3]) -> M3 {
        let g: [[f64; 3]; 3] = std::array::from_fn(|i| self.phi[i].grad(p));
        M3::from_rows(g)
    }

    pub fn rotation(&self, p: &[f64; 3]) -> MatJet3 {
        let a = self.rot.each_ref().map(|f| f.value(p));
        let g = self.rot.each_ref().map(|f| f.grad(p));
        rotation_jet(&a, &g)
    }

    /// `F#(x) = −F(−x)`, computed from the inverted deformation
    /// `φ#(x) = φ(−x)` by the chain rule on each mode.
    pub fn inverted_deformation_gradient(&self, p: &[f64; 3]) -> M3 {
        let inv = self.phi.each_ref().map(invert_argument);
        M3::from_rows(std::array::from_fn(|i| inv[i].grad(p)))
    }

    /// `R#(x) = −R(−x)` with its derivatives by the chain rule.
    pub fn inverted_rotation(&self, p: &[f64; 3]) -> MatJet3 {
        let inv = self.rot.each_ref().map(invert_argument);
        let a = inv.each_ref().map(|f| f.value(p));
        let g = inv.each_ref().map(|f| f.grad(p));
        let jet = rotation_jet(&a, &g);
        MatJet3 {
            value: -jet.value,
            grad: jet.grad.map(|d| -d),
        }
    }
}

/// `x ↦ f(−x)` as a field of the same family.
fn invert_argument(f: &TrigField3) -> TrigField3 {
    TrigField3 {
        constant: f.constant,
        linear: f.linear.map(|g| -g),
        modes: f
            .modes
            .iter()
            .map(|m| TrigMode {
                wave: m.wave.map(|k| -k),
                ..*m
            })
            .collect(),
    }
}

/// Behaviour of `FᵀF`, `Curl R` and `Rᵀ Curl R` under `x ↦ −x` with
/// `F# = −F(−x)` and `R# = −R(−x)`.
pub fn chirality_inversion_check(probe: &ChiralProbe) -> VerificationReport {
    let tol = IDENTITY_TOL;
    let mut e = [0.0_f64; 7];
    for p in &probe.points {
        let mp = p.map(|v| -v);
        let f = probe.deformation_gradient(&mp);
        let r = probe.rotation(&mp);
        let fs = probe.inverted_deformation_gradient(p);
        let rs = probe.inverted_rotation(p);

        e[0] = e[0].max((fs + f).max_abs());
        e[1] = e[1].max((rs.value + r.value).max_abs());
        let c = f.transpose() * f;
        let cs = fs.transpose() * fs;
        e[2] = e[2].max((cs - c).max_abs());
        let curl = curl3_matrix(&r.grad);
        let curl_s = curl3_matrix(&rs.grad);
        e[3] = e[3].max((curl_s - curl).max_abs());
        let k = curvature(&r);
        let ks = curvature(&rs);
        e[4] = e[4].max((ks + k).max_abs());
        let inv = c.frobenius(&k);
        let inv_s = cs.frobenius(&ks);
        e[5] = e[5].max((inv_s + inv).abs());
        e[6] = e[6].max((rs.value.det() + 1.0).abs());
    }
    let names = [
        "inversion_deformation_gradient_sign",
        "inversion_rotation_sign",
        "inversion_cauchy_green_invariant",
        "inversion_curl_invariant",
        "inversion_curvature_sign",
        "inversion_chiral_invariant_sign",
        "inversion_rotation_determinant",
    ];
    let mut rep = VerificationReport::new();
    for (n, v) in names.iter().zip(e) {
        rep.record(*n, v, tol);
    }
    rep.note("inverted rotation R# = −R(−x) has determinant −1 in three dimensions");
    rep
}

/// `max |⟨FᵀF, Rᵀ Curl R⟩|` over the probe points.
pub fn chiral_invariant_max(probe: &ChiralProbe) -> f64 {
    probe
        .points
        .iter()
        .map(|p| {
            let f = probe.deformation_gradient(p);
            (f.transpose() * f)
                .frobenius(&curvature(&probe.rotation(p)))
                .abs()
        })
        .fold(0.0, f64::max)
}

/// Every reduction check on the reference and random probes.
pub fn reduction_suite(seed: u64) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let reference = PlanarSample3D::reference(seed, 100);
    rep.extend(first_problem_check(&reference));
    rep.extend(second_problem_check(&PlanarSample3D::random(
        seed.wrapping_add(1),
        100,
    )));
    rep.extend(chirality_inversion_check(&ChiralProbe::random(
        seed.wrapping_add(2),
        50,
    )));
    let planar = ChiralProbe::planar(seed.wrapping_add(3), 50);
    rep.record(
        "planar_chiral_invariant_vanishes",
        chiral_invariant_max(&planar),
        IDENTITY_TOL,
    );
    rep
}
