//! Small dense tensors: 2-vectors, 2×2 and 3×3 matrices, planar rotations,
//! irreducible splits and the closed-form 2D polar decomposition with its
//! derivative.
//!
//! Matrices are stored row-major, `m[i][j]` is the entry in row `i`, column `j`
//! (zero-based; the mathematical index `(1,2)` is `m[0][1]`).

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Vec2<T> {
    #[inline]
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(&self, other: &Self) -> T {
        self.x * other.x + self.y * other.y
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.dot(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.x.hypot(self.y)
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Self::new(self.x * s, self.y * s)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl<T: Scalar> Add for Vec2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl<T: Scalar> Sub for Vec2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<T: Scalar> Neg for Vec2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y)
    }
}

impl<T: Scalar> Mul<T> for Vec2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Scalar> AddAssign for Vec2<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

/// 2×2 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2<T> {
    pub m: [[T; 2]; 2],
}

impl<T: Scalar> Mat2<T> {
    #[inline]
    pub fn new(a11: T, a12: T, a21: T, a22: T) -> Self {
        Self {
            m: [[a11, a12], [a21, a22]],
        }
    }

    #[inline]
    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::one())
    }

    /// The 2D Levi-Civita matrix `[[0, 1], [-1, 0]]` (ε₁₂ = 1 = −ε₂₁).
    #[inline]
    pub fn levi_civita() -> Self {
        Self::new(T::zero(), T::one(), -T::one(), T::zero())
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Self::new(f(0, 0), f(0, 1), f(1, 0), f(1, 1))
    }

    #[inline]
    pub fn transpose(&self) -> Self {
        Self::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    #[inline]
    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1]
    }

    #[inline]
    pub fn det(&self) -> T {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    /// Cofactor matrix, `cof M = det(M) M⁻ᵀ`.
    #[inline]
    pub fn cof(&self) -> Self {
        Self::new(self.m[1][1], -self.m[1][0], -self.m[0][1], self.m[0][0])
    }

    pub fn sym(&self) -> Self {
        let h = T::lit(0.5);
        let off = (self.m[0][1] + self.m[1][0]) * h;
        Self::new(self.m[0][0], off, off, self.m[1][1])
    }

    pub fn skew(&self) -> Self {
        let w = (self.m[0][1] - self.m[1][0]) * T::lit(0.5);
        Self::new(T::zero(), w, -w, T::zero())
    }

    /// Frobenius product `A:B = AᵢⱼBᵢⱼ`.
    #[inline]
    pub fn frobenius(&self, other: &Self) -> T {
        self.m[0][0] * other.m[0][0]
            + self.m[0][1] * other.m[0][1]
            + self.m[1][0] * other.m[1][0]
            + self.m[1][1] * other.m[1][1]
    }

    #[inline]
    pub fn norm_sq(&self) -> T {
        self.frobenius(self)
    }

    #[inline]
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Contraction with the Levi-Civita matrix, `ε:M = M₁₂ − M₂₁`.
    #[inline]
    pub fn eps_contract(&self) -> T {
        self.m[0][1] - self.m[1][0]
    }

    #[inline]
    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.m[i][j] * s)
    }

    #[inline]
    pub fn mul_vec(&self, v: &Vec2<T>) -> Vec2<T> {
        Vec2::new(
            self.m[0][0] * v.x + self.m[0][1] * v.y,
            self.m[1][0] * v.x + self.m[1][1] * v.y,
        )
    }

    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .flatten()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }
}

impl<T: Scalar> Index<(usize, usize)> for Mat2<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

impl<T: Scalar> IndexMut<(usize, usize)> for Mat2<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.m[i][j]
    }
}

impl<T: Scalar> Add for Mat2<T> {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] + rhs.m[i][j])
    }
}

impl<T: Scalar> Sub for Mat2<T> {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] - rhs.m[i][j])
    }
}

impl<T: Scalar> Neg for Mat2<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.m[i][j])
    }
}

impl<T: Scalar> Mul for Mat2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j])
    }
}

impl<T: Scalar> Mul<T> for Mat2<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

impl<T: Scalar> AddAssign for Mat2<T> {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl<T: Scalar> SubAssign for Mat2<T> {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

/// 3×3 real matrix.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Mat3<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Scalar> Mat3<T> {
    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = [[T::zero(); 3]; 3];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = f(i, j);
            }
        }
        Self { m }
    }

    pub fn from_rows(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn zero() -> Self {
        Self::from_fn(|_, _| T::zero())
    }

    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.m[j][i])
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn sym(&self) -> Self {
        let h = T::lit(0.5);
        Self::from_fn(|i, j| (self.m[i][j] + self.m[j][i]) * h)
    }

    pub fn skew(&self) -> Self {
        let h = T::lit(0.5);
        Self::from_fn(|i, j| (self.m[i][j] - self.m[j][i]) * h)
    }

    /// Trace-free part `M − tr(M)·1/3`.
    pub fn dev(&self) -> Self {
        let t = self.trace() / T::lit(3.0);
        Self::from_fn(|i, j| {
            if i == j {
                self.m[i][j] - t
            } else {
                self.m[i][j]
            }
        })
    }

    pub fn frobenius(&self, other: &Self) -> T {
        let mut acc = T::zero();
        for i in 0..3 {
            for j in 0..3 {
                acc = acc + self.m[i][j] * other.m[i][j];
            }
        }
        acc
    }

    pub fn norm(&self) -> T {
        self.frobenius(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::from_fn(|i, j| self.m[i][j] * s)
    }

    pub fn max_abs(&self) -> T {
        self.m
            .iter()
            .flatten()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }
}

impl<T: Scalar> Add for Mat3<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] + rhs.m[i][j])
    }
}

impl<T: Scalar> Sub for Mat3<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| self.m[i][j] - rhs.m[i][j])
    }
}

impl<T: Scalar> Neg for Mat3<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self::from_fn(|i, j| -self.m[i][j])
    }
}

impl<T: Scalar> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        Self::from_fn(|i, j| {
            self.m[i][0] * rhs.m[0][j] + self.m[i][1] * rhs.m[1][j] + self.m[i][2] * rhs.m[2][j]
        })
    }
}

impl<T: Scalar> Index<(usize, usize)> for Mat3<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.m[i][j]
    }
}

/// Fourth-order 2D tensor; `t[i][j][k][l]` holds ∂Rᵢⱼ/∂Fₖₗ.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Tensor4<T> {
    pub t: [[[[T; 2]; 2]; 2]; 2],
}

impl<T: Scalar> Tensor4<T> {
    /// Contraction `(𝔸:E)ᵢⱼ = 𝔸ᵢⱼₖₗ Eₖₗ`.
    pub fn apply(&self, e: &Mat2<T>) -> Mat2<T> {
        Mat2::from_fn(|i, j| {
            let mut acc = T::zero();
            for k in 0..2 {
                for l in 0..2 {
                    acc = acc + self.t[i][j][k][l] * e.m[k][l];
                }
            }
            acc
        })
    }
}

/// Planar rotation `[[cos ϑ, −sin ϑ], [sin ϑ, cos ϑ]] = cos ϑ·1 − sin ϑ·ε`.
#[inline]
pub fn rot2<T: Scalar>(theta: T) -> Mat2<T> {
    let (s, c) = theta.sin_cos();
    Mat2::new(c, -s, s, c)
}

/// Splits `M` into its symmetric part, skew part and trace.
pub fn decompose<T: Scalar>(m: &Mat2<T>) -> (Mat2<T>, Mat2<T>, T) {
    (m.sym(), m.skew(), m.trace())
}

/// Polar decomposition `F = R·U` in closed form:
/// `R = (F + cof F)/√((F₁₁+F₂₂)² + (F₁₂−F₂₁)²)`, `U = Rᵀ F`.
///
/// The normalising root equals `tr U`.
pub fn polar2<T: Scalar>(f: &Mat2<T>) -> Result<(Mat2<T>, Mat2<T>)> {
    let (r, tr_u) = polar_rotation(f)?;
    let u = (r.transpose() * *f).sym();
    debug_assert!((u.trace() - tr_u).abs() <= T::lit(1e3) * T::epsilon() * tr_u);
    Ok((r, u))
}

/// Rotation factor of the polar decomposition together with `tr U`.
pub fn polar_rotation<T: Scalar>(f: &Mat2<T>) -> Result<(Mat2<T>, T)> {
    let det = f.det();
    if det.is_nan() || det <= T::degenerate_det() {
        return Err(Error::DegenerateDeformation {
            det: det.to_f64().unwrap_or(f64::NAN),
        });
    }
    let a = f.m[0][0] + f.m[1][1];
    let b = f.m[1][0] - f.m[0][1];
    let n = a.hypot(b);
    Ok((Mat2::new(a / n, -b / n, b / n, a / n), n))
}

/// Directional derivative of `polar(F)` along `E`: `(E − R Eᵀ R)/tr U`.
pub fn dpolar2_dir<T: Scalar>(f: &Mat2<T>, e: &Mat2<T>) -> Result<Mat2<T>> {
    let (r, tr_u) = polar_rotation(f)?;
    Ok((*e - r * e.transpose() * r).scale(T::one() / tr_u))
}

/// Index form of [`dpolar2_dir`]: `∂Rᵢⱼ/∂Fₖₗ = (δᵢₖδⱼₗ − RᵢₗRₖⱼ)/tr U`.
#[allow(non_snake_case)]
pub fn dpolar2_dF<T: Scalar>(f: &Mat2<T>) -> Result<Tensor4<T>> {
    let (r, tr_u) = polar_rotation(f)?;
    let inv = T::one() / tr_u;
    let mut out = Tensor4::default();
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    let delta = if i == k && j == l {
                        T::one()
                    } else {
                        T::zero()
                    };
                    out.t[i][j][k][l] = (delta - r.m[i][l] * r.m[k][j]) * inv;
                }
            }
        }
    }
    Ok(out)
}

/// Gradient of `tr(R̄ᵀ polar F)` with respect to `F`: `(R̄ − R R̄ᵀ R)/tr U`.
pub fn grad_tr_rbar_polar<T: Scalar>(f: &Mat2<T>, rbar: &Mat2<T>) -> Result<Mat2<T>> {
    let (r, tr_u) = polar_rotation(f)?;
    Ok((*rbar - r * rbar.transpose() * r).scale(T::one() / tr_u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SampleRng;
    use proptest::prelude::*;

    type M = Mat2<f64>;

    fn close(a: &M, b: &M, tol: f64) -> bool {
        (*a - *b).max_abs() <= tol
    }

    /// Principal square root of a symmetric positive definite 2×2 matrix via
    /// its eigendecomposition; independent of the closed-form polar route.
    fn spd_sqrt_eig(c: &M) -> M {
        let (a, b, d) = (c.m[0][0], c.m[0][1], c.m[1][1]);
        let mean = 0.5 * (a + d);
        let rad = (0.25 * (a - d).powi(2) + b * b).sqrt();
        let (l1, l2) = (mean + rad, mean - rad);
        let phi = 0.5 * (2.0 * b).atan2(a - d);
        let (s, co) = phi.sin_cos();
        let q = M::new(co, -s, s, co);
        let diag = M::new(l1.sqrt(), 0.0, 0.0, l2.sqrt());
        q * diag * q.transpose()
    }

    fn random_f(rng: &mut SampleRng) -> M {
        loop {
            let f = M::new(
                1.0 + rng.uniform(-0.8, 0.8),
                rng.uniform(-0.8, 0.8),
                rng.uniform(-0.8, 0.8),
                1.0 + rng.uniform(-0.8, 0.8),
            );
            let f = rot2(rng.uniform(-3.0, 3.0)) * f;
            if f.det() > 0.1 {
                return f;
            }
        }
    }

    #[test]
    fn rot2_reference_cases() {
        assert_eq!(rot2(0.0_f64), M::identity());
        let r = rot2(-std::f64::consts::FRAC_PI_2);
        assert!(close(&r, &M::levi_civita(), 1e-16));
        let mut rng = SampleRng::new(11);
        for _ in 0..100 {
            let t = rng.uniform(-10.0, 10.0);
            assert!(close(&(rot2(t) * rot2(-t)), &M::identity(), 1e-15));
        }
    }

    #[test]
    fn decompose_reference_cases() {
        let (s, k, t) = decompose(&M::identity());
        assert_eq!((s, k, t), (M::identity(), M::zero(), 2.0));
        let (s, k, t) = decompose(&M::levi_civita());
        assert_eq!((s, k, t), (M::zero(), M::levi_civita(), 0.0));
        let mut rng = SampleRng::new(3);
        for _ in 0..100 {
            let m = M::from_fn(|_, _| rng.uniform(-5.0, 5.0));
            let (s, k, t) = decompose(&m);
            assert!(close(&(s + k), &m, 1e-15));
            assert_eq!(s, s.transpose());
            assert_eq!(k, -k.transpose());
            assert_eq!(t, m.m[0][0] + m.m[1][1]);
        }
    }

    #[test]
    fn frobenius_reference_cases() {
        assert_eq!(M::identity().frobenius(&M::identity()), 2.0);
        assert_eq!(M::levi_civita().frobenius(&M::levi_civita()), 2.0);
        let mut rng = SampleRng::new(5);
        for _ in 0..100 {
            let a = M::from_fn(|_, _| rng.uniform(-1.0, 1.0));
            let b = M::from_fn(|_, _| rng.uniform(-1.0, 1.0));
            assert!((a.frobenius(&b) - (a * b.transpose()).trace()).abs() < 1e-15);
        }
        let a3 = Mat3::<f64>::from_fn(|i, j| (i * 3 + j) as f64);
        assert_eq!(a3.frobenius(&Mat3::identity()), 0.0 + 4.0 + 8.0);
        assert_eq!(a3.frobenius(&a3), (a3 * a3.transpose()).trace());
    }

    #[test]
    fn polar_of_identity_and_rotations() {
        let (r, u) = polar2(&M::identity()).unwrap();
        assert_eq!((r, u), (M::identity(), M::identity()));
        let mut rng = SampleRng::new(17);
        for _ in 0..100 {
            let q = rot2(rng.uniform(-3.1, 3.1));
            let (r, u) = polar2(&q).unwrap();
            assert!(close(&r, &q, 1e-15));
            assert!(close(&u, &M::identity(), 1e-15));
        }
    }

    #[test]
    fn polar_stretch_matches_eigendecomposition_oracle() {
        let mut rng = SampleRng::new(23);
        for _ in 0..500 {
            let f = random_f(&mut rng);
            let (r, u) = polar2(&f).unwrap();
            let u_oracle = spd_sqrt_eig(&(f.transpose() * f));
            assert!(close(&u, &u_oracle, 1e-12), "{u:?} vs {u_oracle:?}");
            assert!(close(&(r.transpose() * r), &M::identity(), 1e-14));
            assert!((r.det() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn polar_rejects_non_positive_determinant() {
        let reflect = M::new(1.0, 0.0, 0.0, -1.0);
        assert!(matches!(
            polar2(&reflect),
            Err(Error::DegenerateDeformation { .. })
        ));
        assert!(polar2(&M::zero()).is_err());
        assert!(dpolar2_dir(&M::new(1.0, 0.0, 0.0, 1e-13), &M::identity()).is_err());
        assert!(dpolar2_dF(&reflect).is_err());
    }

    #[test]
    fn dpolar_at_identity_is_skew_part() {
        let mut rng = SampleRng::new(29);
        for _ in 0..20 {
            let e = M::from_fn(|_, _| rng.uniform(-1.0, 1.0));
            let d = dpolar2_dir(&M::identity(), &e).unwrap();
            assert!(close(&d, &e.skew(), 1e-16));
        }
    }

    #[test]
    fn dpolar_matches_central_differences() {
        let mut rng = SampleRng::new(31);
        let h = 1e-6;
        for _ in 0..200 {
            let f = random_f(&mut rng);
            let e = M::from_fn(|_, _| rng.uniform(-1.0, 1.0));
            let rp = polar2(&(f + e.scale(h))).unwrap().0;
            let rm = polar2(&(f - e.scale(h))).unwrap().0;
            let fd = (rp - rm).scale(0.5 / h);
            let an = dpolar2_dir(&f, &e).unwrap();
            let rel = (fd - an).norm() / an.norm().max(1e-300);
            assert!(rel < 1e-6, "rel {rel}");
            let tensor = dpolar2_dF(&f).unwrap().apply(&e);
            assert!(close(&tensor, &an, 1e-14));
        }
    }

    #[test]
    fn gradient_of_trace_coupling() {
        // d/dF tr(R̄ᵀ polar F) against per-entry central differences.
        let mut rng = SampleRng::new(37);
        let h = 1e-6;
        for _ in 0..100 {
            let f = random_f(&mut rng);
            let rbar = rot2(rng.uniform(-3.0, 3.0));
            let g = grad_tr_rbar_polar(&f, &rbar).unwrap();
            let fd = M::from_fn(|k, l| {
                let mut e = M::zero();
                e.m[k][l] = h;
                let p = (rbar.transpose() * polar2(&(f + e)).unwrap().0).trace();
                let m = (rbar.transpose() * polar2(&(f - e)).unwrap().0).trace();
                (p - m) / (2.0 * h)
            });
            assert!(close(&g, &fd, 1e-8));
        }
    }

    #[test]
    fn eps_rotation_trace_identity() {
        let mut rng = SampleRng::new(41);
        for _ in 0..100 {
            let phi = rng.uniform(-10.0, 10.0);
            let lhs = (M::levi_civita() * rot2(phi)).trace();
            assert!((lhs - 2.0 * phi.sin()).abs() < 1e-14);
        }
    }

    #[test]
    fn generic_f32_agrees_with_f64() {
        let f64m = M::new(1.1, 0.2, -0.3, 0.9);
        let f32m = Mat2::<f32>::new(1.1, 0.2, -0.3, 0.9);
        let (r64, u64) = polar2(&f64m).unwrap();
        let (r32, u32) = polar2(&f32m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert!((r64.m[i][j] - r32.m[i][j] as f64).abs() < 1e-6);
                assert!((u64.m[i][j] - u32.m[i][j] as f64).abs() < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn rot2_is_special_orthogonal(theta in -100.0f64..100.0) {
            let r = rot2(theta);
            prop_assert!((r.transpose() * r - M::identity()).max_abs() < 1e-14);
            prop_assert!((r.det() - 1.0).abs() < 1e-14);
        }

        #[test]
        fn polar_round_trip(
            a in 0.3f64..3.0, b in -1.0f64..1.0, c in -1.0f64..1.0, d in 0.3f64..3.0,
            t in -3.2f64..3.2,
        ) {
            let f = rot2(t) * M::new(a, b, c, d);
            prop_assume!(f.det() >= 0.1 && f.det() <= 10.0);
            let (r, u) = polar2(&f).unwrap();
            prop_assert!((r * u - f).norm() / f.norm() < 1e-13);
            prop_assert_eq!(u, u.transpose());
            prop_assert!(u.trace() > 0.0 && u.det() > 0.0);
        }

        #[test]
        fn dpolar_is_linear_in_direction(
            e1 in proptest::array::uniform4(-1.0f64..1.0),
            e2 in proptest::array::uniform4(-1.0f64..1.0),
            a in -2.0f64..2.0, b in -2.0f64..2.0,
        ) {
            let f = M::new(1.3, 0.4, -0.2, 0.8);
            let e1 = M::new(e1[0], e1[1], e1[2], e1[3]);
            let e2 = M::new(e2[0], e2[1], e2[2], e2[3]);
            let lhs = dpolar2_dir(&f, &(e1.scale(a) + e2.scale(b))).unwrap();
            let rhs = dpolar2_dir(&f, &e1).unwrap().scale(a) + dpolar2_dir(&f, &e2).unwrap().scale(b);
            prop_assert!((lhs - rhs).max_abs() < 1e-13);
        }
    }
}
