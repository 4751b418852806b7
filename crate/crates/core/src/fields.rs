//! Fields on a uniform periodic grid and second-order central-difference
//! operators.
//!
//! Node `(i, j)` sits at `x = i·hx`, `y = j·hy` and is stored at flat index
//! `i·ny + j`. All stencils wrap periodically in both directions.

use std::io::{self, Write};
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::algebra::{Mat2, Vec2};
use crate::error::{Error, Result};
use crate::rng::SampleRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Grid {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        let g = Self { nx, ny, lx, ly };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 4 || self.ny < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 nodes per direction, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.lx > 0.0 && self.ly > 0.0 && self.lx.is_finite() && self.ly.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "domain lengths must be positive and finite, got {} x {}",
                self.lx, self.ly
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    #[inline]
    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        self.hx() * self.hy()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.ny + j
    }

    /// Inverse of [`Grid::idx`].
    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k / self.ny, k % self.ny)
    }

    #[inline]
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.hx()
    }

    #[inline]
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.hy()
    }

    #[inline]
    fn ip(&self, i: usize) -> usize {
        if i + 1 == self.nx {
            0
        } else {
            i + 1
        }
    }

    #[inline]
    fn im(&self, i: usize) -> usize {
        if i == 0 {
            self.nx - 1
        } else {
            i - 1
        }
    }

    #[inline]
    fn jp(&self, j: usize) -> usize {
        if j + 1 == self.ny {
            0
        } else {
            j + 1
        }
    }

    #[inline]
    fn jm(&self, j: usize) -> usize {
        if j == 0 {
            self.ny - 1
        } else {
            j - 1
        }
    }
}

/// Values a field can hold: closed under addition and scaling by `f64`.
pub trait FieldValue:
    Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self>
{
}

impl<V> FieldValue for V where
    V: Copy + Default + Add<Output = V> + Sub<Output = V> + Mul<f64, Output = V>
{
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field<V> {
    grid: Grid,
    data: Vec<V>,
}

pub type ScalarField = Field<f64>;
pub type Vec2Field = Field<Vec2<f64>>;
pub type Mat2Field = Field<Mat2<f64>>;

impl<V: FieldValue> Field<V> {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![V::default(); grid.len()],
        }
    }

    pub fn from_vec(grid: Grid, data: Vec<V>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { grid, data })
    }

    /// Samples `f(x, y)` at every node.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64) -> V) -> Self {
        let mut data = Vec::with_capacity(grid.len());
        for i in 0..grid.nx {
            for j in 0..grid.ny {
                data.push(f(grid.x(i), grid.y(j)));
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[V] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [V] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> V {
        self.data[self.grid.idx(i, j)]
    }

    pub fn map<W: FieldValue>(&self, f: impl Fn(V) -> W) -> Field<W> {
        Field {
            grid: self.grid,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map<W: FieldValue, Z: FieldValue>(
        &self,
        other: &Field<W>,
        f: impl Fn(V, W) -> Z,
    ) -> Field<Z> {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// `self + s·other`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_map(other, |a, b| a + b * s)
    }

    /// Quadrature `Σ f(v)·hx·hy` over all nodes.
    pub fn integrate(&self, f: impl Fn(V) -> f64) -> f64 {
        self.data.iter().map(|&v| f(v)).sum::<f64>() * self.grid.cell_area()
    }

    /// Central difference in x.
    pub fn dx(&self) -> Self {
        let g = self.grid;
        let s = 0.5 / g.hx();
        self.stencil(|i, j| (self.at(g.ip(i), j) - self.at(g.im(i), j)) * s)
    }

    /// Central difference in y.
    pub fn dy(&self) -> Self {
        let g = self.grid;
        let s = 0.5 / g.hy();
        self.stencil(|i, j| (self.at(i, g.jp(j)) - self.at(i, g.jm(j))) * s)
    }

    /// Three-point second difference in x.
    pub fn d2x(&self) -> Self {
        let g = self.grid;
        let s = 1.0 / (g.hx() * g.hx());
        self.stencil(|i, j| (self.at(g.ip(i), j) + self.at(g.im(i), j) - self.at(i, j) * 2.0) * s)
    }

    /// Three-point second difference in y.
    pub fn d2y(&self) -> Self {
        let g = self.grid;
        let s = 1.0 / (g.hy() * g.hy());
        self.stencil(|i, j| (self.at(i, g.jp(j)) + self.at(i, g.jm(j)) - self.at(i, j) * 2.0) * s)
    }

    /// Four-point mixed difference, equal to `dx(dy(f))`.
    pub fn dxy(&self) -> Self {
        let g = self.grid;
        let s = 0.25 / (g.hx() * g.hy());
        self.stencil(|i, j| {
            let (ip, im, jp, jm) = (g.ip(i), g.im(i), g.jp(j), g.jm(j));
            (self.at(ip, jp) - self.at(ip, jm) - self.at(im, jp) + self.at(im, jm)) * s
        })
    }

    /// Shifts the field by one cell in x (periodically): `out(i+1, j) = f(i, j)`.
    pub fn shift_x(&self) -> Self {
        let g = self.grid;
        self.stencil(|i, j| self.at(g.im(i), j))
    }

    fn stencil(&self, f: impl Fn(usize, usize) -> V) -> Self {
        let g = self.grid;
        let mut data = Vec::with_capacity(g.len());
        for i in 0..g.nx {
            for j in 0..g.ny {
                data.push(f(i, j));
            }
        }
        Self { grid: g, data }
    }
}

impl ScalarField {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

impl Vec2Field {
    pub fn from_components(a: &ScalarField, b: &ScalarField) -> Self {
        a.zip_map(b, Vec2::new)
    }

    pub fn component(&self, c: usize) -> ScalarField {
        self.map(|v| if c == 0 { v.x } else { v.y })
    }

    pub fn max_abs(&self) -> f64 {
        self.data
            .iter()
            .fold(0.0, |m, v| m.max(v.x.abs()).max(v.y.abs()))
    }
}

impl Mat2Field {
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.max_abs()))
    }
}

/// `grad f = (∂ₓf, ∂ᵧf)`.
pub fn grad_scalar(f: &ScalarField) -> Vec2Field {
    Vec2Field::from_components(&f.dx(), &f.dy())
}

/// `div v = ∂ₓv₁ + ∂ᵧv₂`.
pub fn div_vec(v: &Vec2Field) -> ScalarField {
    let ax = v.map(|w| w.x).dx();
    let by = v.map(|w| w.y).dy();
    ax.zip_map(&by, |a, b| a + b)
}

/// Row-wise divergence, `(Div M)ᵢ = ∂ₓMᵢ₁ + ∂ᵧMᵢ₂`.
pub fn div_matrix(m: &Mat2Field) -> Vec2Field {
    let cx = m.map(|a| Vec2::new(a.m[0][0], a.m[1][0])).dx();
    let cy = m.map(|a| Vec2::new(a.m[0][1], a.m[1][1])).dy();
    cx.zip_map(&cy, |a, b| a + b)
}

/// Row-wise curl, `(Curl M)ᵢ = ε_rs ∂_r Mᵢₛ = ∂ₓMᵢ₂ − ∂ᵧMᵢ₁`.
pub fn curl2_matrix(m: &Mat2Field) -> Vec2Field {
    let cx = m.map(|a| Vec2::new(a.m[0][1], a.m[1][1])).dx();
    let cy = m.map(|a| Vec2::new(a.m[0][0], a.m[1][0])).dy();
    cx.zip_map(&cy, |a, b| a - b)
}

/// Vector gradient, `(∇w)ᵢⱼ = ∂ⱼwᵢ`.
pub fn grad_vec(w: &Vec2Field) -> Mat2Field {
    let wx = w.dx();
    let wy = w.dy();
    wx.zip_map(&wy, |a, b| Mat2::new(a.x, b.x, a.y, b.y))
}

/// Displacement, microrotation and their rates on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldState {
    pub u1: ScalarField,
    pub u2: ScalarField,
    pub theta: ScalarField,
    pub v1: ScalarField,
    pub v2: ScalarField,
    pub omega: ScalarField,
}

impl FieldState {
    pub fn zeros(grid: Grid) -> Self {
        let z = ScalarField::zeros(grid);
        Self {
            u1: z.clone(),
            u2: z.clone(),
            theta: z.clone(),
            v1: z.clone(),
            v2: z.clone(),
            omega: z,
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        self.u1.grid()
    }

    pub fn check_grids(&self) -> Result<()> {
        let g = self.grid();
        let all = [&self.u2, &self.theta, &self.v1, &self.v2, &self.omega];
        if all.iter().all(|f| f.grid() == g) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn u(&self) -> Vec2Field {
        Vec2Field::from_components(&self.u1, &self.u2)
    }

    pub fn fields(&self) -> [&ScalarField; 6] {
        [
            &self.u1,
            &self.u2,
            &self.theta,
            &self.v1,
            &self.v2,
            &self.omega,
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.fields().iter().all(|f| f.is_finite())
    }

    /// Largest absolute nodal difference over all six fields.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.fields()
            .iter()
            .zip(other.fields())
            .map(|(a, b)| a.zip_map(b, |x, y| x - y).max_abs())
            .fold(0.0, f64::max)
    }

    /// Random superposition of Fourier modes for `u1`, `u2`, `theta` (drawn in
    /// that order), each rescaled so that its largest nodal magnitude equals
    /// `amplitude`. Rates are zero.
    ///
    /// For every field the modes `kx ∈ 0..=modes`, `ky ∈ -modes..=modes`
    /// (skipping `kx = 0, ky ≤ 0`) are visited in order and two coefficients
    /// `a, b = 2U − 1` are drawn per mode, contributing
    /// `a·cos(2π(kx·x/lx + ky·y/ly)) + b·sin(…)`.
    pub fn random_smooth(grid: Grid, seed: u64, amplitude: f64, modes: u32) -> Self {
        let mut rng = SampleRng::new(seed);
        let mut draw = || random_smooth_field(grid, &mut rng, amplitude, modes as i64);
        let u1 = draw();
        let u2 = draw();
        let theta = draw();
        let z = ScalarField::zeros(grid);
        Self {
            u1,
            u2,
            theta,
            v1: z.clone(),
            v2: z.clone(),
            omega: z,
        }
    }

    /// Writes the snapshot CSV `i,j,x,y,u1,u2,theta,v1,v2,omega`.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "i,j,x,y,u1,u2,theta,v1,v2,omega")?;
        let g = *self.grid();
        for i in 0..g.nx {
            for j in 0..g.ny {
                let k = g.idx(i, j);
                write!(w, "{i},{j},{:.16e},{:.16e}", g.x(i), g.y(j))?;
                for f in self.fields() {
                    write!(w, ",{:.16e}", f.data()[k])?;
                }
                writeln!(w)?;
            }
        }
        Ok(())
    }
}

fn random_smooth_field(grid: Grid, rng: &mut SampleRng, amplitude: f64, modes: i64) -> ScalarField {
    let mut f = ScalarField::zeros(grid);
    let tau = std::f64::consts::TAU;
    for kx in 0..=modes {
        for ky in -modes..=modes {
            if kx == 0 && ky <= 0 {
                continue;
            }
            let a = 2.0 * rng.next_f64() - 1.0;
            let b = 2.0 * rng.next_f64() - 1.0;
            let (fx, fy) = (kx as f64 / grid.lx, ky as f64 / grid.ly);
            for i in 0..grid.nx {
                for j in 0..grid.ny {
                    let arg = tau * (fx * grid.x(i) + fy * grid.y(j));
                    let (s, c) = arg.sin_cos();
                    f.data_mut()[grid.idx(i, j)] += a * c + b * s;
                }
            }
        }
    }
    let m = f.max_abs();
    if m > 0.0 {
        let s = amplitude / m;
        f.data_mut().iter_mut().for_each(|v| *v *= s);
    }
    f
}

/// `F = 1 + ∇u` and `F* = 1 + ∇u*` with `u* = εu = (u₂, −u₁)`.
pub fn deformation_gradients(state: &FieldState) -> (Mat2Field, Mat2Field) {
    let grad_u = grad_vec(&state.u());
    let id = Mat2::identity();
    let f = grad_u.map(|g| id + g);
    let fs = grad_u.map(|g| id + Mat2::levi_civita() * g);
    (f, fs)
}
