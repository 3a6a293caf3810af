//! Sampled function spaces on ℝ, ℝ² and the torus 𝕋², with rectangle-rule
//! inner products and the quasi-periodic extension of torus fields.

use crate::error::{Error, Result};
use crate::group::split_integer;
use crate::phase::cis_turns;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Tolerance (in grid-coordinate units) for snapping a point onto a node.
pub const NODE_TOLERANCE: f64 = 1e-9;

/// Uniform grid `origin + k·step`, `k = 0..count`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec1D {
    pub origin: f64,
    pub step: f64,
    pub count: usize,
}

impl GridSpec1D {
    pub fn new(origin: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !step.is_finite() || !origin.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid needs finite origin and positive step, got origin={origin} step={step}"
            )));
        }
        if count < 2 {
            return Err(Error::InvalidParameter(format!(
                "grid needs at least 2 points, got {count}"
            )));
        }
        Ok(Self { origin, step, count })
    }

    /// `count` points covering `[-half_width, half_width)`.
    pub fn centered(half_width: f64, count: usize) -> Result<Self> {
        if !(half_width > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "half width must be positive, got {half_width}"
            )));
        }
        Self::new(-half_width, 2.0 * half_width / count as f64, count)
    }

    #[inline]
    pub fn point(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.step
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |k| self.point(k))
    }

    /// Signed node offset of `t`, if `t` is within [`NODE_TOLERANCE`] steps of
    /// a (possibly out-of-range) node.
    pub fn offset_of(&self, t: f64) -> Option<i64> {
        let a = (t - self.origin) / self.step;
        let r = a.round();
        ((a - r).abs() <= NODE_TOLERANCE * a.abs().max(1.0)).then_some(r as i64)
    }

    /// Shift `dx` expressed in whole steps.
    pub fn steps_of(&self, dx: f64) -> Result<i64> {
        let a = dx / self.step;
        let r = a.round();
        if (a - r).abs() <= NODE_TOLERANCE * a.abs().max(1.0) {
            Ok(r as i64)
        } else {
            Err(Error::OffGridShift { shift: dx, step: self.step })
        }
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.count == other.count
            && (self.step - other.step).abs() <= 1e-12 * self.step
            && (self.origin - other.origin).abs() <= 1e-12 * self.step.max(self.origin.abs())
    }
}

fn check_finite(values: &[Complex64]) -> Result<()> {
    match values.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

/// Operations shared by every sampled space.
pub trait Field: Sized {
    fn values(&self) -> &[Complex64];
    fn values_mut(&mut self) -> &mut [Complex64];
    /// Quadrature weight of one cell.
    fn cell(&self) -> f64;
    fn same_shape(&self, other: &Self) -> bool;
    fn describe(&self) -> String;

    fn check_shape(&self, other: &Self) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "{} vs {}",
                self.describe(),
                other.describe()
            )))
        }
    }

    /// Riemann sum of `f·conj(g)`, accumulated serially in storage order.
    fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_shape(other)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (a, b) in self.values().iter().zip(other.values()) {
            acc += a * b.conj();
        }
        Ok(acc * self.cell())
    }

    fn norm(&self) -> f64 {
        let s: f64 = self.values().iter().map(|z| z.norm_sqr()).sum();
        (s * self.cell()).sqrt()
    }

    /// `‖self − other‖`.
    fn distance(&self, other: &Self) -> Result<f64> {
        self.check_shape(other)?;
        let s: f64 = self
            .values()
            .iter()
            .zip(other.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum();
        Ok((s * self.cell()).sqrt())
    }

    fn max_abs(&self) -> f64 {
        self.values().iter().fold(0.0, |m, z| m.max(z.norm()))
    }

    fn scale(mut self, c: Complex64) -> Self {
        self.values_mut().iter_mut().for_each(|z| *z *= c);
        self
    }

    /// `self + c·other`.
    fn axpy(mut self, c: Complex64, other: &Self) -> Result<Self> {
        self.check_shape(other)?;
        for (a, b) in self.values_mut().iter_mut().zip(other.values()) {
            *a += c * b;
        }
        Ok(self)
    }
}

/// A complex function sampled on a [`GridSpec1D`].
#[derive(Clone, Debug, PartialEq)]
pub struct SampledLine {
    pub grid: GridSpec1D,
    pub values: Vec<Complex64>,
}

impl SampledLine {
    pub fn new(grid: GridSpec1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a grid of {} points",
                values.len(),
                grid.count
            )));
        }
        check_finite(&values)?;
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: GridSpec1D) -> Self {
        Self { grid, values: vec![Complex64::new(0.0, 0.0); grid.count] }
    }

    pub fn sample(grid: GridSpec1D, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let values = grid.points().map(f).collect();
        Self::new(grid, values)
    }

    pub fn sample_real(grid: GridSpec1D, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::sample(grid, |t| Complex64::new(f(t), 0.0))
    }

    /// Value at signed node offset `k`, zero outside the stored range.
    #[inline]
    pub fn at(&self, k: i64) -> Complex64 {
        if k >= 0 && (k as usize) < self.values.len() {
            self.values[k as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Linear interpolation at `t`, zero outside the stored range.
    pub fn interpolate(&self, t: f64) -> Complex64 {
        let a = (t - self.grid.origin) / self.grid.step;
        let k = a.floor();
        let w = a - k;
        let k = k as i64;
        self.at(k) * (1.0 - w) + self.at(k + 1) * w
    }
}

impl Field for SampledLine {
    fn values(&self) -> &[Complex64] {
        &self.values
    }
    fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    fn cell(&self) -> f64 {
        self.grid.step
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.grid.approx_eq(&other.grid)
    }
    fn describe(&self) -> String {
        format!("line[{} from {} step {}]", self.grid.count, self.grid.origin, self.grid.step)
    }
}

/// A complex function on a rectangular grid, stored row-major with rows
/// indexed by `x` and columns by `y`.
#[derive(Clone, Debug, PartialEq)]
pub struct PlaneField {
    pub gx: GridSpec1D,
    pub gy: GridSpec1D,
    pub values: Vec<Complex64>,
}

impl PlaneField {
    pub fn new(gx: GridSpec1D, gy: GridSpec1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != gx.count * gy.count {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} plane grid",
                values.len(),
                gx.count,
                gy.count
            )));
        }
        check_finite(&values)?;
        Ok(Self { gx, gy, values })
    }

    pub fn zeros(gx: GridSpec1D, gy: GridSpec1D) -> Self {
        Self { gx, gy, values: vec![Complex64::new(0.0, 0.0); gx.count * gy.count] }
    }

    pub fn sample(gx: GridSpec1D, gy: GridSpec1D, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(gx.count * gy.count);
        for i in 0..gx.count {
            let x = gx.point(i);
            for j in 0..gy.count {
                values.push(f(x, gy.point(j)));
            }
        }
        Self::new(gx, gy, values)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i * self.gy.count + j
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.values[i * self.gy.count + j]
    }

    /// Value at signed node offsets, zero outside the stored range.
    #[inline]
    pub fn at(&self, i: i64, j: i64) -> Complex64 {
        if i >= 0 && j >= 0 && (i as usize) < self.gx.count && (j as usize) < self.gy.count {
            self.values[i as usize * self.gy.count + j as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    /// Bilinear interpolation at `(x, y)`, zero outside the stored range.
    pub fn interpolate(&self, x: f64, y: f64) -> Complex64 {
        let a = (x - self.gx.origin) / self.gx.step;
        let b = (y - self.gy.origin) / self.gy.step;
        let (i, j) = (a.floor(), b.floor());
        let (wa, wb) = (a - i, b - j);
        let (i, j) = (i as i64, j as i64);
        self.at(i, j) * ((1.0 - wa) * (1.0 - wb))
            + self.at(i + 1, j) * (wa * (1.0 - wb))
            + self.at(i, j + 1) * ((1.0 - wa) * wb)
            + self.at(i + 1, j + 1) * (wa * wb)
    }
}

impl Field for PlaneField {
    fn values(&self) -> &[Complex64] {
        &self.values
    }
    fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    fn cell(&self) -> f64 {
        self.gx.step * self.gy.step
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.gx.approx_eq(&other.gx) && self.gy.approx_eq(&other.gy)
    }
    fn describe(&self) -> String {
        format!("plane[{}x{}]", self.gx.count, self.gy.count)
    }
}

/// A function on the fundamental domain `[0,1)²` sampled at `(j/nu, k/nv)`,
/// extended to ℝ² by `f(u+n, v+k) = e^{2πimuk} f(u, v)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TorusField {
    pub nu: usize,
    pub nv: usize,
    pub m: u32,
    pub values: Vec<Complex64>,
}

impl TorusField {
    pub fn new(nu: usize, nv: usize, m: u32, values: Vec<Complex64>) -> Result<Self> {
        if nu == 0 || nv == 0 {
            return Err(Error::InvalidParameter(format!("torus grid {nu}x{nv} is empty")));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("quasi-periodicity index m must be ≥ 1".into()));
        }
        if values.len() != nu * nv {
            return Err(Error::ShapeMismatch(format!(
                "{} values for a {}x{} torus grid",
                values.len(),
                nu,
                nv
            )));
        }
        check_finite(&values)?;
        Ok(Self { nu, nv, m, values })
    }

    pub fn zeros(nu: usize, nv: usize, m: u32) -> Self {
        Self { nu, nv, m, values: vec![Complex64::new(0.0, 0.0); nu * nv] }
    }

    pub fn sample(nu: usize, nv: usize, m: u32, f: impl Fn(f64, f64) -> Complex64) -> Result<Self> {
        let mut values = Vec::with_capacity(nu * nv);
        for j in 0..nu {
            for k in 0..nv {
                values.push(f(j as f64 / nu as f64, k as f64 / nv as f64));
            }
        }
        Self::new(nu, nv, m, values)
    }

    #[inline]
    pub fn u(&self, j: usize) -> f64 {
        j as f64 / self.nu as f64
    }

    #[inline]
    pub fn v(&self, k: usize) -> f64 {
        k as f64 / self.nv as f64
    }

    #[inline]
    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        self.values[j * self.nv + k]
    }

    /// Quasi-periodic extension at the node `(a/nu, b/nv)` for arbitrary
    /// integers `a, b`. The phase `e^{2πim{u}[v]}` is reduced exactly in
    /// integer arithmetic.
    pub fn extended(&self, a: i64, b: i64) -> Complex64 {
        let (nu, nv) = (self.nu as i64, self.nv as i64);
        let j = a.rem_euclid(nu);
        let (k, l) = (b.div_euclid(nv), b.rem_euclid(nv));
        let value = self.values[(j * nv + l) as usize];
        if k == 0 || j == 0 {
            return value;
        }
        let num = (self.m as i128 * j as i128 * k as i128).rem_euclid(nu as i128);
        value * cis_turns(num as f64 / nu as f64)
    }

    /// Evaluates the quasi-periodic extension at an arbitrary point whose
    /// fractional parts land on a grid node.
    pub fn quasi_periodic_eval(&self, u: f64, v: f64) -> Result<Complex64> {
        let a = self.node_offset(u).ok_or(Error::OffGrid { u, v })?;
        let b = node_offset_n(v, self.nv).ok_or(Error::OffGrid { u, v })?;
        Ok(self.extended(a, b))
    }

    fn node_offset(&self, u: f64) -> Option<i64> {
        node_offset_n(u, self.nu)
    }

    /// Largest deviation from the covariance rule over every node and the
    /// integer translates `|n|, |k| ≤ reach`, using the closed-form phase
    /// `e^{2πimuk}` independently of [`TorusField::extended`].
    pub fn quasi_periodicity_defect(&self, samples: impl Fn(f64, f64) -> Result<Complex64>, reach: i64) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for j in 0..self.nu {
            for l in 0..self.nv {
                let (u, v) = (self.u(j), self.v(l));
                let base = samples(u, v)?;
                for n in -reach..=reach {
                    for k in -reach..=reach {
                        let lhs = samples(u + n as f64, v + k as f64)?;
                        let rhs = cis_turns(self.m as f64 * u * k as f64) * base;
                        worst = worst.max((lhs - rhs).norm());
                    }
                }
            }
        }
        Ok(worst / self.max_abs().max(f64::MIN_POSITIVE))
    }
}

fn node_offset_n(u: f64, n: usize) -> Option<i64> {
    let (int, frac) = split_integer(u);
    let a = frac * n as f64;
    let r = a.round();
    ((a - r).abs() <= NODE_TOLERANCE * n as f64).then(|| int as i64 * n as i64 + r as i64)
}

impl Field for TorusField {
    fn values(&self) -> &[Complex64] {
        &self.values
    }
    fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }
    fn cell(&self) -> f64 {
        1.0 / (self.nu * self.nv) as f64
    }
    fn same_shape(&self, other: &Self) -> bool {
        self.nu == other.nu && self.nv == other.nv && self.m == other.m
    }
    fn describe(&self) -> String {
        format!("torus[{}x{}, m={}]", self.nu, self.nv, self.m)
    }
}
