//! Group actions on the sampled spaces.
//!
//! Continuous shifts must be whole multiples of the grid step unless
//! [`ShiftMode::Linear`] is requested; values shifted in from outside the
//! stored domain are zero. Torus actions work on the fundamental domain and
//! read shifted values through the quasi-periodic extension.

use crate::error::{Error, Result};
use crate::grids::{GridSpec1D, PlaneField, SampledLine, TorusField};
use crate::group::HeisenbergElement;
use crate::phase::cis_turns;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Planck parameter `ℏ` and ladder tuning `κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReprParams {
    pub hbar: f64,
    pub kappa: f64,
}

impl ReprParams {
    pub fn new(hbar: f64, kappa: f64) -> Result<Self> {
        if !(hbar > 0.0 && hbar.is_finite()) || !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "ℏ and κ must be positive, got ℏ={hbar} κ={kappa}"
            )));
        }
        Ok(Self { hbar, kappa })
    }

    /// `h = 2πℏ`.
    pub fn h(&self) -> f64 {
        2.0 * PI * self.hbar
    }
}

/// Integer index `m` of the lattice character and ladder tuning `κ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub m: u32,
    pub kappa: f64,
}

impl LatticeParams {
    pub fn new(m: u32, kappa: f64) -> Result<Self> {
        if m == 0 || !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "m must be ≥ 1 and κ positive, got m={m} κ={kappa}"
            )));
        }
        Ok(Self { m, kappa })
    }

    /// The Schrödinger parameters with `ℏ = m`.
    pub fn as_repr(&self) -> ReprParams {
        ReprParams { hbar: self.m as f64, kappa: self.kappa }
    }

    fn check(&self, f: &TorusField) -> Result<()> {
        if f.m != self.m {
            Err(Error::IndexMismatch { field: f.m, params: self.m })
        } else {
            Ok(())
        }
    }
}

/// How non-aligned shifts of line and plane data are handled.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftMode {
    /// Shifts must be whole grid steps; results are exact.
    #[default]
    Aligned,
    /// Arbitrary shifts by linear interpolation. Approximate.
    Linear,
}

/// Reads `f(t_k − shift)` for every node `k`.
struct LineShift<'a> {
    f: &'a SampledLine,
    shift: f64,
    steps: Option<i64>,
}

impl<'a> LineShift<'a> {
    fn new(f: &'a SampledLine, shift: f64, mode: ShiftMode) -> Result<Self> {
        let steps = match mode {
            ShiftMode::Aligned => Some(f.grid.steps_of(shift)?),
            ShiftMode::Linear => f.grid.steps_of(shift).ok(),
        };
        Ok(Self { f, shift, steps })
    }

    #[inline]
    fn get(&self, k: usize) -> Complex64 {
        match self.steps {
            Some(d) => self.f.at(k as i64 - d),
            None => self.f.interpolate(self.f.grid.point(k) - self.shift),
        }
    }
}

/// Reads `F(x_i + sx, y_j + sy)` for every node `(i, j)`.
struct PlaneShift<'a> {
    f: &'a PlaneField,
    sx: f64,
    sy: f64,
    steps: Option<(i64, i64)>,
}

impl<'a> PlaneShift<'a> {
    fn new(f: &'a PlaneField, sx: f64, sy: f64, mode: ShiftMode) -> Result<Self> {
        let aligned = || -> Result<(i64, i64)> { Ok((f.gx.steps_of(sx)?, f.gy.steps_of(sy)?)) };
        let steps = match mode {
            ShiftMode::Aligned => Some(aligned()?),
            ShiftMode::Linear => aligned().ok(),
        };
        Ok(Self { f, sx, sy, steps })
    }

    #[inline]
    fn get(&self, i: usize, j: usize) -> Complex64 {
        match self.steps {
            Some((a, b)) => self.f.at(i as i64 + a, j as i64 + b),
            None => self.f.interpolate(self.f.gx.point(i) + self.sx, self.f.gy.point(j) + self.sy),
        }
    }
}

fn map_line(grid: GridSpec1D, value: impl Fn(usize, f64) -> Complex64) -> SampledLine {
    SampledLine { grid, values: (0..grid.count).map(|k| value(k, grid.point(k))).collect() }
}

fn map_plane(gx: GridSpec1D, gy: GridSpec1D, value: impl Fn(usize, usize, f64, f64) -> Complex64) -> PlaneField {
    let mut values = Vec::with_capacity(gx.count * gy.count);
    for i in 0..gx.count {
        let x = gx.point(i);
        for j in 0..gy.count {
            values.push(value(i, j, x, gy.point(j)));
        }
    }
    PlaneField { gx, gy, values }
}

/// Schrödinger representation `[ρ(s,x,y)f](t) = e^{2πiℏ(s−ty)} f(t−x)`.
pub fn act_schrodinger(p: &ReprParams, g: &HeisenbergElement, f: &SampledLine) -> Result<SampledLine> {
    act_schrodinger_with(p, g, f, ShiftMode::Aligned)
}

pub fn act_schrodinger_with(
    p: &ReprParams,
    g: &HeisenbergElement,
    f: &SampledLine,
    mode: ShiftMode,
) -> Result<SampledLine> {
    let src = LineShift::new(f, g.x, mode)?;
    Ok(map_line(f.grid, |k, t| cis_turns(p.hbar * (g.s - t * g.y)) * src.get(k)))
}

/// Momentum form `[ρ′(s,x,y)f](λ) = e^{2πiℏ(s+x(λ−y))} f(λ−y)`.
pub fn act_schrodinger_momentum(p: &ReprParams, g: &HeisenbergElement, f: &SampledLine) -> Result<SampledLine> {
    act_schrodinger_momentum_with(p, g, f, ShiftMode::Aligned)
}

pub fn act_schrodinger_momentum_with(
    p: &ReprParams,
    g: &HeisenbergElement,
    f: &SampledLine,
    mode: ShiftMode,
) -> Result<SampledLine> {
    let src = LineShift::new(f, g.y, mode)?;
    Ok(map_line(f.grid, |k, l| cis_turns(p.hbar * (g.s + g.x * (l - g.y))) * src.get(k)))
}

/// Left quasi-regular representation
/// `[Λ(s,x,y)F](x′,y′) = e^{2πiℏ(s+x(y′−y))} F(x′−x, y′−y)`.
pub fn act_quasi_regular_left(p: &ReprParams, g: &HeisenbergElement, f: &PlaneField) -> Result<PlaneField> {
    act_quasi_regular_left_with(p, g, f, ShiftMode::Aligned)
}

pub fn act_quasi_regular_left_with(
    p: &ReprParams,
    g: &HeisenbergElement,
    f: &PlaneField,
    mode: ShiftMode,
) -> Result<PlaneField> {
    let src = PlaneShift::new(f, -g.x, -g.y, mode)?;
    Ok(map_plane(f.gx, f.gy, |i, j, _, y| {
        cis_turns(p.hbar * (g.s + g.x * (y - g.y))) * src.get(i, j)
    }))
}

/// Right quasi-regular representation
/// `[R(s,x,y)F](x′,y′) = e^{−2πiℏ(s+x′y)} F(x′+x, y′+y)`.
pub fn act_quasi_regular_right(p: &ReprParams, g: &HeisenbergElement, f: &PlaneField) -> Result<PlaneField> {
    act_quasi_regular_right_with(p, g, f, ShiftMode::Aligned)
}

pub fn act_quasi_regular_right_with(
    p: &ReprParams,
    g: &HeisenbergElement,
    f: &PlaneField,
    mode: ShiftMode,
) -> Result<PlaneField> {
    let src = PlaneShift::new(f, g.x, g.y, mode)?;
    Ok(map_plane(f.gx, f.gy, |i, j, x, _| {
        cis_turns(-p.hbar * (g.s + x * g.y)) * src.get(i, j)
    }))
}

/// FSB chart `z = √(h/2κ)(x + iκy)`.
pub fn fsb_chart(p: &ReprParams, x: f64, y: f64) -> Complex64 {
    Complex64::new(x, p.kappa * y) * (p.h() / (2.0 * p.kappa)).sqrt()
}

/// FSB representation
/// `[Λ̃(s,z)F](z′) = e^{his + ¼(z̄²−z²−2zz̄) + z̄z′} F(z′−z)`.
pub fn act_fsb(p: &ReprParams, g: &HeisenbergElement, f: &PlaneField) -> Result<PlaneField> {
    act_fsb_with(p, g, f, ShiftMode::Aligned)
}

pub fn act_fsb_with(p: &ReprParams, g: &HeisenbergElement, f: &PlaneField, mode: ShiftMode) -> Result<PlaneField> {
    let src = PlaneShift::new(f, -g.x, -g.y, mode)?;
    let z = fsb_chart(p, g.x, g.y);
    let zb = z.conj();
    let base = 0.25 * (zb * zb - z * z - 2.0 * z * zb);
    let central = cis_turns(p.hbar * g.s);
    Ok(map_plane(f.gx, f.gy, |i, j, x, y| {
        central * (base + zb * fsb_chart(p, x, y)).exp() * src.get(i, j)
    }))
}

/// Peeled Schrödinger representation
/// `e^{2πiℏs} e^{−(πℏ/κ)(x²−2t(x−iκy))} F(t−x)`.
pub fn act_schrodinger_peeled(p: &ReprParams, g: &HeisenbergElement, f: &SampledLine) -> Result<SampledLine> {
    act_schrodinger_peeled_with(p, g, f, ShiftMode::Aligned)
}

pub fn act_schrodinger_peeled_with(
    p: &ReprParams,
    g: &HeisenbergElement,
    f: &SampledLine,
    mode: ShiftMode,
) -> Result<SampledLine> {
    let src = LineShift::new(f, g.x, mode)?;
    let a = PI * p.hbar / p.kappa;
    Ok(map_line(f.grid, |k, t| {
        let weight = (-a * (g.x * g.x - 2.0 * t * g.x)).exp();
        cis_turns(p.hbar * (g.s - t * g.y)) * weight * src.get(k)
    }))
}

/// Torus shift `(x, y)` in whole nodes.
fn torus_steps(f: &TorusField, g: &HeisenbergElement) -> Result<(i64, i64)> {
    let u = GridSpec1D { origin: 0.0, step: 1.0 / f.nu as f64, count: f.nu };
    let v = GridSpec1D { origin: 0.0, step: 1.0 / f.nv as f64, count: f.nv };
    Ok((u.steps_of(g.x)?, v.steps_of(g.y)?))
}

/// Lattice representation
/// `[ρ_m(s,x,y)f](u,v) = e^{2πmi(s+x(v−y))} f(u−x, v−y)` with `f` read through
/// its quasi-periodic extension.
pub fn act_lattice(p: &LatticeParams, g: &HeisenbergElement, f: &TorusField) -> Result<TorusField> {
    p.check(f)?;
    let (a, b) = torus_steps(f, g)?;
    let (nu, nv) = (f.nu as i64, f.nv as i64);
    let central = cis_turns(p.m as f64 * g.s);
    let modulus = (nu * nv) as i128;
    let mut values = Vec::with_capacity(f.values.len());
    for j in 0..nu {
        for l in 0..nv {
            // m·x·(v−y) = m·a·(l−b)/(nu·nv), reduced exactly
            let num = (p.m as i128 * a as i128 * (l - b) as i128).rem_euclid(modulus);
            let phase = cis_turns(num as f64 / modulus as f64);
            values.push(central * phase * f.extended(j - a, l - b));
        }
    }
    Ok(TorusField { values, ..*f })
}

/// The same action written with fractional and integer parts only,
/// `e^{2πmi(s+x{v−y}+u[v−y])} f({u−x},{v−y})`.
pub fn act_lattice_torus(p: &LatticeParams, g: &HeisenbergElement, f: &TorusField) -> Result<TorusField> {
    p.check(f)?;
    let (a, b) = torus_steps(f, g)?;
    let (nu, nv) = (f.nu as i64, f.nv as i64);
    let m = p.m as f64;
    let mut values = Vec::with_capacity(f.values.len());
    for j in 0..nu {
        let u = j as f64 / nu as f64;
        let fu = (j - a).rem_euclid(nu) as usize;
        for l in 0..nv {
            let (int_v, frac_idx) = ((l - b).div_euclid(nv), (l - b).rem_euclid(nv));
            let frac_v = frac_idx as f64 / nv as f64;
            let phase = cis_turns(m * (g.s + g.x * frac_v + u * int_v as f64));
            values.push(phase * f.get(fu, frac_idx as usize));
        }
    }
    Ok(TorusField { values, ..*f })
}

/// Exponent of the lattice peeling at `(u, v)`:
/// `d = −πκ(3ω²−ω̄²−2ωω̄)/(4m) = πmu²/κ − 2πimuv` with `ω = m(v + iu/κ)`.
pub fn lattice_peel_exponent(p: &LatticeParams, u: f64, v: f64) -> Complex64 {
    let m = p.m as f64;
    Complex64::new(PI * m * u * u / p.kappa, -2.0 * PI * m * u * v)
}

/// Quasi-periodic extension of a peeled torus field,
/// `F(a,b) = e^{d(a,b)−d({a},{b})} e^{2πim{a}[b]} F({a},{b})` at node offsets.
pub fn peeled_extended(p: &LatticeParams, f: &TorusField, a: i64, b: i64) -> Complex64 {
    let (nu, nv) = (f.nu as i64, f.nv as i64);
    let (ja, lb) = (a.rem_euclid(nu), b.rem_euclid(nv));
    let (u, v) = (a as f64 / nu as f64, b as f64 / nv as f64);
    let (fu, fv) = (ja as f64 / nu as f64, lb as f64 / nv as f64);
    let d = lattice_peel_exponent(p, u, v) - lattice_peel_exponent(p, fu, fv);
    // d's imaginary part is −2πm·(uv − {u}{v}); reduce it as turns
    let turns = -(p.m as f64) * (u * v - fu * fv);
    let weight = d.re.exp() * cis_turns(turns);
    weight * f.extended(a, b)
}

/// Peeled lattice representation
/// `e^{2πmis} e^{πκ(¼(ω−ω̄)² + ω(ω̄′−ω′))/m} F(ω′−ω)` where `ω = m(y + ix/κ)`
/// and `ω′ = m(v + iu/κ)`.
pub fn act_lattice_peeled(p: &LatticeParams, g: &HeisenbergElement, f: &TorusField) -> Result<TorusField> {
    p.check(f)?;
    let (a, b) = torus_steps(f, g)?;
    let (nu, nv) = (f.nu as i64, f.nv as i64);
    let m = p.m as f64;
    let w = Complex64::new(g.y, g.x / p.kappa) * m;
    let wd = w - w.conj();
    let central = cis_turns(m * g.s);
    let mut values = Vec::with_capacity(f.values.len());
    for j in 0..nu {
        let u = j as f64 / nu as f64;
        for l in 0..nv {
            let v = l as f64 / nv as f64;
            let wp = Complex64::new(v, u / p.kappa) * m;
            let e = PI * p.kappa * (0.25 * wd * wd + w * (wp.conj() - wp)) / m;
            // keep the oscillating part reduced: Im e = −2πm·u·y
            let factor = e.re.exp() * cis_turns(-m * u * g.y);
            values.push(central * factor * peeled_extended(p, f, j - a, l - b));
        }
    }
    Ok(TorusField { values, ..*f })
}
