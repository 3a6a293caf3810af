//! Covariant and contravariant transforms between the sampled spaces, and
//! the peeling maps onto the analytic pictures.
//!
//! Every output node is an independent quadrature with a fixed serial
//! summation order; output rows are distributed with rayon, so results are
//! bit-identical however many threads run.

use crate::error::{Error, Result};
use crate::grids::{Field, GridSpec1D, PlaneField, SampledLine, TorusField};
use crate::ladders::{vacuum_gaussian, vacuum_theta_with, VACUUM_AMPLITUDE};
use crate::phase::cis_turns;
use crate::representations::{lattice_peel_exponent, LatticeParams, ReprParams};
use crate::special::ThetaTruncation;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest peeling exponent modulus before the weight is considered to
/// overflow.
pub const PEEL_GUARD: f64 = 700.0;

/// Relative `L²` tail of the input allowed outside the Zak window.
pub const ZAK_TAIL_TOLERANCE: f64 = 1e-12;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Analysing vector of the pre-FSB transform.
#[derive(Clone, Debug, PartialEq)]
pub enum FiducialSpec {
    /// `φ₀ = 2^{1/4} e^{−(πℏ/κ)t²}`, with the `(ℏ/κ)^{1/2}` measure factor.
    Gaussian,
    /// Any sampled vector on the input's grid, without extra factors.
    Custom(SampledLine),
}

/// Synthesising vector of a contravariant transform.
#[derive(Clone, Debug, PartialEq)]
pub enum ReconstructionSpec {
    Gaussian,
    ThetaVacuum,
    /// The constant function `1`, paired with the Fourier picture.
    Constant,
    CustomLine(SampledLine),
    CustomTorus(TorusField),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PeelDirection {
    Forward,
    Inverse,
}

impl PeelDirection {
    fn sign(self) -> f64 {
        match self {
            PeelDirection::Forward => 1.0,
            PeelDirection::Inverse => -1.0,
        }
    }
}

fn unsupported(what: &str, spec: &ReconstructionSpec) -> Error {
    Error::Unsupported(format!("reconstruction vector {spec:?} for {what}"))
}

/// Index of the node of `grid` at `t`, or `GridIncompatible`.
fn aligned_offset(grid: &GridSpec1D, t: f64, what: &str) -> Result<i64> {
    grid.offset_of(t)
        .ok_or_else(|| Error::GridIncompatible(format!("{what}: {t} is not a node of the line grid")))
}

/// Offset of every node of `axis` in units of `1/n`, or `GridIncompatible`.
fn torus_offsets(axis: &GridSpec1D, n: usize, what: &str) -> Result<Vec<i64>> {
    let unit = GridSpec1D { origin: 0.0, step: 1.0 / n as f64, count: n };
    axis.points()
        .map(|x| {
            unit.offset_of(x).ok_or_else(|| {
                Error::GridIncompatible(format!("{what}: plane node {x} is not a multiple of 1/{n}"))
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// pre-FSB pair

/// `f̃(x,y) = ⟨f, ρ(0,x,y)φ⟩`, with the `(ℏ/κ)^{1/2}` factor for the
/// Gaussian fiducial.
pub fn covariant_pre_fsb(
    p: &ReprParams,
    phi: &FiducialSpec,
    f: &SampledLine,
    gx: GridSpec1D,
    gy: GridSpec1D,
) -> Result<PlaneField> {
    let nt = f.grid.count;
    let dt = f.grid.step;
    // window[i][t] = conj φ(t − x_i)·dt·c
    let window: Vec<Vec<f64>> = match phi {
        FiducialSpec::Gaussian => {
            let a = PI * p.hbar / p.kappa;
            let c = (p.hbar / p.kappa).sqrt() * VACUUM_AMPLITUDE * dt;
            gx.points()
                .map(|x| f.grid.points().map(|t| c * (-a * (t - x) * (t - x)).exp()).collect())
                .collect()
        }
        FiducialSpec::Custom(_) => Vec::new(),
    };
    let custom = match phi {
        FiducialSpec::Custom(v) => {
            v.check_shape(f)?;
            let offsets = gx
                .points()
                .map(|x| aligned_offset(&f.grid, f.grid.origin + x, "pre-FSB fiducial shift"))
                .collect::<Result<Vec<_>>>()?;
            Some((v, offsets))
        }
        FiducialSpec::Gaussian => None,
    };
    let table: Vec<Vec<Complex64>> = gy
        .points()
        .map(|y| f.grid.points().map(|t| cis_turns(p.hbar * t * y)).collect())
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..gx.count)
        .into_par_iter()
        .map(|i| {
            let h: Vec<Complex64> = match &custom {
                None => f.values.iter().zip(&window[i]).map(|(a, w)| a * *w).collect(),
                Some((v, offsets)) => (0..nt)
                    .map(|k| f.values[k] * v.at(k as i64 - offsets[i]).conj() * dt)
                    .collect(),
            };
            table
                .iter()
                .map(|e| h.iter().zip(e).fold(ZERO, |acc, (a, b)| acc + a * b))
                .collect()
        })
        .collect();
    PlaneField::new(gx, gy, rows.concat())
}

/// Matrix coefficient `W(f,φ)(x,y) = ⟨f, ρ(0,x,y)φ⟩` without normalisation.
pub fn matrix_coefficient(
    p: &ReprParams,
    f: &SampledLine,
    phi: &SampledLine,
    gx: GridSpec1D,
    gy: GridSpec1D,
) -> Result<PlaneField> {
    covariant_pre_fsb(p, &FiducialSpec::Custom(phi.clone()), f, gx, gy)
}

/// `[M_ψF](t) = ∫∫ F(x,y) [ρ(0,x,y)ψ](t) dx dy = ∫∫ F(x,y) e^{−2πiℏty} ψ(t−x) dx dy`.
///
/// With `ψ = φ` the composition with [`covariant_pre_fsb`] is `ℏ⁻¹·I`.
pub fn contravariant_pre_fsb_inverse(
    p: &ReprParams,
    psi: &ReconstructionSpec,
    f: &PlaneField,
    out: GridSpec1D,
) -> Result<SampledLine> {
    let (gx, gy) = (f.gx, f.gy);
    let cell = gx.step * gy.step;
    // window[i][t] = ψ(t − x_i)·cell
    let window: Vec<Vec<Complex64>> = match psi {
        ReconstructionSpec::Gaussian => {
            let phi = |z: f64| VACUUM_AMPLITUDE * (-PI * p.hbar / p.kappa * z * z).exp();
            gx.points()
                .map(|x| out.points().map(|t| Complex64::new(phi(t - x) * cell, 0.0)).collect())
                .collect()
        }
        ReconstructionSpec::CustomLine(v) => {
            if !v.grid.approx_eq(&out) {
                return Err(Error::ShapeMismatch("reconstruction vector must live on the output grid".into()));
            }
            gx.points()
                .map(|x| {
                    let d = aligned_offset(&out, out.origin + x, "pre-FSB reconstruction shift")?;
                    Ok((0..out.count).map(|k| v.at(k as i64 - d) * cell).collect())
                })
                .collect::<Result<_>>()?
        }
        other => return Err(unsupported("the pre-FSB inverse", other)),
    };
    let values: Vec<Complex64> = (0..out.count)
        .into_par_iter()
        .map(|k| {
            let t = out.point(k);
            let e: Vec<Complex64> = gy.points().map(|y| cis_turns(-p.hbar * t * y)).collect();
            let mut acc = ZERO;
            for (i, row) in f.values.chunks(gy.count).enumerate() {
                let w = window[i][k];
                if w == ZERO {
                    continue;
                }
                let s = row.iter().zip(&e).fold(ZERO, |a, (x, y)| a + x * y);
                acc += w * s;
            }
            acc
        })
        .collect();
    SampledLine::new(out, values)
}

// ---------------------------------------------------------------------------
// Fourier pair

/// `[Wf](y) = ∫ f(t) e^{2πiℏyt} dt`.
pub fn covariant_fourier_inverse(p: &ReprParams, f: &SampledLine, out: GridSpec1D) -> Result<SampledLine> {
    fourier_kernel(f, out, p.hbar)
}

/// `[Mf](t) = ∫ f(λ) e^{−2πiℏtλ} dλ`.
pub fn contravariant_fourier(p: &ReprParams, f: &SampledLine, out: GridSpec1D) -> Result<SampledLine> {
    fourier_kernel(f, out, -p.hbar)
}

/// Nodes per block of the Fourier phase recurrence.
const BLOCK: usize = 32;

fn fourier_kernel(f: &SampledLine, out: GridSpec1D, rate: f64) -> Result<SampledLine> {
    let values: Vec<Complex64> = (0..out.count)
        .into_par_iter()
        .map(|k| {
            let y = out.point(k);
            // exact phases every BLOCK nodes, exact powers in between
            let delta = rate * y * f.grid.step;
            let powers: Vec<Complex64> = (0..BLOCK).map(|r| cis_turns(delta * r as f64)).collect();
            let mut acc = ZERO;
            for (b, chunk) in f.values.chunks(BLOCK).enumerate() {
                let anchor = cis_turns(rate * y * f.grid.point(b * BLOCK));
                let mut part = ZERO;
                for (v, w) in chunk.iter().zip(&powers) {
                    part += v * w;
                }
                acc += part * anchor;
            }
            acc * f.grid.step
        })
        .collect();
    SampledLine::new(out, values)
}

// ---------------------------------------------------------------------------
// Zak pair

/// Samples of `f` per unit length, checked to be an integer multiple of
/// `nu` with integer points on the grid.
fn zak_layout(f: &SampledLine, nu: usize) -> Result<(i64, i64)> {
    let per_unit = 1.0 / f.grid.step;
    let spu = per_unit.round();
    if (per_unit - spu).abs() > 1e-9 * per_unit || spu < 1.0 {
        return Err(Error::GridIncompatible(format!(
            "line step {} is not 1/integer",
            f.grid.step
        )));
    }
    let spu = spu as i64;
    if spu % nu as i64 != 0 {
        return Err(Error::GridIncompatible(format!(
            "{spu} samples per unit are not a multiple of nu={nu}"
        )));
    }
    let zero = aligned_offset(&f.grid, 0.0, "Zak origin")?;
    Ok((spu, zero))
}

/// The co-Zak transform `[Zf](u,v) = e^{2πimuv} Σ_{|n|≤N} f(u+n) e^{2πimnv}`.
pub fn covariant_zak(p: &LatticeParams, f: &SampledLine, nu: usize, nv: usize, ntrunc: usize) -> Result<TorusField> {
    let (spu, zero) = zak_layout(f, nu)?;
    if nv == 0 {
        return Err(Error::InvalidParameter("nv must be positive".into()));
    }
    let n = ntrunc as i64;
    let (lo, hi) = (zero - n * spu, zero + (n + 1) * spu);
    let mut tail = 0.0;
    for (k, z) in f.values.iter().enumerate() {
        let k = k as i64;
        if k < lo || k >= hi {
            tail += z.norm_sqr();
        }
    }
    let total = f.norm();
    let tail = (tail * f.grid.step).sqrt();
    if total > 0.0 && tail > ZAK_TAIL_TOLERANCE * total {
        return Err(Error::SupportOverflow { tail_ratio: tail / total });
    }
    let m = p.m as f64;
    let stride = spu / nu as i64;
    let rows: Vec<Vec<Complex64>> = (0..nu)
        .into_par_iter()
        .map(|j| {
            let u = j as f64 / nu as f64;
            let base = zero + j as i64 * stride;
            (0..nv)
                .map(|l| {
                    let v = l as f64 / nv as f64;
                    let mut acc = ZERO;
                    for k in -n..=n {
                        let s = f.at(base + k * spu);
                        if s != ZERO {
                            acc += s * cis_turns(m * k as f64 * v);
                        }
                    }
                    acc * cis_turns(m * u * v)
                })
                .collect()
        })
        .collect();
    TorusField::new(nu, nv, p.m, rows.concat())
}

/// The co-Zak sum at an arbitrary point `(u, v)` with `u` on the line grid,
/// summed over every stored sample congruent to `u` modulo 1.
pub fn zak_value(p: &LatticeParams, f: &SampledLine, u: f64, v: f64) -> Result<Complex64> {
    let spu = (1.0 / f.grid.step).round() as i64;
    let (spu_check, _) = zak_layout(f, 1)?;
    debug_assert_eq!(spu, spu_check);
    let a = aligned_offset(&f.grid, u, "Zak evaluation point")?;
    let first = a.rem_euclid(spu);
    let m = p.m as f64;
    let mut acc = ZERO;
    let mut k = first;
    while (k as usize) < f.grid.count {
        let n = (k - a) / spu;
        acc += f.values[k as usize] * cis_turns(m * n as f64 * v);
        k += spu;
    }
    Ok(acc * cis_turns(m * u * v))
}

/// The inverse Zak transform `[Mg](x+n) = ∫₀¹ g(x,v) e^{−2πim(x+n)v} dv`.
pub fn contravariant_zak_inverse(p: &LatticeParams, g: &TorusField, out: GridSpec1D) -> Result<SampledLine> {
    if g.m != p.m {
        return Err(Error::IndexMismatch { field: g.m, params: p.m });
    }
    let unit = GridSpec1D { origin: 0.0, step: 1.0 / g.nu as f64, count: g.nu };
    let m = p.m as f64;
    let values = out
        .points()
        .map(|t| {
            let a = unit
                .offset_of(t)
                .ok_or_else(|| Error::GridIncompatible(format!("output node {t} is not on the torus u-grid")))?;
            let j = a.rem_euclid(g.nu as i64) as usize;
            let mut acc = ZERO;
            for l in 0..g.nv {
                acc += g.get(j, l) * cis_turns(-m * t * g.v(l));
            }
            Ok(acc / g.nv as f64)
        })
        .collect::<Result<Vec<_>>>()?;
    SampledLine::new(out, values)
}

// ---------------------------------------------------------------------------
// pre-theta pair

/// Residue classes of plane `y` offsets modulo `nv`, with the quotient of
/// every node.
struct Residues {
    classes: Vec<usize>,
    class_of: Vec<usize>,
    quotient: Vec<i64>,
}

impl Residues {
    fn new(offsets: &[i64], nv: usize) -> Self {
        let mut slot = vec![usize::MAX; nv];
        let mut classes = Vec::new();
        let mut class_of = Vec::with_capacity(offsets.len());
        let mut quotient = Vec::with_capacity(offsets.len());
        for &b in offsets {
            let r = b.rem_euclid(nv as i64) as usize;
            if slot[r] == usize::MAX {
                slot[r] = classes.len();
                classes.push(r);
            }
            class_of.push(slot[r]);
            quotient.push(b.div_euclid(nv as i64));
        }
        Self { classes, class_of, quotient }
    }
}

fn dot_conj(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x * y.conj())
}

fn theta_fiducial(p: &LatticeParams, nu: usize, nv: usize, eps: f64) -> Result<TorusField> {
    vacuum_theta_with(p, nu, nv, ThetaTruncation::new(p.m, p.kappa, eps)?)
}

/// The pre-theta transform `f̃(x,y) = ⟨f, ρ_m(0,x,y)Φ⟩` with the theta
/// vacuum `Φ` as fiducial vector. Plane nodes must be multiples of the
/// torus steps.
pub fn covariant_pre_theta(p: &LatticeParams, f: &TorusField, gx: GridSpec1D, gy: GridSpec1D) -> Result<PlaneField> {
    covariant_pre_theta_eps(p, f, gx, gy, ThetaTruncation::DEFAULT_EPS)
}

pub fn covariant_pre_theta_eps(
    p: &LatticeParams,
    f: &TorusField,
    gx: GridSpec1D,
    gy: GridSpec1D,
    eps: f64,
) -> Result<PlaneField> {
    if f.m != p.m {
        return Err(Error::IndexMismatch { field: f.m, params: p.m });
    }
    let phi = theta_fiducial(p, f.nu, f.nv, eps)?;
    covariant_lattice_with(p, &phi, f, gx, gy)
}

/// `⟨f, ρ_m(0,x,y)φ⟩` for an arbitrary torus fiducial `φ`.
pub fn covariant_lattice_with(
    p: &LatticeParams,
    phi: &TorusField,
    f: &TorusField,
    gx: GridSpec1D,
    gy: GridSpec1D,
) -> Result<PlaneField> {
    phi.check_shape(f)?;
    let (nu, nv) = (f.nu, f.nv);
    let m = p.m as f64;
    let xa = torus_offsets(&gx, nu, "pre-theta x")?;
    let yb = torus_offsets(&gy, nv, "pre-theta y")?;
    let res = Residues::new(&yb, nv);
    let cell = 1.0 / (nu * nv) as f64;
    // wrap[j] = e^{2πim·j/nu}, the phase picked up by Φ one period down in v
    let wrap: Vec<Complex64> = (0..nu).map(|j| cis_turns(m * j as f64 / nu as f64)).collect();
    let rows: Vec<Vec<Complex64>> = (0..gx.count)
        .into_par_iter()
        .map(|i| {
            let a = xa[i];
            let x = gx.point(i);
            // g[j][k] = f[j,k]·e^{−2πimx·v_k}
            let shift: Vec<Complex64> = (0..nv).map(|k| cis_turns(-m * x * k as f64 / nv as f64)).collect();
            // c[j][class] = Σ_k g[j,k]·conj Φ_ext(jr, k − r)
            let mut c = vec![ZERO; nu * res.classes.len()];
            let mut g = vec![ZERO; nv];
            for j in 0..nu {
                let jr = (j as i64 - a).rem_euclid(nu as i64) as usize;
                let row = &f.values[j * nv..(j + 1) * nv];
                for k in 0..nv {
                    g[k] = row[k] * shift[k];
                }
                let prow = &phi.values[jr * nv..(jr + 1) * nv];
                for (ci, &r) in res.classes.iter().enumerate() {
                    let upper = dot_conj(&g[r..], &prow[..nv - r]);
                    let lower = dot_conj(&g[..r], &prow[nv - r..]);
                    c[j * res.classes.len() + ci] = upper + lower * wrap[jr];
                }
            }
            (0..gy.count)
                .map(|jy| {
                    let (ci, q) = (res.class_of[jy], res.quotient[jy]);
                    let mut acc = ZERO;
                    for j in 0..nu {
                        let jr = (j as i64 - a).rem_euclid(nu as i64);
                        let num = (p.m as i128 * jr as i128 * q as i128).rem_euclid(nu as i128);
                        acc += c[j * res.classes.len() + ci] * cis_turns(num as f64 / nu as f64);
                    }
                    acc * cis_turns(m * x * gy.point(jy)) * cell
                })
                .collect()
        })
        .collect();
    PlaneField::new(gx, gy, rows.concat())
}

/// The inverse pre-theta transform
/// `M(F)(u,v) = ∫∫ F(x,y)·[ρ_m(0,x,y)ψ](u,v) dx dy` with `ψ` the theta vacuum
/// or a custom torus vector. Composed with [`covariant_pre_theta`] and
/// `ψ = Φ` it gives `(‖Φ‖²/m)·I`.
pub fn contravariant_pre_theta_inverse(
    p: &LatticeParams,
    psi: &ReconstructionSpec,
    f: &PlaneField,
    nu: usize,
    nv: usize,
) -> Result<TorusField> {
    contravariant_pre_theta_inverse_eps(p, psi, f, nu, nv, ThetaTruncation::DEFAULT_EPS)
}

pub fn contravariant_pre_theta_inverse_eps(
    p: &LatticeParams,
    psi: &ReconstructionSpec,
    f: &PlaneField,
    nu: usize,
    nv: usize,
    eps: f64,
) -> Result<TorusField> {
    let psi = match psi {
        ReconstructionSpec::ThetaVacuum => theta_fiducial(p, nu, nv, eps)?,
        ReconstructionSpec::CustomTorus(t) => {
            if t.nu != nu || t.nv != nv || t.m != p.m {
                return Err(Error::ShapeMismatch(format!(
                    "reconstruction vector {}x{} m={} for a {nu}x{nv} m={} output",
                    t.nu, t.nv, t.m, p.m
                )));
            }
            t.clone()
        }
        other => return Err(unsupported("the pre-theta inverse", other)),
    };
    let (gx, gy) = (f.gx, f.gy);
    let m = p.m as f64;
    let xa = torus_offsets(&gx, nu, "pre-theta x")?;
    let yb = torus_offsets(&gy, nv, "pre-theta y")?;
    let res = Residues::new(&yb, nv);
    let ncls = res.classes.len();
    let cell = gx.step * gy.step;
    // h[i][jy] = F(x,y)·e^{−2πimxy}·cell
    let h: Vec<Complex64> = (0..gx.count)
        .flat_map(|i| {
            let x = gx.point(i);
            let row = &f.values[i * gy.count..(i + 1) * gy.count];
            gy.points()
                .zip(row)
                .map(move |(y, z)| z * cis_turns(-m * x * y) * cell)
                .collect::<Vec<_>>()
        })
        .collect();
    let rows: Vec<Vec<Complex64>> = (0..nu)
        .into_par_iter()
        .map(|j| {
            let mut out = vec![ZERO; nv];
            let mut a_row = vec![ZERO; ncls];
            let mut tmp = vec![ZERO; nv];
            for i in 0..gx.count {
                let a = xa[i];
                let x = gx.point(i);
                let jr = (j as i64 - a).rem_euclid(nu as i64) as usize;
                // A[class] = Σ_{y in class} h·e^{−2πim·jr·q/nu}
                a_row.iter_mut().for_each(|z| *z = ZERO);
                let hrow = &h[i * gy.count..(i + 1) * gy.count];
                for jy in 0..gy.count {
                    let q = res.quotient[jy];
                    let num = (p.m as i128 * jr as i128 * q as i128).rem_euclid(nu as i128);
                    a_row[res.class_of[jy]] += hrow[jy] * cis_turns(-(num as f64) / nu as f64);
                }
                // tmp[k] = Σ_class A·Φ_ext(jr, k − r)
                let prow = &psi.values[jr * nv..(jr + 1) * nv];
                let wrap = cis_turns(-m * jr as f64 / nu as f64);
                tmp.iter_mut().for_each(|z| *z = ZERO);
                for (ci, &r) in res.classes.iter().enumerate() {
                    let w = a_row[ci];
                    if w == ZERO {
                        continue;
                    }
                    let ww = w * wrap;
                    for k in 0..r {
                        tmp[k] += ww * prow[k + nv - r];
                    }
                    for k in r..nv {
                        tmp[k] += w * prow[k - r];
                    }
                }
                for k in 0..nv {
                    out[k] += tmp[k] * cis_turns(m * x * k as f64 / nv as f64);
                }
            }
            out
        })
        .collect();
    TorusField::new(nu, nv, p.m, rows.concat())
}

// ---------------------------------------------------------------------------
// peelings

fn guarded(d: Complex64) -> Result<()> {
    if d.norm() > PEEL_GUARD {
        Err(Error::OverflowGuard { exponent: d.norm() })
    } else {
        Ok(())
    }
}

/// FSB peeling exponent `d = (h/4κ)(x² + κ²y² − 2iκxy)`.
pub fn fsb_peel_exponent(p: &ReprParams, x: f64, y: f64) -> Complex64 {
    let c = p.h() / (4.0 * p.kappa);
    Complex64::new(c * (x * x + p.kappa * p.kappa * y * y), -c * 2.0 * p.kappa * x * y)
}

/// Multiplication by `e^{±d(x,y)}`.
pub fn peel_fsb(p: &ReprParams, f: &PlaneField, direction: PeelDirection) -> Result<PlaneField> {
    let s = direction.sign();
    let mut out = f.clone();
    for i in 0..f.gx.count {
        let x = f.gx.point(i);
        for j in 0..f.gy.count {
            let y = f.gy.point(j);
            let d = fsb_peel_exponent(p, x, y);
            guarded(d)?;
            // Im d = −πℏxy, kept as turns
            let w = (s * d.re).exp() * cis_turns(-s * p.hbar * x * y / 2.0);
            out.values[i * f.gy.count + j] *= w;
        }
    }
    Ok(out)
}

/// Multiplication by `e^{±πℏt²/κ}`.
pub fn peel_schrodinger(p: &ReprParams, f: &SampledLine, direction: PeelDirection) -> Result<SampledLine> {
    let s = direction.sign();
    let a = PI * p.hbar / p.kappa;
    let mut out = f.clone();
    for (k, t) in f.grid.points().enumerate() {
        let d = a * t * t;
        guarded(Complex64::new(d, 0.0))?;
        out.values[k] *= (s * d).exp();
    }
    Ok(out)
}

/// Multiplication by `e^{±d}`, `d = −πκ(3ω²−ω̄²−2ωω̄)/(4m)`, `ω = m(v + iu/κ)`.
pub fn peel_lattice(p: &LatticeParams, f: &TorusField, direction: PeelDirection) -> Result<TorusField> {
    if f.m != p.m {
        return Err(Error::IndexMismatch { field: f.m, params: p.m });
    }
    let s = direction.sign();
    let m = p.m as f64;
    let mut out = f.clone();
    for j in 0..f.nu {
        let u = f.u(j);
        for k in 0..f.nv {
            let v = f.v(k);
            let d = lattice_peel_exponent(p, u, v);
            guarded(d)?;
            let w = (s * d.re).exp() * cis_turns(-s * m * u * v);
            out.values[j * f.nv + k] *= w;
        }
    }
    Ok(out)
}

/// The FSB transform: peeled pre-FSB transform with the Gaussian fiducial.
pub fn fsb_transform(p: &ReprParams, f: &SampledLine, gx: GridSpec1D, gy: GridSpec1D) -> Result<PlaneField> {
    let pre = covariant_pre_fsb(p, &FiducialSpec::Gaussian, f, gx, gy)?;
    peel_fsb(p, &pre, PeelDirection::Forward)
}

/// The theta transform: peeled pre-theta transform.
pub fn theta_transform(p: &LatticeParams, f: &TorusField, gx: GridSpec1D, gy: GridSpec1D) -> Result<PlaneField> {
    let pre = covariant_pre_theta(p, f, gx, gy)?;
    peel_fsb(&p.as_repr(), &pre, PeelDirection::Forward)
}

/// Evaluates the lattice intertwining condition for a reconstruction vector
/// on the line, `e^{2πim(t−{x})[y]} ψ(t−{x}) − ψ(t−x)`, and returns its
/// largest modulus relative to `max |ψ|`. Shifts must be grid-aligned.
pub fn lattice_condition_residual(p: &LatticeParams, psi: &SampledLine, x: f64, y: f64) -> Result<f64> {
    let (iy, _) = crate::group::split_integer(y);
    let (_, fx) = crate::group::split_integer(x);
    let dfx = psi.grid.steps_of(fx)?;
    let dx = psi.grid.steps_of(x)?;
    let m = p.m as f64;
    let mut worst: f64 = 0.0;
    for (k, t) in psi.grid.points().enumerate() {
        let k = k as i64;
        let lhs = cis_turns(m * (t - fx) * iy) * psi.at(k - dfx);
        worst = worst.max((lhs - psi.at(k - dx)).norm());
    }
    let scale = psi.max_abs();
    Ok(if scale > 0.0 { worst / scale } else { 0.0 })
}

/// The Gaussian vacuum with the pre-FSB measure factor folded in, so that
/// `matrix_coefficient(f, scaled)` equals `covariant_pre_fsb(Gaussian, f)`.
pub fn scaled_gaussian_fiducial(p: &ReprParams, grid: GridSpec1D) -> SampledLine {
    vacuum_gaussian(p, grid).scale(Complex64::new((p.hbar / p.kappa).sqrt(), 0.0))
}

/// `⟨f, ρ_m(0,x,y)φ⟩` evaluated directly from the defining sum at one
/// grid-aligned point, reading `φ` through its quasi-periodic extension.
pub fn covariant_lattice_at(p: &LatticeParams, phi: &TorusField, f: &TorusField, x: f64, y: f64) -> Result<Complex64> {
    phi.check_shape(f)?;
    let m = p.m as f64;
    let mut acc = ZERO;
    for j in 0..f.nu {
        for k in 0..f.nv {
            let (u, v) = (f.u(j), f.v(k));
            let kernel = cis_turns(m * x * (v - y)) * phi.quasi_periodic_eval(u - x, v - y)?;
            acc += f.get(j, k) * kernel.conj();
        }
    }
    Ok(acc * f.cell())
}

/// `∫∫ F(x,y)·[ρ_m(0,x,y)ψ](u,v) dx dy` evaluated directly at one point
/// `(u, v)`, which may lie outside the fundamental domain.
pub fn contravariant_lattice_at(p: &LatticeParams, psi: &TorusField, f: &PlaneField, u: f64, v: f64) -> Result<Complex64> {
    let m = p.m as f64;
    let mut acc = ZERO;
    for i in 0..f.gx.count {
        let x = f.gx.point(i);
        for j in 0..f.gy.count {
            let y = f.gy.point(j);
            let z = f.get(i, j);
            if z != ZERO {
                acc += z * cis_turns(m * x * (v - y)) * psi.quasi_periodic_eval(u - x, v - y)?;
            }
        }
    }
    Ok(acc * f.cell())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ladders::{hermite_state, vacuum_theta};

    fn line() -> GridSpec1D {
        GridSpec1D::centered(8.0, 2048).unwrap()
    }

    fn small_plane() -> (GridSpec1D, GridSpec1D) {
        (GridSpec1D::centered(3.0, 48).unwrap(), GridSpec1D::centered(2.0, 32).unwrap())
    }

    fn unit() -> ReprParams {
        ReprParams::new(1.0, 1.0).unwrap()
    }

    fn bump(grid: GridSpec1D) -> SampledLine {
        SampledLine::sample(grid, |t| cis_turns(0.3 * t) * (-PI * (t - 0.2).powi(2)).exp()).unwrap()
    }

    #[test]
    fn pre_fsb_of_vacuum_at_origin_is_one() {
        let (gx, gy) = (GridSpec1D::centered(1.0, 4).unwrap(), GridSpec1D::centered(1.0, 4).unwrap());
        let p = unit();
        let w = covariant_pre_fsb(&p, &FiducialSpec::Gaussian, &vacuum_gaussian(&p, line()), gx, gy).unwrap();
        assert!((w.get(2, 2) - 1.0).norm() < 1e-8, "{}", w.get(2, 2));
        let zero = covariant_pre_fsb(&p, &FiducialSpec::Gaussian, &SampledLine::zeros(line()), gx, gy).unwrap();
        assert!(zero.values.iter().all(|z| *z == ZERO));
    }

    #[test]
    fn pre_fsb_is_linear_and_matches_scaled_matrix_coefficient() {
        let p = ReprParams::new(1.5, 0.8).unwrap();
        let (gx, gy) = small_plane();
        let f = bump(line());
        let g = hermite_state(&p, 2, line()).unwrap();
        let (a, b) = (Complex64::new(0.3, -1.1), Complex64::new(2.0, 0.5));
        let w = |f: &SampledLine| covariant_pre_fsb(&p, &FiducialSpec::Gaussian, f, gx, gy).unwrap();
        let lhs = w(&f.clone().scale(a).axpy(b, &g).unwrap());
        let rhs = w(&f).scale(a).axpy(b, &w(&g)).unwrap();
        assert!(lhs.distance(&rhs).unwrap() <= 1e-12 * rhs.norm());
        let mc = matrix_coefficient(&p, &f, &scaled_gaussian_fiducial(&p, line()), gx, gy).unwrap();
        assert!(mc.distance(&w(&f)).unwrap() <= 1e-12 * mc.norm());
        let zero = matrix_coefficient(&p, &SampledLine::zeros(line()), &g, gx, gy).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn custom_fiducial_on_another_grid_is_rejected() {
        let p = unit();
        let (gx, gy) = small_plane();
        let other = vacuum_gaussian(&p, GridSpec1D::centered(8.0, 1024).unwrap());
        let r = covariant_pre_fsb(&p, &FiducialSpec::Custom(other), &bump(line()), gx, gy);
        assert!(matches!(r, Err(Error::ShapeMismatch(_))));
    }

    #[test]
    fn contravariant_pre_fsb_zero_and_linearity() {
        let p = unit();
        let (gx, gy) = small_plane();
        let out = GridSpec1D::centered(4.0, 64).unwrap();
        let m = |f: &PlaneField| contravariant_pre_fsb_inverse(&p, &ReconstructionSpec::Gaussian, f, out).unwrap();
        assert_eq!(m(&PlaneField::zeros(gx, gy)).max_abs(), 0.0);
        let f = PlaneField::sample(gx, gy, |x, y| Complex64::new(x, y * x) * (-(x * x + y * y)).exp()).unwrap();
        let g = PlaneField::sample(gx, gy, |x, y| Complex64::new(1.0, -y) * (-(x * x + 2.0 * y * y)).exp()).unwrap();
        let a = Complex64::new(0.7, 0.2);
        let lhs = m(&f.clone().scale(a).axpy(Complex64::new(1.0, 0.0), &g).unwrap());
        let rhs = m(&f).scale(a).axpy(Complex64::new(1.0, 0.0), &m(&g)).unwrap();
        assert!(lhs.distance(&rhs).unwrap() <= 1e-12 * rhs.norm());
    }

    #[test]
    fn zak_indicator_has_unit_modulus() {
        let p = LatticeParams::new(1, 1.0).unwrap();
        let ind = SampledLine::sample_real(line(), |t| if (0.0..1.0).contains(&t) { 1.0 } else { 0.0 }).unwrap();
        let z = covariant_zak(&p, &ind, 128, 16, 16).unwrap();
        for v in &z.values {
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn zak_errors() {
        let p = LatticeParams::new(1, 1.0).unwrap();
        let f = vacuum_gaussian(&p.as_repr(), line());
        assert!(matches!(covariant_zak(&p, &f, 96, 8, 16), Err(Error::GridIncompatible(_))));
        let wide = SampledLine::sample_real(line(), |t| (-0.05 * t * t).exp()).unwrap();
        assert!(matches!(covariant_zak(&p, &wide, 128, 8, 2), Err(Error::SupportOverflow { .. })));
        let g = TorusField::zeros(128, 16, 1);
        assert_eq!(contravariant_zak_inverse(&p, &g, line()).unwrap().max_abs(), 0.0);
        let odd = GridSpec1D::new(0.001, 1.0 / 128.0, 64).unwrap();
        assert!(matches!(contravariant_zak_inverse(&p, &g, odd), Err(Error::GridIncompatible(_))));
    }

    #[test]
    fn zak_of_vacuum_is_theta_vacuum() {
        for (m, kappa) in [(1, 1.0), (2, 0.7)] {
            let p = LatticeParams::new(m, kappa).unwrap();
            let z = covariant_zak(&p, &vacuum_gaussian(&p.as_repr(), line()), 64, 32, 16).unwrap();
            let theta = vacuum_theta(&p, 64, 32).unwrap();
            assert!(z.distance(&theta).unwrap() <= 1e-10 * theta.norm(), "m={m}");
        }
    }

    #[test]
    fn pre_theta_of_vacuum_at_origin_is_its_norm() {
        let p = LatticeParams::new(1, 1.0).unwrap();
        let phi = vacuum_theta(&p, 32, 32).unwrap();
        let g = GridSpec1D::centered(0.5, 4).unwrap();
        let w = covariant_pre_theta(&p, &phi, g, g).unwrap();
        let at0 = w.get(2, 2);
        assert!((at0.re - phi.norm().powi(2)).abs() < 1e-10 && at0.im.abs() < 1e-10, "{at0}");
        let zero = covariant_pre_theta(&p, &TorusField::zeros(32, 32, 1), g, g).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
        let wrong = TorusField::zeros(32, 32, 2);
        assert!(matches!(covariant_pre_theta(&p, &wrong, g, g), Err(Error::IndexMismatch { field: 2, params: 1 })));
        let off = GridSpec1D::new(0.01, 0.25, 4).unwrap();
        assert!(matches!(covariant_pre_theta(&p, &phi, off, g), Err(Error::GridIncompatible(_))));
    }

    #[test]
    fn lattice_fast_paths_match_direct_sums() {
        let p = LatticeParams::new(2, 0.9).unwrap();
        let (nu, nv) = (8, 16);
        let phi = vacuum_theta(&p, nu, nv).unwrap();
        let f = TorusField::sample(nu, nv, 2, |u, v| Complex64::new((3.0 * u).sin() + v, u * v - 0.5)).unwrap();
        let gx = GridSpec1D::new(-1.5, 0.125, 24).unwrap();
        let gy = GridSpec1D::new(-1.0, 0.0625, 32).unwrap();
        let fast = covariant_lattice_with(&p, &phi, &f, gx, gy).unwrap();
        let scale = fast.max_abs();
        for i in (0..gx.count).step_by(5) {
            for j in (0..gy.count).step_by(7) {
                let direct = covariant_lattice_at(&p, &phi, &f, gx.point(i), gy.point(j)).unwrap();
                assert!((fast.get(i, j) - direct).norm() <= 1e-12 * scale);
            }
        }
        let back = contravariant_pre_theta_inverse(&p, &ReconstructionSpec::CustomTorus(phi.clone()), &fast, nu, nv).unwrap();
        let scale = back.max_abs();
        for j in 0..nu {
            for k in (0..nv).step_by(3) {
                let direct = contravariant_lattice_at(&p, &phi, &fast, back.u(j), back.v(k)).unwrap();
                assert!((back.get(j, k) - direct).norm() <= 1e-12 * scale);
            }
        }
        let zero = contravariant_pre_theta_inverse(&p, &ReconstructionSpec::ThetaVacuum, &PlaneField::zeros(gx, gy), nu, nv).unwrap();
        assert_eq!(zero.max_abs(), 0.0);
    }

    #[test]
    fn fourier_gaussian_self_duality() {
        let p = unit();
        let g = SampledLine::sample_real(line(), |t| (-PI * t * t).exp()).unwrap();
        let w = covariant_fourier_inverse(&p, &g, line()).unwrap();
        let m = contravariant_fourier(&p, &g, line()).unwrap();
        for (k, y) in line().points().enumerate() {
            let want = (-PI * y * y).exp();
            assert!((w.values[k] - want).norm() < 1e-12);
            assert!((m.values[k] - want).norm() < 1e-12);
            assert!(w.values[k].im.abs() < 1e-12);
        }
        let f = bump(line());
        let back = contravariant_fourier(&p, &covariant_fourier_inverse(&p, &f, line()).unwrap(), line()).unwrap();
        assert!(back.distance(&f).unwrap() <= 1e-7 * f.norm());
    }

    #[test]
    fn fourier_blocks_match_the_plain_sum() {
        let p = ReprParams::new(1.3, 1.0).unwrap();
        let grid = GridSpec1D::centered(5.0, 100).unwrap();
        let f = bump(grid);
        let out = GridSpec1D::new(-2.0, 0.37, 11).unwrap();
        let w = covariant_fourier_inverse(&p, &f, out).unwrap();
        for (k, y) in out.points().enumerate() {
            let plain: Complex64 = grid.points().zip(&f.values).map(|(t, v)| v * cis_turns(1.3 * y * t)).sum::<Complex64>() * grid.step;
            assert!((w.values[k] - plain).norm() < 1e-13);
        }
    }

    #[test]
    fn peelings_invert_and_guard() {
        let p = unit();
        let f = bump(line());
        let back = peel_schrodinger(&p, &peel_schrodinger(&p, &f, PeelDirection::Forward).unwrap(), PeelDirection::Inverse).unwrap();
        assert!(back.distance(&f).unwrap() <= 1e-14 * f.norm());
        let vac = peel_schrodinger(&p, &vacuum_gaussian(&p, line()), PeelDirection::Forward).unwrap();
        assert!(vac.values.iter().all(|z| (z - VACUUM_AMPLITUDE).norm() < 1e-14));
        let huge = GridSpec1D::centered(20.0, 64).unwrap();
        assert!(matches!(
            peel_schrodinger(&p, &SampledLine::zeros(huge), PeelDirection::Forward),
            Err(Error::OverflowGuard { .. })
        ));
        assert!(matches!(
            peel_fsb(&p, &PlaneField::zeros(huge, huge), PeelDirection::Inverse),
            Err(Error::OverflowGuard { .. })
        ));
    }

    #[test]
    fn fsb_exponent_has_the_expected_imaginary_part() {
        let p = ReprParams::new(0.7, 1.4).unwrap();
        for (x, y) in [(0.3, -1.2), (2.0, 0.5), (-1.0, -1.0)] {
            let d = fsb_peel_exponent(&p, x, y);
            assert!((d.im + PI * p.hbar * x * y).abs() < 1e-14);
            assert!((d.re - PI * p.hbar * (x * x + p.kappa * p.kappa * y * y) / (2.0 * p.kappa)).abs() < 1e-12);
        }
    }

    #[test]
    fn transforms_are_compositions() {
        let p = unit();
        let (gx, gy) = small_plane();
        let f = bump(line());
        let direct = fsb_transform(&p, &f, gx, gy).unwrap();
        let composed = peel_fsb(&p, &covariant_pre_fsb(&p, &FiducialSpec::Gaussian, &f, gx, gy).unwrap(), PeelDirection::Forward).unwrap();
        assert_eq!(direct, composed);
        let lp = LatticeParams::new(1, 1.0).unwrap();
        let t = vacuum_theta(&lp, 16, 16).unwrap();
        let g = GridSpec1D::new(-1.0, 0.125, 16).unwrap();
        let direct = theta_transform(&lp, &t, g, g).unwrap();
        let composed = peel_fsb(&p, &covariant_pre_theta(&lp, &t, g, g).unwrap(), PeelDirection::Forward).unwrap();
        assert_eq!(direct, composed);
    }

    #[test]
    fn lattice_condition_holds_only_for_integer_shifts() {
        let lp = LatticeParams::new(1, 1.0).unwrap();
        let psi = vacuum_gaussian(&lp.as_repr(), line());
        assert!(lattice_condition_residual(&lp, &psi, 0.0, 0.0).unwrap() < 1e-15);
        assert!(lattice_condition_residual(&lp, &psi, 0.5, 1.0).unwrap() > 0.1);
    }

    #[test]
    fn pre_fsb_roundtrip_scales_by_inverse_hbar() {
        for (hbar, kappa) in [(1.0, 1.0), (2.0, 0.5), (0.5, 1.5)] {
            let p = ReprParams::new(hbar, kappa).unwrap();
            let g = GridSpec1D::centered(6.0, 192).unwrap();
            let f = SampledLine::sample(g, |t| cis_turns(0.25 * t) * (-PI * (t - 0.3).powi(2)).exp()).unwrap();
            let w = covariant_pre_fsb(&p, &FiducialSpec::Gaussian, &f, g, g).unwrap();
            let back = contravariant_pre_fsb_inverse(&p, &ReconstructionSpec::Gaussian, &w, f.grid).unwrap();
            let scaled = back.scale(Complex64::new(hbar, 0.0));
            assert!(scaled.distance(&f).unwrap() <= 1e-6 * f.norm(), "ℏ={hbar} κ={kappa}");
        }
    }
}
