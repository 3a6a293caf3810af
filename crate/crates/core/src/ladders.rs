//! Derived Schrödinger representation, ladder operators and vacua.
//!
//! The ladder pair is normalised as `a± = (2πℏt ∓ κ∂ₜ)/√(4πℏκ)`, a scalar
//! multiple of `dρ^{κX∓iY}` with `[a⁻, a⁺] = I` and `(a⁻)* = a⁺`.

use crate::diff::line_derivative;
use crate::error::{Error, Result};
use crate::grids::{GridSpec1D, SampledLine, TorusField};
use crate::group::split_integer;
use crate::phase::cis_turns;
use crate::representations::{lattice_peel_exponent, LatticeParams, ReprParams};
use crate::special::{jacobi_theta_series, ThetaTruncation};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest Hermite order accepted by [`hermite_state`].
pub const MAX_HERMITE_ORDER: usize = 32;

/// `2^{1/4}`, the vacuum amplitude at the origin.
pub const VACUUM_AMPLITUDE: f64 = 1.189_207_115_002_721;

/// Basis of the Lie algebra.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DerivedDirection {
    S,
    X,
    Y,
}

/// `dρ^S = 2πiℏ`, `dρ^X = −∂ₜ`, `dρ^Y = −2πiℏt`.
pub fn derived_schrodinger(p: &ReprParams, dir: DerivedDirection, f: &SampledLine) -> SampledLine {
    match dir {
        DerivedDirection::S => {
            let c = Complex64::new(0.0, p.h());
            SampledLine { grid: f.grid, values: f.values.iter().map(|z| z * c).collect() }
        }
        DerivedDirection::X => {
            let mut d = line_derivative(f);
            d.values.iter_mut().for_each(|z| *z = -*z);
            d
        }
        DerivedDirection::Y => SampledLine {
            grid: f.grid,
            values: f
                .values
                .iter()
                .enumerate()
                .map(|(k, z)| z * Complex64::new(0.0, -p.h() * f.grid.point(k)))
                .collect(),
        },
    }
}

fn ladder(p: &ReprParams, f: &SampledLine, sign: f64) -> SampledLine {
    let d = line_derivative(f);
    let norm = 1.0 / (4.0 * PI * p.hbar * p.kappa).sqrt();
    let values = f
        .values
        .iter()
        .zip(&d.values)
        .enumerate()
        .map(|(k, (v, dv))| (v * (p.h() * f.grid.point(k)) + dv * (sign * p.kappa)) * norm)
        .collect();
    SampledLine { grid: f.grid, values }
}

/// `a⁻f = (2πℏt·f + κf′)/√(4πℏκ)`.
pub fn annihilation(p: &ReprParams, f: &SampledLine) -> SampledLine {
    ladder(p, f, 1.0)
}

/// `a⁺f = (2πℏt·f − κf′)/√(4πℏκ)`.
pub fn creation(p: &ReprParams, f: &SampledLine) -> SampledLine {
    ladder(p, f, -1.0)
}

/// `φ₀(t) = 2^{1/4} e^{−(πℏ/κ)t²}`.
pub fn vacuum_gaussian(p: &ReprParams, grid: GridSpec1D) -> SampledLine {
    let a = PI * p.hbar / p.kappa;
    let values = grid
        .points()
        .map(|t| Complex64::new(VACUUM_AMPLITUDE * (-a * t * t).exp(), 0.0))
        .collect();
    SampledLine { grid, values }
}

/// `φₙ = (a⁺)ⁿφ₀/√n!`.
pub fn hermite_state(p: &ReprParams, n: usize, grid: GridSpec1D) -> Result<SampledLine> {
    if n > MAX_HERMITE_ORDER {
        return Err(Error::OrderTooLarge(n));
    }
    let mut f = vacuum_gaussian(p, grid);
    for k in 1..=n {
        f = creation(p, &f);
        let c = 1.0 / (k as f64).sqrt();
        f.values.iter_mut().for_each(|z| *z *= c);
    }
    Ok(f)
}

/// The theta vacuum evaluated from its closed form,
/// `Φ(u,v) = 2^{1/4} e^{πκ(3ω²−ω̄²−2ωω̄)/(4m)} Θ(ω)`, `ω = m(v + iu/κ)`.
///
/// Accurate for moderate `|u|`; use [`vacuum_theta_value`] elsewhere.
pub fn vacuum_theta_closed_form(p: &LatticeParams, u: f64, v: f64, trunc: ThetaTruncation) -> Result<Complex64> {
    let m = p.m as f64;
    let omega = Complex64::new(v, u / p.kappa) * m;
    let theta = jacobi_theta_series(p.m, p.kappa, omega, trunc)?;
    let d = lattice_peel_exponent(p, u, v);
    // e^{−d} with its phase reduced as turns
    let prefactor = (-d.re).exp() * cis_turns(m * u * v);
    Ok(prefactor * theta * VACUUM_AMPLITUDE)
}

/// The theta vacuum at any point, reduced to the fundamental domain by
/// `Φ(u+n, v+k) = e^{2πimuk} Φ(u, v)`.
pub fn vacuum_theta_value(p: &LatticeParams, u: f64, v: f64, trunc: ThetaTruncation) -> Result<Complex64> {
    let (_, fu) = split_integer(u);
    let (kv, fv) = split_integer(v);
    let base = vacuum_theta_closed_form(p, fu, fv, trunc)?;
    Ok(cis_turns(p.m as f64 * fu * kv) * base)
}

/// The theta vacuum sampled on the torus grid with the default tail
/// tolerance.
pub fn vacuum_theta(p: &LatticeParams, nu: usize, nv: usize) -> Result<TorusField> {
    let trunc = ThetaTruncation::new(p.m, p.kappa, ThetaTruncation::DEFAULT_EPS)?;
    vacuum_theta_with(p, nu, nv, trunc)
}

pub fn vacuum_theta_with(p: &LatticeParams, nu: usize, nv: usize, trunc: ThetaTruncation) -> Result<TorusField> {
    let mut values = Vec::with_capacity(nu * nv);
    for j in 0..nu {
        for k in 0..nv {
            values.push(vacuum_theta_closed_form(p, j as f64 / nu as f64, k as f64 / nv as f64, trunc)?);
        }
    }
    TorusField::new(nu, nv, p.m, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diff::interior;
    use crate::grids::Field;

    fn grid() -> GridSpec1D {
        GridSpec1D::centered(8.0, 2048).unwrap()
    }

    fn interior_max(f: &SampledLine) -> f64 {
        interior(f.grid.count).map(|k| f.values[k].norm()).fold(0.0, f64::max)
    }

    #[test]
    fn derived_directions() {
        let p = ReprParams::new(1.0, 1.0).unwrap();
        let f = SampledLine::sample_real(grid(), |t| (-PI * t * t).exp()).unwrap();
        let s = derived_schrodinger(&p, DerivedDirection::S, &f);
        for (a, b) in s.values.iter().zip(&f.values) {
            assert_eq!(*a, b * Complex64::new(0.0, 2.0 * PI));
        }
        let x = derived_schrodinger(&p, DerivedDirection::X, &f);
        assert!(x.values[1024].norm() < 1e-14);
        let y = derived_schrodinger(&p, DerivedDirection::Y, &f);
        assert_eq!(y.values[1024], Complex64::new(0.0, 0.0));
    }

    #[test]
    fn vacuum_is_annihilated() {
        for (hbar, kappa) in [(1.0, 1.0), (2.0, 0.5), (0.7, 1.9)] {
            let p = ReprParams::new(hbar, kappa).unwrap();
            let phi = vacuum_gaussian(&p, grid());
            let r = interior_max(&annihilation(&p, &phi));
            assert!(r <= 1e-8 * phi.norm(), "ℏ={hbar} κ={kappa}: {r}");
        }
    }

    #[test]
    fn vacuum_values_and_norm() {
        let p = ReprParams::new(1.0, 1.0).unwrap();
        let phi = vacuum_gaussian(&p, grid());
        assert_eq!(phi.values[1024].re, 2f64.powf(0.25));
        assert!((phi.norm() - 1.0).abs() < 1e-10);
        for k in 1..1024 {
            assert_eq!(phi.values[1024 - k], phi.values[1024 + k]);
        }
        // ‖φ₀‖² = √(κ/ℏ) in general
        let p = ReprParams::new(2.0, 0.5).unwrap();
        let phi = vacuum_gaussian(&p, grid());
        assert!((phi.norm().powi(2) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn first_excited_state_is_linear_times_vacuum() {
        let p = ReprParams::new(1.0, 1.0).unwrap();
        let phi = vacuum_gaussian(&p, grid());
        let up = creation(&p, &phi);
        let slope = 4.0 * PI / (4.0 * PI).sqrt();
        for k in interior(2048).step_by(37) {
            let t = phi.grid.point(k);
            if t.abs() <= 3.0 {
                let ratio = up.values[k] / phi.values[k];
                assert!((ratio.re - slope * t).abs() < 1e-6 * (1.0 + t.abs()), "t={t}");
            }
        }
    }

    #[test]
    fn hermite_order_guard() {
        let p = ReprParams::new(1.0, 1.0).unwrap();
        assert!(matches!(hermite_state(&p, 33, grid()), Err(Error::OrderTooLarge(33))));
        assert_eq!(hermite_state(&p, 0, grid()).unwrap(), vacuum_gaussian(&p, grid()));
    }

    #[test]
    fn theta_vacuum_reduces_to_theta3_at_origin() {
        let p = LatticeParams::new(1, 1.0).unwrap();
        let t = ThetaTruncation::new(1, 1.0, 1e-14).unwrap();
        let z = vacuum_theta_closed_form(&p, 0.0, 0.0, t).unwrap() / VACUUM_AMPLITUDE;
        assert!((z.re - 1.086_434_811_213_308).abs() < 1e-13);
    }

    #[test]
    fn theta_vacuum_closed_form_is_quasi_periodic() {
        for (m, kappa) in [(1, 1.0), (2, 1.0), (3, 0.6)] {
            let p = LatticeParams::new(m, kappa).unwrap();
            let t = ThetaTruncation::new(m, kappa, 1e-14).unwrap();
            for j in 0..8 {
                for k in 0..8 {
                    let (u, v) = (j as f64 / 8.0, k as f64 / 8.0);
                    let base = vacuum_theta_closed_form(&p, u, v, t).unwrap();
                    let su = vacuum_theta_closed_form(&p, u + 1.0, v, t).unwrap();
                    let sv = vacuum_theta_closed_form(&p, u, v + 1.0, t).unwrap();
                    let sn = vacuum_theta_closed_form(&p, u - 1.0, v - 1.0, t).unwrap();
                    // Φ vanishes at (½, ½); compare against the field scale
                    let scale = VACUUM_AMPLITUDE;
                    assert!((su - base).norm() <= 1e-8 * scale, "m={m} u={u} v={v} {su} {base}");
                    assert!((sv - cis_turns(m as f64 * u) * base).norm() <= 1e-8 * scale);
                    assert!((sn - cis_turns(-(m as f64) * (u - 1.0)) * base).norm() <= 1e-8 * scale);
                }
            }
        }
    }
}
