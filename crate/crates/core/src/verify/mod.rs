//! Defect metrics that turn each identity into a single relative number.

pub mod suites;

use crate::diff::{interior, plane_dx, plane_dy};
use crate::error::Result;
use crate::grids::{Field, GridSpec1D, PlaneField, SampledLine, TorusField};
use crate::group::HeisenbergElement;
use crate::ladders::annihilation;
use crate::representations::{LatticeParams, ReprParams};
use crate::transforms::fsb_peel_exponent;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use std::collections::BTreeMap;

/// One measured defect against its tolerance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub metadata: BTreeMap<String, Value>,
}

impl DefectReport {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
            pass: value.is_finite() && value <= tolerance,
            metadata: BTreeMap::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn note(&mut self, key: &str, value: impl Into<Value>) -> &mut Self {
        self.metadata.insert(key.to_string(), value.into());
        self
    }

    pub fn with_element(self, key: &str, g: &HeisenbergElement) -> Self {
        self.with(key, vec![g.s, g.x, g.y])
    }
}

/// `diff / scale`, with `0/0 = 0`.
pub fn relative(diff: f64, scale: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else {
        diff / scale
    }
}

/// `‖W(ρ(g)f) − ρ_χ(g)Wf‖ / ‖f‖` for one group element.
pub fn intertwining_defect<S: Field, T: Field>(
    name: &str,
    g: &HeisenbergElement,
    source_act: impl Fn(&HeisenbergElement, &S) -> Result<S>,
    transform: impl Fn(&S) -> Result<T>,
    target_act: impl Fn(&HeisenbergElement, &T) -> Result<T>,
    f: &S,
    tolerance: f64,
) -> Result<DefectReport> {
    let lhs = transform(&source_act(g, f)?)?;
    let rhs = target_act(g, &transform(f)?)?;
    let value = relative(lhs.distance(&rhs)?, f.norm());
    Ok(DefectReport::new(name, value, tolerance).with_element("g", g))
}

/// `‖B(F(f)) − f‖ / ‖f‖`.
pub fn roundtrip_error<S: Field, T>(
    name: &str,
    forward: impl Fn(&S) -> Result<T>,
    backward: impl Fn(&T) -> Result<S>,
    f: &S,
    tolerance: f64,
) -> Result<DefectReport> {
    let back = backward(&forward(f)?)?;
    Ok(DefectReport::new(name, relative(back.distance(f)?, f.norm()), tolerance))
}

/// `|‖Tf‖ − ‖f‖| / ‖f‖`.
pub fn unitarity_defect<S: Field, T: Field>(
    name: &str,
    transform: impl Fn(&S) -> Result<T>,
    f: &S,
    tolerance: f64,
) -> Result<DefectReport> {
    let image = transform(f)?;
    Ok(DefectReport::new(name, relative((image.norm() - f.norm()).abs(), f.norm()), tolerance))
}

/// Which annihilation identity a residual measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum AnnihilationKind {
    /// `(κ∂ₓ + 2πℏx + i∂ᵧ)F = 0` on pre-FSB images.
    PreFsbLie,
    /// `(κ∂ₓ + i∂ᵧ)F = 0` on peeled FSB images.
    CrAfterPeel,
    /// `a⁻φ₀ = 0` on the line.
    SchrodingerLadder,
    /// `∂_ω̄F = 0` on peeled lattice images.
    LatticeAfterPeel,
}

/// A field handed to [`annihilation_residual`].
#[derive(Clone, Copy, Debug)]
pub enum FieldRef<'a> {
    Line(&'a SampledLine),
    Plane(&'a PlaneField),
    Torus(&'a TorusField),
}

/// Parameters of a residual measurement.
#[derive(Clone, Copy, Debug)]
pub struct ResidualOptions {
    pub tolerance: f64,
    /// For plane fields, restricts the norm to nodes with `Re d ≤ dmax`
    /// where `d` is the FSB peeling exponent. Outside that window rounding
    /// noise is amplified by `e^{Re d}`.
    pub dmax: Option<f64>,
}

fn plane_mask(p: &ReprParams, f: &PlaneField, dmax: Option<f64>) -> Vec<bool> {
    let (ix, iy) = (interior(f.gx.count), interior(f.gy.count));
    let mut mask = vec![false; f.values.len()];
    for i in ix {
        let x = f.gx.point(i);
        for j in iy.clone() {
            let y = f.gy.point(j);
            let inside = match dmax {
                Some(d) => fsb_peel_exponent(p, x, y).re <= d,
                None => true,
            };
            mask[i * f.gy.count + j] = inside;
        }
    }
    mask
}

fn masked_ratio(residual: &[Complex64], field: &[Complex64], mask: &[bool]) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for ((r, v), m) in residual.iter().zip(field).zip(mask) {
        if *m {
            num += r.norm_sqr();
            den += v.norm_sqr();
        }
    }
    relative(num.sqrt(), den.sqrt())
}

/// Interior norm of the annihilation operator applied to `field`, relative
/// to the field norm over the same nodes (line residuals use the max norm
/// relative to `‖f‖`).
pub fn annihilation_residual(
    name: &str,
    kind: AnnihilationKind,
    p: &ReprParams,
    field: FieldRef<'_>,
    opts: ResidualOptions,
) -> Result<DefectReport> {
    let value = match (kind, field) {
        (AnnihilationKind::SchrodingerLadder, FieldRef::Line(f)) => {
            let r = annihilation(p, f);
            let worst = interior(f.grid.count).map(|k| r.values[k].norm()).fold(0.0, f64::max);
            relative(worst, f.norm())
        }
        (AnnihilationKind::PreFsbLie, FieldRef::Plane(f)) | (AnnihilationKind::CrAfterPeel, FieldRef::Plane(f)) => {
            let dx = plane_dx(f);
            let dy = plane_dy(f);
            let with_x = kind == AnnihilationKind::PreFsbLie;
            let ny = f.gy.count;
            let residual: Vec<Complex64> = (0..f.values.len())
                .map(|idx| {
                    let mut r = dx[idx] * p.kappa + Complex64::i() * dy[idx];
                    if with_x {
                        r += f.values[idx] * (p.h() * f.gx.point(idx / ny));
                    }
                    r
                })
                .collect();
            masked_ratio(&residual, &f.values, &plane_mask(p, f, opts.dmax))
        }
        (AnnihilationKind::LatticeAfterPeel, FieldRef::Torus(f)) => {
            // ∂_ω̄ = (∂ᵥ + iκ∂ᵤ)/(2m) with ω = m(v + iu/κ)
            let plane = torus_as_plane(f)?;
            let du = plane_dx(&plane);
            let dv = plane_dy(&plane);
            let m = f.m as f64;
            let residual: Vec<Complex64> = du
                .iter()
                .zip(&dv)
                .map(|(a, b)| (b + Complex64::i() * p.kappa * a) / (2.0 * m))
                .collect();
            masked_ratio(&residual, &plane.values, &plane_mask(p, &plane, None))
        }
        (kind, _) => {
            return Err(crate::Error::ShapeMismatch(format!("{kind:?} residual applied to the wrong field type")))
        }
    };
    Ok(DefectReport::new(name, value, opts.tolerance))
}

/// The fundamental domain of a torus field viewed as a plane field over
/// `[0,1)²`.
pub fn torus_as_plane(f: &TorusField) -> Result<PlaneField> {
    PlaneField::new(
        GridSpec1D::new(0.0, 1.0 / f.nu as f64, f.nu)?,
        GridSpec1D::new(0.0, 1.0 / f.nv as f64, f.nv)?,
        f.values.clone(),
    )
}

/// Lattice parameters matching a torus field.
pub fn lattice_of(f: &TorusField, kappa: f64) -> Result<LatticeParams> {
    LatticeParams::new(f.m, kappa)
}

/// Physicists' Hermite polynomial `Hₙ(ξ)` by the three-term recurrence.
pub fn hermite_polynomial(n: usize, xi: f64) -> f64 {
    let (mut a, mut b) = (1.0, 2.0 * xi);
    if n == 0 {
        return a;
    }
    for k in 1..n {
        let c = 2.0 * xi * b - 2.0 * k as f64 * a;
        a = b;
        b = c;
    }
    b
}

/// Mean and standard deviation of `|F|` over masked nodes.
pub fn modulus_spread(values: &[Complex64], mask: &[bool]) -> (f64, f64) {
    let mods: Vec<f64> = values.iter().zip(mask).filter(|(_, m)| **m).map(|(v, _)| v.norm()).collect();
    let n = mods.len().max(1) as f64;
    let mean = mods.iter().sum::<f64>() / n;
    let var = mods.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Interior nodes of a plane field where the FSB peeling exponent is at
/// most `dmax`.
pub fn peel_window(p: &ReprParams, f: &PlaneField, dmax: f64) -> Vec<bool> {
    plane_mask(p, f, Some(dmax))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grids::GridSpec1D;
    use crate::group::HeisenbergElement as G;
    use crate::representations::act_schrodinger;

    #[test]
    fn report_pass_flag_and_json() {
        let r = DefectReport::new("x.y", 1e-9, 1e-8).with("n", 3);
        assert!(r.pass);
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["name"], "x.y");
        assert_eq!(json["metadata"]["n"], 3);
        assert!(!DefectReport::new("x", f64::NAN, 1.0).pass);
        assert!(!DefectReport::new("x", 2.0, 1.0).pass);
    }

    #[test]
    fn identity_transform_has_zero_defects() {
        let p = ReprParams::new(1.0, 1.0).unwrap();
        let g = GridSpec1D::centered(4.0, 256).unwrap();
        let f = SampledLine::sample_real(g, |t| (-t * t).exp()).unwrap();
        let id = |f: &SampledLine| Ok(f.clone());
        let act = |g: &G, f: &SampledLine| act_schrodinger(&p, g, f);
        let r = intertwining_defect("id", &G::IDENTITY, act, id, act, &f, 1e-14).unwrap();
        assert!(r.pass && r.value == 0.0);
        let r = intertwining_defect("c", &G::central(0.37), act, id, act, &f, 1e-12).unwrap();
        assert!(r.value <= 1e-12);
        assert_eq!(roundtrip_error("rt", id, id, &f, 0.0).unwrap().value, 0.0);
        assert_eq!(unitarity_defect("u", id, &f, 0.0).unwrap().value, 0.0);
    }

    #[test]
    fn zero_field_has_zero_residual() {
        let p = ReprParams::new(1.0, 1.0).unwrap();
        let g = GridSpec1D::centered(2.0, 32).unwrap();
        let z = PlaneField::zeros(g, g);
        let opts = ResidualOptions { tolerance: 0.0, dmax: None };
        let r = annihilation_residual("z", AnnihilationKind::PreFsbLie, &p, FieldRef::Plane(&z), opts).unwrap();
        assert_eq!(r.value, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn hermite_recurrence_matches_closed_forms() {
        for xi in [-1.5, 0.0, 0.3, 2.0] {
            assert_eq!(hermite_polynomial(0, xi), 1.0);
            assert_eq!(hermite_polynomial(1, xi), 2.0 * xi);
            assert!((hermite_polynomial(2, xi) - (4.0 * xi * xi - 2.0)).abs() < 1e-12);
            assert!((hermite_polynomial(3, xi) - (8.0 * xi.powi(3) - 12.0 * xi)).abs() < 1e-12);
            let h4 = 16.0 * xi.powi(4) - 48.0 * xi * xi + 12.0;
            assert!((hermite_polynomial(4, xi) - h4).abs() < 1e-11);
        }
    }
}
