//! The polarised Heisenberg group `ℍ¹ = {(s, x, y)}` with product
//! `(s,x,y)·(s′,x′,y′) = (s + s′ + x y′, x + x′, y + y′)`.
//!
//! Besides the group law this module carries the four subgroups used for
//! induction (centre, the two maximal abelian subgroups and the discrete
//! lattice subgroup), their coset decompositions `g = s(p(g))·r(g)` and
//! their characters.

use crate::error::{Error, Result};
use crate::phase::cis_turns;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::ops::Mul;

/// Distance below which a coordinate is snapped to the nearest integer
/// before taking integer/fractional parts.
pub const SNAP_TOLERANCE: f64 = 1e-12;

/// Tolerance on the constrained coordinates when testing subgroup membership.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-12;

/// A point `(s, x, y)` of the group; `s` is the central coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergElement {
    pub s: f64,
    pub x: f64,
    pub y: f64,
}

impl HeisenbergElement {
    pub const IDENTITY: Self = Self { s: 0.0, x: 0.0, y: 0.0 };

    pub const fn new(s: f64, x: f64, y: f64) -> Self {
        Self { s, x, y }
    }

    pub const fn identity() -> Self {
        Self::IDENTITY
    }

    /// The central element `(s, 0, 0)`.
    pub const fn central(s: f64) -> Self {
        Self { s, x: 0.0, y: 0.0 }
    }

    pub fn multiply(&self, other: &Self) -> Self {
        Self {
            s: self.s + other.s + self.x * other.y,
            x: self.x + other.x,
            y: self.y + other.y,
        }
    }

    pub fn inverse(&self) -> Self {
        Self {
            s: -self.s + self.x * self.y,
            x: -self.x,
            y: -self.y,
        }
    }

    /// The automorphism `(s, x, y) ↦ (s − xy, −y, x)` exchanging the roles of
    /// the two abelian subgroups.
    pub fn automorphism(&self) -> Self {
        Self {
            s: self.s - self.x * self.y,
            x: -self.y,
            y: self.x,
        }
    }

    /// Largest absolute coordinate difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.s - other.s)
            .abs()
            .max((self.x - other.x).abs())
            .max((self.y - other.y).abs())
    }
}

impl Mul for HeisenbergElement {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        self.multiply(&rhs)
    }
}

impl fmt::Display for HeisenbergElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.s, self.x, self.y)
    }
}

/// The subgroups from which representations are induced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SubgroupTag {
    /// `Z = {(s, 0, 0)}`.
    Centre,
    /// `H′ₓ = {(s, 0, y)}`, homogeneous space parametrised by `x`.
    AbelianX,
    /// `H′ᵧ = {(s, x, 0)}`, homogeneous space parametrised by `y`.
    AbelianY,
    /// `H_d = {(s, n, k) : n, k ∈ ℤ}`, homogeneous space the torus.
    Lattice,
}

impl SubgroupTag {
    pub const ALL: [SubgroupTag; 4] = [
        SubgroupTag::Centre,
        SubgroupTag::AbelianX,
        SubgroupTag::AbelianY,
        SubgroupTag::Lattice,
    ];
}

impl fmt::Display for SubgroupTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SubgroupTag::Centre => "Centre",
            SubgroupTag::AbelianX => "AbelianX",
            SubgroupTag::AbelianY => "AbelianY",
            SubgroupTag::Lattice => "Lattice",
        };
        f.write_str(name)
    }
}

/// A point of the homogeneous space `ℍ¹/H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum CosetPoint {
    /// `ℍ¹/Z ≅ ℝ²`.
    Plane { x: f64, y: f64 },
    /// `ℍ¹/H′ₓ ≅ ℝ`, coordinate `t = x`.
    LineX(f64),
    /// `ℍ¹/H′ᵧ ≅ ℝ`, coordinate `λ = y`.
    LineY(f64),
    /// `ℍ¹/H_d ≅ 𝕋²`, coordinates in `[0, 1)²`.
    Torus { u: f64, v: f64 },
}

/// `g = section(projection)·remainder`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decomposition {
    pub projection: CosetPoint,
    pub section: HeisenbergElement,
    pub remainder: HeisenbergElement,
}

/// Integer part `⌊x⌋` with snapping: values within [`SNAP_TOLERANCE`] of an
/// integer are treated as that integer.
pub fn integer_part(x: f64) -> f64 {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOLERANCE {
        r
    } else {
        x.floor()
    }
}

/// `(⌊x⌋, x − ⌊x⌋)` with snapping; the fractional part lies in `[0, 1)` and
/// is exactly `0` for snapped points.
pub fn split_integer(x: f64) -> (f64, f64) {
    let r = x.round();
    if (x - r).abs() <= SNAP_TOLERANCE {
        (r, 0.0)
    } else {
        let n = x.floor();
        let frac = x - n;
        // x − ⌊x⌋ can round up to 1.0 for tiny negative x
        if frac >= 1.0 {
            (n + 1.0, 0.0)
        } else {
            (n, frac)
        }
    }
}

/// The section `s : ℍ¹/H → ℍ¹` for each subgroup.
pub fn section(point: CosetPoint) -> HeisenbergElement {
    match point {
        CosetPoint::Plane { x, y } => HeisenbergElement::new(0.0, x, y),
        CosetPoint::LineX(t) => HeisenbergElement::new(0.0, t, 0.0),
        CosetPoint::LineY(lambda) => HeisenbergElement::new(0.0, 0.0, lambda),
        // central coordinate fixed to 0 so that s is a map from the torus
        CosetPoint::Torus { u, v } => HeisenbergElement::new(0.0, u, v),
    }
}

/// Projection `p(g)`.
pub fn projection(g: &HeisenbergElement, tag: SubgroupTag) -> CosetPoint {
    match tag {
        SubgroupTag::Centre => CosetPoint::Plane { x: g.x, y: g.y },
        SubgroupTag::AbelianX => CosetPoint::LineX(g.x),
        SubgroupTag::AbelianY => CosetPoint::LineY(g.y),
        SubgroupTag::Lattice => CosetPoint::Torus {
            u: split_integer(g.x).1,
            v: split_integer(g.y).1,
        },
    }
}

/// Splits `g` into coset representative and subgroup remainder.
pub fn decompose(g: &HeisenbergElement, tag: SubgroupTag) -> Decomposition {
    let projection = projection(g, tag);
    let section = section(projection);
    let remainder = match tag {
        SubgroupTag::Centre => HeisenbergElement::central(g.s),
        SubgroupTag::AbelianX => HeisenbergElement::new(g.s - g.x * g.y, 0.0, g.y),
        SubgroupTag::AbelianY => HeisenbergElement::new(g.s, g.x, 0.0),
        SubgroupTag::Lattice => {
            let (nx, fx) = split_integer(g.x);
            let (ny, _) = split_integer(g.y);
            HeisenbergElement::new(g.s - fx * ny, nx, ny)
        }
    };
    Decomposition {
        projection,
        section,
        remainder,
    }
}

/// Whether `h` lies in the tagged subgroup, up to `tol` on the constrained
/// coordinates.
pub fn is_member(tag: SubgroupTag, h: &HeisenbergElement, tol: f64) -> bool {
    let near_int = |a: f64| (a - a.round()).abs() <= tol;
    match tag {
        SubgroupTag::Centre => h.x.abs() <= tol && h.y.abs() <= tol,
        SubgroupTag::AbelianX => h.x.abs() <= tol,
        SubgroupTag::AbelianY => h.y.abs() <= tol,
        SubgroupTag::Lattice => near_int(h.x) && near_int(h.y),
    }
}

/// The inducing character of the tagged subgroup evaluated at `h`:
/// `e^{2πiℏs}` on the continuous subgroups and `e^{2πims}` on the lattice
/// subgroup, where `param` is `ℏ` or `m` respectively. For the lattice
/// subgroup `param` must be an integer.
pub fn character(tag: SubgroupTag, param: f64, h: &HeisenbergElement) -> Result<Complex64> {
    if !is_member(tag, h, MEMBERSHIP_TOLERANCE) {
        return Err(Error::Membership {
            subgroup: tag.to_string(),
            element: h.to_string(),
        });
    }
    if tag == SubgroupTag::Lattice && param.fract() != 0.0 {
        return Err(Error::InvalidParameter(format!(
            "lattice character index must be an integer, got {param}"
        )));
    }
    Ok(cis_turns(param * h.s))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &HeisenbergElement, b: &HeisenbergElement, tol: f64) -> bool {
        a.max_abs_diff(b) <= tol
    }

    #[test]
    fn group_law_examples() {
        let a = HeisenbergElement::new(0.0, 1.0, 0.0);
        let b = HeisenbergElement::new(0.0, 0.0, 1.0);
        assert_eq!(a * b, HeisenbergElement::new(1.0, 1.0, 1.0));
        assert_eq!(b * a, HeisenbergElement::new(0.0, 1.0, 1.0));
        let g = HeisenbergElement::new(0.3, -1.2, 2.5);
        assert_eq!(g * HeisenbergElement::IDENTITY, g);
        assert_eq!(HeisenbergElement::IDENTITY * g, g);
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(HeisenbergElement::IDENTITY.inverse(), HeisenbergElement::IDENTITY);
        let g = HeisenbergElement::new(0.0, 1.0, 1.0);
        assert_eq!(g.inverse(), HeisenbergElement::new(1.0, -1.0, -1.0));
        assert_eq!(g * g.inverse(), HeisenbergElement::IDENTITY);
        assert_eq!(g.inverse() * g, HeisenbergElement::IDENTITY);
    }

    #[test]
    fn lattice_decomposition_example() {
        let g = HeisenbergElement::new(0.5, 2.3, -1.7);
        let d = decompose(&g, SubgroupTag::Lattice);
        match d.projection {
            CosetPoint::Torus { u, v } => {
                assert!((u - 0.3).abs() < 1e-12);
                assert!((v - 0.3).abs() < 1e-12);
            }
            other => panic!("unexpected projection {other:?}"),
        }
        assert!(close(&d.remainder, &HeisenbergElement::new(1.1, 2.0, -2.0), 1e-12));
        assert!(close(&(d.section * d.remainder), &g, 1e-12));
    }

    #[test]
    fn continuous_decomposition_examples() {
        let g = HeisenbergElement::new(1.0, 2.0, 3.0);
        let d = decompose(&g, SubgroupTag::Centre);
        assert_eq!(d.projection, CosetPoint::Plane { x: 2.0, y: 3.0 });
        assert_eq!(d.section, HeisenbergElement::new(0.0, 2.0, 3.0));
        assert_eq!(d.remainder, HeisenbergElement::new(1.0, 0.0, 0.0));

        let d = decompose(&g, SubgroupTag::AbelianX);
        assert_eq!(d.projection, CosetPoint::LineX(2.0));
        assert_eq!(d.remainder, HeisenbergElement::new(-5.0, 0.0, 3.0));

        let d = decompose(&g, SubgroupTag::AbelianY);
        assert_eq!(d.projection, CosetPoint::LineY(3.0));
        assert_eq!(d.remainder, HeisenbergElement::new(1.0, 2.0, 0.0));
    }

    #[test]
    fn fractional_part_uses_floor_and_snaps() {
        assert_eq!(split_integer(-1.7).0, -2.0);
        assert!((split_integer(-1.7).1 - 0.3).abs() < 1e-15);
        assert_eq!(split_integer(3.0 - 1e-13), (3.0, 0.0));
        assert_eq!(split_integer(-1e-14), (0.0, 0.0));
        assert_eq!(split_integer(-1e-300), (0.0, 0.0));
        let (_, f) = split_integer(-1e-10);
        assert!(f < 1.0 && f > 0.99);
    }

    #[test]
    fn characters() {
        let z = character(SubgroupTag::Centre, 1.0, &HeisenbergElement::central(0.25)).unwrap();
        assert!((z - Complex64::i()).norm() < 1e-15);
        let z = character(SubgroupTag::Lattice, 2.0, &HeisenbergElement::new(0.5, 3.0, -1.0))
            .unwrap();
        assert!((z - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let err = character(SubgroupTag::Centre, 1.0, &HeisenbergElement::new(0.0, 0.1, 0.0));
        assert!(matches!(err, Err(Error::Membership { .. })));
        let err = character(SubgroupTag::Lattice, 1.0, &HeisenbergElement::new(0.0, 0.5, 1.0));
        assert!(matches!(err, Err(Error::Membership { .. })));
        let err = character(SubgroupTag::Lattice, 1.5, &HeisenbergElement::central(0.1));
        assert!(matches!(err, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn automorphism_preserves_the_product() {
        let a = HeisenbergElement::new(0.4, -1.3, 2.2);
        let b = HeisenbergElement::new(-0.7, 0.9, 1.5);
        let lhs = (a * b).automorphism();
        let rhs = a.automorphism() * b.automorphism();
        assert!(close(&lhs, &rhs, 1e-14));
        // maps H'_x onto H'_y
        let h = HeisenbergElement::new(0.3, 0.0, 1.7);
        assert!(is_member(SubgroupTag::AbelianY, &h.automorphism(), 0.0));
    }
}
