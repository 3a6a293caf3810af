//! Randomised invariants of the transforms on small grids.

use heis_core::grids::{Field, GridSpec1D, SampledLine, TorusField};
use heis_core::group::HeisenbergElement as G;
use heis_core::io::{read_field, write_field, AnyField};
use heis_core::ladders::vacuum_gaussian;
use heis_core::representations::{act_lattice, act_schrodinger, LatticeParams};
use heis_core::transforms::{contravariant_zak_inverse, covariant_zak};
use num_complex::Complex64;
use proptest::prelude::*;
use std::f64::consts::PI;

fn grid() -> GridSpec1D {
    // 32 samples per unit
    GridSpec1D::centered(6.0, 384).unwrap()
}

fn signal(c: f64, w: f64, k: f64) -> SampledLine {
    SampledLine::sample(grid(), |t| Complex64::from_polar(1.0, 2.0 * PI * k * t) * (-PI * w * (t - c).powi(2)).exp())
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn zak_intertwines_on_aligned_elements(
        m in 1u32..3, c in -0.5f64..0.5, w in 1.0f64..3.0, k in -1.0f64..1.0,
        s in -1.0f64..1.0, a in -32i64..32, b in -16i64..16,
    ) {
        let p = LatticeParams::new(m, 1.0).unwrap();
        let f = signal(c, w, k);
        let g = G::new(s, a as f64 / 32.0, b as f64 / 16.0);
        let z = |f: &SampledLine| covariant_zak(&p, f, 32, 16, 5).unwrap();
        let lhs = z(&act_schrodinger(&p.as_repr(), &g, &f).unwrap());
        let rhs = act_lattice(&p, &g, &z(&f)).unwrap();
        prop_assert!(lhs.distance(&rhs).unwrap() <= 1e-10 * f.norm());
    }

    #[test]
    fn zak_is_unitary_and_inverted(c in -0.5f64..0.5, w in 1.0f64..3.0, k in -1.0f64..1.0) {
        let p = LatticeParams::new(1, 1.0).unwrap();
        let f = signal(c, w, k);
        let z = covariant_zak(&p, &f, 32, 16, 5).unwrap();
        prop_assert!((z.norm() - f.norm()).abs() <= 1e-10 * f.norm());
        let back = contravariant_zak_inverse(&p, &z, grid()).unwrap();
        prop_assert!(back.distance(&f).unwrap() <= 1e-10 * f.norm());
    }

    #[test]
    fn torus_csv_roundtrip(vals in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 12), m in 1u32..5) {
        let t = TorusField::new(4, 3, m, vals.iter().map(|(a, b)| Complex64::new(*a, *b)).collect()).unwrap();
        let mut buf = Vec::new();
        write_field(&AnyField::Torus(t.clone()), &mut buf).unwrap();
        prop_assert_eq!(read_field(buf.as_slice()).unwrap(), AnyField::Torus(t));
    }
}

#[test]
fn shifted_vacuum_keeps_its_norm_under_zak() {
    let p = LatticeParams::new(3, 0.5).unwrap();
    let f = act_schrodinger(&p.as_repr(), &G::new(0.2, 0.25, -0.4), &vacuum_gaussian(&p.as_repr(), grid())).unwrap();
    let z = covariant_zak(&p, &f, 32, 48, 5).unwrap();
    assert!((z.norm() - f.norm()).abs() <= 1e-10 * f.norm());
}
