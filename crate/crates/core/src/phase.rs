//! Unimodular phase factors `e^{2πi a}` with argument reduction.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// `e^{2πi·turns}`. The argument is reduced modulo 1 first, so integer
/// arguments give exactly `1`.
#[inline]
pub fn cis_turns(turns: f64) -> Complex64 {
    let r = turns - turns.round();
    let (s, c) = (TAU * r).sin_cos();
    Complex64::new(c, s)
}
