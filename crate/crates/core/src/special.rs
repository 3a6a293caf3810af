//! The theta series `Θ(ω) = Σₙ e^{−(πm/κ)n²} e^{2πinω}` with a certified
//! truncation.

use crate::error::{Error, Result};
use crate::phase::cis_turns;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Largest term modulus accepted before the series is declared divergent.
pub const TERM_GUARD: f64 = 1e100;

/// Tail tolerance and the resulting term cap for one `(m, κ)` pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThetaTruncation {
    pub eps: f64,
    pub nmax: i64,
}

impl ThetaTruncation {
    pub const DEFAULT_EPS: f64 = 1e-14;

    /// `nmax = ⌈√(κ·ln(2/eps)/(πm))⌉ + 1`.
    pub fn new(m: u32, kappa: f64, eps: f64) -> Result<Self> {
        if m == 0 || !(kappa > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "theta series needs m ≥ 1 and κ > 0, got m={m} κ={kappa}"
            )));
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::InvalidParameter(format!("tail tolerance must lie in (0,1), got {eps}")));
        }
        let nmax = (kappa * (2.0 / eps).ln() / (PI * m as f64)).sqrt().ceil() as i64 + 1;
        Ok(Self { eps, nmax })
    }

    pub fn with_nmax(self, nmax: i64) -> Self {
        Self { nmax, ..self }
    }
}

/// Sums the series over `2·nmax + 1` consecutive indices in ascending
/// order with Kahan compensation.
///
/// For real `ω` the window is `|n| ≤ nmax`. For complex `ω` the dominant
/// terms sit near `n = −κ·Im ω/m`, so the window is centred there; this
/// keeps the same tail bound relative to the largest term.
pub fn jacobi_theta_series(m: u32, kappa: f64, omega: Complex64, trunc: ThetaTruncation) -> Result<Complex64> {
    let a = PI * m as f64 / kappa;
    let centre = if omega.im == 0.0 { 0 } else { (-kappa * omega.im / m as f64).round() as i64 };
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for n in centre - trunc.nmax..=centre + trunc.nmax {
        let nf = n as f64;
        let log_mod = -a * nf * nf - 2.0 * PI * nf * omega.im;
        if log_mod > TERM_GUARD.ln() {
            return Err(Error::DivergenceGuard { n });
        }
        let term = cis_turns(nf * omega.re) * log_mod.exp();
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}
