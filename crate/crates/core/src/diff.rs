//! Finite-difference derivatives on uniform grids.
//!
//! Interior nodes use the sixth-order central stencil; the three nodes
//! nearest each end use fourth-order one-sided stencils. Residual norms are
//! taken over the interior only, see [`INTERIOR_BAND`].

use crate::grids::{PlaneField, SampledLine};
use num_complex::Complex64;
use std::ops::Range;

/// Nodes closer than this to either end are excluded from residual norms.
pub const INTERIOR_BAND: usize = 4;

const CENTRAL: [f64; 3] = [45.0, -9.0, 1.0];
const ONE_SIDED: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];

/// First derivative of uniformly spaced samples.
pub fn derivative(f: &[Complex64], step: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    if n < 7 {
        // too short for the full stencil set; plain differences
        for i in 0..n {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            if b > a {
                out[i] = (f[b] - f[a]) / ((b - a) as f64 * step);
            }
        }
        return out;
    }
    let c = 1.0 / (60.0 * step);
    for i in 3..n - 3 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, w) in CENTRAL.iter().enumerate() {
            acc += (f[i + k + 1] - f[i - k - 1]) * *w;
        }
        out[i] = acc * c;
    }
    let c = 1.0 / (12.0 * step);
    for i in 0..3 {
        let mut fwd = Complex64::new(0.0, 0.0);
        let mut bwd = Complex64::new(0.0, 0.0);
        for (k, w) in ONE_SIDED.iter().enumerate() {
            fwd += f[i + k] * *w;
            bwd -= f[n - 1 - i - k] * *w;
        }
        out[i] = fwd * c;
        out[n - 1 - i] = bwd * c;
    }
    out
}

/// Derivative of a sampled line as a sampled line on the same grid.
pub fn line_derivative(f: &SampledLine) -> SampledLine {
    SampledLine { grid: f.grid, values: derivative(&f.values, f.grid.step) }
}

/// `∂_x` of a plane field (along rows of the storage).
pub fn plane_dx(f: &PlaneField) -> Vec<Complex64> {
    let (nx, ny) = (f.gx.count, f.gy.count);
    let mut out = vec![Complex64::new(0.0, 0.0); nx * ny];
    let mut column = vec![Complex64::new(0.0, 0.0); nx];
    for j in 0..ny {
        for i in 0..nx {
            column[i] = f.values[i * ny + j];
        }
        for (i, d) in derivative(&column, f.gx.step).into_iter().enumerate() {
            out[i * ny + j] = d;
        }
    }
    out
}

/// `∂_y` of a plane field.
pub fn plane_dy(f: &PlaneField) -> Vec<Complex64> {
    let ny = f.gy.count;
    let mut out = Vec::with_capacity(f.values.len());
    for row in f.values.chunks(ny) {
        out.extend(derivative(row, f.gy.step));
    }
    out
}

/// Index range of interior nodes on an axis with `count` nodes.
pub fn interior(count: usize) -> Range<usize> {
    if count <= 2 * INTERIOR_BAND {
        0..0
    } else {
        INTERIOR_BAND..count - INTERIOR_BAND
    }
}
