//! Shared numeric kernels.

mod lp;
mod search;
mod simplex;

pub use lp::{max_weight_rates, rate_polytope, solve_lp, LpSolution, RateWeights};
pub use search::{maximize_on_box, maximize_on_grid, maximize_screened, Axis, Spacing, SearchOutcome};
pub use simplex::{maximize_on_simplex, maximize_on_simplex_seeded, SchemeMask, SimplexPoint, SIMPLEX_GRID_PITCH, SIMPLEX_MIN_PITCH};

use crate::error::{Error, Result};
use crate::model::HermitianM2;

/// Smallest eigenvalue a denominator matrix may have.
pub const PD_FLOOR: f64 = 1e-12;

/// `scale · log₂ det(I + num · den⁻¹)`, evaluated as
/// `scale · log₂(det(den + num) / det(den))`.
pub fn logdet_form(num: &HermitianM2, den: &HermitianM2, scale: f64) -> Result<f64> {
    let min_eig = den.min_eigenvalue();
    if !(min_eig > PD_FLOOR) {
        return Err(Error::SingularDenominator {
            min_eigenvalue: min_eig,
        });
    }
    let ratio = (*den + *num).det() / den.det();
    Ok((scale * ratio.log2()).max(0.0))
}

/// Unique positive root of `a·s² + b·s + c = 0` for `a > 0`, `c < 0`.
pub fn positive_quadratic_root(a: f64, b: f64, c: f64) -> Result<f64> {
    if !(a > 0.0 && c < 0.0 && b.is_finite()) {
        return Err(Error::NoPositiveRoot { a, b, c });
    }
    let sqrt_disc = (b * b - 4.0 * a * c).sqrt();
    // Pick the cancellation-free form.
    let s = if b <= 0.0 {
        (-b + sqrt_disc) / (2.0 * a)
    } else {
        (2.0 * c) / (-b - sqrt_disc)
    };
    let residual = (a * s * s + b * s + c).abs();
    let scale = (a * s * s).abs().max(c.abs());
    if !(s > 0.0) || residual > 1e-10 * scale {
        return Err(Error::NoPositiveRoot { a, b, c });
    }
    Ok(s)
}
