use thiserror::Error;

/// Errors raised by the evaluators, optimizers and the verification oracle.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` = {value} is outside its domain ({expected})")]
    Domain {
        name: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("denominator matrix is not positive definite (min eigenvalue {min_eigenvalue:e})")]
    SingularDenominator { min_eigenvalue: f64 },
    #[error("quadratic {a}·s² + {b}·s + {c} has no unique positive root")]
    NoPositiveRoot { a: f64, b: f64, c: f64 },
    #[error("backhaul capacities C = {cap_low}, ΔC = {cap_delta} give unbounded compression noise")]
    DegenerateCapacity { cap_low: f64, cap_delta: f64 },
    #[error("no grid point satisfies the feasibility predicate")]
    InfeasibleEverywhere,
    #[error("conditional covariance is singular; mutual information diverges")]
    SingularConditional,
    #[error("invalid simplex point: {0}")]
    InvalidSimplex(String),
    #[error("invalid layer mask: {0}")]
    InvalidMask(String),
    #[error("residual check failed for {what}: {residual:e}")]
    Residual { what: &'static str, residual: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_domain(
    name: &'static str,
    value: f64,
    ok: bool,
    expected: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            name,
            value,
            expected,
        })
    }
}
