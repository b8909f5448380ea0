use thiserror::Error;

#[derive(Debug, Error)]
pub enum CrError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("polynomial degree {degree} exceeds the grid exactness bandwidth {bandwidth}")]
    Aliasing { degree: usize, bandwidth: usize },
    #[error("|phi| >= 1 at grid node (i_eta={i}, i_xi1={j}, i_xi2={k}): |phi| = {modulus}")]
    NotStrictlyPseudoconvex {
        i: usize,
        j: usize,
        k: usize,
        modulus: f64,
    },
    #[error("jet inversion needs an invertible constant term")]
    JetNotInvertible,
    #[error("solver diverged after {iterations} iterations (residual {residual:e})")]
    Diverged { iterations: usize, residual: f64 },
    #[error("deformation not in the required space {space}: residual {residual}")]
    NotInSpace { space: String, residual: f64 },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, CrError>;
