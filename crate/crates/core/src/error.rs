use thiserror::Error;

use crate::media::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("point x = {x} lies on interface {interface}; pick a side explicitly")]
    AmbiguousPoint { x: f64, interface: usize },

    #[error("invalid medium or coupling: {}", join(.0))]
    Invalid(Vec<Violation>),

    #[error("singular interface system at interface {interface} for lambda = {lambda}")]
    SingularInterface { interface: usize, lambda: f64 },

    #[error("coupling has an indefinite layer weight at interface {interface}")]
    IndefiniteWeight { interface: usize },

    #[error("non-finite value of the regularized family at tau = {tau}")]
    NonFinite { tau: f64 },

    #[error("finite-difference stencil at x = {x} with step {h} straddles interface {interface}")]
    Straddle { x: f64, h: f64, interface: usize },

    #[error("calibration self-test failed: round-trip error {error:.3e} exceeds {limit:.1e}")]
    SelfTest { error: f64, limit: f64 },

    #[error("probe sets differ: {0}")]
    ProbeMismatch(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}
