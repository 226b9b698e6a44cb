use thiserror::Error;

/// Failures shared by every module of the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("collision: bodies {j} and {k} are {distance:e} apart (threshold {threshold:e})")]
    Collision {
        j: usize,
        k: usize,
        distance: f64,
        threshold: f64,
    },

    #[error("bodies {j} and {k} coincide for all times (A = 0)")]
    DegeneratePair { j: usize, k: usize },

    #[error("no start converged: best gradient norm {grad_norm:e}, residual {residual:e} after {iterations} iterations")]
    NoConvergence {
        grad_norm: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("line search could not avoid a collision from any of {restarts} restarts")]
    CollisionAbort { restarts: usize },

    #[error("series for harmonic {n} did not reach tolerance after {terms} terms (partial sum {partial_sum:e}, tail bound {tail_bound:e})")]
    SlowConvergence {
        n: u32,
        terms: usize,
        partial_sum: f64,
        tail_bound: f64,
    },

    #[error("potential is not constant along the loop: std/mean = {relative_spread:e} (tolerance {tol:e})")]
    HypothesisViolated { relative_spread: f64, tol: f64 },

    #[error("no harmonic index up to {k_max} aligns all pair phases")]
    SearchExhausted { k_max: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
