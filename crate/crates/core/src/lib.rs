//! Numerical companion to the rigidity and minimality theory of periodic
//! N-body loops: central configurations as minimizers of `I·U²`, Fourier
//! analysis of the potential along trigonometric loops, simultaneous
//! Diophantine approximation, and direct minimization of the action.
//!
//! Conventions: `U = Σ m_j m_k / |q_j − q_k|` is positive, `I = Σ m_i |q_i|²`
//! is taken about the origin, and Newton's equations read `m_i q̈_i = ∇_i U`.

// `!(x > 0.0)` style checks are deliberate: they route NaN to the error path.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod central_config;
pub mod cli;
mod dd;
pub mod error;
pub mod harmonics;
pub mod io;
pub mod kronecker;
pub mod mechanics;
mod optim;
pub mod variational;

pub use error::{Error, Result};
pub use mechanics::{Configuration, MassVector};
