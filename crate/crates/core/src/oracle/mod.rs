//! Independent ground truth for the expansion: direct quadrature of the
//! Neumann terms of the resolvent trace and checks of the integral
//! identities behind their reduction.

mod identities;
mod trace;

use thiserror::Error;

use crate::potential::PotentialError;
use crate::quadrature::QuadratureError;

pub use identities::{
    k0_product_line_integral, verify_fourier_exponential, verify_k0_product_identity,
    watson_roundtrip, IdentityReport,
};
pub use trace::{
    asymptotic_trace, k_min_default, resolvent_trace, trace_term, trace_term_zero_reduced,
    xi_transform, ResolventTrace, TraceMethod, TraceTermResult, ORACLE_MAX_N,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("ktilde = {ktilde} is below k_min = {k_min}")]
    BelowKMin { ktilde: f64, k_min: f64 },
    #[error("coefficient table has no entry for order {order}")]
    IncompleteTable { order: usize },
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
}
