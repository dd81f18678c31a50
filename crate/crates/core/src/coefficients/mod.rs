//! Resolvent and heat-trace expansion coefficients.
//!
//! Enumerates sign maps and multi-indices, evaluates the constants `c_{α,s}`,
//! combines them with integrals of axis derivatives of `ρ_{n,s}` into
//! `b_{n,l}`, and assembles `b_m` and the heat coefficients `a_n`.

mod combinatorics;
mod cvalues;
mod table;
mod transform;

use thiserror::Error;

use crate::potential::PotentialError;
use crate::quadrature::QuadratureError;

pub use combinatorics::{phi_forward, phi_inverse, MultiIndex, SignAssignment};
pub use cvalues::{c_coefficient, c_key, t_factor, CKey, CValue, C_ZERO};
pub use table::{
    a_n, b_m, b_nl, closed_form_b0_b1, heat_from_resolvent, AnEntry, BValue, BmEntry, BnlEntry,
    CEntry, CoefficientTable, B1_FACTOR, MAX_ORDER,
};
pub use transform::{rho_ns, rho_ns_axis_derivative, DerivativeStencil, StencilTerm};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoefficientError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("order {order} is above the implemented maximum {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("{context}: {source}")]
    Quadrature {
        context: String,
        source: QuadratureError,
    },
    #[error("{context}: not converged (estimate {value:e}, error bound {error:e})")]
    NotConverged {
        context: String,
        value: f64,
        error: f64,
    },
    #[error(transparent)]
    Potential(#[from] PotentialError),
}

impl CoefficientError {
    pub(crate) fn quadrature(context: String, source: QuadratureError) -> Self {
        CoefficientError::Quadrature { context, source }
    }
}
