//! Heat-trace asymptotics for a one-dimensional two-particle contact
//! interaction modulated by a smooth compactly supported potential `ρ`.
//!
//! [`coefficients`] computes the expansion coefficients `b_m` of the
//! regularized resolvent trace and the heat coefficients `a_n`; [`oracle`]
//! evaluates the resolvent trace directly so the two can be compared.

pub mod coefficients;
pub mod oracle;
pub mod potential;
pub mod quadrature;
pub mod specfun;

use thiserror::Error;

pub use coefficients::{CoefficientError, CoefficientTable, MultiIndex, SignAssignment};
pub use oracle::{IdentityReport, OracleError, TraceMethod, TraceTermResult};
pub use potential::{Family, Potential, PotentialError};
pub use quadrature::{Axis, AxisKind, IntegralResult, QuadratureError, QuadratureSpec, Transform};
pub use specfun::{SpecFunError, SpecFunResult};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    SpecFun(#[from] SpecFunError),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error(transparent)]
    Coefficient(#[from] CoefficientError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
