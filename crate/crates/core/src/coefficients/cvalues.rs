//! The constants `c_{α,s}`.
//!
//! `c_{α,s} = ∫_ℝ (1+ξ²)^{-3/2} Π_j h_{α_j}(s(j)ξ) dξ` with the per-axis factor
//! `h_a(η) = ∫_0^∞ (√2(cosh t + iη))^{-(a+1)} dt`. The t-integrals factor, so the
//! `(n+1)`-dimensional integral reduces to a 1D ξ-integral over products of
//! 1D t-integrals, whatever `n` is.

use std::collections::BTreeMap;
use std::f64::consts::SQRT_2;
use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::quadrature::{integrate_1d, integrate_1d_nested, Axis, QuadratureSpec};

use super::combinatorics::{MultiIndex, SignAssignment};
use super::CoefficientError;

/// The `n = 0` constant `∫ (1+ξ²)^{-3/2} dξ`.
pub const C_ZERO: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CValue {
    /// Real part of the integral.
    pub value: f64,
    /// Imaginary part, zero up to quadrature error.
    pub imag: f64,
    pub est_error: f64,
    pub evaluations: u64,
    pub converged: bool,
}

/// `c_{α,s}` depends only on the multiset of pairs `(α_j, s(j))`.
pub type CKey = Vec<(u32, i8)>;

pub fn c_key(alpha: &MultiIndex, s: &SignAssignment) -> CKey {
    let mut key: CKey = alpha
        .entries()
        .iter()
        .copied()
        .zip(s.signs().iter().copied())
        .collect();
    key.sort_unstable();
    key
}

/// `h_a(η)` on the exponential half-line map.
pub fn t_factor(
    a: u32,
    eta: f64,
    spec: &QuadratureSpec,
) -> Result<crate::quadrature::IntegralResult<Complex64>, CoefficientError> {
    let power = -(a as i32 + 1);
    integrate_1d(
        |t: f64| {
            let c = t.cosh();
            if c.is_finite() {
                Complex64::new(SQRT_2 * c, SQRT_2 * eta).powi(power)
            } else {
                Complex64::new(0.0, 0.0)
            }
        },
        &Axis::half_line(),
        spec,
    )
    .map_err(|e| CoefficientError::quadrature(format!("t-factor a={a}, eta={eta}"), e))
}

/// `c_{α,s}` for `n = α.n() = s.n() ≥ 1`.
pub fn c_coefficient(
    alpha: &MultiIndex,
    s: &SignAssignment,
    spec: &QuadratureSpec,
) -> Result<CValue, CoefficientError> {
    if alpha.n() != s.n() {
        return Err(CoefficientError::Dimension(format!(
            "multi-index of length {} with sign assignment of length {}",
            alpha.n(),
            s.n()
        )));
    }
    c_from_key(&c_key(alpha, s), spec)
}

pub(crate) fn c_from_key(key: &CKey, spec: &QuadratureSpec) -> Result<CValue, CoefficientError> {
    let context = || format!("c for (alpha, s) pairs {key:?}");
    spec.validate()
        .map_err(|e| CoefficientError::quadrature(context(), e))?;
    let mut factors: BTreeMap<(u32, i8), i32> = BTreeMap::new();
    for &pair in key {
        *factors.entry(pair).or_insert(0) += 1;
    }
    let factors: Vec<((u32, i8), i32)> = factors.into_iter().collect();
    let inner_evals = AtomicU64::new(0);
    // relative errors of the n factors add up in the product
    let share = 0.2 / key.len() as f64;
    let inner_base = spec.with_tolerances(spec.rel_tol * share, spec.abs_tol * share);

    let integrand = |xi: f64| {
        let weight = (1.0 + xi * xi).powf(-1.5);
        // the outer map multiplies by 1 + ξ², so a looser inner target is enough far out
        let inner_abs = (inner_base.abs_tol * (1.0 + xi * xi).sqrt()).min(0.5);
        let inner = QuadratureSpec {
            abs_tol: inner_abs,
            ..inner_base
        };
        let mut value = Complex64::new(weight, 0.0);
        let mut rel_err = 0.0;
        let mut converged = true;
        for &((a, sign), mult) in &factors {
            let h = match t_factor(a, f64::from(sign) * xi, &inner) {
                Ok(h) => h,
                Err(_) => return (Complex64::new(f64::NAN, 0.0), f64::INFINITY, false),
            };
            inner_evals.fetch_add(h.evaluations, Ordering::Relaxed);
            value *= h.value.powi(mult);
            let m = h.value.norm();
            rel_err += f64::from(mult) * if m > 0.0 { h.est_error / m } else { 0.0 };
            converged &= h.converged;
        }
        let err = value.norm() * rel_err;
        (value, err, converged)
    };
    let r = integrate_1d_nested(integrand, &Axis::full_line(), spec)
        .map_err(|e| CoefficientError::quadrature(context(), e))?;
    Ok(CValue {
        value: r.value.re,
        imag: r.value.im,
        est_error: r.est_error,
        evaluations: r.evaluations + inner_evals.load(Ordering::Relaxed),
        converged: r.converged && r.value.re.is_finite(),
    })
}
