//! Neumann terms of the regularized resolvent trace by direct quadrature.
//!
//! For `n ≥ 1` the term is
//! `T_n = C_n ∫_{ℝ⁺ⁿ} ∫_ℝ ∫_{ℝⁿ⁺¹} (1+ξ²)^{-3/2} e^{-i√2k̃ξ(y_0-y_n)} Π ρ(y_j) Π e^{-√2k̃|y_j-y_{j+1}| cosh t_j}`
//! with `C_n = (π/(2k̃²))(2π)^{-(n+2)}`. The integrals are taken in the order
//! t, ξ, then Y: each `t_j` integral is `K0(√2k̃|d_j|)` and the ξ integral is
//! `Φ(√2k̃(y_0-y_n))` with `Φ(b) = 2|b| ∫_0^∞ e^{-|b| cosh t} cosh t dt`.
//! What remains is an integral over the differences `d_j = y_j - y_{j+1}` and
//! `u = y_n`. The log singularity of `K0` at `d_j = 0` is removed by
//! `d_j = D v|v|`.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientTable;
use crate::potential::Potential;
use crate::quadrature::{integrate_1d, integrate_1d_nested, integrate_nd, Axis, QuadratureSpec};
use crate::specfun::bessel_k0_unchecked;

use super::OracleError;

/// Highest Neumann order the oracle evaluates.
pub const ORACLE_MAX_N: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceMethod {
    ClosedForm,
    ReducedIntegral,
}

impl TraceMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            TraceMethod::ClosedForm => "closed_form",
            TraceMethod::ReducedIntegral => "reduced_integral",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceTermResult {
    pub n: usize,
    pub ktilde: f64,
    pub value: f64,
    pub est_error: f64,
    pub method: TraceMethod,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolventTrace {
    pub ktilde: f64,
    pub value: f64,
    pub est_error: f64,
    pub converged: bool,
    pub terms: Vec<TraceTermResult>,
}

/// Operational lower bound for k̃: `5·(1 + max|ρ|·|supp ρ|)`.
pub fn k_min_default(p: &Potential) -> f64 {
    let (a, b) = p.support();
    5.0 * (1.0 + p.max_abs() * (b - a))
}

/// `Φ(b) = ∫ (1+ξ²)^{-3/2} e^{-ibξ} dξ = 2|b| K1(|b|)`, via its cosh representation.
pub fn xi_transform(b: f64, spec: &QuadratureSpec) -> Result<(f64, f64, bool), OracleError> {
    let a = b.abs();
    if a == 0.0 {
        return Ok((2.0, 0.0, true));
    }
    if a > 740.0 {
        return Ok((0.0, 0.0, true));
    }
    let r = integrate_1d(
        |t: f64| {
            let c = t.cosh();
            if c.is_finite() {
                (-a * c).exp() * c
            } else {
                0.0
            }
        },
        &Axis::half_line(),
        spec,
    )?;
    Ok((2.0 * a * r.value, 2.0 * a * r.est_error, r.converged))
}

fn check_args(n: usize, ktilde: f64, k_min: f64) -> Result<(), OracleError> {
    if n > ORACLE_MAX_N {
        return Err(OracleError::Invalid(format!(
            "Neumann order {n} above the oracle maximum {ORACLE_MAX_N}"
        )));
    }
    if !(ktilde > 0.0 && ktilde.is_finite()) {
        return Err(OracleError::Invalid(format!(
            "ktilde must be positive, got {ktilde}"
        )));
    }
    if ktilde < k_min {
        return Err(OracleError::BelowKMin { ktilde, k_min });
    }
    Ok(())
}

fn prefactor(n: usize, ktilde: f64) -> f64 {
    PI / (2.0 * ktilde * ktilde) * (2.0 * PI).powi(-(n as i32 + 2))
}

/// `T_n(k̃)`. `n = 0` uses the closed form; `n ≥ 1` the reduced integral.
pub fn trace_term(
    p: &Potential,
    n: usize,
    ktilde: f64,
    spec: &QuadratureSpec,
    k_min: f64,
) -> Result<TraceTermResult, OracleError> {
    check_args(n, ktilde, k_min)?;
    p.validate()?;
    let (value, est_error, converged, method) = match n {
        0 => {
            let i1 = p.integrate_power(1, spec)?;
            let v = i1 / (4.0 * PI * ktilde * ktilde);
            (v, spec.rel_tol * v.abs(), true, TraceMethod::ClosedForm)
        }
        _ if p.is_zero() => (0.0, 0.0, true, TraceMethod::ReducedIntegral),
        1 => {
            let (v, e, c) = term_one(p, ktilde, spec)?;
            (v, e, c, TraceMethod::ReducedIntegral)
        }
        _ => {
            let (v, e, c) = term_two(p, ktilde, spec)?;
            (v, e, c, TraceMethod::ReducedIntegral)
        }
    };
    Ok(TraceTermResult {
        n,
        ktilde,
        value,
        est_error,
        method,
        converged,
    })
}

/// `T_0` by quadrature of `(1/(8πk̃²)) ∫∫ (1+ξ²)^{-3/2} ρ(y) dξ dy`.
pub fn trace_term_zero_reduced(
    p: &Potential,
    ktilde: f64,
    spec: &QuadratureSpec,
) -> Result<TraceTermResult, OracleError> {
    check_args(0, ktilde, 0.0)?;
    p.validate()?;
    let (a, b) = p.support();
    let axes = [
        Axis::full_line(),
        Axis::finite(a, b).with_breakpoints(p.breakpoints()),
    ];
    let r = integrate_nd(
        |x: &[f64]| (1.0 + x[0] * x[0]).powf(-1.5) * p.eval_unchecked(x[1], 0),
        &axes,
        spec,
    )?;
    let f = 1.0 / (8.0 * PI * ktilde * ktilde);
    Ok(TraceTermResult {
        n: 0,
        ktilde,
        value: f * r.value,
        est_error: f * r.est_error,
        method: TraceMethod::ReducedIntegral,
        converged: r.converged,
    })
}

/// `∫ Π_j ρ(u + shift_j) du` over the common support, with the shifts given
/// relative to `u = y_n`.
fn overlap(
    p: &Potential,
    shifts: &[f64],
    spec: &QuadratureSpec,
) -> Result<(f64, f64, bool), OracleError> {
    let (a, b) = p.support();
    let lo_shift = shifts.iter().copied().fold(0.0, f64::min);
    let hi_shift = shifts.iter().copied().fold(0.0, f64::max);
    let (lo, hi) = (a - lo_shift, b - hi_shift);
    if hi <= lo {
        return Ok((0.0, 0.0, true));
    }
    let r = integrate_1d(
        |u: f64| {
            shifts
                .iter()
                .map(|&s| p.eval_unchecked(u + s, 0))
                .product::<f64>()
                * p.eval_unchecked(u, 0)
        },
        &Axis::finite(lo, hi),
        spec,
    )?;
    Ok((r.value, r.est_error, r.converged))
}

fn inner(spec: &QuadratureSpec) -> QuadratureSpec {
    spec.with_tolerances(spec.rel_tol * 0.2, spec.abs_tol * 0.2)
}

/// Signed-square map `d = D v|v|` on `v ∈ [-1, 1]`.
fn square_axis() -> Axis {
    Axis::finite(-1.0, 1.0).with_breakpoints([0.0])
}

fn term_one(
    p: &Potential,
    ktilde: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, bool), OracleError> {
    let (a, b) = p.support();
    let width = b - a;
    let q = SQRT_2 * ktilde;
    let ispec = inner(spec);
    let r = integrate_1d_nested(
        |v: f64| {
            let d = width * v * v.abs();
            let jac = 2.0 * width * v.abs();
            if jac == 0.0 {
                return (0.0, 0.0, true);
            }
            let k0 = bessel_k0_unchecked(q * d.abs());
            let (phi, phi_err, c1) = match xi_transform(q * d, &ispec) {
                Ok(x) => x,
                Err(_) => return (f64::NAN, f64::INFINITY, false),
            };
            // y_0 = u + d, y_1 = u
            let (ov, ov_err, c2) = match overlap(p, &[d], &ispec) {
                Ok(x) => x,
                Err(_) => return (f64::NAN, f64::INFINITY, false),
            };
            let w = jac * k0;
            (
                w * phi * ov,
                w * (phi_err * ov.abs() + phi.abs() * ov_err),
                c1 && c2,
            )
        },
        &square_axis(),
        spec,
    )?;
    let c = prefactor(1, ktilde);
    Ok((c * r.value, c * r.est_error, r.converged))
}

fn term_two(
    p: &Potential,
    ktilde: f64,
    spec: &QuadratureSpec,
) -> Result<(f64, f64, bool), OracleError> {
    let (a, b) = p.support();
    let width = b - a;
    let q = SQRT_2 * ktilde;
    let mid_spec = inner(spec);
    let leaf_spec = inner(&mid_spec);
    let r = integrate_1d_nested(
        |v0: f64| {
            let d0 = width * v0 * v0.abs();
            let jac0 = 2.0 * width * v0.abs();
            if jac0 == 0.0 {
                return (0.0, 0.0, true);
            }
            let k0_0 = bessel_k0_unchecked(q * d0.abs());
            let middle = integrate_1d_nested(
                |v1: f64| {
                    let d1 = width * v1 * v1.abs();
                    let jac1 = 2.0 * width * v1.abs();
                    if jac1 == 0.0 {
                        return (0.0, 0.0, true);
                    }
                    // y_2 = u, y_1 = u + d1, y_0 = u + d1 + d0
                    let (ov, ov_err, c2) = match overlap(p, &[d1, d0 + d1], &leaf_spec) {
                        Ok(x) => x,
                        Err(_) => return (f64::NAN, f64::INFINITY, false),
                    };
                    if ov == 0.0 && ov_err == 0.0 {
                        return (0.0, 0.0, true);
                    }
                    let (phi, phi_err, c1) = match xi_transform(q * (d0 + d1), &leaf_spec) {
                        Ok(x) => x,
                        Err(_) => return (f64::NAN, f64::INFINITY, false),
                    };
                    let w = jac1 * bessel_k0_unchecked(q * d1.abs());
                    (
                        w * phi * ov,
                        w * (phi_err * ov.abs() + phi.abs() * ov_err),
                        c1 && c2,
                    )
                },
                &square_axis(),
                &mid_spec,
            );
            match middle {
                Ok(m) => {
                    let w = jac0 * k0_0;
                    (w * m.value, w * m.est_error, m.converged)
                }
                Err(_) => (f64::NAN, f64::INFINITY, false),
            }
        },
        &square_axis(),
        spec,
    )?;
    let c = prefactor(2, ktilde);
    Ok((c * r.value, c * r.est_error, r.converged))
}

/// `Σ_{n ≤ n_max} (-1)^{n+1} T_n(k̃)`.
pub fn resolvent_trace(
    p: &Potential,
    ktilde: f64,
    n_max: usize,
    spec: &QuadratureSpec,
    k_min: f64,
) -> Result<ResolventTrace, OracleError> {
    check_args(n_max, ktilde, k_min)?;
    let terms: Vec<TraceTermResult> = (0..=n_max)
        .map(|n| trace_term(p, n, ktilde, spec, k_min))
        .collect::<Result<_, _>>()?;
    let mut value = 0.0;
    let mut est_error = 0.0;
    for t in &terms {
        let sign = if t.n % 2 == 0 { -1.0 } else { 1.0 };
        value += sign * t.value;
        est_error += t.est_error;
    }
    Ok(ResolventTrace {
        ktilde,
        value,
        est_error,
        converged: terms.iter().all(|t| t.converged),
        terms,
    })
}

/// `Σ_{m ≤ m_max} b_m k̃^{-(m+2)}`.
pub fn asymptotic_trace(
    table: &CoefficientTable,
    ktilde: f64,
    m_max: usize,
) -> Result<f64, OracleError> {
    if !(ktilde > 0.0 && ktilde.is_finite()) {
        return Err(OracleError::Invalid(format!(
            "ktilde must be positive, got {ktilde}"
        )));
    }
    (0..=m_max)
        .map(|m| {
            table
                .b(m)
                .map(|b| b * ktilde.powi(-(m as i32 + 2)))
                .ok_or(OracleError::IncompleteTable { order: m })
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn xi_transform_matches_direct_oscillatory_quadrature() {
        for b in [0.0, 0.3, 1.0, 2.5] {
            let (phi, _, ok) = xi_transform(b, &spec()).unwrap();
            assert!(ok);
            let direct = integrate_1d(
                |xi: f64| (1.0 + xi * xi).powf(-1.5) * (b * xi).cos(),
                &Axis::full_line(),
                &QuadratureSpec::default().with_tolerances(1e-11, 1e-13),
            )
            .unwrap();
            assert!(
                (phi - direct.value).abs() < 1e-8,
                "b={b}: {phi} vs {}",
                direct.value
            );
        }
    }

    #[test]
    fn zero_term_methods_agree() {
        let p = Potential::poly_bump(0.2, 0.9, 1.4, vec![1.0, -0.3]);
        let a = trace_term(&p, 0, 7.0, &spec(), 0.0).unwrap();
        let b = trace_term_zero_reduced(&p, 7.0, &spec()).unwrap();
        assert_eq!(a.method, TraceMethod::ClosedForm);
        assert!((a.value - b.value).abs() <= a.est_error + b.est_error + 1e-15);
    }

    #[test]
    fn k_min_is_enforced() {
        let p = Potential::canonical();
        let k_min = k_min_default(&p);
        assert!((k_min - 15.0).abs() < 1e-9);
        assert!(matches!(
            trace_term(&p, 1, 10.0, &spec(), k_min),
            Err(OracleError::BelowKMin { .. })
        ));
        assert!(matches!(
            trace_term(&p, 3, 20.0, &spec(), 0.0),
            Err(OracleError::Invalid(_))
        ));
    }

    #[test]
    fn zero_potential_gives_zero() {
        let p = Potential::canonical().scaled(0.0);
        for n in 0..=2 {
            assert_eq!(trace_term(&p, n, 12.0, &spec(), 0.0).unwrap().value, 0.0);
        }
        assert_eq!(
            resolvent_trace(&p, 12.0, 2, &spec(), 0.0).unwrap().value,
            0.0
        );
    }

    #[test]
    fn first_term_against_literal_t_and_y_integrals() {
        // Keep only the ξ-integral closed (Φ); integrate t, y0 and y1 directly.
        let p = Potential::bump(0.1, 0.8, 1.2);
        let k = 3.0;
        let q = SQRT_2 * k;
        let (a, b) = p.support();
        let lit_spec = QuadratureSpec::default().with_tolerances(1e-7, 1e-12);
        let leaf = lit_spec.with_tolerances(1e-9, 1e-14);
        let r = integrate_1d_nested(
            |y0: f64| {
                let r0 = p.eval_unchecked(y0, 0);
                let phi_cache = |y1: f64| xi_transform(q * (y0 - y1), &leaf).unwrap().0;
                let mid = integrate_1d_nested(
                    |y1: f64| {
                        let phi = phi_cache(y1);
                        let d = (y0 - y1).abs();
                        let t = integrate_1d(
                            |t: f64| (-q * d * t.cosh()).exp(),
                            &Axis::half_line(),
                            &leaf,
                        )
                        .unwrap();
                        let w = r0 * p.eval_unchecked(y1, 0) * phi;
                        (w * t.value, w.abs() * t.est_error, t.converged)
                    },
                    &Axis::finite(a, b).with_breakpoints([y0]),
                    &leaf,
                )
                .unwrap();
                (mid.value, mid.est_error, mid.converged)
            },
            &Axis::finite(a, b).with_breakpoints([p.center]),
            &lit_spec,
        )
        .unwrap();
        let literal = prefactor(1, k) * r.value;
        let reduced = trace_term(&p, 1, k, &spec(), 0.0).unwrap();
        assert!(
            ((literal - reduced.value) / reduced.value).abs() < 1e-5,
            "{literal} vs {}",
            reduced.value
        );
    }

    #[test]
    fn sign_pattern() {
        let p = Potential::canonical();
        let t0 = trace_term(&p, 0, 20.0, &spec(), 0.0).unwrap();
        assert!(t0.value > 0.0);
        assert!(resolvent_trace(&p, 20.0, 0, &spec(), 0.0).unwrap().value < 0.0);
    }
}
