//! Numerical checks of the integral identities the reduction relies on.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientTable;
use crate::quadrature::{integrate_1d, integrate_1d_nested, Axis, QuadratureSpec};
use crate::specfun::{bessel_k0_unchecked, gamma_half};

use super::OracleError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub identity_name: String,
    pub lhs: Complex64,
    pub rhs: Complex64,
    pub abs_diff: f64,
    pub passed: bool,
    /// Inputs and diagnostics; always holds `tolerance`.
    pub parameters: BTreeMap<String, f64>,
}

impl IdentityReport {
    fn new(
        name: &str,
        lhs: Complex64,
        rhs: Complex64,
        tolerance: f64,
        mut parameters: BTreeMap<String, f64>,
    ) -> Self {
        let abs_diff = (lhs - rhs).norm();
        parameters.insert("tolerance".into(), tolerance);
        IdentityReport {
            identity_name: name.into(),
            lhs,
            rhs,
            abs_diff,
            passed: abs_diff <= tolerance,
            parameters,
        }
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// Upper bound on the part of `∫∫ K0(k r_1) K0(k r_2)` outside the disc of
/// radius `radius` around the midpoint, `h` being half the point separation.
fn k0_product_tail(k: f64, h: f64, radius: f64) -> f64 {
    let r = radius - h;
    if r <= 0.0 {
        return f64::INFINITY;
    }
    PI / (2.0 * k * r)
        * (2.0 * k * h).exp()
        * 2.0
        * PI
        * (-2.0 * k * radius).exp()
        * (2.0 * k * radius + 1.0)
        / (4.0 * k * k)
}

/// `∫ K0(k√((x_1-y)²+x_2²)) K0(k√((x_1-y')²+x_2²)) dx_1` at fixed `x_2 > 0`.
pub fn k0_product_line_integral(
    k: f64,
    y: f64,
    yprime: f64,
    x2: f64,
    spec: &QuadratureSpec,
) -> Result<f64, OracleError> {
    let r = integrate_1d(
        |x1: f64| {
            let r1 = ((x1 - y).powi(2) + x2 * x2).sqrt();
            let r2 = ((x1 - yprime).powi(2) + x2 * x2).sqrt();
            bessel_k0_unchecked(k * r1) * bessel_k0_unchecked(k * r2)
        },
        &Axis::full_line().with_breakpoints([y, yprime]),
        spec,
    )?;
    Ok(r.value)
}

/// Compares the plane integral of a product of two `K0` kernels with its
/// one-dimensional Fourier form `∫ (π/(2k²))(1+ξ²)^{-3/2} e^{-ikξ(y-y')} dξ`.
pub fn verify_k0_product_identity(
    k: f64,
    y: f64,
    yprime: f64,
    spec: &QuadratureSpec,
    tolerance: f64,
) -> Result<IdentityReport, OracleError> {
    if !(k > 0.0 && k.is_finite()) {
        return Err(OracleError::Invalid(format!("k must be positive, got {k}")));
    }
    let mid = 0.5 * (y + yprime);
    let h = 0.5 * (y - yprime).abs();
    let mut radius = h + 1.0 / k;
    while k0_product_tail(k, h, radius) > 0.1 * tolerance {
        radius *= 1.25;
    }
    let tail = k0_product_tail(k, h, radius);

    let inner = spec.with_tolerances(spec.rel_tol * 0.2, spec.abs_tol * 0.2);
    // symmetric in x_2, so integrate x_2 ∈ [0, R] and double
    let lhs = integrate_1d_nested(
        |x1: f64| {
            let d1 = x1 - y;
            let d2 = x1 - yprime;
            let r = integrate_1d(
                |x2: f64| {
                    let r1 = (d1 * d1 + x2 * x2).sqrt();
                    let r2 = (d2 * d2 + x2 * x2).sqrt();
                    bessel_k0_unchecked(k * r1) * bessel_k0_unchecked(k * r2)
                },
                &Axis::finite(0.0, radius),
                &inner,
            );
            match r {
                Ok(r) => (2.0 * r.value, 2.0 * r.est_error, r.converged),
                Err(_) => (f64::NAN, f64::INFINITY, false),
            }
        },
        &Axis::finite(mid - radius, mid + radius).with_breakpoints([y, yprime]),
        spec,
    )?;

    let delta = y - yprime;
    let rhs = integrate_1d(
        |xi: f64| {
            let phase = Complex64::new(0.0, -k * xi * delta).exp();
            phase * (PI / (2.0 * k * k) * (1.0 + xi * xi).powf(-1.5))
        },
        &Axis::full_line(),
        spec,
    )?;

    let mut params = BTreeMap::new();
    params.insert("k".into(), k);
    params.insert("y".into(), y);
    params.insert("yprime".into(), yprime);
    params.insert("box_radius".into(), radius);
    params.insert("tail_bound".into(), tail);
    params.insert("lhs_est_error".into(), lhs.est_error);
    params.insert("rhs_est_error".into(), rhs.est_error);
    params.insert("lhs_converged".into(), f64::from(u8::from(lhs.converged)));
    if delta == 0.0 {
        params.insert("coincident_closed_form".into(), PI / (k * k));
    }
    Ok(IdentityReport::new(
        "k0_product",
        real(lhs.value),
        rhs.value,
        tolerance,
        params,
    ))
}

/// `(2π)^{-1/2} ∫ e^{-iξx} e^{-κ|x-η|} dx = √(2/π) κ/(κ²+ξ²) e^{-iηξ}`,
/// checked at every sample. The report carries the worst sample.
pub fn verify_fourier_exponential(
    kappa: f64,
    eta: f64,
    xi_samples: &[f64],
    tolerance: f64,
) -> Result<IdentityReport, OracleError> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(OracleError::Invalid(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    if xi_samples.is_empty() {
        return Err(OracleError::Invalid("no xi samples".into()));
    }
    let spec = QuadratureSpec::default().with_tolerances(1e-12, 1e-14);
    let norm = (2.0 * PI).sqrt().recip();
    let mut worst: Option<(f64, Complex64, Complex64, f64)> = None;
    for &xi in xi_samples {
        let direct = integrate_1d(
            |x: f64| Complex64::new(-kappa * (x - eta).abs(), -xi * x).exp() * norm,
            &Axis::full_line().with_breakpoints([eta]),
            &spec,
        )?;
        let closed = Complex64::new(0.0, -eta * xi).exp()
            * ((2.0 / PI).sqrt() * kappa / (kappa * kappa + xi * xi));
        let diff = (direct.value - closed).norm();
        if worst.is_none_or(|w| diff > w.3) {
            worst = Some((xi, direct.value, closed, diff));
        }
    }
    let (xi, lhs, rhs, _) = worst.expect("non-empty samples");
    let mut params = BTreeMap::new();
    params.insert("kappa".into(), kappa);
    params.insert("eta".into(), eta);
    params.insert("worst_xi".into(), xi);
    params.insert("samples".into(), xi_samples.len() as f64);
    Ok(IdentityReport::new(
        "fourier_exponential",
        lhs,
        rhs,
        tolerance,
        params,
    ))
}

/// Checks `a_n Γ(n/2 + 1) = b_n` for every order in the table and evaluates
/// the truncated heat series `Σ a_n t^{n/2}` at `t_samples`.
pub fn watson_roundtrip(
    table: &CoefficientTable,
    t_samples: &[f64],
) -> Result<IdentityReport, OracleError> {
    let mut worst = (0usize, 0.0f64, 0.0f64, -1.0f64);
    let mut scale = 0.0f64;
    for m in 0..=table.max_order {
        let b = table
            .b(m)
            .ok_or(OracleError::IncompleteTable { order: m })?;
        let a = table
            .a(m)
            .ok_or(OracleError::IncompleteTable { order: m })?;
        let back = a * gamma_half(m as u32 + 2);
        let diff = (back - b).abs();
        scale = scale.max(b.abs());
        if diff > worst.3 {
            worst = (m, back, b, diff);
        }
    }
    let mut params = BTreeMap::new();
    params.insert("worst_order".into(), worst.0 as f64);
    params.insert("max_order".into(), table.max_order as f64);
    for &t in t_samples {
        let series: f64 = table
            .an
            .iter()
            .map(|e| e.value * t.powf(e.n as f64 / 2.0))
            .sum();
        params.insert(format!("heat_series(t={t})"), series);
    }
    Ok(IdentityReport::new(
        "watson_roundtrip",
        real(worst.1),
        real(worst.2),
        4.0 * f64::EPSILON * scale,
        params,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default().with_tolerances(1e-9, 1e-11)
    }

    #[test]
    fn fourier_at_origin_and_symmetry() {
        let r = verify_fourier_exponential(1.0, 0.0, &[0.0], 1e-9).unwrap();
        assert!((r.rhs.re - (2.0 / PI).sqrt()).abs() < 1e-15);
        assert!(r.passed, "{r:?}");
        let a = verify_fourier_exponential(1.0, 0.0, &[0.8], 1e-9).unwrap();
        let b = verify_fourier_exponential(1.0, 0.0, &[-0.8], 1e-9).unwrap();
        assert!((a.lhs - b.lhs).norm() < 1e-12);
        let c = verify_fourier_exponential(2.0, 0.7, &[1.3], 1e-9).unwrap();
        assert!(c.passed, "{c:?}");
    }

    #[test]
    fn k0_product_coincident_points() {
        let r = verify_k0_product_identity(2.0, 0.0, 0.0, &spec(), 1e-6).unwrap();
        assert!(r.passed, "{r:?}");
        assert!((r.lhs.re - PI / 4.0).abs() < 1e-6);
        assert!((r.rhs.re - PI / 4.0).abs() < 1e-9);
    }

    #[test]
    fn k0_product_separated_points() {
        let r = verify_k0_product_identity(1.0, 0.0, 1.0, &spec(), 1e-5).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn tightened_tolerance_fails_honestly() {
        let r = verify_fourier_exponential(1.5, 0.2, &[0.4, 2.0], 1e-18).unwrap();
        assert!(!r.passed);
        assert!(r.abs_diff > 0.0 && r.abs_diff < 1e-9);
    }

    #[test]
    fn line_integral_decays_faster_than_inverse_square() {
        let (k, y, yp) = (1.0, 0.0, 0.5);
        let s = QuadratureSpec::default().with_tolerances(1e-10, 1e-30);
        let near = k0_product_line_integral(k, y, yp, 3.0, &s).unwrap() * (k * 3.0f64).powi(2);
        let far = k0_product_line_integral(k, y, yp, 6.0, &s).unwrap() * (k * 6.0f64).powi(2);
        assert!(far < near);
    }
}
