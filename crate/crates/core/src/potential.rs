//! Smooth compactly supported modulating potentials.
//!
//! Three families: the normalized bump `A·exp(1 - 1/(1-u²))` with
//! `u = (x - center)/halfwidth`, the same bump times a polynomial `q(u)`,
//! and finite sums of either.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quadrature::{integrate_1d, Axis, QuadratureError, QuadratureSpec};

/// Highest derivative order `eval` supports.
pub const MAX_DERIVATIVE_ORDER: usize = 12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("derivative order {order} exceeds the supported maximum {max}")]
    UnsupportedOrder { order: usize, max: usize },
    #[error("invalid potential: {0}")]
    Invalid(String),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Bump,
    PolyBump,
    Sum,
}

fn one() -> f64 {
    1.0
}

/// A potential as a tree of families. `amplitude` scales the whole node,
/// including the children of a sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Potential {
    pub family: Family,
    #[serde(default)]
    pub center: f64,
    #[serde(default = "one")]
    pub halfwidth: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub poly_coeffs: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub children: Vec<Potential>,
}

impl Potential {
    pub fn bump(center: f64, halfwidth: f64, amplitude: f64) -> Self {
        Potential {
            family: Family::Bump,
            center,
            halfwidth,
            amplitude,
            poly_coeffs: Vec::new(),
            children: Vec::new(),
        }
    }

    /// Bump times `q(u) = Σ coeffs[i] u^i`.
    pub fn poly_bump(center: f64, halfwidth: f64, amplitude: f64, coeffs: Vec<f64>) -> Self {
        Potential {
            family: Family::PolyBump,
            poly_coeffs: coeffs,
            ..Self::bump(center, halfwidth, amplitude)
        }
    }

    pub fn sum(children: Vec<Potential>) -> Self {
        Potential {
            family: Family::Sum,
            center: 0.0,
            halfwidth: 1.0,
            amplitude: 1.0,
            poly_coeffs: Vec::new(),
            children,
        }
    }

    /// The unit bump on `[-1, 1]`.
    pub fn canonical() -> Self {
        Self::bump(0.0, 1.0, 1.0)
    }

    /// `c·ρ`.
    pub fn scaled(&self, c: f64) -> Self {
        Potential {
            amplitude: self.amplitude * c,
            ..self.clone()
        }
    }

    /// `ρ(· - shift)`.
    pub fn shifted(&self, shift: f64) -> Self {
        let mut p = self.clone();
        match p.family {
            Family::Sum => {
                p.children = p.children.iter().map(|c| c.shifted(shift)).collect();
            }
            _ => p.center += shift,
        }
        p
    }

    pub fn validate(&self) -> Result<(), PotentialError> {
        if !self.amplitude.is_finite() {
            return Err(PotentialError::Invalid("amplitude must be finite".into()));
        }
        match self.family {
            Family::Sum => {
                if self.children.is_empty() {
                    return Err(PotentialError::Invalid(
                        "sum needs at least one child".into(),
                    ));
                }
                if !self.poly_coeffs.is_empty() {
                    return Err(PotentialError::Invalid("sum takes no poly_coeffs".into()));
                }
                self.children.iter().try_for_each(Potential::validate)
            }
            family => {
                if !(self.halfwidth > 0.0 && self.halfwidth.is_finite()) {
                    return Err(PotentialError::Invalid(format!(
                        "halfwidth must be positive, got {}",
                        self.halfwidth
                    )));
                }
                if !self.center.is_finite() {
                    return Err(PotentialError::Invalid("center must be finite".into()));
                }
                if !self.children.is_empty() {
                    return Err(PotentialError::Invalid(format!(
                        "{family:?} takes no children"
                    )));
                }
                if family == Family::Bump && !self.poly_coeffs.is_empty() {
                    return Err(PotentialError::Invalid(
                        "bump takes no poly_coeffs; use poly_bump".into(),
                    ));
                }
                if self.poly_coeffs.iter().any(|c| !c.is_finite()) {
                    return Err(PotentialError::Invalid("poly_coeffs must be finite".into()));
                }
                Ok(())
            }
        }
    }

    /// Smallest closed interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        match self.family {
            Family::Sum => self
                .children
                .iter()
                .map(Potential::support)
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (c, d)| {
                    (a.min(c), b.max(d))
                }),
            _ => (self.center - self.halfwidth, self.center + self.halfwidth),
        }
    }

    /// Points where quadrature over the support should split: leaf edges and centers.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out = Vec::new();
        self.collect_breakpoints(&mut out);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn collect_breakpoints(&self, out: &mut Vec<f64>) {
        match self.family {
            Family::Sum => self
                .children
                .iter()
                .for_each(|c| c.collect_breakpoints(out)),
            _ => out.extend([
                self.center - self.halfwidth,
                self.center,
                self.center + self.halfwidth,
            ]),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.amplitude == 0.0
            || match self.family {
                Family::Sum => self.children.iter().all(Potential::is_zero),
                Family::PolyBump => self.poly_coeffs.iter().all(|&c| c == 0.0),
                Family::Bump => false,
            }
    }

    /// `ρ^{(order)}(x)`; exactly zero outside the support.
    pub fn eval(&self, x: f64, order: usize) -> Result<f64, PotentialError> {
        if order > MAX_DERIVATIVE_ORDER {
            return Err(PotentialError::UnsupportedOrder {
                order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        Ok(self.eval_unchecked(x, order))
    }

    /// `eval` for orders already known to be in range.
    pub fn eval_unchecked(&self, x: f64, order: usize) -> f64 {
        match self.family {
            Family::Sum => {
                self.amplitude
                    * self
                        .children
                        .iter()
                        .map(|c| c.eval_unchecked(x, order))
                        .sum::<f64>()
            }
            Family::Bump => {
                let u = (x - self.center) / self.halfwidth;
                self.amplitude * bump_derivative(u, order) / self.halfwidth.powi(order as i32)
            }
            Family::PolyBump => {
                let u = (x - self.center) / self.halfwidth;
                if u.abs() >= 1.0 {
                    return 0.0;
                }
                let mut acc = 0.0;
                let mut binom = 1.0;
                for j in 0..=order {
                    if j > 0 {
                        binom = binom * (order + 1 - j) as f64 / j as f64;
                    }
                    let q = poly_derivative(&self.poly_coeffs, u, j);
                    if q != 0.0 {
                        acc += binom * q * bump_derivative(u, order - j);
                    }
                }
                self.amplitude * acc / self.halfwidth.powi(order as i32)
            }
        }
    }

    /// `ρ^{(k)}(x)` for `k = 0..out.len()`.
    pub fn derivatives(&self, x: f64, out: &mut [f64]) {
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = self.eval_unchecked(x, k);
        }
    }

    /// Upper estimate of `max |ρ|` from a dense sample of the support.
    pub fn max_abs(&self) -> f64 {
        let (a, b) = self.support();
        let n = 4000;
        let grid = (0..=n).map(|i| a + (b - a) * i as f64 / n as f64);
        grid.chain(self.breakpoints())
            .map(|x| self.eval_unchecked(x, 0).abs())
            .fold(0.0, f64::max)
    }

    /// `∫ ρ(x)^power dx` over the support.
    pub fn integrate_power(
        &self,
        power: u32,
        spec: &QuadratureSpec,
    ) -> Result<f64, PotentialError> {
        if power == 0 {
            return Err(PotentialError::Invalid("power must be at least 1".into()));
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let (a, b) = self.support();
        let axis = Axis::finite(a, b).with_breakpoints(self.breakpoints());
        let r = integrate_1d(
            |x| self.eval_unchecked(x, 0).powi(power as i32),
            &axis,
            spec,
        )?;
        Ok(r.require_converged()?.value)
    }

    /// Central finite-difference estimate of `ρ^{(order)}(x)` from plain evaluations.
    pub fn fd_derivative(&self, x: f64, order: usize, h: f64) -> f64 {
        assert!(
            h > 0.0 && order <= 6,
            "fd_derivative needs h > 0 and order <= 6"
        );
        if order == 0 {
            return self.eval_unchecked(x, 0);
        }
        let k = order as f64;
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=order {
            if j > 0 {
                binom = binom * (order + 1 - j) as f64 / j as f64;
            }
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            acc += sign * binom * self.eval_unchecked(x + (0.5 * k - j as f64) * h, 0);
        }
        acc / h.powi(order as i32)
    }
}

/// Numerator polynomials of the bump derivatives:
/// `d^k/du^k e^{g(u)} = Q_k(u) (1-u²)^{-2k} e^{g(u)}`, `g = 1 - 1/(1-u²)`.
fn bump_polys() -> &'static [Vec<f64>] {
    static TABLE: OnceLock<Vec<Vec<f64>>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = vec![vec![1.0]];
        for k in 0..MAX_DERIVATIVE_ORDER {
            let q = &table[k];
            let mut next = vec![0.0; q.len() + 3];
            // (1 - u²)² Q' = (1 - 2u² + u⁴) Q'
            for (i, &c) in q.iter().enumerate().skip(1) {
                let d = c * i as f64;
                next[i - 1] += d;
                next[i + 1] -= 2.0 * d;
                next[i + 3] += d;
            }
            // 4k u (1 - u²) Q - 2u Q
            let kf = k as f64;
            for (i, &c) in q.iter().enumerate() {
                next[i + 1] += (4.0 * kf - 2.0) * c;
                next[i + 3] -= 4.0 * kf * c;
            }
            while next.len() > 1 && next.last() == Some(&0.0) {
                next.pop();
            }
            table.push(next);
        }
        table
    })
}

fn horner(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * u + c)
}

/// `d^k/du^k exp(1 - 1/(1-u²))`, zero for `|u| ≥ 1`.
fn bump_derivative(u: f64, k: usize) -> f64 {
    if u.abs() >= 1.0 {
        return 0.0;
    }
    let one_minus = 1.0 - u * u;
    let g = 1.0 - 1.0 / one_minus;
    if k == 0 {
        return g.exp();
    }
    horner(&bump_polys()[k], u) * (g - 2.0 * k as f64 * one_minus.ln()).exp()
}

/// `q^{(j)}(u)` for `q(u) = Σ coeffs[i] u^i`.
fn poly_derivative(coeffs: &[f64], u: f64, j: usize) -> f64 {
    coeffs
        .iter()
        .enumerate()
        .skip(j)
        .rev()
        .fold(0.0, |acc, (i, &c)| {
            let falling: f64 = ((i - j + 1)..=i).map(|m| m as f64).product();
            acc * u + c * falling
        })
}
