//! `ρ_{n,s}(w) = Π_l ρ(φ⁻¹(s·w)_l)` and its mixed partials on the `w_n` axis.
//!
//! Factor `l` is `ρ(L_l(w))` with `L_l` linear and
//! `∂L_l/∂w_j = ½ s(j) σ_{l,j}`, `σ_{l,j} = +1` for `j ≥ l` and `-1` otherwise.
//! On the axis `w_0 = … = w_{n-1} = 0` every `L_l` equals `w_n/2`, so
//! `∂_α ρ_{n,s}(0, …, 0, w_n)` is a finite sum `Σ W_k Π_l ρ^{(k_l)}(w_n/2)`.
//! Terms are merged by the sorted order vector `k`.

use std::collections::BTreeMap;

use crate::potential::{Potential, MAX_DERIVATIVE_ORDER};

use super::combinatorics::{phi_inverse, MultiIndex, SignAssignment};
use super::CoefficientError;

/// One merged term: weight and the ascending derivative orders of the
/// `n + 1` factors.
#[derive(Debug, Clone, PartialEq)]
pub struct StencilTerm {
    pub weight: f64,
    pub orders: Vec<usize>,
}

/// `∂_α ρ_{n,s}` on the `w_n` axis as a list of product terms.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativeStencil {
    pub terms: Vec<StencilTerm>,
}

impl DerivativeStencil {
    pub fn new(s: &SignAssignment, alpha: &MultiIndex) -> Result<Self, CoefficientError> {
        let n = s.n();
        if alpha.n() != n {
            return Err(CoefficientError::Dimension(format!(
                "multi-index of length {} with sign assignment of length {n}",
                alpha.n()
            )));
        }
        if alpha.weight() as usize > MAX_DERIVATIVE_ORDER {
            return Err(CoefficientError::Invalid(format!(
                "derivative weight {} above {MAX_DERIVATIVE_ORDER}",
                alpha.weight()
            )));
        }
        let mut merged: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut orders = vec![0usize; n + 1];
        distribute(s, alpha.entries(), 0, 1.0, &mut orders, &mut merged);
        let terms = merged
            .into_iter()
            .filter(|(_, w)| *w != 0.0)
            .map(|(orders, weight)| StencilTerm { weight, orders })
            .collect();
        Ok(DerivativeStencil { terms })
    }

    /// Evaluates the stencil at `x = w_n/2`.
    pub fn eval(&self, p: &Potential, x: f64) -> f64 {
        let max = self
            .terms
            .iter()
            .flat_map(|t| t.orders.iter().copied())
            .max()
            .unwrap_or(0);
        let mut d = [0.0; MAX_DERIVATIVE_ORDER + 1];
        p.derivatives(x, &mut d[..=max]);
        self.terms
            .iter()
            .map(|t| t.weight * t.orders.iter().map(|&k| d[k]).product::<f64>())
            .sum()
    }
}

/// Spreads the `α_j` derivatives in `w_j` over the `n + 1` factors.
fn distribute(
    s: &SignAssignment,
    alpha: &[u32],
    j: usize,
    weight: f64,
    orders: &mut Vec<usize>,
    out: &mut BTreeMap<Vec<usize>, f64>,
) {
    if j == alpha.len() {
        let mut key = orders.clone();
        key.sort_unstable();
        *out.entry(key).or_insert(0.0) += weight;
        return;
    }
    let factors = orders.len();
    let mut beta = vec![0u32; factors];
    spread(s, alpha, j, alpha[j], 0, &mut beta, weight, orders, out);
}

#[allow(clippy::too_many_arguments)]
fn spread(
    s: &SignAssignment,
    alpha: &[u32],
    j: usize,
    remaining: u32,
    l: usize,
    beta: &mut Vec<u32>,
    weight: f64,
    orders: &mut Vec<usize>,
    out: &mut BTreeMap<Vec<usize>, f64>,
) {
    let factors = orders.len();
    if l + 1 == factors {
        beta[l] = remaining;
        // multinomial α_j! / Π β_l! times Π (½ s(j) σ_{l,j})^{β_l}
        let mut w = weight * factorial(alpha[j]);
        for (m, &b) in beta.iter().enumerate() {
            let sigma = if j >= m { 1.0 } else { -1.0 };
            w *= (0.5 * s.get(j) * sigma).powi(b as i32) / factorial(b);
        }
        for (m, &b) in beta.iter().enumerate() {
            orders[m] += b as usize;
        }
        distribute(s, alpha, j + 1, w, orders, out);
        for (m, &b) in beta.iter().enumerate() {
            orders[m] -= b as usize;
        }
        return;
    }
    for b in 0..=remaining {
        beta[l] = b;
        spread(s, alpha, j, remaining - b, l + 1, beta, weight, orders, out);
    }
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// `ρ_{n,s}(w)` by direct evaluation of the product.
pub fn rho_ns(
    p: &Potential,
    s: Option<&SignAssignment>,
    w: &[f64],
) -> Result<f64, CoefficientError> {
    let y = phi_inverse(w, s)?;
    Ok(y.iter().map(|&yl| p.eval_unchecked(yl, 0)).product())
}

/// `∂_α ρ_{n,s}(0, …, 0, w_n)`.
pub fn rho_ns_axis_derivative(
    p: &Potential,
    s: &SignAssignment,
    alpha: &MultiIndex,
    w_n: f64,
) -> Result<f64, CoefficientError> {
    Ok(DerivativeStencil::new(s, alpha)?.eval(p, 0.5 * w_n))
}
