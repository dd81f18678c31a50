//! `b_{n,l}`, `b_m`, `a_n` and the serialized coefficient table.

use std::collections::BTreeMap;
use std::f64::consts::{PI, SQRT_2};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::potential::Potential;
use crate::quadrature::{integrate_1d, Axis, QuadratureSpec};
use crate::specfun::gamma_half;

use super::combinatorics::{MultiIndex, SignAssignment};
use super::cvalues::{c_from_key, c_key, CKey, CValue, C_ZERO};
use super::transform::DerivativeStencil;
use super::CoefficientError;

/// Highest `m` for which `b_m` and `a_m` are computed.
pub const MAX_ORDER: usize = 5;

/// `b_1 = B1_FACTOR · ∫ρ²`.
pub const B1_FACTOR: f64 = SQRT_2 / 64.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BValue {
    pub value: f64,
    pub est_error: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CEntry {
    pub n: usize,
    pub alpha: Vec<u32>,
    pub s: Vec<i8>,
    pub value: f64,
    pub err: f64,
    pub imag: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BnlEntry {
    pub n: usize,
    pub l: usize,
    pub value: f64,
    pub err: f64,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BmEntry {
    pub m: usize,
    pub value: f64,
    pub err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnEntry {
    pub n: usize,
    pub value: f64,
}

/// All coefficients up to `max_order` for one potential. Rows appear in
/// canonical order: by `(n, l)`, then multi-indices in colex order, then sign
/// maps in binary-counting order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTable {
    pub potential: Potential,
    pub spec: QuadratureSpec,
    pub max_order: usize,
    pub c: Vec<CEntry>,
    pub bnl: Vec<BnlEntry>,
    pub bm: Vec<BmEntry>,
    pub an: Vec<AnEntry>,
}

/// `b_m / Γ(m/2 + 1)`.
pub fn heat_from_resolvent(b: f64, m: usize) -> f64 {
    b / gamma_half(m as u32 + 2)
}

struct Cell {
    n: usize,
    l: usize,
    c: Vec<CEntry>,
    b: BValue,
}

fn check_order(order: usize) -> Result<(), CoefficientError> {
    if order > MAX_ORDER {
        return Err(CoefficientError::OrderTooHigh {
            order,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// `∫ Π_l ρ^{(k_l)}(x) dx` over the support.
fn product_integral(
    p: &Potential,
    orders: &[usize],
    spec: &QuadratureSpec,
) -> Result<BValue, CoefficientError> {
    if p.is_zero() {
        return Ok(BValue {
            value: 0.0,
            est_error: 0.0,
            converged: true,
        });
    }
    let (a, b) = p.support();
    let axis = Axis::finite(a, b).with_breakpoints(p.breakpoints());
    let r = integrate_1d(
        |x| {
            orders
                .iter()
                .map(|&k| p.eval_unchecked(x, k))
                .product::<f64>()
        },
        &axis,
        spec,
    )
    .map_err(|e| {
        CoefficientError::quadrature(format!("integral of derivative orders {orders:?}"), e)
    })?;
    Ok(BValue {
        value: r.value,
        est_error: r.est_error,
        converged: r.converged,
    })
}

fn compute_cell(
    p: &Potential,
    n: usize,
    l: usize,
    spec: &QuadratureSpec,
) -> Result<Cell, CoefficientError> {
    if n == 0 {
        let c = vec![CEntry {
            n: 0,
            alpha: Vec::new(),
            s: Vec::new(),
            value: C_ZERO,
            err: 0.0,
            imag: 0.0,
            converged: true,
        }];
        if l > 0 {
            let zero = BValue {
                value: 0.0,
                est_error: 0.0,
                converged: true,
            };
            return Ok(Cell { n, l, c, b: zero });
        }
        // ∫ 2ρ(y/2) dy = 4∫ρ
        let j = product_integral(p, &[0], spec)?;
        let b = BValue {
            value: 4.0 * j.value,
            est_error: 4.0 * j.est_error,
            converged: j.converged,
        };
        return Ok(Cell { n, l, c, b });
    }

    let alphas = MultiIndex::with_weight(n, l as u32);
    let signs = SignAssignment::all(n);
    let mut pairs = Vec::with_capacity(alphas.len() * signs.len());
    for alpha in &alphas {
        for s in &signs {
            pairs.push((alpha, s));
        }
    }

    let keys: Vec<CKey> = {
        let mut k: Vec<CKey> = pairs.iter().map(|(a, s)| c_key(a, s)).collect();
        k.sort();
        k.dedup();
        k
    };
    let cvals: Vec<CValue> = keys
        .par_iter()
        .map(|k| c_from_key(k, spec))
        .collect::<Result<_, _>>()?;
    let cmap: BTreeMap<&CKey, CValue> = keys.iter().zip(cvals).collect();

    let stencils: Vec<DerivativeStencil> = pairs
        .iter()
        .map(|(a, s)| DerivativeStencil::new(s, a))
        .collect::<Result<_, _>>()?;
    let orders: Vec<Vec<usize>> = {
        let mut o: Vec<Vec<usize>> = stencils
            .iter()
            .flat_map(|st| st.terms.iter().map(|t| t.orders.clone()))
            .collect();
        o.sort();
        o.dedup();
        o
    };
    let jvals: Vec<BValue> = orders
        .par_iter()
        .map(|o| product_integral(p, o, spec))
        .collect::<Result<_, _>>()?;
    let jmap: BTreeMap<&Vec<usize>, BValue> = orders.iter().zip(jvals).collect();

    let mut entries = Vec::with_capacity(pairs.len());
    let mut value = 0.0;
    let mut err = 0.0;
    let mut converged = true;
    for ((alpha, s), stencil) in pairs.iter().zip(&stencils) {
        let c = cmap[&c_key(alpha, s)];
        // ∫ ∂_α ρ_{n,s}(0, …, 0, y) dy = 2 Σ W_k ∫ Π ρ^{(k_l)}(x) dx
        let mut integral = 0.0;
        let mut integral_err = 0.0;
        for t in &stencil.terms {
            let j = jmap[&t.orders];
            integral += 2.0 * t.weight * j.value;
            integral_err += 2.0 * t.weight.abs() * j.est_error;
            converged &= j.converged;
        }
        value += c.value * integral;
        err += c.value.abs() * integral_err + c.est_error * integral.abs();
        converged &= c.converged;
        entries.push(CEntry {
            n,
            alpha: alpha.entries().to_vec(),
            s: s.signs().to_vec(),
            value: c.value,
            err: c.est_error,
            imag: c.imag,
            converged: c.converged,
        });
    }
    Ok(Cell {
        n,
        l,
        c: entries,
        b: BValue {
            value,
            est_error: err,
            converged,
        },
    })
}

/// `b_{n,l}`.
pub fn b_nl(
    p: &Potential,
    n: usize,
    l: usize,
    spec: &QuadratureSpec,
) -> Result<BValue, CoefficientError> {
    check_order(n + l)?;
    p.validate()?;
    Ok(compute_cell(p, n, l, spec)?.b)
}

fn assemble(cells: &[&Cell], m: usize) -> (f64, f64) {
    // (1/8) Σ_{n+l=m} (-2π)^{-(n+1)} b_{n,l}
    let mut value = 0.0;
    let mut err = 0.0;
    for cell in cells.iter().filter(|c| c.n + c.l == m) {
        let f = 0.125 * (-2.0 * PI).powi(-(cell.n as i32 + 1));
        value += f * cell.b.value;
        err += f.abs() * cell.b.est_error;
    }
    (value, err)
}

/// `b_m`; fails if any contributing integral did not converge.
pub fn b_m(p: &Potential, m: usize, spec: &QuadratureSpec) -> Result<f64, CoefficientError> {
    check_order(m)?;
    p.validate()?;
    let cells: Vec<Cell> = (0..=m)
        .into_par_iter()
        .map(|n| compute_cell(p, n, m - n, spec))
        .collect::<Result<_, _>>()?;
    let refs: Vec<&Cell> = cells.iter().collect();
    let (value, err) = assemble(&refs, m);
    if let Some(bad) = cells.iter().find(|c| !c.b.converged) {
        return Err(CoefficientError::NotConverged {
            context: format!("b_{{{},{}}} while assembling b_{m}", bad.n, bad.l),
            value,
            error: err,
        });
    }
    Ok(value)
}

/// `a_n = b_n / Γ(n/2 + 1)`.
pub fn a_n(p: &Potential, n: usize, spec: &QuadratureSpec) -> Result<f64, CoefficientError> {
    Ok(heat_from_resolvent(b_m(p, n, spec)?, n))
}

/// `(-(1/4π)∫ρ, B1_FACTOR·∫ρ²)` straight from the potential.
pub fn closed_form_b0_b1(
    p: &Potential,
    spec: &QuadratureSpec,
) -> Result<(f64, f64), CoefficientError> {
    p.validate()?;
    let i1 = p.integrate_power(1, spec)?;
    let i2 = p.integrate_power(2, spec)?;
    Ok((-i1 / (4.0 * PI), B1_FACTOR * i2))
}

impl CoefficientTable {
    /// Computes every `c`, `b_{n,l}`, `b_m` and `a_m` with `m ≤ max_order`.
    ///
    /// Cells that fail to converge are kept with `converged = false`; only
    /// invalid input is an error.
    pub fn compute(
        p: &Potential,
        max_order: usize,
        spec: &QuadratureSpec,
    ) -> Result<Self, CoefficientError> {
        check_order(max_order)?;
        p.validate()?;
        spec.validate()
            .map_err(|e| CoefficientError::quadrature("coefficient table".into(), e))?;
        let index: Vec<(usize, usize)> = (0..=max_order)
            .flat_map(|m| (0..=m).map(move |n| (n, m - n)))
            .collect();
        let mut cells: Vec<Cell> = index
            .par_iter()
            .map(|&(n, l)| compute_cell(p, n, l, spec))
            .collect::<Result<_, _>>()?;
        cells.sort_by_key(|c| (c.n, c.l));

        let mut c = Vec::new();
        for cell in &cells {
            // the n = 0 constant is listed once
            if cell.n == 0 && cell.l > 0 {
                continue;
            }
            c.extend(cell.c.iter().cloned());
        }
        let bnl = cells
            .iter()
            .map(|cell| BnlEntry {
                n: cell.n,
                l: cell.l,
                value: cell.b.value,
                err: cell.b.est_error,
                converged: cell.b.converged,
            })
            .collect();
        let refs: Vec<&Cell> = cells.iter().collect();
        let bm: Vec<BmEntry> = (0..=max_order)
            .map(|m| {
                let (value, err) = assemble(&refs, m);
                BmEntry { m, value, err }
            })
            .collect();
        let an = bm
            .iter()
            .map(|e| AnEntry {
                n: e.m,
                value: heat_from_resolvent(e.value, e.m),
            })
            .collect();
        Ok(CoefficientTable {
            potential: p.clone(),
            spec: *spec,
            max_order,
            c,
            bnl,
            bm,
            an,
        })
    }

    pub fn b(&self, m: usize) -> Option<f64> {
        self.bm.iter().find(|e| e.m == m).map(|e| e.value)
    }

    pub fn a(&self, n: usize) -> Option<f64> {
        self.an.iter().find(|e| e.n == n).map(|e| e.value)
    }

    pub fn bnl(&self, n: usize, l: usize) -> Option<&BnlEntry> {
        self.bnl.iter().find(|e| e.n == n && e.l == l)
    }

    /// True when every `c` and `b_{n,l}` converged.
    pub fn all_converged(&self) -> bool {
        self.c.iter().all(|e| e.converged) && self.bnl.iter().all(|e| e.converged)
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn n0_cells() {
        let p = Potential::bump(0.4, 0.7, 1.3);
        let spec = QuadratureSpec::default();
        let b00 = b_nl(&p, 0, 0, &spec).unwrap();
        let i1 = p.integrate_power(1, &spec).unwrap();
        assert!(rel(b00.value, 4.0 * i1) < 1e-12);
        assert_eq!(b_nl(&p, 0, 1, &spec).unwrap().value, 0.0);
    }

    #[test]
    fn b10_and_b11() {
        let p = Potential::canonical();
        let spec = QuadratureSpec::default();
        let i2 = p.integrate_power(2, &spec).unwrap();
        let b10 = b_nl(&p, 1, 0, &spec).unwrap();
        assert!(
            rel(b10.value, PI * PI / SQRT_2 * i2) < 1e-7,
            "{}",
            b10.value
        );
        assert_eq!(b_nl(&p, 1, 1, &spec).unwrap().value, 0.0);
    }

    #[test]
    fn engine_matches_closed_form() {
        let p = Potential::poly_bump(0.3, 1.2, 0.8, vec![1.0, 0.6, 0.2]);
        let spec = QuadratureSpec::default();
        let (b0, b1) = closed_form_b0_b1(&p, &spec).unwrap();
        assert!(rel(b_m(&p, 0, &spec).unwrap(), b0) < 1e-10);
        assert!(rel(b_m(&p, 1, &spec).unwrap(), b1) < 1e-7);
    }

    #[test]
    fn order_cap() {
        let p = Potential::canonical();
        let spec = QuadratureSpec::default();
        assert!(matches!(
            b_m(&p, MAX_ORDER + 1, &spec),
            Err(CoefficientError::OrderTooHigh { .. })
        ));
        assert!(CoefficientTable::compute(&p, 9, &spec).is_err());
    }

    #[test]
    fn table_layout_and_json_round_trip() {
        let p = Potential::canonical();
        let spec = QuadratureSpec::default();
        let t = CoefficientTable::compute(&p, 2, &spec).unwrap();
        assert!(t.all_converged());
        let cells: Vec<(usize, usize)> = t.bnl.iter().map(|e| (e.n, e.l)).collect();
        assert_eq!(cells, vec![(0, 0), (0, 1), (0, 2), (1, 0), (1, 1), (2, 0)]);
        // c: one n = 0 row, two for (1,0), two for (1,1), four for (2,0)
        assert_eq!(t.c.len(), 9);
        for (e, a) in t.bm.iter().zip(&t.an) {
            assert_eq!(a.value, e.value / gamma_half(e.m as u32 + 2));
        }
        let back = CoefficientTable::from_json(&t.to_json().unwrap()).unwrap();
        assert_eq!(back, t);
    }
}
