//! Sign maps, multi-indices and the linear change of variables `y ↔ w`.

use serde::{Deserialize, Serialize};

use super::CoefficientError;

/// A map `{0, …, n-1} → {+1, -1}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SignAssignment {
    signs: Vec<i8>,
}

impl SignAssignment {
    pub fn new(signs: Vec<i8>) -> Result<Self, CoefficientError> {
        if signs.is_empty() {
            return Err(CoefficientError::Invalid(
                "a sign assignment needs n >= 1".into(),
            ));
        }
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(CoefficientError::Invalid(format!(
                "signs must be +1 or -1, got {signs:?}"
            )));
        }
        Ok(SignAssignment { signs })
    }

    /// All `2^n` assignments. Bit `j` of the counter set means `s(j) = -1`.
    pub fn all(n: usize) -> Vec<SignAssignment> {
        assert!((1..31).contains(&n));
        (0u32..(1 << n))
            .map(|bits| SignAssignment {
                signs: (0..n)
                    .map(|j| if bits >> j & 1 == 1 { -1 } else { 1 })
                    .collect(),
            })
            .collect()
    }

    pub fn n(&self) -> usize {
        self.signs.len()
    }

    pub fn get(&self, j: usize) -> f64 {
        f64::from(self.signs[j])
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    /// `-s`.
    pub fn flipped(&self) -> SignAssignment {
        SignAssignment {
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }
}

/// `α = (α_0, …, α_{n-1})`, defined for `n ≥ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex {
    entries: Vec<u32>,
}

impl MultiIndex {
    pub fn new(entries: Vec<u32>) -> Result<Self, CoefficientError> {
        if entries.is_empty() {
            return Err(CoefficientError::Invalid(
                "a multi-index needs n >= 1".into(),
            ));
        }
        Ok(MultiIndex { entries })
    }

    pub fn zeros(n: usize) -> Self {
        MultiIndex {
            entries: vec![0; n],
        }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn weight(&self) -> u32 {
        self.entries.iter().sum()
    }

    pub fn entries(&self) -> &[u32] {
        &self.entries
    }

    /// All multi-indices of length `n` and weight `l`, in colex order.
    pub fn with_weight(n: usize, l: u32) -> Vec<MultiIndex> {
        assert!(n >= 1);
        let mut out = Vec::new();
        let mut current = vec![0u32; n];
        compositions(&mut current, 0, l, &mut out);
        out.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        out.into_iter()
            .map(|entries| MultiIndex { entries })
            .collect()
    }
}

fn compositions(current: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Vec<u32>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.clone());
        return;
    }
    for v in 0..=remaining {
        current[pos] = v;
        compositions(current, pos + 1, remaining - v, out);
    }
}

/// `w_l = y_l - y_{l+1}` for `l < n`, `w_n = y_n + y_0`.
pub fn phi_forward(y: &[f64]) -> Vec<f64> {
    let n = y.len() - 1;
    if n == 0 {
        return vec![2.0 * y[0]];
    }
    let mut w: Vec<f64> = y.windows(2).map(|p| p[0] - p[1]).collect();
    w.push(y[n] + y[0]);
    w
}

/// Inverse of [`phi_forward`] applied to `(s(0)w_0, …, s(n-1)w_{n-1}, w_n)`.
pub fn phi_inverse(
    w: &[f64],
    signs: Option<&SignAssignment>,
) -> Result<Vec<f64>, CoefficientError> {
    let n = w
        .len()
        .checked_sub(1)
        .ok_or_else(|| CoefficientError::Dimension("empty w vector".into()))?;
    match (n, signs) {
        (0, None) => return Ok(vec![0.5 * w[0]]),
        (0, Some(_)) => {
            return Err(CoefficientError::Dimension(
                "n = 0 takes no sign assignment".into(),
            ))
        }
        (_, None) => {
            return Err(CoefficientError::Dimension(format!(
                "n = {n} needs a sign assignment"
            )))
        }
        (_, Some(s)) if s.n() != n => {
            return Err(CoefficientError::Dimension(format!(
                "sign assignment of length {} for n = {n}",
                s.n()
            )))
        }
        _ => {}
    }
    let s = signs.expect("checked above");
    let hat: Vec<f64> = (0..=n)
        .map(|m| if m < n { s.get(m) * w[m] } else { w[m] })
        .collect();
    let total: f64 = hat.iter().sum();
    let mut before = 0.0;
    let mut y = Vec::with_capacity(n + 1);
    for &h in &hat {
        y.push(0.5 * ((total - before) - before));
        before += h;
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sign_enumeration_is_binary_counting() {
        let all = SignAssignment::all(2);
        let raw: Vec<&[i8]> = all.iter().map(|s| s.signs()).collect();
        assert_eq!(raw, vec![&[1, 1][..], &[-1, 1], &[1, -1], &[-1, -1]]);
    }

    #[test]
    fn multi_indices_in_colex_order() {
        let all = MultiIndex::with_weight(3, 2);
        let raw: Vec<&[u32]> = all.iter().map(|a| a.entries()).collect();
        assert_eq!(
            raw,
            vec![
                &[2, 0, 0][..],
                &[1, 1, 0],
                &[0, 2, 0],
                &[1, 0, 1],
                &[0, 1, 1],
                &[0, 0, 2]
            ]
        );
        assert!(all.iter().all(|a| a.weight() == 2));
        assert_eq!(MultiIndex::with_weight(4, 3).len(), 20);
    }

    #[test]
    fn constructors_reject_bad_input() {
        assert!(SignAssignment::new(vec![]).is_err());
        assert!(SignAssignment::new(vec![1, 0]).is_err());
        assert!(MultiIndex::new(vec![]).is_err());
    }

    #[test]
    fn phi_inverse_small_cases() {
        assert_eq!(phi_inverse(&[3.0], None).unwrap(), vec![1.5]);
        for s in SignAssignment::all(1) {
            assert_eq!(phi_inverse(&[0.0, 0.8], Some(&s)).unwrap(), vec![0.4, 0.4]);
        }
        assert!(phi_inverse(&[1.0, 2.0], None).is_err());
        assert!(phi_inverse(&[1.0], Some(&SignAssignment::all(1)[0])).is_err());
        assert!(phi_inverse(&[1.0, 2.0, 3.0], Some(&SignAssignment::all(1)[0])).is_err());
    }
}
