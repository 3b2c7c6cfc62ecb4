//! Mixed discriminants and the distribution they induce on outcome tuples of
//! a POVM.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::{arrangement_count, distinct_arrangements, factorial, multisets, permutations};
use crate::linalg::ComplexMatrix;
use crate::linalg::Povm;

/// Default cap on `k^n` for outcome enumeration.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;
/// Largest tuple length the permutation formula is used for.
pub const MAX_DIM: usize = 6;

const CLAMP_TOL: f64 = 1e-9;
const RENORMALIZE_TOL: f64 = 1e-7;
const NON_REAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MixdiscError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("mixed discriminant has imaginary part {0:.3e}")]
    NonRealResult(f64),
    #[error("k^n = {count} exceeds the enumeration cap {cap}")]
    EnumerationCapExceeded { count: u128, cap: u128 },
    #[error("outcome weight {weight:.3e} for tuple {tuple:?} is negative")]
    NegativeWeight { tuple: Vec<usize>, weight: f64 },
    #[error("outcome weights sum to {0}, too far from 1 to renormalize")]
    MassDrift(f64),
    #[error("dimension {0} exceeds the supported maximum {MAX_DIM}")]
    TooLarge(usize),
}

/// `D(E_1, …, E_n) = (1/n!) Σ_π det[e^1_{π(1)}, …, e^n_{π(n)}]` where
/// `e^m_i` is column `m` of `E_i`; complex-valued in general.
pub fn mixed_discriminant_complex(matrices: &[&ComplexMatrix]) -> Result<Complex64, MixdiscError> {
    let n = matrices.len();
    if n > MAX_DIM {
        return Err(MixdiscError::TooLarge(n));
    }
    for m in matrices {
        if m.dim() != n {
            return Err(MixdiscError::DimensionMismatch { expected: n, got: m.dim() });
        }
    }
    if n == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let columns: Vec<Vec<Vec<Complex64>>> = matrices.iter().map(|m| (0..n).map(|c| m.column(c)).collect()).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for pi in permutations(n) {
        let cols: Vec<Vec<Complex64>> = (0..n).map(|m| columns[pi[m]][m].clone()).collect();
        acc += ComplexMatrix::from_columns(&cols).determinant();
    }
    Ok(acc / factorial(n) as f64)
}

/// Real mixed discriminant of Hermitian arguments.
pub fn mixed_discriminant(matrices: &[&ComplexMatrix]) -> Result<f64, MixdiscError> {
    let z = mixed_discriminant_complex(matrices)?;
    if z.im.abs() > NON_REAL_TOL {
        return Err(MixdiscError::NonRealResult(z.im));
    }
    Ok(z.re)
}

/// `D(F, …, F, 1−F, …, 1−F)` with `n − q` copies of `F` and `q` of `1 − F`.
pub fn symmetric_mixed(f: &ComplexMatrix, q: usize, n: usize) -> Result<f64, MixdiscError> {
    if f.dim() != n {
        return Err(MixdiscError::DimensionMismatch { expected: n, got: f.dim() });
    }
    if q > n {
        return Err(MixdiscError::DimensionMismatch { expected: n, got: q });
    }
    let complement = &ComplexMatrix::identity(n) - f;
    let args: Vec<&ComplexMatrix> = (0..n).map(|i| if i < n - q { f } else { &complement }).collect();
    mixed_discriminant(&args)
}

/// Probability weights `p_I` over tuples `I ∈ [k]^n`; zero weights omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub n: usize,
    pub k: usize,
    weights: BTreeMap<Vec<usize>, f64>,
}

impl OutcomeDistribution {
    /// Builds from explicit weights; nonpositive entries are dropped.
    pub fn from_weights(n: usize, k: usize, weights: impl IntoIterator<Item = (Vec<usize>, f64)>) -> Self {
        Self { n, k, weights: weights.into_iter().filter(|(_, w)| *w > 0.0).collect() }
    }

    pub fn get(&self, tuple: &[usize]) -> f64 {
        self.weights.get(tuple).copied().unwrap_or(0.0)
    }

    /// Support in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (&Vec<usize>, f64)> {
        self.weights.iter().map(|(t, &w)| (t, w))
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.values().sum()
    }

    /// Mass of the tuples all of whose entries lie in `set`.
    pub fn mass_inside(&self, set: &[bool]) -> f64 {
        self.iter().filter(|(t, _)| t.iter().all(|&i| set[i])).map(|(_, w)| w).sum()
    }
}

/// One weight per multiset of outcomes, shared by all its arrangements.
#[derive(Debug, Clone, PartialEq)]
pub struct MultisetWeight {
    /// Nondecreasing representative tuple.
    pub tuple: Vec<usize>,
    /// Weight of each single arrangement.
    pub weight: f64,
    /// Number of distinct arrangements.
    pub count: u128,
}

pub(crate) fn check_cap(k: usize, n: usize, cap: u128) -> Result<(), MixdiscError> {
    let count = (k as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(MixdiscError::EnumerationCapExceeded { count, cap });
    }
    Ok(())
}

/// Clamps tiny negatives, rejects larger ones and renormalizes small drift.
/// Shared by every weight family built from a nonnegative symmetric form.
pub(crate) fn clean_multiset_weights(raw: Vec<(Vec<usize>, f64)>) -> Result<Vec<MultisetWeight>, MixdiscError> {
    let mut out = Vec::with_capacity(raw.len());
    for (tuple, w) in raw {
        if w < -CLAMP_TOL {
            return Err(MixdiscError::NegativeWeight { tuple, weight: w });
        }
        let count = arrangement_count(&tuple);
        if w > 0.0 {
            out.push(MultisetWeight { tuple, weight: w, count });
        }
    }
    let total: f64 = out.iter().map(|m| m.weight * m.count as f64).sum();
    if (total - 1.0).abs() > RENORMALIZE_TOL {
        return Err(MixdiscError::MassDrift(total));
    }
    for m in &mut out {
        m.weight /= total;
    }
    Ok(out)
}

/// `p_I = D(E_{i_1}, …, E_{i_n})`, evaluated once per multiset.
pub fn multiset_distribution(povm: &Povm, cap: u128) -> Result<Vec<MultisetWeight>, MixdiscError> {
    let (k, n) = (povm.len(), povm.dim());
    if n > MAX_DIM {
        return Err(MixdiscError::TooLarge(n));
    }
    check_cap(k, n, cap)?;
    let raw: Result<Vec<(Vec<usize>, f64)>, MixdiscError> = multisets(k, n)
        .into_par_iter()
        .map(|tuple| {
            let args: Vec<&ComplexMatrix> = tuple.iter().map(|&i| &povm.outcomes()[i]).collect();
            let w = mixed_discriminant(&args)?;
            Ok((tuple, w))
        })
        .collect();
    clean_multiset_weights(raw?)
}

pub(crate) fn expand_multisets(n: usize, k: usize, ms: &[MultisetWeight]) -> OutcomeDistribution {
    let weights = ms.iter().flat_map(|m| distinct_arrangements(&m.tuple).into_iter().map(move |t| (t, m.weight)));
    OutcomeDistribution::from_weights(n, k, weights)
}

/// Distribution of outcome tuples `p_I` induced by a POVM.
pub fn outcome_distribution(povm: &Povm, cap: u128) -> Result<OutcomeDistribution, MixdiscError> {
    let ms = multiset_distribution(povm, cap)?;
    Ok(expand_multisets(povm.dim(), povm.len(), &ms))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(v: &[f64]) -> ComplexMatrix {
        ComplexMatrix::diag(v)
    }

    #[test]
    fn diagonal_pair_gives_half() {
        let (e1, e2) = (d(&[1.0, 0.0]), d(&[0.0, 1.0]));
        assert!((mixed_discriminant(&[&e1, &e2]).unwrap() - 0.5).abs() < 1e-15);
        assert_eq!(mixed_discriminant(&[&e1, &e1]).unwrap(), 0.0);
    }

    #[test]
    fn equal_arguments_give_determinant() {
        let m =
            ComplexMatrix::from_real_rows(&[vec![2.0, 1.0, 0.0], vec![1.0, 3.0, 0.5], vec![0.0, 0.5, 1.0]]).unwrap();
        let det = m.determinant().re;
        assert!((mixed_discriminant(&[&m, &m, &m]).unwrap() - det).abs() < 1e-12);
    }

    #[test]
    fn projective_povm_distribution() {
        let povm = Povm::new_unchecked(vec![d(&[1.0, 0.0]), d(&[0.0, 1.0])]);
        let p = outcome_distribution(&povm, DEFAULT_ENUMERATION_CAP).unwrap();
        assert!((p.get(&[0, 1]) - 0.5).abs() < 1e-15);
        assert!((p.get(&[1, 0]) - 0.5).abs() < 1e-15);
        assert_eq!(p.get(&[0, 0]), 0.0);
        assert_eq!(p.get(&[1, 1]), 0.0);
        assert_eq!(p.support_len(), 2);
    }

    #[test]
    fn trivial_povm_puts_all_mass_on_one_tuple() {
        let povm = Povm::new_unchecked(vec![ComplexMatrix::identity(3)]);
        let p = outcome_distribution(&povm, DEFAULT_ENUMERATION_CAP).unwrap();
        assert_eq!(p.get(&[0, 0, 0]), 1.0);
        assert_eq!(p.support_len(), 1);
    }

    #[test]
    fn cap_is_enforced() {
        let povm = Povm::new_unchecked(vec![d(&[0.5, 0.5]); 2]);
        assert!(matches!(
            outcome_distribution(&povm, 3),
            Err(MixdiscError::EnumerationCapExceeded { count: 4, cap: 3 })
        ));
    }

    #[test]
    fn symmetric_mixed_edge_cases() {
        let id = ComplexMatrix::identity(3);
        assert!((symmetric_mixed(&id, 0, 3).unwrap() - 1.0).abs() < 1e-15);
        for q in 1..=3 {
            assert_eq!(symmetric_mixed(&id, q, 3).unwrap(), 0.0);
        }
        assert!(matches!(symmetric_mixed(&id, 0, 2), Err(MixdiscError::DimensionMismatch { .. })));
    }

    #[test]
    fn large_negative_weight_is_an_error() {
        let raw = vec![(vec![0, 0], 1.5), (vec![0, 1], -0.25)];
        assert!(matches!(clean_multiset_weights(raw), Err(MixdiscError::NegativeWeight { .. })));
        let raw = vec![(vec![0, 0], 1.0), (vec![0, 1], -5e-10)];
        let cleaned = clean_multiset_weights(raw).unwrap();
        assert_eq!(cleaned.len(), 1);
    }
}
