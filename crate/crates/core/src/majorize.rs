//! Majorization tests and constructive decompositions of a vector as a convex
//! combination of coordinate permutations of another.
//!
//! A [`Permutation`] `p` acts on vectors by `(p·v)[a] = v[p[a]]`; its matrix
//! has a one at `(a, p[a])`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::combinatorics::binomial;

/// Entries below this are not part of the support when extracting matchings.
const SUPPORT_TOL: f64 = 1e-10;
/// Coordinates closer than this count as equal inside the T-transform chain.
const TRANSFORM_EPS: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MajorizeError {
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("vector is not majorized by the permutohedron (prefix {r} short by {gap:.3e})")]
    NotMajorized { r: usize, gap: f64 },
    #[error("matrix is not doubly stochastic (deviation {0:.3e})")]
    NotDoublyStochastic(f64),
    #[error("parameters out of range: {0}")]
    BadRange(String),
    #[error("not a probability vector: {0}")]
    InvalidProbVector(String),
    #[error("no perfect matching on the remaining support (residual mass {0:.3e})")]
    MatchingFailed(f64),
}

/// Nonnegative entries summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub const TOL: f64 = 1e-9;

    pub fn new(entries: Vec<f64>) -> Result<Self, MajorizeError> {
        if entries.is_empty() {
            return Err(MajorizeError::InvalidProbVector("empty".into()));
        }
        if let Some(bad) = entries.iter().find(|x| !x.is_finite() || **x < -Self::TOL) {
            return Err(MajorizeError::InvalidProbVector(format!("entry {bad}")));
        }
        let total: f64 = entries.iter().sum();
        if (total - 1.0).abs() > Self::TOL {
            return Err(MajorizeError::InvalidProbVector(format!("sum {total}")));
        }
        Ok(Self(entries.into_iter().map(|x| x.max(0.0)).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorted_ascending(&self) -> Vec<f64> {
        let mut v = self.0.clone();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl TryFrom<Vec<f64>> for ProbVector {
    type Error = MajorizeError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<ProbVector> for Vec<f64> {
    fn from(p: ProbVector) -> Self {
        p.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Permutation(pub Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Self((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn apply(&self, v: &[f64]) -> Vec<f64> {
        self.0.iter().map(|&i| v[i]).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (a, &b) in self.0.iter().enumerate() {
            inv[b] = a;
        }
        Self(inv)
    }

    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.0.len();
        (0..n).map(|a| (0..n).map(|b| if self.0[a] == b { 1.0 } else { 0.0 }).collect()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PermutationTerm {
    pub weight: f64,
    pub permutation: Permutation,
}

/// Convex combination of permutations.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PermutationMixture {
    pub terms: Vec<PermutationTerm>,
}

impl PermutationMixture {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// `Σ w_π π·v`.
    pub fn recompose(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; v.len()];
        for t in &self.terms {
            for (o, x) in out.iter_mut().zip(t.permutation.apply(v)) {
                *o += t.weight * x;
            }
        }
        out
    }

    /// `Σ w_π P_π`.
    pub fn matrix(&self, n: usize) -> Vec<Vec<f64>> {
        let mut out = vec![vec![0.0; n]; n];
        for t in &self.terms {
            for (a, &b) in t.permutation.0.iter().enumerate() {
                out[a][b] += t.weight;
            }
        }
        out
    }
}

/// True iff `x` lies in the permutohedron of `mu`: for every `r` the `r`
/// smallest entries of `x` sum to at least the `r` smallest of `mu`.
pub fn majorized_by_permutohedron(x: &[f64], mu: &[f64], tol: f64) -> Result<bool, MajorizeError> {
    Ok(majorization_gap(x, mu, tol)?.is_none())
}

/// First prefix length (1-based) where `x` falls short of `mu`, with the gap.
fn majorization_gap(x: &[f64], mu: &[f64], tol: f64) -> Result<Option<(usize, f64)>, MajorizeError> {
    if x.len() != mu.len() {
        return Err(MajorizeError::LengthMismatch(x.len(), mu.len()));
    }
    let mut xs = x.to_vec();
    let mut ms = mu.to_vec();
    xs.sort_by(f64::total_cmp);
    ms.sort_by(f64::total_cmp);
    let (mut px, mut pm) = (0.0, 0.0);
    for r in 0..xs.len() {
        px += xs[r];
        pm += ms[r];
        if px < pm - tol {
            return Ok(Some((r + 1, pm - px)));
        }
    }
    if (px - pm).abs() > tol {
        return Ok(Some((xs.len(), (px - pm).abs())));
    }
    Ok(None)
}

/// `ν_r = P(max S = r)` for a uniform random `d`-subset `S` of `[n]`.
pub fn max_subset_distribution(n: usize, d: usize) -> Result<ProbVector, MajorizeError> {
    if d == 0 || d > n {
        return Err(MajorizeError::BadRange(format!("need 1 <= d <= n, got d={d}, n={n}")));
    }
    let total = binomial(n, d) as f64;
    let entries = (1..=n).map(|r| (binomial(r, d) - binomial(r - 1, d)) as f64 / total).collect();
    Ok(ProbVector(entries))
}

/// Decomposes `mu` as a convex combination of permutations of `nu`.
///
/// Runs the Hardy–Littlewood–Pólya chain of T-transforms on the sorted
/// vectors to obtain a doubly stochastic `D` with `mu = D nu`, then extracts a
/// Birkhoff decomposition of `D`.
pub fn hlp_decompose(mu: &[f64], nu: &[f64]) -> Result<PermutationMixture, MajorizeError> {
    if let Some((r, gap)) = majorization_gap(mu, nu, ProbVector::TOL)? {
        return Err(MajorizeError::NotMajorized { r, gap });
    }
    let n = mu.len();
    // sort both descending (stable, lowest index first among ties)
    let mut sigma: Vec<usize> = (0..n).collect();
    sigma.sort_by(|&a, &b| mu[b].total_cmp(&mu[a]));
    let mut tau: Vec<usize> = (0..n).collect();
    tau.sort_by(|&a, &b| nu[b].total_cmp(&nu[a]));
    let target: Vec<f64> = sigma.iter().map(|&i| mu[i]).collect();
    let mut current: Vec<f64> = tau.iter().map(|&i| nu[i]).collect();

    // doubly stochastic map with current = d_sorted · (sorted nu)
    let mut d_sorted: Vec<Vec<f64>> =
        (0..n).map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect();

    for _ in 0..n * n {
        // donor: largest index still above target; receiver: first index after it below target
        let Some(j) = (0..n).rev().find(|&i| current[i] > target[i] + TRANSFORM_EPS) else {
            break;
        };
        let Some(k) = (j + 1..n).find(|&i| current[i] < target[i] - TRANSFORM_EPS) else {
            break;
        };
        let delta = (current[j] - target[j]).min(target[k] - current[k]);
        let spread = current[j] - current[k];
        let lambda = 1.0 - delta / spread;
        // T = lambda I + (1 - lambda) Q_jk applied on the left
        let (row_j, row_k) = (d_sorted[j].clone(), d_sorted[k].clone());
        for c in 0..n {
            d_sorted[j][c] = lambda * row_j[c] + (1.0 - lambda) * row_k[c];
            d_sorted[k][c] = lambda * row_k[c] + (1.0 - lambda) * row_j[c];
        }
        let (cj, ck) = (current[j], current[k]);
        current[j] = lambda * cj + (1.0 - lambda) * ck;
        current[k] = lambda * ck + (1.0 - lambda) * cj;
    }

    // back to original coordinates: D[sigma[a]][tau[b]] = d_sorted[a][b]
    let mut d = vec![vec![0.0; n]; n];
    for a in 0..n {
        for b in 0..n {
            d[sigma[a]][tau[b]] = d_sorted[a][b];
        }
    }
    let mixture = birkhoff(&d)?;
    let rebuilt = mixture.recompose(nu);
    let err = rebuilt.iter().zip(mu).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    if err > 1e-8 {
        return Err(MajorizeError::NotMajorized { r: n, gap: err });
    }
    Ok(mixture)
}

/// Birkhoff–von Neumann decomposition by repeated perfect-matching extraction.
pub fn birkhoff(d: &[Vec<f64>]) -> Result<PermutationMixture, MajorizeError> {
    let n = d.len();
    let mut deviation = 0.0f64;
    for row in d {
        if row.len() != n {
            return Err(MajorizeError::LengthMismatch(row.len(), n));
        }
        deviation = deviation.max((row.iter().sum::<f64>() - 1.0).abs());
        if let Some(neg) = row.iter().find(|&&x| x < -SUPPORT_TOL || !x.is_finite()) {
            deviation = deviation.max(-neg);
            return Err(MajorizeError::NotDoublyStochastic(deviation.max(neg.abs())));
        }
    }
    for j in 0..n {
        deviation = deviation.max((d.iter().map(|r| r[j]).sum::<f64>() - 1.0).abs());
    }
    if deviation > 1e-8 {
        return Err(MajorizeError::NotDoublyStochastic(deviation));
    }

    let mut rest: Vec<Vec<f64>> = d.iter().map(|r| r.iter().map(|&x| x.max(0.0)).collect()).collect();
    let mut terms = Vec::new();
    loop {
        let remaining: f64 = rest.iter().flatten().sum::<f64>() / n as f64;
        if rest.iter().flatten().all(|&x| x <= SUPPORT_TOL) {
            break;
        }
        let Some(matching) = perfect_matching(&rest) else {
            if remaining <= 1e-8 {
                break;
            }
            return Err(MajorizeError::MatchingFailed(remaining));
        };
        let weight = matching.iter().enumerate().map(|(a, &b)| rest[a][b]).fold(f64::INFINITY, f64::min);
        for (a, &b) in matching.iter().enumerate() {
            rest[a][b] -= weight;
            if rest[a][b] <= SUPPORT_TOL {
                rest[a][b] = 0.0;
            }
        }
        terms.push(PermutationTerm { weight, permutation: Permutation(matching) });
    }
    let total: f64 = terms.iter().map(|t| t.weight).sum();
    if total <= 0.0 {
        return Err(MajorizeError::NotDoublyStochastic(1.0));
    }
    for t in &mut terms {
        t.weight /= total;
    }
    Ok(PermutationMixture { terms })
}

/// Augmenting-path bipartite matching on entries above the support tolerance.
/// Returns `m` with row `a` matched to column `m[a]`.
fn perfect_matching(m: &[Vec<f64>]) -> Option<Vec<usize>> {
    let n = m.len();
    let mut col_owner: Vec<Option<usize>> = vec![None; n];

    fn augment(row: usize, m: &[Vec<f64>], seen: &mut [bool], col_owner: &mut [Option<usize>]) -> bool {
        for col in 0..m.len() {
            if m[row][col] > SUPPORT_TOL && !seen[col] {
                seen[col] = true;
                let free = match col_owner[col] {
                    None => true,
                    Some(other) => augment(other, m, seen, col_owner),
                };
                if free {
                    col_owner[col] = Some(row);
                    return true;
                }
            }
        }
        false
    }

    for row in 0..n {
        let mut seen = vec![false; n];
        if !augment(row, m, &mut seen, &mut col_owner) {
            return None;
        }
    }
    let mut matching = vec![0; n];
    for (col, owner) in col_owner.iter().enumerate() {
        matching[owner.expect("perfect matching covers every column")] = col;
    }
    Some(matching)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn majorization_examples() {
        let mu = [0.1, 0.3, 0.6];
        assert!(majorized_by_permutohedron(&mu, &mu, 1e-12).unwrap());
        assert!(majorized_by_permutohedron(&[1.0 / 3.0; 3], &mu, 1e-12).unwrap());
        assert!(!majorized_by_permutohedron(&[1.0, 0.0, 0.0], &[1.0 / 3.0; 3], 1e-12).unwrap());
        assert!(matches!(
            majorized_by_permutohedron(&[0.5, 0.5], &mu, 1e-12),
            Err(MajorizeError::LengthMismatch(2, 3))
        ));
    }

    #[test]
    fn max_subset_examples() {
        let nu = max_subset_distribution(3, 2).unwrap();
        assert!(max_err(nu.as_slice(), &[0.0, 1.0 / 3.0, 2.0 / 3.0]) < 1e-15);
        assert_eq!(max_subset_distribution(4, 4).unwrap().as_slice(), &[0.0, 0.0, 0.0, 1.0]);
        assert!(max_err(max_subset_distribution(5, 1).unwrap().as_slice(), &[0.2; 5]) < 1e-15);
        assert!(matches!(max_subset_distribution(3, 0), Err(MajorizeError::BadRange(_))));
        assert!(matches!(max_subset_distribution(3, 4), Err(MajorizeError::BadRange(_))));
    }

    #[test]
    fn prefix_sums_match_binomial_ratio_exactly() {
        for n in 1..=6 {
            for d in 1..=n {
                let nu = max_subset_distribution(n, d).unwrap();
                // integer numerators: C(r,d) - C(r-1,d) telescopes to C(r,d)
                let mut numer: u128 = 0;
                for r in 1..=n {
                    numer += binomial(r, d) - binomial(r - 1, d);
                    assert_eq!(numer, binomial(r, d));
                    let prefix: f64 = nu.as_slice()[..r].iter().sum();
                    let exact = binomial(r, d) as f64 / binomial(n, d) as f64;
                    assert!((prefix - exact).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn hlp_identity_case() {
        let v = [0.2, 0.3, 0.5];
        let mix = hlp_decompose(&v, &v).unwrap();
        assert_eq!(mix.terms.len(), 1);
        assert_eq!(mix.terms[0].permutation, Permutation::identity(3));
    }

    #[test]
    fn hlp_uniform_from_subset_maximum() {
        let nu = [0.0, 1.0 / 3.0, 2.0 / 3.0];
        let mu = [1.0 / 3.0; 3];
        let mix = hlp_decompose(&mu, &nu).unwrap();
        assert!(max_err(&mix.recompose(&nu), &mu) < 1e-10);
        assert!((mix.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hlp_rejects_outside_points() {
        assert!(matches!(
            hlp_decompose(&[1.0, 0.0, 0.0], &[1.0 / 3.0; 3]),
            Err(MajorizeError::NotMajorized { r: 1, .. })
        ));
    }

    #[test]
    fn birkhoff_examples() {
        let p = Permutation(vec![2, 0, 1]);
        let mix = birkhoff(&p.matrix()).unwrap();
        assert_eq!(mix.terms.len(), 1);
        assert_eq!(mix.terms[0].permutation, p);
        assert_eq!(mix.terms[0].weight, 1.0);

        let half = vec![vec![0.5, 0.5], vec![0.5, 0.5]];
        let mix = birkhoff(&half).unwrap();
        assert_eq!(mix.terms.len(), 2);
        let perms: Vec<_> = mix.terms.iter().map(|t| t.permutation.0.clone()).collect();
        assert!(perms.contains(&vec![0, 1]) && perms.contains(&vec![1, 0]));
        assert!(mix.terms.iter().all(|t| (t.weight - 0.5).abs() < 1e-15));

        assert!(matches!(birkhoff(&[vec![0.7, 0.2], vec![0.3, 0.8]]), Err(MajorizeError::NotDoublyStochastic(_))));
    }
}
