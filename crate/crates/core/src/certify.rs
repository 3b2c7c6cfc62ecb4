//! Witnesses, bounds and information diagnostics for channel simulation.

use num_rational::Ratio;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channels::{mixture_matrix, protocol_matrix, ChannelError, ClassicalMixture, TransitionMatrix};
use crate::combinatorics::{binomial, subsets};
use crate::linalg::{hermitian_eigenvalues, DensityMatrix, LinalgError, DEFAULT_TOL};
use crate::lp::{solve, LinearProgram, LpError, LpOutcome, Relation};
use crate::majorize::ProbVector;

/// Slack used when comparing witness values against bounds.
pub const WITNESS_TOL: f64 = 1e-9;
/// Distance from an integer below which a float ceiling snaps to it.
pub const CEIL_GUARD: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum CertifyError {
    #[error("empty input")]
    EmptyInput,
    #[error("parameter out of range: {0}")]
    BadRange(String),
    #[error("noise parameter {0} outside [0, 1]")]
    BadDelta(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid polytope: {0}")]
    InvalidPolytope(String),
    #[error("polytope is not full-dimensional (affine rank {rank} < {dim})")]
    NotFullDimensional { rank: usize, dim: usize },
    #[error("asymmetry program has no positive solution")]
    LpInfeasible,
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Violation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub value: f64,
    pub bound: f64,
    /// Subset size, for subset witnesses.
    pub r: Option<usize>,
    pub d: usize,
    pub rows: usize,
    pub cols: usize,
    pub verdict: Verdict,
}

/// Largest sum of row maxima among the given matrices.
pub fn storability(matrices: &[TransitionMatrix]) -> Result<f64, CertifyError> {
    let first = matrices.first().ok_or(CertifyError::EmptyInput)?;
    let k = first.outputs();
    let mut best = f64::NEG_INFINITY;
    for a in matrices {
        if a.outputs() != k {
            return Err(CertifyError::DimensionMismatch { expected: k, got: a.outputs() });
        }
        let s: f64 = a.rows().iter().map(|row| row.iter().copied().fold(0.0, f64::max)).sum();
        best = best.max(s);
    }
    Ok(best)
}

/// `Σ_{|S|=r} min_j Σ_{i∈S} a_ij` against `C(k−d, k−r)`. Matrices afforded
/// by `d` classical states never fall below the bound.
pub fn subset_witness(a: &TransitionMatrix, r: usize, d: usize) -> Result<WitnessReport, CertifyError> {
    let k = a.outputs();
    if r == 0 || r > k || d == 0 || d > k {
        return Err(CertifyError::BadRange(format!("need 1 <= r, d <= {k}, got r={r}, d={d}")));
    }
    let value: f64 = subsets(k, r)
        .iter()
        .map(|s| (0..a.cols()).map(|j| s.iter().map(|&i| a.get(i, j)).sum::<f64>()).fold(f64::INFINITY, f64::min))
        .sum();
    let bound = binomial(k - d, k - r) as f64;
    let verdict = if value < bound - WITNESS_TOL { Verdict::Violation } else { Verdict::Pass };
    Ok(WitnessReport { value, bound, r: Some(r), d, rows: k, cols: a.cols(), verdict })
}

/// `Σ_{i<i'} max_j (a_ij + a_i'j)` against `C(k,2) − C(k−d,2)`. Matrices
/// afforded by `d` classical states never exceed the bound.
pub fn pairwise_witness(a: &TransitionMatrix, d: usize) -> Result<WitnessReport, CertifyError> {
    let k = a.outputs();
    if k < 2 {
        return Err(CertifyError::BadRange(format!("need at least two rows, got {k}")));
    }
    if d == 0 {
        return Err(CertifyError::BadRange("d must be positive".into()));
    }
    let mut value = 0.0;
    for i in 0..k {
        for i2 in i + 1..k {
            value += (0..a.cols()).map(|j| a.get(i, j) + a.get(i2, j)).fold(f64::NEG_INFINITY, f64::max);
        }
    }
    let bound = (binomial(k, 2) - binomial(k.saturating_sub(d), 2)) as f64;
    let verdict = if value > bound + WITNESS_TOL { Verdict::Violation } else { Verdict::Pass };
    Ok(WitnessReport { value, bound, r: None, d, rows: k, cols: a.cols(), verdict })
}

fn rational_ceil(x: Ratio<i64>) -> i64 {
    x.ceil().to_integer()
}

/// Smallest number of noiseless states simulating the δ-noisy `n`-state
/// channel: `⌈(1−δ)n + δ⌉`, exact.
pub fn noisy_signalling_dimension(n: usize, delta: Ratio<i64>) -> Result<usize, CertifyError> {
    let zero = Ratio::from_integer(0);
    let one = Ratio::from_integer(1);
    if delta < zero || delta > one {
        return Err(CertifyError::BadDelta(delta.to_string()));
    }
    let n_r = Ratio::from_integer(n as i64);
    Ok(rational_ceil((one - delta) * n_r + delta) as usize)
}

fn guarded_ceil(x: f64) -> i64 {
    let nearest = x.round();
    if (x - nearest).abs() <= CEIL_GUARD {
        nearest as i64
    } else {
        x.ceil() as i64
    }
}

/// Float variant of [`noisy_signalling_dimension`]; values within
/// [`CEIL_GUARD`] of an integer are treated as that integer.
pub fn noisy_signalling_dimension_f64(n: usize, delta: f64) -> Result<usize, CertifyError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(CertifyError::BadDelta(delta.to_string()));
    }
    Ok(guarded_ceil((1.0 - delta) * n as f64 + delta) as usize)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
pub enum BinomialVerdict {
    Pass,
    /// Largest `r` with `μ_1 + … + μ_r < C(r,d)/C(n,d)`.
    Witness {
        r: usize,
        prefix: f64,
        bound: f64,
    },
}

/// Binomial test: the permutohedron of `mu` is simulable by `d` noiseless
/// states iff every prefix sum of the ascending `mu` reaches `C(r,d)/C(n,d)`.
pub fn permutohedron_simulable_by_d(mu: &ProbVector, d: usize) -> Result<BinomialVerdict, CertifyError> {
    let n = mu.len();
    if d == 0 || d > n {
        return Err(CertifyError::BadRange(format!("need 1 <= d <= {n}, got {d}")));
    }
    let sorted = mu.sorted_ascending();
    let total = binomial(n, d) as f64;
    let mut prefix = 0.0;
    let mut witness = None;
    for (idx, v) in sorted.iter().enumerate() {
        prefix += v;
        let r = idx + 1;
        let bound = binomial(r, d) as f64 / total;
        if r >= d && prefix < bound - WITNESS_TOL {
            witness = Some(BinomialVerdict::Witness { r, prefix, bound });
        }
    }
    Ok(witness.unwrap_or(BinomialVerdict::Pass))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplacerBounds {
    pub lower: usize,
    pub upper: usize,
    pub exact: Option<usize>,
}

/// Signalling-dimension bounds for the channel replacing an `m`-level input
/// by a fixed state with spectrum `mu` with probability `δ`, on an
/// `n`-level output.
pub fn replacer_bounds(m: usize, delta: f64, mu: &[f64], n: usize) -> Result<ReplacerBounds, CertifyError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(CertifyError::BadDelta(delta.to_string()));
    }
    if m == 0 || m > n {
        return Err(CertifyError::BadRange(format!("need 1 <= m <= n, got m={m}, n={n}")));
    }
    if mu.len() != n {
        return Err(CertifyError::DimensionMismatch { expected: n, got: mu.len() });
    }
    let mf = m as f64;
    let lower = guarded_ceil((1.0 - delta) * mf + delta) as usize;
    let upper = m.min(guarded_ceil((1.0 - delta) * mf + 1.0) as usize);
    let mut sorted = mu.to_vec();
    sorted.sort_by(f64::total_cmp);
    let exact = (m == n && lower >= 1 && {
        let total = binomial(n, lower) as f64;
        (lower..n).all(|r| {
            let prefix: f64 = sorted[..r].iter().sum();
            delta * prefix >= binomial(r, lower) as f64 / total - WITNESS_TOL
        })
    })
    .then_some(lower);
    Ok(ReplacerBounds { lower, upper, exact })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: Vec<f64>,
    pub offset: f64,
}

/// Bounded polytope given by both its vertices and its facets `a·x ≤ b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polytope {
    pub vertices: Vec<Vec<f64>>,
    pub facets: Vec<Facet>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Polytope {
    pub fn new(vertices: Vec<Vec<f64>>, facets: Vec<Facet>) -> Result<Self, CertifyError> {
        let p = Self { vertices, facets };
        p.check(DEFAULT_TOL)?;
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.vertices.first().map_or(0, Vec::len)
    }

    /// Vertices satisfy every facet and every facet touches some vertex.
    pub fn check(&self, tol: f64) -> Result<(), CertifyError> {
        let dim = self.dim();
        if self.vertices.is_empty() || self.facets.is_empty() {
            return Err(CertifyError::EmptyInput);
        }
        if self.vertices.iter().any(|v| v.len() != dim) || self.facets.iter().any(|f| f.normal.len() != dim) {
            return Err(CertifyError::InvalidPolytope("inconsistent dimensions".into()));
        }
        for (fi, f) in self.facets.iter().enumerate() {
            let scale = 1.0f64.max(f.offset.abs());
            let top = self.vertices.iter().map(|v| dot(&f.normal, v)).fold(f64::NEG_INFINITY, f64::max);
            if top > f.offset + tol * scale {
                return Err(CertifyError::InvalidPolytope(format!("a vertex violates facet {fi}")));
            }
            if top < f.offset - tol * scale {
                return Err(CertifyError::InvalidPolytope(format!("facet {fi} touches no vertex")));
            }
        }
        Ok(())
    }

    /// Dimension of the affine hull of the vertices.
    pub fn affine_rank(&self) -> usize {
        let base = &self.vertices[0];
        let mut rows: Vec<Vec<f64>> =
            self.vertices[1..].iter().map(|v| v.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        let scale = rows.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
        let dim = self.dim();
        let mut rank = 0;
        for col in 0..dim {
            let Some(p) = (rank..rows.len()).max_by(|&a, &b| rows[a][col].abs().total_cmp(&rows[b][col].abs())) else {
                break;
            };
            if rows[p][col].abs() <= 1e-9 * scale {
                continue;
            }
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for r in rows.iter_mut().skip(rank + 1) {
                let f = r[col] / pivot[col];
                r.iter_mut().zip(&pivot).for_each(|(x, y)| *x -= f * y);
            }
            rank += 1;
        }
        rank
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub asymmetry: f64,
    pub infstor: f64,
}

/// Minkowski asymmetry via the program `max t` subject to
/// `a_j·u − t (a_j·v_i) ≤ b_j`, where `u = (1+t)c` for the best center `c`.
pub fn minkowski_asymmetry(poly: &Polytope) -> Result<Asymmetry, CertifyError> {
    poly.check(DEFAULT_TOL)?;
    let dim = poly.dim();
    let rank = poly.affine_rank();
    if rank < dim {
        return Err(CertifyError::NotFullDimensional { rank, dim });
    }
    let mut lp = LinearProgram::new(dim + 1);
    for j in 0..dim {
        lp.set_free(j);
    }
    for f in &poly.facets {
        for v in &poly.vertices {
            let mut coeffs = f.normal.clone();
            coeffs.push(-dot(&f.normal, v));
            lp.add_constraint(coeffs, Relation::Le, f.offset)?;
        }
    }
    let mut objective = vec![0.0; dim + 1];
    objective[dim] = 1.0;
    lp.maximize(objective)?;
    match solve(&lp)? {
        LpOutcome::Optimal { objective, .. } if objective > 1e-12 => {
            let asymmetry = 1.0 / objective;
            Ok(Asymmetry { asymmetry, infstor: asymmetry + 1.0 })
        }
        _ => Err(CertifyError::LpInfeasible),
    }
}

fn entropy_bits(p: impl IntoIterator<Item = f64>) -> f64 {
    p.into_iter().filter(|&x| x > 0.0).map(|x| -x * x.log2()).sum()
}

/// `H(j) + H(i) − H(i,j)` in bits for the joint law `q_j a_ij`.
pub fn mutual_information(a: &TransitionMatrix, q: &ProbVector) -> Result<f64, CertifyError> {
    if q.len() != a.cols() {
        return Err(CertifyError::DimensionMismatch { expected: a.cols(), got: q.len() });
    }
    let q = q.as_slice();
    let joint = a.rows().iter().flat_map(|row| row.iter().zip(q).map(|(x, w)| x * w));
    let outputs = a.rows().iter().map(|row| row.iter().zip(q).map(|(x, w)| x * w).sum::<f64>());
    Ok(entropy_bits(q.iter().copied()) + entropy_bits(outputs) - entropy_bits(joint))
}

/// Von Neumann entropy in bits.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64, CertifyError> {
    Ok(entropy_bits(rho.spectrum()?.into_vec()))
}

/// `S(Σ q_j ρ_j) − Σ q_j S(ρ_j)` in bits.
pub fn holevo_chi(states: &[DensityMatrix], q: &ProbVector) -> Result<f64, CertifyError> {
    let first = states.first().ok_or(CertifyError::EmptyInput)?;
    if q.len() != states.len() {
        return Err(CertifyError::DimensionMismatch { expected: states.len(), got: q.len() });
    }
    let n = first.dim();
    let mut avg = crate::linalg::ComplexMatrix::zeros(n);
    let mut inner = 0.0;
    for (rho, &w) in states.iter().zip(q.as_slice()) {
        if rho.dim() != n {
            return Err(CertifyError::DimensionMismatch { expected: n, got: rho.dim() });
        }
        avg = &avg + &rho.matrix().scale(w);
        inner += w * von_neumann_entropy(rho)?;
    }
    let outer = entropy_bits(hermitian_eigenvalues(&avg, DEFAULT_TOL)?.into_vec());
    Ok(outer - inner)
}

/// Mutual information of every component of a simulation mixture, plus that
/// of the mixture itself as the last entry.
pub fn component_information(mixture: &ClassicalMixture, q: &ProbVector) -> Result<Vec<f64>, CertifyError> {
    let mut out = mixture
        .terms
        .iter()
        .map(|t| mutual_information(&protocol_matrix(&t.protocol), q))
        .collect::<Result<Vec<_>, _>>()?;
    out.push(mutual_information(&mixture_matrix(mixture)?, q)?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn octahedron_matrix() -> TransitionMatrix {
        let h = 0.5;
        TransitionMatrix::new(
            vec![
                vec![h, 0.0, h, 0.0, h, 0.0],
                vec![h, 0.0, 0.0, h, 0.0, h],
                vec![0.0, h, h, 0.0, 0.0, h],
                vec![0.0, h, 0.0, h, h, 0.0],
            ],
            1e-12,
        )
        .unwrap()
    }

    fn cross_polytope(dim: usize) -> Polytope {
        let mut vertices = Vec::new();
        for i in 0..dim {
            for s in [1.0, -1.0] {
                let mut v = vec![0.0; dim];
                v[i] = s;
                vertices.push(v);
            }
        }
        let facets = (0..1usize << dim)
            .map(|mask| Facet {
                normal: (0..dim).map(|i| if mask >> i & 1 == 1 { -1.0 } else { 1.0 }).collect(),
                offset: 1.0,
            })
            .collect();
        Polytope::new(vertices, facets).unwrap()
    }

    #[test]
    fn octahedron_witnesses() {
        let a = octahedron_matrix();
        let w = pairwise_witness(&a, 2).unwrap();
        assert_eq!((w.value, w.bound, w.verdict), (6.0, 5.0, Verdict::Violation));
        assert_eq!(storability(std::slice::from_ref(&a)).unwrap(), 2.0);
        assert_eq!(subset_witness(&a, 2, 2).unwrap().verdict, Verdict::Violation);
        let asym = minkowski_asymmetry(&cross_polytope(3)).unwrap();
        assert!((asym.asymmetry - 1.0).abs() < 1e-9);
        assert!((asym.infstor - 2.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_asymmetry_equals_dimension() {
        let vertices = vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]];
        let facets = vec![
            Facet { normal: vec![-1.0, 0.0], offset: 0.0 },
            Facet { normal: vec![0.0, -1.0], offset: 0.0 },
            Facet { normal: vec![1.0, 1.0], offset: 1.0 },
        ];
        let asym = minkowski_asymmetry(&Polytope::new(vertices, facets).unwrap()).unwrap();
        assert!((asym.asymmetry - 2.0).abs() < 1e-9);
    }

    #[test]
    fn flat_polytope_rejected() {
        let vertices = vec![vec![0.0, 0.0], vec![1.0, 0.0]];
        let facets = vec![
            Facet { normal: vec![1.0, 0.0], offset: 1.0 },
            Facet { normal: vec![-1.0, 0.0], offset: 0.0 },
            Facet { normal: vec![0.0, 1.0], offset: 0.0 },
            Facet { normal: vec![0.0, -1.0], offset: 0.0 },
        ];
        let p = Polytope::new(vertices, facets).unwrap();
        assert!(matches!(minkowski_asymmetry(&p), Err(CertifyError::NotFullDimensional { rank: 1, dim: 2 })));
    }

    #[test]
    fn signalling_dimension_examples() {
        assert_eq!(noisy_signalling_dimension(5, Ratio::from_integer(0)).unwrap(), 5);
        assert_eq!(noisy_signalling_dimension(5, Ratio::from_integer(1)).unwrap(), 1);
        assert_eq!(noisy_signalling_dimension(4, Ratio::new(1, 3)).unwrap(), 3);
        assert_eq!(noisy_signalling_dimension_f64(4, 1.0 / 3.0).unwrap(), 3);
        assert!(noisy_signalling_dimension(4, Ratio::new(4, 3)).is_err());
    }

    #[test]
    fn binomial_test_examples() {
        let mu = ProbVector::new(vec![1.0 / 6.0, 1.0 / 3.0, 0.5]).unwrap();
        assert_eq!(permutohedron_simulable_by_d(&mu, 2).unwrap(), BinomialVerdict::Pass);
        let point = ProbVector::new(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(permutohedron_simulable_by_d(&point, 2).unwrap(), BinomialVerdict::Witness { r: 3, .. }));
        assert_eq!(permutohedron_simulable_by_d(&ProbVector::uniform(5), 3).unwrap(), BinomialVerdict::Pass);
    }

    #[test]
    fn replacer_examples() {
        let b = replacer_bounds(3, 0.5, &[0.2, 0.3, 0.5], 3).unwrap();
        assert_eq!((b.lower, b.upper), (2, 3));
        let b = replacer_bounds(3, 0.0, &[0.2, 0.3, 0.5], 4).unwrap_err();
        assert!(matches!(b, CertifyError::DimensionMismatch { .. }));
        let b = replacer_bounds(3, 0.0, &[0.2, 0.3, 0.5], 3).unwrap();
        assert_eq!((b.lower, b.upper), (3, 3));
        let b = replacer_bounds(4, 1.0 / 3.0, &[0.25; 4], 4).unwrap();
        assert_eq!(b.exact, Some(3));
    }

    #[test]
    fn information_examples() {
        let q = ProbVector::uniform(2);
        assert!((mutual_information(&TransitionMatrix::identity(2), &q).unwrap() - 1.0).abs() < 1e-12);
        assert!(mutual_information(&TransitionMatrix::uniform(3, 2), &q).unwrap().abs() < 1e-12);
        let f = 0.11;
        let bsc = TransitionMatrix::new(vec![vec![1.0 - f, f], vec![f, 1.0 - f]], 1e-12).unwrap();
        let h = -f * f.log2() - (1.0 - f) * (1.0 - f).log2();
        assert!((mutual_information(&bsc, &q).unwrap() - (1.0 - h)).abs() < 1e-12);
        let zero = DensityMatrix::new_unchecked(crate::linalg::ComplexMatrix::diag(&[1.0, 0.0]));
        let one = DensityMatrix::new_unchecked(crate::linalg::ComplexMatrix::diag(&[0.0, 1.0]));
        assert!((holevo_chi(&[zero.clone(), one], &q).unwrap() - 1.0).abs() < 1e-12);
        assert!(holevo_chi(&[zero.clone(), zero], &q).unwrap().abs() < 1e-12);
    }

    #[test]
    fn pairwise_identity_and_uniform() {
        let w = pairwise_witness(&TransitionMatrix::identity(4), 4).unwrap();
        assert_eq!((w.value, w.bound, w.verdict), (6.0, 6.0, Verdict::Pass));
        let k = 5;
        let w = pairwise_witness(&TransitionMatrix::uniform(k, 3), 1).unwrap();
        assert!((w.value - (k - 1) as f64).abs() < 1e-12);
        assert_eq!(w.verdict, Verdict::Pass);
    }
}
