//! Channel objects: transition matrices, classical protocols and their
//! mixtures, noise specifications, and ball-model effects and states.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::majorize::{majorized_by_permutohedron, MajorizeError, ProbVector};

/// Tolerance for column sums and entry ranges of transition matrices.
pub const STOCHASTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    #[error("delta {0} outside [0, 1]")]
    BadDelta(f64),
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not column-stochastic: {0}")]
    NotStochastic(String),
    #[error("mixture weights sum to {0}, expected 1")]
    WeightSumNotOne(f64),
    #[error("effects are not a partition of unity (deviation {0:.3e})")]
    NotPartitionOfUnity(f64),
    #[error("ball model needs an even norm index, got {0}")]
    OddNormIndex(usize),
    #[error("effect {index} is negative somewhere on the ball (|v| = {norm:.6}, c = {c:.6})")]
    InvalidEffect { index: usize, c: f64, norm: f64 },
    #[error("state {index} lies outside the unit ball (dual norm {norm:.6})")]
    InvalidState { index: usize, norm: f64 },
    #[error("invalid protocol: {0}")]
    InvalidProtocol(String),
    #[error("per-column noise needs a column index")]
    NeedsColumn,
    #[error("column {column} of term {term} violates the declared noise")]
    NoiseViolated { term: usize, column: usize },
    #[error(transparent)]
    Majorize(#[from] MajorizeError),
}

/// Real `k × l` column-stochastic matrix: entry `(i, j)` is the probability of
/// output `i` given input `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    rows: Vec<Vec<f64>>,
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<f64>>, tol: f64) -> Result<Self, ChannelError> {
        let m = Self::from_rows_unchecked(rows);
        m.check(tol)?;
        Ok(m)
    }

    pub fn from_rows_unchecked(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    pub fn identity(k: usize) -> Self {
        Self { rows: (0..k).map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect() }
    }

    /// Constant matrix with every entry `1/k`.
    pub fn uniform(k: usize, l: usize) -> Self {
        Self { rows: vec![vec![1.0 / k as f64; l]; k] }
    }

    pub fn check(&self, tol: f64) -> Result<(), ChannelError> {
        let l = self.cols();
        if self.rows.is_empty() || l == 0 {
            return Err(ChannelError::NotStochastic("empty matrix".into()));
        }
        for (i, row) in self.rows.iter().enumerate() {
            if row.len() != l {
                return Err(ChannelError::NotStochastic(format!("row {i} has {} entries, expected {l}", row.len())));
            }
            if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < -tol || **x > 1.0 + tol) {
                return Err(ChannelError::NotStochastic(format!("entry {x} in row {i}")));
            }
        }
        for j in 0..l {
            let s: f64 = self.rows.iter().map(|r| r[j]).sum();
            if (s - 1.0).abs() > tol {
                return Err(ChannelError::NotStochastic(format!("column {j} sums to {s}")));
            }
        }
        Ok(())
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Number of outputs `k`.
    pub fn outputs(&self) -> usize {
        self.rows.len()
    }

    /// Number of inputs `l`.
    pub fn cols(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.rows[i][j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows.iter().map(|r| r[j]).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.outputs() != other.outputs() || self.cols() != other.cols() {
            return f64::INFINITY;
        }
        self.rows.iter().flatten().zip(other.rows.iter().flatten()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    /// `Σ w_t M_t`; shapes must agree.
    pub fn weighted_sum<'a>(terms: impl IntoIterator<Item = (f64, &'a TransitionMatrix)>) -> Option<Self> {
        let mut acc: Option<Vec<Vec<f64>>> = None;
        for (w, m) in terms {
            let acc = acc.get_or_insert_with(|| vec![vec![0.0; m.cols()]; m.outputs()]);
            if acc.len() != m.outputs() || acc.first().map_or(0, Vec::len) != m.cols() {
                return None;
            }
            for (a, r) in acc.iter_mut().zip(&m.rows) {
                for (x, y) in a.iter_mut().zip(r) {
                    *x += w * y;
                }
            }
        }
        acc.map(|rows| Self { rows })
    }
}

impl Serialize for TransitionMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.rows.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for TransitionMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(deserializer)?;
        TransitionMatrix::new(rows, STOCHASTIC_TOL).map_err(D::Error::custom)
    }
}

/// Permutation-invariant noise set `K` for the input columns of a classical
/// protocol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NoiseSpec {
    /// Any probability vector.
    Noiseless,
    /// Every entry at least `delta / n`.
    Delta { delta: f64 },
    /// Permutohedron of a base probability vector.
    Permutohedron { base: ProbVector },
    /// One permutohedron per input column.
    PerColumn { bases: Vec<ProbVector> },
}

impl NoiseSpec {
    pub fn delta(delta: f64) -> Result<Self, ChannelError> {
        if !(0.0..=1.0).contains(&delta) {
            return Err(ChannelError::BadDelta(delta));
        }
        Ok(Self::Delta { delta })
    }

    /// The plain spec governing input column `j`.
    pub fn for_column(&self, j: usize) -> Option<NoiseSpec> {
        match self {
            NoiseSpec::PerColumn { bases } => bases.get(j).map(|b| NoiseSpec::Permutohedron { base: b.clone() }),
            other => Some(other.clone()),
        }
    }

    /// Ascending extremal spectrum of the set for `n` states, when the set is
    /// a permutohedron (the noiseless set is that of `(0, …, 0, 1)`).
    pub fn extremal_spectrum(&self, n: usize) -> Option<Vec<f64>> {
        match self {
            NoiseSpec::Noiseless => {
                let mut v = vec![0.0; n];
                v[n - 1] = 1.0;
                Some(v)
            }
            NoiseSpec::Delta { delta } => {
                let mut v = vec![delta / n as f64; n];
                v[n - 1] = 1.0 - (n - 1) as f64 * delta / n as f64;
                Some(v)
            }
            NoiseSpec::Permutohedron { base } if base.len() == n => Some(base.sorted_ascending()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        match self {
            NoiseSpec::Delta { delta } if !(0.0..=1.0).contains(delta) => Err(ChannelError::BadDelta(*delta)),
            _ => Ok(()),
        }
    }
}

/// Extremal states of the δ-noisy classical channel with `n` states: state `t`
/// keeps `1 - (n-1)δ/n` at position `t` and leaks `δ/n` elsewhere.
pub fn noisy_classical_extremals(n: usize, delta: f64) -> Result<Vec<ProbVector>, ChannelError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(ChannelError::BadDelta(delta));
    }
    let leak = delta / n as f64;
    let keep = 1.0 - (n - 1) as f64 * leak;
    Ok((0..n)
        .map(|t| {
            let v = (0..n).map(|m| if m == t { keep } else { leak }).collect();
            ProbVector::new(v).expect("extremal noisy state is a probability vector")
        })
        .collect())
}

/// Membership of a probability vector in the noise set.
pub fn satisfies_noise(x: &[f64], spec: &NoiseSpec, tol: f64) -> Result<bool, ChannelError> {
    let n = x.len();
    let stochastic = x.iter().all(|&v| v >= -tol) && (x.iter().sum::<f64>() - 1.0).abs() <= tol;
    if !stochastic {
        return Ok(false);
    }
    match spec {
        NoiseSpec::Noiseless => Ok(true),
        NoiseSpec::Delta { delta } => {
            if !(0.0..=1.0).contains(delta) {
                return Err(ChannelError::BadDelta(*delta));
            }
            let floor = delta / n as f64;
            Ok(x.iter().all(|&v| v >= floor - tol))
        }
        NoiseSpec::Permutohedron { base } => {
            if base.len() != n {
                return Err(ChannelError::LengthMismatch(n, base.len()));
            }
            Ok(majorized_by_permutohedron(x, base.as_slice(), tol)?)
        }
        NoiseSpec::PerColumn { .. } => Err(ChannelError::NeedsColumn),
    }
}

/// Classical protocol `E X`: a decoder `[n] → [k]` and an `n × l` stochastic
/// state matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalProtocol {
    decoder: Vec<usize>,
    outputs: usize,
    states: Vec<Vec<f64>>,
}

impl ClassicalProtocol {
    pub fn new(decoder: Vec<usize>, outputs: usize, states: Vec<Vec<f64>>, tol: f64) -> Result<Self, ChannelError> {
        let p = Self { decoder, outputs, states };
        p.check(tol)?;
        Ok(p)
    }

    pub fn new_unchecked(decoder: Vec<usize>, outputs: usize, states: Vec<Vec<f64>>) -> Self {
        Self { decoder, outputs, states }
    }

    pub fn check(&self, tol: f64) -> Result<(), ChannelError> {
        if self.decoder.len() != self.states.len() {
            return Err(ChannelError::InvalidProtocol(format!(
                "decoder has {} slots but state matrix has {} rows",
                self.decoder.len(),
                self.states.len()
            )));
        }
        if let Some(&bad) = self.decoder.iter().find(|&&i| i >= self.outputs) {
            return Err(ChannelError::InvalidProtocol(format!("decoder output {bad} >= {}", self.outputs)));
        }
        TransitionMatrix::from_rows_unchecked(self.states.clone())
            .check(tol)
            .map_err(|e| ChannelError::InvalidProtocol(format!("state matrix: {e}")))
    }

    pub fn decoder(&self) -> &[usize] {
        &self.decoder
    }

    pub fn outputs(&self) -> usize {
        self.outputs
    }

    pub fn state_count(&self) -> usize {
        self.decoder.len()
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn inputs(&self) -> usize {
        self.states.first().map_or(0, Vec::len)
    }

    pub fn state_column(&self, j: usize) -> Vec<f64> {
        self.states.iter().map(|r| r[j]).collect()
    }

    /// The decoder as a `k × n` 0-1 matrix.
    pub fn decoder_matrix(&self) -> Vec<Vec<f64>> {
        (0..self.outputs).map(|i| self.decoder.iter().map(|&d| if d == i { 1.0 } else { 0.0 }).collect()).collect()
    }

    /// Slots that carry positive mass in some column.
    pub fn used_states(&self) -> usize {
        self.states.iter().filter(|r| r.iter().any(|&x| x > 0.0)).count()
    }
}

#[derive(Serialize, Deserialize)]
struct ProtocolRepr {
    decoder: Vec<Vec<f64>>,
    states: Vec<Vec<f64>>,
}

impl Serialize for ClassicalProtocol {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ProtocolRepr { decoder: self.decoder_matrix(), states: self.states.clone() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClassicalProtocol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ProtocolRepr::deserialize(deserializer)?;
        let outputs = repr.decoder.len();
        let n = repr.decoder.first().map_or(0, Vec::len);
        let mut decoder = Vec::with_capacity(n);
        for m in 0..n {
            let hot: Vec<usize> = (0..outputs)
                .filter(|&i| {
                    let v = repr.decoder[i].get(m).copied().unwrap_or(f64::NAN);
                    v == 1.0
                })
                .collect();
            let zeros = (0..outputs).all(|i| {
                let v = repr.decoder[i].get(m).copied().unwrap_or(f64::NAN);
                v == 0.0 || v == 1.0
            });
            if hot.len() != 1 || !zeros {
                return Err(D::Error::custom(format!("decoder column {m} is not a standard basis vector")));
            }
            decoder.push(hot[0]);
        }
        ClassicalProtocol::new(decoder, outputs, repr.states, STOCHASTIC_TOL).map_err(D::Error::custom)
    }
}

/// `E X`.
pub fn protocol_matrix(p: &ClassicalProtocol) -> TransitionMatrix {
    let l = p.inputs();
    let mut rows = vec![vec![0.0; l]; p.outputs];
    for (m, &i) in p.decoder.iter().enumerate() {
        for (acc, x) in rows[i].iter_mut().zip(&p.states[m]) {
            *acc += x;
        }
    }
    TransitionMatrix::from_rows_unchecked(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixtureTerm {
    pub weight: f64,
    pub protocol: ClassicalProtocol,
}

/// Convex combination of classical protocols over a declared state count and
/// noise set: the simulation certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalMixture {
    pub states: usize,
    pub noise: NoiseSpec,
    pub terms: Vec<MixtureTerm>,
}

impl ClassicalMixture {
    pub fn total_weight(&self) -> f64 {
        self.terms.iter().map(|t| t.weight).sum()
    }

    /// Checks weights, state counts and noise membership of every column.
    pub fn check(&self, tol: f64) -> Result<(), ChannelError> {
        let total = self.total_weight();
        if (total - 1.0).abs() > tol || self.terms.iter().any(|t| t.weight < -tol) {
            return Err(ChannelError::WeightSumNotOne(total));
        }
        for (ti, term) in self.terms.iter().enumerate() {
            let p = &term.protocol;
            p.check(tol)?;
            if p.state_count() != self.states {
                return Err(ChannelError::InvalidProtocol(format!(
                    "term {ti} uses {} states, declared {}",
                    p.state_count(),
                    self.states
                )));
            }
            for j in 0..p.inputs() {
                let spec = self.noise.for_column(j).ok_or(ChannelError::NeedsColumn)?;
                if !satisfies_noise(&p.state_column(j), &spec, tol)? {
                    return Err(ChannelError::NoiseViolated { term: ti, column: j });
                }
            }
        }
        Ok(())
    }
}

/// `Σ w_t E_t X_t`.
pub fn mixture_matrix(m: &ClassicalMixture) -> Result<TransitionMatrix, ChannelError> {
    let total = m.total_weight();
    if (total - 1.0).abs() > STOCHASTIC_TOL {
        return Err(ChannelError::WeightSumNotOne(total));
    }
    let mats: Vec<(f64, TransitionMatrix)> = m.terms.iter().map(|t| (t.weight, protocol_matrix(&t.protocol))).collect();
    TransitionMatrix::weighted_sum(mats.iter().map(|(w, a)| (*w, a)))
        .ok_or_else(|| ChannelError::InvalidProtocol("terms disagree in shape".into()))
}

fn check_norm_index(n: usize) -> Result<(), ChannelError> {
    if n == 0 || !n.is_multiple_of(2) {
        return Err(ChannelError::OddNormIndex(n));
    }
    Ok(())
}

/// `‖v‖_p` for a finite exponent `p ≥ 1`.
pub fn p_norm(v: &[f64], p: f64) -> f64 {
    if v.iter().all(|&x| x == 0.0) {
        return 0.0;
    }
    let scale = v.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    scale * v.iter().map(|&x| (x.abs() / scale).powf(p)).sum::<f64>().powf(1.0 / p)
}

/// Affine functional `x ↦ c + v·x` on the unit ball of the `n/(n-1)`-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallEffect {
    pub c: f64,
    pub v: Vec<f64>,
    pub norm_index: usize,
}

impl BallEffect {
    pub fn new(c: f64, v: Vec<f64>, norm_index: usize) -> Result<Self, ChannelError> {
        check_norm_index(norm_index)?;
        Ok(Self { c, v, norm_index })
    }

    /// The constant-one effect.
    pub fn unit(dim: usize, norm_index: usize) -> Result<Self, ChannelError> {
        Self::new(1.0, vec![0.0; dim], norm_index)
    }

    /// Nonnegative on the ball iff `‖v‖_n ≤ c`.
    pub fn is_nonnegative(&self, tol: f64) -> bool {
        p_norm(&self.v, self.norm_index as f64) <= self.c + tol
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.c + self.v.iter().zip(x).map(|(a, b)| a * b).sum::<f64>()
    }

    /// `min_S e = c - ‖v‖_n`.
    pub fn minimum(&self) -> f64 {
        self.c - p_norm(&self.v, self.norm_index as f64)
    }
}

/// Point of the unit ball of the `n/(n-1)`-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct BallState {
    pub x: Vec<f64>,
}

impl BallState {
    pub fn new(x: Vec<f64>, norm_index: usize, tol: f64) -> Result<Self, ChannelError> {
        check_norm_index(norm_index)?;
        let s = Self { x };
        let norm = s.dual_norm(norm_index);
        if norm > 1.0 + tol {
            return Err(ChannelError::InvalidState { index: 0, norm });
        }
        Ok(s)
    }

    pub fn dual_norm(&self, norm_index: usize) -> f64 {
        let n = norm_index as f64;
        p_norm(&self.x, n / (n - 1.0))
    }
}

/// `{e_1, …, e_n} = c_1⋯c_n − Σ_t Π_i v_i[t]`.
pub fn bracket(effects: &[&BallEffect]) -> Result<f64, ChannelError> {
    let Some(first) = effects.first() else {
        return Err(ChannelError::LengthMismatch(0, 0));
    };
    let n = first.norm_index;
    check_norm_index(n)?;
    if effects.len() != n {
        return Err(ChannelError::LengthMismatch(effects.len(), n));
    }
    let dim = first.v.len();
    for e in effects {
        if e.v.len() != dim {
            return Err(ChannelError::DimensionMismatch { expected: dim, got: e.v.len() });
        }
    }
    let c_prod: f64 = effects.iter().map(|e| e.c).product();
    let v_sum: f64 = (0..dim).map(|t| effects.iter().map(|e| e.v[t]).product::<f64>()).sum();
    Ok(c_prod - v_sum)
}

/// Validates that the effects form a partition of unity on the ball.
pub fn check_partition_of_unity(effects: &[BallEffect], tol: f64) -> Result<(), ChannelError> {
    let Some(first) = effects.first() else {
        return Err(ChannelError::NotPartitionOfUnity(1.0));
    };
    let (n, dim) = (first.norm_index, first.v.len());
    check_norm_index(n)?;
    for (index, e) in effects.iter().enumerate() {
        if e.norm_index != n {
            return Err(ChannelError::DimensionMismatch { expected: n, got: e.norm_index });
        }
        if e.v.len() != dim {
            return Err(ChannelError::DimensionMismatch { expected: dim, got: e.v.len() });
        }
        if !e.is_nonnegative(tol) {
            return Err(ChannelError::InvalidEffect { index, c: e.c, norm: p_norm(&e.v, n as f64) });
        }
    }
    let c_dev = (effects.iter().map(|e| e.c).sum::<f64>() - 1.0).abs();
    let v_dev = (0..dim).map(|t| effects.iter().map(|e| e.v[t]).sum::<f64>().abs()).fold(0.0, f64::max);
    let dev = c_dev.max(v_dev);
    if dev > tol {
        return Err(ChannelError::NotPartitionOfUnity(dev));
    }
    Ok(())
}

/// Entries `c_i + (1 − δ) v_i·x_j` of the δ-noisy ball channel.
pub fn ball_born_matrix(
    effects: &[BallEffect],
    states: &[BallState],
    delta: f64,
) -> Result<TransitionMatrix, ChannelError> {
    if !(0.0..=1.0).contains(&delta) {
        return Err(ChannelError::BadDelta(delta));
    }
    check_partition_of_unity(effects, STOCHASTIC_TOL)?;
    let n = effects[0].norm_index;
    let dim = effects[0].v.len();
    for (index, s) in states.iter().enumerate() {
        if s.x.len() != dim {
            return Err(ChannelError::DimensionMismatch { expected: dim, got: s.x.len() });
        }
        let norm = s.dual_norm(n);
        if norm > 1.0 + STOCHASTIC_TOL {
            return Err(ChannelError::InvalidState { index, norm });
        }
    }
    let rows = effects
        .iter()
        .map(|e| {
            states.iter().map(|s| e.c + (1.0 - delta) * e.v.iter().zip(&s.x).map(|(a, b)| a * b).sum::<f64>()).collect()
        })
        .collect();
    Ok(TransitionMatrix::from_rows_unchecked(rows))
}
