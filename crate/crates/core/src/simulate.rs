//! Constructive simulations of quantum, ball and noisy classical channels by
//! mixtures of classical protocols.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certify::{permutohedron_simulable_by_d, BinomialVerdict, CertifyError};
use crate::channels::{
    ball_born_matrix, bracket, mixture_matrix, protocol_matrix, satisfies_noise, BallEffect, BallState, ChannelError,
    ClassicalMixture, ClassicalProtocol, MixtureTerm, NoiseSpec, TransitionMatrix, STOCHASTIC_TOL,
};
use crate::combinatorics::{binomial, distinct_arrangements, multisets, subsets};
use crate::linalg::{born_matrix, DensityMatrix, LinalgError, Povm, DEFAULT_TOL};
use crate::lp::{solve, FarkasCertificate, LinearProgram, LpError, LpOutcome, Relation};
use crate::majorize::{hlp_decompose, max_subset_distribution, MajorizeError, PermutationMixture, ProbVector};
use crate::mixdisc::{check_cap, clean_multiset_weights, multiset_distribution, MixdiscError, MultisetWeight};
use crate::transport::{
    conditional_columns, feasible_transport, HallViolator, TransportError, TransportInstance, TransportOutcome,
};

/// Largest reconstruction error a returned simulation may carry.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Tuples with smaller weight are dropped from noisy simulations.
pub const MIN_TUPLE_WEIGHT: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SimulateError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mixdisc(#[from] MixdiscError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Majorize(#[from] MajorizeError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
    #[error("transport for column {column} is infeasible: demand {:.3e} exceeds supply {:.3e}", violator.demand, violator.neighbourhood_supply)]
    TransportInfeasible { column: usize, violator: HallViolator },
    #[error("noise program for column {column} is infeasible")]
    LpInfeasible { column: usize, certificate: FarkasCertificate },
    #[error("input column {column} lies outside the declared noise set")]
    NotMajorized { column: usize },
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("reconstruction residual {0:.3e} exceeds tolerance")]
    ResidualTooLarge(f64),
    #[error("empty input")]
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub target: TransitionMatrix,
    pub mixture: ClassicalMixture,
    pub residual: f64,
}

/// Normalizes weights, assembles the mixture and checks it against the target.
fn finish(
    target: TransitionMatrix,
    states: usize,
    noise: NoiseSpec,
    terms: Vec<(f64, ClassicalProtocol)>,
) -> Result<SimulationResult, SimulateError> {
    let total: f64 = terms.iter().map(|(w, _)| w).sum();
    if terms.is_empty() || total <= 0.0 {
        return Err(SimulateError::Empty);
    }
    let terms = terms.into_iter().map(|(w, protocol)| MixtureTerm { weight: w / total, protocol }).collect();
    let mixture = ClassicalMixture { states, noise, terms };
    mixture.check(DEFAULT_TOL)?;
    let residual = mixture_matrix(&mixture)?.max_abs_diff(&target);
    if residual > RESIDUAL_TOL {
        return Err(SimulateError::ResidualTooLarge(residual));
    }
    Ok(SimulationResult { target, mixture, residual })
}

/// Slot map sending position `m` of `rep` to the matching position of
/// `arrangement` (equal values matched in order).
fn slot_map(rep: &[usize], arrangement: &[usize]) -> Vec<usize> {
    let mut used = vec![false; arrangement.len()];
    rep.iter()
        .map(|&v| {
            let pos = (0..arrangement.len())
                .find(|&p| !used[p] && arrangement[p] == v)
                .expect("arrangement is a permutation of the representative");
            used[pos] = true;
            pos
        })
        .collect()
}

/// Transports tuple weights onto each target column, allowing output `i`
/// only from tuples containing `i`. Returns per-column conditional output
/// distributions keyed by multiset index.
fn tuple_transport(
    ms: &[MultisetWeight],
    demands: &[Vec<f64>],
) -> Result<Vec<BTreeMap<usize, Vec<f64>>>, SimulateError> {
    let supply: Vec<f64> = ms.iter().map(|m| m.weight * m.count as f64).collect();
    let k = demands.first().map_or(0, Vec::len);
    let edges: Vec<(usize, usize)> = ms
        .iter()
        .enumerate()
        .flat_map(|(u, m)| {
            let mut outs = m.tuple.clone();
            outs.dedup();
            outs.into_iter().map(move |i| (u, i))
        })
        .collect();
    demands
        .par_iter()
        .enumerate()
        .map(|(j, demand)| {
            debug_assert_eq!(demand.len(), k);
            let inst = TransportInstance {
                left_supply: supply.clone(),
                right_demand: demand.iter().map(|&a| a.max(0.0)).collect(),
                edges: edges.clone(),
            };
            match feasible_transport(&inst)? {
                TransportOutcome::Feasible(plan) => Ok(conditional_columns(&plan, &supply)?),
                TransportOutcome::Infeasible(violator) => {
                    Err(SimulateError::TransportInfeasible { column: j, violator })
                }
            }
        })
        .collect()
}

/// Expands per-multiset state columns (`x[u][j][m]`, slots of the
/// representative) to one protocol per arrangement.
fn expand_terms(
    ms: &[MultisetWeight],
    columns: &[Vec<Option<Vec<f64>>>],
    outputs: usize,
    inputs: usize,
) -> Vec<(f64, ClassicalProtocol)> {
    let mut terms = Vec::new();
    for (u, m) in ms.iter().enumerate() {
        let Some(cols): Option<Vec<&Vec<f64>>> = (0..inputs).map(|j| columns[j][u].as_ref()).collect() else {
            continue;
        };
        let n = m.tuple.len();
        for arrangement in distinct_arrangements(&m.tuple) {
            let sigma = slot_map(&m.tuple, &arrangement);
            let mut states = vec![vec![0.0; inputs]; n];
            for (j, col) in cols.iter().enumerate() {
                for (slot, &v) in col.iter().enumerate() {
                    states[sigma[slot]][j] = v;
                }
            }
            terms.push((m.weight, ClassicalProtocol::new_unchecked(arrangement, outputs, states)));
        }
    }
    terms
}

/// Slot distribution putting each output's conditional mass on the first
/// slot of the representative holding that output.
fn first_slot_column(rep: &[usize], output_dist: &[f64]) -> Vec<f64> {
    let mut col = vec![0.0; rep.len()];
    for (i, &w) in output_dist.iter().enumerate() {
        if w > 0.0 {
            let slot = rep.iter().position(|&o| o == i).expect("transport respects tuple support");
            col[slot] += w;
        }
    }
    col
}

fn transport_columns(
    ms: &[MultisetWeight],
    conditionals: &[BTreeMap<usize, Vec<f64>>],
    map: impl Fn(Vec<f64>) -> Vec<f64>,
) -> Vec<Vec<Option<Vec<f64>>>> {
    conditionals
        .iter()
        .map(|cond| (0..ms.len()).map(|u| cond.get(&u).map(|d| map(first_slot_column(&ms[u].tuple, d)))).collect())
        .collect()
}

/// Noiseless classical simulation of the Born channel of `povm` on `states`
/// with `n = dim` classical states.
pub fn simulate_quantum_noiseless(
    povm: &Povm,
    states: &[DensityMatrix],
    cap: u128,
) -> Result<SimulationResult, SimulateError> {
    if states.is_empty() {
        return Err(SimulateError::Empty);
    }
    let target = born_matrix(povm, states)?;
    let ms = multiset_distribution(povm, cap)?;
    let demands: Vec<Vec<f64>> = (0..target.cols()).map(|j| target.column(j)).collect();
    let conditionals = tuple_transport(&ms, &demands)?;
    let columns = transport_columns(&ms, &conditionals, |c| c);
    let terms = expand_terms(&ms, &columns, povm.len(), states.len());
    finish(target, povm.dim(), NoiseSpec::Noiseless, terms)
}

/// Subset sums `Σ_{m∈H} y_m ≥ w·(μ_1 + … + μ_|H|)` for every nonempty `H`,
/// with equality on the full set.
fn add_spectrum_constraints(
    lp: &mut LinearProgram,
    offset: usize,
    n: usize,
    weight: f64,
    prefix: &[f64],
) -> Result<(), LpError> {
    for mask in 1u32..(1 << n) {
        let members: Vec<(usize, f64)> = (0..n).filter(|m| mask >> m & 1 == 1).map(|m| (offset + m, 1.0)).collect();
        let size = members.len();
        let rel = if size == n { Relation::Eq } else { Relation::Ge };
        let rhs = if size == n { weight } else { weight * prefix[size - 1] };
        lp.add_sparse(&members, rel, rhs)?;
    }
    Ok(())
}

fn noisy_column(
    ms: &[MultisetWeight],
    demand: &[f64],
    spectrum: &[f64],
    column: usize,
) -> Result<Vec<Option<Vec<f64>>>, SimulateError> {
    let n = spectrum.len();
    let prefix: Vec<f64> = spectrum
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let mut lp = LinearProgram::new(ms.len() * n);
    for (u, m) in ms.iter().enumerate() {
        add_spectrum_constraints(&mut lp, u * n, n, m.weight, &prefix)?;
    }
    for (i, &a) in demand.iter().enumerate() {
        let terms: Vec<(usize, f64)> = ms
            .iter()
            .enumerate()
            .flat_map(|(u, m)| {
                let count = m.count as f64;
                m.tuple.iter().enumerate().filter(move |(_, &o)| o == i).map(move |(slot, _)| (u * n + slot, count))
            })
            .collect();
        lp.add_sparse(&terms, Relation::Eq, a)?;
    }
    let y = match solve(&lp)? {
        LpOutcome::Feasible { x } => x,
        LpOutcome::Infeasible(certificate) => return Err(SimulateError::LpInfeasible { column, certificate }),
        other => return Err(LpError::NumericalBreakdown(format!("unexpected outcome {other:?}")).into()),
    };
    Ok(ms
        .iter()
        .enumerate()
        .map(|(u, m)| {
            if m.weight <= MIN_TUPLE_WEIGHT {
                return None;
            }
            let mut x: Vec<f64> = y[u * n..(u + 1) * n].iter().map(|v| (v / m.weight).max(0.0)).collect();
            let s: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= s);
            Some(x)
        })
        .collect())
}

/// Noisy simulation: every state column of every protocol lies in the
/// permutohedron of the spectrum of the corresponding quantum state, hence in
/// the declared noise set.
pub fn simulate_quantum_noisy(
    povm: &Povm,
    states: &[DensityMatrix],
    spec: &NoiseSpec,
    cap: u128,
) -> Result<SimulationResult, SimulateError> {
    if states.is_empty() {
        return Err(SimulateError::Empty);
    }
    spec.validate()?;
    let target = born_matrix(povm, states)?;
    let spectra: Vec<Vec<f64>> =
        states.iter().map(|s| Ok(s.spectrum()?.into_vec())).collect::<Result<_, LinalgError>>()?;
    for (j, mu) in spectra.iter().enumerate() {
        let col_spec = spec.for_column(j).ok_or(ChannelError::NeedsColumn)?;
        if !satisfies_noise(mu, &col_spec, DEFAULT_TOL)? {
            return Err(SimulateError::PreconditionViolated(format!(
                "spectrum of state {j} lies outside the declared noise set"
            )));
        }
    }
    let ms = multiset_distribution(povm, cap)?;
    let columns: Vec<Vec<Option<Vec<f64>>>> = spectra
        .par_iter()
        .enumerate()
        .map(|(j, mu)| {
            let mu: Vec<f64> = mu.iter().map(|v| v.max(0.0)).collect();
            noisy_column(&ms, &target.column(j), &mu, j)
        })
        .collect::<Result<_, _>>()?;
    let terms = expand_terms(&ms, &columns, povm.len(), states.len());
    finish(target, povm.dim(), spec.clone(), terms)
}

/// δ-noisy classical simulation of a ball channel with `n` states, `n` the
/// (even) norm index.
pub fn simulate_ball(
    effects: &[BallEffect],
    states: &[BallState],
    delta: f64,
    cap: u128,
) -> Result<SimulationResult, SimulateError> {
    if effects.is_empty() || states.is_empty() {
        return Err(SimulateError::Empty);
    }
    let target = ball_born_matrix(effects, states, delta)?;
    let n = effects[0].norm_index;
    let k = effects.len();
    check_cap(k, n, cap)?;
    let raw: Result<Vec<(Vec<usize>, f64)>, ChannelError> = multisets(k, n)
        .into_par_iter()
        .map(|tuple| {
            let args: Vec<&BallEffect> = tuple.iter().map(|&i| &effects[i]).collect();
            Ok((tuple, bracket(&args)?))
        })
        .collect();
    let ms = clean_multiset_weights(raw?)?;
    let noiseless = ball_born_matrix(effects, states, 0.0)?;
    let demands: Vec<Vec<f64>> = (0..noiseless.cols()).map(|j| noiseless.column(j)).collect();
    let conditionals = tuple_transport(&ms, &demands)?;
    let floor = delta / n as f64;
    let columns = transport_columns(&ms, &conditionals, |c| c.into_iter().map(|v| floor + (1.0 - delta) * v).collect());
    let terms = expand_terms(&ms, &columns, k, states.len());
    finish(target, n, NoiseSpec::Delta { delta }, terms)
}

/// What the noisy classical channel is asked to reproduce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoisyTarget {
    /// Decoder plus noisy state columns.
    Protocol(ClassicalProtocol),
    /// Noisy state columns read out directly (identity decoder).
    States(TransitionMatrix),
}

impl NoisyTarget {
    fn protocol(&self) -> ClassicalProtocol {
        match self {
            NoisyTarget::Protocol(p) => p.clone(),
            NoisyTarget::States(x) => {
                ClassicalProtocol::new_unchecked((0..x.outputs()).collect(), x.outputs(), x.rows().to_vec())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum NoiselessOutcome {
    Simulated(SimulationResult),
    /// Prefix length at which the binomial test fails.
    Witness {
        r: usize,
    },
}

/// Simulates a noisy `n`-state protocol by noiseless `d`-state protocols, or
/// reports the failing prefix length.
pub fn simulate_noisy_by_noiseless(
    spec: &NoiseSpec,
    target: &NoisyTarget,
    d: usize,
) -> Result<NoiselessOutcome, SimulateError> {
    spec.validate()?;
    let protocol = target.protocol();
    protocol.check(STOCHASTIC_TOL)?;
    let n = protocol.state_count();
    if d == 0 || d > n {
        return Err(MajorizeError::BadRange(format!("need 1 <= d <= n, got d={d}, n={n}")).into());
    }
    let mu = spec
        .extremal_spectrum(n)
        .ok_or_else(|| SimulateError::PreconditionViolated("noise set must be a single permutohedron".into()))?;
    let mu = ProbVector::new(mu)?;
    if let BinomialVerdict::Witness { r, .. } = permutohedron_simulable_by_d(&mu, d)? {
        return Ok(NoiselessOutcome::Witness { r });
    }
    let l = protocol.inputs();
    for j in 0..l {
        if !satisfies_noise(&protocol.state_column(j), spec, DEFAULT_TOL)? {
            return Err(SimulateError::NotMajorized { column: j });
        }
    }
    let nu = max_subset_distribution(n, d)?;
    let decompositions: Vec<PermutationMixture> = (0..l)
        .into_par_iter()
        .map(|j| hlp_decompose(&protocol.state_column(j), nu.as_slice()))
        .collect::<Result<_, _>>()?;
    let weight = 1.0 / binomial(n, d) as f64;
    let terms = subsets(n, d)
        .into_iter()
        .map(|s| {
            let mut states = vec![vec![0.0; l]; d];
            for (j, mix) in decompositions.iter().enumerate() {
                for term in &mix.terms {
                    let p = &term.permutation.0;
                    let t = (0..d).max_by_key(|&t| p[s[t]]).expect("subset is nonempty");
                    states[t][j] += term.weight;
                }
                let total: f64 = (0..d).map(|t| states[t][j]).sum();
                (0..d).for_each(|t| states[t][j] /= total);
            }
            let decoder = s.iter().map(|&m| protocol.decoder()[m]).collect();
            (weight, ClassicalProtocol::new_unchecked(decoder, protocol.outputs(), states))
        })
        .collect();
    let result = finish(protocol_matrix(&protocol), d, NoiseSpec::Noiseless, terms)?;
    Ok(NoiselessOutcome::Simulated(result))
}

/// `A = Σ_i p_i B(i)` where row `i` of `B(i)` vanishes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReduction {
    pub weights: Vec<f64>,
    pub components: Vec<TransitionMatrix>,
    pub residual: f64,
}

impl RowReduction {
    pub fn recompose(&self) -> Option<TransitionMatrix> {
        TransitionMatrix::weighted_sum(self.weights.iter().copied().zip(&self.components))
    }
}

/// Writes `A` as a mixture of matrices each missing one output row. Default
/// weights are proportional to `1 - max_j a_ij`.
pub fn reduce_rows(a: &TransitionMatrix, p: Option<&ProbVector>) -> Result<RowReduction, SimulateError> {
    let k = a.outputs();
    let l = a.cols();
    if k < 2 || l == 0 {
        return Err(SimulateError::PreconditionViolated("need at least two rows and one column".into()));
    }
    let slack: Vec<f64> = a.rows().iter().map(|row| 1.0 - row.iter().copied().fold(f64::MIN, f64::max)).collect();
    let total_slack: f64 = slack.iter().sum();
    if total_slack < 1.0 - DEFAULT_TOL {
        return Err(SimulateError::PreconditionViolated(format!("row slacks sum to {total_slack}, need at least 1")));
    }
    let weights: Vec<f64> = match p {
        Some(p) => {
            if p.len() != k {
                return Err(SimulateError::PreconditionViolated(format!("{} weights for {k} rows", p.len())));
            }
            if let Some(i) = (0..k).find(|&i| p.as_slice()[i] > slack[i] + DEFAULT_TOL) {
                return Err(SimulateError::PreconditionViolated(format!(
                    "weight {} of row {i} exceeds its slack {}",
                    p.as_slice()[i],
                    slack[i]
                )));
            }
            p.as_slice().to_vec()
        }
        None => slack.iter().map(|s| s.max(0.0) / total_slack).collect(),
    };
    let edges: Vec<(usize, usize)> =
        (0..k).flat_map(|left| (0..k).filter(move |&r| r != left).map(move |r| (left, r))).collect();
    let conditionals: Vec<BTreeMap<usize, Vec<f64>>> = (0..l)
        .into_par_iter()
        .map(|j| {
            let inst = TransportInstance::new(weights.clone(), a.column(j), edges.clone())?;
            match feasible_transport(&inst)? {
                TransportOutcome::Feasible(plan) => Ok(conditional_columns(&plan, &weights)?),
                TransportOutcome::Infeasible(violator) => {
                    Err(SimulateError::TransportInfeasible { column: j, violator })
                }
            }
        })
        .collect::<Result<_, SimulateError>>()?;
    let components = (0..k)
        .map(|i| {
            let fallback = if i == 0 { 1 } else { 0 };
            let mut rows = vec![vec![0.0; l]; k];
            for (j, cond) in conditionals.iter().enumerate() {
                match cond.get(&i) {
                    Some(col) => (0..k).for_each(|r| rows[r][j] = col[r]),
                    None => rows[fallback][j] = 1.0,
                }
            }
            TransitionMatrix::from_rows_unchecked(rows)
        })
        .collect();
    let mut reduction = RowReduction { weights, components, residual: 0.0 };
    let rebuilt = reduction.recompose().ok_or(SimulateError::Empty)?;
    reduction.residual = rebuilt.max_abs_diff(a);
    if reduction.residual > RESIDUAL_TOL {
        return Err(SimulateError::ResidualTooLarge(reduction.residual));
    }
    Ok(reduction)
}
