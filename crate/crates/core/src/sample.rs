//! Seeded random instances: unitaries, states, POVMs, ball channels and
//! noisy classical columns.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::channels::{p_norm, BallEffect, BallState, ChannelError, TransitionMatrix};
use crate::linalg::{hermitian_eigen, ComplexMatrix, DensityMatrix, LinalgError, Povm, DEFAULT_TOL};
use crate::majorize::ProbVector;

pub type SeededRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian_complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn ginibre(n: usize, cols: usize, rng: &mut impl Rng) -> Vec<Vec<Complex64>> {
    (0..n).map(|_| (0..cols).map(|_| gaussian_complex(rng)).collect()).collect()
}

/// Haar-like unitary from Gram–Schmidt on a complex Gaussian matrix.
pub fn random_unitary(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n).map(|_| gaussian_complex(rng)).collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            v.iter_mut().zip(u).for_each(|(x, y)| *x -= proj * y);
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            cols.push(v.into_iter().map(|z| z / norm).collect());
        }
    }
    ComplexMatrix::from_columns(&cols)
}

/// `U diag(values) U*` for a random unitary `U`.
pub fn random_with_spectrum(values: &[f64], rng: &mut impl Rng) -> ComplexMatrix {
    let u = random_unitary(values.len(), rng);
    let m = &(&u * &ComplexMatrix::diag(values)) * &u.adjoint();
    hermitize(&m)
}

fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + &m.adjoint()).scale(0.5)
}

/// Random Hermitian matrix with `0 ≤ E ≤ 1`.
pub fn random_unit_interval_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let values: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    random_with_spectrum(&values, rng)
}

/// Random Hermitian matrix with Gaussian entries.
pub fn random_hermitian(n: usize, rng: &mut impl Rng) -> ComplexMatrix {
    let g = ComplexMatrix::from_rows(ginibre(n, n, rng)).expect("square");
    hermitize(&g)
}

/// Random density matrix `G G* / tr(G G*)` with `G` of the given rank.
pub fn random_density(n: usize, rank: usize, rng: &mut impl Rng) -> DensityMatrix {
    let g = ginibre(n, rank.max(1), rng);
    let mut m = ComplexMatrix::zeros(n);
    for a in 0..n {
        for b in 0..n {
            m[(a, b)] = g[a].iter().zip(&g[b]).map(|(x, y)| x * y.conj()).sum();
        }
    }
    let tr = m.trace().re;
    DensityMatrix::new_unchecked(hermitize(&m.scale(1.0 / tr)))
}

/// `(1 − δ) σ + δ 1/n`.
pub fn depolarize(rho: &DensityMatrix, delta: f64) -> DensityMatrix {
    let n = rho.dim();
    let m = &rho.matrix().scale(1.0 - delta) + &ComplexMatrix::identity(n).scale(delta / n as f64);
    DensityMatrix::new_unchecked(m)
}

/// Random density matrix with every eigenvalue at least `δ/n`.
pub fn random_noisy_density(n: usize, delta: f64, rng: &mut impl Rng) -> DensityMatrix {
    let rank = rng.random_range(1..=n);
    depolarize(&random_density(n, rank, rng), delta)
}

/// Random `k`-outcome POVM on `C^n`: `E_i = S^{-1/2} G_i S^{-1/2}` with
/// `S = Σ G_i` and random positive `G_i`.
pub fn random_povm(n: usize, k: usize, rng: &mut impl Rng) -> Result<Povm, LinalgError> {
    let mut ranks: Vec<usize> = (0..k).map(|_| rng.random_range(1..=n)).collect();
    if ranks.iter().sum::<usize>() < n {
        ranks[0] = n;
    }
    let gs: Vec<ComplexMatrix> = ranks.iter().map(|&r| random_density(n, r, rng).matrix().clone()).collect();
    let s = gs.iter().skip(1).fold(gs[0].clone(), |acc, g| &acc + g);
    let inv_sqrt = hermitian_eigen(&s, DEFAULT_TOL)?.map(|x| 1.0 / x.max(1e-300).sqrt());
    let outcomes = gs.iter().map(|g| hermitize(&(&(&inv_sqrt * g) * &inv_sqrt))).collect();
    Povm::new(outcomes, 1e-8)
}

/// Flat Dirichlet sample.
pub fn random_probability(n: usize, rng: &mut impl Rng) -> ProbVector {
    let w: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1) + 1e-12).collect();
    let s: f64 = w.iter().sum();
    ProbVector::new(w.into_iter().map(|x| x / s).collect()).expect("normalized")
}

/// Random column-stochastic `k × l` matrix.
pub fn random_transition_matrix(k: usize, l: usize, rng: &mut impl Rng) -> TransitionMatrix {
    let cols: Vec<ProbVector> = (0..l).map(|_| random_probability(k, rng)).collect();
    let rows = (0..k).map(|i| cols.iter().map(|c| c.as_slice()[i]).collect()).collect();
    TransitionMatrix::from_rows_unchecked(rows)
}

/// Random convex combination of a few permutations of `mu`.
pub fn random_in_permutohedron(mu: &[f64], rng: &mut impl Rng) -> Vec<f64> {
    let n = mu.len();
    let terms = rng.random_range(1..=n.max(1) + 1);
    let weights = random_probability(terms, rng);
    let mut x = vec![0.0; n];
    let mut perm: Vec<usize> = (0..n).collect();
    for &w in weights.as_slice() {
        perm.shuffle(rng);
        for (a, &p) in perm.iter().enumerate() {
            x[a] += w * mu[p];
        }
    }
    x
}

/// Random partition of unity of `k` ball effects on `R^dim` with norm index
/// `n`: random `v_i` summing to zero, `c_i = ‖v_i‖_n + slack`, rescaled so
/// that the `c_i` sum to one.
pub fn random_ball_effects(
    dim: usize,
    n: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Result<Vec<BallEffect>, ChannelError> {
    let mut vs: Vec<Vec<f64>> =
        (0..k.saturating_sub(1)).map(|_| (0..dim).map(|_| rng.sample(StandardNormal)).collect()).collect();
    let last: Vec<f64> = (0..dim).map(|t| -vs.iter().map(|v| v[t]).sum::<f64>()).collect();
    vs.push(last);
    let cs: Vec<f64> = vs.iter().map(|v| p_norm(v, n as f64) + 0.5 * rng.random::<f64>()).collect();
    let total: f64 = cs.iter().sum();
    vs.into_iter()
        .zip(cs)
        .map(|(v, c)| BallEffect::new(c / total, v.into_iter().map(|x| x / total).collect(), n))
        .collect()
}

/// Random point of the unit ball of the norm dual to `‖·‖_n`; with
/// `on_boundary` the point has unit dual norm.
pub fn random_ball_state(dim: usize, n: usize, on_boundary: bool, rng: &mut impl Rng) -> BallState {
    let q = n as f64 / (n as f64 - 1.0);
    let dir: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
    let norm = p_norm(&dir, q);
    let radius = if on_boundary { 1.0 } else { rng.random::<f64>() };
    BallState { x: dir.into_iter().map(|x| x * radius / norm * (1.0 - 1e-12)).collect() }
}
