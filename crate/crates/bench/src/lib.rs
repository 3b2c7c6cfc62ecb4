//! Seeded benchmark instances.

use chansim_core::lp::{LinearProgram, Relation};
use chansim_core::sample;
use chansim_core::{ComplexMatrix, DensityMatrix, Povm, TransitionMatrix};

pub struct QuantumInstance {
    pub povm: Povm,
    pub states: Vec<DensityMatrix>,
}

/// Random POVM with `k` outcomes on dimension `n`, and `l` states with
/// spectra in the δ-noisy set.
pub fn quantum(n: usize, k: usize, l: usize, delta: f64, seed: u64) -> QuantumInstance {
    let mut rng = sample::rng(seed);
    let povm = sample::random_povm(n, k, &mut rng).expect("valid POVM");
    let states = (0..l).map(|_| sample::random_noisy_density(n, delta, &mut rng)).collect();
    QuantumInstance { povm, states }
}

pub fn hermitian(n: usize, seed: u64) -> ComplexMatrix {
    sample::random_hermitian(n, &mut sample::rng(seed))
}

pub fn transition(k: usize, l: usize, seed: u64) -> TransitionMatrix {
    sample::random_transition_matrix(k, l, &mut sample::rng(seed))
}

/// Dense feasible program: `max Σx` over `Ax ≤ 1`, `x ≥ 0`, with `A` a
/// random stochastic matrix.
pub fn packing_lp(rows: usize, vars: usize, seed: u64) -> LinearProgram {
    let a = transition(rows, vars, seed);
    let mut lp = LinearProgram::new(vars);
    for row in a.rows() {
        lp.add_constraint(row.clone(), Relation::Le, 1.0).expect("row length matches");
    }
    lp.maximize(vec![1.0; vars]).expect("objective length matches");
    lp
}
