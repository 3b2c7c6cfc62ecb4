use chansim_core::certify::{Facet, Polytope, WitnessReport};
use chansim_core::channels::{
    bracket, mixture_matrix, BallEffect, BallState, ClassicalMixture, NoiseSpec, TransitionMatrix,
};
use chansim_core::combinatorics::permutations;
use chansim_core::linalg::ComplexMatrix;
use chansim_core::lp::{LinearProgram, Relation};
use chansim_core::majorize::ProbVector;
use chansim_core::mixdisc::DEFAULT_ENUMERATION_CAP;
use chansim_core::sample;
use chansim_core::simulate::{simulate_quantum_noisy, SimulationResult};
use proptest::prelude::*;
use rand::Rng;
use serde::{de::DeserializeOwned, Serialize};
use std::fmt::Debug;

fn random_effect(dim: usize, n: usize, rng: &mut sample::SeededRng) -> BallEffect {
    BallEffect::new(rng.random_range(-1.0..1.0), (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect(), n).unwrap()
}

fn roundtrip<T: Serialize + DeserializeOwned + PartialEq + Debug>(value: &T) {
    let text = serde_json::to_string(value).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, value, "{text}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn bracket_is_symmetric(seed in any::<u64>(), half in 1usize..=2, dim in 1usize..=4) {
        let n = 2 * half;
        let mut rng = sample::rng(seed);
        let es: Vec<BallEffect> = (0..n).map(|_| random_effect(dim, n, &mut rng)).collect();
        let base = bracket(&es.iter().collect::<Vec<_>>()).unwrap();
        for p in permutations(n) {
            let args: Vec<&BallEffect> = p.iter().map(|&i| &es[i]).collect();
            prop_assert!((bracket(&args).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn bracket_is_multilinear(seed in any::<u64>(), half in 1usize..=2, dim in 1usize..=4) {
        let n = 2 * half;
        let mut rng = sample::rng(seed);
        let (a, b) = (random_effect(dim, n, &mut rng), random_effect(dim, n, &mut rng));
        let rest: Vec<BallEffect> = (1..n).map(|_| random_effect(dim, n, &mut rng)).collect();
        let (s, t): (f64, f64) = (rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
        let combo = BallEffect::new(
            s * a.c + t * b.c,
            a.v.iter().zip(&b.v).map(|(x, y)| s * x + t * y).collect(),
            n,
        ).unwrap();
        let eval = |first: &BallEffect| {
            let mut args = vec![first];
            args.extend(rest.iter());
            bracket(&args).unwrap()
        };
        prop_assert!((eval(&combo) - (s * eval(&a) + t * eval(&b))).abs() < 1e-10);
    }

    #[test]
    fn weighted_sum_of_stochastic_is_stochastic(seed in any::<u64>(), k in 1usize..=5, l in 1usize..=5) {
        let mut rng = sample::rng(seed);
        let a = sample::random_transition_matrix(k, l, &mut rng);
        let b = sample::random_transition_matrix(k, l, &mut rng);
        let lam: f64 = rng.random();
        let c = TransitionMatrix::weighted_sum([(lam, &a), (1.0 - lam, &b)]).unwrap();
        prop_assert!(c.check(1e-12).is_ok());
    }
}

#[test]
fn unit_effect_brackets_to_one() {
    let e = BallEffect::unit(3, 4).unwrap();
    assert!((bracket(&[&e, &e, &e, &e]).unwrap() - 1.0).abs() < 1e-15);
}

#[test]
fn ball_state_outside_unit_ball_rejected() {
    assert!(BallState::new(vec![1.0, 1.0], 2, 1e-9).is_err());
    assert!(BallState::new(vec![0.6, 0.8], 2, 1e-9).is_ok());
}

#[test]
fn json_roundtrips() {
    let mut rng = sample::rng(31);
    roundtrip(&sample::random_transition_matrix(3, 4, &mut rng));
    roundtrip(&NoiseSpec::delta(0.25).unwrap());
    roundtrip(&NoiseSpec::Noiseless);
    roundtrip(&NoiseSpec::Permutohedron { base: ProbVector::new(vec![0.5, 0.25, 0.25]).unwrap() });
    roundtrip(&sample::random_density(3, 2, &mut rng).matrix().clone());
    roundtrip(&ComplexMatrix::identity(2));
    roundtrip(&BallState { x: vec![0.1, -0.2] });
    roundtrip(&random_effect(3, 2, &mut rng));

    let delta = 0.2;
    let povm = sample::random_povm(2, 3, &mut rng).unwrap();
    let states: Vec<_> = (0..2).map(|_| sample::random_noisy_density(2, delta, &mut rng)).collect();
    let res =
        simulate_quantum_noisy(&povm, &states, &NoiseSpec::delta(delta).unwrap(), DEFAULT_ENUMERATION_CAP).unwrap();
    let text = serde_json::to_string(&res).unwrap();
    let back: SimulationResult = serde_json::from_str(&text).unwrap();
    let back_mix: ClassicalMixture = back.mixture.clone();
    assert!(mixture_matrix(&back_mix).unwrap().max_abs_diff(&mixture_matrix(&res.mixture).unwrap()) == 0.0);
    assert_eq!(back, res);

    let mut lp = LinearProgram::new(2);
    lp.add_sparse(&[(0, 1.0), (1, 1.0)], Relation::Le, 1.0).unwrap();
    lp.set_free(1);
    lp.maximize(vec![1.0, 0.0]).unwrap();
    roundtrip(&lp);

    let poly = Polytope::new(
        vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]],
        vec![
            Facet { normal: vec![-1.0, 0.0], offset: 0.0 },
            Facet { normal: vec![0.0, -1.0], offset: 0.0 },
            Facet { normal: vec![1.0, 1.0], offset: 1.0 },
        ],
    )
    .unwrap();
    roundtrip(&poly);
    let report = chansim_core::certify::subset_witness(&TransitionMatrix::identity(3), 2, 1).unwrap();
    roundtrip::<WitnessReport>(&report);
}
