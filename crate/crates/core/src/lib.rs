//! Simulation of quantum and generalized probabilistic channels by classical
//! channels with shared randomness: constructions, witnesses and the
//! numerical kernels behind them.

pub mod certify;
pub mod channels;
pub mod combinatorics;
pub mod linalg;
pub mod lp;
pub mod majorize;
pub mod mixdisc;
pub mod sample;
pub mod simulate;
pub mod transport;

pub use certify::{
    holevo_chi, minkowski_asymmetry, mutual_information, noisy_signalling_dimension, pairwise_witness,
    permutohedron_simulable_by_d, replacer_bounds, storability, subset_witness, Asymmetry, BinomialVerdict,
    CertifyError, Facet, Polytope, ReplacerBounds, Verdict, WitnessReport,
};
pub use channels::{
    ball_born_matrix, bracket, mixture_matrix, protocol_matrix, satisfies_noise, BallEffect, BallState, ChannelError,
    ClassicalMixture, ClassicalProtocol, MixtureTerm, NoiseSpec, TransitionMatrix,
};
pub use linalg::{born_matrix, ComplexMatrix, DensityMatrix, LinalgError, Povm, Spectrum};
pub use lp::{FarkasCertificate, LinearProgram, LpError, LpOutcome, Relation};
pub use majorize::{MajorizeError, Permutation, PermutationMixture, ProbVector};
pub use mixdisc::{mixed_discriminant, outcome_distribution, MixdiscError, OutcomeDistribution};
pub use simulate::{
    reduce_rows, simulate_ball, simulate_noisy_by_noiseless, simulate_quantum_noiseless, simulate_quantum_noisy,
    NoiselessOutcome, NoisyTarget, RowReduction, SimulateError, SimulationResult,
};
pub use transport::{
    feasible_transport, HallViolator, TransportError, TransportInstance, TransportOutcome, TransportPlan,
};

/// Any error raised by the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mixdisc(#[from] MixdiscError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Majorize(#[from] MajorizeError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Simulate(#[from] SimulateError),
    #[error(transparent)]
    Certify(#[from] CertifyError),
}
