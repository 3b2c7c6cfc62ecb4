use std::path::Path;
use std::process::ExitCode;

use chansim_core::simulate::RESIDUAL_TOL;
use chansim_core::{
    born_matrix, holevo_chi, minkowski_asymmetry, mutual_information, noisy_signalling_dimension, pairwise_witness,
    reduce_rows, replacer_bounds, sample, simulate_ball, simulate_noisy_by_noiseless, simulate_quantum_noiseless,
    simulate_quantum_noisy, storability, subset_witness, BinomialVerdict, ComplexMatrix, DensityMatrix, Facet,
    NoiseSpec, NoiselessOutcome, NoisyTarget, Polytope, Povm, ProbVector,
};
use serde::Serialize;
use serde_json::{json, Value};

use crate::canonical::{digest, to_canonical_string};
use crate::certificate::{verify, write_atomic, CertificateFile, Payload, Tolerances, VERSION};
use crate::error::CliError;
use crate::input::{parse_ratio, read_json, BallInstance, HolevoInstance, MatricesDoc, MatrixDoc, QuantumInstance};
use crate::{CertifyCmd, Cli, Command, FixturesCmd, GlobalOpts, SimulateCmd};

pub fn run(cli: &Cli, argv: Vec<String>) -> Result<ExitCode, CliError> {
    let g = &cli.global;
    if !(g.tol > 0.0 && g.tol.is_finite()) {
        return Err(CliError::Usage(format!("--tol must be positive, got {}", g.tol)));
    }
    match &cli.command {
        Command::Simulate(cmd) => {
            let (doc, payload) = simulate(cmd, g)?;
            emit_certificate(g, argv, &doc, payload)
        }
        Command::Certify(cmd) => {
            let (doc, payload) = certify(cmd, g)?;
            emit_certificate(g, argv, &doc, payload)
        }
        Command::Verify { certificate, input } => {
            let cert = CertificateFile::read(certificate)?;
            let doc = input.as_deref().map(|p| read_json::<Value>(p).map(|(raw, _)| raw)).transpose()?;
            let report = verify(&cert, doc.as_ref());
            write_output(g, &report)?;
            Ok(exit(!report.valid))
        }
        Command::Fixtures(FixturesCmd::Emit { dir }) => {
            let written = emit_fixtures(dir, g.seed)?;
            write_output(g, &json!({ "written": written }))?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn exit(negative: bool) -> ExitCode {
    if negative {
        ExitCode::from(2)
    } else {
        ExitCode::SUCCESS
    }
}

fn write_output<T: Serialize>(g: &GlobalOpts, value: &T) -> Result<(), CliError> {
    let mut text = to_canonical_string(value).map_err(|e| CliError::Input(e.to_string()))?;
    text.push('\n');
    match &g.out {
        Some(path) => write_atomic(path, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_certificate(g: &GlobalOpts, argv: Vec<String>, doc: &Value, result: Payload) -> Result<ExitCode, CliError> {
    let negative = result.is_negative();
    let cert = CertificateFile {
        version: VERSION.into(),
        command: argv,
        digest: digest(doc),
        result,
        tolerances: Tolerances { input: g.tol, residual: RESIDUAL_TOL, cap: g.cap, seed: g.seed },
    };
    let bytes = cert.to_bytes()?;
    match &g.out {
        Some(path) => write_atomic(path, &bytes)?,
        None => print!("{}", String::from_utf8_lossy(&bytes)),
    }
    Ok(exit(negative))
}

fn simulate(cmd: &SimulateCmd, g: &GlobalOpts) -> Result<(Value, Payload), CliError> {
    let cap = u128::from(g.cap);
    match cmd {
        SimulateCmd::Quantum { input, noise } => {
            let (doc, inst) = read_json::<QuantumInstance>(input)?;
            let (povm, states) = inst.validate(g.tol)?;
            let res = match noise {
                NoiseSpec::Noiseless => simulate_quantum_noiseless(&povm, &states, cap)?,
                spec => simulate_quantum_noisy(&povm, &states, spec, cap)?,
            };
            Ok((doc, Payload::Simulation(res)))
        }
        SimulateCmd::Ball { input, delta } => {
            let (doc, inst) = read_json::<BallInstance>(input)?;
            let (effects, states) = inst.validate(g.tol)?;
            Ok((doc, Payload::Simulation(simulate_ball(&effects, &states, *delta, cap)?)))
        }
        SimulateCmd::Reduce { input, p } => {
            let (doc, m) = read_json::<MatrixDoc>(input)?;
            let target = m.validate(g.tol)?;
            let reduction = reduce_rows(&target, p.as_ref())?;
            Ok((doc, Payload::Reduction { target, reduction }))
        }
        SimulateCmd::NoisyToNoiseless { input, noise, d } => {
            let (doc, target) = read_json::<NoisyTarget>(input)?;
            let payload = match simulate_noisy_by_noiseless(noise, &target, *d)? {
                NoiselessOutcome::Simulated(res) => Payload::Simulation(res),
                NoiselessOutcome::Witness { .. } => {
                    let states = match &target {
                        NoisyTarget::Protocol(p) => p.state_count(),
                        NoisyTarget::States(x) => x.outputs(),
                    };
                    let mu = noise
                        .extremal_spectrum(states)
                        .ok_or_else(|| CliError::Input("noise spec has no extremal spectrum".into()))?;
                    let mu = ProbVector::new(mu).map_err(chansim_core::Error::from)?;
                    let verdict = chansim_core::permutohedron_simulable_by_d(&mu, *d)?;
                    debug_assert!(matches!(verdict, BinomialVerdict::Witness { .. }));
                    Payload::NoiselessWitness { states, d: *d, noise: noise.clone(), verdict }
                }
            };
            Ok((doc, payload))
        }
    }
}

fn certify(cmd: &CertifyCmd, g: &GlobalOpts) -> Result<(Value, Payload), CliError> {
    match cmd {
        CertifyCmd::Storability { input } => {
            let (doc, ms) = read_json::<MatricesDoc>(input)?;
            let ms = ms.validate(g.tol)?;
            Ok((doc, Payload::Storability { value: storability(&ms)?, matrices: ms.len() }))
        }
        CertifyCmd::Subset { input, r, d } => {
            let (doc, m) = read_json::<MatrixDoc>(input)?;
            Ok((doc, Payload::Witness(subset_witness(&m.validate(g.tol)?, *r, *d)?)))
        }
        CertifyCmd::Pairwise { input, d } => {
            let (doc, m) = read_json::<MatrixDoc>(input)?;
            Ok((doc, Payload::Witness(pairwise_witness(&m.validate(g.tol)?, *d)?)))
        }
        CertifyCmd::Asymmetry { input } => {
            let (doc, poly) = read_json::<Polytope>(input)?;
            poly.check(g.tol)?;
            Ok((doc, Payload::Asymmetry(minkowski_asymmetry(&poly)?)))
        }
        CertifyCmd::Signalling { n, delta } => {
            let exact = parse_ratio(delta).map_err(CliError::Usage)?;
            let dimension = noisy_signalling_dimension(*n, exact)?;
            let delta = exact.to_string();
            Ok((json!({ "n": n, "delta": delta }), Payload::Signalling { n: *n, delta, dimension }))
        }
        CertifyCmd::Replacer { m, n, delta, mu } => {
            let mu = mu.clone().unwrap_or_else(|| ProbVector::uniform(*n)).as_slice().to_vec();
            let bounds = replacer_bounds(*m, *delta, &mu, *n)?;
            let doc = json!({ "m": m, "n": n, "delta": delta, "mu": mu });
            Ok((doc, Payload::Replacer { m: *m, n: *n, delta: *delta, mu, bounds }))
        }
        CertifyCmd::Holevo { input } => {
            let (doc, inst) = read_json::<HolevoInstance>(input)?;
            let states =
                inst.states.into_iter().map(|m| DensityMatrix::new(m, g.tol)).collect::<Result<Vec<_>, _>>()?;
            let priors = match inst.priors {
                Some(p) => ProbVector::new(p).map_err(chansim_core::Error::from)?,
                None => ProbVector::uniform(states.len()),
            };
            let chi = holevo_chi(&states, &priors)?;
            let information = match inst.povm {
                Some(p) => {
                    let povm = Povm::new(p.outcomes, g.tol)?;
                    Some(mutual_information(&born_matrix(&povm, &states)?, &priors)?)
                }
                None => None,
            };
            Ok((doc, Payload::Holevo { chi, information, priors: priors.as_slice().to_vec() }))
        }
    }
}

fn povm_doc(povm: &Povm) -> Value {
    json!({ "outcomes": povm.outcomes() })
}

fn states_doc(states: &[DensityMatrix]) -> Vec<&ComplexMatrix> {
    states.iter().map(DensityMatrix::matrix).collect()
}

fn emit_fixtures(dir: &Path, seed: u64) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    let mut rng = sample::rng(seed);
    let h = 0.5;
    let octahedron =
        json!(
            [[h, 0.0, h, 0.0, h, 0.0], [h, 0.0, 0.0, h, 0.0, h], [0.0, h, h, 0.0, 0.0, h], [0.0, h, 0.0, h, h, 0.0],]
        );
    let mut vertices = Vec::new();
    for axis in 0..3 {
        for sign in [1.0, -1.0] {
            let mut v = vec![0.0; 3];
            v[axis] = sign;
            vertices.push(v);
        }
    }
    let facets: Vec<Facet> = (0..8)
        .map(|mask: u32| Facet {
            normal: (0..3).map(|b| if mask >> b & 1 == 1 { -1.0 } else { 1.0 }).collect(),
            offset: 1.0,
        })
        .collect();
    let polytope = Polytope::new(vertices, facets)?;

    let delta = 0.5;
    let qubit_povm = sample::random_povm(2, 3, &mut rng)?;
    let qubit_states: Vec<_> = (0..3).map(|_| sample::random_noisy_density(2, delta, &mut rng)).collect();
    let qutrit_povm = sample::random_povm(3, 3, &mut rng)?;
    let qutrit_states: Vec<_> =
        (0..2).map(|_| sample::depolarize(&sample::random_density(3, 1, &mut rng), delta)).collect();

    let files: Vec<(&str, Value)> = vec![
        ("octahedron.json", octahedron),
        ("octahedron_polytope.json", serde_json::to_value(&polytope).map_err(|e| CliError::Input(e.to_string()))?),
        ("povm_states.json", json!({ "povm": povm_doc(&qubit_povm), "states": states_doc(&qubit_states) })),
        ("depolarization.json", json!({ "povm": povm_doc(&qutrit_povm), "states": states_doc(&qutrit_states) })),
    ];
    let mut written = Vec::new();
    for (name, value) in files {
        let path = dir.join(name);
        let mut text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Input(e.to_string()))?;
        text.push('\n');
        write_atomic(&path, text.as_bytes())?;
        written.push(path.display().to_string());
    }
    Ok(written)
}
