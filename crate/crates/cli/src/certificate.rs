//! Certificate files and their independent verification.

use std::io::Write;
use std::path::Path;

use chansim_core::{
    mixture_matrix, Asymmetry, BinomialVerdict, NoiseSpec, Polytope, ReplacerBounds, RowReduction, SimulationResult,
    TransitionMatrix, Verdict, WitnessReport,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::canonical::to_canonical_string;
use crate::error::CliError;
use crate::input::{MatricesDoc, MatrixDoc};

pub const VERSION: &str = "chansim-certificate/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub input: f64,
    pub residual: f64,
    pub cap: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateFile {
    pub version: String,
    pub command: Vec<String>,
    pub digest: String,
    pub result: Payload,
    pub tolerances: Tolerances,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Simulation(SimulationResult),
    /// A noisy target that no `d`-state noiseless mixture reproduces.
    NoiselessWitness {
        states: usize,
        d: usize,
        noise: NoiseSpec,
        verdict: BinomialVerdict,
    },
    Reduction {
        target: TransitionMatrix,
        reduction: RowReduction,
    },
    Witness(WitnessReport),
    Storability {
        value: f64,
        matrices: usize,
    },
    Asymmetry(Asymmetry),
    Signalling {
        n: usize,
        delta: String,
        dimension: usize,
    },
    Replacer {
        m: usize,
        n: usize,
        delta: f64,
        mu: Vec<f64>,
        bounds: ReplacerBounds,
    },
    Holevo {
        chi: f64,
        information: Option<f64>,
        priors: Vec<f64>,
    },
}

impl Payload {
    /// True when the payload reports that something cannot be done.
    pub fn is_negative(&self) -> bool {
        match self {
            Payload::NoiselessWitness { .. } => true,
            Payload::Witness(w) => w.verdict == Verdict::Violation,
            _ => false,
        }
    }
}

impl CertificateFile {
    pub fn to_bytes(&self) -> Result<Vec<u8>, CliError> {
        let mut text = to_canonical_string(self).map_err(|e| CliError::Input(e.to_string()))?;
        text.push('\n');
        Ok(text.into_bytes())
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })
    }
}

/// Writes through a temporary file in the target directory, then renames.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let io = |source| CliError::Io { path: path.into(), source };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(bytes).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Outcome of checking a certificate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verification {
    pub valid: bool,
    pub checks: Vec<Check>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Verification {
    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.valid &= passed;
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

/// Re-derives everything checkable from the certificate alone. With the
/// original input document the digest is compared and witness, storability
/// and asymmetry values are recomputed.
pub fn verify(cert: &CertificateFile, input: Option<&Value>) -> Verification {
    let mut v = Verification { valid: true, checks: Vec::new() };
    v.push("version", cert.version == VERSION, cert.version.clone());
    if let Some(doc) = input {
        let d = crate::canonical::digest(doc);
        v.push("digest", d == cert.digest, d);
    }
    let tol = cert.tolerances.input;
    match &cert.result {
        Payload::Simulation(sim) => {
            match sim.mixture.check(tol) {
                Ok(()) => v.push("mixture", true, format!("{} terms", sim.mixture.terms.len())),
                Err(e) => v.push("mixture", false, e.to_string()),
            }
            v.push("target", sim.target.check(tol).is_ok(), "column-stochastic");
            match mixture_matrix(&sim.mixture) {
                Ok(m) => {
                    let diff = m.max_abs_diff(&sim.target);
                    v.push("recomposition", diff <= cert.tolerances.residual, format!("{diff:.3e}"));
                    v.push(
                        "residual",
                        sim.residual <= cert.tolerances.residual && (diff - sim.residual).abs() <= tol,
                        format!("recorded {:.3e}", sim.residual),
                    );
                }
                Err(e) => v.push("recomposition", false, e.to_string()),
            }
        }
        Payload::Reduction { target, reduction } => {
            let zero_rows = reduction
                .components
                .iter()
                .enumerate()
                .all(|(i, b)| b.check(tol).is_ok() && b.rows().get(i).is_some_and(|r| r.iter().all(|&x| x == 0.0)));
            v.push("components", zero_rows, format!("{} components", reduction.components.len()));
            let total: f64 = reduction.weights.iter().sum();
            let nonneg = reduction.weights.iter().all(|&w| w >= -tol);
            v.push("weights", nonneg && (total - 1.0).abs() <= tol, format!("sum {total:.3e}"));
            match reduction.recompose() {
                Some(m) if m.outputs() == target.outputs() && m.cols() == target.cols() => {
                    let diff = m.max_abs_diff(target);
                    v.push("recomposition", diff <= cert.tolerances.residual, format!("{diff:.3e}"));
                }
                _ => v.push("recomposition", false, "shape mismatch"),
            }
        }
        Payload::Witness(w) => {
            let consistent = match w.verdict {
                Verdict::Violation if w.r.is_some() => w.value < w.bound,
                Verdict::Violation => w.value > w.bound,
                Verdict::Pass if w.r.is_some() => w.value >= w.bound - tol,
                Verdict::Pass => w.value <= w.bound + tol,
            };
            v.push("verdict", consistent, format!("value {} bound {}", w.value, w.bound));
            let expected = match w.r {
                Some(r) => binom(w.rows.saturating_sub(w.d), w.rows.saturating_sub(r)),
                None => binom(w.rows, 2) - binom(w.rows.saturating_sub(w.d), 2),
            };
            v.push("bound", w.bound == expected as f64, format!("expected {expected}"));
        }
        Payload::NoiselessWitness { states, d, noise, verdict } => {
            let recomputed = noise
                .extremal_spectrum(*states)
                .and_then(|mu| chansim_core::ProbVector::new(mu).ok())
                .and_then(|mu| chansim_core::permutohedron_simulable_by_d(&mu, *d).ok());
            v.push("binomial test", recomputed.as_ref() == Some(verdict), format!("{recomputed:?}"));
        }
        Payload::Signalling { n, delta, dimension } => {
            let again = crate::input::parse_ratio(delta)
                .ok()
                .and_then(|r| chansim_core::noisy_signalling_dimension(*n, r).ok());
            v.push("dimension", again == Some(*dimension), format!("{again:?}"));
        }
        Payload::Replacer { m, n, delta, mu, bounds } => {
            let again = chansim_core::replacer_bounds(*m, *delta, mu, *n).ok();
            v.push("bounds", again.as_ref() == Some(bounds), format!("{again:?}"));
        }
        Payload::Storability { .. } | Payload::Asymmetry(_) | Payload::Holevo { .. } => {}
    }
    if let Some(doc) = input {
        recompute(&cert.result, doc, tol, &mut v);
    }
    v
}

/// Re-evaluates cheap deterministic payloads from the original input.
fn recompute(result: &Payload, doc: &Value, tol: f64, v: &mut Verification) {
    let matrix = || MatrixDoc::deserialize(doc).ok().and_then(|m| m.validate(tol).ok());
    let again = match result {
        Payload::Witness(w) => matrix()
            .and_then(|a| match w.r {
                Some(r) => chansim_core::subset_witness(&a, r, w.d).ok(),
                None => chansim_core::pairwise_witness(&a, w.d).ok(),
            })
            .map(Payload::Witness),
        Payload::Storability { .. } => {
            MatricesDoc::deserialize(doc).ok().and_then(|m| m.validate(tol).ok()).and_then(|ms| {
                Some(Payload::Storability { value: chansim_core::storability(&ms).ok()?, matrices: ms.len() })
            })
        }
        Payload::Asymmetry(_) => Polytope::deserialize(doc)
            .ok()
            .and_then(|p| chansim_core::minkowski_asymmetry(&p).ok())
            .map(Payload::Asymmetry),
        _ => return,
    };
    let same = again.as_ref().is_some_and(|p| close(p, result, tol));
    v.push("recomputed", same, format!("{again:?}"));
}

fn close(a: &Payload, b: &Payload, tol: f64) -> bool {
    match (a, b) {
        (Payload::Witness(x), Payload::Witness(y)) => {
            (x.value - y.value).abs() <= tol && x.bound == y.bound && x.verdict == y.verdict
        }
        (Payload::Storability { value: x, .. }, Payload::Storability { value: y, .. }) => (x - y).abs() <= tol,
        (Payload::Asymmetry(x), Payload::Asymmetry(y)) => (x.asymmetry - y.asymmetry).abs() <= 1e-6,
        _ => false,
    }
}

fn binom(n: usize, k: usize) -> u128 {
    chansim_core::combinatorics::binomial(n, k)
}
