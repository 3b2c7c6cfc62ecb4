//! Input documents and argument parsers.

use std::path::Path;

use chansim_core::{
    BallEffect, BallState, ComplexMatrix, DensityMatrix, NoiseSpec, Povm, ProbVector, TransitionMatrix,
};
use num_rational::Ratio;
use serde::Deserialize;
use serde_json::Value;

use crate::error::CliError;

/// Reads a JSON file, returning both the raw document (for digests) and its
/// typed form.
pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<(Value, T), CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })?;
    let raw: Value = serde_json::from_str(&text).map_err(|source| CliError::Json { path: path.into(), source })?;
    let typed = T::deserialize(&raw).map_err(|source| CliError::Json { path: path.into(), source })?;
    Ok((raw, typed))
}

#[derive(Debug, Deserialize)]
pub struct PovmDoc {
    pub outcomes: Vec<ComplexMatrix>,
}

#[derive(Debug, Deserialize)]
pub struct QuantumInstance {
    pub povm: PovmDoc,
    pub states: Vec<ComplexMatrix>,
}

impl QuantumInstance {
    pub fn validate(self, tol: f64) -> Result<(Povm, Vec<DensityMatrix>), CliError> {
        let povm = Povm::new(self.povm.outcomes, tol).map_err(chansim_core::Error::from)?;
        let states = self
            .states
            .into_iter()
            .map(|m| DensityMatrix::new(m, tol))
            .collect::<Result<Vec<_>, _>>()
            .map_err(chansim_core::Error::from)?;
        Ok((povm, states))
    }
}

#[derive(Debug, Deserialize)]
pub struct HolevoInstance {
    #[serde(default)]
    pub povm: Option<PovmDoc>,
    pub states: Vec<ComplexMatrix>,
    #[serde(default)]
    pub priors: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
pub struct EffectDoc {
    pub c: f64,
    pub v: Vec<f64>,
}

#[derive(Debug, Deserialize)]
pub struct BallInstance {
    pub effects: Vec<EffectDoc>,
    pub ball_states: Vec<Vec<f64>>,
    pub norm_index: usize,
}

impl BallInstance {
    pub fn validate(self, tol: f64) -> Result<(Vec<BallEffect>, Vec<BallState>), CliError> {
        let n = self.norm_index;
        let effects = self
            .effects
            .into_iter()
            .map(|e| BallEffect::new(e.c, e.v, n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(chansim_core::Error::from)?;
        let states = self
            .ball_states
            .into_iter()
            .map(|x| BallState::new(x, n, tol))
            .collect::<Result<Vec<_>, _>>()
            .map_err(chansim_core::Error::from)?;
        Ok((effects, states))
    }
}

/// A transition matrix, bare or wrapped as `{"matrix": ...}`.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MatrixDoc {
    Bare(Vec<Vec<f64>>),
    Wrapped { matrix: Vec<Vec<f64>> },
}

impl MatrixDoc {
    pub fn validate(self, tol: f64) -> Result<TransitionMatrix, CliError> {
        let rows = match self {
            MatrixDoc::Bare(r) | MatrixDoc::Wrapped { matrix: r } => r,
        };
        Ok(TransitionMatrix::new(rows, tol).map_err(chansim_core::Error::from)?)
    }
}

/// One matrix or a list of them.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum MatricesDoc {
    One(MatrixDoc),
    Many(Vec<MatrixDoc>),
    Wrapped { matrices: Vec<MatrixDoc> },
}

impl MatricesDoc {
    pub fn validate(self, tol: f64) -> Result<Vec<TransitionMatrix>, CliError> {
        match self {
            MatricesDoc::One(m) => Ok(vec![m.validate(tol)?]),
            MatricesDoc::Many(ms) | MatricesDoc::Wrapped { matrices: ms } => {
                ms.into_iter().map(|m| m.validate(tol)).collect()
            }
        }
    }
}

/// `none`, `delta:0.5`, `delta:1/2` or `perm:a,b,c`.
pub fn parse_noise(s: &str) -> Result<NoiseSpec, String> {
    let (kind, arg) = s.split_once(':').unwrap_or((s, ""));
    let spec = match kind {
        "none" | "noiseless" if arg.is_empty() => NoiseSpec::Noiseless,
        "delta" => NoiseSpec::Delta { delta: ratio_to_f64(parse_ratio(arg)?) },
        "perm" => NoiseSpec::Permutohedron { base: parse_prob(arg)? },
        _ => return Err(format!("unknown noise spec `{s}`; expected none, delta:<x> or perm:<a,b,...>")),
    };
    spec.validate().map_err(|e| e.to_string())?;
    Ok(spec)
}

/// Exact rational from `p/q` or a finite decimal.
pub fn parse_ratio(s: &str) -> Result<Ratio<i64>, String> {
    let s = s.trim();
    let bad = || format!("`{s}` is not a rational number");
    if s.contains('/') {
        return s.parse::<Ratio<i64>>().map_err(|_| bad());
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int}{frac}");
    let numer: i64 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    let denom = 10i64.checked_pow(frac.len() as u32).ok_or_else(bad)?;
    let r = Ratio::new(numer, denom);
    Ok(if neg { -r } else { r })
}

pub fn ratio_to_f64(r: Ratio<i64>) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

pub fn parse_list(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|t| {
            let t = t.trim();
            match parse_ratio(t) {
                Ok(r) => Ok(ratio_to_f64(r)),
                Err(_) => t.parse::<f64>().map_err(|_| format!("`{t}` is not a number")),
            }
        })
        .collect()
}

pub fn parse_prob(s: &str) -> Result<ProbVector, String> {
    ProbVector::new(parse_list(s)?).map_err(|e| e.to_string())
}

pub fn parse_delta(s: &str) -> Result<f64, String> {
    let d = ratio_to_f64(parse_ratio(s)?);
    if !(0.0..=1.0).contains(&d) {
        return Err(format!("delta must lie in [0, 1], got {s}"));
    }
    Ok(d)
}
