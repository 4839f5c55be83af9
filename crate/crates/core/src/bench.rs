//! Latency harness and audit-trail records.
//!
//! Timings cover `validate_profile` only; graph parsing and profile
//! composition happen before the clock starts.

use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::Path;
use std::time::{Duration, Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::governance::{validate_profile, ComposedKb};
use crate::rdf::Graph;

pub const MIN_SAMPLES: usize = 30;
const WARMUP_RUNS: usize = 5;

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("at least {MIN_SAMPLES} samples are required, got {0}")]
    TooFewSamples(usize),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchResult {
    pub profile: String,
    pub case: String,
    pub samples: usize,
    pub min_ms: f64,
    pub median_ms: f64,
    pub max_ms: f64,
    pub shapes: usize,
    pub violations: usize,
    pub conforms: bool,
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1000.0
}

/// Median of a non-empty sample; mean of the middle pair for even lengths.
pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn bench_case(
    profile: &str,
    kb: &ComposedKb,
    case: &str,
    evidence: &Graph,
    samples: usize,
) -> Result<BenchResult, BenchError> {
    if samples < MIN_SAMPLES {
        return Err(BenchError::TooFewSamples(samples));
    }
    let mut last = None;
    for _ in 0..WARMUP_RUNS {
        last = Some(validate_profile(evidence, kb));
    }
    let mut times = Vec::with_capacity(samples);
    for _ in 0..samples {
        let start = Instant::now();
        let report = validate_profile(evidence, kb);
        times.push(ms(start.elapsed()));
        last = Some(report);
    }
    let report = last.expect("at least one run");
    let min = times.iter().copied().fold(f64::INFINITY, f64::min);
    let max = times.iter().copied().fold(0.0, f64::max);
    Ok(BenchResult {
        profile: profile.to_string(),
        case: case.to_string(),
        samples,
        min_ms: min,
        median_ms: median(&mut times),
        max_ms: max,
        shapes: kb.shape_count(),
        violations: report.violation_count(),
        conforms: report.conforms,
    })
}

/// Median over all cases of a profile's per-case medians.
pub fn profile_median(results: &[BenchResult], profile: &str) -> Option<f64> {
    let mut m: Vec<f64> = results
        .iter()
        .filter(|r| r.profile == profile)
        .map(|r| r.median_ms)
        .collect();
    (!m.is_empty()).then(|| median(&mut m))
}

pub fn render_table(results: &[BenchResult]) -> String {
    let mut out = String::from("# validation latency (ms), engine only; parsing excluded\n");
    let _ = writeln!(
        out,
        "{:<16} {:<24} {:>6} {:>7} {:>9} {:>9} {:>9}  verdict",
        "profile", "case", "shapes", "samples", "min", "median", "max"
    );
    for r in results {
        let verdict = if r.conforms { "pass".to_string() } else { format!("fail ({})", r.violations) };
        let _ = writeln!(
            out,
            "{:<16} {:<24} {:>6} {:>7} {:>9.3} {:>9.3} {:>9.3}  {verdict}",
            r.profile, r.case, r.shapes, r.samples, r.min_ms, r.median_ms, r.max_ms
        );
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// `sha256  path` lines sorted by path, in the `sha256sum` layout.
pub fn hash_manifest(paths: &[&Path]) -> Result<String, BenchError> {
    let mut entries = Vec::new();
    for p in paths {
        let bytes = std::fs::read(p).map_err(|source| BenchError::Io {
            path: p.display().to_string(),
            source,
        })?;
        entries.push((p.display().to_string(), sha256_hex(&bytes)));
    }
    entries.sort();
    Ok(entries
        .into_iter()
        .map(|(path, hash)| format!("{hash}  {path}\n"))
        .collect())
}

/// One audit-trail entry, appended as a JSON line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RunRecord {
    pub timestamp: u64,
    pub command: String,
    /// (path, sha256 of the file bytes)
    pub inputs: Vec<(String, String)>,
    /// sha256 of the canonical report/output bytes.
    pub output_hash: String,
}

impl RunRecord {
    pub fn new(command: impl Into<String>, inputs: &[(String, Vec<u8>)], output: &[u8]) -> Self {
        RunRecord {
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0),
            command: command.into(),
            inputs: inputs
                .iter()
                .map(|(p, bytes)| (p.clone(), sha256_hex(bytes)))
                .collect(),
            output_hash: sha256_hex(output),
        }
    }

    pub fn append_to(&self, log: &Path) -> Result<(), BenchError> {
        let io = |source| BenchError::Io {
            path: log.display().to_string(),
            source,
        };
        let mut f = OpenOptions::new().create(true).append(true).open(log).map_err(io)?;
        let line = serde_json::to_string(self).expect("record serializes");
        writeln!(f, "{line}").map_err(io)
    }
}
