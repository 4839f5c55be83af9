//! Bundled evidence cases, IR sources, profile manifests and expected outcomes.
//!
//! The `ex:` namespace is pinned to `http://example.org/okb#`. Values the
//! case prose leaves open (timestamp, CPU time, node names) are arbitrary
//! but fixed.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rdf::{parse_turtle, Graph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CorpusError {
    #[error("unknown case '{0}'")]
    UnknownCase(String),
    #[error("goldens line {line}: {reason}")]
    Goldens { line: usize, reason: String },
}

macro_rules! corpus_file {
    ($path:literal) => {
        ($path, include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/", $path)))
    };
}

/// (file name, text) for every shipped block IR source.
pub const BLOCK_SOURCES: &[(&str, &str)] = &[
    corpus_file!("blocks/accountability.ir.yaml"),
    corpus_file!("blocks/combined.ir.yaml"),
    corpus_file!("blocks/fairness.ir.yaml"),
    corpus_file!("blocks/fairness_transparency.ir.yaml"),
    corpus_file!("blocks/logging.ir.yaml"),
    corpus_file!("blocks/provenance.ir.yaml"),
    corpus_file!("blocks/transparency.ir.yaml"),
];

pub const PROFILE_SOURCES: &[(&str, &str)] = &[
    corpus_file!("profiles/accountability.profile"),
    corpus_file!("profiles/china.profile"),
    corpus_file!("profiles/combined.profile"),
    corpus_file!("profiles/eu.profile"),
    corpus_file!("profiles/eu_fairness.profile"),
    corpus_file!("profiles/fairness.profile"),
    corpus_file!("profiles/us.profile"),
];

pub const GOLDENS: &str = include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/goldens.txt"));

struct CaseSpec {
    id: &'static str,
    source: &'static str,
    description: &'static str,
    violated: &'static [&'static str],
}

const CASES: &[CaseSpec] = &[
    CaseSpec {
        id: "conform",
        source: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/cases/case_conform.ttl")),
        description: "complete evidence; disparity 0.083 within the 0.20 threshold",
        violated: &[],
    },
    CaseSpec {
        id: "missing_explanation",
        source: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/cases/case_missing_explanation.ttl")),
        description: "explanation link removed",
        violated: &["B1"],
    },
    CaseSpec {
        id: "missing_model_artifact",
        source: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/cases/case_missing_model_artifact.ttl")),
        description: "activity does not prov:used the model artifact",
        violated: &["A5"],
    },
    CaseSpec {
        id: "disparity_exceeds",
        source: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/cases/case_disparity_exceeds.ttl")),
        description: "allocations 100.0 / 70.0, disparity 0.30 above the 0.20 threshold",
        violated: &["B5"],
    },
    CaseSpec {
        id: "exp1_conform",
        source: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/cases/case_exp1_conform.ttl")),
        description: "jurisdiction run: complete evidence",
        violated: &[],
    },
    CaseSpec {
        id: "exp1_profile",
        source: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/cases/case_exp1_profile.ttl")),
        description: "jurisdiction run: explanation link removed",
        violated: &["B1"],
    },
    CaseSpec {
        id: "exp1_violate",
        source: include_str!(concat!(env!("CARGO_MANIFEST_DIR"), "/corpus/cases/case_exp1_violate.ttl")),
        description: "jurisdiction run: no explanation, untyped timestamp, disparity 0.30",
        violated: &["A2", "B1", "B5"],
    },
];

/// Cases evaluated against the capability profiles.
pub const CAPABILITY_CASES: [&str; 4] = ["conform", "missing_explanation", "missing_model_artifact", "disparity_exceeds"];
/// Cases evaluated against the jurisdiction profiles.
pub const JURISDICTION_CASES: [&str; 3] = ["exp1_conform", "exp1_profile", "exp1_violate"];
pub const CAPABILITY_PROFILES: [&str; 3] = ["Accountability", "Fairness", "Combined"];
pub const JURISDICTION_PROFILES: [&str; 4] = ["EU", "US", "China", "EU+Fairness"];

pub fn case_ids() -> impl Iterator<Item = &'static str> {
    CASES.iter().map(|c| c.id)
}

/// File name of a case, e.g. `case_conform.ttl`.
pub fn case_file_name(id: &str) -> String {
    format!("case_{id}.ttl")
}

#[derive(Debug, Clone)]
pub struct EvidenceCase {
    pub id: String,
    pub graph: Graph,
    pub source: &'static str,
    pub description: String,
    /// Obligation ids this case is built to break.
    pub violated_obligations: Vec<String>,
    /// profile → (conforms, violation count if pinned)
    pub expected: BTreeMap<String, (bool, Option<usize>)>,
}

pub fn build_case(id: &str) -> Result<EvidenceCase, CorpusError> {
    let spec = CASES
        .iter()
        .find(|c| c.id == id)
        .ok_or_else(|| CorpusError::UnknownCase(id.to_string()))?;
    let graph = parse_turtle(spec.source).expect("bundled case parses");
    let expected = expected_outcomes()
        .conformance
        .into_iter()
        .filter(|e| e.case == id)
        .map(|e| (e.profile, (e.conforms, e.count)))
        .collect();
    Ok(EvidenceCase {
        id: spec.id.to_string(),
        graph,
        source: spec.source,
        description: spec.description.to_string(),
        violated_obligations: spec.violated.iter().map(|s| s.to_string()).collect(),
        expected,
    })
}

/// `(case id, graph)` pairs for the given ids.
pub fn corpus(ids: &[&str]) -> Vec<(String, Graph)> {
    ids.iter()
        .map(|id| {
            let c = build_case(id).expect("known case");
            (c.id, c.graph)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expectation {
    pub section: String,
    pub case: String,
    pub profile: String,
    pub conforms: bool,
    pub count: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementExpectation {
    pub p1: String,
    pub p2: String,
    pub holds: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Goldens {
    /// Counted rows first; verdict-only rows follow and never override them.
    pub conformance: Vec<Expectation>,
    pub refinement: Vec<RefinementExpectation>,
}

impl Goldens {
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let mut g = Goldens::default();
        let mut verdict_only = Vec::new();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let bad = |reason: &str| CorpusError::Goldens {
                line: i + 1,
                reason: reason.to_string(),
            };
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name.to_string();
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if section.starts_with("refinement") {
                let [p1, p2, verdict] = fields[..] else {
                    return Err(bad("expected '<p1> <p2> <holds|fails>'"));
                };
                let holds = match verdict {
                    "holds" => true,
                    "fails" => false,
                    _ => return Err(bad("verdict must be holds or fails")),
                };
                g.refinement.push(RefinementExpectation {
                    p1: p1.into(),
                    p2: p2.into(),
                    holds,
                });
                continue;
            }
            if !(section.starts_with("conformance") || section.starts_with("expected")) {
                return Err(bad("line outside a known section"));
            }
            let (case, profile, verdict, count) = match fields[..] {
                [c, p, v] => (c, p, v, None),
                [c, p, v, n] => (c, p, v, Some(n.parse::<usize>().map_err(|_| bad("bad count"))?)),
                _ => return Err(bad("expected '<case> <profile> <pass|fail> [count]'")),
            };
            let conforms = match verdict {
                "pass" => true,
                "fail" => false,
                _ => return Err(bad("verdict must be pass or fail")),
            };
            let e = Expectation {
                section: section.clone(),
                case: case.into(),
                profile: profile.into(),
                conforms,
                count,
            };
            if count.is_some() {
                g.conformance.push(e);
            } else {
                verdict_only.push(e);
            }
        }
        for e in verdict_only {
            if !g.conformance.iter().any(|c| c.case == e.case && c.profile == e.profile) {
                g.conformance.push(e);
            }
        }
        Ok(g)
    }

    /// Verdict-only rows, for cross-checking against the counted rows.
    pub fn verdict_rows(text: &str) -> Vec<Expectation> {
        let mut rows = Vec::new();
        let mut section = "";
        for line in text.lines().map(|l| l.split('#').next().unwrap_or("").trim()) {
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = name;
            } else if let [c, p, v] = line.split_whitespace().collect::<Vec<_>>()[..] {
                if section.starts_with("expected") {
                    rows.push(Expectation {
                        section: section.to_string(),
                        case: c.into(),
                        profile: p.into(),
                        conforms: v == "pass",
                        count: None,
                    });
                }
            }
        }
        rows
    }
}

pub fn expected_outcomes() -> Goldens {
    Goldens::parse(GOLDENS).expect("bundled goldens parse")
}
