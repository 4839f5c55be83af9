//! Validation of evidence graphs against the SHACL subset emitted by the
//! compiler: node shapes with a single `sh:targetClass`, single-predicate
//! property constraints, and SPARQL-based constraints.
//!
//! Only explicit `rdf:type` triples select focus nodes; no RDFS inference
//! is performed.

mod load;
mod report;
mod validate;

use std::fmt;
use std::time::Duration;

use thiserror::Error;

use crate::rdf::{Graph, Term};
use crate::sparql::{SparqlError, SparqlQuery};
use crate::vocab::sh;

pub use load::load_shapes;
pub use report::{emit_report_graph, parse_report_graph, ReportError};
pub use validate::{focus_nodes, validate};

/// Result severity, ordered `Info < Warning < Violation`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Severity {
    Info,
    Warning,
    #[default]
    Violation,
}

impl Severity {
    pub fn iri(self) -> &'static str {
        match self {
            Severity::Info => sh::INFO,
            Severity::Warning => sh::WARNING,
            Severity::Violation => sh::VIOLATION,
        }
    }

    pub fn from_iri(iri: &str) -> Option<Self> {
        match iri {
            sh::INFO => Some(Severity::Info),
            sh::WARNING => Some(Severity::Warning),
            sh::VIOLATION => Some(Severity::Violation),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Severity::Info => "Info",
            Severity::Warning => "Warning",
            Severity::Violation => "Violation",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "Info" => Some(Severity::Info),
            "Warning" => Some(Severity::Warning),
            "Violation" => Some(Severity::Violation),
            _ => None,
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    MinCount { path: String, min: u64 },
    MaxCount { path: String, max: u64 },
    Datatype { path: String, datatype: String },
    Class { path: String, class: String },
    NodeKindIri { path: String },
    /// At least `min` values of `path` carry `rdf:type class`.
    QualifiedMinCountClass { path: String, class: String, min: u64 },
    Sparql { query: SparqlQuery, message: Option<String> },
}

impl Constraint {
    pub fn path(&self) -> Option<&str> {
        match self {
            Constraint::MinCount { path, .. }
            | Constraint::MaxCount { path, .. }
            | Constraint::Datatype { path, .. }
            | Constraint::Class { path, .. }
            | Constraint::NodeKindIri { path }
            | Constraint::QualifiedMinCountClass { path, .. } => Some(path),
            Constraint::Sparql { .. } => None,
        }
    }

    /// SHACL constraint component name, e.g. `sh:MinCountConstraintComponent`.
    pub fn component(&self) -> &'static str {
        match self {
            Constraint::MinCount { .. } => "MinCount",
            Constraint::MaxCount { .. } => "MaxCount",
            Constraint::Datatype { .. } => "Datatype",
            Constraint::Class { .. } => "Class",
            Constraint::NodeKindIri { .. } => "NodeKind",
            Constraint::QualifiedMinCountClass { .. } => "QualifiedMinCount",
            Constraint::Sparql { .. } => "SPARQL",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeShape {
    pub iri: Term,
    pub target_class: Term,
    pub message: Option<String>,
    pub severity: Severity,
    pub constraints: Vec<Constraint>,
}

impl NodeShape {
    /// True when both shapes impose the same checks; severity is ignored.
    pub fn same_body(&self, other: &NodeShape) -> bool {
        self.iri == other.iri
            && self.target_class == other.target_class
            && self.message == other.message
            && self.constraints == other.constraints
    }
}

/// One constraint failure. Field order is the canonical report order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Violation {
    pub source_shape: Term,
    pub focus_node: Term,
    pub path: Option<String>,
    pub value: Option<Term>,
    pub message: String,
    pub severity: Severity,
}

/// Identity of a violation for set comparisons across profiles.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ViolationKey {
    pub source_shape: Term,
    pub focus_node: Term,
    pub message: String,
}

impl Violation {
    pub fn key(&self) -> ViolationKey {
        ViolationKey {
            source_shape: self.source_shape.clone(),
            focus_node: self.focus_node.clone(),
            message: self.message.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub conforms: bool,
    /// Deduplicated, sorted by source shape then focus node.
    pub violations: Vec<Violation>,
    pub report_graph: Graph,
    /// SPARQL evaluation errors that eliminated candidate solutions.
    pub diagnostics: Vec<String>,
    pub elapsed: Duration,
}

impl ValidationReport {
    pub fn violation_count(&self) -> usize {
        self.violations.len()
    }

    pub fn elapsed_ms(&self) -> f64 {
        self.elapsed.as_secs_f64() * 1000.0
    }

    pub fn to_turtle(&self) -> String {
        self.report_graph.to_turtle()
    }

    /// One line per violation: shape, focus node, message.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for v in &self.violations {
            out.push_str(&format!(
                "{}\t{}\t{}\t{}\n",
                v.severity,
                compact(&v.source_shape),
                compact(&v.focus_node),
                v.message
            ));
        }
        out
    }
}

/// Short display form of a term using the standard prefixes.
pub fn compact(term: &Term) -> String {
    if let Some(iri) = term.as_iri() {
        for (prefix, ns) in crate::vocab::standard_prefixes() {
            if let Some(local) = iri.strip_prefix(ns) {
                if !local.is_empty() && local.chars().all(|c| c.is_alphanumeric() || c == '_' || c == '-') {
                    return format!("{prefix}:{local}");
                }
            }
        }
    }
    term.to_string()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShapeError {
    #[error("shape {shape}: unsupported constraint component {component}")]
    UnsupportedConstraint { shape: String, component: String },
    #[error("shape {shape}: malformed shape: {reason}")]
    MalformedShape { shape: String, reason: String },
    #[error("shape {shape}: {source}")]
    Sparql { shape: String, source: SparqlError },
}
