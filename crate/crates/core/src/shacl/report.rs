use thiserror::Error;

use super::{Severity, Violation};
use crate::rdf::{fresh_blank, Graph, Literal, Term};
use crate::vocab::{self, sh};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("report graph has {0} sh:ValidationReport nodes, expected 1")]
    ReportNodeCount(usize),
    #[error("report node lacks a boolean sh:conforms")]
    MissingConforms,
    #[error("result {node}: missing or invalid {property}")]
    MalformedResult { node: String, property: String },
}

/// Encodes a validation outcome in the SHACL report vocabulary.
pub fn emit_report_graph(violations: &[Violation], conforms: bool) -> Graph {
    let mut g = Graph::with_standard_prefixes();
    let report = fresh_blank();
    let p = |iri: &str| Term::iri(iri);
    g.add(report.clone(), p(vocab::RDF_TYPE), p(sh::VALIDATION_REPORT));
    g.add(report.clone(), p(sh::CONFORMS), Term::boolean(conforms));
    for v in violations {
        let r = fresh_blank();
        g.add(report.clone(), p(sh::RESULT), r.clone());
        g.add(r.clone(), p(vocab::RDF_TYPE), p(sh::VALIDATION_RESULT));
        g.add(r.clone(), p(sh::FOCUS_NODE), v.focus_node.clone());
        g.add(r.clone(), p(sh::SOURCE_SHAPE), v.source_shape.clone());
        g.add(r.clone(), p(sh::RESULT_SEVERITY), p(v.severity.iri()));
        g.add(r.clone(), p(sh::RESULT_MESSAGE), Term::Literal(Literal::string(v.message.as_str())));
        if let Some(path) = &v.path {
            g.add(r.clone(), p(sh::RESULT_PATH), p(path));
        }
        if let Some(value) = &v.value {
            g.add(r.clone(), p(sh::VALUE), value.clone());
        }
    }
    g
}

/// Inverse of [`emit_report_graph`]: recovers `(conforms, violations)` in canonical order.
pub fn parse_report_graph(g: &Graph) -> Result<(bool, Vec<Violation>), ReportError> {
    let reports = g.instances_of(&Term::iri(sh::VALIDATION_REPORT));
    let [report] = reports.iter().collect::<Vec<_>>()[..] else {
        return Err(ReportError::ReportNodeCount(reports.len()));
    };
    let conforms = match g.object(report, &Term::iri(sh::CONFORMS)).and_then(Term::as_literal) {
        Some(l) if l.datatype() == vocab::XSD_BOOLEAN => l.lexical() == "true",
        _ => return Err(ReportError::MissingConforms),
    };
    let mut violations = Vec::new();
    for node in g.objects(report, &Term::iri(sh::RESULT)) {
        let bad = |property: &str| ReportError::MalformedResult {
            node: node.to_string(),
            property: property.to_string(),
        };
        let get = |iri: &str| g.object(node, &Term::iri(iri)).cloned();
        let severity = get(sh::RESULT_SEVERITY)
            .and_then(|t| t.as_iri().and_then(Severity::from_iri))
            .ok_or_else(|| bad("sh:resultSeverity"))?;
        let message = get(sh::RESULT_MESSAGE)
            .and_then(|t| t.as_literal().map(|l| l.lexical().to_string()))
            .ok_or_else(|| bad("sh:resultMessage"))?;
        violations.push(Violation {
            source_shape: get(sh::SOURCE_SHAPE).ok_or_else(|| bad("sh:sourceShape"))?,
            focus_node: get(sh::FOCUS_NODE).ok_or_else(|| bad("sh:focusNode"))?,
            path: get(sh::RESULT_PATH).and_then(|t| t.as_iri().map(str::to_string)),
            value: get(sh::VALUE),
            message,
            severity,
        });
    }
    violations.sort();
    Ok((conforms, violations))
}
