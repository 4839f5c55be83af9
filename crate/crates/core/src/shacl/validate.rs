use std::collections::BTreeSet;
use std::time::Instant;

use super::{compact, emit_report_graph, Constraint, NodeShape, Severity, ValidationReport, Violation};
use crate::rdf::{Graph, Term};
use crate::sparql::evaluate;
use crate::vocab;

/// Subjects explicitly typed with the shape's target class.
pub fn focus_nodes(graph: &Graph, shape: &NodeShape) -> BTreeSet<Term> {
    graph.instances_of(&shape.target_class)
}

pub fn validate(evidence: &Graph, shapes: &[NodeShape]) -> ValidationReport {
    let start = Instant::now();
    let mut violations = BTreeSet::new();
    let mut diagnostics = Vec::new();
    for shape in shapes {
        for focus in focus_nodes(evidence, shape) {
            for constraint in &shape.constraints {
                check(evidence, shape, &focus, constraint, &mut violations, &mut diagnostics);
            }
        }
    }
    let violations: Vec<Violation> = violations.into_iter().collect();
    let conforms = violations.iter().all(|v| v.severity != Severity::Violation);
    let report_graph = emit_report_graph(&violations, conforms);
    ValidationReport {
        conforms,
        violations,
        report_graph,
        diagnostics,
        elapsed: start.elapsed(),
    }
}

fn default_message(constraint: &Constraint) -> String {
    match constraint {
        Constraint::MinCount { path, min } => {
            format!("Less than {min} values on {}", compact(&Term::iri(path.as_str())))
        }
        Constraint::MaxCount { path, max } => {
            format!("More than {max} values on {}", compact(&Term::iri(path.as_str())))
        }
        Constraint::Datatype { datatype, .. } => {
            format!("Value does not have datatype {}", compact(&Term::iri(datatype.as_str())))
        }
        Constraint::Class { class, .. } => {
            format!("Value does not have class {}", compact(&Term::iri(class.as_str())))
        }
        Constraint::NodeKindIri { .. } => "Value is not an IRI".to_string(),
        Constraint::QualifiedMinCountClass { class, min, .. } => format!(
            "Less than {min} values of class {}",
            compact(&Term::iri(class.as_str()))
        ),
        Constraint::Sparql { .. } => "SPARQL constraint returned a solution".to_string(),
    }
}

fn check(
    g: &Graph,
    shape: &NodeShape,
    focus: &Term,
    constraint: &Constraint,
    out: &mut BTreeSet<Violation>,
    diagnostics: &mut Vec<String>,
) {
    let message = match constraint {
        Constraint::Sparql { message: Some(m), .. } => m.clone(),
        _ => shape.message.clone().unwrap_or_else(|| default_message(constraint)),
    };
    let violation = |path: Option<String>, value: Option<Term>| Violation {
        source_shape: shape.iri.clone(),
        focus_node: focus.clone(),
        path,
        value,
        message: message.clone(),
        severity: shape.severity,
    };
    let rdf_type = Term::iri(vocab::RDF_TYPE);
    let values = |path: &str| g.objects(focus, &Term::iri(path)).into_iter().cloned().collect::<Vec<_>>();

    match constraint {
        Constraint::MinCount { path, min } => {
            if (values(path).len() as u64) < *min {
                out.insert(violation(Some(path.clone()), None));
            }
        }
        Constraint::MaxCount { path, max } => {
            if (values(path).len() as u64) > *max {
                out.insert(violation(Some(path.clone()), None));
            }
        }
        Constraint::Datatype { path, datatype } => {
            for v in values(path) {
                let ok = matches!(v.as_literal(), Some(l) if l.datatype() == datatype);
                if !ok {
                    out.insert(violation(Some(path.clone()), Some(v)));
                }
            }
        }
        Constraint::Class { path, class } => {
            let class = Term::iri(class.as_str());
            for v in values(path) {
                if !g.has_type(&v, &class) {
                    out.insert(violation(Some(path.clone()), Some(v)));
                }
            }
        }
        Constraint::NodeKindIri { path } => {
            for v in values(path) {
                if !v.is_iri() {
                    out.insert(violation(Some(path.clone()), Some(v)));
                }
            }
        }
        Constraint::QualifiedMinCountClass { path, class, min } => {
            let class = Term::iri(class.as_str());
            let conforming = values(path)
                .iter()
                .filter(|v| g.contains(&crate::rdf::Triple::new((*v).clone(), rdf_type.clone(), class.clone())))
                .count() as u64;
            if conforming < *min {
                out.insert(violation(Some(path.clone()), None));
            }
        }
        Constraint::Sparql { query, .. } => {
            let eval = evaluate(query, g, focus);
            for d in eval.diagnostics {
                diagnostics.push(format!(
                    "{} at {}: clause {}: {}",
                    compact(&shape.iri),
                    compact(focus),
                    d.clause + 1,
                    d.error
                ));
            }
            for solution in eval.solutions {
                let path = solution.get("path").and_then(|p| p.as_iri()).map(str::to_string);
                let value = solution.get("value").cloned();
                out.insert(violation(path, value));
            }
        }
    }
}
