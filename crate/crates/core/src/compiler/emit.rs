use crate::rdf::{fresh_blank, Graph, Literal, Term};
use crate::shacl::{Constraint, NodeShape, Severity};
use crate::vocab::{self, sh};

fn p(iri: &str) -> Term {
    Term::iri(iri)
}

fn count(n: u64) -> Term {
    Term::integer(n as i64)
}

/// Shape graph for `shapes`. Constraints on the same path share one property
/// node unless a component repeats, in which case a new node is started.
pub fn emit_shapes(shapes: &[NodeShape]) -> Graph {
    let mut g = Graph::with_standard_prefixes();
    for shape in shapes {
        let s = shape.iri.clone();
        g.add(s.clone(), p(vocab::RDF_TYPE), p(sh::NODE_SHAPE));
        g.add(s.clone(), p(sh::TARGET_CLASS), shape.target_class.clone());
        if let Some(m) = &shape.message {
            g.add(s.clone(), p(sh::MESSAGE), Term::Literal(Literal::string(m.as_str())));
        }
        if shape.severity != Severity::Violation {
            g.add(s.clone(), p(sh::SEVERITY), p(shape.severity.iri()));
        }
        // (path, components used, node)
        let mut open: Vec<(String, Vec<&'static str>, Term)> = Vec::new();
        for c in &shape.constraints {
            if let Constraint::Sparql { query, message } = c {
                let node = fresh_blank();
                g.add(s.clone(), p(sh::SPARQL), node.clone());
                g.add(node.clone(), p(vocab::RDF_TYPE), p(sh::SPARQL_CONSTRAINT));
                g.add(node.clone(), p(sh::SELECT), Term::string(query.source()));
                if let Some(m) = message {
                    g.add(node, p(sh::MESSAGE), Term::string(m.as_str()));
                }
                continue;
            }
            let path = c.path().expect("property constraint has a path");
            let component = c.component();
            let slot = open
                .iter()
                .position(|(p, used, _)| p == path && !used.contains(&component));
            let node = match slot {
                Some(i) => {
                    open[i].1.push(component);
                    open[i].2.clone()
                }
                None => {
                    let node = fresh_blank();
                    g.add(s.clone(), p(sh::PROPERTY), node.clone());
                    g.add(node.clone(), p(sh::PATH), Term::iri(path));
                    open.push((path.to_string(), vec![component], node.clone()));
                    node
                }
            };
            match c {
                Constraint::MinCount { min, .. } => {
                    g.add(node, p(sh::MIN_COUNT), count(*min));
                }
                Constraint::MaxCount { max, .. } => {
                    g.add(node, p(sh::MAX_COUNT), count(*max));
                }
                Constraint::Datatype { datatype, .. } => {
                    g.add(node, p(sh::DATATYPE), Term::iri(datatype.as_str()));
                }
                Constraint::Class { class, .. } => {
                    g.add(node, p(sh::CLASS), Term::iri(class.as_str()));
                }
                Constraint::NodeKindIri { .. } => {
                    g.add(node, p(sh::NODE_KIND), p(sh::IRI));
                }
                Constraint::QualifiedMinCountClass { class, min, .. } => {
                    let value_shape = fresh_blank();
                    g.add(node.clone(), p(sh::QUALIFIED_VALUE_SHAPE), value_shape.clone());
                    g.add(value_shape, p(sh::CLASS), Term::iri(class.as_str()));
                    g.add(node, p(sh::QUALIFIED_MIN_COUNT), count(*min));
                }
                Constraint::Sparql { .. } => unreachable!("handled above"),
            }
        }
    }
    g
}

/// Concept schema C: every class used by the shapes typed `rdfs:Class`,
/// every predicate typed `rdf:Property`.
pub fn concept_schema(shapes: &[NodeShape]) -> Graph {
    let mut g = Graph::with_standard_prefixes();
    let class = |g: &mut Graph, iri: &str| {
        g.add(Term::iri(iri), p(vocab::RDF_TYPE), p(vocab::RDFS_CLASS));
    };
    let property = |g: &mut Graph, iri: &str| {
        g.add(Term::iri(iri), p(vocab::RDF_TYPE), p(vocab::RDF_PROPERTY));
    };
    for shape in shapes {
        if let Some(t) = shape.target_class.as_iri() {
            class(&mut g, t);
        }
        for c in &shape.constraints {
            match c {
                Constraint::Sparql { query, .. } => {
                    for pred in query.predicates() {
                        if pred != vocab::RDF_TYPE {
                            property(&mut g, pred);
                        }
                    }
                    for cls in query.classes() {
                        class(&mut g, cls);
                    }
                }
                Constraint::Class { path, class: cls } | Constraint::QualifiedMinCountClass { path, class: cls, .. } => {
                    property(&mut g, path);
                    class(&mut g, cls);
                }
                other => property(&mut g, other.path().unwrap_or_default()),
            }
        }
    }
    g
}
