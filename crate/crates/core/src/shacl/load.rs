use std::collections::BTreeMap;

use super::{compact, Constraint, NodeShape, Severity, ShapeError};
use crate::rdf::{Graph, Term};
use crate::sparql::parse_sparql_with_prefixes;
use crate::vocab::{self, sh};

/// Reads every `sh:NodeShape` in `shapes`, ordered by shape IRI.
pub fn load_shapes(shapes: &Graph) -> Result<Vec<NodeShape>, ShapeError> {
    let mut prefixes: BTreeMap<String, String> = vocab::standard_prefixes()
        .into_iter()
        .map(|(p, ns)| (p.to_string(), ns.to_string()))
        .collect();
    prefixes.extend(shapes.prefixes().clone());
    let loader = Loader { graph: shapes, prefixes };
    shapes
        .instances_of(&Term::iri(sh::NODE_SHAPE))
        .into_iter()
        .map(|node| loader.node_shape(&node))
        .collect()
}

struct Loader<'g> {
    graph: &'g Graph,
    prefixes: BTreeMap<String, String>,
}

fn pred(iri: &str) -> Term {
    Term::iri(iri)
}

impl Loader<'_> {
    fn malformed(&self, shape: &Term, reason: impl Into<String>) -> ShapeError {
        ShapeError::MalformedShape {
            shape: compact(shape),
            reason: reason.into(),
        }
    }

    fn unsupported(&self, shape: &Term, component: impl Into<String>) -> ShapeError {
        ShapeError::UnsupportedConstraint {
            shape: compact(shape),
            component: component.into(),
        }
    }

    /// Rejects `sh:` predicates on `node` outside `allowed`; other namespaces are annotations.
    fn check_vocabulary(&self, shape: &Term, node: &Term, allowed: &[&str]) -> Result<(), ShapeError> {
        for t in self.graph.triples_matching(Some(node), None, None) {
            let p = t.predicate().as_iri().unwrap_or_default();
            if p.starts_with(vocab::SH) && !allowed.contains(&p) {
                return Err(self.unsupported(shape, compact(t.predicate())));
            }
        }
        Ok(())
    }

    fn single(&self, shape: &Term, node: &Term, predicate: &str) -> Result<Option<Term>, ShapeError> {
        let p = pred(predicate);
        let values: Vec<Term> = self
            .graph
            .triples_matching(Some(node), Some(&p), None)
            .map(|t| t.object().clone())
            .collect();
        match values.as_slice() {
            [] => Ok(None),
            [v] => Ok(Some(v.clone())),
            _ => Err(self.malformed(shape, format!("more than one {}", compact(&p)))),
        }
    }

    fn count(&self, shape: &Term, node: &Term, predicate: &str) -> Result<Option<u64>, ShapeError> {
        let Some(v) = self.single(shape, node, predicate)? else {
            return Ok(None);
        };
        v.as_literal()
            .filter(|l| crate::rdf::is_numeric_datatype(l.datatype()))
            .and_then(|l| l.lexical().trim_start_matches('+').parse::<u64>().ok())
            .map(Some)
            .ok_or_else(|| {
                self.malformed(
                    shape,
                    format!("{} must be a non-negative integer, got {v}", compact(&pred(predicate))),
                )
            })
    }

    fn iri_value(&self, shape: &Term, node: &Term, predicate: &str) -> Result<Option<String>, ShapeError> {
        match self.single(shape, node, predicate)? {
            None => Ok(None),
            Some(Term::Iri(iri)) => Ok(Some(iri)),
            Some(other) => Err(self.malformed(
                shape,
                format!("{} must be an IRI, got {other}", compact(&pred(predicate))),
            )),
        }
    }

    fn message(&self, shape: &Term, node: &Term) -> Result<Option<String>, ShapeError> {
        let p = pred(sh::MESSAGE);
        let mut messages: Vec<&str> = self
            .graph
            .triples_matching(Some(node), Some(&p), None)
            .filter_map(|t| t.object().as_literal().map(|l| l.lexical()))
            .collect();
        messages.sort();
        match messages.first() {
            Some(m) if m.is_empty() => Err(self.malformed(shape, "empty sh:message")),
            Some(m) => Ok(Some(m.to_string())),
            None => Ok(None),
        }
    }

    fn node_shape(&self, node: &Term) -> Result<NodeShape, ShapeError> {
        if !node.is_iri() {
            return Err(self.malformed(node, "node shapes must be named by an IRI"));
        }
        self.check_vocabulary(
            node,
            node,
            &[sh::TARGET_CLASS, sh::MESSAGE, sh::SEVERITY, sh::PROPERTY, sh::SPARQL],
        )?;
        let target_class = match self.iri_value(node, node, sh::TARGET_CLASS)? {
            Some(c) => Term::Iri(c),
            None => return Err(self.malformed(node, "missing sh:targetClass")),
        };
        let severity = match self.iri_value(node, node, sh::SEVERITY)? {
            None => Severity::Violation,
            Some(iri) => Severity::from_iri(&iri)
                .ok_or_else(|| self.malformed(node, format!("unknown severity <{iri}>")))?,
        };
        let message = self.message(node, node)?;

        let mut constraints = Vec::new();
        let property_pred = pred(sh::PROPERTY);
        let mut properties: Vec<&Term> = self.graph.objects(node, &property_pred).into_iter().collect();
        properties.sort_by_key(|p| self.property_sort_key(p));
        for property in properties {
            self.property_shape(node, property, &mut constraints)?;
        }
        let sparql_pred = pred(sh::SPARQL);
        let mut sparqls: Vec<&Term> = self.graph.objects(node, &sparql_pred).into_iter().collect();
        sparqls.sort_by_key(|s| self.graph.object(s, &pred(sh::SELECT)).cloned());
        for sparql in sparqls {
            constraints.push(self.sparql_constraint(node, sparql)?);
        }
        if constraints.is_empty() {
            return Err(self.malformed(node, "shape declares no constraints"));
        }
        Ok(NodeShape {
            iri: node.clone(),
            target_class,
            message,
            severity,
            constraints,
        })
    }

    /// Blank-node labels are arbitrary, so property shapes are ordered by content.
    fn property_sort_key(&self, property: &Term) -> Vec<(Term, Term)> {
        let mut key: Vec<(Term, Term)> = self
            .graph
            .triples_matching(Some(property), None, None)
            .filter(|t| !t.object().is_blank())
            .map(|t| (t.predicate().clone(), t.object().clone()))
            .collect();
        key.sort();
        key
    }

    fn property_shape(&self, shape: &Term, property: &Term, out: &mut Vec<Constraint>) -> Result<(), ShapeError> {
        self.check_vocabulary(
            shape,
            property,
            &[
                sh::PATH,
                sh::MIN_COUNT,
                sh::MAX_COUNT,
                sh::DATATYPE,
                sh::CLASS,
                sh::NODE_KIND,
                sh::QUALIFIED_VALUE_SHAPE,
                sh::QUALIFIED_MIN_COUNT,
            ],
        )?;
        let path = match self.single(shape, property, sh::PATH)? {
            Some(Term::Iri(p)) => p,
            Some(_) => return Err(self.unsupported(shape, "sh:path (only single predicate paths)")),
            None => return Err(self.malformed(shape, "property shape without sh:path")),
        };
        let before = out.len();
        if let Some(min) = self.count(shape, property, sh::MIN_COUNT)? {
            out.push(Constraint::MinCount { path: path.clone(), min });
        }
        if let Some(max) = self.count(shape, property, sh::MAX_COUNT)? {
            out.push(Constraint::MaxCount { path: path.clone(), max });
        }
        if let Some(datatype) = self.iri_value(shape, property, sh::DATATYPE)? {
            out.push(Constraint::Datatype { path: path.clone(), datatype });
        }
        if let Some(class) = self.iri_value(shape, property, sh::CLASS)? {
            out.push(Constraint::Class { path: path.clone(), class });
        }
        if let Some(kind) = self.iri_value(shape, property, sh::NODE_KIND)? {
            if kind != sh::IRI {
                return Err(self.unsupported(shape, format!("sh:nodeKind {}", compact(&Term::Iri(kind)))));
            }
            out.push(Constraint::NodeKindIri { path: path.clone() });
        }
        let qualified = self.single(shape, property, sh::QUALIFIED_VALUE_SHAPE)?;
        let qualified_min = self.count(shape, property, sh::QUALIFIED_MIN_COUNT)?;
        match (qualified, qualified_min) {
            (Some(value_shape), Some(min)) => {
                self.check_vocabulary(shape, &value_shape, &[sh::CLASS])?;
                let class = self
                    .iri_value(shape, &value_shape, sh::CLASS)?
                    .ok_or_else(|| self.unsupported(shape, "sh:qualifiedValueShape without sh:class"))?;
                out.push(Constraint::QualifiedMinCountClass { path, class, min });
            }
            (None, None) => {}
            _ => {
                return Err(self.malformed(
                    shape,
                    "sh:qualifiedValueShape and sh:qualifiedMinCount must appear together",
                ))
            }
        }
        if out.len() == before {
            return Err(self.malformed(shape, "property shape declares no constraints"));
        }
        Ok(())
    }

    fn sparql_constraint(&self, shape: &Term, node: &Term) -> Result<Constraint, ShapeError> {
        self.check_vocabulary(shape, node, &[sh::SELECT, sh::MESSAGE])?;
        let select = match self.single(shape, node, sh::SELECT)? {
            Some(Term::Literal(lit)) => lit.lexical().to_string(),
            Some(other) => return Err(self.malformed(shape, format!("sh:select must be a literal, got {other}"))),
            None => return Err(self.malformed(shape, "SPARQL constraint without sh:select")),
        };
        let query = parse_sparql_with_prefixes(&select, &self.prefixes).map_err(|source| ShapeError::Sparql {
            shape: compact(shape),
            source,
        })?;
        Ok(Constraint::Sparql {
            query,
            message: self.message(shape, node)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    const PREFIXES: &str = "@prefix ex: <http://example.org/okb#> .\n@prefix sh: <http://www.w3.org/ns/shacl#> .\n@prefix xsd: <http://www.w3.org/2001/XMLSchema#> .\n";

    fn load(body: &str) -> Result<Vec<NodeShape>, ShapeError> {
        load_shapes(&parse_turtle(&format!("{PREFIXES}{body}")).unwrap())
    }

    #[test]
    fn empty_graph_has_no_shapes() {
        assert!(load_shapes(&Graph::new()).unwrap().is_empty());
    }

    #[test]
    fn min_count_property() {
        let shapes = load(
            "ex:S a sh:NodeShape ; sh:targetClass ex:Decision ; sh:message \"m\" ;\n\
             sh:property [ sh:path ex:hasUsageLog ; sh:minCount 1 ] .",
        )
        .unwrap();
        assert_eq!(shapes.len(), 1);
        assert_eq!(
            shapes[0].constraints,
            vec![Constraint::MinCount {
                path: format!("{}hasUsageLog", vocab::EX),
                min: 1
            }]
        );
        assert_eq!(shapes[0].severity, Severity::Violation);
    }

    #[test]
    fn missing_target_class_is_malformed() {
        let err = load("ex:S a sh:NodeShape ; sh:property [ sh:path ex:p ; sh:minCount 1 ] .").unwrap_err();
        assert!(matches!(err, ShapeError::MalformedShape { .. }), "{err}");
        assert!(err.to_string().contains("sh:targetClass"));
    }

    #[test]
    fn unsupported_components_are_named() {
        let err = load(
            "ex:S a sh:NodeShape ; sh:targetClass ex:D ; sh:closed true ;\n\
             sh:property [ sh:path ex:p ; sh:minCount 1 ] .",
        )
        .unwrap_err();
        assert_eq!(
            err,
            ShapeError::UnsupportedConstraint {
                shape: "ex:S".into(),
                component: "sh:closed".into()
            }
        );
        let err = load(
            "ex:S a sh:NodeShape ; sh:targetClass ex:D ;\n\
             sh:property [ sh:path ex:p ; sh:pattern \"^a\" ] .",
        )
        .unwrap_err();
        assert!(err.to_string().contains("sh:pattern"));
    }

    #[test]
    fn qualified_and_datatype_constraints() {
        let shapes = load(
            "ex:S a sh:NodeShape ; sh:targetClass ex:Activity ; sh:severity sh:Warning ;\n\
             sh:property [ sh:path ex:used ; sh:minCount 1 ; sh:datatype xsd:dateTime ;\n\
               sh:qualifiedValueShape [ sh:class ex:Model ] ; sh:qualifiedMinCount 1 ] .",
        )
        .unwrap();
        let s = &shapes[0];
        assert_eq!(s.severity, Severity::Warning);
        assert_eq!(s.constraints.len(), 3);
        assert!(matches!(
            &s.constraints[2],
            Constraint::QualifiedMinCountClass { min: 1, .. }
        ));
    }

    #[test]
    fn sparql_constraint_parses_query() {
        let shapes = load(
            "ex:S a sh:NodeShape ; sh:targetClass ex:D ; sh:message \"m\" ;\n\
             sh:sparql [ a sh:SPARQLConstraint ; sh:select \"SELECT $this WHERE { $this ex:p ?v . FILTER(?v > 1) }\" ] .",
        )
        .unwrap();
        assert!(matches!(shapes[0].constraints[0], Constraint::Sparql { .. }));

        let err = load(
            "ex:S a sh:NodeShape ; sh:targetClass ex:D ;\n\
             sh:sparql [ sh:select \"SELECT $this WHERE { $this ex:p ?v OPTIONAL { } }\" ] .",
        )
        .unwrap_err();
        assert!(err.to_string().contains("OPTIONAL"), "{err}");
    }
}
