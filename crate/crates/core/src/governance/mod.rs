//! Profiles, the ⊕ composition of Knowledge Blocks, profile validation and
//! the corpus-relative refinement analysis.

mod refine;
mod registry;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::compiler::{concept_schema, emit_shapes, merge_severity, CompileError, KnowledgeBlock};
use crate::rdf::{Graph, Term};
use crate::shacl::{compact, validate, NodeShape, ValidationReport};

pub use refine::{check_equivalence, check_refinement, refinement_matrix, EquivalenceVerdict, RefinementMatrix, RefinementVerdict};
pub use registry::{parse_profile, Profile, Registry};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GovernanceError {
    #[error("unknown profile '{0}'")]
    UnknownProfile(String),
    #[error("profile '{profile}' references unknown block '{block}'")]
    UnknownBlock { profile: String, block: String },
    #[error("blocks define {shape} with different constraints")]
    ConflictingShapeBodies { shape: String },
    #[error("{file}: {reason}")]
    Manifest { file: String, reason: String },
    #[error("{file}: {source}")]
    Block { file: String, source: CompileError },
    #[error("{path}: {reason}")]
    Io { path: String, reason: String },
}

/// The component-wise union of Knowledge Blocks.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComposedKb {
    pub obligations: BTreeSet<String>,
    pub concepts: Graph,
    /// Keyed by shape IRI; severities merged across blocks.
    pub shapes: BTreeMap<Term, NodeShape>,
    pub evidence_requirements: BTreeSet<(String, String)>,
    pub provenance_links: BTreeSet<String>,
}

impl ComposedKb {
    /// The identity of ⊕.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_block(block: &KnowledgeBlock) -> Result<Self, GovernanceError> {
        Self::empty().with_shapes(block.shapes.iter().cloned()).map(|mut kb| {
            kb.obligations = block.obligations.clone();
            kb.concepts = block.concepts.clone();
            kb.evidence_requirements = block.evidence_requirements.clone();
            kb.provenance_links = block.provenance_links.clone();
            kb
        })
    }

    fn with_shapes(mut self, shapes: impl IntoIterator<Item = NodeShape>) -> Result<Self, GovernanceError> {
        for shape in shapes {
            match self.shapes.get_mut(&shape.iri) {
                None => {
                    self.shapes.insert(shape.iri.clone(), shape);
                }
                Some(existing) if existing.same_body(&shape) => {
                    existing.severity = merge_severity(existing.severity, shape.severity);
                }
                Some(_) => {
                    return Err(GovernanceError::ConflictingShapeBodies {
                        shape: compact(&shape.iri),
                    })
                }
            }
        }
        Ok(self)
    }

    /// KB_a ⊕ KB_b.
    pub fn combine(&self, other: &ComposedKb) -> Result<ComposedKb, GovernanceError> {
        let mut kb = self.clone().with_shapes(other.shapes.values().cloned())?;
        kb.obligations.extend(other.obligations.iter().cloned());
        kb.concepts.extend(&other.concepts);
        kb.evidence_requirements
            .extend(other.evidence_requirements.iter().cloned());
        kb.provenance_links.extend(other.provenance_links.iter().cloned());
        Ok(kb)
    }

    pub fn shape_list(&self) -> Vec<NodeShape> {
        self.shapes.values().cloned().collect()
    }

    pub fn shape_count(&self) -> usize {
        self.shapes.len()
    }

    pub fn shape_graph(&self) -> Graph {
        emit_shapes(&self.shape_list())
    }

    /// Canonical text of the whole tuple; equal KBs give equal bytes.
    pub fn canonical_text(&self) -> String {
        let mut out = String::new();
        let join = |items: Vec<String>| items.join(" ");
        out.push_str(&format!("# O: {}\n", join(self.obligations.iter().cloned().collect())));
        out.push_str(&format!(
            "# E: {}\n",
            join(
                self.evidence_requirements
                    .iter()
                    .map(|(c, p)| format!("({},{})", compact(&Term::iri(c.as_str())), compact(&Term::iri(p.as_str()))))
                    .collect()
            )
        ));
        out.push_str(&format!(
            "# P: {}\n",
            join(self.provenance_links.iter().map(|p| compact(&Term::iri(p.as_str()))).collect())
        ));
        let mut concepts = self.concepts.clone();
        // Concept declarations are a function of V when every block came from the compiler.
        concepts.extend(&concept_schema(&self.shape_list()));
        out.push_str(&self.shape_graph().union(&concepts).to_turtle());
        out
    }
}

/// Folds ⊕ over `blocks`.
pub fn compose<'a>(blocks: impl IntoIterator<Item = &'a KnowledgeBlock>) -> Result<ComposedKb, GovernanceError> {
    blocks
        .into_iter()
        .try_fold(ComposedKb::empty(), |acc, b| acc.combine(&ComposedKb::from_block(b)?))
}

/// A validation report tagged with the profile and case it came from.
#[derive(Debug, Clone)]
pub struct ProfileReport {
    pub profile: String,
    pub case: Option<String>,
    pub report: ValidationReport,
}

/// validate(G_S, KB_a ⊕ … ⊕ KB_n).
pub fn validate_profile(evidence: &Graph, kb: &ComposedKb) -> ValidationReport {
    validate(evidence, &kb.shape_list())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_text;
    use crate::shacl::Severity;

    const X: &str = "- obligation_id: X1\n  target_class: ex:D\n  constraint_type: structural\n  relation: ex:p\n  message: m\n";

    #[test]
    fn empty_is_identity() {
        let a = ComposedKb::from_block(&compile_text(X, "x").unwrap()).unwrap();
        assert_eq!(a.combine(&ComposedKb::empty()).unwrap(), a);
        assert_eq!(ComposedKb::empty().combine(&a).unwrap().canonical_text(), a.canonical_text());
    }

    #[test]
    fn severities_merge_to_the_stricter() {
        let warn = compile_text(&format!("{X}  severity: Warning\n"), "w").unwrap();
        let viol = compile_text(X, "v").unwrap();
        let kb = compose([&warn, &viol]).unwrap();
        assert_eq!(kb.shape_count(), 1);
        assert_eq!(kb.shape_list()[0].severity, Severity::Violation);
        assert_eq!(compose([&viol, &warn]).unwrap(), kb);
    }

    #[test]
    fn conflicting_bodies_are_rejected() {
        let a = compile_text(X, "a").unwrap();
        let b = compile_text(&X.replace("ex:p", "ex:q"), "b").unwrap();
        assert_eq!(
            compose([&a, &b]).unwrap_err(),
            GovernanceError::ConflictingShapeBodies { shape: "ex:X1Shape".into() }
        );
    }
}
