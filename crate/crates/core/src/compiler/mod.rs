//! The deterministic compiler from Regulatory IR records to Knowledge Blocks.
//!
//! Each record becomes exactly one `sh:NodeShape` named `ex:{id}Shape`.
//! Structural records become a property shape on `relation`; sparql records
//! become a `sh:SPARQLConstraint`.

mod emit;
mod yaml;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::rdf::{Graph, Term};
use crate::shacl::{load_shapes, Constraint, NodeShape, Severity, ShapeError};
use crate::sparql::{parse_sparql, SparqlError};
use crate::vocab;

pub use emit::{concept_schema, emit_shapes};
pub use yaml::{parse_sequence, Mapping, YamlError};

/// Placeholder in `sparql_text` replaced by the `threshold_ref` name.
pub const THRESHOLD_PLACEHOLDER: &str = "{{threshold}}";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintType {
    Structural,
    Sparql,
}

impl fmt::Display for ConstraintType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstraintType::Structural => "structural",
            ConstraintType::Sparql => "sparql",
        })
    }
}

/// One obligation record. Names are kept as written (prefixed or `<iri>`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IrRecord {
    pub obligation_id: String,
    pub target_class: String,
    pub constraint_type: ConstraintType,
    pub relation: Option<String>,
    pub datatype: Option<String>,
    pub value_class: Option<String>,
    pub min_count: u64,
    pub sparql_text: Option<String>,
    pub threshold_ref: Option<String>,
    pub severity: Severity,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Yaml(#[from] YamlError),
    #[error("schema error in record {index}: field '{field}': {reason}")]
    Schema {
        index: usize,
        field: String,
        reason: String,
    },
    #[error("duplicate obligation id '{0}'")]
    DuplicateId(String),
    #[error("record {id}: unknown prefix in '{name}'")]
    UnknownPrefix { id: String, name: String },
    #[error("record {id}: {source}")]
    SparqlSyntax { id: String, source: SparqlError },
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

const FIELDS: &[&str] = &[
    "obligation_id",
    "target_class",
    "constraint_type",
    "relation",
    "datatype",
    "value_class",
    "min_count",
    "sparql_text",
    "threshold_ref",
    "severity",
    "message",
];

/// Parses an IR file; records keep file order.
pub fn parse_ir(text: &str) -> Result<Vec<IrRecord>, CompileError> {
    let mappings = parse_sequence(text)?;
    let mut seen = BTreeSet::new();
    let mut records = Vec::with_capacity(mappings.len());
    for (index, m) in mappings.iter().enumerate() {
        let record = record_from(index, &m.entries)?;
        if !seen.insert(record.obligation_id.clone()) {
            return Err(CompileError::DuplicateId(record.obligation_id));
        }
        records.push(record);
    }
    Ok(records)
}

fn record_from(index: usize, m: &BTreeMap<String, String>) -> Result<IrRecord, CompileError> {
    let schema = |field: &str, reason: &str| CompileError::Schema {
        index,
        field: field.to_string(),
        reason: reason.to_string(),
    };
    if let Some(unknown) = m.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(schema(unknown, "unknown field"));
    }
    let opt = |field: &str| m.get(field).map(|v| v.trim().to_string()).filter(|v| !v.is_empty());
    let req = |field: &str| opt(field).ok_or_else(|| schema(field, "missing"));

    let obligation_id = req("obligation_id")?;
    if !obligation_id.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
        return Err(schema("obligation_id", "must be alphanumeric"));
    }
    let constraint_type = match req("constraint_type")?.as_str() {
        "structural" => ConstraintType::Structural,
        "sparql" => ConstraintType::Sparql,
        _ => return Err(schema("constraint_type", "must be 'structural' or 'sparql'")),
    };
    let min_count = match opt("min_count") {
        None => 1,
        Some(v) => v.parse::<u64>().map_err(|_| schema("min_count", "must be a non-negative integer"))?,
    };
    let severity = match opt("severity") {
        None => Severity::Violation,
        Some(v) => Severity::from_name(&v).ok_or_else(|| schema("severity", "must be Violation, Warning or Info"))?,
    };
    let record = IrRecord {
        obligation_id,
        target_class: req("target_class")?,
        constraint_type,
        relation: opt("relation"),
        datatype: opt("datatype"),
        value_class: opt("value_class"),
        min_count,
        sparql_text: m.get("sparql_text").cloned().filter(|t| !t.trim().is_empty()),
        threshold_ref: opt("threshold_ref"),
        severity,
        message: req("message")?,
    };
    match constraint_type {
        ConstraintType::Structural => {
            if record.relation.is_none() {
                return Err(schema("relation", "required for structural records"));
            }
            if record.sparql_text.is_some() {
                return Err(schema("sparql_text", "not allowed on structural records"));
            }
        }
        ConstraintType::Sparql => {
            if record.sparql_text.is_none() {
                return Err(schema("sparql_text", "required for sparql records"));
            }
            for field in ["relation", "datatype", "value_class", "min_count"] {
                if m.contains_key(field) {
                    return Err(schema(field, "not allowed on sparql records"));
                }
            }
        }
    }
    Ok(record)
}

/// The ⟨O, C, V, E, P⟩ tuple produced by the compiler.
#[derive(Debug, Clone, PartialEq)]
pub struct KnowledgeBlock {
    pub name: String,
    pub obligations: BTreeSet<String>,
    pub concepts: Graph,
    /// Sorted by shape IRI.
    pub shapes: Vec<NodeShape>,
    /// (target class, relation) pairs the evidence must supply.
    pub evidence_requirements: BTreeSet<(String, String)>,
    pub provenance_links: BTreeSet<String>,
}

impl KnowledgeBlock {
    pub fn shape_graph(&self) -> Graph {
        emit_shapes(&self.shapes)
    }

    /// The block file: shapes plus concept declarations, canonical Turtle.
    pub fn to_turtle(&self) -> String {
        self.shape_graph().union(&self.concepts).to_turtle()
    }

    /// Rebuilds a block from its shapes; O is recovered from the shape names.
    pub fn from_shapes(name: impl Into<String>, mut shapes: Vec<NodeShape>) -> Self {
        shapes.sort_by(|a, b| a.iri.cmp(&b.iri));
        let obligations = shapes.iter().map(obligation_of).collect();
        let (evidence_requirements, provenance_links) = requirements(&shapes);
        KnowledgeBlock {
            name: name.into(),
            obligations,
            concepts: concept_schema(&shapes),
            shapes,
            evidence_requirements,
            provenance_links,
        }
    }

    /// Loads a block from a shape-graph document.
    pub fn from_shape_graph(name: impl Into<String>, g: &Graph) -> Result<Self, CompileError> {
        Ok(Self::from_shapes(name, load_shapes(g)?))
    }
}

fn obligation_of(shape: &NodeShape) -> String {
    let iri = shape.iri.as_iri().unwrap_or_default();
    let local = iri.rsplit(['#', '/']).next().unwrap_or(iri);
    local.strip_suffix("Shape").unwrap_or(local).to_string()
}

fn requirements(shapes: &[NodeShape]) -> (BTreeSet<(String, String)>, BTreeSet<String>) {
    let mut evidence = BTreeSet::new();
    let mut prov = BTreeSet::new();
    for shape in shapes {
        let target = shape.target_class.as_iri().unwrap_or_default().to_string();
        for c in &shape.constraints {
            let predicates: Vec<String> = match c {
                Constraint::Sparql { query, .. } => query.predicates().into_iter().map(str::to_string).collect(),
                other => other.path().map(str::to_string).into_iter().collect(),
            };
            for p in predicates {
                if p.starts_with(vocab::PROV) {
                    prov.insert(p.clone());
                }
                evidence.insert((target.clone(), p));
            }
        }
    }
    (evidence, prov)
}

/// Expands `pfx:local` against the standard prefixes, or strips `<...>`.
pub fn expand_name(name: &str) -> Option<String> {
    if let Some(iri) = name.strip_prefix('<').and_then(|n| n.strip_suffix('>')) {
        return crate::rdf::is_absolute_iri(iri).then(|| iri.to_string());
    }
    let (prefix, local) = name.split_once(':')?;
    vocab::standard_prefixes()
        .into_iter()
        .find(|(p, _)| *p == prefix)
        .map(|(_, ns)| format!("{ns}{local}"))
}

pub fn shape_iri(obligation_id: &str) -> Term {
    Term::iri(format!("{}{obligation_id}Shape", vocab::EX))
}

fn compile_record(record: &IrRecord) -> Result<NodeShape, CompileError> {
    let id = &record.obligation_id;
    let iri = |name: &str| {
        expand_name(name).ok_or_else(|| CompileError::UnknownPrefix {
            id: id.clone(),
            name: name.to_string(),
        })
    };
    let mut constraints = Vec::new();
    match record.constraint_type {
        ConstraintType::Structural => {
            let path = iri(record.relation.as_deref().unwrap_or_default())?;
            constraints.push(Constraint::MinCount {
                path: path.clone(),
                min: record.min_count,
            });
            if let Some(dt) = &record.datatype {
                constraints.push(Constraint::Datatype {
                    path: path.clone(),
                    datatype: iri(dt)?,
                });
            }
            if let Some(class) = &record.value_class {
                constraints.push(Constraint::QualifiedMinCountClass {
                    path,
                    class: iri(class)?,
                    min: record.min_count,
                });
            }
        }
        ConstraintType::Sparql => {
            let mut text = record.sparql_text.clone().unwrap_or_default().trim_end().to_string();
            if let Some(threshold) = &record.threshold_ref {
                iri(threshold)?;
                text = text.replace(THRESHOLD_PLACEHOLDER, threshold);
            } else if text.contains(THRESHOLD_PLACEHOLDER) {
                return Err(CompileError::Schema {
                    index: 0,
                    field: "threshold_ref".into(),
                    reason: format!("record {id} uses {THRESHOLD_PLACEHOLDER} without threshold_ref"),
                });
            }
            let query = parse_sparql(&text).map_err(|source| match source {
                SparqlError::Syntax { ref reason, .. } if reason.starts_with("undefined prefix") => {
                    CompileError::UnknownPrefix {
                        id: id.clone(),
                        name: reason.clone(),
                    }
                }
                source => CompileError::SparqlSyntax { id: id.clone(), source },
            })?;
            constraints.push(Constraint::Sparql { query, message: None });
        }
    }
    Ok(NodeShape {
        iri: shape_iri(id),
        target_class: Term::Iri(iri(&record.target_class)?),
        message: Some(record.message.clone()),
        severity: record.severity,
        constraints,
    })
}

/// 𝒞: IR ↦ KB. Pure; record order does not affect the result.
pub fn compile(records: &[IrRecord], block_name: &str) -> Result<KnowledgeBlock, CompileError> {
    let mut seen = BTreeSet::new();
    for r in records {
        if !seen.insert(r.obligation_id.as_str()) {
            return Err(CompileError::DuplicateId(r.obligation_id.clone()));
        }
    }
    let shapes = records.iter().map(compile_record).collect::<Result<Vec<_>, _>>()?;
    Ok(KnowledgeBlock::from_shapes(block_name, shapes))
}

/// Parses and compiles an IR file in one step.
pub fn compile_text(text: &str, block_name: &str) -> Result<KnowledgeBlock, CompileError> {
    compile(&parse_ir(text)?, block_name)
}

/// Severity merge for cross-block shape collisions: the stricter wins.
pub fn merge_severity(a: Severity, b: Severity) -> Severity {
    a.max(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    const A1: &str = "- obligation_id: A1\n  target_class: ex:Decision\n  constraint_type: structural\n  relation: ex:hasUsageLog\n  min_count: 1\n  message: Decision must reference a usage log.\n";

    pub(crate) const B5: &str = r#"- obligation_id: B5
  target_class: ex:Decision
  constraint_type: sparql
  threshold_ref: ex:fairnessThreshold
  severity: Violation
  message: "Fairness disparity exceeds threshold."
  sparql_text: |
    SELECT $this WHERE {
          $this ex:allocatedGPUHoursGroupA ?a ;
                ex:allocatedGPUHoursGroupB ?b ;
                {{threshold}}       ?t .
          BIND(IF(?a > ?b, ?a, ?b) AS ?mx)
          BIND(IF(?mx = 0, 0, (ABS(?a - ?b) / ?mx)) AS ?ratio)
          FILTER(?ratio > ?t)
        }
"#;

    const FAIRNESS_SHAPE: &str = r#"@prefix ex: <http://example.org/okb#> .
@prefix sh: <http://www.w3.org/ns/shacl#> .
ex:B5Shape a sh:NodeShape ;
  sh:message "Fairness disparity exceeds threshold." ;
  sh:targetClass ex:Decision ;
  sh:sparql [ a sh:SPARQLConstraint ;
    sh:select """SELECT $this WHERE {
      $this ex:allocatedGPUHoursGroupA ?a ;
            ex:allocatedGPUHoursGroupB ?b ;
            ex:fairnessThreshold       ?t .
      BIND(IF(?a > ?b, ?a, ?b) AS ?mx)
      BIND(IF(?mx = 0, 0, (ABS(?a - ?b) / ?mx)) AS ?ratio)
      FILTER(?ratio > ?t)
    }""" ] .
"#;

    #[test]
    fn structural_record_round_trips_through_shapes() {
        let block = compile_text(A1, "a").unwrap();
        assert_eq!(block.shapes.len(), 1);
        let loaded = load_shapes(&parse_turtle(&block.to_turtle()).unwrap()).unwrap();
        assert_eq!(loaded, block.shapes);
        assert_eq!(
            loaded[0].constraints,
            vec![Constraint::MinCount {
                path: format!("{}hasUsageLog", vocab::EX),
                min: 1
            }]
        );
    }

    #[test]
    fn sparql_record_matches_reference_shape() {
        let block = compile_text(B5, "b").unwrap();
        let reference = load_shapes(&parse_turtle(FAIRNESS_SHAPE).unwrap()).unwrap();
        assert_eq!(block.shapes, reference);
        let emitted = load_shapes(&parse_turtle(&block.shape_graph().to_turtle()).unwrap()).unwrap();
        assert_eq!(emitted, reference);
        // Same triples modulo the literal's indentation: compare triple counts by predicate.
        assert_eq!(block.shape_graph().len(), parse_turtle(FAIRNESS_SHAPE).unwrap().len());
    }

    #[test]
    fn compilation_is_byte_stable_and_order_free() {
        let text = format!("{A1}{B5}");
        let once = compile_text(&text, "x").unwrap().to_turtle();
        assert_eq!(once, compile_text(&text, "x").unwrap().to_turtle());
        let swapped = compile_text(&format!("{B5}{A1}"), "x").unwrap().to_turtle();
        assert_eq!(once, swapped);
    }

    #[test]
    fn schema_errors_name_the_field() {
        let err = parse_ir("- obligation_id: X\n  target_class: ex:D\n  constraint_type: structural\n  message: m\n").unwrap_err();
        assert!(matches!(&err, CompileError::Schema { index: 0, field, .. } if field == "relation"), "{err}");
        let err = parse_ir("- obligation_id: X\n  colour: red\n").unwrap_err();
        assert!(err.to_string().contains("colour"));
        let err = parse_ir("- obligation_id: X\n  target_class: ex:D\n  constraint_type: structural\n  relation: ex:p\n  min_count: -1\n  message: m\n").unwrap_err();
        assert!(err.to_string().contains("min_count"));
    }

    #[test]
    fn duplicate_ids_are_rejected() {
        assert_eq!(
            parse_ir(&format!("{B5}{B5}")).unwrap_err(),
            CompileError::DuplicateId("B5".into())
        );
    }

    #[test]
    fn unknown_prefixes_are_rejected() {
        let text = A1.replace("ex:hasUsageLog", "foo:hasUsageLog");
        assert!(matches!(compile_text(&text, "a").unwrap_err(), CompileError::UnknownPrefix { .. }));
    }

    #[test]
    fn empty_ir_compiles_to_empty_block() {
        let block = compile_text("[]\n", "empty").unwrap();
        assert!(block.shapes.is_empty());
        assert!(block.obligations.is_empty());
    }

    #[test]
    fn block_components() {
        let text = "- obligation_id: A5\n  target_class: ex:Activity\n  constraint_type: structural\n  relation: prov:used\n  value_class: ex:ModelArtifact\n  severity: Warning\n  message: m\n";
        let block = compile_text(&format!("{text}{B5}"), "k").unwrap();
        assert_eq!(block.obligations, ["A5", "B5"].map(String::from).into());
        assert_eq!(block.provenance_links, [format!("{}used", vocab::PROV)].into());
        assert!(block
            .evidence_requirements
            .contains(&(format!("{}Decision", vocab::EX), format!("{}fairnessThreshold", vocab::EX))));
        let c = &block.concepts;
        assert!(c.has_type(&Term::iri(format!("{}ModelArtifact", vocab::EX)), &Term::iri(vocab::RDFS_CLASS)));
        assert!(c.has_type(&Term::iri(format!("{}used", vocab::PROV)), &Term::iri(vocab::RDF_PROPERTY)));
        let shapes = load_shapes(&parse_turtle(&block.to_turtle()).unwrap()).unwrap();
        assert_eq!(shapes[0].severity, Severity::Warning);
        assert_eq!(shapes, block.shapes);
    }

    #[test]
    fn severity_merge_takes_the_maximum() {
        use Severity::*;
        assert_eq!(merge_severity(Warning, Violation), Violation);
        assert_eq!(merge_severity(Info, Info), Info);
        for a in [Info, Warning, Violation] {
            for b in [Info, Warning, Violation] {
                assert_eq!(merge_severity(a, b), merge_severity(b, a));
            }
        }
    }
}
