//! RDF data model: terms, triples and set-semantics graphs.
//!
//! Graphs keep their triples in a `BTreeSet`, so iteration order is the
//! canonical triple order used everywhere else (SPARQL solution order,
//! report ordering, serialization).

mod serialize;
mod turtle;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::vocab;

pub use serialize::serialize_turtle;
pub use turtle::{parse_turtle, SyntaxError};
pub(crate) use turtle::fresh_blank;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RdfError {
    #[error("triple predicate must be an IRI, got {0}")]
    PredicateNotIri(Term),
    #[error("triple subject must be an IRI or blank node, got {0}")]
    LiteralSubject(Term),
}

/// An RDF literal. The datatype is always set; plain strings carry
/// `xsd:string`, language-tagged strings carry `rdf:langString`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Literal {
    lexical: String,
    datatype: String,
    language: Option<String>,
}

impl Literal {
    pub fn typed(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: datatype.into(),
            language: None,
        }
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        Self::typed(lexical, vocab::XSD_STRING)
    }

    pub fn lang_string(lexical: impl Into<String>, language: impl Into<String>) -> Self {
        Literal {
            lexical: lexical.into(),
            datatype: vocab::RDF_LANG_STRING.to_string(),
            language: Some(language.into().to_ascii_lowercase()),
        }
    }

    pub fn lexical(&self) -> &str {
        &self.lexical
    }

    pub fn datatype(&self) -> &str {
        &self.datatype
    }

    pub fn language(&self) -> Option<&str> {
        self.language.as_deref()
    }

    /// Numeric value for integer, decimal, float and double literals.
    pub fn numeric_value(&self) -> Option<f64> {
        if !is_numeric_datatype(&self.datatype) {
            return None;
        }
        let lex = self.lexical.trim();
        match lex {
            "INF" | "+INF" => Some(f64::INFINITY),
            "-INF" => Some(f64::NEG_INFINITY),
            "NaN" => Some(f64::NAN),
            _ => lex.parse::<f64>().ok().filter(|v| v.is_finite()),
        }
    }
}

pub fn is_numeric_datatype(datatype: &str) -> bool {
    let Some(local) = datatype.strip_prefix(vocab::XSD) else {
        return false;
    };
    matches!(
        local,
        "integer"
            | "decimal"
            | "double"
            | "float"
            | "int"
            | "long"
            | "short"
            | "byte"
            | "nonNegativeInteger"
            | "positiveInteger"
            | "nonPositiveInteger"
            | "negativeInteger"
            | "unsignedInt"
            | "unsignedLong"
            | "unsignedShort"
            | "unsignedByte"
    )
}

/// An RDF term. Equality is structural: two literals are the same term only
/// when lexical form, datatype and language all agree.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Term {
    Iri(String),
    BlankNode(String),
    Literal(Literal),
}

impl Term {
    pub fn iri(iri: impl Into<String>) -> Self {
        Term::Iri(iri.into())
    }

    pub fn blank(label: impl Into<String>) -> Self {
        Term::BlankNode(label.into())
    }

    pub fn literal(lexical: impl Into<String>, datatype: impl Into<String>) -> Self {
        Term::Literal(Literal::typed(lexical, datatype))
    }

    pub fn string(lexical: impl Into<String>) -> Self {
        Term::Literal(Literal::string(lexical))
    }

    pub fn integer(value: i64) -> Self {
        Term::literal(value.to_string(), vocab::XSD_INTEGER)
    }

    pub fn boolean(value: bool) -> Self {
        Term::literal(value.to_string(), vocab::XSD_BOOLEAN)
    }

    /// A double literal whose lexical form round-trips through `f64::from_str`.
    pub fn double(value: f64) -> Self {
        Term::literal(format!("{value:?}"), vocab::XSD_DOUBLE)
    }

    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(iri) => Some(iri),
            _ => None,
        }
    }

    pub fn as_literal(&self) -> Option<&Literal> {
        match self {
            Term::Literal(lit) => Some(lit),
            _ => None,
        }
    }

    pub fn is_iri(&self) -> bool {
        matches!(self, Term::Iri(_))
    }

    pub fn is_blank(&self) -> bool {
        matches!(self, Term::BlankNode(_))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Term::Literal(_))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(iri) => write!(f, "<{iri}>"),
            Term::BlankNode(label) => write!(f, "_:{label}"),
            Term::Literal(lit) => {
                write!(f, "\"{}\"", serialize::escape_string(&lit.lexical))?;
                match &lit.language {
                    Some(lang) => write!(f, "@{lang}"),
                    None if lit.datatype == vocab::XSD_STRING => Ok(()),
                    None => write!(f, "^^<{}>", lit.datatype),
                }
            }
        }
    }
}

/// Returns true when `iri` starts with a URI scheme followed by `:`.
pub fn is_absolute_iri(iri: &str) -> bool {
    let Some(colon) = iri.find(':') else {
        return false;
    };
    let scheme = &iri[..colon];
    let mut chars = scheme.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '+' | '-' | '.'))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triple {
    subject: Term,
    predicate: Term,
    object: Term,
}

impl Triple {
    pub fn try_new(subject: Term, predicate: Term, object: Term) -> Result<Self, RdfError> {
        if subject.is_literal() {
            return Err(RdfError::LiteralSubject(subject));
        }
        if !predicate.is_iri() {
            return Err(RdfError::PredicateNotIri(predicate));
        }
        Ok(Triple {
            subject,
            predicate,
            object,
        })
    }

    /// Panics if the subject is a literal or the predicate is not an IRI.
    pub fn new(subject: Term, predicate: Term, object: Term) -> Self {
        Self::try_new(subject, predicate, object).expect("ill-formed triple")
    }

    pub fn subject(&self) -> &Term {
        &self.subject
    }

    pub fn predicate(&self) -> &Term {
        &self.predicate
    }

    pub fn object(&self) -> &Term {
        &self.object
    }

    pub fn into_parts(self) -> (Term, Term, Term) {
        (self.subject, self.predicate, self.object)
    }
}

impl fmt::Display for Triple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {} .", self.subject, self.predicate, self.object)
    }
}

/// Raised by [`Graph::union_reporting`] when both sides bind a prefix to
/// different namespaces. The left-hand binding is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrefixConflict {
    pub prefix: String,
    pub kept: String,
    pub dropped: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Graph {
    triples: BTreeSet<Triple>,
    prefixes: BTreeMap<String, String>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    /// An empty graph with the standard prefixes bound.
    pub fn with_standard_prefixes() -> Self {
        let mut g = Graph::new();
        for (p, ns) in vocab::standard_prefixes() {
            g.bind_prefix(p, ns);
        }
        g
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    /// Returns false if the triple was already present.
    pub fn insert(&mut self, triple: Triple) -> bool {
        self.triples.insert(triple)
    }

    /// Convenience for building graphs in code; panics on ill-formed triples.
    pub fn add(&mut self, subject: Term, predicate: Term, object: Term) -> bool {
        self.insert(Triple::new(subject, predicate, object))
    }

    pub fn remove(&mut self, triple: &Triple) -> bool {
        self.triples.remove(triple)
    }

    pub fn contains(&self, triple: &Triple) -> bool {
        self.triples.contains(triple)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Triple> {
        self.triples.iter()
    }

    pub fn prefixes(&self) -> &BTreeMap<String, String> {
        &self.prefixes
    }

    pub fn bind_prefix(&mut self, prefix: impl Into<String>, namespace: impl Into<String>) {
        self.prefixes.insert(prefix.into(), namespace.into());
    }

    /// All triples agreeing with every given position; `None` is a wildcard.
    pub fn triples_matching<'a>(
        &'a self,
        subject: Option<&'a Term>,
        predicate: Option<&'a Term>,
        object: Option<&'a Term>,
    ) -> Box<dyn Iterator<Item = &'a Triple> + 'a> {
        let agrees = move |t: &&Triple| {
            predicate.map_or(true, |p| &t.predicate == p) && object.map_or(true, |o| &t.object == o)
        };
        match subject {
            Some(s) => {
                let start = Triple {
                    subject: s.clone(),
                    predicate: Term::Iri(String::new()),
                    object: Term::Iri(String::new()),
                };
                Box::new(
                    self.triples
                        .range(start..)
                        .take_while(move |t| &t.subject == s)
                        .filter(agrees),
                )
            }
            None => Box::new(self.triples.iter().filter(agrees)),
        }
    }

    /// Collected form of [`Graph::triples_matching`].
    pub fn match_pattern(
        &self,
        subject: Option<&Term>,
        predicate: Option<&Term>,
        object: Option<&Term>,
    ) -> BTreeSet<Triple> {
        self.triples_matching(subject, predicate, object)
            .cloned()
            .collect()
    }

    /// Distinct objects of `(subject, predicate, ?)`.
    pub fn objects<'a>(&'a self, subject: &'a Term, predicate: &'a Term) -> BTreeSet<&'a Term> {
        self.triples_matching(Some(subject), Some(predicate), None)
            .map(|t| &t.object)
            .collect()
    }

    pub fn object<'a>(&'a self, subject: &'a Term, predicate: &'a Term) -> Option<&'a Term> {
        self.triples_matching(Some(subject), Some(predicate), None)
            .map(|t| &t.object)
            .next()
    }

    /// Subjects of `(?, rdf:type, class)`.
    pub fn instances_of(&self, class: &Term) -> BTreeSet<Term> {
        let rdf_type = Term::iri(vocab::RDF_TYPE);
        self.triples_matching(None, Some(&rdf_type), Some(class))
            .map(|t| t.subject.clone())
            .collect()
    }

    pub fn has_type(&self, node: &Term, class: &Term) -> bool {
        let rdf_type = Term::iri(vocab::RDF_TYPE);
        self.contains(&Triple {
            subject: node.clone(),
            predicate: rdf_type,
            object: class.clone(),
        })
    }

    pub fn union(&self, other: &Graph) -> Graph {
        self.union_reporting(other).0
    }

    /// Set union of both graphs. Prefix bindings from `self` win; each
    /// overridden binding of `other` is reported.
    pub fn union_reporting(&self, other: &Graph) -> (Graph, Vec<PrefixConflict>) {
        let mut out = self.clone();
        let mut conflicts = Vec::new();
        for (prefix, ns) in &other.prefixes {
            match out.prefixes.get(prefix) {
                Some(kept) if kept != ns => conflicts.push(PrefixConflict {
                    prefix: prefix.clone(),
                    kept: kept.clone(),
                    dropped: ns.clone(),
                }),
                Some(_) => {}
                None => {
                    out.prefixes.insert(prefix.clone(), ns.clone());
                }
            }
        }
        out.triples.extend(other.triples.iter().cloned());
        (out, conflicts)
    }

    pub fn extend(&mut self, other: &Graph) {
        for (prefix, ns) in &other.prefixes {
            self.prefixes
                .entry(prefix.clone())
                .or_insert_with(|| ns.clone());
        }
        self.triples.extend(other.triples.iter().cloned());
    }

    pub fn to_turtle(&self) -> String {
        serialize_turtle(self)
    }

    /// Expands `prefix:local` against this graph's prefix map.
    pub fn expand(&self, pname: &str) -> Option<String> {
        let (prefix, local) = pname.split_once(':')?;
        self.prefixes.get(prefix).map(|ns| format!("{ns}{local}"))
    }
}

impl FromIterator<Triple> for Graph {
    fn from_iter<I: IntoIterator<Item = Triple>>(iter: I) -> Self {
        Graph {
            triples: iter.into_iter().collect(),
            prefixes: BTreeMap::new(),
        }
    }
}

impl<'a> IntoIterator for &'a Graph {
    type Item = &'a Triple;
    type IntoIter = std::collections::btree_set::Iter<'a, Triple>;

    fn into_iter(self) -> Self::IntoIter {
        self.triples.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex(local: &str) -> Term {
        Term::iri(format!("{}{local}", vocab::EX))
    }

    #[test]
    fn duplicate_insert_is_noop() {
        let mut g = Graph::new();
        assert!(g.add(ex("d"), ex("p"), ex("o")));
        assert!(!g.add(ex("d"), ex("p"), ex("o")));
        assert_eq!(g.len(), 1);
    }

    #[test]
    fn literal_identity_is_lexical() {
        let a = Term::literal("120.0", vocab::XSD_DECIMAL);
        let b = Term::literal("120", vocab::XSD_INTEGER);
        assert_ne!(a, b);
        assert_eq!(
            a.as_literal().unwrap().numeric_value(),
            b.as_literal().unwrap().numeric_value()
        );
    }

    #[test]
    fn ill_formed_triples_rejected() {
        assert!(matches!(
            Triple::try_new(Term::string("x"), ex("p"), ex("o")),
            Err(RdfError::LiteralSubject(_))
        ));
        assert!(matches!(
            Triple::try_new(ex("s"), Term::blank("b"), ex("o")),
            Err(RdfError::PredicateNotIri(_))
        ));
    }

    #[test]
    fn match_on_empty_graph() {
        assert!(Graph::new().match_pattern(None, None, None).is_empty());
    }

    #[test]
    fn match_by_subject_range() {
        let mut g = Graph::new();
        g.add(ex("a"), ex("p"), ex("x"));
        g.add(ex("b"), ex("p"), ex("y"));
        g.add(ex("b"), ex("q"), ex("z"));
        g.add(ex("c"), ex("p"), ex("x"));
        let b = ex("b");
        assert_eq!(g.match_pattern(Some(&b), None, None).len(), 2);
        let p = ex("p");
        let x = ex("x");
        assert_eq!(g.match_pattern(None, Some(&p), Some(&x)).len(), 2);
        assert_eq!(g.match_pattern(None, None, None).len(), 4);
    }

    #[test]
    fn union_keeps_left_prefix() {
        let mut a = Graph::new();
        a.bind_prefix("ex", "http://a.org/");
        let mut b = Graph::new();
        b.bind_prefix("ex", "http://b.org/");
        b.bind_prefix("other", "http://o.org/");
        let (u, conflicts) = a.union_reporting(&b);
        assert_eq!(u.prefixes()["ex"], "http://a.org/");
        assert_eq!(u.prefixes()["other"], "http://o.org/");
        assert_eq!(conflicts.len(), 1);
        assert_eq!(conflicts[0].dropped, "http://b.org/");
    }

    #[test]
    fn absolute_iri_check() {
        assert!(is_absolute_iri("http://ex.org/x"));
        assert!(is_absolute_iri("urn:isbn:1"));
        assert!(!is_absolute_iri("relative/path"));
        assert!(!is_absolute_iri("1http://x"));
        assert!(!is_absolute_iri("#frag"));
    }
}
