//! The restricted SPARQL SELECT fragment used by SHACL-SPARQL constraints.
//!
//! Grammar: optional `PREFIX` declarations, then
//! `SELECT $this [vars] WHERE { (triple-pattern | BIND(expr AS ?v) | FILTER(expr))* }`.
//! Expressions cover variables, constants, comparisons, `+ - * /`, `ABS` and
//! `IF`. Anything else is rejected at parse time by keyword name.

mod eval;
mod parser;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::rdf::Term;
use crate::vocab;

pub use eval::{eval_expression, evaluate, Diagnostic, Evaluation, Value};
pub use parser::{parse_sparql, parse_sparql_with_prefixes};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SparqlError {
    #[error("syntax error at line {line}, column {column}: {reason}")]
    Syntax {
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("syntax error at line {line}, column {column}: unsupported keyword {keyword}")]
    UnsupportedKeyword {
        keyword: String,
        line: usize,
        column: usize,
    },
    #[error("unbound variable ?{0}")]
    UnboundVariable(String),
    #[error("BIND target ?{0} is already bound")]
    AlreadyBound(String),
    #[error("type mismatch: {0}")]
    TypeMismatch(String),
}

/// A solution: variable name (without sigil) to bound term.
pub type Binding = BTreeMap<String, Term>;

/// Name of the pre-bound focus-node variable.
pub const THIS: &str = "this";

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PatternTerm {
    Variable(String),
    Term(Term),
}

impl PatternTerm {
    pub fn as_variable(&self) -> Option<&str> {
        match self {
            PatternTerm::Variable(v) => Some(v),
            PatternTerm::Term(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TriplePattern {
    pub subject: PatternTerm,
    pub predicate: PatternTerm,
    pub object: PatternTerm,
}

impl TriplePattern {
    pub fn variables(&self) -> impl Iterator<Item = &str> {
        [&self.subject, &self.predicate, &self.object]
            .into_iter()
            .filter_map(PatternTerm::as_variable)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CompareOp {
    Gt,
    Lt,
    Ge,
    Le,
    Eq,
    Ne,
}

impl CompareOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CompareOp::Gt => ">",
            CompareOp::Lt => "<",
            CompareOp::Ge => ">=",
            CompareOp::Le => "<=",
            CompareOp::Eq => "=",
            CompareOp::Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expression {
    Variable(String),
    Constant(Term),
    Compare(CompareOp, Box<Expression>, Box<Expression>),
    Arithmetic(ArithOp, Box<Expression>, Box<Expression>),
    Negate(Box<Expression>),
    Abs(Box<Expression>),
    If(Box<Expression>, Box<Expression>, Box<Expression>),
}

impl Expression {
    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expression::Variable(v) => {
                out.insert(v);
            }
            Expression::Constant(_) => {}
            Expression::Compare(_, a, b) | Expression::Arithmetic(_, a, b) => {
                a.collect_variables(out);
                b.collect_variables(out);
            }
            Expression::Negate(a) | Expression::Abs(a) => a.collect_variables(out),
            Expression::If(c, t, e) => {
                c.collect_variables(out);
                t.collect_variables(out);
                e.collect_variables(out);
            }
        }
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expression::Variable(v) => write!(f, "?{v}"),
            Expression::Constant(t) => match t.as_literal() {
                Some(lit) if crate::rdf::is_numeric_datatype(lit.datatype()) => {
                    f.write_str(lit.lexical())
                }
                _ => write!(f, "{t}"),
            },
            Expression::Compare(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expression::Arithmetic(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expression::Negate(a) => write!(f, "-{a}"),
            Expression::Abs(a) => write!(f, "ABS({a})"),
            Expression::If(c, t, e) => write!(f, "IF({c}, {t}, {e})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ClauseItem {
    Pattern(TriplePattern),
    Bind(Expression, String),
    Filter(Expression),
}

#[derive(Debug, Clone)]
pub struct SparqlQuery {
    select: Vec<String>,
    clauses: Vec<ClauseItem>,
    source: String,
}

/// Queries compare by structure; the source text is kept only for re-emission.
impl PartialEq for SparqlQuery {
    fn eq(&self, other: &Self) -> bool {
        self.select == other.select && self.clauses == other.clauses
    }
}

impl Eq for SparqlQuery {}

impl SparqlQuery {
    pub fn select_vars(&self) -> &[String] {
        &self.select
    }

    pub fn clauses(&self) -> &[ClauseItem] {
        &self.clauses
    }

    /// The query text as written.
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn patterns(&self) -> impl Iterator<Item = &TriplePattern> {
        self.clauses.iter().filter_map(|c| match c {
            ClauseItem::Pattern(p) => Some(p),
            _ => None,
        })
    }

    /// IRIs used in predicate position.
    pub fn predicates(&self) -> BTreeSet<&str> {
        self.patterns()
            .filter_map(|p| match &p.predicate {
                PatternTerm::Term(t) => t.as_iri(),
                PatternTerm::Variable(_) => None,
            })
            .collect()
    }

    /// IRIs appearing as the object of an `rdf:type` pattern.
    pub fn classes(&self) -> BTreeSet<&str> {
        self.patterns()
            .filter(|p| matches!(&p.predicate, PatternTerm::Term(t) if t.as_iri() == Some(vocab::RDF_TYPE)))
            .filter_map(|p| match &p.object {
                PatternTerm::Term(t) => t.as_iri(),
                PatternTerm::Variable(_) => None,
            })
            .collect()
    }
}
