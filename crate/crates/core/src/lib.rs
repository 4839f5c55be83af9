//! Governance compiler and validation engine.
//!
//! Structured obligation records are compiled into SHACL node shapes,
//! grouped into knowledge blocks, composed into profiles and evaluated
//! against RDF evidence graphs.

pub mod bench;
pub mod compiler;
pub mod corpus;
pub mod governance;
pub mod rdf;
pub mod shacl;
pub mod sparql;
pub mod vocab;

pub use rdf::{Graph, Literal, Term, Triple};
