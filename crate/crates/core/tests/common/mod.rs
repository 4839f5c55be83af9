//! Shared test support: a brute-force SPARQL oracle and random graph builders.
#![allow(dead_code)]

pub mod oracle;

use okb_core::rdf::{Graph, Term, Triple};
use okb_core::vocab;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn ex(local: &str) -> Term {
    Term::iri(format!("{}{local}", vocab::EX))
}

pub const FAIRNESS_QUERY: &str = r#"SELECT $this WHERE {
      $this ex:allocatedGPUHoursGroupA ?a ;
            ex:allocatedGPUHoursGroupB ?b ;
            ex:fairnessThreshold       ?t .
      BIND(IF(?a > ?b, ?a, ?b) AS ?mx)
      BIND(IF(?mx = 0, 0, (ABS(?a - ?b) / ?mx)) AS ?ratio)
      FILTER(?ratio > ?t)
    }"#;

/// The fairness query plus ten variants: five comparator swaps and five
/// differently shaped queries (predicate variables, chains, unguarded
/// division, projection of extra variables, arithmetic inside IF).
pub fn query_variants() -> Vec<String> {
    let mut out = vec![FAIRNESS_QUERY.to_string()];
    for op in [">=", "<", "<=", "=", "!="] {
        out.push(FAIRNESS_QUERY.replace("?ratio > ?t", &format!("?ratio {op} ?t")));
    }
    out.extend(
        [
            "SELECT $this ?o WHERE { $this ?p ?o . FILTER(?o = 120) }",
            "SELECT $this ?x WHERE { $this ex:p ?x . ?x ex:allocatedGPUHoursGroupA ?a . FILTER(ABS(?a) >= 100) }",
            "SELECT $this ?r WHERE { $this ex:allocatedGPUHoursGroupA ?a ; ex:allocatedGPUHoursGroupB ?b . BIND(?a / ?b AS ?r) FILTER(?r > 1) }",
            "SELECT $this ?y WHERE { $this ex:p ?x . ?x ex:p ?y . FILTER(?x != ?y) }",
            "SELECT $this ?a ?s WHERE { $this ex:allocatedGPUHoursGroupA ?a . BIND(-?a + 2 * ?a AS ?s) FILTER(IF(?s > 100, ?a, 0)) }",
        ]
        .map(String::from),
    );
    out
}

pub fn node_pool() -> Vec<Term> {
    ["d0", "d1", "n0", "n1", "n2"].iter().map(|n| ex(n)).collect()
}

pub fn predicate_pool() -> Vec<Term> {
    ["allocatedGPUHoursGroupA", "allocatedGPUHoursGroupB", "fairnessThreshold", "p"]
        .iter()
        .map(|p| ex(p))
        .collect()
}

pub fn literal_pool() -> Vec<Term> {
    let dec = |s: &str| Term::literal(s, vocab::XSD_DECIMAL);
    vec![
        Term::integer(0),
        dec("0.0"),
        dec("70.0"),
        dec("100.0"),
        dec("110.0"),
        dec("120.0"),
        Term::integer(120),
        dec("0.20"),
        Term::literal("5.0E-1", vocab::XSD_DOUBLE),
        Term::string("text"),
        Term::boolean(true),
    ]
}

/// A graph of at most `max` triples over the fixed pools.
pub fn random_graph(rng: &mut impl Rng, max: usize) -> Graph {
    let nodes = node_pool();
    let preds = predicate_pool();
    let lits = literal_pool();
    let n = rng.gen_range(0..=max);
    let mut g = Graph::with_standard_prefixes();
    for _ in 0..n {
        let s = nodes.choose(rng).unwrap().clone();
        let p = preds.choose(rng).unwrap().clone();
        let o = if rng.gen_bool(0.6) {
            lits.choose(rng).unwrap().clone()
        } else {
            nodes.choose(rng).unwrap().clone()
        };
        g.insert(Triple::new(s, p, o));
    }
    g
}

/// Like [`random_graph`] but also uses blank nodes and awkward literals.
pub fn random_rich_graph(rng: &mut impl Rng, max: usize) -> Graph {
    let mut g = random_graph(rng, max);
    let blanks: Vec<Term> = (0..3).map(|i| Term::blank(format!("x{i}"))).collect();
    let odd = [
        Term::string("multi\nline \"quoted\""),
        Term::string("tab\tand back\\slash"),
        Term::literal("2026-01-15T10:30:00Z", vocab::XSD_DATE_TIME),
        Term::Literal(okb_core::Literal::lang_string("hallo", "de")),
        Term::iri("http://other.example/a/b"),
    ];
    for _ in 0..rng.gen_range(0..6) {
        let s = if rng.gen_bool(0.5) { blanks.choose(rng).unwrap().clone() } else { ex("n0") };
        let o = match rng.gen_range(0..3) {
            0 => blanks.choose(rng).unwrap().clone(),
            1 => odd.choose(rng).unwrap().clone(),
            _ => ex("n1"),
        };
        g.insert(Triple::new(s, ex("q"), o));
    }
    g
}
