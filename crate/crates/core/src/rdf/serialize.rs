//! Canonical Turtle writer.
//!
//! Output depends only on the triple set and prefix map, never on insertion
//! order or on blank-node labels: blank nodes referenced exactly once are
//! written inline as `[ ... ]`, the rest get labels derived from iterated
//! neighbourhood hashing.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt::Write;

use sha2::{Digest, Sha256};

use super::{Graph, Literal, Term, Triple};
use crate::vocab;

const INDENT: &str = "    ";

pub fn serialize_turtle(graph: &Graph) -> String {
    Writer::new(graph).write()
}

pub(crate) fn escape_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn escape_long_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '\\' => out.push_str("\\\\"),
            '"' => out.push_str("\\\""),
            '\r' => out.push_str("\\r"),
            c => out.push(c),
        }
    }
    out
}

fn is_integer_lexical(s: &str) -> bool {
    let digits = s.strip_prefix(['+', '-']).unwrap_or(s);
    !digits.is_empty() && digits.chars().all(|c| c.is_ascii_digit())
}

fn is_decimal_lexical(s: &str) -> bool {
    let body = s.strip_prefix(['+', '-']).unwrap_or(s);
    match body.split_once('.') {
        Some((int, frac)) => {
            int.chars().all(|c| c.is_ascii_digit())
                && !frac.is_empty()
                && frac.chars().all(|c| c.is_ascii_digit())
        }
        None => false,
    }
}

fn is_double_lexical(s: &str) -> bool {
    let Some(idx) = s.find(['e', 'E']) else {
        return false;
    };
    let (mantissa, exp) = (&s[..idx], &s[idx + 1..]);
    (is_integer_lexical(mantissa) || is_decimal_lexical(mantissa)) && is_integer_lexical(exp)
}

fn is_local_name(local: &str) -> bool {
    let Some(first) = local.chars().next() else {
        return true;
    };
    if !(first.is_alphanumeric() || first == '_') {
        return false;
    }
    if local.ends_with('.') {
        return false;
    }
    local
        .chars()
        .all(|c| c.is_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

struct Writer<'g> {
    graph: &'g Graph,
    by_subject: BTreeMap<&'g Term, Vec<&'g Triple>>,
    inline: HashSet<&'g Term>,
    labels: HashMap<&'g Term, usize>,
    namespaces: Vec<(&'g str, &'g str)>,
}

impl<'g> Writer<'g> {
    fn new(graph: &'g Graph) -> Self {
        let mut by_subject: BTreeMap<&Term, Vec<&Triple>> = BTreeMap::new();
        for t in graph.iter() {
            by_subject.entry(t.subject()).or_default().push(t);
        }
        let mut namespaces: Vec<(&str, &str)> = graph
            .prefixes()
            .iter()
            .map(|(p, ns)| (p.as_str(), ns.as_str()))
            .collect();
        // Longest namespace first, then label, so compaction is deterministic.
        namespaces.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(b.0)));
        let mut w = Writer {
            graph,
            by_subject,
            inline: HashSet::new(),
            labels: HashMap::new(),
            namespaces,
        };
        w.inline = w.inlinable_blanks();
        w.labels = w.canonical_labels();
        w
    }

    /// Blank nodes that occur exactly once as an object and whose chain of
    /// referencing subjects is rooted outside the inline set.
    fn inlinable_blanks(&self) -> HashSet<&'g Term> {
        let mut occurrences: HashMap<&Term, usize> = HashMap::new();
        let mut parent: HashMap<&Term, &Term> = HashMap::new();
        for t in self.graph.iter() {
            if t.object().is_blank() {
                *occurrences.entry(t.object()).or_default() += 1;
                parent.insert(t.object(), t.subject());
            }
        }
        let mut candidates: HashSet<&Term> = occurrences
            .iter()
            .filter(|(_, &n)| n == 1)
            .map(|(&b, _)| b)
            .collect();
        let mut in_cycle = Vec::new();
        for &start in &candidates {
            let mut seen = HashSet::new();
            let mut cur = start;
            loop {
                if !seen.insert(cur) {
                    if cur == start {
                        in_cycle.push(start);
                    }
                    break;
                }
                match parent.get(cur) {
                    Some(&p) if candidates.contains(p) => cur = p,
                    _ => break,
                }
            }
        }
        for b in in_cycle {
            candidates.remove(b);
        }
        candidates
    }

    fn canonical_labels(&self) -> HashMap<&'g Term, usize> {
        let blanks: BTreeSet<&Term> = self
            .graph
            .iter()
            .flat_map(|t| [t.subject(), t.object()])
            .filter(|t| t.is_blank())
            .collect();
        if blanks.is_empty() {
            return HashMap::new();
        }
        let mut sig: HashMap<&Term, String> = blanks.iter().map(|&b| (b, String::new())).collect();
        let mut classes = 1;
        for round in 0..=blanks.len() {
            let key = |t: &Term, sig: &HashMap<&Term, String>| match t {
                Term::BlankNode(_) => format!("_:{}", sig[t]),
                other => other.to_string(),
            };
            let mut next: HashMap<&Term, String> = HashMap::new();
            for &b in &blanks {
                let mut edges: Vec<String> = Vec::new();
                for t in self.graph.triples_matching(Some(b), None, None) {
                    edges.push(format!("out {} {}", t.predicate(), key(t.object(), &sig)));
                }
                for t in self.graph.triples_matching(None, None, Some(b)) {
                    edges.push(format!("in {} {}", t.predicate(), key(t.subject(), &sig)));
                }
                edges.sort();
                let mut h = Sha256::new();
                h.update(sig[b].as_bytes());
                for e in &edges {
                    h.update(e.as_bytes());
                    h.update([0u8]);
                }
                next.insert(b, hex::encode(h.finalize()));
            }
            let n = next.values().collect::<HashSet<_>>().len();
            sig = next;
            if round > 0 && n == classes {
                break;
            }
            classes = n;
        }
        let mut ordered: Vec<&Term> = blanks
            .into_iter()
            .filter(|b| !self.inline.contains(b))
            .collect();
        ordered.sort_by(|a, b| sig[a].cmp(&sig[b]).then(a.cmp(b)));
        ordered.into_iter().enumerate().map(|(i, b)| (b, i)).collect()
    }

    fn iri(&self, iri: &str) -> String {
        for (prefix, ns) in &self.namespaces {
            if let Some(local) = iri.strip_prefix(ns) {
                if is_local_name(local) {
                    return format!("{prefix}:{local}");
                }
            }
        }
        format!("<{iri}>")
    }

    fn literal(&self, lit: &Literal) -> String {
        let lex = lit.lexical();
        if let Some(lang) = lit.language() {
            return format!("{}@{lang}", self.quoted(lex));
        }
        let bare = match lit.datatype() {
            vocab::XSD_STRING => return self.quoted(lex),
            vocab::XSD_INTEGER => is_integer_lexical(lex),
            vocab::XSD_DECIMAL => is_decimal_lexical(lex),
            vocab::XSD_DOUBLE => is_double_lexical(lex),
            vocab::XSD_BOOLEAN => lex == "true" || lex == "false",
            _ => false,
        };
        if bare {
            lex.to_string()
        } else {
            format!("{}^^{}", self.quoted(lex), self.iri(lit.datatype()))
        }
    }

    fn quoted(&self, s: &str) -> String {
        if s.contains('\n') {
            format!("\"\"\"{}\"\"\"", escape_long_string(s))
        } else {
            format!("\"{}\"", escape_string(s))
        }
    }

    fn term(&self, term: &Term, depth: usize) -> String {
        match term {
            Term::Iri(iri) => self.iri(iri),
            Term::Literal(lit) => self.literal(lit),
            Term::BlankNode(_) if self.inline.contains(term) => self.inline_node(term, depth),
            Term::BlankNode(_) => format!("_:b{}", self.labels[term]),
        }
    }

    fn inline_node(&self, node: &Term, depth: usize) -> String {
        let Some(triples) = self.by_subject.get(node) else {
            return "[]".to_string();
        };
        let body = self.predicate_objects(triples, depth + 1);
        format!("[\n{}{}\n{}]", INDENT.repeat(depth + 1), body, INDENT.repeat(depth))
    }

    fn predicate_objects(&self, triples: &[&Triple], depth: usize) -> String {
        let mut groups: BTreeMap<(bool, &str), Vec<String>> = BTreeMap::new();
        for t in triples {
            let p = t.predicate().as_iri().expect("predicate is an IRI");
            groups
                .entry((p != vocab::RDF_TYPE, p))
                .or_default()
                .push(self.term(t.object(), depth));
        }
        let sep = format!(" ;\n{}", INDENT.repeat(depth));
        groups
            .into_iter()
            .map(|((_, p), mut objects)| {
                objects.sort();
                let verb = if p == vocab::RDF_TYPE {
                    "a".to_string()
                } else {
                    self.iri(p)
                };
                format!("{verb} {}", objects.join(", "))
            })
            .collect::<Vec<_>>()
            .join(&sep)
    }

    fn write(&self) -> String {
        let mut out = String::new();
        for (prefix, ns) in self.graph.prefixes() {
            writeln!(out, "@prefix {prefix}: <{ns}> .").unwrap();
        }
        let mut blocks: Vec<(bool, String, String)> = Vec::new();
        for (subject, triples) in &self.by_subject {
            let (is_blank, key, rendered) = match subject {
                Term::BlankNode(_) if self.inline.contains(subject) => continue,
                Term::BlankNode(_) => {
                    let label = self.labels[subject];
                    (true, format!("{label:020}"), format!("_:b{label}"))
                }
                Term::Iri(iri) => (false, iri.clone(), self.iri(iri)),
                Term::Literal(_) => unreachable!("literal subject"),
            };
            let body = self.predicate_objects(triples, 1);
            blocks.push((is_blank, key, format!("{rendered} {body} .\n")));
        }
        blocks.sort();
        for (_, _, block) in blocks {
            out.push('\n');
            out.push_str(&block);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;

    #[test]
    fn inline_blank_nodes_and_sorted_predicates() {
        let src = r#"@prefix ex: <http://ex.org/> .
ex:s ex:z 3 ; a ex:T ; ex:p [ ex:q "v" ] ."#;
        let out = serialize_turtle(&parse_turtle(src).unwrap());
        let expected = "@prefix ex: <http://ex.org/> .\n\nex:s a ex:T ;\n    ex:p [\n        ex:q \"v\"\n    ] ;\n    ex:z 3 .\n";
        assert_eq!(out, expected);
    }

    #[test]
    fn literal_forms() {
        let mut g = Graph::new();
        g.bind_prefix("xsd", vocab::XSD);
        g.bind_prefix("ex", "http://ex.org/");
        let s = Term::iri("http://ex.org/s");
        let p = |l: &str| Term::iri(format!("http://ex.org/{l}"));
        g.add(s.clone(), p("a"), Term::literal("120.0", vocab::XSD_DECIMAL));
        g.add(s.clone(), p("b"), Term::literal("1.5e3", vocab::XSD_DOUBLE));
        g.add(s.clone(), p("c"), Term::literal("abc", vocab::XSD_INTEGER));
        g.add(s.clone(), p("d"), Term::string("two\nlines \"q\""));
        g.add(s.clone(), p("e"), Term::literal("2026-01-01T00:00:00Z", vocab::XSD_DATE_TIME));
        let out = serialize_turtle(&g);
        assert!(out.contains("ex:a 120.0"));
        assert!(out.contains("ex:b 1.5e3"));
        assert!(out.contains("ex:c \"abc\"^^xsd:integer"));
        assert!(out.contains("ex:d \"\"\"two\nlines \\\"q\\\"\"\"\""));
        assert!(out.contains("\"2026-01-01T00:00:00Z\"^^xsd:dateTime"));
        assert_eq!(serialize_turtle(&parse_turtle(&out).unwrap()), out);
    }

    #[test]
    fn shared_and_cyclic_blanks_get_labels() {
        let src = r#"@prefix ex: <http://ex.org/> .
ex:a ex:p _:shared . ex:b ex:p _:shared . _:shared ex:v 1 .
_:x ex:next _:y . _:y ex:next _:x ."#;
        let g = parse_turtle(src).unwrap();
        let out = serialize_turtle(&g);
        let again = parse_turtle(&out).unwrap();
        assert_eq!(again.len(), g.len());
        assert_eq!(serialize_turtle(&again), out);
        assert!(out.contains("_:b"));
    }

    #[test]
    fn unprefixable_iris_stay_bracketed() {
        let mut g = Graph::new();
        g.bind_prefix("ex", "http://ex.org/");
        g.add(
            Term::iri("http://ex.org/a/b"),
            Term::iri("http://ex.org/p"),
            Term::iri("http://other.org/x"),
        );
        let out = serialize_turtle(&g);
        assert!(out.contains("<http://ex.org/a/b>"));
        assert!(out.contains("<http://other.org/x>"));
    }
}
