use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{validate_profile, ComposedKb};
use crate::rdf::Graph;
use crate::shacl::{compact, Violation, ViolationKey};

/// Verdict for `p1 ⊑ p2`: every violation p2 detects, p1 detects too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementVerdict {
    pub p1: String,
    pub p2: String,
    pub holds: bool,
    /// (case id, violation) found by p2 but not by p1.
    pub counterexamples: Vec<(String, Violation)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EquivalenceVerdict {
    pub equivalent: bool,
    pub forward: RefinementVerdict,
    pub backward: RefinementVerdict,
}

type Detected = Vec<BTreeMap<ViolationKey, Violation>>;

fn detected(kb: &ComposedKb, corpus: &[(String, Graph)]) -> Detected {
    corpus
        .iter()
        .map(|(_, g)| {
            validate_profile(g, kb)
                .violations
                .into_iter()
                .map(|v| (v.key(), v))
                .collect()
        })
        .collect()
}

fn verdict(p1: &str, d1: &Detected, p2: &str, d2: &Detected, corpus: &[(String, Graph)]) -> RefinementVerdict {
    let mut counterexamples = Vec::new();
    for ((case, _), (s1, s2)) in corpus.iter().zip(d1.iter().zip(d2)) {
        for (key, v) in s2 {
            if !s1.contains_key(key) {
                counterexamples.push((case.clone(), v.clone()));
            }
        }
    }
    RefinementVerdict {
        p1: p1.to_string(),
        p2: p2.to_string(),
        holds: counterexamples.is_empty(),
        counterexamples,
    }
}

/// Corpus-relative check of `p1 ⊑ p2`.
pub fn check_refinement(
    p1: (&str, &ComposedKb),
    p2: (&str, &ComposedKb),
    corpus: &[(String, Graph)],
) -> RefinementVerdict {
    let d1 = detected(p1.1, corpus);
    let d2 = detected(p2.1, corpus);
    verdict(p1.0, &d1, p2.0, &d2, corpus)
}

pub fn check_equivalence(
    p1: (&str, &ComposedKb),
    p2: (&str, &ComposedKb),
    corpus: &[(String, Graph)],
) -> EquivalenceVerdict {
    let d1 = detected(p1.1, corpus);
    let d2 = detected(p2.1, corpus);
    let forward = verdict(p1.0, &d1, p2.0, &d2, corpus);
    let backward = verdict(p2.0, &d2, p1.0, &d1, corpus);
    EquivalenceVerdict {
        equivalent: forward.holds && backward.holds,
        forward,
        backward,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RefinementMatrix {
    /// All ordered distinct pairs, in input order.
    pub verdicts: Vec<RefinementVerdict>,
}

impl RefinementMatrix {
    pub fn get(&self, p1: &str, p2: &str) -> Option<&RefinementVerdict> {
        self.verdicts.iter().find(|v| v.p1 == p1 && v.p2 == p2)
    }

    /// Unordered pairs where refinement holds both ways.
    pub fn equivalent_pairs(&self) -> Vec<(String, String)> {
        self.verdicts
            .iter()
            .filter(|v| v.p1 < v.p2 && v.holds)
            .filter(|v| self.get(&v.p2, &v.p1).is_some_and(|b| b.holds))
            .map(|v| (v.p1.clone(), v.p2.clone()))
            .collect()
    }

    pub fn equivalence_summary(&self) -> String {
        let pairs = self.equivalent_pairs();
        if pairs.is_empty() {
            "no equivalent pairs".to_string()
        } else {
            let list: Vec<String> = pairs.iter().map(|(a, b)| format!("{a} = {b}")).collect();
            format!("equivalent pairs: {}", list.join(", "))
        }
    }

    /// One row per ordered pair; the first counterexample is shown when refinement fails.
    pub fn render(&self) -> String {
        let w1 = self.verdicts.iter().map(|v| v.p1.len()).max().unwrap_or(2).max(2);
        let w2 = self.verdicts.iter().map(|v| v.p2.len()).max().unwrap_or(2).max(2);
        let mut out = String::new();
        let _ = writeln!(out, "{:w1$}  {:w2$}  {:13}  counterexample", "P1", "P2", "P1 refines P2");
        for v in &self.verdicts {
            let witness = v
                .counterexamples
                .first()
                .map(|(case, x)| format!("{case}: {} at {}", compact(&x.source_shape), compact(&x.focus_node)))
                .unwrap_or_default();
            let status = if v.holds { "holds" } else { "does not hold" };
            let _ = writeln!(out, "{:w1$}  {:w2$}  {status:13}  {witness}", v.p1, v.p2);
        }
        out.trim_end().lines().map(str::trim_end).collect::<Vec<_>>().join("\n") + "\n"
    }
}

/// Verdicts for every ordered pair of distinct profiles.
pub fn refinement_matrix(profiles: &[(&str, &ComposedKb)], corpus: &[(String, Graph)]) -> RefinementMatrix {
    let detections: Vec<Detected> = profiles.iter().map(|(_, kb)| detected(kb, corpus)).collect();
    let mut verdicts = Vec::new();
    for (i, (n1, _)) in profiles.iter().enumerate() {
        for (j, (n2, _)) in profiles.iter().enumerate() {
            if i != j {
                verdicts.push(verdict(n1, &detections[i], n2, &detections[j], corpus));
            }
        }
    }
    RefinementMatrix { verdicts }
}
