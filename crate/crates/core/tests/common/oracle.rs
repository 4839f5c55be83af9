//! Brute-force reference for the SPARQL fragment: try every assignment of
//! graph terms to the pattern variables, keep those whose instantiated
//! patterns are all in the graph, then apply BIND and FILTER in order.
//! Shares only the parsed query with the engine.

use std::collections::BTreeSet;

use okb_core::rdf::{Graph, Term, Triple};
use okb_core::sparql::{ArithOp, Binding, ClauseItem, CompareOp, Expression, PatternTerm, SparqlQuery};
use okb_core::vocab;

#[derive(Debug, Clone)]
enum V {
    Num(f64),
    Bool(bool),
    T(Term),
}

fn num(v: &V) -> Option<f64> {
    match v {
        V::Num(n) => Some(*n),
        V::T(Term::Literal(l)) if okb_core::rdf::is_numeric_datatype(l.datatype()) => l.lexical().parse().ok(),
        _ => None,
    }
}

fn boolean(v: &V) -> Option<bool> {
    match v {
        V::Bool(b) => Some(*b),
        V::T(Term::Literal(l)) if l.datatype() == vocab::XSD_BOOLEAN => match l.lexical() {
            "true" | "1" => Some(true),
            "false" | "0" => Some(false),
            _ => None,
        },
        _ => None,
    }
}

fn plain(v: &V) -> Option<&str> {
    match v {
        V::T(Term::Literal(l)) if l.datatype() == vocab::XSD_STRING => Some(l.lexical()),
        _ => None,
    }
}

fn ebv(v: &V) -> Option<bool> {
    if let Some(b) = boolean(v) {
        return Some(b);
    }
    if let Some(n) = num(v) {
        return Some(n != 0.0 && !n.is_nan());
    }
    plain(v).map(|s| !s.is_empty())
}

fn to_term(v: V) -> Term {
    match v {
        V::T(t) => t,
        V::Num(n) => Term::double(n),
        V::Bool(b) => Term::boolean(b),
    }
}

fn cmp(op: CompareOp, x: &V, y: &V) -> Option<bool> {
    use std::cmp::Ordering::*;
    let ord = if let (Some(a), Some(b)) = (num(x), num(y)) {
        a.partial_cmp(&b)
    } else if let (Some(a), Some(b)) = (boolean(x), boolean(y)) {
        Some(a.cmp(&b))
    } else if let (Some(a), Some(b)) = (plain(x), plain(y)) {
        Some(a.cmp(b))
    } else {
        let same = matches!((x, y), (V::T(a), V::T(b)) if a == b);
        return match op {
            CompareOp::Eq => Some(same),
            CompareOp::Ne => Some(!same),
            _ => None,
        };
    };
    Some(match (op, ord) {
        (CompareOp::Ne, None) => true,
        (_, None) => false,
        (CompareOp::Gt, Some(o)) => o == Greater,
        (CompareOp::Lt, Some(o)) => o == Less,
        (CompareOp::Ge, Some(o)) => o != Less,
        (CompareOp::Le, Some(o)) => o != Greater,
        (CompareOp::Eq, Some(o)) => o == Equal,
        (CompareOp::Ne, Some(o)) => o != Equal,
    })
}

/// `None` is an evaluation error.
fn eval(e: &Expression, b: &Binding) -> Option<V> {
    Some(match e {
        Expression::Variable(v) => V::T(b.get(v)?.clone()),
        Expression::Constant(t) => V::T(t.clone()),
        Expression::Negate(a) => V::Num(-num(&eval(a, b)?)?),
        Expression::Abs(a) => V::Num(num(&eval(a, b)?)?.abs()),
        Expression::Arithmetic(op, l, r) => {
            let (x, y) = (num(&eval(l, b)?)?, num(&eval(r, b)?)?);
            V::Num(match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div if y == 0.0 => return None,
                ArithOp::Div => x / y,
            })
        }
        Expression::Compare(op, l, r) => V::Bool(cmp(*op, &eval(l, b)?, &eval(r, b)?)?),
        Expression::If(c, t, f) => {
            if ebv(&eval(c, b)?)? {
                eval(t, b)?
            } else {
                eval(f, b)?
            }
        }
    })
}

fn all_terms(g: &Graph) -> Vec<Term> {
    let mut terms = BTreeSet::new();
    for t in g.iter() {
        terms.insert(t.subject().clone());
        terms.insert(t.predicate().clone());
        terms.insert(t.object().clone());
    }
    terms.into_iter().collect()
}

fn instantiate(pt: &PatternTerm, b: &Binding) -> Term {
    match pt {
        PatternTerm::Term(t) => t.clone(),
        PatternTerm::Variable(v) => b[v].clone(),
    }
}

/// Projected solutions, sorted (the engine's order is checked separately).
pub fn solutions(q: &SparqlQuery, g: &Graph, this: &Term) -> Vec<Binding> {
    let vars: Vec<String> = q
        .patterns()
        .flat_map(|p| p.variables().map(str::to_string).collect::<Vec<_>>())
        .filter(|v| v != "this")
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let domain = all_terms(g);
    let mut out = Vec::new();
    let mut idx = vec![0usize; vars.len()];
    if !vars.is_empty() && domain.is_empty() {
        return out;
    }
    'outer: loop {
        let mut b = Binding::new();
        b.insert("this".into(), this.clone());
        for (v, &i) in vars.iter().zip(&idx) {
            b.insert(v.clone(), domain[i].clone());
        }
        let matched = q.patterns().all(|p| {
            let (s, pr, o) = (
                instantiate(&p.subject, &b),
                instantiate(&p.predicate, &b),
                instantiate(&p.object, &b),
            );
            Triple::try_new(s, pr, o).map(|t| g.contains(&t)).unwrap_or(false)
        });
        if matched {
            let mut keep = true;
            for c in q.clauses() {
                match c {
                    ClauseItem::Pattern(_) => {}
                    ClauseItem::Bind(e, v) => match eval(e, &b) {
                        Some(val) => {
                            b.insert(v.clone(), to_term(val));
                        }
                        None => {
                            keep = false;
                            break;
                        }
                    },
                    ClauseItem::Filter(e) => {
                        if eval(e, &b).and_then(|v| ebv(&v)) != Some(true) {
                            keep = false;
                            break;
                        }
                    }
                }
            }
            if keep {
                out.push(
                    q.select_vars()
                        .iter()
                        .filter_map(|v| b.get(v).map(|t| (v.clone(), t.clone())))
                        .collect(),
                );
            }
        }
        // Odometer increment over the assignment indices.
        for k in 0..idx.len() {
            idx[k] += 1;
            if idx[k] < domain.len() {
                continue 'outer;
            }
            idx[k] = 0;
        }
        break;
    }
    out.sort();
    out
}
