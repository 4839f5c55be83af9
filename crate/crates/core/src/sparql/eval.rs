use std::cmp::Ordering;

use super::{ArithOp, Binding, ClauseItem, CompareOp, Expression, PatternTerm, SparqlError, SparqlQuery, THIS};
use crate::rdf::{Graph, Term};
use crate::vocab;

/// Result of evaluating an expression: a term, an unmaterialized number
/// (from arithmetic) or a boolean (from comparisons).
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Term(Term),
    Numeric(f64),
    Boolean(bool),
}

impl Value {
    fn as_number(&self) -> Result<f64, SparqlError> {
        match self {
            Value::Numeric(n) => Ok(*n),
            Value::Term(Term::Literal(lit)) => lit.numeric_value().ok_or_else(|| {
                SparqlError::TypeMismatch(format!("{} is not numeric", Term::Literal(lit.clone())))
            }),
            Value::Term(t) => Err(SparqlError::TypeMismatch(format!("{t} is not numeric"))),
            Value::Boolean(b) => Err(SparqlError::TypeMismatch(format!("boolean {b} is not numeric"))),
        }
    }

    fn is_numeric(&self) -> bool {
        match self {
            Value::Numeric(_) => true,
            Value::Term(Term::Literal(lit)) => lit.numeric_value().is_some(),
            _ => false,
        }
    }

    fn as_boolean(&self) -> Option<bool> {
        match self {
            Value::Boolean(b) => Some(*b),
            Value::Term(Term::Literal(lit)) if lit.datatype() == vocab::XSD_BOOLEAN => {
                match lit.lexical() {
                    "true" | "1" => Some(true),
                    "false" | "0" => Some(false),
                    _ => None,
                }
            }
            _ => None,
        }
    }

    fn as_plain_string(&self) -> Option<&str> {
        match self {
            Value::Term(Term::Literal(lit)) if lit.datatype() == vocab::XSD_STRING => Some(lit.lexical()),
            _ => None,
        }
    }

    /// Effective boolean value.
    pub fn truth(&self) -> Result<bool, SparqlError> {
        if let Some(b) = self.as_boolean() {
            return Ok(b);
        }
        if self.is_numeric() {
            let n = self.as_number()?;
            return Ok(n != 0.0 && !n.is_nan());
        }
        if let Some(s) = self.as_plain_string() {
            return Ok(!s.is_empty());
        }
        Err(SparqlError::TypeMismatch(format!("{self:?} has no boolean value")))
    }

    pub fn into_term(self) -> Term {
        match self {
            Value::Term(t) => t,
            Value::Numeric(n) => Term::double(n),
            Value::Boolean(b) => Term::boolean(b),
        }
    }
}

/// Evaluates `expr` under `binding`. `IF` evaluates only the selected branch.
pub fn eval_expression(expr: &Expression, binding: &Binding) -> Result<Value, SparqlError> {
    match expr {
        Expression::Variable(v) => binding
            .get(v)
            .cloned()
            .map(Value::Term)
            .ok_or_else(|| SparqlError::UnboundVariable(v.clone())),
        Expression::Constant(t) => Ok(Value::Term(t.clone())),
        Expression::Negate(a) => Ok(Value::Numeric(-eval_expression(a, binding)?.as_number()?)),
        Expression::Abs(a) => Ok(Value::Numeric(eval_expression(a, binding)?.as_number()?.abs())),
        Expression::Arithmetic(op, a, b) => {
            let x = eval_expression(a, binding)?.as_number()?;
            let y = eval_expression(b, binding)?.as_number()?;
            let r = match op {
                ArithOp::Add => x + y,
                ArithOp::Sub => x - y,
                ArithOp::Mul => x * y,
                ArithOp::Div if y == 0.0 => {
                    return Err(SparqlError::TypeMismatch("division by zero".into()))
                }
                ArithOp::Div => x / y,
            };
            Ok(Value::Numeric(r))
        }
        Expression::Compare(op, a, b) => {
            let x = eval_expression(a, binding)?;
            let y = eval_expression(b, binding)?;
            compare(*op, &x, &y).map(Value::Boolean)
        }
        Expression::If(c, t, e) => {
            if eval_expression(c, binding)?.truth()? {
                eval_expression(t, binding)
            } else {
                eval_expression(e, binding)
            }
        }
    }
}

fn compare(op: CompareOp, x: &Value, y: &Value) -> Result<bool, SparqlError> {
    let ordering = if x.is_numeric() && y.is_numeric() {
        x.as_number()?.partial_cmp(&y.as_number()?)
    } else if let (Some(a), Some(b)) = (x.as_boolean(), y.as_boolean()) {
        Some(a.cmp(&b))
    } else if let (Some(a), Some(b)) = (x.as_plain_string(), y.as_plain_string()) {
        Some(a.cmp(b))
    } else {
        return match op {
            CompareOp::Eq | CompareOp::Ne => {
                let same = match (x, y) {
                    (Value::Term(a), Value::Term(b)) => a == b,
                    _ => false,
                };
                Ok(same == (op == CompareOp::Eq))
            }
            _ => Err(SparqlError::TypeMismatch(format!(
                "cannot order {x:?} against {y:?}"
            ))),
        };
    };
    // NaN compares false under every operator except `!=`.
    let Some(ord) = ordering else {
        return Ok(op == CompareOp::Ne);
    };
    Ok(match op {
        CompareOp::Gt => ord == Ordering::Greater,
        CompareOp::Lt => ord == Ordering::Less,
        CompareOp::Ge => ord != Ordering::Less,
        CompareOp::Le => ord != Ordering::Greater,
        CompareOp::Eq => ord == Ordering::Equal,
        CompareOp::Ne => ord != Ordering::Equal,
    })
}

/// A solution dropped because a BIND or FILTER expression raised an error.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub clause: usize,
    pub binding: Binding,
    pub error: SparqlError,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Evaluation {
    /// Solutions projected onto the SELECT variables, in evaluation order.
    pub solutions: Vec<Binding>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Evaluates `query` over `graph` with `$this` pre-bound to `this`.
///
/// Triple patterns are joined nested-loop in the order written; each BIND
/// and FILTER applies to the solutions accumulated so far. A solution whose
/// BIND or FILTER expression errors is dropped and recorded as a diagnostic.
pub fn evaluate(query: &SparqlQuery, graph: &Graph, this: &Term) -> Evaluation {
    let mut solutions = vec![Binding::from([(THIS.to_string(), this.clone())])];
    let mut diagnostics = Vec::new();
    for (idx, clause) in query.clauses().iter().enumerate() {
        let mut next = Vec::new();
        match clause {
            ClauseItem::Pattern(pattern) => {
                for sol in &solutions {
                    let resolve = |pt: &PatternTerm| match pt {
                        PatternTerm::Term(t) => Some(t.clone()),
                        PatternTerm::Variable(v) => sol.get(v).cloned(),
                    };
                    let (s, p, o) = (
                        resolve(&pattern.subject),
                        resolve(&pattern.predicate),
                        resolve(&pattern.object),
                    );
                    for t in graph.triples_matching(s.as_ref(), p.as_ref(), o.as_ref()) {
                        let mut extended = sol.clone();
                        let consistent = [
                            (&pattern.subject, t.subject()),
                            (&pattern.predicate, t.predicate()),
                            (&pattern.object, t.object()),
                        ]
                        .into_iter()
                        .all(|(pt, term)| match pt {
                            PatternTerm::Term(_) => true,
                            PatternTerm::Variable(v) => match extended.get(v) {
                                Some(existing) => existing == term,
                                None => {
                                    extended.insert(v.clone(), term.clone());
                                    true
                                }
                            },
                        });
                        if consistent {
                            next.push(extended);
                        }
                    }
                }
            }
            ClauseItem::Bind(expr, var) => {
                for mut sol in solutions {
                    match eval_expression(expr, &sol) {
                        Ok(v) => {
                            sol.insert(var.clone(), v.into_term());
                            next.push(sol);
                        }
                        Err(error) => diagnostics.push(Diagnostic {
                            clause: idx,
                            binding: sol,
                            error,
                        }),
                    }
                }
            }
            ClauseItem::Filter(expr) => {
                for sol in solutions {
                    match eval_expression(expr, &sol).and_then(|v| v.truth()) {
                        Ok(true) => next.push(sol),
                        Ok(false) => {}
                        Err(error) => diagnostics.push(Diagnostic {
                            clause: idx,
                            binding: sol,
                            error,
                        }),
                    }
                }
            }
        }
        solutions = next;
    }
    let solutions = solutions
        .into_iter()
        .map(|sol| {
            query
                .select_vars()
                .iter()
                .filter_map(|v| sol.get(v).map(|t| (v.clone(), t.clone())))
                .collect()
        })
        .collect();
    Evaluation {
        solutions,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::parse_turtle;
    use crate::sparql::parse_sparql;

    fn num(lex: &str) -> Term {
        let dt = if lex.contains('.') {
            vocab::XSD_DECIMAL
        } else {
            vocab::XSD_INTEGER
        };
        Term::literal(lex, dt)
    }

    fn binding(pairs: &[(&str, Term)]) -> Binding {
        pairs.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()
    }

    fn expr(text: &str) -> Expression {
        let q = parse_sparql(&format!(
            "SELECT $this WHERE {{ $this ex:a ?a ; ex:b ?b ; ex:x ?x . FILTER({text}) }}"
        ))
        .unwrap();
        match q.clauses().last().unwrap() {
            ClauseItem::Filter(e) => e.clone(),
            _ => unreachable!(),
        }
    }

    #[test]
    fn guarded_division_short_circuits() {
        let b = binding(&[("x", num("5"))]);
        let v = eval_expression(&expr("IF(0 = 0, 0, ?x / 0)"), &b).unwrap();
        assert_eq!(v.as_number().unwrap(), 0.0);
        let err = eval_expression(&expr("?x / 0"), &b).unwrap_err();
        assert!(matches!(err, SparqlError::TypeMismatch(_)));
    }

    #[test]
    fn disparity_ratio() {
        let b = binding(&[("a", num("110.0")), ("b", num("120.0"))]);
        let v = eval_expression(&expr("ABS(?a - ?b) / ?b"), &b).unwrap();
        assert!((v.as_number().unwrap() - 10.0 / 120.0).abs() < 1e-12);
    }

    #[test]
    fn max_via_if_returns_the_term() {
        let b = binding(&[("a", num("120.0")), ("b", num("110.0"))]);
        let v = eval_expression(&expr("IF(?a > ?b, ?a, ?b)"), &b).unwrap();
        assert_eq!(v, Value::Term(num("120.0")));
    }

    #[test]
    fn numeric_value_equality_across_datatypes() {
        let b = binding(&[("a", num("120.0")), ("b", num("120"))]);
        assert_eq!(eval_expression(&expr("?a = ?b"), &b).unwrap(), Value::Boolean(true));
    }

    #[test]
    fn abs_of_string_is_type_mismatch() {
        let b = binding(&[("a", Term::string("high"))]);
        assert!(matches!(
            eval_expression(&expr("ABS(?a)"), &b),
            Err(SparqlError::TypeMismatch(_))
        ));
    }

    #[test]
    fn strict_inequality_boundary() {
        let g = parse_turtle("@prefix ex: <http://example.org/okb#> . ex:d ex:p 1.0 .").unwrap();
        let q = parse_sparql("SELECT $this WHERE { $this ex:p ?v . FILTER(?v > 1.0) }").unwrap();
        let d = Term::iri(format!("{}d", vocab::EX));
        assert!(evaluate(&q, &g, &d).solutions.is_empty());
    }

    #[test]
    fn filter_errors_drop_solution_and_record_diagnostic() {
        let g = parse_turtle(
            "@prefix ex: <http://example.org/okb#> . ex:d ex:p 2.0, \"oops\" .",
        )
        .unwrap();
        let q = parse_sparql("SELECT $this ?v WHERE { $this ex:p ?v . FILTER(ABS(?v) > 1) }").unwrap();
        let d = Term::iri(format!("{}d", vocab::EX));
        let ev = evaluate(&q, &g, &d);
        assert_eq!(ev.solutions.len(), 1);
        assert_eq!(ev.diagnostics.len(), 1);
        assert_eq!(ev.diagnostics[0].clause, 1);
    }

    #[test]
    fn repeated_variable_must_agree() {
        let g = parse_turtle(
            "@prefix ex: <http://example.org/okb#> . ex:d ex:p ex:d . ex:e ex:p ex:d .",
        )
        .unwrap();
        let q = parse_sparql("SELECT $this ?x WHERE { ?x ex:p ?x }").unwrap();
        let d = Term::iri(format!("{}d", vocab::EX));
        let ev = evaluate(&q, &g, &d);
        assert_eq!(ev.solutions.len(), 1);
        assert_eq!(ev.solutions[0]["x"], d);
    }
}
