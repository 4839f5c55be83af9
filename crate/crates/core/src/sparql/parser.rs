use std::collections::{BTreeMap, BTreeSet};

use super::{
    ArithOp, ClauseItem, CompareOp, Expression, PatternTerm, SparqlError, SparqlQuery,
    TriplePattern, THIS,
};
use crate::rdf::{is_absolute_iri, Literal, Term};
use crate::vocab;

/// Parses with the standard prefixes (`ex`, `prov`, `rdf`, `rdfs`, `sh`, `xsd`) in scope.
pub fn parse_sparql(text: &str) -> Result<SparqlQuery, SparqlError> {
    let prefixes = vocab::standard_prefixes()
        .into_iter()
        .map(|(p, ns)| (p.to_string(), ns.to_string()))
        .collect();
    parse_sparql_with_prefixes(text, &prefixes)
}

/// Parses with `prefixes` in scope; `PREFIX` declarations in the text override them.
pub fn parse_sparql_with_prefixes(
    text: &str,
    prefixes: &BTreeMap<String, String>,
) -> Result<SparqlQuery, SparqlError> {
    let tokens = lex(text)?;
    if let Some(t) = tokens.iter().find(|t| {
        matches!(&t.tok, Tok::Word(w) if !SUPPORTED_WORDS.contains(&w.to_ascii_uppercase().as_str()))
    }) {
        let Tok::Word(w) = &t.tok else { unreachable!() };
        return Err(SparqlError::UnsupportedKeyword {
            keyword: w.to_ascii_uppercase(),
            line: t.line,
            column: t.column,
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        prefixes: prefixes.clone(),
    };
    let (select, clauses) = p.query()?;
    check_scoping(&select, &clauses)?;
    Ok(SparqlQuery {
        select,
        clauses,
        source: text.to_string(),
    })
}

fn check_scoping(select: &[String], clauses: &[ClauseItem]) -> Result<(), SparqlError> {
    let mut bound: BTreeSet<&str> = BTreeSet::from([THIS]);
    for clause in clauses {
        match clause {
            ClauseItem::Pattern(p) => bound.extend(p.variables()),
            ClauseItem::Bind(expr, var) => {
                if let Some(v) = expr.variables().into_iter().find(|v| !bound.contains(v)) {
                    return Err(SparqlError::UnboundVariable(v.to_string()));
                }
                if !bound.insert(var) {
                    return Err(SparqlError::AlreadyBound(var.clone()));
                }
            }
            ClauseItem::Filter(expr) => {
                if let Some(v) = expr.variables().into_iter().find(|v| !bound.contains(v)) {
                    return Err(SparqlError::UnboundVariable(v.to_string()));
                }
            }
        }
    }
    match select.iter().find(|v| !bound.contains(v.as_str())) {
        Some(v) => Err(SparqlError::UnboundVariable(v.clone())),
        None => Ok(()),
    }
}

const SUPPORTED_WORDS: &[&str] = &["SELECT", "WHERE", "BIND", "AS", "FILTER", "IF", "ABS", "PREFIX"];

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Var(String),
    Iri(String),
    PName(String, String),
    Number(String, &'static str),
    Str(String),
    Bool(bool),
    Word(String),
    A,
    Punct(&'static str),
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn syntax(line: usize, column: usize, reason: impl Into<String>) -> SparqlError {
    SparqlError::Syntax {
        line,
        column,
        reason: reason.into(),
    }
}

fn lex(text: &str) -> Result<Vec<Token>, SparqlError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    let advance = |i: &mut usize, line: &mut usize, col: &mut usize, to: usize| {
        while *i < to {
            if chars[*i] == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
            *i += 1;
        }
    };
    let is_name = |c: char| c.is_alphanumeric() || c == '_' || c == '-';
    while i < chars.len() {
        let c = chars[i];
        let (l, cl) = (line, col);
        if c.is_whitespace() {
            let to = i + 1;
            advance(&mut i, &mut line, &mut col, to);
            continue;
        }
        if c == '#' {
            while i < chars.len() && chars[i] != '\n' {
                let to = i + 1;
                advance(&mut i, &mut line, &mut col, to);
            }
            continue;
        }
        let push = |out: &mut Vec<Token>, tok: Tok| out.push(Token { tok, line: l, column: cl });
        match c {
            '?' | '$' => {
                let mut j = i + 1;
                while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                if j == i + 1 {
                    return Err(syntax(l, cl, "empty variable name"));
                }
                let name: String = chars[i + 1..j].iter().collect();
                advance(&mut i, &mut line, &mut col, j);
                push(&mut out, Tok::Var(name));
            }
            '<' if iri_end(&chars, i).is_some() => {
                let j = iri_end(&chars, i).unwrap();
                let iri: String = chars[i + 1..j].iter().collect();
                if !is_absolute_iri(&iri) {
                    return Err(syntax(l, cl, format!("relative IRI <{iri}>")));
                }
                advance(&mut i, &mut line, &mut col, j + 1);
                push(&mut out, Tok::Iri(iri));
            }
            '"' | '\'' => {
                let quote = c;
                let mut j = i + 1;
                let mut s = String::new();
                loop {
                    match chars.get(j) {
                        None | Some('\n') => return Err(syntax(l, cl, "unterminated string")),
                        Some(&q) if q == quote => break,
                        Some('\\') => {
                            let e = match chars.get(j + 1) {
                                Some('n') => '\n',
                                Some('t') => '\t',
                                Some('r') => '\r',
                                Some(&o @ ('"' | '\'' | '\\')) => o,
                                _ => return Err(syntax(l, cl, "invalid escape in string")),
                            };
                            s.push(e);
                            j += 2;
                        }
                        Some(&o) => {
                            s.push(o);
                            j += 1;
                        }
                    }
                }
                advance(&mut i, &mut line, &mut col, j + 1);
                push(&mut out, Tok::Str(s));
            }
            d if d.is_ascii_digit()
                || (d == '.' && chars.get(i + 1).is_some_and(|n| n.is_ascii_digit())) =>
            {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let mut datatype = vocab::XSD_INTEGER;
                if j < chars.len() && chars[j] == '.' && chars.get(j + 1).is_some_and(|n| n.is_ascii_digit()) {
                    datatype = vocab::XSD_DECIMAL;
                    j += 1;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
                if j < chars.len() && matches!(chars[j], 'e' | 'E') {
                    let mut k = j + 1;
                    if k < chars.len() && matches!(chars[k], '+' | '-') {
                        k += 1;
                    }
                    let start = k;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == start {
                        return Err(syntax(l, cl, "malformed numeric literal"));
                    }
                    datatype = vocab::XSD_DOUBLE;
                    j = k;
                }
                if j < chars.len() && (chars[j].is_alphabetic() || chars[j] == '_') {
                    return Err(syntax(l, cl, "malformed numeric literal"));
                }
                let lex: String = chars[i..j].iter().collect();
                advance(&mut i, &mut line, &mut col, j);
                push(&mut out, Tok::Number(lex, datatype));
            }
            w if w.is_alphabetic() || w == '_' || w == ':' => {
                let mut j = i;
                while j < chars.len() && is_name(chars[j]) {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                if j < chars.len() && chars[j] == ':' {
                    let mut k = j + 1;
                    while k < chars.len()
                        && (is_name(chars[k])
                            || (chars[k] == '.' && chars.get(k + 1).is_some_and(|n| is_name(*n))))
                    {
                        k += 1;
                    }
                    let local: String = chars[j + 1..k].iter().collect();
                    advance(&mut i, &mut line, &mut col, k);
                    push(&mut out, Tok::PName(word, local));
                } else {
                    advance(&mut i, &mut line, &mut col, j);
                    let tok = match word.as_str() {
                        "a" => Tok::A,
                        "true" => Tok::Bool(true),
                        "false" => Tok::Bool(false),
                        _ => Tok::Word(word),
                    };
                    push(&mut out, tok);
                }
            }
            _ => {
                let two: String = chars[i..(i + 2).min(chars.len())].iter().collect();
                let punct = match two.as_str() {
                    ">=" => Some(">="),
                    "<=" => Some("<="),
                    "!=" => Some("!="),
                    "&&" => Some("&&"),
                    "||" => Some("||"),
                    _ => None,
                };
                let punct = punct.or(match c {
                    '{' => Some("{"),
                    '}' => Some("}"),
                    '(' => Some("("),
                    ')' => Some(")"),
                    '.' => Some("."),
                    ';' => Some(";"),
                    ',' => Some(","),
                    '>' => Some(">"),
                    '<' => Some("<"),
                    '=' => Some("="),
                    '+' => Some("+"),
                    '-' => Some("-"),
                    '*' => Some("*"),
                    '/' => Some("/"),
                    '!' => Some("!"),
                    _ => None,
                });
                let Some(punct) = punct else {
                    return Err(syntax(l, cl, format!("unexpected character '{c}'")));
                };
                let to = i + punct.len();
                advance(&mut i, &mut line, &mut col, to);
                push(&mut out, Tok::Punct(punct));
            }
        }
    }
    Ok(out)
}

/// Index of the closing `>` if `chars[start]` opens an IRI reference.
fn iri_end(chars: &[char], start: usize) -> Option<usize> {
    let mut j = start + 1;
    while j < chars.len() {
        match chars[j] {
            '>' if j > start + 1 => return Some(j),
            c if c.is_whitespace() || matches!(c, '<' | '>' | '"' | '{' | '}' | '?' | '$' | '(' | ')') => {
                return None
            }
            _ => j += 1,
        }
    }
    None
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    prefixes: BTreeMap<String, String>,
}

type PResult<T> = Result<T, SparqlError>;

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn here(&self) -> (usize, usize) {
        match self.peek().or(self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn err(&self, reason: impl Into<String>) -> SparqlError {
        let (line, column) = self.here();
        syntax(line, column, reason)
    }

    fn unexpected(&self, wanted: &str) -> SparqlError {
        match self.peek() {
            Some(Token {
                tok: Tok::Word(w),
                line,
                column,
            }) => self.word_error(w, *line, *column, wanted),
            Some(t) => syntax(t.line, t.column, format!("expected {wanted}, found {}", describe(&t.tok))),
            None => self.err(format!("expected {wanted}, found end of query")),
        }
    }

    fn word_error(&self, word: &str, line: usize, column: usize, wanted: &str) -> SparqlError {
        let upper = word.to_ascii_uppercase();
        if SUPPORTED_WORDS.contains(&upper.as_str()) {
            syntax(line, column, format!("expected {wanted}, found {upper}"))
        } else {
            SparqlError::UnsupportedKeyword {
                keyword: upper,
                line,
                column,
            }
        }
    }

    fn is_word(&self, kw: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Word(w), .. }) if w.eq_ignore_ascii_case(kw))
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(self.peek(), Some(Token { tok: Tok::Punct(q), .. }) if *q == p)
    }

    fn expect_word(&mut self, kw: &str) -> PResult<()> {
        if self.is_word(kw) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(kw))
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.is_punct(p) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("'{p}'")))
        }
    }

    fn query(&mut self) -> PResult<(Vec<String>, Vec<ClauseItem>)> {
        while self.is_word("PREFIX") {
            self.pos += 1;
            let (prefix, local) = match self.next() {
                Some(Token {
                    tok: Tok::PName(p, l),
                    ..
                }) => (p, l),
                _ => return Err(self.err("expected prefix label after PREFIX")),
            };
            if !local.is_empty() {
                return Err(self.err("prefix label must end with ':'"));
            }
            match self.next() {
                Some(Token { tok: Tok::Iri(ns), .. }) => {
                    self.prefixes.insert(prefix, ns);
                }
                _ => return Err(self.err("expected namespace IRI after prefix label")),
            }
        }
        self.expect_word("SELECT")?;
        let mut select = Vec::new();
        while let Some(Token { tok: Tok::Var(v), .. }) = self.peek() {
            if select.contains(v) {
                return Err(self.err(format!("duplicate projected variable ?{v}")));
            }
            select.push(v.clone());
            self.pos += 1;
        }
        if select.is_empty() {
            return Err(self.unexpected("a projected variable"));
        }
        if !select.iter().any(|v| v == THIS) {
            return Err(self.err("SELECT must project $this"));
        }
        if self.is_word("WHERE") {
            self.pos += 1;
        }
        self.expect_punct("{")?;
        let mut clauses = Vec::new();
        loop {
            if self.is_punct("}") {
                self.pos += 1;
                break;
            }
            if self.is_word("BIND") {
                self.pos += 1;
                self.expect_punct("(")?;
                let expr = self.expression()?;
                self.expect_word("AS")?;
                let var = match self.next() {
                    Some(Token { tok: Tok::Var(v), .. }) => v,
                    _ => {
                        self.pos -= 1;
                        return Err(self.unexpected("a variable after AS"));
                    }
                };
                self.expect_punct(")")?;
                clauses.push(ClauseItem::Bind(expr, var));
            } else if self.is_word("FILTER") {
                self.pos += 1;
                self.expect_punct("(")?;
                let expr = self.expression()?;
                self.expect_punct(")")?;
                clauses.push(ClauseItem::Filter(expr));
            } else if self.peek().is_none() {
                return Err(self.err("unterminated group, expected '}'"));
            } else {
                self.triples_block(&mut clauses)?;
            }
            if self.is_punct(".") {
                self.pos += 1;
            }
        }
        if let Some(t) = self.peek() {
            if let Tok::Word(w) = &t.tok {
                return Err(self.word_error(w, t.line, t.column, "end of query"));
            }
            return Err(syntax(t.line, t.column, "trailing tokens after query"));
        }
        if clauses.is_empty() {
            return Err(self.err("query has no clauses"));
        }
        Ok((select, clauses))
    }

    fn triples_block(&mut self, clauses: &mut Vec<ClauseItem>) -> PResult<()> {
        let subject = self.pattern_term("a subject")?;
        if matches!(&subject, PatternTerm::Term(t) if t.is_literal()) {
            return Err(self.err("a literal cannot be a subject"));
        }
        loop {
            let predicate = if matches!(self.peek(), Some(Token { tok: Tok::A, .. })) {
                self.pos += 1;
                PatternTerm::Term(Term::iri(vocab::RDF_TYPE))
            } else {
                let p = self.pattern_term("a predicate")?;
                if matches!(&p, PatternTerm::Term(t) if !t.is_iri()) {
                    return Err(self.err("predicate must be an IRI or variable"));
                }
                p
            };
            loop {
                let object = self.pattern_term("an object")?;
                clauses.push(ClauseItem::Pattern(TriplePattern {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                }));
                if self.is_punct(",") {
                    self.pos += 1;
                } else {
                    break;
                }
            }
            if !self.is_punct(";") {
                return Ok(());
            }
            while self.is_punct(";") {
                self.pos += 1;
            }
            if self.is_punct(".") || self.is_punct("}") {
                return Ok(());
            }
        }
    }

    fn pattern_term(&mut self, wanted: &str) -> PResult<PatternTerm> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected(wanted));
        };
        let term = match tok.tok {
            Tok::Var(v) => {
                self.pos += 1;
                return Ok(PatternTerm::Variable(v));
            }
            Tok::Iri(_) | Tok::PName(..) | Tok::Number(..) | Tok::Str(_) | Tok::Bool(_) => {
                self.constant()?
            }
            _ => return Err(self.unexpected(wanted)),
        };
        Ok(PatternTerm::Term(term))
    }

    fn constant(&mut self) -> PResult<Term> {
        let tok = self.next().ok_or_else(|| self.err("unexpected end of query"))?;
        match tok.tok {
            Tok::Iri(iri) => Ok(Term::Iri(iri)),
            Tok::PName(prefix, local) => match self.prefixes.get(&prefix) {
                Some(ns) => Ok(Term::iri(format!("{ns}{local}"))),
                None => Err(syntax(tok.line, tok.column, format!("undefined prefix '{prefix}:'"))),
            },
            Tok::Number(lex, dt) => Ok(Term::literal(lex, dt)),
            Tok::Str(s) => Ok(Term::Literal(Literal::string(s))),
            Tok::Bool(b) => Ok(Term::boolean(b)),
            other => Err(syntax(tok.line, tok.column, format!("unexpected {}", describe(&other)))),
        }
    }

    fn expression(&mut self) -> PResult<Expression> {
        if self.is_punct("&&") || self.is_punct("||") || self.is_punct("!") {
            return Err(self.err("logical operators are not supported"));
        }
        let left = self.additive()?;
        let op = match self.peek() {
            Some(Token { tok: Tok::Punct(p), .. }) => match *p {
                ">" => Some(CompareOp::Gt),
                "<" => Some(CompareOp::Lt),
                ">=" => Some(CompareOp::Ge),
                "<=" => Some(CompareOp::Le),
                "=" => Some(CompareOp::Eq),
                "!=" => Some(CompareOp::Ne),
                "&&" | "||" => return Err(self.err("logical operators are not supported")),
                _ => None,
            },
            _ => None,
        };
        let Some(op) = op else {
            return Ok(left);
        };
        self.pos += 1;
        let right = self.additive()?;
        Ok(Expression::Compare(op, Box::new(left), Box::new(right)))
    }

    fn additive(&mut self) -> PResult<Expression> {
        let mut left = self.multiplicative()?;
        loop {
            let op = if self.is_punct("+") {
                ArithOp::Add
            } else if self.is_punct("-") {
                ArithOp::Sub
            } else {
                return Ok(left);
            };
            self.pos += 1;
            let right = self.multiplicative()?;
            left = Expression::Arithmetic(op, Box::new(left), Box::new(right));
        }
    }

    fn multiplicative(&mut self) -> PResult<Expression> {
        let mut left = self.unary()?;
        loop {
            let op = if self.is_punct("*") {
                ArithOp::Mul
            } else if self.is_punct("/") {
                ArithOp::Div
            } else {
                return Ok(left);
            };
            self.pos += 1;
            let right = self.unary()?;
            left = Expression::Arithmetic(op, Box::new(left), Box::new(right));
        }
    }

    fn unary(&mut self) -> PResult<Expression> {
        if self.is_punct("-") {
            self.pos += 1;
            return Ok(Expression::Negate(Box::new(self.unary()?)));
        }
        if self.is_punct("+") {
            self.pos += 1;
            return self.unary();
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expression> {
        let Some(tok) = self.peek().cloned() else {
            return Err(self.unexpected("an expression"));
        };
        match tok.tok {
            Tok::Punct("(") => {
                self.pos += 1;
                let e = self.expression()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Var(v) => {
                self.pos += 1;
                Ok(Expression::Variable(v))
            }
            Tok::Word(ref w) if w.eq_ignore_ascii_case("IF") => {
                self.pos += 1;
                self.expect_punct("(")?;
                let c = self.expression()?;
                self.expect_punct(",")?;
                let t = self.expression()?;
                self.expect_punct(",")?;
                let e = self.expression()?;
                self.expect_punct(")")?;
                Ok(Expression::If(Box::new(c), Box::new(t), Box::new(e)))
            }
            Tok::Word(ref w) if w.eq_ignore_ascii_case("ABS") => {
                self.pos += 1;
                self.expect_punct("(")?;
                let a = self.expression()?;
                self.expect_punct(")")?;
                Ok(Expression::Abs(Box::new(a)))
            }
            Tok::Iri(_) | Tok::PName(..) | Tok::Number(..) | Tok::Str(_) | Tok::Bool(_) => {
                Ok(Expression::Constant(self.constant()?))
            }
            _ => Err(self.unexpected("an expression")),
        }
    }
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Var(v) => format!("?{v}"),
        Tok::Iri(i) => format!("<{i}>"),
        Tok::PName(p, l) => format!("{p}:{l}"),
        Tok::Number(n, _) => n.clone(),
        Tok::Str(s) => format!("\"{s}\""),
        Tok::Bool(b) => b.to_string(),
        Tok::Word(w) => w.clone(),
        Tok::A => "'a'".to_string(),
        Tok::Punct(p) => format!("'{p}'"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const FAIRNESS_QUERY: &str = r#"SELECT $this WHERE {
      $this ex:allocatedGPUHoursGroupA ?a ;
            ex:allocatedGPUHoursGroupB ?b ;
            ex:fairnessThreshold       ?t .
      BIND(IF(?a > ?b, ?a, ?b) AS ?mx)
      BIND(IF(?mx = 0, 0, (ABS(?a - ?b) / ?mx)) AS ?ratio)
      FILTER(?ratio > ?t)
    }"#;

    #[test]
    fn fairness_query_structure() {
        let q = parse_sparql(FAIRNESS_QUERY).unwrap();
        assert_eq!(q.select_vars(), ["this"]);
        let kinds: Vec<&str> = q
            .clauses()
            .iter()
            .map(|c| match c {
                ClauseItem::Pattern(_) => "pattern",
                ClauseItem::Bind(..) => "bind",
                ClauseItem::Filter(_) => "filter",
            })
            .collect();
        assert_eq!(
            kinds,
            ["pattern", "pattern", "pattern", "bind", "bind", "filter"]
        );
        let subjects: BTreeSet<_> = q.patterns().map(|p| p.subject.clone()).collect();
        assert_eq!(subjects.len(), 1);
        assert_eq!(q.predicates().len(), 3);
        match &q.clauses()[4] {
            ClauseItem::Bind(Expression::If(..), v) => assert_eq!(v, "ratio"),
            other => panic!("unexpected clause {other:?}"),
        }
    }

    #[test]
    fn minimal_filter_query() {
        let q = parse_sparql("SELECT $this WHERE { $this ex:p ?v . FILTER(?v > 1.0) }").unwrap();
        assert_eq!(q.clauses().len(), 2);
        assert_eq!(
            q.clauses()[1],
            ClauseItem::Filter(Expression::Compare(
                CompareOp::Gt,
                Box::new(Expression::Variable("v".into())),
                Box::new(Expression::Constant(Term::literal("1.0", vocab::XSD_DECIMAL))),
            ))
        );
    }

    #[test]
    fn unsupported_keywords_are_named() {
        let err = parse_sparql("SELECT $this WHERE { $this ex:p ?v . OPTIONAL { $this ex:q ?w } }")
            .unwrap_err();
        match err {
            SparqlError::UnsupportedKeyword { keyword, .. } => assert_eq!(keyword, "OPTIONAL"),
            other => panic!("unexpected {other:?}"),
        }
        for (q, kw) in [
            ("SELECT DISTINCT $this WHERE { $this ex:p ?v }", "DISTINCT"),
            ("SELECT $this WHERE { { $this ex:p ?v } UNION { $this ex:q ?v } }", "UNION"),
            ("SELECT $this WHERE { $this ex:p ?v } GROUP BY $this", "GROUP"),
            ("SELECT $this WHERE { $this ex:p ?v FILTER(STR(?v) = \"x\") }", "STR"),
        ] {
            let err = parse_sparql(q).unwrap_err();
            assert!(err.to_string().contains(kw), "{q}: {err}");
        }
    }

    #[test]
    fn scoping_errors() {
        assert_eq!(
            parse_sparql("SELECT $this WHERE { $this ex:p ?v . FILTER(?w > 1) }").unwrap_err(),
            SparqlError::UnboundVariable("w".into())
        );
        assert_eq!(
            parse_sparql("SELECT $this WHERE { $this ex:p ?v . BIND(1 AS ?v) }").unwrap_err(),
            SparqlError::AlreadyBound("v".into())
        );
        assert_eq!(
            parse_sparql("SELECT $this ?z WHERE { $this ex:p ?v }").unwrap_err(),
            SparqlError::UnboundVariable("z".into())
        );
        assert!(parse_sparql("SELECT ?v WHERE { ?s ex:p ?v }").is_err());
    }

    #[test]
    fn sigils_are_normalized() {
        let a = parse_sparql("SELECT $this WHERE { ?this ex:p $v . FILTER($v > 1) }").unwrap();
        let b = parse_sparql("SELECT ?this WHERE { $this ex:p ?v . FILTER(?v > 1) }").unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn prefix_declarations_and_unknown_prefixes() {
        let q = parse_sparql(
            "PREFIX z: <http://z.org/>\nSELECT $this WHERE { $this z:p ?v }",
        )
        .unwrap();
        assert!(q.predicates().contains("http://z.org/p"));
        let err = parse_sparql("SELECT $this WHERE { $this nope:p ?v }").unwrap_err();
        assert!(err.to_string().contains("undefined prefix 'nope:'"));
    }

    #[test]
    fn operator_precedence() {
        let q = parse_sparql("SELECT $this WHERE { $this ex:p ?v . FILTER(1 + ?v * 2 - 3 >= -4) }")
            .unwrap();
        let ClauseItem::Filter(e) = &q.clauses()[1] else {
            panic!()
        };
        assert_eq!(e.to_string(), "(((1 + (?v * 2)) - 3) >= -4)");
    }
}
