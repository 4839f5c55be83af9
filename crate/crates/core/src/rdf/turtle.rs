//! Turtle reader for the subset used by evidence, shape and report documents.
//!
//! Supported: `@prefix`/`PREFIX`, IRIs, prefixed names, `a`, string literals
//! in all four quote styles, `^^` datatypes, language tags, integer/decimal/
//! double shorthand, booleans, `_:label` and `[ ... ]` blank nodes, `;` and
//! `,` lists. Collections and base IRIs are rejected.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use thiserror::Error;

use super::{is_absolute_iri, Graph, Literal, Term, Triple};
use crate::vocab;

static BLANK_COUNTER: AtomicU64 = AtomicU64::new(0);

/// A fresh blank node label, unique for the lifetime of the process.
pub(crate) fn fresh_blank() -> Term {
    let n = BLANK_COUNTER.fetch_add(1, Ordering::Relaxed);
    Term::BlankNode(format!("b{n}"))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct SyntaxError {
    pub line: usize,
    pub column: usize,
    pub reason: String,
}

impl fmt::Display for SyntaxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "syntax error at line {}, column {}: {}",
            self.line, self.column, self.reason
        )
    }
}

pub fn parse_turtle(source: &str) -> Result<Graph, SyntaxError> {
    let mut parser = Parser {
        chars: source.chars().collect(),
        pos: 0,
        line: 1,
        column: 1,
        graph: Graph::new(),
        labels: HashMap::new(),
    };
    parser.document()?;
    Ok(parser.graph)
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    line: usize,
    column: usize,
    graph: Graph,
    labels: HashMap<String, Term>,
}

type PResult<T> = Result<T, SyntaxError>;

fn is_name_start(c: char) -> bool {
    c.is_alphabetic() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || matches!(c, '_' | '-' | '\u{00B7}')
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, reason: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line: self.line,
            column: self.column,
            reason: reason.into(),
        }
    }

    fn error_at(&self, line: usize, column: usize, reason: impl Into<String>) -> SyntaxError {
        SyntaxError {
            line,
            column,
            reason: reason.into(),
        }
    }

    fn starts_with(&self, s: &str) -> bool {
        s.chars().enumerate().all(|(i, c)| self.peek_at(i) == Some(c))
    }

    fn starts_with_keyword(&self, kw: &str) -> bool {
        let n = kw.chars().count();
        kw.chars()
            .enumerate()
            .all(|(i, c)| self.peek_at(i).is_some_and(|p| p.eq_ignore_ascii_case(&c)))
            && !self.peek_at(n).is_some_and(|c| is_name_char(c) || c == ':')
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.peek() {
                    if c == '\n' {
                        break;
                    }
                    self.bump();
                }
            } else {
                break;
            }
        }
    }

    fn expect(&mut self, c: char) -> PResult<()> {
        self.skip_ws();
        match self.peek() {
            Some(p) if p == c => {
                self.bump();
                Ok(())
            }
            Some(p) => Err(self.error(format!("expected '{c}', found '{p}'"))),
            None => Err(self.error(format!("expected '{c}', found end of input"))),
        }
    }

    fn document(&mut self) -> PResult<()> {
        loop {
            self.skip_ws();
            if self.peek().is_none() {
                return Ok(());
            }
            self.statement()?;
        }
    }

    fn statement(&mut self) -> PResult<()> {
        if self.starts_with("@prefix") {
            for _ in 0.."@prefix".len() {
                self.bump();
            }
            self.prefix_body()?;
            return self.expect('.');
        }
        if self.starts_with("@base") || self.starts_with_keyword("BASE") {
            return Err(self.error("base IRIs are not supported"));
        }
        if self.starts_with_keyword("PREFIX") {
            for _ in 0.."PREFIX".len() {
                self.bump();
            }
            return self.prefix_body();
        }
        self.triples()?;
        self.expect('.')
    }

    fn prefix_body(&mut self) -> PResult<()> {
        self.skip_ws();
        let mut prefix = String::new();
        if self.peek().is_some_and(is_name_start) {
            prefix = self.prefix_label();
        }
        if self.peek() != Some(':') {
            return Err(self.error("expected prefix label ending in ':'"));
        }
        self.bump();
        self.skip_ws();
        let ns = self.iriref()?;
        self.graph.bind_prefix(prefix, ns);
        Ok(())
    }

    fn prefix_label(&mut self) -> String {
        let mut label = String::new();
        while let Some(c) = self.peek() {
            if is_name_char(c) || (c == '.' && self.peek_at(1).is_some_and(is_name_char)) {
                label.push(c);
                self.bump();
            } else {
                break;
            }
        }
        label
    }

    fn triples(&mut self) -> PResult<()> {
        self.skip_ws();
        if self.peek() == Some('[') {
            let subject = self.blank_property_list()?;
            self.skip_ws();
            if self.peek() == Some('.') {
                return Ok(());
            }
            return self.predicate_object_list(&subject);
        }
        let subject = self.subject()?;
        self.predicate_object_list(&subject)
    }

    fn subject(&mut self) -> PResult<Term> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(self.labelled_blank()),
            Some('(') => Err(self.error("collections are not supported")),
            Some('"') | Some('\'') => Err(self.error("a literal cannot be a subject")),
            Some(c) if is_name_start(c) || c == ':' => self.prefixed_name().map(Term::Iri),
            Some(c) => Err(self.error(format!("unexpected '{c}' where a subject was expected"))),
            None => Err(self.error("unexpected end of input, expected a subject")),
        }
    }

    fn predicate_object_list(&mut self, subject: &Term) -> PResult<()> {
        loop {
            let predicate = self.verb()?;
            self.object_list(subject, &predicate)?;
            self.skip_ws();
            if self.peek() != Some(';') {
                return Ok(());
            }
            while self.peek() == Some(';') {
                self.bump();
                self.skip_ws();
            }
            if matches!(self.peek(), Some('.') | Some(']') | None) {
                return Ok(());
            }
        }
    }

    fn verb(&mut self) -> PResult<Term> {
        self.skip_ws();
        if self.peek() == Some('a') && !self.peek_at(1).is_some_and(|c| is_name_char(c) || c == ':' || c == '.')
        {
            self.bump();
            return Ok(Term::iri(vocab::RDF_TYPE));
        }
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some(c) if is_name_start(c) || c == ':' => self.prefixed_name().map(Term::Iri),
            Some(c) => Err(self.error(format!("unexpected '{c}' where a predicate was expected"))),
            None => Err(self.error("unexpected end of input, expected a predicate")),
        }
    }

    fn object_list(&mut self, subject: &Term, predicate: &Term) -> PResult<()> {
        loop {
            let object = self.object()?;
            self.graph
                .insert(Triple::new(subject.clone(), predicate.clone(), object));
            self.skip_ws();
            if self.peek() == Some(',') {
                self.bump();
            } else {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> PResult<Term> {
        self.skip_ws();
        match self.peek() {
            Some('<') => Ok(Term::Iri(self.iriref()?)),
            Some('_') if self.peek_at(1) == Some(':') => Ok(self.labelled_blank()),
            Some('[') => self.blank_property_list(),
            Some('(') => Err(self.error("collections are not supported")),
            Some('"') | Some('\'') => self.rdf_literal(),
            Some(c) if c.is_ascii_digit() || matches!(c, '+' | '-' | '.') => self.numeric(),
            Some(_) if self.starts_with_keyword("true") => {
                for _ in 0..4 {
                    self.bump();
                }
                Ok(Term::boolean(true))
            }
            Some(_) if self.starts_with_keyword("false") => {
                for _ in 0..5 {
                    self.bump();
                }
                Ok(Term::boolean(false))
            }
            Some(c) if is_name_start(c) || c == ':' => self.prefixed_name().map(Term::Iri),
            Some(c) => Err(self.error(format!("unexpected '{c}' where an object was expected"))),
            None => Err(self.error("unexpected end of input, expected an object")),
        }
    }

    fn blank_property_list(&mut self) -> PResult<Term> {
        self.expect('[')?;
        let node = fresh_blank();
        self.skip_ws();
        if self.peek() != Some(']') {
            self.predicate_object_list(&node)?;
        }
        self.expect(']')?;
        Ok(node)
    }

    fn labelled_blank(&mut self) -> Term {
        self.bump();
        self.bump();
        let label = self.prefix_label();
        self.labels.entry(label).or_insert_with(fresh_blank).clone()
    }

    fn iriref(&mut self) -> PResult<String> {
        let (line, column) = (self.line, self.column);
        if self.peek() != Some('<') {
            return Err(self.error("expected '<'"));
        }
        self.bump();
        let mut iri = String::new();
        loop {
            match self.bump() {
                Some('>') => break,
                Some(c) if c.is_whitespace() || matches!(c, '<' | '"' | '{' | '}' | '|' | '^' | '`') => {
                    return Err(self.error_at(line, column, format!("invalid character '{c}' in IRI")))
                }
                Some(c) => iri.push(c),
                None => return Err(self.error_at(line, column, "unterminated IRI")),
            }
        }
        if !is_absolute_iri(&iri) {
            return Err(self.error_at(line, column, format!("relative IRI <{iri}>")));
        }
        Ok(iri)
    }

    fn prefixed_name(&mut self) -> PResult<String> {
        let (line, column) = (self.line, self.column);
        let prefix = if self.peek() == Some(':') {
            String::new()
        } else {
            self.prefix_label()
        };
        if self.peek() != Some(':') {
            return Err(self.error_at(line, column, format!("unexpected bare word '{prefix}'")));
        }
        self.bump();
        let mut local = String::new();
        while let Some(c) = self.peek() {
            let continues = is_name_char(c)
                || c == ':'
                || (c == '.' && self.peek_at(1).is_some_and(|n| is_name_char(n) || n == ':'));
            if c == '\\' {
                self.bump();
                match self.bump() {
                    Some(e) => local.push(e),
                    None => return Err(self.error("dangling escape in prefixed name")),
                }
            } else if continues {
                local.push(c);
                self.bump();
            } else {
                break;
            }
        }
        match self.graph.prefixes().get(&prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(self.error_at(line, column, format!("undefined prefix '{prefix}:'"))),
        }
    }

    fn rdf_literal(&mut self) -> PResult<Term> {
        let lexical = self.string()?;
        if self.peek() == Some('@') {
            self.bump();
            let mut tag = String::new();
            while let Some(c) = self.peek() {
                if c.is_ascii_alphanumeric() || (c == '-' && !tag.is_empty()) {
                    tag.push(c);
                    self.bump();
                } else {
                    break;
                }
            }
            if tag.is_empty() {
                return Err(self.error("empty language tag"));
            }
            return Ok(Term::Literal(Literal::lang_string(lexical, tag)));
        }
        if self.starts_with("^^") {
            self.bump();
            self.bump();
            let datatype = match self.peek() {
                Some('<') => self.iriref()?,
                _ => self.prefixed_name()?,
            };
            return Ok(Term::literal(lexical, datatype));
        }
        Ok(Term::string(lexical))
    }

    fn string(&mut self) -> PResult<String> {
        let (line, column) = (self.line, self.column);
        let quote = self.bump().expect("caller checked quote");
        let long = self.peek() == Some(quote) && self.peek_at(1) == Some(quote);
        if long {
            self.bump();
            self.bump();
        }
        let mut out = String::new();
        loop {
            let Some(c) = self.bump() else {
                return Err(self.error_at(line, column, "unterminated string"));
            };
            if c == quote {
                if !long {
                    return Ok(out);
                }
                if self.peek() == Some(quote) && self.peek_at(1) == Some(quote) {
                    // Quotes immediately before the closing delimiter belong to the content.
                    while self.peek_at(2) == Some(quote) {
                        out.push(quote);
                        self.bump();
                    }
                    self.bump();
                    self.bump();
                    return Ok(out);
                }
                out.push(c);
            } else if c == '\\' {
                out.push(self.escape()?);
            } else if (c == '\n' || c == '\r') && !long {
                return Err(self.error_at(line, column, "unterminated string"));
            } else {
                out.push(c);
            }
        }
    }

    fn escape(&mut self) -> PResult<char> {
        match self.bump() {
            Some('t') => Ok('\t'),
            Some('n') => Ok('\n'),
            Some('r') => Ok('\r'),
            Some('b') => Ok('\u{8}'),
            Some('f') => Ok('\u{c}'),
            Some('"') => Ok('"'),
            Some('\'') => Ok('\''),
            Some('\\') => Ok('\\'),
            Some('u') => self.hex_escape(4),
            Some('U') => self.hex_escape(8),
            Some(c) => Err(self.error(format!("invalid escape '\\{c}'"))),
            None => Err(self.error("unterminated string")),
        }
    }

    fn hex_escape(&mut self, digits: usize) -> PResult<char> {
        let mut hex = String::new();
        for _ in 0..digits {
            match self.bump() {
                Some(c) if c.is_ascii_hexdigit() => hex.push(c),
                _ => return Err(self.error("malformed unicode escape")),
            }
        }
        u32::from_str_radix(&hex, 16)
            .ok()
            .and_then(char::from_u32)
            .ok_or_else(|| self.error("unicode escape is not a scalar value"))
    }

    fn numeric(&mut self) -> PResult<Term> {
        let (line, column) = (self.line, self.column);
        let malformed = |p: &Self, lex: &str| {
            p.error_at(line, column, format!("malformed numeric literal '{lex}'"))
        };
        let mut lex = String::new();
        if let Some(sign @ ('+' | '-')) = self.peek() {
            lex.push(sign);
            self.bump();
        }
        let mut int_digits = 0;
        while let Some(c) = self.peek().filter(char::is_ascii_digit) {
            lex.push(c);
            self.bump();
            int_digits += 1;
        }
        let mut frac_digits = 0;
        let mut has_dot = false;
        if self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()) {
            has_dot = true;
            lex.push('.');
            self.bump();
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                lex.push(c);
                self.bump();
                frac_digits += 1;
            }
        }
        if int_digits == 0 && frac_digits == 0 {
            if has_dot || self.peek().is_none() || !lex.is_empty() {
                return Err(malformed(self, &lex));
            }
            return Err(self.error("unexpected '.' where an object was expected"));
        }
        let mut has_exp = false;
        if let Some('e' | 'E') = self.peek() {
            has_exp = true;
            lex.push(self.bump().unwrap());
            if let Some(sign @ ('+' | '-')) = self.peek() {
                lex.push(sign);
                self.bump();
            }
            let mut exp_digits = 0;
            while let Some(c) = self.peek().filter(char::is_ascii_digit) {
                lex.push(c);
                self.bump();
                exp_digits += 1;
            }
            if exp_digits == 0 {
                return Err(malformed(self, &lex));
            }
        }
        let trailing_garbage = self.peek().is_some_and(|c| is_name_char(c))
            || (self.peek() == Some('.') && self.peek_at(1).is_some_and(|c| c.is_ascii_digit()));
        if trailing_garbage {
            while let Some(c) = self.peek().filter(|&c| is_name_char(c) || c == '.') {
                if c == '.' && !self.peek_at(1).is_some_and(is_name_char) {
                    break;
                }
                lex.push(c);
                self.bump();
            }
            return Err(malformed(self, &lex));
        }
        let datatype = if has_exp {
            vocab::XSD_DOUBLE
        } else if has_dot {
            vocab::XSD_DECIMAL
        } else {
            vocab::XSD_INTEGER
        };
        Ok(Term::literal(lex, datatype))
    }
}
