//! Reader for the restricted YAML used by IR files: a top-level sequence of
//! flat mappings whose values are scalars. Supports plain, single- and
//! double-quoted scalars, `|` / `|-` literal blocks, comments and `[]`.
//! Anchors, flow mappings and nesting are rejected.

use std::collections::BTreeMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("YAML error at line {line}: {reason}")]
pub struct YamlError {
    pub line: usize,
    pub reason: String,
}

/// One mapping, with the 1-based line where it starts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mapping {
    pub line: usize,
    pub entries: BTreeMap<String, String>,
}

fn err(line: usize, reason: impl Into<String>) -> YamlError {
    YamlError {
        line,
        reason: reason.into(),
    }
}

fn indent_of(line: &str) -> usize {
    line.len() - line.trim_start_matches(' ').len()
}

fn is_blank_or_comment(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

pub fn parse_sequence(text: &str) -> Result<Vec<Mapping>, YamlError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut out: Vec<Mapping> = Vec::new();
    let mut key_indent: Option<usize> = None;
    let mut i = 0;
    while i < lines.len() {
        let raw = lines[i];
        let lineno = i + 1;
        if raw[..raw.len() - raw.trim_start().len()].contains('\t') {
            return Err(err(lineno, "tabs are not allowed for indentation"));
        }
        if is_blank_or_comment(raw) || raw.trim() == "---" {
            i += 1;
            continue;
        }
        let indent = indent_of(raw);
        let body = &raw[indent..];
        if out.is_empty() && body.trim() == "[]" {
            if lines[i + 1..].iter().any(|l| !is_blank_or_comment(l)) {
                return Err(err(lineno, "content after empty sequence"));
            }
            return Ok(out);
        }
        let entry_text = if indent == 0 {
            let Some(rest) = body.strip_prefix('-') else {
                return Err(err(lineno, "expected a sequence item starting with '-'"));
            };
            if !(rest.is_empty() || rest.starts_with(' ')) {
                return Err(err(lineno, "expected a space after '-'"));
            }
            out.push(Mapping {
                line: lineno,
                entries: BTreeMap::new(),
            });
            let trimmed = rest.trim_start();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                key_indent = None;
                i += 1;
                continue;
            }
            key_indent = Some(indent + 1 + (rest.len() - trimmed.len()));
            trimmed
        } else {
            let Some(current) = out.last() else {
                return Err(err(lineno, "expected a top-level sequence"));
            };
            let expected = *key_indent.get_or_insert(indent);
            if indent != expected {
                return Err(err(
                    lineno,
                    format!("inconsistent indentation in record starting at line {}", current.line),
                ));
            }
            body
        };
        let (key, value) = split_key(entry_text).ok_or_else(|| err(lineno, "expected 'key: value'"))?;
        let value_text = value.trim();
        let (value, consumed) = if let Some(style) = value_text.strip_prefix('|') {
            let keep_trailing = match style.split('#').next().unwrap_or("").trim() {
                "" => true,
                "-" => false,
                other => return Err(err(lineno, format!("unsupported block scalar header '|{other}'"))),
            };
            block_scalar(&lines[i + 1..], key_indent.unwrap_or(indent), keep_trailing)
        } else {
            (scalar(value_text, lineno)?, 0)
        };
        let map = &mut out.last_mut().expect("record exists").entries;
        if map.insert(key.to_string(), value).is_some() {
            return Err(err(lineno, format!("duplicate key '{key}'")));
        }
        i += 1 + consumed;
    }
    Ok(out)
}

fn split_key(text: &str) -> Option<(&str, &str)> {
    let colon = text.find(':')?;
    let key = &text[..colon];
    let rest = &text[colon + 1..];
    let valid = !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    (valid && (rest.is_empty() || rest.starts_with(' '))).then_some((key, rest))
}

/// Collects lines indented deeper than `parent`; returns the text and the line count consumed.
fn block_scalar(lines: &[&str], parent: usize, keep_trailing: bool) -> (String, usize) {
    let mut taken = 0;
    let mut body: Vec<&str> = Vec::new();
    let mut block_indent = None;
    for line in lines {
        if line.trim().is_empty() {
            body.push("");
            taken += 1;
            continue;
        }
        let ind = indent_of(line);
        if ind <= parent {
            break;
        }
        let bi = *block_indent.get_or_insert(ind);
        body.push(if ind >= bi { &line[bi..] } else { line.trim_start() });
        taken += 1;
    }
    // Trailing blank lines belong to whatever follows.
    while body.last() == Some(&"") {
        body.pop();
        taken -= 1;
    }
    let mut text = body.join("\n");
    if keep_trailing && !text.is_empty() {
        text.push('\n');
    }
    (text, taken)
}

fn scalar(text: &str, line: usize) -> Result<String, YamlError> {
    if let Some(rest) = text.strip_prefix('"') {
        let mut out = String::new();
        let mut chars = rest.chars();
        while let Some(c) = chars.next() {
            match c {
                '"' => return trailing(chars.as_str(), line).map(|_| out),
                '\\' => match chars.next() {
                    Some('n') => out.push('\n'),
                    Some('t') => out.push('\t'),
                    Some('"') => out.push('"'),
                    Some('\\') => out.push('\\'),
                    Some(other) => return Err(err(line, format!("unsupported escape '\\{other}'"))),
                    None => break,
                },
                c => out.push(c),
            }
        }
        return Err(err(line, "unterminated double-quoted scalar"));
    }
    if let Some(rest) = text.strip_prefix('\'') {
        let mut out = String::new();
        let mut chars = rest.chars().peekable();
        while let Some(c) = chars.next() {
            if c == '\'' {
                if chars.peek() == Some(&'\'') {
                    chars.next();
                    out.push('\'');
                    continue;
                }
                return trailing(&chars.collect::<String>(), line).map(|_| out);
            }
            out.push(c);
        }
        return Err(err(line, "unterminated single-quoted scalar"));
    }
    let plain = match text.find(" #") {
        Some(pos) => text[..pos].trim_end(),
        None if text.starts_with('#') => "",
        None => text,
    };
    if let Some(c) = plain.chars().next() {
        if matches!(c, '&' | '*' | '!' | '{' | '[' | '>' | '@' | '`') {
            return Err(err(line, format!("unsupported YAML construct starting with '{c}'")));
        }
    }
    Ok(plain.to_string())
}

fn trailing(rest: &str, line: usize) -> Result<(), YamlError> {
    let rest = rest.trim();
    if rest.is_empty() || rest.starts_with('#') {
        Ok(())
    } else {
        Err(err(line, format!("unexpected text after quoted scalar: '{rest}'")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_documents() {
        assert!(parse_sequence("").unwrap().is_empty());
        assert!(parse_sequence("# nothing\n[]\n").unwrap().is_empty());
    }

    #[test]
    fn flat_records() {
        let text = "# header\n- obligation_id: A1\n  message: \"Needs a log.\" # trailing\n\n- obligation_id: 'B''s'\n  min_count: 2\n";
        let recs = parse_sequence(text).unwrap();
        assert_eq!(recs.len(), 2);
        assert_eq!(recs[0].entries["message"], "Needs a log.");
        assert_eq!(recs[1].entries["obligation_id"], "B's");
        assert_eq!(recs[1].entries["min_count"], "2");
        assert_eq!(recs[1].line, 5);
    }

    #[test]
    fn literal_block_keeps_relative_indentation() {
        let text = "- id: x\n  q: |\n    SELECT $this WHERE {\n      $this ?p ?o .\n    }\n  next: y\n";
        let recs = parse_sequence(text).unwrap();
        assert_eq!(recs[0].entries["q"], "SELECT $this WHERE {\n  $this ?p ?o .\n}\n");
        assert_eq!(recs[0].entries["next"], "y");
        let strip = parse_sequence("- q: |-\n    a\n    b\n").unwrap();
        assert_eq!(strip[0].entries["q"], "a\nb");
    }

    #[test]
    fn rejects_nesting_and_anchors() {
        assert!(parse_sequence("- a: &x 1\n").is_err());
        assert!(parse_sequence("- a: {b: 1}\n").is_err());
        assert!(parse_sequence("a: 1\n").is_err());
        let e = parse_sequence("- a: 1\n  a: 2\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.reason.contains("duplicate key"));
        assert!(parse_sequence("- a: 1\n    b: 2\n").is_err());
    }
}
