//! JSONPath subset used for logical iterators: `$`, `.name`, `['name']`,
//! `["name"]`, `[*]`, `.*` and `[n]`. No filters, slices or recursive descent.

use std::fmt;

use serde_json::Value;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    Field(String),
    Wildcard,
    Index(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JsonPath {
    steps: Vec<Step>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid JSONPath at offset {offset}: {message}")]
pub struct JsonPathError {
    pub offset: usize,
    pub message: String,
}

fn err(offset: usize, message: impl Into<String>) -> JsonPathError {
    JsonPathError {
        offset,
        message: message.into(),
    }
}

impl JsonPath {
    pub fn root() -> Self {
        Self { steps: Vec::new() }
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn parse(expr: &str) -> Result<Self, JsonPathError> {
        let bytes = expr.as_bytes();
        let expr_trim = expr.trim();
        if expr_trim != expr {
            return Err(err(0, "surrounding whitespace"));
        }
        if bytes.first() != Some(&b'$') {
            return Err(err(0, "expected `$`"));
        }
        let mut steps = Vec::new();
        let mut i = 1;
        while i < bytes.len() {
            match bytes[i] {
                b'.' => {
                    i += 1;
                    if bytes.get(i) == Some(&b'.') {
                        return Err(err(i, "recursive descent is not supported"));
                    }
                    if bytes.get(i) == Some(&b'*') {
                        steps.push(Step::Wildcard);
                        i += 1;
                        continue;
                    }
                    let start = i;
                    while i < bytes.len() && !matches!(bytes[i], b'.' | b'[') {
                        i += 1;
                    }
                    if start == i {
                        return Err(err(start, "empty name after `.`"));
                    }
                    let name = &expr[start..i];
                    if name.contains([']', '\'', '"', '*', '?', '(', ')', '@', ' ']) {
                        return Err(err(start, format!("invalid name `{name}`")));
                    }
                    steps.push(Step::Field(name.to_string()));
                }
                b'[' => {
                    i += 1;
                    match bytes.get(i) {
                        Some(b'*') => {
                            if bytes.get(i + 1) != Some(&b']') {
                                return Err(err(i + 1, "expected `]`"));
                            }
                            steps.push(Step::Wildcard);
                            i += 2;
                        }
                        Some(&q @ (b'\'' | b'"')) => {
                            let start = i + 1;
                            let mut j = start;
                            let mut name = String::new();
                            loop {
                                match bytes.get(j) {
                                    None => return Err(err(start, "unterminated quoted name")),
                                    Some(&b'\\') => {
                                        let next = expr[j + 1..]
                                            .chars()
                                            .next()
                                            .ok_or_else(|| err(j, "dangling escape"))?;
                                        name.push(next);
                                        j += 1 + next.len_utf8();
                                    }
                                    Some(&c) if c == q => break,
                                    Some(_) => {
                                        let c = expr[j..].chars().next().expect("in bounds");
                                        name.push(c);
                                        j += c.len_utf8();
                                    }
                                }
                            }
                            if bytes.get(j + 1) != Some(&b']') {
                                return Err(err(j + 1, "expected `]`"));
                            }
                            steps.push(Step::Field(name));
                            i = j + 2;
                        }
                        Some(b'0'..=b'9') => {
                            let start = i;
                            while i < bytes.len() && bytes[i].is_ascii_digit() {
                                i += 1;
                            }
                            let index = expr[start..i]
                                .parse::<usize>()
                                .map_err(|_| err(start, "index out of range"))?;
                            if bytes.get(i) != Some(&b']') {
                                return Err(err(i, "expected `]`"));
                            }
                            steps.push(Step::Index(index));
                            i += 1;
                        }
                        _ => return Err(err(i, "unsupported bracket expression")),
                    }
                }
                _ => return Err(err(i, "expected `.` or `[`")),
            }
        }
        Ok(Self { steps })
    }

    /// All values selected by the path, in document order.
    pub fn select<'v>(&self, root: &'v Value) -> Vec<&'v Value> {
        let mut current = vec![root];
        for step in &self.steps {
            let mut next = Vec::new();
            for value in current {
                match (step, value) {
                    (Step::Field(name), Value::Object(map)) => next.extend(map.get(name)),
                    (Step::Index(i), Value::Array(items)) => next.extend(items.get(*i)),
                    (Step::Wildcard, Value::Array(items)) => next.extend(items.iter()),
                    (Step::Wildcard, Value::Object(map)) => next.extend(map.values()),
                    _ => {}
                }
            }
            current = next;
        }
        current
    }
}

impl fmt::Display for JsonPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("$")?;
        for step in &self.steps {
            match step {
                Step::Field(name) => {
                    f.write_str("[\"")?;
                    for c in name.chars() {
                        if matches!(c, '"' | '\\') {
                            f.write_str("\\")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str("\"]")?;
                }
                Step::Wildcard => f.write_str("[*]")?,
                Step::Index(i) => write!(f, "[{i}]")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn root_selects_document() {
        let doc = json!({"a": 1});
        let path = JsonPath::parse("$").unwrap();
        assert_eq!(path.select(&doc), vec![&doc]);
    }

    #[test]
    fn list_wildcard() {
        let doc = json!({"list": [{"a": 1}, {"a": 2}]});
        let path = JsonPath::parse("$.list[*]").unwrap();
        assert_eq!(path.select(&doc).len(), 2);
    }

    #[test]
    fn bracketed_and_indexed() {
        let doc = json!({"a b": [10, 20, {"c": "x"}]});
        assert_eq!(
            JsonPath::parse("$['a b'][2].c").unwrap().select(&doc),
            vec![&json!("x")]
        );
        assert_eq!(
            JsonPath::parse("$[\"a b\"][1]").unwrap().select(&doc),
            vec![&json!(20)]
        );
        assert!(JsonPath::parse("$.missing[*]").unwrap().select(&doc).is_empty());
    }

    #[test]
    fn rejects_unsupported_syntax() {
        for bad in ["", "a", "$..a", "$.", "$[?(@.a)]", "$[1:2]", "$['a'", "$.a[", " $"] {
            assert!(JsonPath::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn display_reparses() {
        let path = JsonPath::parse("$.a['b.c'][*][3]").unwrap();
        assert_eq!(JsonPath::parse(&path.to_string()).unwrap(), path);
    }
}
