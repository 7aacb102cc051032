use std::fmt;

use thiserror::Error;

use crate::ingest::DataItem;
use crate::mapping::template::{parse_template, Segment, TemplateError};
use crate::mapping::{is_absolute_iri, TermKind, TermMap, TermMapKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermType {
    Iri,
    Literal,
    Blank,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RdfTerm {
    pub kind: TermType,
    pub lexical: String,
}

impl RdfTerm {
    pub fn iri(lexical: impl Into<String>) -> Self {
        Self {
            kind: TermType::Iri,
            lexical: lexical.into(),
        }
    }

    pub fn literal(lexical: impl Into<String>) -> Self {
        Self {
            kind: TermType::Literal,
            lexical: lexical.into(),
        }
    }
}

/// An abstract statement carrying the event time of the item that produced it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RdfStatement {
    pub subject: RdfTerm,
    pub predicate: RdfTerm,
    pub object: RdfTerm,
    pub t: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TermError {
    #[error("attribute `{0}` is missing")]
    MissingAttribute(String),
    #[error("`{0}` is not a valid IRI")]
    InvalidIri(String),
    #[error(transparent)]
    Template(#[from] TemplateError),
}

/// A term map prepared for repeated expansion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompiledTerm {
    source: CompiledSource,
    term_kind: TermKind,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum CompiledSource {
    Template(Vec<Segment>),
    Reference(String),
    Constant(String),
}

impl CompiledTerm {
    pub fn compile(map: &TermMap) -> Result<Self, TemplateError> {
        let source = match map.kind {
            TermMapKind::Template => CompiledSource::Template(parse_template(&map.value)?),
            TermMapKind::Reference => CompiledSource::Reference(map.value.clone()),
            TermMapKind::Constant => CompiledSource::Constant(map.value.clone()),
        };
        Ok(Self {
            source,
            term_kind: map.term_kind,
        })
    }

    pub fn expand(&self, item: &DataItem, base_iri: &str) -> Result<RdfTerm, TermError> {
        let lexical = match &self.source {
            CompiledSource::Constant(value) => {
                return Ok(match self.term_kind {
                    TermKind::Iri => RdfTerm::iri(value.clone()),
                    TermKind::Literal => RdfTerm::literal(value.clone()),
                })
            }
            CompiledSource::Reference(attr) => item
                .get(attr)
                .ok_or_else(|| TermError::MissingAttribute(attr.clone()))?
                .to_string(),
            CompiledSource::Template(segments) => {
                let mut out = String::new();
                for segment in segments {
                    match segment {
                        Segment::Text(text) => out.push_str(text),
                        Segment::Placeholder(attr) => {
                            let value = item
                                .get(attr)
                                .ok_or_else(|| TermError::MissingAttribute(attr.clone()))?;
                            match self.term_kind {
                                TermKind::Iri => iri_safe_into(value, &mut out),
                                TermKind::Literal => out.push_str(value),
                            }
                        }
                    }
                }
                out
            }
        };
        match self.term_kind {
            TermKind::Literal => Ok(RdfTerm::literal(lexical)),
            TermKind::Iri => resolve_iri(lexical, base_iri).map(RdfTerm::iri),
        }
    }
}

/// Expand one template over an item.
pub fn expand_template(
    template: &str,
    item: &DataItem,
    term_kind: TermKind,
    base_iri: &str,
) -> Result<RdfTerm, TermError> {
    CompiledTerm::compile(&TermMap::template(template, term_kind))?.expand(item, base_iri)
}

fn resolve_iri(lexical: String, base_iri: &str) -> Result<String, TermError> {
    let iri = if is_absolute_iri(&lexical) {
        lexical
    } else {
        format!("{base_iri}{lexical}")
    };
    if is_valid_iri(&iri) {
        Ok(iri)
    } else {
        Err(TermError::InvalidIri(iri))
    }
}

/// Absolute, and free of characters N-Triples forbids inside `<...>`.
pub fn is_valid_iri(iri: &str) -> bool {
    is_absolute_iri(iri)
        && !iri.chars().any(|c| {
            c <= ' ' || matches!(c, '<' | '>' | '"' | '{' | '}' | '|' | '^' | '`' | '\\')
        })
}

fn is_ucschar(c: char) -> bool {
    let c = c as u32;
    matches!(c,
        0xA0..=0xD7FF | 0xF900..=0xFDCF | 0xFDF0..=0xFFEF
        | 0x10000..=0x1FFFD | 0x20000..=0x2FFFD | 0x30000..=0x3FFFD
        | 0x40000..=0x4FFFD | 0x50000..=0x5FFFD | 0x60000..=0x6FFFD
        | 0x70000..=0x7FFFD | 0x80000..=0x8FFFD | 0x90000..=0x9FFFD
        | 0xA0000..=0xAFFFD | 0xB0000..=0xBFFFD | 0xC0000..=0xCFFFD
        | 0xD0000..=0xDFFFD | 0xE1000..=0xEFFFD)
}

/// Percent-encode every character outside `iunreserved`.
pub fn iri_safe_into(value: &str, out: &mut String) {
    for c in value.chars() {
        if c.is_ascii_alphanumeric() || matches!(c, '-' | '.' | '_' | '~') || is_ucschar(c) {
            out.push(c);
        } else {
            let mut buf = [0u8; 4];
            for byte in c.encode_utf8(&mut buf).bytes() {
                out.push('%');
                out.push(char::from_digit(u32::from(byte >> 4), 16).unwrap().to_ascii_uppercase());
                out.push(char::from_digit(u32::from(byte & 0xF), 16).unwrap().to_ascii_uppercase());
            }
        }
    }
}

pub fn iri_safe(value: &str) -> String {
    let mut out = String::with_capacity(value.len());
    iri_safe_into(value, &mut out);
    out
}

impl fmt::Display for RdfTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        super::serialize::write_term(self, &mut s);
        f.write_str(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::SourceId;
    use std::collections::BTreeMap;

    fn item(pairs: &[(&str, &str)]) -> DataItem {
        let attrs: BTreeMap<String, String> =
            pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        DataItem::new(attrs, 1, SourceId(0), 0)
    }

    const BASE: &str = "http://example.com/";

    #[test]
    fn speed_template() {
        let it = item(&[("speed", "123.0"), ("time", "14:42:00"), ("id", "lane1")]);
        let term = expand_template("speed={speed}&time={time}", &it, TermKind::Iri, BASE).unwrap();
        assert_eq!(term, RdfTerm::iri("http://example.com/speed=123.0&time=14%3A42%3A00"));
    }

    #[test]
    fn flow_template() {
        let it = item(&[("flow", "1680"), ("time", "14:42:00"), ("id", "lane1")]);
        let term = expand_template("flow={flow}&time={time}", &it, TermKind::Iri, BASE).unwrap();
        assert_eq!(term.lexical, "http://example.com/flow=1680&time=14%3A42%3A00");
    }

    #[test]
    fn constant_template_literal() {
        let term = expand_template("constant", &item(&[]), TermKind::Literal, BASE).unwrap();
        assert_eq!(term, RdfTerm::literal("constant"));
    }

    #[test]
    fn missing_attribute() {
        assert_eq!(
            expand_template("x={nope}", &item(&[]), TermKind::Iri, BASE),
            Err(TermError::MissingAttribute("nope".into()))
        );
    }

    #[test]
    fn encoding_rules() {
        assert_eq!(iri_safe("a b/c?d#é~"), "a%20b%2Fc%3Fd%23é~");
        assert_eq!(iri_safe("\u{1}"), "%01");
        assert_eq!(iri_safe("\u{FFFF}"), "%EF%BF%BF");
    }

    #[test]
    fn absolute_templates_are_not_rebased() {
        let it = item(&[("id", "lane 1")]);
        let term = expand_template("urn:lane:{id}", &it, TermKind::Iri, BASE).unwrap();
        assert_eq!(term.lexical, "urn:lane:lane%201");
    }

    #[test]
    fn invalid_iri_from_literal_text() {
        let it = item(&[("id", "x")]);
        assert!(matches!(
            expand_template("a b/{id}", &it, TermKind::Iri, BASE),
            Err(TermError::InvalidIri(_))
        ));
    }
}
