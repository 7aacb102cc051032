use std::fmt::Write as _;

use super::term::{RdfStatement, RdfTerm, TermType};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    NTriples,
    /// N-Quads whose graph term `<urn:ts:MILLIS>` carries the event time.
    NQuadsTs,
}

pub const TS_GRAPH_PREFIX: &str = "urn:ts:";

pub(crate) fn write_term(term: &RdfTerm, out: &mut String) {
    match term.kind {
        TermType::Iri => {
            out.push('<');
            out.push_str(&term.lexical);
            out.push('>');
        }
        TermType::Blank => {
            out.push_str("_:");
            out.push_str(&term.lexical);
        }
        TermType::Literal => {
            out.push('"');
            for c in term.lexical.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\r' => out.push_str("\\r"),
                    '\t' => out.push_str("\\t"),
                    c => out.push(c),
                }
            }
            out.push('"');
        }
    }
}

/// Append one newline-terminated line for the statement.
pub fn serialize_into(stmt: &RdfStatement, format: OutputFormat, out: &mut String) {
    write_term(&stmt.subject, out);
    out.push(' ');
    write_term(&stmt.predicate, out);
    out.push(' ');
    write_term(&stmt.object, out);
    if format == OutputFormat::NQuadsTs {
        let _ = write!(out, " <{TS_GRAPH_PREFIX}{}>", stmt.t);
    }
    out.push_str(" .\n");
}

pub fn serialize(stmt: &RdfStatement, format: OutputFormat) -> String {
    let mut out = String::new();
    serialize_into(stmt, format, &mut out);
    out
}
