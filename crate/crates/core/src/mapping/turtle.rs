//! A small Turtle reader covering what mapping documents use: `@prefix` /
//! `PREFIX` directives, IRIs, prefixed names, blank node labels, anonymous
//! blank nodes `[ ... ]`, plain string literals, the `a` keyword and the
//! `;` `,` `.` punctuation. Collections, numeric/boolean shorthand, datatypes
//! and language tags are not supported.

use std::collections::HashMap;
use std::fmt;

use crate::error::{MappingError, Position};

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Node {
    /// Prefix-expanded IRI. Relative IRIs (`<NDWFlowMap>`) are kept verbatim.
    Iri(String),
    Blank(String),
    Literal(String),
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Iri(iri) => write!(f, "<{iri}>"),
            Node::Blank(label) => write!(f, "_:{label}"),
            Node::Literal(value) => write!(f, "{value:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Triple {
    pub subject: Node,
    pub predicate: String,
    pub object: Node,
    /// Position of the predicate token.
    pub position: Position,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    IriRef(String),
    PrefixedName(String, String),
    BlankLabel(String),
    Literal(String),
    A,
    PrefixDirective,
    SparqlPrefix,
    OpenBracket,
    CloseBracket,
    Semicolon,
    Comma,
    Dot,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
        }
    }

    fn position(&self) -> Position {
        Position {
            line: self.line,
            col: self.col,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn skip_trivia(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c.is_whitespace() {
                self.bump();
            } else if c == '#' {
                while let Some(c) = self.bump() {
                    if c == '\n' {
                        break;
                    }
                }
            } else {
                break;
            }
        }
    }

    fn next_token(&mut self) -> Result<Option<(Token, Position)>, MappingError> {
        self.skip_trivia();
        let pos = self.position();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let token = match c {
            '<' => {
                self.bump();
                let mut iri = String::new();
                loop {
                    match self.bump() {
                        Some('>') => break,
                        Some(c) if c <= ' ' || "<\"{}|^`\\".contains(c) => {
                            return Err(MappingError::syntax(pos, "invalid character in IRI"))
                        }
                        Some(c) => iri.push(c),
                        None => return Err(MappingError::syntax(pos, "unterminated IRI")),
                    }
                }
                Token::IriRef(iri)
            }
            '"' | '\'' => {
                self.bump();
                Token::Literal(self.string_body(c, pos)?)
            }
            '[' => {
                self.bump();
                Token::OpenBracket
            }
            ']' => {
                self.bump();
                Token::CloseBracket
            }
            ';' => {
                self.bump();
                Token::Semicolon
            }
            ',' => {
                self.bump();
                Token::Comma
            }
            '.' => {
                self.bump();
                Token::Dot
            }
            '@' => {
                self.bump();
                let word = self.name_chars();
                if word == "prefix" {
                    Token::PrefixDirective
                } else {
                    return Err(MappingError::syntax(
                        pos,
                        format!("unsupported directive @{word}"),
                    ));
                }
            }
            _ if is_name_start(c) || c == ':' => {
                let first = self.name_chars();
                if self.chars.peek() == Some(&':') {
                    self.bump();
                    let local = self.name_chars();
                    if first == "_" {
                        if local.is_empty() {
                            return Err(MappingError::syntax(pos, "empty blank node label"));
                        }
                        Token::BlankLabel(local)
                    } else {
                        Token::PrefixedName(first, local)
                    }
                } else if first == "a" {
                    Token::A
                } else if first.eq_ignore_ascii_case("prefix") {
                    Token::SparqlPrefix
                } else {
                    return Err(MappingError::syntax(
                        pos,
                        format!("unexpected bare word `{first}`"),
                    ));
                }
            }
            other => {
                return Err(MappingError::syntax(
                    pos,
                    format!("unexpected character {other:?}"),
                ))
            }
        };
        Ok(Some((token, pos)))
    }

    // Dots are never part of a name here, so `ex:Thing.` terminates cleanly.
    fn name_chars(&mut self) -> String {
        let mut out = String::new();
        while let Some(&c) = self.chars.peek() {
            if is_name_char(c) {
                out.push(c);
                self.bump();
            } else {
                break;
            }
        }
        out
    }

    fn string_body(&mut self, quote: char, pos: Position) -> Result<String, MappingError> {
        let mut out = String::new();
        loop {
            match self.bump() {
                Some(c) if c == quote => return Ok(out),
                Some('\\') => {
                    let esc = self
                        .bump()
                        .ok_or_else(|| MappingError::syntax(pos, "unterminated string"))?;
                    match esc {
                        'n' => out.push('\n'),
                        't' => out.push('\t'),
                        'r' => out.push('\r'),
                        'b' => out.push('\u{8}'),
                        'f' => out.push('\u{c}'),
                        '"' => out.push('"'),
                        '\'' => out.push('\''),
                        '\\' => out.push('\\'),
                        'u' | 'U' => {
                            let len = if esc == 'u' { 4 } else { 8 };
                            let mut hex = String::with_capacity(len);
                            for _ in 0..len {
                                hex.push(self.bump().ok_or_else(|| {
                                    MappingError::syntax(pos, "unterminated string")
                                })?);
                            }
                            let ch = u32::from_str_radix(&hex, 16)
                                .ok()
                                .and_then(char::from_u32)
                                .ok_or_else(|| {
                                    MappingError::syntax(pos, format!("bad escape \\{esc}{hex}"))
                                })?;
                            out.push(ch);
                        }
                        other => {
                            return Err(MappingError::syntax(
                                pos,
                                format!("unknown escape \\{other}"),
                            ))
                        }
                    }
                }
                Some('\n') | None => return Err(MappingError::syntax(pos, "unterminated string")),
                Some(c) => out.push(c),
            }
        }
    }
}

fn is_name_start(c: char) -> bool {
    c.is_alphanumeric() || c == '_'
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '-'
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    lookahead: Option<(Token, Position)>,
    prefixes: HashMap<String, String>,
    triples: Vec<Triple>,
    blank_counter: usize,
}

impl<'a> Parser<'a> {
    fn peek(&mut self) -> Result<Option<&(Token, Position)>, MappingError> {
        if self.lookahead.is_none() {
            self.lookahead = self.lexer.next_token()?;
        }
        Ok(self.lookahead.as_ref())
    }

    fn next(&mut self) -> Result<Option<(Token, Position)>, MappingError> {
        self.peek()?;
        Ok(self.lookahead.take())
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<Position, MappingError> {
        match self.next()? {
            Some((tok, pos)) if tok == want => Ok(pos),
            Some((tok, pos)) => Err(MappingError::syntax(
                pos,
                format!("expected {what}, found {tok:?}"),
            )),
            None => Err(MappingError::syntax(
                self.lexer.position(),
                format!("expected {what}, found end of input"),
            )),
        }
    }

    fn fresh_blank(&mut self) -> Node {
        self.blank_counter += 1;
        Node::Blank(format!("siso-anon-{}", self.blank_counter))
    }

    fn expand(&self, prefix: &str, local: &str, pos: Position) -> Result<String, MappingError> {
        match self.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(MappingError::UnknownPrefix {
                prefix: prefix.to_string(),
                position: pos,
            }),
        }
    }

    fn document(&mut self) -> Result<(), MappingError> {
        while let Some((tok, _)) = self.peek()? {
            match tok {
                Token::PrefixDirective => {
                    self.next()?;
                    self.prefix_body()?;
                    self.expect(Token::Dot, "`.` after @prefix")?;
                }
                Token::SparqlPrefix => {
                    self.next()?;
                    self.prefix_body()?;
                }
                _ => {
                    self.statement()?;
                }
            }
        }
        Ok(())
    }

    fn prefix_body(&mut self) -> Result<(), MappingError> {
        let prefix = match self.next()? {
            Some((Token::PrefixedName(p, local), pos)) => {
                if !local.is_empty() {
                    return Err(MappingError::syntax(pos, "prefix name must end with `:`"));
                }
                p
            }
            Some((_, pos)) => return Err(MappingError::syntax(pos, "expected prefix name")),
            None => {
                return Err(MappingError::syntax(
                    self.lexer.position(),
                    "expected prefix name",
                ))
            }
        };
        match self.next()? {
            Some((Token::IriRef(iri), _)) => {
                self.prefixes.insert(prefix, iri);
                Ok(())
            }
            Some((_, pos)) => Err(MappingError::syntax(pos, "expected namespace IRI")),
            None => Err(MappingError::syntax(
                self.lexer.position(),
                "expected namespace IRI",
            )),
        }
    }

    fn statement(&mut self) -> Result<(), MappingError> {
        let (tok, pos) = self.next()?.expect("peeked");
        let subject = match tok {
            Token::OpenBracket => {
                let node = self.fresh_blank();
                if !matches!(self.peek()?, Some((Token::CloseBracket, _))) {
                    self.predicate_object_list(&node)?;
                }
                self.expect(Token::CloseBracket, "`]`")?;
                // `[ ... ] .` is a complete statement; `[ ... ] p o .` continues.
                if matches!(self.peek()?, Some((Token::Dot, _))) {
                    self.next()?;
                    return Ok(());
                }
                node
            }
            other => self.simple_node(other, pos, false)?,
        };
        self.predicate_object_list(&subject)?;
        self.expect(Token::Dot, "`.` at end of statement")?;
        Ok(())
    }

    fn simple_node(&mut self, tok: Token, pos: Position, allow_literal: bool) -> Result<Node, MappingError> {
        match tok {
            Token::IriRef(iri) => Ok(Node::Iri(iri)),
            Token::PrefixedName(p, l) => Ok(Node::Iri(self.expand(&p, &l, pos)?)),
            Token::BlankLabel(label) => Ok(Node::Blank(label)),
            Token::Literal(value) if allow_literal => Ok(Node::Literal(value)),
            other => Err(MappingError::syntax(
                pos,
                format!("unexpected {other:?} in term position"),
            )),
        }
    }

    fn predicate_object_list(&mut self, subject: &Node) -> Result<(), MappingError> {
        loop {
            let (tok, pos) = match self.next()? {
                Some(t) => t,
                None => {
                    return Err(MappingError::syntax(
                        self.lexer.position(),
                        "expected predicate, found end of input",
                    ))
                }
            };
            let predicate = match tok {
                Token::A => RDF_TYPE.to_string(),
                Token::IriRef(iri) => iri,
                Token::PrefixedName(p, l) => self.expand(&p, &l, pos)?,
                other => {
                    return Err(MappingError::syntax(
                        pos,
                        format!("expected predicate, found {other:?}"),
                    ))
                }
            };
            loop {
                let object = self.object()?;
                self.triples.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                    position: pos,
                });
                if matches!(self.peek()?, Some((Token::Comma, _))) {
                    self.next()?;
                } else {
                    break;
                }
            }
            // Any number of `;`, optionally trailing before `]` or `.`.
            let mut saw_semicolon = false;
            while matches!(self.peek()?, Some((Token::Semicolon, _))) {
                self.next()?;
                saw_semicolon = true;
            }
            if !saw_semicolon {
                return Ok(());
            }
            if matches!(
                self.peek()?,
                Some((Token::Dot, _)) | Some((Token::CloseBracket, _)) | None
            ) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Node, MappingError> {
        let (tok, pos) = match self.next()? {
            Some(t) => t,
            None => {
                return Err(MappingError::syntax(
                    self.lexer.position(),
                    "expected object, found end of input",
                ))
            }
        };
        if tok == Token::OpenBracket {
            let node = self.fresh_blank();
            if !matches!(self.peek()?, Some((Token::CloseBracket, _))) {
                self.predicate_object_list(&node)?;
            }
            self.expect(Token::CloseBracket, "`]`")?;
            return Ok(node);
        }
        self.simple_node(tok, pos, true)
    }
}

/// Parse a Turtle-subset document into its triples, in document order.
pub fn parse_turtle(text: &str) -> Result<Vec<Triple>, MappingError> {
    let mut parser = Parser {
        lexer: Lexer::new(text),
        lookahead: None,
        prefixes: HashMap::new(),
        triples: Vec::new(),
        blank_counter: 0,
    };
    parser.document()?;
    Ok(parser.triples)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prefixes_and_blank_nodes() {
        let doc = r#"
            @prefix ex: <http://example.com/> .
            PREFIX rr: <http://www.w3.org/ns/r2rml#>
            <A> a ex:Thing ; ex:p [ ex:q "v" ; ] , _:b .
        "#;
        let triples = parse_turtle(doc).unwrap();
        assert_eq!(triples.len(), 4);
        assert_eq!(triples[0].predicate, RDF_TYPE);
        assert_eq!(triples[0].object, Node::Iri("http://example.com/Thing".into()));
        assert_eq!(triples[1].object, Node::Literal("v".into()));
        assert!(matches!(triples[2].object, Node::Blank(_)));
        assert_eq!(triples[3].object, Node::Blank("b".into()));
    }

    #[test]
    fn unknown_prefix_is_error() {
        let err = parse_turtle("<A> nope:p \"x\" .").unwrap_err();
        match err {
            MappingError::UnknownPrefix { prefix, position } => {
                assert_eq!(prefix, "nope");
                assert_eq!(position, Position { line: 1, col: 5 });
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = parse_turtle("@prefix ex: <http://e/> .\n<A> ex:p \"unterminated\n").unwrap_err();
        match err {
            MappingError::Syntax { position, .. } => assert_eq!(position.line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iri_rejects_controls_and_reserved() {
        for bad in ["<a\u{7}b> <p> <o> .", "<a b> <p> <o> .", "<a{b}> <p> <o> .", "<a|b> <p> <o> ."] {
            assert!(parse_turtle(bad).is_err(), "{bad:?}");
        }
        assert!(parse_turtle("<http://e/\u{e9}#x> <p> <o> .").is_ok());
    }

    #[test]
    fn string_escapes() {
        let triples = parse_turtle(r#"<A> <p> "a\"b\\cA" ."#).unwrap();
        assert_eq!(triples[0].object, Node::Literal("a\"b\\cA".into()));
    }

    #[test]
    fn comments_are_skipped() {
        let triples = parse_turtle("# head\n<A> <p> <o> . # tail\n").unwrap();
        assert_eq!(triples.len(), 1);
    }

    #[test]
    fn missing_dot_is_error() {
        assert!(parse_turtle("<A> <p> <o>").is_err());
    }
}
