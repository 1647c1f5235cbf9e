//! A Turtle subset: `@prefix`, the `a` keyword, `;` and `,` abbreviations,
//! bracketed blank nodes, labelled blank nodes, plain string literals (an
//! optional language tag is accepted and dropped) and integers.
//!
//! Collections, datatyped literals, `@base` and relative IRI resolution are
//! not supported.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlankNode {
    Labeled(String),
    /// Introduced by a `[ ... ]` construct; numbered in document order.
    Generated(u32),
}

impl fmt::Display for BlankNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlankNode::Labeled(l) => write!(f, "_:{l}"),
            BlankNode::Generated(n) => write!(f, "_:[{n}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Str(String),
    Int(i64),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    /// Absolute IRI; prefixed names are expanded during parsing.
    Iri(String),
    Blank(BlankNode),
    Literal(Literal),
}

impl Term {
    pub fn as_iri(&self) -> Option<&str> {
        match self {
            Term::Iri(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Iri(s) => write!(f, "<{s}>"),
            Term::Blank(b) => write!(f, "{b}"),
            Term::Literal(Literal::Str(s)) => write!(f, "{s:?}"),
            Term::Literal(Literal::Int(i)) => write!(f, "{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triple {
    pub subject: Term,
    pub predicate: String,
    pub object: Term,
    /// Position of the object token.
    pub pos: Position,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TurtleDocument {
    pub prefixes: BTreeMap<String, String>,
    pub triples: Vec<Triple>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TurtleError {
    #[error("{pos}: lexical error: {message}")]
    Lexical { pos: Position, message: String },
    #[error("{pos}: undeclared prefix '{prefix}:'")]
    UndeclaredPrefix { pos: Position, prefix: String },
    #[error("{pos}: unterminated '[' opened here")]
    UnterminatedBracket { pos: Position },
    #[error("{pos}: {message}")]
    Syntax { pos: Position, message: String },
}

pub const RDF_TYPE: &str = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type";

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Iri(String),
    PName { prefix: String, local: String },
    Blank(String),
    Str(String),
    Int(i64),
    A,
    PrefixKw,
    Dot,
    Semi,
    Comma,
    LBracket,
    RBracket,
}

struct Lexer {
    chars: Vec<char>,
    at: usize,
    line: usize,
    column: usize,
}

impl Lexer {
    fn new(text: &str) -> Self {
        Lexer {
            chars: text.chars().collect(),
            at: 0,
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.at += 1;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn err(pos: Position, message: impl Into<String>) -> TurtleError {
        TurtleError::Lexical {
            pos,
            message: message.into(),
        }
    }

    fn tokenize(mut self) -> Result<Vec<(Tok, Position)>, TurtleError> {
        let mut out = Vec::new();
        loop {
            while let Some(c) = self.peek() {
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
            let pos = self.pos();
            let Some(c) = self.peek() else {
                return Ok(out);
            };
            let tok = match c {
                '<' => {
                    self.bump();
                    let mut iri = String::new();
                    loop {
                        match self.bump() {
                            Some('>') => break,
                            Some(c) if c.is_whitespace() || c == '<' => {
                                return Err(Self::err(pos, "illegal character in IRI"))
                            }
                            Some(c) => iri.push(c),
                            None => return Err(Self::err(pos, "unterminated IRI")),
                        }
                    }
                    Tok::Iri(iri)
                }
                '"' => self.string(pos)?,
                '.' => {
                    self.bump();
                    Tok::Dot
                }
                ';' => {
                    self.bump();
                    Tok::Semi
                }
                ',' => {
                    self.bump();
                    Tok::Comma
                }
                '[' => {
                    self.bump();
                    Tok::LBracket
                }
                ']' => {
                    self.bump();
                    Tok::RBracket
                }
                '(' | ')' => return Err(Self::err(pos, "collections are not supported")),
                '@' => {
                    self.bump();
                    let word = self.word();
                    if word == "prefix" {
                        Tok::PrefixKw
                    } else {
                        return Err(Self::err(pos, format!("unsupported directive '@{word}'")));
                    }
                }
                '_' => {
                    self.bump();
                    if self.bump() != Some(':') {
                        return Err(Self::err(pos, "expected ':' after '_'"));
                    }
                    let label = self.name_chars();
                    if label.is_empty() {
                        return Err(Self::err(pos, "empty blank node label"));
                    }
                    Tok::Blank(label)
                }
                '-' | '+' | '0'..='9' => {
                    let mut s = String::new();
                    s.push(self.bump().unwrap());
                    while let Some(d) = self.peek() {
                        if d.is_ascii_digit() {
                            s.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let decimal = self.peek() == Some('.')
                        && self.chars.get(self.at + 1).is_some_and(|c| c.is_ascii_digit());
                    if decimal || matches!(self.peek(), Some(c) if c.is_alphanumeric()) {
                        return Err(Self::err(pos, "only integer literals are supported"));
                    }
                    let n = s
                        .parse::<i64>()
                        .map_err(|_| Self::err(pos, format!("bad integer '{s}'")))?;
                    Tok::Int(n)
                }
                c if c.is_alphabetic() || c == ':' => {
                    let prefix = if c == ':' { String::new() } else { self.name_chars() };
                    if self.peek() == Some(':') {
                        self.bump();
                        let local = self.name_chars();
                        Tok::PName { prefix, local }
                    } else if prefix == "a" {
                        Tok::A
                    } else if prefix.eq_ignore_ascii_case("prefix") {
                        Tok::PrefixKw
                    } else {
                        return Err(Self::err(pos, format!("unexpected bare word '{prefix}'")));
                    }
                }
                other => return Err(Self::err(pos, format!("unexpected character '{other}'"))),
            };
            out.push((tok, pos));
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    /// Name characters; a trailing '.' is left for the statement terminator.
    fn name_chars(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek() {
            if c.is_alphanumeric() || matches!(c, '_' | '-' | '.' | '%') {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        // A trailing '.' terminates the statement; it is not part of the name.
        while s.ends_with('.') {
            s.pop();
            self.at -= 1;
            self.column -= 1;
        }
        s
    }

    fn string(&mut self, pos: Position) -> Result<Tok, TurtleError> {
        self.bump();
        let mut s = String::new();
        loop {
            match self.bump() {
                Some('"') => break,
                Some('\\') => match self.bump() {
                    Some('n') => s.push('\n'),
                    Some('t') => s.push('\t'),
                    Some('r') => s.push('\r'),
                    Some('"') => s.push('"'),
                    Some('\\') => s.push('\\'),
                    Some(c) => return Err(Self::err(pos, format!("unknown escape '\\{c}'"))),
                    None => return Err(Self::err(pos, "unterminated string")),
                },
                Some('\n') | None => return Err(Self::err(pos, "unterminated string")),
                Some(c) => s.push(c),
            }
        }
        match self.peek() {
            Some('@') => {
                self.bump();
                while let Some(c) = self.peek() {
                    if c.is_alphanumeric() || c == '-' {
                        self.bump();
                    } else {
                        break;
                    }
                }
            }
            Some('^') => return Err(Self::err(pos, "datatyped literals are not supported")),
            _ => {}
        }
        Ok(Tok::Str(s))
    }
}

struct Parser {
    toks: Vec<(Tok, Position)>,
    at: usize,
    end: Position,
    doc: TurtleDocument,
    next_blank: u32,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Position {
        self.toks.get(self.at).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn next(&mut self) -> Option<(Tok, Position)> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn syntax(&self, message: impl Into<String>) -> TurtleError {
        TurtleError::Syntax {
            pos: self.pos(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), TurtleError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    fn document(&mut self) -> Result<(), TurtleError> {
        while self.peek().is_some() {
            if self.peek() == Some(&Tok::PrefixKw) {
                self.prefix_directive()?;
            } else {
                self.triples()?;
                self.expect(Tok::Dot, "'.' after statement")?;
            }
        }
        Ok(())
    }

    fn prefix_directive(&mut self) -> Result<(), TurtleError> {
        self.at += 1;
        let prefix = match self.next() {
            Some((Tok::PName { prefix, local }, _)) if local.is_empty() => prefix,
            _ => {
                self.at -= 1;
                return Err(self.syntax("expected 'name:' after @prefix"));
            }
        };
        let iri = match self.next() {
            Some((Tok::Iri(iri), _)) => iri,
            _ => {
                self.at -= 1;
                return Err(self.syntax("expected <IRI> in @prefix"));
            }
        };
        self.doc.prefixes.insert(prefix, iri);
        // SPARQL-style PREFIX has no terminating dot.
        if self.peek() == Some(&Tok::Dot) {
            self.at += 1;
        }
        Ok(())
    }

    fn triples(&mut self) -> Result<(), TurtleError> {
        if self.peek() == Some(&Tok::LBracket) {
            let subject = self.blank_property_list()?;
            if self.peek() != Some(&Tok::Dot) {
                self.predicate_object_list(&subject)?;
            }
            return Ok(());
        }
        let subject = match self.next() {
            Some((Tok::Iri(iri), _)) => Term::Iri(iri),
            Some((Tok::PName { prefix, local }, pos)) => Term::Iri(self.expand(&prefix, &local, pos)?),
            Some((Tok::Blank(l), _)) => Term::Blank(BlankNode::Labeled(l)),
            _ => {
                self.at -= 1;
                return Err(self.syntax("expected subject"));
            }
        };
        self.predicate_object_list(&subject)
    }

    fn predicate_object_list(&mut self, subject: &Term) -> Result<(), TurtleError> {
        loop {
            let predicate = match self.next() {
                Some((Tok::A, _)) => RDF_TYPE.to_owned(),
                Some((Tok::Iri(iri), _)) => iri,
                Some((Tok::PName { prefix, local }, pos)) => self.expand(&prefix, &local, pos)?,
                _ => {
                    self.at -= 1;
                    return Err(self.syntax("expected predicate"));
                }
            };
            loop {
                let pos = self.pos();
                let object = self.object()?;
                self.doc.triples.push(Triple {
                    subject: subject.clone(),
                    predicate: predicate.clone(),
                    object,
                    pos,
                });
                if self.peek() == Some(&Tok::Comma) {
                    self.at += 1;
                } else {
                    break;
                }
            }
            if self.peek() != Some(&Tok::Semi) {
                return Ok(());
            }
            while self.peek() == Some(&Tok::Semi) {
                self.at += 1;
            }
            if matches!(self.peek(), Some(Tok::Dot) | Some(Tok::RBracket) | None) {
                return Ok(());
            }
        }
    }

    fn object(&mut self) -> Result<Term, TurtleError> {
        if self.peek() == Some(&Tok::LBracket) {
            return self.blank_property_list();
        }
        match self.next() {
            Some((Tok::Iri(iri), _)) => Ok(Term::Iri(iri)),
            Some((Tok::PName { prefix, local }, pos)) => Ok(Term::Iri(self.expand(&prefix, &local, pos)?)),
            Some((Tok::Blank(l), _)) => Ok(Term::Blank(BlankNode::Labeled(l))),
            Some((Tok::Str(s), _)) => Ok(Term::Literal(Literal::Str(s))),
            Some((Tok::Int(i), _)) => Ok(Term::Literal(Literal::Int(i))),
            _ => {
                self.at -= 1;
                Err(self.syntax("expected object"))
            }
        }
    }

    fn blank_property_list(&mut self) -> Result<Term, TurtleError> {
        let open = self.pos();
        self.at += 1;
        self.next_blank += 1;
        let node = Term::Blank(BlankNode::Generated(self.next_blank));
        if self.peek() != Some(&Tok::RBracket) {
            if self.peek().is_none() {
                return Err(TurtleError::UnterminatedBracket { pos: open });
            }
            self.predicate_object_list(&node)?;
        }
        match self.peek() {
            Some(Tok::RBracket) => {
                self.at += 1;
                Ok(node)
            }
            None | Some(Tok::Dot) => Err(TurtleError::UnterminatedBracket { pos: open }),
            Some(_) => Err(self.syntax("expected ']'")),
        }
    }

    fn expand(&self, prefix: &str, local: &str, pos: Position) -> Result<String, TurtleError> {
        match self.doc.prefixes.get(prefix) {
            Some(ns) => Ok(format!("{ns}{local}")),
            None => Err(TurtleError::UndeclaredPrefix {
                pos,
                prefix: prefix.to_owned(),
            }),
        }
    }
}

pub fn parse_turtle(text: &str) -> Result<TurtleDocument, TurtleError> {
    let toks = Lexer::new(text).tokenize()?;
    let end = toks.last().map(|(_, p)| *p).unwrap_or_default();
    let mut parser = Parser {
        toks,
        at: 0,
        end,
        doc: TurtleDocument::default(),
        next_blank: 0,
    };
    parser.document()?;
    Ok(parser.doc)
}
