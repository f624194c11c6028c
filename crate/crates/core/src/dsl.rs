//! The `.rbd` text format.
//!
//! ```text
//! model      := item+
//! item       := component | system
//! component  := "component" ident "{" "lambda" "=" number ( ";" "name" "=" string )? "}"
//! system     := "system" ident "=" expr
//! expr       := "series" "(" expr ("," expr)* ")"
//!             | "parallel" "(" expr ("," expr)* ")"
//!             | ident
//! ```
//!
//! Identifiers are `[a-zA-Z_][a-zA-Z0-9_]*`; `component`, `system`, `series`
//! and `parallel` are reserved. Numbers are nonnegative decimals with an
//! optional exponent. `#` starts a comment that runs to the end of the line.
//! Exactly one `system` is allowed. Every reference to a component creates a
//! new independent instance, numbered left to right.

use std::collections::HashSet;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_model, BlockExpr, Component, Locus, NodePath, SourcePos, SourceTable, SystemModel};

const RESERVED: [&str; 4] = ["component", "system", "series", "parallel"];
const MAX_DEPTH: usize = 200;

/// The first problem found in a model source, with its position.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize, Deserialize)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Option<String>,
}

impl ParseError {
    fn at(pos: SourcePos, message: impl Into<String>) -> Self {
        Self {
            line: pos.line,
            column: pos.column,
            message: message.into(),
            expected: None,
        }
    }

    fn expected(pos: SourcePos, expected: impl Into<String>, found: &Tok) -> Self {
        let expected = expected.into();
        Self {
            line: pos.line,
            column: pos.column,
            message: format!("expected {expected}, found {found}"),
            expected: Some(expected),
        }
    }

    pub fn position(&self) -> SourcePos {
        SourcePos {
            line: self.line,
            column: self.column,
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Str(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Equals,
    Semi,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "`{s}`"),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::Str(_) => f.write_str("string"),
            Tok::LBrace => f.write_str("`{`"),
            Tok::RBrace => f.write_str("`}`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Comma => f.write_str("`,`"),
            Tok::Equals => f.write_str("`=`"),
            Tok::Semi => f.write_str("`;`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    at: usize,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a [u8]) -> Self {
        Self {
            src,
            at: 0,
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> SourcePos {
        SourcePos {
            line: self.line,
            column: self.column,
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.at).copied()
    }

    fn bump(&mut self) -> Option<u8> {
        let b = self.peek()?;
        self.at += 1;
        if b == b'\n' {
            self.line += 1;
            self.column = 1;
        } else if b & 0xC0 != 0x80 {
            // UTF-8 continuation bytes share the column of their lead byte.
            self.column += 1;
        }
        Some(b)
    }

    fn skip_trivia(&mut self) {
        while let Some(b) = self.peek() {
            match b {
                b' ' | b'\t' | b'\r' | b'\n' => {
                    self.bump();
                }
                b'#' => {
                    while !matches!(self.peek(), None | Some(b'\n')) {
                        self.bump();
                    }
                }
                _ => break,
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, SourcePos), ParseError> {
        self.skip_trivia();
        let pos = self.pos();
        let Some(b) = self.peek() else {
            return Ok((Tok::Eof, pos));
        };
        let single = match b {
            b'{' => Some(Tok::LBrace),
            b'}' => Some(Tok::RBrace),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            b'=' => Some(Tok::Equals),
            b';' => Some(Tok::Semi),
            _ => None,
        };
        if let Some(tok) = single {
            self.bump();
            return Ok((tok, pos));
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            let start = self.at;
            while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                self.bump();
            }
            let text = std::str::from_utf8(&self.src[start..self.at]).expect("ascii");
            return Ok((Tok::Ident(text.to_string()), pos));
        }
        if b.is_ascii_digit() {
            return self.number(pos);
        }
        if b == b'"' {
            return self.string(pos);
        }
        if b == b'-' {
            return Err(ParseError::at(pos, "negative numbers are not allowed"));
        }
        let shown = if b.is_ascii_graphic() {
            format!("`{}`", b as char)
        } else {
            format!("byte 0x{b:02x}")
        };
        Err(ParseError::at(pos, format!("unexpected character {shown}")))
    }

    fn digits(&mut self) -> usize {
        let start = self.at;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.bump();
        }
        self.at - start
    }

    fn number(&mut self, pos: SourcePos) -> Result<(Tok, SourcePos), ParseError> {
        let start = self.at;
        self.digits();
        if self.peek() == Some(b'.') {
            self.bump();
            if self.digits() == 0 {
                return Err(ParseError::at(self.pos(), "expected digits after `.`"));
            }
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            self.bump();
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.bump();
            }
            if self.digits() == 0 {
                return Err(ParseError::at(self.pos(), "expected exponent digits"));
            }
        }
        if matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_' || c == b'.') {
            return Err(ParseError::at(self.pos(), "malformed number"));
        }
        let text = std::str::from_utf8(&self.src[start..self.at]).expect("ascii");
        let value: f64 = text
            .parse()
            .map_err(|_| ParseError::at(pos, format!("malformed number `{text}`")))?;
        Ok((Tok::Number(value), pos))
    }

    fn string(&mut self, pos: SourcePos) -> Result<(Tok, SourcePos), ParseError> {
        self.bump();
        let mut bytes = Vec::new();
        loop {
            let here = self.pos();
            match self.bump() {
                None | Some(b'\n') => return Err(ParseError::at(pos, "unterminated string")),
                Some(b'"') => break,
                Some(b'\\') => match self.bump() {
                    Some(b'"') => bytes.push(b'"'),
                    Some(b'\\') => bytes.push(b'\\'),
                    Some(b'n') => bytes.push(b'\n'),
                    Some(b't') => bytes.push(b'\t'),
                    _ => return Err(ParseError::at(here, "unknown escape sequence")),
                },
                Some(b) => bytes.push(b),
            }
        }
        String::from_utf8(bytes)
            .map(|s| (Tok::Str(s), pos))
            .map_err(|_| ParseError::at(pos, "string is not valid UTF-8"))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    pos: SourcePos,
    sources: SourceTable,
}

impl<'a> Parser<'a> {
    fn new(src: &'a [u8]) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(src);
        let (tok, pos) = lexer.next()?;
        Ok(Self {
            lexer,
            tok,
            pos,
            sources: SourceTable::new(),
        })
    }

    fn advance(&mut self) -> Result<(Tok, SourcePos), ParseError> {
        let (tok, pos) = self.lexer.next()?;
        let prev_tok = std::mem::replace(&mut self.tok, tok);
        let prev_pos = std::mem::replace(&mut self.pos, pos);
        Ok((prev_tok, prev_pos))
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<SourcePos, ParseError> {
        if self.tok == want {
            Ok(self.advance()?.1)
        } else {
            Err(ParseError::expected(self.pos, what, &self.tok))
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match &self.tok {
            Tok::Ident(s) if s == kw => {
                self.advance()?;
                Ok(())
            }
            other => Err(ParseError::expected(self.pos, format!("`{kw}`"), other)),
        }
    }

    /// A non-reserved identifier.
    fn ident(&mut self, what: &str) -> Result<(String, SourcePos), ParseError> {
        match &self.tok {
            Tok::Ident(s) if RESERVED.contains(&s.as_str()) => Err(ParseError {
                message: format!("`{s}` is a reserved word"),
                ..ParseError::expected(self.pos, what, &self.tok)
            }),
            Tok::Ident(_) => {
                let (tok, pos) = self.advance()?;
                let Tok::Ident(s) = tok else { unreachable!() };
                Ok((s, pos))
            }
            other => Err(ParseError::expected(self.pos, what, other)),
        }
    }

    fn model(mut self) -> Result<SystemModel, ParseError> {
        let mut components: Vec<Component> = Vec::new();
        let mut declared = HashSet::new();
        let mut system: Option<(String, BlockExpr)> = None;
        loop {
            match &self.tok {
                Tok::Ident(s) if s == "component" => {
                    self.advance()?;
                    let (component, pos) = self.component()?;
                    if !declared.insert(component.id.clone()) {
                        return Err(ParseError::at(
                            pos,
                            format!("component `{}` is already declared", component.id),
                        ));
                    }
                    self.sources.insert(Locus::Component(component.id.clone()), pos);
                    components.push(component);
                }
                Tok::Ident(s) if s == "system" => {
                    if system.is_some() {
                        return Err(ParseError::at(self.pos, "only one `system` declaration is allowed"));
                    }
                    self.advance()?;
                    let (name, _) = self.ident("system name")?;
                    self.expect(Tok::Equals, "`=`")?;
                    let root = self.expr(NodePath::root(), 0)?;
                    system = Some((name, root));
                }
                Tok::Eof if system.is_none() => {
                    let what = if components.is_empty() {
                        "`component` or `system`"
                    } else {
                        "`system` declaration"
                    };
                    return Err(ParseError::expected(self.pos, what, &Tok::Eof));
                }
                Tok::Eof => break,
                other => return Err(ParseError::expected(self.pos, "`component` or `system`", other)),
            }
        }
        let eof = self.pos;
        let (name, root) = system.expect("checked above");
        let model = SystemModel::new(name, components, root).with_sources(self.sources);
        let report = validate_model(&model);
        // Report the earliest positioned error; unpositioned ones sort last.
        let first = report
            .errors()
            .min_by_key(|e| e.position.map_or((usize::MAX, usize::MAX), |p| (p.line, p.column)));
        if let Some(first) = first {
            return Err(ParseError::at(first.position.unwrap_or(eof), first.message.clone()));
        }
        Ok(model)
    }

    fn component(&mut self) -> Result<(Component, SourcePos), ParseError> {
        let (id, pos) = self.ident("component name")?;
        self.expect(Tok::LBrace, "`{`")?;
        self.keyword("lambda")?;
        self.expect(Tok::Equals, "`=`")?;
        let rate = match self.tok {
            Tok::Number(n) => {
                self.advance()?;
                n
            }
            ref other => return Err(ParseError::expected(self.pos, "failure rate", other)),
        };
        let mut component = Component::new(id, rate);
        if self.tok == Tok::Semi {
            self.advance()?;
            self.keyword("name")?;
            self.expect(Tok::Equals, "`=`")?;
            match &self.tok {
                Tok::Str(s) => {
                    component.display_name = s.clone();
                    self.advance()?;
                }
                other => return Err(ParseError::expected(self.pos, "string", other)),
            }
        }
        self.expect(Tok::RBrace, "`}`")?;
        Ok((component, pos))
    }

    fn expr(&mut self, path: NodePath, depth: usize) -> Result<BlockExpr, ParseError> {
        if depth > MAX_DEPTH {
            return Err(ParseError::at(self.pos, "blocks are nested too deeply"));
        }
        self.sources.insert(Locus::Node(path.clone()), self.pos);
        let block = match &self.tok {
            Tok::Ident(s) if s == "series" => Some(true),
            Tok::Ident(s) if s == "parallel" => Some(false),
            _ => None,
        };
        let Some(is_series) = block else {
            let (id, _) = self.ident("component reference, `series` or `parallel`")?;
            return Ok(BlockExpr::leaf(id));
        };
        self.advance()?;
        self.expect(Tok::LParen, "`(`")?;
        let mut children = vec![self.expr(path.child(0), depth + 1)?];
        loop {
            match self.tok {
                Tok::Comma => {
                    self.advance()?;
                    let child = self.expr(path.child(children.len()), depth + 1)?;
                    children.push(child);
                }
                Tok::RParen => {
                    self.advance()?;
                    break;
                }
                ref other => return Err(ParseError::expected(self.pos, "`,` or `)`", other)),
            }
        }
        Ok(if is_series {
            BlockExpr::Series(children)
        } else {
            BlockExpr::Parallel(children)
        })
    }
}

/// Parses and validates a model. Warnings (such as unused components) do not
/// fail the parse; see [`validate_model`].
pub fn parse(source: &str) -> Result<SystemModel, ParseError> {
    parse_bytes(source.as_bytes())
}

/// Like [`parse`], for raw bytes that may not be UTF-8.
pub fn parse_bytes(source: &[u8]) -> Result<SystemModel, ParseError> {
    Parser::new(source)?.model()
}

/// Canonical text form: components in declaration order, one per line,
/// followed by the fully parenthesized system expression.
pub fn serialize(model: &SystemModel) -> String {
    let mut out = String::new();
    for c in model.components() {
        let _ = write!(out, "component {} {{ lambda = {:e}", c.id, c.failure_rate);
        if c.display_name != c.id {
            let _ = write!(out, "; name = \"{}\"", escape(&c.display_name));
        }
        out.push_str(" }\n");
    }
    let _ = write!(out, "system {} = ", model.name());
    write_expr(&mut out, model.root());
    out.push('\n');
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out
}

fn write_expr(out: &mut String, expr: &BlockExpr) {
    let (head, children) = match expr {
        BlockExpr::Component(id) => {
            out.push_str(&id.component);
            return;
        }
        BlockExpr::Series(cs) => ("series", cs),
        BlockExpr::Parallel(cs) => ("parallel", cs),
    };
    out.push_str(head);
    out.push('(');
    for (i, c) in children.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, c);
    }
    out.push(')');
}
