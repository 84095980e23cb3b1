//! Recursive-descent parser with line/column error positions.

use std::fmt;

use thiserror::Error;

use super::{Arg, Atom, FunctionTerm, QueryAst};
use crate::store::Value;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Var(String),
    Int(i64),
    Str(String),
    LParen,
    RParen,
    Comma,
    And,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "identifier {s:?}"),
            Tok::Var(v) => write!(f, "variable ?{v}"),
            Tok::Int(i) => write!(f, "integer {i}"),
            Tok::Str(s) => write!(f, "string {s:?}"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::Comma => write!(f, "','"),
            Tok::And => write!(f, "'AND'"),
            Tok::Eof => write!(f, "end of input"),
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

impl<'a> Lexer<'a> {
    fn new(input: &'a str) -> Self {
        Lexer {
            chars: input.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line,
            column: self.column,
            message: message.into(),
        }
    }

    fn ident(&mut self, first: char) -> String {
        let mut s = String::from(first);
        while let Some(&c) = self.chars.peek() {
            if is_ident_continue(c) {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    fn next_token(&mut self) -> Result<Spanned, ParseError> {
        loop {
            let (line, column) = (self.line, self.column);
            let Some(c) = self.bump() else {
                return Ok(Spanned {
                    tok: Tok::Eof,
                    line,
                    column,
                });
            };
            let tok = match c {
                c if c.is_whitespace() => continue,
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                ',' => Tok::Comma,
                '?' => match self.chars.peek().copied() {
                    Some(c) if is_ident_start(c) => {
                        self.bump();
                        Tok::Var(self.ident(c))
                    }
                    _ => {
                        return Err(ParseError {
                            line,
                            column,
                            message: "'?' must be followed by a variable name".into(),
                        })
                    }
                },
                '"' => {
                    let mut s = String::new();
                    loop {
                        match self.bump() {
                            Some('"') => break,
                            Some(c) => s.push(c),
                            None => return Err(self.error("unterminated string literal")),
                        }
                    }
                    Tok::Str(s)
                }
                c if c.is_ascii_digit() || c == '-' => {
                    let mut s = String::from(c);
                    while let Some(&d) = self.chars.peek() {
                        if d.is_ascii_digit() {
                            s.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    let i = s.parse().map_err(|_| ParseError {
                        line,
                        column,
                        message: format!("bad integer literal {s:?}"),
                    })?;
                    Tok::Int(i)
                }
                c if is_ident_start(c) => {
                    let word = self.ident(c);
                    if word.eq_ignore_ascii_case("and") {
                        Tok::And
                    } else {
                        Tok::Ident(word)
                    }
                }
                other => {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("unexpected character {other:?}"),
                    })
                }
            };
            return Ok(Spanned { tok, line, column });
        }
    }
}

struct Parser {
    tokens: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> &Spanned {
        let t = &self.tokens[self.pos.min(self.tokens.len() - 1)];
        if self.pos < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error_at(sp: &Spanned, message: impl Into<String>) -> ParseError {
        ParseError {
            line: sp.line,
            column: sp.column,
            message: message.into(),
        }
    }

    fn expect(&mut self, want: &Tok, what: &str) -> Result<(), ParseError> {
        let sp = self.advance();
        if &sp.tok == want {
            Ok(())
        } else {
            Err(Self::error_at(
                sp,
                format!("expected {what}, found {}", sp.tok),
            ))
        }
    }

    fn query(&mut self) -> Result<QueryAst, ParseError> {
        let mut atoms = vec![self.atom()?];
        loop {
            match &self.peek().tok {
                Tok::Comma | Tok::And => {
                    self.advance();
                    atoms.push(self.atom()?);
                }
                Tok::Eof => break,
                other => {
                    let sp = self.peek();
                    return Err(Self::error_at(
                        sp,
                        format!("expected ',', 'AND' or end of input, found {other}"),
                    ));
                }
            }
        }
        Ok(QueryAst { atoms })
    }

    fn atom(&mut self) -> Result<Atom, ParseError> {
        let sp = self.advance();
        let predicate = match &sp.tok {
            Tok::Ident(name) => name.clone(),
            other => {
                return Err(Self::error_at(
                    sp,
                    format!("expected predicate name, found {other}"),
                ))
            }
        };
        self.expect(&Tok::LParen, "'('")?;
        let args = self.args(0)?;
        Ok(Atom { predicate, args })
    }

    /// Parses `arg (',' arg)* ')'`. `depth` counts enclosing function terms.
    fn args(&mut self, depth: usize) -> Result<Vec<Arg>, ParseError> {
        if let Tok::RParen = self.peek().tok {
            let sp = self.peek();
            return Err(Self::error_at(
                sp,
                "atoms and functions need at least one argument",
            ));
        }
        let mut args = vec![self.arg(depth)?];
        loop {
            let sp = self.advance();
            match &sp.tok {
                Tok::RParen => break,
                Tok::Comma => args.push(self.arg(depth)?),
                other => {
                    return Err(Self::error_at(
                        sp,
                        format!("expected ',' or ')', found {other}"),
                    ))
                }
            }
        }
        Ok(args)
    }

    fn arg(&mut self, depth: usize) -> Result<Arg, ParseError> {
        let sp = self.advance();
        let (line, column) = (sp.line, sp.column);
        match sp.tok.clone() {
            Tok::Var(v) => Ok(Arg::Variable(v)),
            Tok::Int(i) => Ok(Arg::Constant(Value::Int(i))),
            Tok::Str(s) => Ok(Arg::Constant(Value::Str(s))),
            Tok::Ident(name) => {
                if let Tok::LParen = self.peek().tok {
                    if depth >= 1 {
                        return Err(ParseError {
                            line,
                            column,
                            message: "function terms cannot nest deeper than one level".into(),
                        });
                    }
                    self.advance();
                    let args = self.args(depth + 1)?;
                    Ok(Arg::Function(FunctionTerm { name, args }))
                } else {
                    Ok(Arg::Constant(Value::entity(name)))
                }
            }
            other => Err(ParseError {
                line,
                column,
                message: format!("expected a term, found {other}"),
            }),
        }
    }
}

/// Parse a query string into an AST.
pub fn parse(text: &str) -> Result<QueryAst, ParseError> {
    let mut lexer = Lexer::new(text);
    let mut tokens = Vec::new();
    loop {
        let sp = lexer.next_token()?;
        let eof = sp.tok == Tok::Eof;
        tokens.push(sp);
        if eof {
            break;
        }
    }
    let mut parser = Parser { tokens, pos: 0 };
    parser.query()
}
