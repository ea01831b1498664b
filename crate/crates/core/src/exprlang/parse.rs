//! Recursive-descent parser for the infix expression grammar:
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '(' expr ')' | func '(' expr ')' | ident | "quoted name"
//! func   := log | sqrt | pow2 | pow3
//! ```
//!
//! `/` always denotes protected division. Names containing anything other
//! than ASCII letters, digits and `_` must be double-quoted; `\"` and `\\`
//! escape inside quotes.

use std::fmt;
use std::sync::Arc;

use super::{BinaryOp, ExprTree, UnaryOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Empty,
    /// Byte offset and a description of what went wrong there.
    Syntax { pos: usize, message: String },
    UnknownFunction { pos: usize, name: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Empty => write!(f, "empty expression"),
            ParseError::Syntax { pos, message } => write!(f, "syntax error at column {}: {message}", pos + 1),
            ParseError::UnknownFunction { pos, name } => {
                write!(f, "unknown function '{name}' at column {}", pos + 1)
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Quoted(String),
    Op(char),
    LParen,
    RParen,
    End,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Quoted(s) => write!(f, "\"{s}\""),
            Tok::Op(c) => write!(f, "'{c}'"),
            Tok::LParen => write!(f, "'('"),
            Tok::RParen => write!(f, "')'"),
            Tok::End => write!(f, "end of input"),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let mut out = Vec::new();
    let mut it = src.char_indices().peekable();
    while let Some(&(pos, c)) = it.peek() {
        match c {
            c if c.is_whitespace() => {
                it.next();
            }
            '+' | '-' | '*' | '/' => {
                it.next();
                out.push((pos, Tok::Op(c)));
            }
            '(' => {
                it.next();
                out.push((pos, Tok::LParen));
            }
            ')' => {
                it.next();
                out.push((pos, Tok::RParen));
            }
            '"' => {
                it.next();
                let mut name = String::new();
                let mut closed = false;
                while let Some((_, c)) = it.next() {
                    match c {
                        '"' => {
                            closed = true;
                            break;
                        }
                        '\\' => match it.next() {
                            Some((_, e)) => name.push(e),
                            None => break,
                        },
                        _ => name.push(c),
                    }
                }
                if !closed {
                    return Err(ParseError::Syntax { pos, message: "unterminated quoted name".into() });
                }
                if name.is_empty() {
                    return Err(ParseError::Syntax { pos, message: "empty quoted name".into() });
                }
                out.push((pos, Tok::Quoted(name)));
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut name = String::new();
                while let Some(&(_, c)) = it.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        name.push(c);
                        it.next();
                    } else {
                        break;
                    }
                }
                out.push((pos, Tok::Ident(name)));
            }
            _ => {
                return Err(ParseError::Syntax { pos, message: format!("unexpected character '{c}'") });
            }
        }
    }
    out.push((src.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError::Syntax { pos: self.pos(), message: format!("expected {expected}, found {}", self.peek()) }
    }

    fn expr(&mut self) -> Result<ExprTree, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = ExprTree::binary(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<ExprTree, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::PDiv,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = ExprTree::binary(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<ExprTree, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let op = UnaryOp::from_name(&name).ok_or(ParseError::UnknownFunction { pos, name })?;
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(ExprTree::unary(op, arg))
                } else {
                    Ok(ExprTree::Feature(Arc::from(name)))
                }
            }
            Tok::Quoted(name) => {
                self.bump();
                Ok(ExprTree::Feature(Arc::from(name)))
            }
            _ => Err(self.unexpected("a feature name, function call or '('")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("')'"))
        }
    }
}

/// Parses infix text into an expression tree.
pub fn parse(text: &str) -> Result<ExprTree, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut p = Parser { toks: tokenize(text)?, at: 0 };
    let tree = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(tree)
}
