//! The element expression grammar shared by the CLI, matrix literals, and
//! scripts.
//!
//! Identifiers are vertex/edge names or script bindings; a postfix `'` is the
//! involution of the preceding atom or parenthesized expression; `*` is
//! multiplication; `+`, `-`, `^k` integer power, rational literals `a/b`, and
//! parentheses behave as usual. Example: `e1*e2' + e2*e1' + e1^2*e2'*e1'`.

use crate::algebra::Element;
use crate::error::{LpaError, Result};
use crate::graph::{Graph, VertexId};
use crate::matrix::AlgMatrix;
use crate::morphism::Endo;
use crate::scalar::FieldMode;
use std::collections::BTreeMap;
use std::sync::Arc;

/// What a script name can stand for inside an expression.
#[derive(Clone)]
pub enum Binding {
    Element(Element),
    Endo(Arc<Endo>),
}

pub type Env = BTreeMap<String, Binding>;

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    Caret,
    Prime,
    Slash,
    LParen,
    RParen,
}

fn lex(src: &str) -> Result<Vec<(usize, Token)>> {
    let mut out = Vec::new();
    let bytes: Vec<char> = src.chars().collect();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            ' ' | '\t' | '\n' | '\r' => i += 1,
            '+' => {
                out.push((i, Token::Plus));
                i += 1;
            }
            '-' => {
                out.push((i, Token::Minus));
                i += 1;
            }
            '*' => {
                out.push((i, Token::Star));
                i += 1;
            }
            '^' => {
                out.push((i, Token::Caret));
                i += 1;
            }
            '\'' => {
                out.push((i, Token::Prime));
                i += 1;
            }
            '/' => {
                out.push((i, Token::Slash));
                i += 1;
            }
            '(' => {
                out.push((i, Token::LParen));
                i += 1;
            }
            ')' => {
                out.push((i, Token::RParen));
                i += 1;
            }
            '0'..='9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = bytes[start..i].iter().collect();
                let value = text.parse::<i64>().map_err(|_| LpaError::Parse {
                    pos: start,
                    msg: format!("integer literal `{text}` out of range"),
                })?;
                out.push((start, Token::Int(value)));
            }
            c if c.is_ascii_alphabetic() => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == '_')
                {
                    i += 1;
                }
                out.push((start, Token::Ident(bytes[start..i].iter().collect())));
            }
            other => {
                return Err(LpaError::Parse {
                    pos: i,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    cursor: usize,
    graph: &'a Arc<Graph>,
    field: FieldMode,
    env: Option<&'a Env>,
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens
            .get(self.cursor)
            .map(|(p, _)| *p)
            .unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).map(|(_, t)| t.clone());
        self.cursor += 1;
        t
    }

    fn expect(&mut self, want: Token) -> Result<()> {
        let pos = self.pos();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            got => Err(LpaError::Parse {
                pos,
                msg: format!("expected {want:?}, found {got:?}"),
            }),
        }
    }

    fn expr(&mut self) -> Result<Element> {
        let negate = matches!(self.peek(), Some(Token::Minus));
        if negate {
            self.bump();
        }
        let mut acc = self.term()?;
        if negate {
            acc = acc.neg();
        }
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    acc = acc.add(&self.term()?)?;
                }
                Some(Token::Minus) => {
                    self.bump();
                    acc = acc.sub(&self.term()?)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Element> {
        let mut acc = self.factor()?;
        while matches!(self.peek(), Some(Token::Star)) {
            self.bump();
            acc = acc.mul(&self.factor()?)?;
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Element> {
        let mut acc = self.primary()?;
        loop {
            match self.peek() {
                Some(Token::Prime) => {
                    self.bump();
                    acc = acc.star();
                }
                Some(Token::Caret) => {
                    self.bump();
                    let pos = self.pos();
                    match self.bump() {
                        Some(Token::Int(k)) if k >= 0 => {
                            acc = acc.pow(k as u32)?;
                        }
                        got => {
                            return Err(LpaError::Parse {
                                pos,
                                msg: format!("expected a nonnegative exponent, found {got:?}"),
                            })
                        }
                    }
                }
                _ => return Ok(acc),
            }
        }
    }

    fn primary(&mut self) -> Result<Element> {
        let pos = self.pos();
        match self.bump() {
            Some(Token::Int(n)) => {
                // rational literal a/b
                if matches!(self.peek(), Some(Token::Slash)) {
                    self.bump();
                    let dpos = self.pos();
                    match self.bump() {
                        Some(Token::Int(d)) if d != 0 => {
                            let k = self.field.ratio(n, d)?;
                            Ok(Element::identity(self.graph, self.field).scale(&k))
                        }
                        _ => Err(LpaError::Parse {
                            pos: dpos,
                            msg: "expected a nonzero integer denominator".into(),
                        }),
                    }
                } else {
                    let k = self.field.int(n);
                    Ok(Element::identity(self.graph, self.field).scale(&k))
                }
            }
            Some(Token::Ident(name)) => {
                if let Some(binding) = self.env.and_then(|env| env.get(&name)) {
                    match binding {
                        Binding::Element(e) => Ok(e.clone()),
                        Binding::Endo(f) => {
                            self.expect(Token::LParen)?;
                            let arg = self.expr()?;
                            self.expect(Token::RParen)?;
                            f.apply(&arg)
                        }
                    }
                } else if let Ok(v) = self.graph.vertex(&name) {
                    Ok(Element::vertex(self.graph, v, self.field))
                } else if let Ok(e) = self.graph.edge_id(&name) {
                    Ok(Element::edge(self.graph, e, self.field))
                } else {
                    Err(LpaError::Parse {
                        pos,
                        msg: format!("unknown name `{name}`"),
                    })
                }
            }
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            got => Err(LpaError::Parse {
                pos,
                msg: format!("expected an atom, found {got:?}"),
            }),
        }
    }
}

/// Parses an element expression over the graph; the result is normalized.
pub fn parse_element(src: &str, graph: &Arc<Graph>, field: FieldMode) -> Result<Element> {
    parse_element_env(src, graph, field, None)
}

pub fn parse_element_env(
    src: &str,
    graph: &Arc<Graph>,
    field: FieldMode,
    env: Option<&Env>,
) -> Result<Element> {
    let tokens = lex(src)?;
    let mut parser = Parser {
        tokens,
        cursor: 0,
        graph,
        field,
        env,
        end: src.chars().count(),
    };
    let el = parser.expr()?;
    if parser.cursor != parser.tokens.len() {
        return Err(LpaError::Parse {
            pos: parser.pos(),
            msg: "trailing input after expression".into(),
        });
    }
    Ok(el)
}

/// Parses the matrix literal syntax `[a, b; c, d]` with element entries.
pub fn parse_matrix(
    src: &str,
    graph: &Arc<Graph>,
    field: FieldMode,
    corner: VertexId,
) -> Result<AlgMatrix> {
    let trimmed = src.trim();
    let inner = trimmed
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| LpaError::Parse {
            pos: 0,
            msg: "matrix literal must be bracketed, e.g. [0, v; v, 0]".into(),
        })?;
    let rows: Vec<&str> = inner.split(';').collect();
    let n = rows.len();
    let mut entries = Vec::with_capacity(n * n);
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        if cells.len() != n {
            return Err(LpaError::Parse {
                pos: 0,
                msg: format!("matrix has {n} rows but a row with {} entries", cells.len()),
            });
        }
        for cell in cells {
            entries.push(parse_element(cell, graph, field)?);
        }
    }
    AlgMatrix::new(graph, corner, n, entries)
}
