//! Tiny arithmetic expression language for endurance-model definitions:
//! `+ - * / ^`, parentheses, `ln(...)`, `exp(...)`, numbers, and the
//! variable `x`. Parse errors carry the byte position for diagnostics.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Ln(Box<Expr>),
    Exp(Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Ln(e) => e.eval(x).ln(),
            Expr::Exp(e) => e.eval(x).exp(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Var,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Token)>> {
        let mut lex = Lexer {
            src: src.as_bytes(),
            pos: 0,
        };
        let mut out = Vec::new();
        while let Some(t) = lex.next_token()? {
            out.push(t);
        }
        Ok(out)
    }

    fn next_token(&mut self) -> Result<Option<(usize, Token)>> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let token = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_digit()
                        || self.src[self.pos] == b'.'
                        || self.src[self.pos] == b'e'
                        || self.src[self.pos] == b'E'
                        || ((self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
                            && matches!(self.src[self.pos - 1], b'e' | b'E')))
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let value = text.parse::<f64>().map_err(|_| Error::Expression {
                    pos: start,
                    msg: format!("invalid number `{text}`"),
                })?;
                return Ok(Some((start, Token::Num(value))));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let token = if text == "x" {
                    Token::Var
                } else {
                    Token::Ident(text.to_string())
                };
                return Ok(Some((start, token)));
            }
            other => {
                return Err(Error::Expression {
                    pos: start,
                    msg: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((start, token)))
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    idx: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.tokens
            .get(self.idx)
            .map(|(p, _)| *p)
            .unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&token) {
            self.idx += 1;
            Ok(())
        } else {
            Err(Error::Expression {
                pos: self.pos(),
                msg: format!("expected {what}"),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.idx += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.idx += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.idx += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.idx += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(&Token::Minus) {
            self.idx += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(&Token::Caret) {
            self.idx += 1;
            // right-associative; exponent may carry its own sign
            let exponent = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let pos = self.pos();
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::Var) => Ok(Expr::Var),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "closing `)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                self.expect(Token::LParen, &format!("`(` after `{name}`"))?;
                let inner = self.expr()?;
                self.expect(Token::RParen, "closing `)`")?;
                match name.as_str() {
                    "ln" => Ok(Expr::Ln(Box::new(inner))),
                    "exp" => Ok(Expr::Exp(Box::new(inner))),
                    other => Err(Error::Expression {
                        pos,
                        msg: format!("unknown function `{other}` (expected ln or exp)"),
                    }),
                }
            }
            Some(_) | None => Err(Error::Expression {
                pos,
                msg: "expected a number, `x`, `(`, `ln(` or `exp(`".into(),
            }),
        }
    }
}

/// Parse an expression over the variable `x`.
pub fn parse(src: &str) -> Result<Expr> {
    let tokens = Lexer::tokens(src)?;
    let mut parser = Parser {
        tokens,
        idx: 0,
        len: src.len(),
    };
    let expr = parser.expr()?;
    if parser.idx != parser.tokens.len() {
        return Err(Error::Expression {
            pos: parser.pos(),
            msg: "trailing input".into(),
        });
    }
    Ok(expr)
}
