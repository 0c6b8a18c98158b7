//! Minimal arithmetic expressions over the iteration index `n`.
//!
//! Grammar: `+ - * / ^` (with `^` binding tightest and right-associative),
//! unary minus, parentheses, numeric literals, the variable `n`, and the
//! functions `log` (natural), `sqrt`, `min`, `max`. Schedules arrive as
//! strings like `"1/n"`, `"1+n"`, or `"0.1-1/n"`.

use std::fmt;
use std::str::FromStr;

use crate::{Error, Result};

/// A parsed schedule expression.
#[derive(Debug, Clone, PartialEq)]
pub struct ScheduleExpr {
    root: Node,
    source: String,
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Number(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Log(Box<Node>),
    Sqrt(Box<Node>),
    Min(Box<Node>, Box<Node>),
    Max(Box<Node>, Box<Node>),
}

impl ScheduleExpr {
    pub fn parse(source: &str) -> Result<Self> {
        let tokens = tokenize(source)?;
        let mut parser = Parser {
            tokens,
            pos: 0,
            source,
        };
        let root = parser.expression()?;
        if parser.pos != parser.tokens.len() {
            return Err(parser.error("unexpected trailing input"));
        }
        Ok(Self {
            root,
            source: source.to_string(),
        })
    }

    pub fn eval(&self, n: f64) -> f64 {
        eval_node(&self.root, n)
    }

    pub fn source(&self) -> &str {
        &self.source
    }
}

impl FromStr for ScheduleExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s)
    }
}

impl fmt::Display for ScheduleExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

fn eval_node(node: &Node, n: f64) -> f64 {
    match node {
        Node::Number(v) => *v,
        Node::Var => n,
        Node::Neg(a) => -eval_node(a, n),
        Node::Add(a, b) => eval_node(a, n) + eval_node(b, n),
        Node::Sub(a, b) => eval_node(a, n) - eval_node(b, n),
        Node::Mul(a, b) => eval_node(a, n) * eval_node(b, n),
        Node::Div(a, b) => eval_node(a, n) / eval_node(b, n),
        Node::Pow(a, b) => eval_node(a, n).powf(eval_node(b, n)),
        Node::Log(a) => eval_node(a, n).ln(),
        Node::Sqrt(a) => eval_node(a, n).sqrt(),
        Node::Min(a, b) => eval_node(a, n).min(eval_node(b, n)),
        Node::Max(a, b) => eval_node(a, n).max(eval_node(b, n)),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

fn tokenize(source: &str) -> Result<Vec<Token>> {
    let mut tokens = Vec::new();
    let bytes = source.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        match c {
            ' ' | '\t' => i += 1,
            '+' => {
                tokens.push(Token::Plus);
                i += 1;
            }
            '-' => {
                tokens.push(Token::Minus);
                i += 1;
            }
            '*' => {
                tokens.push(Token::Star);
                i += 1;
            }
            '/' => {
                tokens.push(Token::Slash);
                i += 1;
            }
            '^' => {
                tokens.push(Token::Caret);
                i += 1;
            }
            '(' => {
                tokens.push(Token::LParen);
                i += 1;
            }
            ')' => {
                tokens.push(Token::RParen);
                i += 1;
            }
            ',' => {
                tokens.push(Token::Comma);
                i += 1;
            }
            '0'..='9' | '.' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.' | 'e' | 'E') {
                    // Accept exponent signs directly after e/E.
                    if matches!(bytes[i] as char, 'e' | 'E')
                        && i + 1 < bytes.len()
                        && matches!(bytes[i + 1] as char, '+' | '-')
                    {
                        i += 1;
                    }
                    i += 1;
                }
                let text = &source[start..i];
                let value = text.parse::<f64>().map_err(|_| {
                    Error::Config(format!("invalid number `{text}` in schedule `{source}`"))
                })?;
                tokens.push(Token::Number(value));
            }
            'a'..='z' | 'A'..='Z' => {
                let start = i;
                while i < bytes.len() && (bytes[i] as char).is_ascii_alphanumeric() {
                    i += 1;
                }
                tokens.push(Token::Ident(source[start..i].to_string()));
            }
            other => {
                return Err(Error::Config(format!(
                    "unexpected character `{other}` in schedule `{source}`"
                )))
            }
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    source: &'a str,
}

impl<'a> Parser<'a> {
    fn error(&self, message: &str) -> Error {
        Error::Config(format!("{message} in schedule `{}`", self.source))
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn advance(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, token: Token, what: &str) -> Result<()> {
        if self.peek() == Some(&token) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(what))
        }
    }

    fn expression(&mut self) -> Result<Node> {
        let mut node = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.pos += 1;
                    node = Node::Add(Box::new(node), Box::new(self.term()?));
                }
                Some(Token::Minus) => {
                    self.pos += 1;
                    node = Node::Sub(Box::new(node), Box::new(self.term()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn term(&mut self) -> Result<Node> {
        let mut node = self.unary()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.pos += 1;
                    node = Node::Mul(Box::new(node), Box::new(self.unary()?));
                }
                Some(Token::Slash) => {
                    self.pos += 1;
                    node = Node::Div(Box::new(node), Box::new(self.unary()?));
                }
                _ => return Ok(node),
            }
        }
    }

    fn unary(&mut self) -> Result<Node> {
        if self.peek() == Some(&Token::Minus) {
            self.pos += 1;
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node> {
        let base = self.primary()?;
        if self.peek() == Some(&Token::Caret) {
            self.pos += 1;
            // Right-associative; allow unary minus in the exponent.
            let exponent = self.unary()?;
            return Ok(Node::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node> {
        match self.advance() {
            Some(Token::Number(v)) => Ok(Node::Number(v)),
            Some(Token::Ident(name)) => match name.as_str() {
                "n" => Ok(Node::Var),
                "log" | "sqrt" => {
                    self.expect(Token::LParen, "expected `(` after function name")?;
                    let arg = self.expression()?;
                    self.expect(Token::RParen, "expected `)`")?;
                    Ok(if name == "log" {
                        Node::Log(Box::new(arg))
                    } else {
                        Node::Sqrt(Box::new(arg))
                    })
                }
                "min" | "max" => {
                    self.expect(Token::LParen, "expected `(` after function name")?;
                    let a = self.expression()?;
                    self.expect(Token::Comma, "expected `,` between arguments")?;
                    let b = self.expression()?;
                    self.expect(Token::RParen, "expected `)`")?;
                    Ok(if name == "min" {
                        Node::Min(Box::new(a), Box::new(b))
                    } else {
                        Node::Max(Box::new(a), Box::new(b))
                    })
                }
                other => Err(self.error(&format!("unknown identifier `{other}`"))),
            },
            Some(Token::LParen) => {
                let node = self.expression()?;
                self.expect(Token::RParen, "expected `)`")?;
                Ok(node)
            }
            _ => Err(self.error("expected a value")),
        }
    }
}
