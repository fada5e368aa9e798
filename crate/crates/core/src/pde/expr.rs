//! Arithmetic expressions over a fixed set of named variables.
//!
//! Grammar (whitespace insensitive):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | atom
//! atom   := NUMBER | "pi" | VAR | FUNC "(" expr ")" | "(" expr ")"
//! FUNC   := "sin" | "cos" | "exp"
//! ```

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        match s {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    /// Index into the variable set the expression was parsed with.
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Pi => std::f64::consts::PI,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Call(f, a) => {
                let v = a.eval(vars);
                match f {
                    Func::Sin => v.sin(),
                    Func::Cos => v.cos(),
                    Func::Exp => v.exp(),
                }
            }
        }
    }

    /// True when variable `i` occurs in the expression.
    pub fn uses(&self, i: usize) -> bool {
        match self {
            Expr::Num(_) | Expr::Pi => false,
            Expr::Var(j) => *j == i,
            Expr::Neg(a) | Expr::Call(_, a) => a.uses(i),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.uses(i) || b.uses(i),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// S-expression with variable names taken from `names`.
    pub fn sexpr<'a>(&'a self, names: &'a [&'a str]) -> SExpr<'a> {
        SExpr { e: self, names }
    }
}

pub struct SExpr<'a> {
    e: &'a Expr,
    names: &'a [&'a str],
}

impl fmt::Display for SExpr<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.names;
        match self.e {
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(i) => f.write_str(n[*i]),
            Expr::Neg(a) => write!(f, "(neg {})", a.sexpr(n)),
            Expr::Add(a, b) => write!(f, "(+ {} {})", a.sexpr(n), b.sexpr(n)),
            Expr::Sub(a, b) => write!(f, "(- {} {})", a.sexpr(n), b.sexpr(n)),
            Expr::Mul(a, b) => write!(f, "(* {} {})", a.sexpr(n), b.sexpr(n)),
            Expr::Div(a, b) => write!(f, "(/ {} {})", a.sexpr(n), b.sexpr(n)),
            Expr::Call(func, a) => write!(f, "({} {})", func.name(), a.sexpr(n)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Num(f64),
    Ident(String),
    Int(u64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eq,
    End,
}

impl Tok {
    pub(crate) fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Int(v) => format!("number {v}"),
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Eq => "'='".into(),
            Tok::End => "end of input".into(),
        }
    }
}

/// Tokens with 1-based character columns; the last token is `End`.
pub(crate) fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let mut integral = true;
            if i < chars.len() && chars[i] == '.' {
                integral = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    integral = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let v: f64 = s.parse().map_err(|_| Error::Parse { column: col, message: format!("malformed number '{s}'") })?;
            match (integral, s.parse::<u64>()) {
                (true, Ok(n)) => out.push((Tok::Int(n), col)),
                _ => out.push((Tok::Num(v), col)),
            }
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphabetic() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
            continue;
        }
        let t = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '=' => Tok::Eq,
            other => return Err(Error::Parse { column: col, message: format!("unexpected character '{other}'") }),
        };
        out.push((t, col));
        i += 1;
    }
    out.push((Tok::End, chars.len() + 1));
    Ok(out)
}

/// Recursive-descent parser over a token stream.
pub(crate) struct Parser<'a> {
    pub(crate) toks: Vec<(Tok, usize)>,
    pub(crate) pos: usize,
    pub(crate) vars: &'a [&'a str],
}

impl<'a> Parser<'a> {
    pub(crate) fn new(text: &str, vars: &'a [&'a str]) -> Result<Self> {
        Ok(Self { toks: tokenize(text)?, pos: 0, vars })
    }

    pub(crate) fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    pub(crate) fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].0
    }

    pub(crate) fn col(&self) -> usize {
        self.toks[self.pos].1
    }

    pub(crate) fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub(crate) fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { column: self.col(), message: message.into() })
    }

    pub(crate) fn unexpected<T>(&self, expected: &str) -> Result<T> {
        self.error(format!("expected {expected}, found {}", self.peek().describe()))
    }

    pub(crate) fn expect(&mut self, tok: Tok, expected: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.unexpected(expected)
        }
    }

    pub(crate) fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
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
                Tok::Star => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    pub(crate) fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Num(v as f64))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    self.bump();
                    self.expect(Tok::LParen, &format!("'(' after {name}"))?;
                    let e = self.expr()?;
                    self.expect(Tok::RParen, "')'")?;
                    return Ok(Expr::Call(f, Box::new(e)));
                }
                if name == "pi" {
                    self.bump();
                    return Ok(Expr::Pi);
                }
                match self.vars.iter().position(|v| *v == name) {
                    Some(i) => {
                        self.bump();
                        Ok(Expr::Var(i))
                    }
                    None => self.error(format!("unknown identifier '{name}'")),
                }
            }
            _ => self.unexpected("an expression"),
        }
    }
}

/// Parses a complete expression over the given variable names.
pub fn parse_expr(text: &str, vars: &[&str]) -> Result<Expr> {
    let mut p = Parser::new(text, vars)?;
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return p.unexpected("end of input");
    }
    Ok(e)
}
