//! Front end for `dt y = Σ a_l(t, x, y) * dx^l y`.
//!
//! A term is `coeff * dx^k y`, `coeff * dx y`, `coeff * y` or the same
//! without `coeff *`. Inside a coefficient the identifier `y` is the state
//! value, so a bare trailing `* y` whose coefficient already mentions `y`
//! (as in `y * y`) is rejected; write `(y)*dx^0 y` instead.

use std::fmt;

use crate::error::{Error, Result};

use super::expr::{Expr, Parser, Tok};

/// Variable names available inside coefficients, in evaluation order.
pub const COEFF_VARS: [&str; 3] = ["t", "x", "y"];
pub const MAX_ORDER: usize = 4;

const VAR_T: usize = 0;
const VAR_X: usize = 1;
const VAR_Y: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Domain {
    #[default]
    Torus,
    Interval,
}

impl Domain {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "torus" => Ok(Domain::Torus),
            "interval" => Ok(Domain::Interval),
            other => Err(Error::InvalidArgument(format!("unknown domain '{other}' (torus | interval)"))),
        }
    }

    pub fn metric(self) -> crate::partition::Metric {
        match self {
            Domain::Torus => crate::partition::Metric::Torus,
            Domain::Interval => crate::partition::Metric::Interval,
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Domain::Torus => "torus",
            Domain::Interval => "interval",
        })
    }
}

/// How a coefficient depends on its arguments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dependence {
    pub t: bool,
    pub x: bool,
    pub y: bool,
}

impl Dependence {
    pub fn is_constant(self) -> bool {
        !(self.t || self.x || self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdeSpec {
    source: String,
    coeffs: Vec<Expr>,
    domain: Domain,
}

impl PdeSpec {
    /// Builds a spec from coefficient expressions `a_0..a_p` over [`COEFF_VARS`].
    pub fn new(coeffs: Vec<Expr>, domain: Domain) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidArgument("at least one coefficient is required".into()));
        }
        if coeffs.len() > MAX_ORDER + 1 {
            return Err(Error::InvalidArgument(format!("order {} exceeds {MAX_ORDER}", coeffs.len() - 1)));
        }
        let spec = Self { source: String::new(), coeffs, domain };
        spec.check_domain()?;
        Ok(spec)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn coeff(&self, l: usize) -> &Expr {
        &self.coeffs[l]
    }

    pub fn coeff_at(&self, l: usize, t: f64, x: f64, y: f64) -> f64 {
        self.coeffs[l].eval(&[t, x, y])
    }

    pub fn dependence(&self, l: usize) -> Dependence {
        let e = &self.coeffs[l];
        Dependence { t: e.uses(VAR_T), x: e.uses(VAR_X), y: e.uses(VAR_Y) }
    }

    /// True when no coefficient depends on the state value.
    pub fn is_linear(&self) -> bool {
        (0..=self.order()).all(|l| !self.dependence(l).y)
    }

    pub fn is_constant(&self) -> bool {
        (0..=self.order()).all(|l| self.dependence(l).is_constant())
    }

    pub fn with_domain(mut self, domain: Domain) -> Result<Self> {
        self.domain = domain;
        self.check_domain()?;
        Ok(self)
    }

    /// On the interval, `a_l(t, 0, y) = a_l(t, 1, y) = 0` for `l ≥ 1`, checked
    /// at 64 sampled `(t, y)` pairs.
    fn check_domain(&self) -> Result<()> {
        if self.domain == Domain::Torus {
            return Ok(());
        }
        for l in 1..=self.order() {
            for s in 0..64 {
                let t = s as f64 / 63.0;
                let y = -2.0 + 4.0 * ((s * 37) % 64) as f64 / 63.0;
                for x in [0.0, 1.0] {
                    let v = self.coeff_at(l, t, x, y);
                    if !(v.abs() <= 1e-10) {
                        return Err(Error::InvalidArgument(format!(
                            "interval domain needs a_{l} to vanish at the boundary; a_{l}(t={t}, x={x}, y={y}) = {v}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// Canonical S-expression, e.g. `(pde (p 2) (a0 0) (a1 0) (a2 1))`.
    pub fn sexpr(&self) -> String {
        let mut s = format!("(pde (p {})", self.order());
        for (l, c) in self.coeffs.iter().enumerate() {
            s.push_str(&format!(" (a{l} {})", c.sexpr(&COEFF_VARS)));
        }
        s.push(')');
        s
    }
}

impl fmt::Display for PdeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.source.is_empty() {
            f.write_str(&self.sexpr())
        } else {
            f.write_str(&self.source)
        }
    }
}

/// Parses a spec on the torus.
pub fn parse_pde(text: &str) -> Result<PdeSpec> {
    parse_pde_on(text, Domain::Torus)
}

pub fn parse_pde_on(text: &str, domain: Domain) -> Result<PdeSpec> {
    let mut p = Parser::new(text, &COEFF_VARS)?;
    header(&mut p)?;
    let mut terms: Vec<(usize, Expr)> = Vec::new();
    let mut negate = false;
    if *p.peek() == Tok::Minus {
        p.bump();
        negate = true;
    }
    loop {
        let (order, coeff) = term(&mut p)?;
        terms.push((order, if negate { Expr::Neg(Box::new(coeff)) } else { coeff }));
        match p.peek() {
            Tok::Plus => {
                p.bump();
                negate = false;
            }
            Tok::Minus => {
                p.bump();
                negate = true;
            }
            Tok::End => break,
            _ => return p.unexpected("'+', '-' or end of input"),
        }
    }
    let order = terms.iter().map(|t| t.0).max().unwrap_or(0);
    let mut coeffs: Vec<Option<Expr>> = vec![None; order + 1];
    for (l, c) in terms {
        coeffs[l] = Some(match coeffs[l].take() {
            None => c,
            Some(prev) => Expr::Add(Box::new(prev), Box::new(c)),
        });
    }
    let coeffs = coeffs.into_iter().map(|c| c.unwrap_or(Expr::Num(0.0))).collect();
    let mut spec = PdeSpec::new(coeffs, domain)?;
    spec.source = text.trim().to_string();
    Ok(spec)
}

fn header(p: &mut Parser<'_>) -> Result<()> {
    for (want, what) in [(Tok::Ident("dt".into()), "'dt'"), (Tok::Ident("y".into()), "'y' after dt"), (Tok::Eq, "'='")] {
        p.expect(want, what)?;
    }
    Ok(())
}

fn is_term_end(t: &Tok) -> bool {
    matches!(t, Tok::Plus | Tok::Minus | Tok::End)
}

/// `dx^k y` or `dx y`, positioned at `dx`.
fn operator(p: &mut Parser<'_>) -> Result<usize> {
    p.bump();
    let order = if *p.peek() == Tok::Caret {
        p.bump();
        match p.peek().clone() {
            Tok::Int(k) if k as usize <= MAX_ORDER => {
                p.bump();
                k as usize
            }
            Tok::Int(k) => return p.error(format!("derivative order {k} exceeds {MAX_ORDER}")),
            _ => return p.unexpected("an integer derivative order"),
        }
    } else {
        1
    };
    p.expect(Tok::Ident("y".into()), "'y' after the derivative")?;
    Ok(order)
}

fn term(p: &mut Parser<'_>) -> Result<(usize, Expr)> {
    let dx = Tok::Ident("dx".into());
    let y = Tok::Ident("y".into());
    if *p.peek() == dx {
        return Ok((operator(p)?, Expr::Num(1.0)));
    }
    if *p.peek() == y && is_term_end(p.peek_at(1)) {
        p.bump();
        return Ok((0, Expr::Num(1.0)));
    }
    let start = p.col();
    let mut coeff = p.unary()?;
    loop {
        match p.peek() {
            Tok::Star => {
                p.bump();
                if *p.peek() == dx {
                    return Ok((operator(p)?, coeff));
                }
                if *p.peek() == y && is_term_end(p.peek_at(1)) {
                    if coeff.uses(VAR_Y) {
                        return Err(Error::Parse {
                            column: start,
                            message: "nonlinear term: the coefficient of a bare 'y' mentions y; write (y)*dx^0 y".into(),
                        });
                    }
                    p.bump();
                    return Ok((0, coeff));
                }
                coeff = Expr::Mul(Box::new(coeff), Box::new(p.unary()?));
            }
            Tok::Slash => {
                p.bump();
                coeff = Expr::Div(Box::new(coeff), Box::new(p.unary()?));
            }
            _ => return p.unexpected("'* dx^k y' or '* y' to finish the term"),
        }
    }
}
