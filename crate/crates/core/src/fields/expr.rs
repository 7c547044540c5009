//! Sums of `c * x^p * exp(r . x)` terms with analytic gradients.
//!
//! This is the coefficient language for metrics and 1-forms: polynomials,
//! exponentials of linear forms, and products of both.

use std::fmt;

use crate::error::{GeomError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub powers: Vec<u32>,
    pub rates: Vec<f64>,
}

impl Term {
    fn eval(&self, x: &[f64]) -> f64 {
        let mut v = self.coeff;
        for (xi, &p) in x.iter().zip(&self.powers) {
            v *= xi.powi(p as i32);
        }
        let lin: f64 = x.iter().zip(&self.rates).map(|(a, b)| a * b).sum();
        if lin != 0.0 {
            v *= lin.exp();
        }
        v
    }

    fn same_shape(&self, other: &Term) -> bool {
        self.powers == other.powers && self.rates == other.rates
    }
}

/// A field coefficient in `n` chart variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    n: usize,
    terms: Vec<Term>,
}

impl Expr {
    pub fn zero(n: usize) -> Expr {
        Expr { n, terms: vec![] }
    }

    pub fn constant(n: usize, c: f64) -> Expr {
        Expr {
            n,
            terms: vec![Term {
                coeff: c,
                powers: vec![0; n],
                rates: vec![0.0; n],
            }],
        }
        .normalized()
    }

    /// The coordinate `x^k` (zero-based `k`).
    pub fn var(n: usize, k: usize) -> Expr {
        let mut powers = vec![0; n];
        powers[k] = 1;
        Expr {
            n,
            terms: vec![Term {
                coeff: 1.0,
                powers,
                rates: vec![0.0; n],
            }],
        }
    }

    /// `c * prod x_k^p_k`.
    pub fn monomial(n: usize, c: f64, powers: &[u32]) -> Expr {
        Expr {
            n,
            terms: vec![Term {
                coeff: c,
                powers: powers.to_vec(),
                rates: vec![0.0; n],
            }],
        }
        .normalized()
    }

    /// `c * exp(rates . x)`.
    pub fn exp_linear(n: usize, c: f64, rates: &[f64]) -> Expr {
        Expr {
            n,
            terms: vec![Term {
                coeff: c,
                powers: vec![0; n],
                rates: rates.to_vec(),
            }],
        }
        .normalized()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn normalized(mut self) -> Expr {
        let mut merged: Vec<Term> = Vec::new();
        for t in self.terms.drain(..) {
            if let Some(m) = merged.iter_mut().find(|m| m.same_shape(&t)) {
                m.coeff += t.coeff;
            } else {
                merged.push(t);
            }
        }
        merged.retain(|t| t.coeff != 0.0);
        merged.sort_by(|a, b| {
            let da: u32 = a.powers.iter().sum();
            let db: u32 = b.powers.iter().sum();
            da.cmp(&db)
                .then_with(|| b.powers.cmp(&a.powers))
                .then_with(|| {
                    a.rates
                        .partial_cmp(&b.rates)
                        .unwrap_or(std::cmp::Ordering::Equal)
                })
        });
        Expr {
            n: self.n,
            terms: merged,
        }
    }

    pub fn add(&self, other: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Expr { n: self.n, terms }.normalized()
    }

    pub fn scale(&self, c: f64) -> Expr {
        Expr {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    coeff: t.coeff * c,
                    ..t.clone()
                })
                .collect(),
        }
        .normalized()
    }

    pub fn mul(&self, other: &Expr) -> Expr {
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                terms.push(Term {
                    coeff: a.coeff * b.coeff,
                    powers: a.powers.iter().zip(&b.powers).map(|(p, q)| p + q).collect(),
                    rates: a.rates.iter().zip(&b.rates).map(|(p, q)| p + q).collect(),
                });
            }
        }
        Expr { n: self.n, terms }.normalized()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// Analytic partial derivative with respect to `x^k`.
    pub fn diff(&self, k: usize) -> Expr {
        let mut terms = Vec::new();
        for t in &self.terms {
            if t.powers[k] > 0 {
                let mut powers = t.powers.clone();
                powers[k] -= 1;
                terms.push(Term {
                    coeff: t.coeff * t.powers[k] as f64,
                    powers,
                    rates: t.rates.clone(),
                });
            }
            if t.rates[k] != 0.0 {
                terms.push(Term {
                    coeff: t.coeff * t.rates[k],
                    ..t.clone()
                });
            }
        }
        Expr { n: self.n, terms }.normalized()
    }

    pub fn grad(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n).map(|k| self.diff(k).eval(x)).collect()
    }

    /// Parses e.g. `0.3 + 0.05*x1*x2^2 - exp(0.2*x1)` (variables are 1-based).
    pub fn parse(src: &str, n: usize) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
            n,
        };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Splits a degree-one expression into `(constant, rates)`.
    fn as_linear(&self) -> Option<(f64, Vec<f64>)> {
        let mut c0 = 0.0;
        let mut rates = vec![0.0; self.n];
        for t in &self.terms {
            if t.rates.iter().any(|&r| r != 0.0) {
                return None;
            }
            let deg: u32 = t.powers.iter().sum();
            match deg {
                0 => c0 += t.coeff,
                1 => {
                    let k = t.powers.iter().position(|&p| p == 1)?;
                    rates[k] += t.coeff;
                }
                _ => return None,
            }
        }
        Some((c0, rates))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, t) in self.terms.iter().enumerate() {
            let mut c = t.coeff;
            if i > 0 {
                if c < 0.0 {
                    write!(f, " - ")?;
                    c = -c;
                } else {
                    write!(f, " + ")?;
                }
            }
            write!(f, "{c:?}")?;
            for (k, &p) in t.powers.iter().enumerate() {
                match p {
                    0 => {}
                    1 => write!(f, "*x{}", k + 1)?,
                    _ => write!(f, "*x{}^{}", k + 1, p)?,
                }
            }
            if t.rates.iter().any(|&r| r != 0.0) {
                write!(f, "*exp(")?;
                let mut first = true;
                for (k, &r) in t.rates.iter().enumerate() {
                    if r == 0.0 {
                        continue;
                    }
                    if first {
                        write!(f, "{r:?}*x{}", k + 1)?;
                    } else if r < 0.0 {
                        write!(f, " - {:?}*x{}", -r, k + 1)?;
                    } else {
                        write!(f, " + {r:?}*x{}", k + 1)?;
                    }
                    first = false;
                }
                write!(f, ")")?;
            }
        }
        Ok(())
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    n: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> GeomError {
        GeomError::Expression(format!("{msg} at offset {}", self.pos))
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut sign = 1.0;
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                sign = -1.0;
            }
            Some(b'+') => self.pos += 1,
            _ => {}
        }
        let mut acc = self.term()?.scale(sign);
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?.scale(-1.0));
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            acc = acc.mul(&self.factor()?);
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let k = self.uint()?;
            let mut out = Expr::constant(self.n, 1.0);
            for _ in 0..k {
                out = out.mul(&base);
            }
            return Ok(out);
        }
        Ok(base)
    }

    fn uint(&mut self) -> Result<u32> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| self.error("expected an integer"))
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(b'x') => {
                self.pos += 1;
                let k = self.uint()? as usize;
                if k == 0 || k > self.n {
                    return Err(self.error(&format!("variable x{k} outside 1..={}", self.n)));
                }
                Ok(Expr::var(self.n, k - 1))
            }
            Some(b'e') if self.src[self.pos..].starts_with(b"exp") => {
                self.pos += 3;
                if self.peek() != Some(b'(') {
                    return Err(self.error("expected `(` after exp"));
                }
                self.pos += 1;
                let inner = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.error("expected `)`"));
                }
                self.pos += 1;
                let (c0, rates) = inner
                    .as_linear()
                    .ok_or_else(|| self.error("exp() argument must be linear in x"))?;
                Ok(Expr::exp_linear(self.n, c0.exp(), &rates))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.src.len() {
                    let c = self.src[self.pos];
                    let exp_sign = (c == b'-' || c == b'+')
                        && self.pos > start
                        && matches!(self.src[self.pos - 1], b'e' | b'E');
                    if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                        self.pos += 1;
                    } else {
                        break;
                    }
                }
                let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                let v: f64 = text
                    .parse()
                    .map_err(|_| self.error(&format!("bad number `{text}`")))?;
                Ok(Expr::constant(self.n, v))
            }
            _ => Err(self.error("expected a number, variable, exp(...) or (...)")),
        }
    }
}
