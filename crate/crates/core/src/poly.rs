//! Multivariate polynomials with a small expression parser.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};

/// Sparse polynomial in `dim` variables, monomials keyed by exponent vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    dim: usize,
    #[serde(with = "term_list")]
    terms: BTreeMap<Vec<u32>, f64>,
}

// JSON object keys must be strings, so monomials travel as [exponents, coefficient] pairs.
mod term_list {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &BTreeMap<Vec<u32>, f64>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(t.iter())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<u32>, f64>, D::Error> {
        Ok(Vec::<(Vec<u32>, f64)>::deserialize(d)?.into_iter().collect())
    }
}

impl Polynomial {
    pub fn zero(dim: usize) -> Self {
        Polynomial { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: f64) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn var(dim: usize, i: usize) -> Self {
        let mut e = vec![0; dim];
        e[i] = 1;
        let mut p = Self::zero(dim);
        p.add_term(e, 1.0);
        p
    }

    /// ½|x|².
    pub fn half_norm_sq(dim: usize) -> Self {
        let mut p = Self::zero(dim);
        for i in 0..dim {
            let mut e = vec![0; dim];
            e[i] = 2;
            p.add_term(e, 0.5);
        }
        p
    }

    pub fn parse(src: &str, dim: usize) -> Result<Self> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0, dim };
        let out = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("unexpected token {:?}", p.tokens[p.pos])));
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, f64)> {
        self.terms.iter().map(|(e, &c)| (e, c))
    }

    fn add_term(&mut self, e: Vec<u32>, c: f64) {
        let slot = self.terms.entry(e).or_insert(0.0);
        *slot += c;
        if *slot == 0.0 {
            self.terms.retain(|_, v| *v != 0.0);
        }
    }

    fn as_constant(&self) -> Option<f64> {
        match self.terms.len() {
            0 => Some(0.0),
            1 => self.terms.get(&vec![0; self.dim]).copied(),
            _ => None,
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (e, &c) in &other.terms {
            out.add_term(e.clone(), c);
        }
        out
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for (e, &c) in &self.terms {
            out.add_term(e.clone(), c * s);
        }
        out
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let mut out = Self::zero(self.dim);
        for (ea, &ca) in &self.terms {
            for (eb, &cb) in &other.terms {
                let e: Vec<u32> = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    pub fn pow(&self, n: u32) -> Polynomial {
        let mut out = Self::constant(self.dim, 1.0);
        for _ in 0..n {
            out = out.mul(self);
        }
        out
    }

    fn powers(&self, x: &Vector) -> Vec<Vec<f64>> {
        let deg = self.degree() as usize;
        (0..self.dim)
            .map(|i| {
                let mut p = Vec::with_capacity(deg + 1);
                p.push(1.0);
                for k in 1..=deg {
                    p.push(p[k - 1] * x[i]);
                }
                p
            })
            .collect()
    }

    pub fn value(&self, x: &Vector) -> f64 {
        let pw = self.powers(x);
        self.terms
            .iter()
            .map(|(e, &c)| c * e.iter().enumerate().map(|(i, &k)| pw[i][k as usize]).product::<f64>())
            .sum()
    }

    pub fn value_grad(&self, x: &Vector) -> (f64, Vector) {
        let pw = self.powers(x);
        let mut val = 0.0;
        let mut grad = Vector::zeros(self.dim);
        for (e, &c) in &self.terms {
            val += c * e.iter().enumerate().map(|(i, &k)| pw[i][k as usize]).product::<f64>();
            for i in 0..self.dim {
                if e[i] == 0 {
                    continue;
                }
                let mut m = c * e[i] as f64;
                for (j, &k) in e.iter().enumerate() {
                    m *= if j == i { pw[j][k as usize - 1] } else { pw[j][k as usize] };
                }
                grad[i] += m;
            }
        }
        (val, grad)
    }

    pub fn hessian(&self, x: &Vector) -> Matrix {
        let pw = self.powers(x);
        let d = self.dim;
        let mut h = Matrix::zeros(d, d);
        for (e, &c) in &self.terms {
            for a in 0..d {
                for b in a..d {
                    let mut ex = e.clone();
                    let mut m = c;
                    if ex[a] == 0 {
                        continue;
                    }
                    m *= ex[a] as f64;
                    ex[a] -= 1;
                    if ex[b] == 0 {
                        continue;
                    }
                    m *= ex[b] as f64;
                    ex[b] -= 1;
                    m *= ex.iter().enumerate().map(|(j, &k)| pw[j][k as usize]).product::<f64>();
                    h[(a, b)] += m;
                    if a != b {
                        h[(b, a)] += m;
                    }
                }
            }
        }
        h
    }

    /// Substitutes x = M y, giving a polynomial in `M.ncols()` variables.
    pub fn compose_linear(&self, m: &Matrix) -> Polynomial {
        assert_eq!(m.nrows(), self.dim);
        let k = m.ncols();
        let lin: Vec<Polynomial> = (0..self.dim)
            .map(|i| {
                let mut p = Polynomial::zero(k);
                for j in 0..k {
                    if m[(i, j)] != 0.0 {
                        p = p.add(&Polynomial::var(k, j).scale(m[(i, j)]));
                    }
                }
                p
            })
            .collect();
        let mut out = Polynomial::zero(k);
        for (e, &c) in &self.terms {
            let mut t = Polynomial::constant(k, c);
            for (i, &p) in e.iter().enumerate() {
                if p > 0 {
                    t = t.mul(&lin[i].pow(p));
                }
            }
            out = out.add(&t);
        }
        out.prune(1e-14);
        out
    }

    fn prune(&mut self, tol: f64) {
        let scale = self.terms.values().fold(0.0_f64, |a, c| a.max(c.abs()));
        self.terms.retain(|_, c| c.abs() > tol * scale.max(1.0));
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Var(usize),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Tok>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len()
                && (chars[i].is_ascii_digit()
                    || chars[i] == '.'
                    || chars[i] == 'e'
                    || chars[i] == 'E'
                    || ((chars[i] == '-' || chars[i] == '+')
                        && i > start
                        && (chars[i - 1] == 'e' || chars[i - 1] == 'E')))
            {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let v = s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
            out.push(Tok::Num(v));
        } else if c == 'x' {
            let start = i + 1;
            i += 1;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let s: String = chars[start..i].iter().collect();
            let k: usize = s.parse().map_err(|_| Error::Parse("expected x1, x2, ...".into()))?;
            if k == 0 {
                return Err(Error::Parse("coordinates start at x1".into()));
            }
            out.push(Tok::Var(k - 1));
        } else {
            return Err(Error::Parse(format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Tok>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Polynomial> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = acc.add(&self.term()?);
            } else if self.eat('-') {
                acc = acc.add(&self.term()?.scale(-1.0));
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat('/') {
                let den = self.unary()?;
                match den.as_constant() {
                    Some(c) if c != 0.0 => acc = acc.scale(1.0 / c),
                    _ => return Err(Error::Parse("division by a non-constant or zero".into())),
                }
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial> {
        if self.eat('-') {
            return Ok(self.unary()?.scale(-1.0));
        }
        if self.eat('+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Polynomial> {
        let base = self.atom()?;
        if self.eat('^') {
            let e = self.unary()?;
            let n = e.as_constant().ok_or_else(|| Error::Parse("non-constant exponent".into()))?;
            if n < 0.0 || n.fract() != 0.0 || n > 64.0 {
                return Err(Error::Parse(format!("exponent {n} is not a small non-negative integer")));
            }
            return Ok(base.pow(n as u32));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Polynomial::constant(self.dim, v))
            }
            Some(Tok::Var(k)) => {
                self.pos += 1;
                if k >= self.dim {
                    return Err(Error::Parse(format!("x{} exceeds dimension {}", k + 1, self.dim)));
                }
                Ok(Polynomial::var(self.dim, k))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(Error::Parse("missing `)`".into()));
                }
                Ok(e)
            }
            other => Err(Error::Parse(format!("unexpected {other:?}"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;
    use proptest::prelude::*;

    #[test]
    fn parse_and_evaluate() {
        let p = Polynomial::parse("x1^2/2", 1).unwrap();
        let (v, g) = p.value_grad(&vector(&[3.0]));
        assert_eq!((v, g[0]), (4.5, 3.0));
        assert_eq!(p.hessian(&vector(&[3.0]))[(0, 0)], 1.0);

        let q = Polynomial::parse("x1^2 - x2^2", 2).unwrap();
        let x = vector(&[1.0, 1.0]);
        let (v, g) = q.value_grad(&x);
        assert_eq!(v, 0.0);
        assert_eq!(g.as_slice(), &[2.0, -2.0]);
        let h = q.hessian(&x);
        assert_eq!((h[(0, 0)], h[(1, 1)], h[(0, 1)]), (2.0, -2.0, 0.0));
    }

    #[test]
    fn precedence() {
        let p = Polynomial::parse("-x1^2 + 2*(x1 - 1)^2 - 1.5e-1", 1).unwrap();
        let x = 0.7;
        let want = -x * x + 2.0 * (x - 1.0) * (x - 1.0) - 0.15;
        assert!((p.value(&vector(&[x])) - want).abs() < 1e-14);
    }

    #[test]
    fn parse_errors() {
        assert!(Polynomial::parse("x3", 2).is_err());
        assert!(Polynomial::parse("x1^x1", 1).is_err());
        assert!(Polynomial::parse("1/x1", 1).is_err());
        assert!(Polynomial::parse("(x1", 1).is_err());
        assert!(Polynomial::parse("sin(x1)", 1).is_err());
    }

    #[test]
    fn compose_with_diagonal() {
        // restricting |x|^2/2 on R^3 to the diagonal line gives y^2/2
        let p = Polynomial::half_norm_sq(3);
        let s = 1.0 / 3f64.sqrt();
        let b = Matrix::from_column_slice(3, 1, &[s, s, s]);
        let r = p.compose_linear(&b);
        assert!((r.value(&vector(&[2.0])) - 2.0).abs() < 1e-14);
    }

    fn finite_difference_grad(p: &Polynomial, x: &Vector, h: f64) -> Vector {
        Vector::from_fn(x.len(), |i, _| {
            let mut a = x.clone();
            let mut b = x.clone();
            a[i] += h;
            b[i] -= h;
            (p.value(&a) - p.value(&b)) / (2.0 * h)
        })
    }

    proptest! {
        #[test]
        fn gradient_matches_central_differences(
            c in prop::collection::vec(-2.0f64..2.0, 6),
            x in prop::collection::vec(-1.5f64..1.5, 2),
        ) {
            let src = format!(
                "{}*x1^4 + {}*x2^3*x1 + {}*x1*x2 + {}*x2^2 + {}*x1 + {}",
                c[0], c[1], c[2], c[3], c[4], c[5]
            );
            let p = Polynomial::parse(&src, 2).unwrap();
            let x = vector(&x);
            let (_, g) = p.value_grad(&x);
            let fd = finite_difference_grad(&p, &x, 1e-5);
            for i in 0..2 {
                prop_assert!((g[i] - fd[i]).abs() <= 1e-5 * (1.0 + g[i].abs()));
            }
            let h = p.hessian(&x);
            prop_assert!((h[(0, 1)] - h[(1, 0)]).abs() < 1e-12);
        }
    }
}
