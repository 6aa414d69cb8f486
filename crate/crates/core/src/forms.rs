//! Exact sparse homogeneous forms over the rationals.
//!
//! Exponents are ordered lexicographically and the monomial basis of degree-`d`
//! forms is enumerated in *descending* lex order, so index 0 is always
//! `X_0^d` and indices `1..=n` are `X_0^{d-1} X_j`.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, BigRational, One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Rat = BigRational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormError {
    #[error("degenerate dimensions n = {n}, d = {d} (both must be at least 1)")]
    DegenerateDims { n: usize, d: u32 },
    #[error("point has {got} coordinates but the form has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("not a bijection on {{0..{0}}}")]
    NotBijective(usize),
    #[error("injection must be strictly increasing into {{0..{target}}}")]
    BadInjection { target: usize },
    #[error("variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),
    #[error("terms are not homogeneous (degrees {0} and {1})")]
    NotHomogeneous(u32, u32),
    #[error("variable index {index} out of range for {nvars} variables")]
    VariableOutOfRange { index: usize, nvars: usize },
    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}

/// Number of variables minus one (`n`), half degree (`d`) and the top basis index `k`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub n: usize,
    pub d: u32,
}

impl Dims {
    pub fn new(n: usize, d: u32) -> Result<Self, FormError> {
        if n == 0 || d == 0 {
            return Err(FormError::DegenerateDims { n, d });
        }
        Ok(Dims { n, d })
    }

    pub fn k(&self) -> usize {
        binomial(self.n + self.d as usize, self.n) - 1
    }

    pub fn nvars(&self) -> usize {
        self.n + 1
    }

    /// Length of the half-degree monomial basis, `k + 1`.
    pub fn basis_len(&self) -> usize {
        self.k() + 1
    }

    /// Highest filtration level, `k - n`.
    pub fn top_level(&self) -> usize {
        self.k() - self.n
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(n={}, d={})", self.n, self.d)
    }
}

pub fn binomial(n: usize, r: usize) -> usize {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    let mut acc: u128 = 1;
    for i in 0..r {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as usize
}

/// `binom(n + d, n) - 1`.
pub fn dim_k(n: usize, d: u32) -> Result<usize, FormError> {
    Ok(Dims::new(n, d)?.k())
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(entries: Vec<u32>) -> Self {
        Exponent(entries)
    }

    pub fn zero(nvars: usize) -> Self {
        Exponent(vec![0; nvars])
    }

    pub fn unit(nvars: usize, var: usize, power: u32) -> Self {
        let mut e = vec![0; nvars];
        e[var] = power;
        Exponent(e)
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn add(&self, other: &Exponent) -> Exponent {
        debug_assert_eq!(self.0.len(), other.0.len());
        Exponent(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn checked_sub(&self, other: &Exponent) -> Option<Exponent> {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<_>>>()
            .map(Exponent)
    }

    pub fn is_even(&self) -> bool {
        self.0.iter().all(|e| e % 2 == 0)
    }

    pub fn divides(&self, other: &Exponent) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// Exponent with variable `var` removed from the support (set to zero).
    pub fn without(&self, var: usize) -> Exponent {
        let mut e = self.0.clone();
        e[var] = 0;
        Exponent(e)
    }

    pub fn eval(&self, point: &[Rat]) -> Rat {
        let mut acc = Rat::one();
        for (x, &e) in point.iter().zip(&self.0) {
            if e > 0 {
                acc *= num::pow(x.clone(), e as usize);
            }
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(point)
            .map(|(&e, x)| x.powi(e as i32))
            .product()
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

/// All exponents of degree `d` in `n + 1` variables, in strictly descending lex order.
pub fn exponent_list(n: usize, d: u32) -> Result<Vec<Exponent>, FormError> {
    Dims::new(n, d)?;
    let mut out = Vec::with_capacity(binomial(n + d as usize, n));
    let mut cur = vec![0u32; n + 1];
    fill_desc(&mut cur, 0, d, &mut out);
    Ok(out)
}

fn fill_desc(cur: &mut Vec<u32>, pos: usize, remaining: u32, out: &mut Vec<Exponent>) {
    if pos == cur.len() - 1 {
        cur[pos] = remaining;
        out.push(Exponent(cur.clone()));
        return;
    }
    for e in (0..=remaining).rev() {
        cur[pos] = e;
        fill_desc(cur, pos + 1, remaining - e, out);
    }
    cur[pos] = 0;
}

/// A sparse polynomial (not necessarily homogeneous) with exact coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Poly {
    nvars: usize,
    terms: BTreeMap<Exponent, Rat>,
}

impl Poly {
    pub fn zero(nvars: usize) -> Self {
        Poly { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rat) -> Self {
        let mut p = Poly::zero(nvars);
        p.add_term(Exponent::zero(nvars), c);
        p
    }

    pub fn monomial(exp: Exponent, coef: Rat) -> Self {
        let mut p = Poly::zero(exp.nvars());
        p.add_term(exp, coef);
        p
    }

    pub fn var(nvars: usize, var: usize) -> Self {
        Poly::monomial(Exponent::unit(nvars, var, 1), Rat::one())
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending lex order of exponents.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &Rat)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, exp: &Exponent) -> Rat {
        self.terms.get(exp).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn add_term(&mut self, exp: Exponent, coef: Rat) {
        debug_assert_eq!(exp.nvars(), self.nvars);
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(exp) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, s: &Rat) -> Poly {
        if s.is_zero() {
            return Poly::zero(self.nvars);
        }
        Poly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c * s)).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                out.add_term(ea.add(eb), ca * cb);
            }
        }
        out
    }

    pub fn square(&self) -> Poly {
        self.mul(self)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Exponent::degree).max()
    }

    pub fn degree_in(&self, var: usize) -> u32 {
        self.terms.keys().map(|e| e.entries()[var]).max().unwrap_or(0)
    }

    pub fn evaluate(&self, point: &[Rat]) -> Result<Rat, FormError> {
        if point.len() != self.nvars {
            return Err(FormError::DimensionMismatch { expected: self.nvars, got: point.len() });
        }
        let mut acc = Rat::zero();
        for (e, c) in &self.terms {
            acc += c * e.eval(point);
        }
        Ok(acc)
    }

    pub fn evaluate_f64(&self, point: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(e, c)| rat_to_f64(c) * e.eval_f64(point))
            .sum()
    }

    /// Relabels variable `j` as `map[j]` in a polynomial ring with `nvars` variables.
    pub fn rename(&self, map: &[usize], nvars: usize) -> Result<Poly, FormError> {
        if map.len() != self.nvars {
            return Err(FormError::VariableMismatch(map.len(), self.nvars));
        }
        if let Some(&bad) = map.iter().find(|&&m| m >= nvars) {
            return Err(FormError::VariableOutOfRange { index: bad, nvars });
        }
        let mut out = Poly::zero(nvars);
        for (e, c) in &self.terms {
            let mut ne = vec![0u32; nvars];
            for (j, &p) in e.entries().iter().enumerate() {
                ne[map[j]] += p;
            }
            out.add_term(Exponent(ne), c.clone());
        }
        Ok(out)
    }

    /// Substitutes `value` for variable `var`.
    pub fn specialize(&self, var: usize, value: &Rat) -> Poly {
        let mut out = Poly::zero(self.nvars);
        for (e, c) in &self.terms {
            let p = e.entries()[var];
            let factor = if p == 0 { Rat::one() } else { num::pow(value.clone(), p as usize) };
            out.add_term(e.without(var), c * factor);
        }
        out
    }

    /// Replaces variable `var` by the polynomial `image` (which must not mention `var`
    /// unless intended).
    pub fn compose_var(&self, var: usize, image: &Poly) -> Poly {
        let mut out = Poly::zero(self.nvars);
        let mut powers: Vec<Poly> = vec![Poly::constant(self.nvars, Rat::one())];
        for (e, c) in &self.terms {
            let p = e.entries()[var] as usize;
            while powers.len() <= p {
                let next = powers.last().unwrap().mul(image);
                powers.push(next);
            }
            let rest = Poly::monomial(e.without(var), c.clone());
            out = out.add(&rest.mul(&powers[p]));
        }
        out
    }

    pub fn to_text(&self) -> String {
        format_terms(self.terms.iter().rev())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    use num::ToPrimitive;
    r.to_f64().unwrap_or_else(|| {
        // numerator or denominator overflowed f64; fall back to a scaled quotient
        let n = r.numer().to_f64().unwrap_or(f64::INFINITY);
        let d = r.denom().to_f64().unwrap_or(f64::INFINITY);
        n / d
    })
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn parse_rat(s: &str) -> Option<Rat> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (s, "1"),
    };
    let n: BigInt = num.parse().ok()?;
    let d: BigInt = den.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rat::new(n, d))
}

fn format_terms<'a>(terms: impl Iterator<Item = (&'a Exponent, &'a Rat)>) -> String {
    let mut out = String::new();
    for (i, (e, c)) in terms.enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if i == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = format_monomial(e);
        if mono.is_empty() {
            out.push_str(&format_rat(&abs));
        } else if abs.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format_rat(&abs));
            out.push('*');
            out.push_str(&mono);
        }
    }
    if out.is_empty() {
        out.push('0');
    }
    out
}

fn format_monomial(e: &Exponent) -> String {
    let mut parts = Vec::new();
    for (v, &p) in e.entries().iter().enumerate() {
        match p {
            0 => {}
            1 => parts.push(format!("x{v}")),
            _ => parts.push(format!("x{v}^{p}")),
        }
    }
    parts.join("*")
}

/// A homogeneous polynomial with exact rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Form {
    poly: Poly,
    degree: u32,
}

impl Form {
    pub fn zero(nvars: usize, degree: u32) -> Self {
        Form { poly: Poly::zero(nvars), degree }
    }

    pub fn from_poly(poly: Poly, degree: u32) -> Result<Self, FormError> {
        for e in poly.terms.keys() {
            if e.degree() != degree {
                return Err(FormError::NotHomogeneous(degree, e.degree()));
            }
        }
        Ok(Form { poly, degree })
    }

    /// Builds a form from a polynomial, reading the degree off its terms.
    pub fn from_poly_infer(poly: Poly) -> Result<Self, FormError> {
        let degree = poly.terms.keys().next().map(Exponent::degree).unwrap_or(0);
        Form::from_poly(poly, degree)
    }

    pub fn from_terms<I>(nvars: usize, terms: I) -> Result<Self, FormError>
    where
        I: IntoIterator<Item = (Vec<u32>, Rat)>,
    {
        let mut p = Poly::zero(nvars);
        for (e, c) in terms {
            if e.len() != nvars {
                return Err(FormError::VariableMismatch(e.len(), nvars));
            }
            p.add_term(Exponent(e), c);
        }
        Form::from_poly_infer(p)
    }

    pub fn parse(text: &str) -> Result<Self, FormError> {
        let poly = parse_poly(text, None)?;
        Form::from_poly_infer(poly)
    }

    /// Parses with an explicit variable count (needed when the highest variable is absent).
    pub fn parse_with_vars(text: &str, nvars: usize) -> Result<Self, FormError> {
        let poly = parse_poly(text, Some(nvars))?;
        Form::from_poly_infer(poly)
    }

    pub fn nvars(&self) -> usize {
        self.poly.nvars
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn poly(&self) -> &Poly {
        &self.poly
    }

    pub fn is_zero(&self) -> bool {
        self.poly.is_zero()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Exponent, &Rat)> {
        self.poly.terms()
    }

    pub fn coefficient(&self, exp: &Exponent) -> Rat {
        self.poly.coefficient(exp)
    }

    /// Dimensions `(n, d)` of the Gram setting for this form; requires even degree.
    pub fn gram_dims(&self) -> Result<Dims, FormError> {
        if !self.degree.is_multiple_of(2) {
            return Err(FormError::NotHomogeneous(self.degree, self.degree));
        }
        Dims::new(self.nvars() - 1, self.degree / 2)
    }

    pub fn evaluate(&self, point: &[Rat]) -> Result<Rat, FormError> {
        self.poly.evaluate(point)
    }

    /// `g(X_0..X_n) = f(X_{perm[0]}, …, X_{perm[n]})`.
    ///
    /// Composition: `f.permute_vars(s).permute_vars(t) == f.permute_vars(t∘s)` with
    /// `(t∘s)[j] = t[s[j]]`.
    pub fn permute_vars(&self, perm: &[usize]) -> Result<Form, FormError> {
        let n = self.nvars();
        if perm.len() != n {
            return Err(FormError::NotBijective(n.saturating_sub(1)));
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || seen[p] {
                return Err(FormError::NotBijective(n - 1));
            }
            seen[p] = true;
        }
        Ok(Form { poly: self.poly.rename(perm, n)?, degree: self.degree })
    }

    /// `g(X_0..X_m) = f(X_{inj[0]}, …, X_{inj[n]})` for a strictly increasing injection.
    pub fn embed(&self, injection: &[usize], target_nvars: usize) -> Result<Form, FormError> {
        if injection.len() != self.nvars()
            || injection.windows(2).any(|w| w[0] >= w[1])
            || injection.last().is_some_and(|&l| l >= target_nvars)
        {
            return Err(FormError::BadInjection { target: target_nvars.saturating_sub(1) });
        }
        Ok(Form { poly: self.poly.rename(injection, target_nvars)?, degree: self.degree })
    }

    pub fn multiply(&self, other: &Form) -> Result<Form, FormError> {
        if self.nvars() != other.nvars() {
            return Err(FormError::VariableMismatch(self.nvars(), other.nvars()));
        }
        Ok(Form { poly: self.poly.mul(&other.poly), degree: self.degree + other.degree })
    }

    pub fn add(&self, other: &Form) -> Result<Form, FormError> {
        if self.nvars() != other.nvars() {
            return Err(FormError::VariableMismatch(self.nvars(), other.nvars()));
        }
        if !self.is_zero() && !other.is_zero() && self.degree != other.degree {
            return Err(FormError::NotHomogeneous(self.degree, other.degree));
        }
        let degree = if self.is_zero() { other.degree } else { self.degree };
        Ok(Form { poly: self.poly.add(&other.poly), degree })
    }

    pub fn scale(&self, s: &Rat) -> Form {
        Form { poly: self.poly.scale(s), degree: self.degree }
    }

    /// Substitutes 1 for variable `index`; the result keeps the same variable count
    /// with that variable absent.
    pub fn dehomogenize(&self, index: usize) -> Result<Poly, FormError> {
        if index >= self.nvars() {
            return Err(FormError::VariableOutOfRange { index, nvars: self.nvars() });
        }
        Ok(self.poly.specialize(index, &Rat::one()))
    }

    pub fn to_text(&self) -> String {
        self.poly.to_text()
    }
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl std::str::FromStr for Form {
    type Err = FormError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Form::parse(s)
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn err(&self, msg: impl Into<String>) -> FormError {
        FormError::Parse { pos: self.pos, msg: msg.into() }
    }

    fn number(&mut self) -> Result<BigInt, FormError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected a number"));
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().map_err(|_| self.err("bad number"))
    }
}

fn max_var_index(text: &str) -> Option<usize> {
    let b = text.as_bytes();
    let mut best = None;
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'x' || b[i] == b'X' {
            let start = i + 1;
            let mut j = start;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            if let Ok(v) = text[start..j].parse::<usize>() {
                best = best.max(Some(v));
            }
            i = j;
        } else {
            i += 1;
        }
    }
    best
}

fn parse_poly(text: &str, nvars: Option<usize>) -> Result<Poly, FormError> {
    let inferred = max_var_index(text).map_or(1, |m| m + 1);
    let nv = match nvars {
        Some(n) if n < inferred => return Err(FormError::VariableOutOfRange { index: inferred - 1, nvars: n }),
        Some(n) => n,
        None => inferred,
    };
    let mut lx = Lexer { src: text.as_bytes(), pos: 0 };
    if lx.peek().is_none() {
        return Err(lx.err("empty input"));
    }
    let p = parse_sum(&mut lx, nv)?;
    match lx.peek() {
        None => Ok(p),
        Some(c) => Err(lx.err(format!("expected '+' or '-', found '{}'", c as char))),
    }
}

fn parse_sum(lx: &mut Lexer<'_>, nv: usize) -> Result<Poly, FormError> {
    let mut acc = Poly::zero(nv);
    let mut first = true;
    loop {
        let negate = match lx.peek() {
            Some(b'+') if !first => {
                lx.pos += 1;
                false
            }
            Some(b'-') => {
                lx.pos += 1;
                true
            }
            _ if first => false,
            _ => break,
        };
        first = false;
        let t = parse_product(lx, nv)?;
        acc = if negate { acc.sub(&t) } else { acc.add(&t) };
    }
    Ok(acc)
}

fn parse_product(lx: &mut Lexer<'_>, nv: usize) -> Result<Poly, FormError> {
    let mut acc = parse_power(lx, nv)?;
    while lx.peek() == Some(b'*') {
        lx.pos += 1;
        acc = acc.mul(&parse_power(lx, nv)?);
    }
    Ok(acc)
}

fn parse_power(lx: &mut Lexer<'_>, nv: usize) -> Result<Poly, FormError> {
    let base = parse_atom(lx, nv)?;
    if lx.peek() != Some(b'^') {
        return Ok(base);
    }
    lx.pos += 1;
    let e: u32 = lx.number()?.try_into().map_err(|_| lx.err("exponent too large"))?;
    let mut out = Poly::constant(nv, Rat::one());
    for _ in 0..e {
        out = out.mul(&base);
    }
    Ok(out)
}

fn parse_atom(lx: &mut Lexer<'_>, nv: usize) -> Result<Poly, FormError> {
    match lx.peek() {
        Some(b'x') | Some(b'X') => {
            lx.pos += 1;
            let idx: usize = lx.number()?.try_into().map_err(|_| lx.err("variable index too large"))?;
            Ok(Poly::var(nv, idx))
        }
        Some(c) if c.is_ascii_digit() => {
            let mut r = Rat::from_integer(lx.number()?);
            if lx.peek() == Some(b'/') {
                lx.pos += 1;
                let d = lx.number()?;
                if d.is_zero() {
                    return Err(lx.err("zero denominator"));
                }
                r /= Rat::from_integer(d);
            }
            Ok(Poly::constant(nv, r))
        }
        Some(b'(') => {
            lx.pos += 1;
            let inner = parse_sum(lx, nv)?;
            if lx.peek() != Some(b')') {
                return Err(lx.err("expected ')'"));
            }
            lx.pos += 1;
            Ok(inner)
        }
        Some(c) => Err(lx.err(format!("unexpected '{}'", c as char))),
        None => Err(lx.err("unexpected end of input")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn motzkin() -> Form {
        Form::parse("x0^4*x1^2 + x0^2*x1^4 + x2^6 - 3*x0^2*x1^2*x2^2").unwrap()
    }

    fn choi_lam() -> Form {
        Form::parse("x0^2*x1^2 + x0^2*x2^2 + x1^2*x2^2 + x3^4 - 4*x0*x1*x2*x3").unwrap()
    }

    #[test]
    fn dim_k_values() {
        assert_eq!(dim_k(3, 2).unwrap(), 9);
        assert_eq!(dim_k(2, 3).unwrap(), 9);
        assert_eq!(dim_k(1, 1).unwrap(), 1);
        assert!(dim_k(0, 2).is_err());
        assert!(dim_k(2, 0).is_err());
    }

    #[test]
    fn exponent_list_binary_quadrics() {
        let l = exponent_list(1, 2).unwrap();
        let want: Vec<Exponent> =
            vec![vec![2, 0], vec![1, 1], vec![0, 2]].into_iter().map(Exponent::new).collect();
        assert_eq!(l, want);
    }

    #[test]
    fn exponent_list_quaternary_quadrics() {
        let l = exponent_list(3, 2).unwrap();
        assert_eq!(l.len(), 10);
        assert_eq!(l[0], Exponent::new(vec![2, 0, 0, 0]));
        assert_eq!(l[2], Exponent::new(vec![1, 0, 1, 0]));
        assert_eq!(l[6], Exponent::new(vec![0, 1, 0, 1]));
        assert_eq!(l[2].add(&l[6]), Exponent::new(vec![1, 1, 1, 1]));
        for j in 1..=3 {
            assert_eq!(l[j], Exponent::new({
                let mut e = vec![1, 0, 0, 0];
                e[j] = 1;
                e
            }));
        }
    }

    #[test]
    fn exponent_list_ternary_cubics() {
        let l = exponent_list(2, 3).unwrap();
        let names: Vec<String> = l.iter().map(format_monomial).collect();
        assert_eq!(
            names,
            vec![
                "x0^3", "x0^2*x1", "x0^2*x2", "x0*x1^2", "x0*x1*x2", "x0*x2^2", "x1^3",
                "x1^2*x2", "x1*x2^2", "x2^3"
            ]
        );
    }

    #[test]
    fn evaluate_examples() {
        let m = motzkin();
        assert_eq!(m.evaluate(&[int(1), int(1), int(1)]).unwrap(), int(0));
        assert_eq!(m.evaluate(&[int(1), int(1), int(0)]).unwrap(), int(2));
        assert_eq!(choi_lam().evaluate(&[int(1), int(1), int(1), int(1)]).unwrap(), int(0));
        assert!(matches!(
            m.evaluate(&[int(1), int(1)]),
            Err(FormError::DimensionMismatch { expected: 3, got: 2 })
        ));
    }

    #[test]
    fn permute_examples() {
        let cs = choi_lam().permute_vars(&[0, 3, 1, 2]).unwrap();
        assert_eq!(cs.coefficient(&Exponent::new(vec![0, 0, 4, 0])), int(1));
        assert_eq!(cs.coefficient(&Exponent::new(vec![0, 0, 0, 4])), int(0));
        let ms = motzkin().permute_vars(&[0, 2, 1]).unwrap();
        assert_eq!(ms, Form::parse("x0^4*x2^2 + x0^2*x2^4 + x1^6 - 3*x0^2*x1^2*x2^2").unwrap());
        assert_eq!(motzkin().permute_vars(&[0, 1, 2]).unwrap(), motzkin());
        assert!(motzkin().permute_vars(&[0, 0, 2]).is_err());
        assert!(motzkin().permute_vars(&[0, 1]).is_err());
    }

    #[test]
    fn multiply_and_dehomogenize() {
        let x0sq = Form::parse_with_vars("x0^2", 3).unwrap();
        let g = x0sq.multiply(&motzkin()).unwrap();
        assert_eq!(g.degree(), 8);
        assert_eq!(g.coefficient(&Exponent::new(vec![6, 2, 0])), int(1));
        let one = Form::parse_with_vars("1", 3).unwrap();
        assert_eq!(motzkin().multiply(&one).unwrap(), motzkin());

        let cs = choi_lam().permute_vars(&[0, 3, 1, 2]).unwrap();
        let dh = cs.dehomogenize(0).unwrap();
        let want = parse_poly("x3^2 + x1^2 + x1^2*x3^2 + x2^4 - 4*x1*x2*x3", Some(4)).unwrap();
        assert_eq!(dh, want);
        assert!(motzkin().multiply(&choi_lam()).is_err());
    }

    #[test]
    fn parse_and_print() {
        let f = Form::parse(" 3/2 * x0^2*x1 -x1^3+ 2*x0*x1*x1 ").unwrap();
        assert_eq!(f.to_text(), "3/2*x0^2*x1 + 2*x0*x1^2 - x1^3");
        assert_eq!(Form::parse(&f.to_text()).unwrap(), f);
        assert!(Form::parse("x0^2 + x1").is_err());
        assert!(Form::parse("x0^2 +").is_err());
        assert!(Form::parse("x0 ^ 2 ** x1").is_err());
        assert!(Form::parse("1/0*x0").is_err());
        assert_eq!(Form::parse("x0^2 - x0^2").unwrap().to_text(), "0");
        let g = Form::parse("x0^2*(x1 - x0)^2").unwrap();
        assert_eq!(g, Form::parse("x0^2*x1^2 - 2*x0^3*x1 + x0^4").unwrap());
        assert!(Form::parse("(x0 + x1").is_err());
    }

    #[test]
    fn embed_into_more_variables() {
        let m = motzkin();
        let g = m.embed(&[0, 2, 3], 4).unwrap();
        assert_eq!(g.nvars(), 4);
        assert_eq!(g.coefficient(&Exponent::new(vec![4, 0, 2, 0])), int(1));
        assert!(m.embed(&[0, 3, 2], 4).is_err());
        assert!(m.embed(&[0, 2, 4], 4).is_err());
    }
}

/// Serde adapters writing rationals as `"p/q"` strings.
pub mod rat_serde {
    use super::{format_rat, parse_rat, Rat};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let raw = String::deserialize(d)?;
        parse_rat(&raw).ok_or_else(|| serde::de::Error::custom(format!("bad rational {raw:?}")))
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Rat], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(format_rat))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rat>, D::Error> {
            let raw: Vec<String> = Vec::deserialize(d)?;
            raw.iter()
                .map(|r| parse_rat(r).ok_or_else(|| serde::de::Error::custom(format!("bad rational {r:?}"))))
                .collect()
        }
    }

    pub mod vecvec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[Vec<Rat>], s: S) -> Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|row| row.iter().map(format_rat).collect::<Vec<_>>()))
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rat>>, D::Error> {
            let raw: Vec<Vec<String>> = Vec::deserialize(d)?;
            raw.iter()
                .map(|row| {
                    row.iter()
                        .map(|r| parse_rat(r).ok_or_else(|| serde::de::Error::custom(format!("bad rational {r:?}"))))
                        .collect()
                })
                .collect()
        }
    }
}

impl Poly {
    pub fn parse(text: &str, nvars: usize) -> Result<Poly, FormError> {
        parse_poly(text, Some(nvars))
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct PolyJson {
    nvars: usize,
    degree: Option<u32>,
    text: String,
}

impl serde::Serialize for Form {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson { nvars: self.nvars(), degree: Some(self.degree), text: self.to_text() }.serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Form {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = PolyJson::deserialize(d)?;
        let poly = parse_poly(&raw.text, Some(raw.nvars)).map_err(D::Error::custom)?;
        let degree = match raw.degree {
            Some(deg) => deg,
            None => poly.total_degree().unwrap_or(0),
        };
        Form::from_poly(poly, degree).map_err(D::Error::custom)
    }
}

impl serde::Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PolyJson { nvars: self.nvars, degree: None, text: self.to_text() }.serialize(s)
    }
}

impl<'de> serde::Deserialize<'de> for Poly {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let raw = PolyJson::deserialize(d)?;
        parse_poly(&raw.text, Some(raw.nvars)).map_err(D::Error::custom)
    }
}
