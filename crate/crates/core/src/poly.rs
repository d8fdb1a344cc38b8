//! Exact multivariate polynomials over the rationals in the fixed variable
//! order `(t, q1..qm, p1..pm)`, plus constant-free matrices of them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Parses `"p/q"`, `"n"` or a finite decimal such as `"-0.25"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(Rational::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches(['-', '+']), frac);
        let n: BigInt = digits.parse().map_err(|_| Error::Parse(format!("bad decimal {s:?}")))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        let r = Rational::new(n, d);
        return Ok(if neg { -r } else { r });
    }
    let n: BigInt = s.parse().map_err(|_| Error::Parse(format!("bad rational {s:?}")))?;
    Ok(Rational::from_integer(n))
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

pub fn rational_from_f64(x: f64) -> Result<Rational> {
    Rational::from_float(x).ok_or_else(|| Error::InvalidInput(format!("non-finite value {x}")))
}

/// A coordinate of `V*Q` (or of `Q` when the polynomial carries no momenta).
/// Indices are zero-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    T,
    Q(usize),
    P(usize),
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::T => write!(f, "t"),
            Var::Q(i) => write!(f, "q{}", i + 1),
            Var::P(i) => write!(f, "p{}", i + 1),
        }
    }
}

/// One `{coeff, exps}` entry of the JSON polynomial encoding.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyLiteral {
    pub coeff: String,
    pub exps: Vec<u32>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Sparse polynomial in `t`, `num_q` positions and `num_p` momenta.
///
/// Terms with zero coefficient are never stored, so structural equality is
/// polynomial equality.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CoeffPoly {
    num_q: usize,
    num_p: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl CoeffPoly {
    pub fn zero(num_q: usize, num_p: usize) -> Self {
        CoeffPoly { num_q, num_p, terms: BTreeMap::new() }
    }

    pub fn constant(c: Rational, num_q: usize, num_p: usize) -> Self {
        let mut p = Self::zero(num_q, num_p);
        p.add_term(vec![0; 1 + num_q + num_p], c);
        p
    }

    pub fn one(num_q: usize, num_p: usize) -> Self {
        Self::constant(Rational::one(), num_q, num_p)
    }

    pub fn var(v: Var, num_q: usize, num_p: usize) -> Result<Self> {
        let mut p = Self::zero(num_q, num_p);
        let idx = p.var_index(v)?;
        let mut exps = vec![0; p.arity()];
        exps[idx] = 1;
        p.add_term(exps, Rational::one());
        Ok(p)
    }

    /// `t`
    pub fn t(num_q: usize, num_p: usize) -> Self {
        Self::var(Var::T, num_q, num_p).expect("t is always present")
    }

    /// `q_{i+1}`; panics when `i >= num_q`.
    pub fn q(i: usize, num_q: usize, num_p: usize) -> Self {
        Self::var(Var::Q(i), num_q, num_p).expect("q index out of range")
    }

    /// `p_{i+1}`; panics when `i >= num_p`.
    pub fn p(i: usize, num_q: usize, num_p: usize) -> Self {
        Self::var(Var::P(i), num_q, num_p).expect("p index out of range")
    }

    pub fn from_terms<I>(num_q: usize, num_p: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<u32>, Rational)>,
    {
        let mut p = Self::zero(num_q, num_p);
        for (exps, c) in terms {
            if exps.len() != p.arity() {
                return Err(Error::SignatureMismatch(format!(
                    "exponent vector of length {} for arity {}",
                    exps.len(),
                    p.arity()
                )));
            }
            p.add_term(exps, c);
        }
        Ok(p)
    }

    pub fn from_literal(lits: &[PolyLiteral], num_q: usize, num_p: usize) -> Result<Self> {
        let terms = lits
            .iter()
            .map(|l| Ok((l.exps.clone(), parse_rational(&l.coeff)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::from_terms(num_q, num_p, terms)
    }

    pub fn to_literal(&self) -> Vec<PolyLiteral> {
        self.terms
            .iter()
            .map(|(e, c)| PolyLiteral { coeff: c.to_string(), exps: e.clone() })
            .collect()
    }

    pub fn num_q(&self) -> usize {
        self.num_q
    }

    pub fn num_p(&self) -> usize {
        self.num_p
    }

    pub fn arity(&self) -> usize {
        1 + self.num_q + self.num_p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn same_signature(&self, other: &CoeffPoly) -> bool {
        self.num_q == other.num_q && self.num_p == other.num_p
    }

    fn check_signature(&self, other: &CoeffPoly) -> Result<()> {
        if self.same_signature(other) {
            Ok(())
        } else {
            Err(Error::SignatureMismatch(format!(
                "(q:{}, p:{}) vs (q:{}, p:{})",
                self.num_q, self.num_p, other.num_q, other.num_p
            )))
        }
    }

    pub fn var_index(&self, v: Var) -> Result<usize> {
        match v {
            Var::T => Ok(0),
            Var::Q(i) if i < self.num_q => Ok(1 + i),
            Var::P(i) if i < self.num_p => Ok(1 + self.num_q + i),
            _ => Err(Error::UnknownVariable(format!(
                "{v} not in signature (q:{}, p:{})",
                self.num_q, self.num_p
            ))),
        }
    }

    fn add_term(&mut self, exps: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    pub fn degree_in_p(&self) -> u32 {
        let start = 1 + self.num_q;
        self.terms.keys().map(|e| e[start..].iter().sum()).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self.var_index(v) {
            Ok(idx) => self.terms.keys().any(|e| e[idx] > 0),
            Err(_) => false,
        }
    }

    pub fn constant_term(&self) -> Rational {
        self.terms.get(&vec![0; self.arity()]).cloned().unwrap_or_else(Rational::zero)
    }

    /// Coefficient of the term whose exponent vector is maximal in the
    /// stored order.
    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next_back()
    }

    pub fn scale(&self, c: &Rational) -> CoeffPoly {
        if c.is_zero() {
            return Self::zero(self.num_q, self.num_p);
        }
        CoeffPoly {
            num_q: self.num_q,
            num_p: self.num_p,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn checked_add(&self, rhs: &CoeffPoly) -> Result<CoeffPoly> {
        self.check_signature(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &CoeffPoly) -> Result<CoeffPoly> {
        self.check_signature(rhs)?;
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn checked_mul(&self, rhs: &CoeffPoly) -> Result<CoeffPoly> {
        self.check_signature(rhs)?;
        let mut out = Self::zero(self.num_q, self.num_p);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &rhs.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> CoeffPoly {
        let mut acc = Self::one(self.num_q, self.num_p);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    pub fn differentiate(&self, v: Var) -> Result<CoeffPoly> {
        let idx = self.var_index(v)?;
        let mut out = Self::zero(self.num_q, self.num_p);
        for (e, c) in &self.terms {
            let k = e[idx];
            if k == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[idx] -= 1;
            out.add_term(e2, c * int(k as i64));
        }
        Ok(out)
    }

    /// Partial derivative with respect to an in-range variable.
    pub(crate) fn d(&self, v: Var) -> CoeffPoly {
        self.differentiate(v).expect("variable in signature")
    }

    /// Exact evaluation at a rational point given in flat variable order.
    pub fn eval_exact(&self, values: &[Rational]) -> Result<Rational> {
        if values.len() != self.arity() {
            return Err(Error::MissingCoordinate(format!(
                "expected {} coordinates, got {}",
                self.arity(),
                values.len()
            )));
        }
        let mut acc = Rational::zero();
        for (e, c) in &self.terms {
            let mut term = c.clone();
            for (x, &k) in values.iter().zip(e) {
                if k > 0 {
                    term *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += term;
        }
        Ok(acc)
    }

    /// Evaluates exactly at the rational image of `point` and converts the
    /// result to `f64`.
    pub fn evaluate(&self, point: &Point) -> Result<f64> {
        let flat = point.flat_for(self.num_q, self.num_p)?;
        let exact = flat.iter().map(|&x| rational_from_f64(x)).collect::<Result<Vec<_>>>()?;
        Ok(rational_to_f64(&self.eval_exact(&exact)?))
    }

    /// Composition: every variable listed in `assignments` is replaced by
    /// its polynomial, others are left untouched.
    pub fn substitute(&self, assignments: &[(Var, CoeffPoly)]) -> Result<CoeffPoly> {
        let mut table: Vec<Option<&CoeffPoly>> = vec![None; self.arity()];
        for (v, g) in assignments {
            self.check_signature(g)?;
            table[self.var_index(*v)?] = Some(g);
        }
        let mut out = Self::zero(self.num_q, self.num_p);
        let mut cache: BTreeMap<(usize, u32), CoeffPoly> = BTreeMap::new();
        for (e, c) in &self.terms {
            let mut kept = vec![0u32; self.arity()];
            let mut factor = Self::one(self.num_q, self.num_p);
            for (idx, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                match table[idx] {
                    Some(g) => {
                        let pw = cache.entry((idx, k)).or_insert_with(|| g.pow(k));
                        factor = &factor * pw;
                    }
                    None => kept[idx] = k,
                }
            }
            let mut mono = Self::zero(self.num_q, self.num_p);
            mono.add_term(kept, c.clone());
            out = &out + &(&mono * &factor);
        }
        Ok(out)
    }

    /// Re-embeds a polynomial into a signature with `num_p` momenta. Any
    /// existing momentum exponents must fit.
    pub fn with_momenta(&self, num_p: usize) -> Result<CoeffPoly> {
        if self.num_p > num_p && self.terms.keys().any(|e| e[1 + self.num_q + num_p..].iter().any(|&k| k > 0)) {
            return Err(Error::SignatureMismatch("dropping momenta that occur".into()));
        }
        let mut out = Self::zero(self.num_q, num_p);
        for (e, c) in &self.terms {
            let mut e2 = e[..1 + self.num_q].to_vec();
            for j in 0..num_p {
                e2.push(if j < self.num_p { e[1 + self.num_q + j] } else { 0 });
            }
            out.add_term(e2, c.clone());
        }
        Ok(out)
    }

    /// Precomputes a floating-point evaluator for hot loops.
    pub fn compile(&self) -> FloatPoly {
        FloatPoly {
            arity: self.arity(),
            terms: self.terms.iter().map(|(e, c)| (rational_to_f64(c), e.clone())).collect(),
        }
    }
}

fn fmt_rational_factor(c: &Rational) -> String {
    format!("({c})")
}

impl fmt::Display for CoeffPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in self.terms.iter().rev() {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "{}", render_term(c, &monomial_factors(e, self.num_q), &[]))?;
        }
        Ok(())
    }
}

/// Variable factors of a monomial, e.g. `["t", "q1^2"]`.
pub(crate) fn monomial_factors(e: &[u32], num_q: usize) -> Vec<String> {
    let mut out = Vec::new();
    for (idx, &k) in e.iter().enumerate() {
        if k == 0 {
            continue;
        }
        let name = if idx == 0 {
            "t".to_string()
        } else if idx <= num_q {
            format!("q{idx}")
        } else {
            format!("p{}", idx - num_q)
        };
        out.push(if k == 1 { name } else { format!("{name}^{k}") });
    }
    out
}

pub(crate) fn render_term(c: &Rational, vars: &[String], extra: &[String]) -> String {
    let factors: Vec<&String> = vars.iter().chain(extra).collect();
    if factors.is_empty() {
        return fmt_rational_factor(c);
    }
    let body = factors.iter().map(|s| s.as_str()).collect::<Vec<_>>().join("*");
    if c.is_one() {
        body
    } else {
        format!("{}*{}", fmt_rational_factor(c), body)
    }
}

impl Add<&CoeffPoly> for &CoeffPoly {
    type Output = CoeffPoly;
    fn add(self, rhs: &CoeffPoly) -> CoeffPoly {
        self.checked_add(rhs).expect("polynomial signature mismatch")
    }
}

impl Sub<&CoeffPoly> for &CoeffPoly {
    type Output = CoeffPoly;
    fn sub(self, rhs: &CoeffPoly) -> CoeffPoly {
        self.checked_sub(rhs).expect("polynomial signature mismatch")
    }
}

impl Mul<&CoeffPoly> for &CoeffPoly {
    type Output = CoeffPoly;
    fn mul(self, rhs: &CoeffPoly) -> CoeffPoly {
        self.checked_mul(rhs).expect("polynomial signature mismatch")
    }
}

impl Neg for &CoeffPoly {
    type Output = CoeffPoly;
    fn neg(self) -> CoeffPoly {
        self.scale(&-Rational::one())
    }
}

pub fn poly_arith(lhs: &CoeffPoly, rhs: &CoeffPoly, op: ArithOp) -> Result<CoeffPoly> {
    match op {
        ArithOp::Add => lhs.checked_add(rhs),
        ArithOp::Sub => lhs.checked_sub(rhs),
        ArithOp::Mul => lhs.checked_mul(rhs),
    }
}

/// A point of `V*Q` (or of `Q` with empty `p`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl Point {
    pub fn new(t: f64, q: Vec<f64>, p: Vec<f64>) -> Self {
        Point { t, q, p }
    }

    pub fn config(t: f64, q: Vec<f64>) -> Self {
        Point { t, q, p: Vec::new() }
    }

    pub fn flat_for(&self, num_q: usize, num_p: usize) -> Result<Vec<f64>> {
        if self.q.len() < num_q || self.p.len() < num_p {
            return Err(Error::MissingCoordinate(format!(
                "point has (q:{}, p:{}), polynomial needs (q:{num_q}, p:{num_p})",
                self.q.len(),
                self.p.len()
            )));
        }
        let mut flat = Vec::with_capacity(1 + num_q + num_p);
        flat.push(self.t);
        flat.extend_from_slice(&self.q[..num_q]);
        flat.extend_from_slice(&self.p[..num_p]);
        Ok(flat)
    }
}

/// Floating-point image of a [`CoeffPoly`].
#[derive(Clone, Debug)]
pub struct FloatPoly {
    arity: usize,
    terms: Vec<(f64, Vec<u32>)>,
}

impl FloatPoly {
    /// `x` is the flat coordinate vector `(t, q.., p..)`.
    pub fn eval(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.arity);
        self.terms
            .iter()
            .map(|(c, e)| {
                e.iter().zip(x).fold(*c, |acc, (&k, &xi)| if k == 0 { acc } else { acc * xi.powi(k as i32) })
            })
            .sum()
    }
}

/// Dense matrix of polynomials sharing one signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<CoeffPoly>,
}

impl PolyMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<CoeffPoly>) -> Result<Self> {
        if rows == 0 || cols == 0 || entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        if entries.windows(2).any(|w| !w[0].same_signature(&w[1])) {
            return Err(Error::SignatureMismatch("matrix entries disagree".into()));
        }
        Ok(PolyMatrix { rows, cols, entries })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> CoeffPoly) -> Self {
        let entries = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Self::new(rows, cols, entries).expect("consistent construction")
    }

    pub fn zeros(rows: usize, cols: usize, num_q: usize, num_p: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| CoeffPoly::zero(num_q, num_p))
    }

    pub fn identity(n: usize, num_q: usize, num_p: usize) -> Self {
        Self::from_fn(n, n, |i, j| {
            if i == j {
                CoeffPoly::one(num_q, num_p)
            } else {
                CoeffPoly::zero(num_q, num_p)
            }
        })
    }

    /// Constant matrix from rational entries.
    pub fn from_rationals(m: &RatMatrix, num_q: usize, num_p: usize) -> Self {
        Self::from_fn(m.rows(), m.cols(), |i, j| CoeffPoly::constant(m.get(i, j).clone(), num_q, num_p))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn num_q(&self) -> usize {
        self.entries[0].num_q()
    }

    pub fn num_p(&self) -> usize {
        self.entries[0].num_p()
    }

    pub fn get(&self, i: usize, j: usize) -> &CoeffPoly {
        &self.entries[i * self.cols + j]
    }

    pub fn entries(&self) -> &[CoeffPoly] {
        &self.entries
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(CoeffPoly::is_zero)
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(CoeffPoly::is_constant)
    }

    pub fn transpose(&self) -> PolyMatrix {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    pub fn checked_mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        if !self.entries[0].same_signature(&rhs.entries[0]) {
            return Err(Error::SignatureMismatch("matrix product".into()));
        }
        let (nq, np) = (self.num_q(), self.num_p());
        Ok(Self::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).fold(CoeffPoly::zero(nq, np), |acc, k| &acc + &(self.get(i, k) * rhs.get(k, j)))
        }))
    }

    pub fn checked_sub(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::DimensionMismatch("matrix difference".into()));
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| a.checked_sub(b))
            .collect::<Result<Vec<_>>>()?;
        Self::new(self.rows, self.cols, entries)
    }

    pub fn mul_vec(&self, v: &[CoeffPoly]) -> Result<Vec<CoeffPoly>> {
        if v.len() != self.cols {
            return Err(Error::DimensionMismatch(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        (0..self.rows)
            .map(|i| {
                v.iter().enumerate().try_fold(CoeffPoly::zero(self.num_q(), self.num_p()), |acc, (k, x)| {
                    acc.checked_add(&self.get(i, k).checked_mul(x)?)
                })
            })
            .collect()
    }

    pub fn map(&self, f: impl Fn(&CoeffPoly) -> Result<CoeffPoly>) -> Result<PolyMatrix> {
        let entries = self.entries.iter().map(f).collect::<Result<Vec<_>>>()?;
        Self::new(self.rows, self.cols, entries)
    }

    pub fn with_momenta(&self, num_p: usize) -> Result<PolyMatrix> {
        self.map(|e| e.with_momenta(num_p))
    }

    pub fn evaluate(&self, point: &Point) -> Result<DMatrix<f64>> {
        let mut out = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self.get(i, j).evaluate(point)?;
            }
        }
        Ok(out)
    }

    /// Rational entries of a matrix with constant polynomials.
    pub fn to_rationals(&self) -> Option<RatMatrix> {
        if !self.is_constant() {
            return None;
        }
        Some(RatMatrix::from_fn(self.rows, self.cols, |i, j| self.get(i, j).constant_term()))
    }

    pub fn from_literal(lits: &[Vec<Vec<PolyLiteral>>], num_q: usize, num_p: usize) -> Result<Self> {
        let rows = lits.len();
        let cols = lits.first().map_or(0, Vec::len);
        if lits.iter().any(|r| r.len() != cols) {
            return Err(Error::DimensionMismatch("ragged matrix literal".into()));
        }
        let entries = lits
            .iter()
            .flatten()
            .map(|l| CoeffPoly::from_literal(l, num_q, num_p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(rows, cols, entries)
    }

    pub fn to_literal(&self) -> Vec<Vec<Vec<PolyLiteral>>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_literal()).collect()).collect()
    }
}

impl fmt::Display for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
            }
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            write!(f, "{}", row.join(", "))?;
        }
        write!(f, "]")
    }
}

pub use crate::linalg::RatMatrix;

/// True when `|x| <= tol` for every entry.
pub fn all_small(values: impl IntoIterator<Item = f64>, tol: f64) -> bool {
    values.into_iter().all(|x| x.abs() <= tol)
}
