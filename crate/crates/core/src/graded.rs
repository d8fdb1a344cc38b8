//! Graded-commutative algebra of BRST functions: phase-space polynomial
//! coefficients times normal-ordered products of ghosts `cb[i,k]` and
//! antighosts `c[i,k]`, where level `k` fixes the parity `k mod 2`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::One;

use crate::error::{Error, Result};
use crate::poly::{int, monomial_factors, render_term, CoeffPoly, Rational};

/// Ghosts sort before antighosts in the normal order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Ghost,
    Antighost,
}

/// Generator with zero-based `index` and level `>= 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Generator {
    pub kind: GenKind,
    pub level: u32,
    pub index: usize,
}

impl Generator {
    pub fn antighost(index: usize, level: u32) -> Self {
        assert!(level >= 1, "generator levels start at 1");
        Generator { kind: GenKind::Antighost, level, index }
    }

    pub fn ghost(index: usize, level: u32) -> Self {
        assert!(level >= 1, "generator levels start at 1");
        Generator { kind: GenKind::Ghost, level, index }
    }

    pub fn is_odd(&self) -> bool {
        self.level % 2 == 1
    }

    pub fn parity(&self) -> u32 {
        self.level % 2
    }

    /// The generator paired with this one by the super-bracket.
    pub fn conjugate(&self) -> Generator {
        let kind = match self.kind {
            GenKind::Ghost => GenKind::Antighost,
            GenKind::Antighost => GenKind::Ghost,
        };
        Generator { kind, ..*self }
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self.kind {
            GenKind::Ghost => "cb",
            GenKind::Antighost => "c",
        };
        write!(f, "{name}[{},{}]", self.index + 1, self.level)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GradedMonomial {
    factors: Vec<(Generator, u32)>,
}

impl GradedMonomial {
    pub fn unit() -> Self {
        GradedMonomial { factors: Vec::new() }
    }

    pub fn single(g: Generator) -> Self {
        GradedMonomial { factors: vec![(g, 1)] }
    }

    /// Normal-ordered product of the listed factors with its sign, or `None`
    /// if an odd generator repeats.
    pub fn from_product(gens: &[Generator]) -> Option<(Rational, GradedMonomial)> {
        gens.iter().try_fold((Rational::one(), GradedMonomial::unit()), |(s, acc), g| {
            let (s2, m) = acc.mul(&GradedMonomial::single(*g))?;
            Some((s * s2, m))
        })
    }

    pub fn factors(&self) -> &[(Generator, u32)] {
        &self.factors
    }

    pub fn is_unit(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn parity(&self) -> u32 {
        self.odd_count() % 2
    }

    fn odd_count(&self) -> u32 {
        self.factors.iter().filter(|(g, _)| g.is_odd()).map(|(_, k)| *k).sum()
    }

    /// Sum of level times multiplicity over the given kind.
    pub fn level_sum(&self, kind: GenKind) -> u32 {
        self.factors.iter().filter(|(g, _)| g.kind == kind).map(|(g, k)| g.level * k).sum()
    }

    pub fn antighost_number(&self) -> u32 {
        self.level_sum(GenKind::Antighost)
    }

    pub fn max_level(&self) -> u32 {
        self.factors.iter().map(|(g, _)| g.level).max().unwrap_or(0)
    }

    pub fn multiplicity(&self, g: &Generator) -> u32 {
        self.factors.iter().find(|(h, _)| h == g).map_or(0, |(_, k)| *k)
    }

    /// Product `self * rhs` as `(sign, normal-ordered monomial)`.
    pub fn mul(&self, rhs: &GradedMonomial) -> Option<(Rational, GradedMonomial)> {
        let mut swaps = 0u32;
        for (b, _) in rhs.factors.iter().filter(|(b, _)| b.is_odd()) {
            for (a, _) in self.factors.iter().filter(|(a, _)| a.is_odd()) {
                if a == b {
                    return None;
                }
                if a > b {
                    swaps += 1;
                }
            }
        }
        let mut merged: BTreeMap<Generator, u32> = self.factors.iter().copied().collect();
        for (g, k) in &rhs.factors {
            *merged.entry(*g).or_insert(0) += k;
        }
        let sign = if swaps.is_multiple_of(2) { Rational::one() } else { -Rational::one() };
        Some((sign, GradedMonomial { factors: merged.into_iter().collect() }))
    }

    /// Left derivative by `g`: `(coefficient, remaining monomial)`.
    pub fn left_derivative(&self, g: &Generator) -> Option<(Rational, GradedMonomial)> {
        let pos = self.factors.iter().position(|(h, _)| h == g)?;
        let odd_before: u32 = self.factors[..pos].iter().filter(|(h, _)| h.is_odd()).map(|(_, k)| *k).sum();
        let mult = self.factors[pos].1;
        let mut factors = self.factors.clone();
        if mult == 1 {
            factors.remove(pos);
        } else {
            factors[pos].1 -= 1;
        }
        let mut coeff = int(mult as i64);
        // moving an even generator to the front never costs a sign
        if g.is_odd() && odd_before % 2 == 1 {
            coeff = -coeff;
        }
        Some((coeff, GradedMonomial { factors }))
    }

    fn render(&self) -> Vec<String> {
        self.factors.iter().map(|(g, k)| format!("{g}^{k}")).collect()
    }
}

/// Finite sum of coefficient times graded monomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedElement {
    num_q: usize,
    num_p: usize,
    terms: BTreeMap<GradedMonomial, CoeffPoly>,
}

impl GradedElement {
    pub fn zero(num_q: usize, num_p: usize) -> Self {
        GradedElement { num_q, num_p, terms: BTreeMap::new() }
    }

    pub fn scalar(f: CoeffPoly) -> Self {
        let mut e = Self::zero(f.num_q(), f.num_p());
        e.add_term(GradedMonomial::unit(), f);
        e
    }

    pub fn generator(g: Generator, num_q: usize, num_p: usize) -> Self {
        Self::monomial(CoeffPoly::one(num_q, num_p), GradedMonomial::single(g))
    }

    pub fn monomial(coeff: CoeffPoly, mono: GradedMonomial) -> Self {
        let mut e = Self::zero(coeff.num_q(), coeff.num_p());
        e.add_term(mono, coeff);
        e
    }

    /// Coefficient times the normal-ordered product of `gens` in the given
    /// order.
    pub fn product(coeff: CoeffPoly, gens: &[Generator]) -> Self {
        let (nq, np) = (coeff.num_q(), coeff.num_p());
        match GradedMonomial::from_product(gens) {
            Some((sign, mono)) => Self::monomial(coeff.scale(&sign), mono),
            None => Self::zero(nq, np),
        }
    }

    pub fn num_q(&self) -> usize {
        self.num_q
    }

    pub fn num_p(&self) -> usize {
        self.num_p
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GradedMonomial, &CoeffPoly)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mono: &GradedMonomial) -> Option<&CoeffPoly> {
        self.terms.get(mono)
    }

    fn add_term(&mut self, mono: GradedMonomial, coeff: CoeffPoly) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.remove(&mono) {
            Some(old) => {
                let sum = &old + &coeff;
                if !sum.is_zero() {
                    self.terms.insert(mono, sum);
                }
            }
            None => {
                self.terms.insert(mono, coeff);
            }
        }
    }

    fn check_signature(&self, other: &GradedElement) -> Result<()> {
        if self.num_q == other.num_q && self.num_p == other.num_p {
            Ok(())
        } else {
            Err(Error::SignatureMismatch("graded elements over different phase spaces".into()))
        }
    }

    pub fn checked_add(&self, rhs: &GradedElement) -> Result<GradedElement> {
        self.check_signature(rhs)?;
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn checked_sub(&self, rhs: &GradedElement) -> Result<GradedElement> {
        self.checked_add(&rhs.neg())
    }

    pub fn neg(&self) -> GradedElement {
        self.scale(&-Rational::one())
    }

    pub fn scale(&self, c: &Rational) -> GradedElement {
        let mut out = Self::zero(self.num_q, self.num_p);
        for (m, f) in &self.terms {
            out.add_term(m.clone(), f.scale(c));
        }
        out
    }

    /// Multiplies every coefficient by an (even) phase-space polynomial.
    pub fn scale_poly(&self, f: &CoeffPoly) -> Result<GradedElement> {
        let mut out = Self::zero(self.num_q, self.num_p);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.checked_mul(f)?);
        }
        Ok(out)
    }

    /// Graded product with Koszul signs.
    pub fn graded_mul(&self, rhs: &GradedElement) -> Result<GradedElement> {
        self.check_signature(rhs)?;
        let mut out = Self::zero(self.num_q, self.num_p);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                if let Some((sign, m)) = m1.mul(m2) {
                    out.add_term(m, (c1 * c2).scale(&sign));
                }
            }
        }
        Ok(out)
    }

    /// Graded left derivative `d/dg`.
    pub fn left_derivative(&self, g: &Generator) -> GradedElement {
        let mut out = Self::zero(self.num_q, self.num_p);
        for (m, c) in &self.terms {
            if let Some((k, rest)) = m.left_derivative(g) {
                out.add_term(rest, c.scale(&k));
            }
        }
        out
    }

    /// Parity of a homogeneous element; `None` for zero or mixed parity.
    pub fn parity(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(GradedMonomial::parity);
        let first = it.next()?;
        it.all(|p| p == first).then_some(first)
    }

    /// `(even part, odd part)`
    pub fn parity_parts(&self) -> (GradedElement, GradedElement) {
        let mut even = Self::zero(self.num_q, self.num_p);
        let mut odd = Self::zero(self.num_q, self.num_p);
        for (m, c) in &self.terms {
            let target = if m.parity() == 0 { &mut even } else { &mut odd };
            target.add_term(m.clone(), c.clone());
        }
        (even, odd)
    }

    /// Every generator occurring in the element.
    pub fn generators(&self) -> Vec<Generator> {
        let mut gens: Vec<Generator> = self.terms.keys().flat_map(|m| m.factors.iter().map(|(g, _)| *g)).collect();
        gens.sort();
        gens.dedup();
        gens
    }

    /// Antighost number of a homogeneous element.
    pub fn antighost_number(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(GradedMonomial::antighost_number);
        let first = it.next()?;
        it.all(|k| k == first).then_some(first)
    }

    pub fn has_ghosts(&self) -> bool {
        self.terms.keys().any(|m| m.factors.iter().any(|(g, _)| g.kind == GenKind::Ghost))
    }

    pub fn map_coefficients(&self, f: impl Fn(&CoeffPoly) -> Result<CoeffPoly>) -> Result<GradedElement> {
        let mut out: Option<GradedElement> = None;
        for (m, c) in &self.terms {
            let nc = f(c)?;
            let o = out.get_or_insert_with(|| Self::zero(nc.num_q(), nc.num_p()));
            o.add_term(m.clone(), nc);
        }
        Ok(out.unwrap_or_else(|| Self::zero(self.num_q, self.num_p)))
    }
}

impl fmt::Display for GradedElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        for (m, c) in &self.terms {
            let gens = m.render();
            for (e, r) in c.terms().collect::<Vec<_>>().into_iter().rev() {
                parts.push(render_term(r, &monomial_factors(e, self.num_q), &gens));
            }
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl GradedElement {
    pub fn is_scalar(&self) -> bool {
        self.terms.keys().all(GradedMonomial::is_unit)
    }

    /// Coefficient of the unit monomial.
    pub fn scalar_part(&self) -> CoeffPoly {
        self.terms
            .get(&GradedMonomial::unit())
            .cloned()
            .unwrap_or_else(|| CoeffPoly::zero(self.num_q, self.num_p))
    }
}
