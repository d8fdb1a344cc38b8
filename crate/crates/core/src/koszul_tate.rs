//! Koszul-Tate resolution of the primary constraints at finite antighost
//! depth, its homology, and the BRST charge generating it.

use std::collections::HashMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graded::{GenKind, GradedElement, GradedMonomial, Generator};
use crate::linalg::{rank_of_rows, RatMatrix};
use crate::model::QuadraticModel;
use crate::poly::{int, CoeffPoly, PolyMatrix, Rational};
use crate::split::{constraint_polys, SigmaSplit};

pub const DEFAULT_TRUNCATION: u32 = 4;

/// Antighost tower `c[i,k]`, `1 <= k <= K`, over one model and splitting.
#[derive(Clone, Debug)]
pub struct KTComplex {
    m: usize,
    truncation: u32,
    projector: PolyMatrix,
    projector_exact: Option<RatMatrix>,
    constraints: Vec<CoeffPoly>,
    // images of c[i,k], indexed by [k - 1][i]
    images: Vec<Vec<GradedElement>>,
}

impl KTComplex {
    pub fn new(model: &QuadraticModel, split: &SigmaSplit, truncation: u32) -> Result<Self> {
        if truncation == 0 {
            return Err(Error::InvalidInput("truncation K must be at least 1".into()));
        }
        let m = model.m();
        let proj_config = split.projector(model)?;
        let projector_exact = proj_config.to_rationals();
        let projector = proj_config.with_momenta(m)?;
        let constraints = constraint_polys(split, model)?;
        let complement = PolyMatrix::identity(m, m, m).checked_sub(&projector)?;

        let mut images: Vec<Vec<GradedElement>> = Vec::with_capacity(truncation as usize);
        for level in 1..=truncation {
            let row = (0..m)
                .map(|i| {
                    if level == 1 {
                        return Ok(GradedElement::scalar(constraints[i].clone()));
                    }
                    let mat = if level % 2 == 0 { &projector } else { &complement };
                    let mut out = GradedElement::zero(m, m);
                    for k in 0..m {
                        let g = GradedElement::generator(Generator::antighost(k, level - 1), m, m);
                        out = out.checked_add(&g.scale_poly(mat.get(i, k))?)?;
                    }
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()?;
            images.push(row);
        }
        Ok(KTComplex { m, truncation, projector, projector_exact, constraints, images })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn truncation(&self) -> u32 {
        self.truncation
    }

    /// `a sigma0` lifted to `(t, q, p)`.
    pub fn projector(&self) -> &PolyMatrix {
        &self.projector
    }

    pub fn constraints(&self) -> &[CoeffPoly] {
        &self.constraints
    }

    pub fn antighost(&self, index: usize, level: u32) -> GradedElement {
        GradedElement::generator(Generator::antighost(index, level), self.m, self.m)
    }

    pub fn ghost(&self, index: usize, level: u32) -> GradedElement {
        GradedElement::generator(Generator::ghost(index, level), self.m, self.m)
    }

    /// Every antighost generator of the truncated tower.
    pub fn antighosts(&self) -> Vec<Generator> {
        (1..=self.truncation).flat_map(|k| (0..self.m).map(move |i| Generator::antighost(i, k))).collect()
    }

    fn generator_image(&self, g: &Generator) -> Result<&GradedElement> {
        if g.kind != GenKind::Antighost {
            return Err(Error::InvalidInput(format!("the differential is defined on antighosts only, got {g}")));
        }
        if g.level > self.truncation || g.index >= self.m {
            return Err(Error::InvalidInput(format!("{g} lies outside the tower (K = {}, m = {})", self.truncation, self.m)));
        }
        Ok(&self.images[g.level as usize - 1][g.index])
    }

    /// Random antighost element: up to `max_terms` products of one to three
    /// generators with small-integer coefficients of degree <= 3.
    pub fn random_element<R: Rng>(&self, rng: &mut R, max_terms: usize) -> GradedElement {
        let mut out = GradedElement::zero(self.m, self.m);
        let gens = self.antighosts();
        for _ in 0..rng.random_range(1..=max_terms) {
            let n = rng.random_range(1..=3);
            let factors: Vec<Generator> = (0..n).map(|_| gens[rng.random_range(0..gens.len())]).collect();
            let coeff = random_coefficient(rng, self.m);
            out = out.checked_add(&GradedElement::product(coeff, &factors)).expect("same signature");
        }
        out
    }
}

fn random_coefficient<R: Rng>(rng: &mut R, m: usize) -> CoeffPoly {
    let arity = 1 + 2 * m;
    let terms = (0..rng.random_range(1..=3)).map(|_| {
        let mut e = vec![0u32; arity];
        for _ in 0..rng.random_range(0..=3) {
            e[rng.random_range(0..arity)] += 1;
        }
        (e, int(rng.random_range(-3..=3)))
    });
    CoeffPoly::from_terms(m, m, terms.collect::<Vec<_>>()).expect("well-formed terms")
}

/// Koszul-Tate differential, an odd left antiderivation:
/// `delta(x) = sum_g delta(g) * dx/dg`.
pub fn kt_delta(x: &GradedElement, cx: &KTComplex) -> Result<GradedElement> {
    let mut out = GradedElement::zero(cx.m, cx.m);
    for g in x.generators() {
        let image = cx.generator_image(&g)?;
        out = out.checked_add(&image.graded_mul(&x.left_derivative(&g))?)?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub seed: u64,
    pub generators_checked: usize,
    pub random_checked: usize,
    /// Rendered inputs that broke the identity.
    pub failures: Vec<String>,
}

impl IdentityCheck {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn run_identity(
    cx: &KTComplex,
    trials: usize,
    seed: u64,
    check: impl Fn(&GradedElement) -> Result<bool>,
) -> Result<IdentityCheck> {
    let mut failures = Vec::new();
    let gens = cx.antighosts();
    for g in &gens {
        let e = GradedElement::generator(*g, cx.m, cx.m);
        if !check(&e)? {
            failures.push(e.to_string());
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let e = cx.random_element(&mut rng, 4);
        if !check(&e)? {
            failures.push(e.to_string());
        }
    }
    Ok(IdentityCheck { seed, generators_checked: gens.len(), random_checked: trials, failures })
}

/// `delta(delta(x)) = 0` on every generator and on seeded random elements.
pub fn check_nilpotency(cx: &KTComplex, trials: usize, seed: u64) -> Result<IdentityCheck> {
    run_identity(cx, trials, seed, |e| Ok(kt_delta(&kt_delta(e, cx)?, cx)?.is_zero()))
}

/// `Q = sum_{k <= K} cb[i,k] delta(c[i,k])`, with the imaginary unit of the
/// usual normalization absorbed into the ghosts.
pub fn brst_charge(cx: &KTComplex) -> Result<GradedElement> {
    let mut q = GradedElement::zero(cx.m, cx.m);
    for g in cx.antighosts() {
        let term = GradedElement::generator(g.conjugate(), cx.m, cx.m).graded_mul(cx.generator_image(&g)?)?;
        q = q.checked_add(&term)?;
    }
    Ok(q)
}

/// Ghost part of the graded Poisson bracket pairing `cb[i,k]` with `c[i,k]`:
/// `{x, y} = sum dx/dcb (right) dy/dc (left) - (-1)^k dx/dc (right) dy/dcb (left)`.
pub fn super_bracket(x: &GradedElement, y: &GradedElement) -> Result<GradedElement> {
    let mut gens: Vec<Generator> = x.generators().into_iter().chain(y.generators()).filter(|g| g.kind == GenKind::Antighost).collect();
    gens.extend(x.generators().into_iter().chain(y.generators()).filter(|g| g.kind == GenKind::Ghost).map(|g| g.conjugate()));
    gens.sort();
    gens.dedup();

    let (even, odd) = x.parity_parts();
    let mut out = GradedElement::zero(x.num_q(), x.num_p());
    for (part, parity) in [(even, 0u32), (odd, 1u32)] {
        if part.is_zero() {
            continue;
        }
        for c in &gens {
            let cb = c.conjugate();
            let k = c.parity();
            let sign = |extra: u32| if (k * parity + extra).is_multiple_of(2) { Rational::from_integer(1.into()) } else { -Rational::from_integer(1.into()) };
            let first = part.left_derivative(&cb).graded_mul(&y.left_derivative(c))?.scale(&sign(k));
            let second = part.left_derivative(c).graded_mul(&y.left_derivative(&cb))?.scale(&sign(0));
            out = out.checked_add(&first)?.checked_sub(&second)?;
        }
    }
    Ok(out)
}

/// `{Q, x} = delta(x)` on every generator and on seeded random elements.
pub fn verify_charge(cx: &KTComplex, trials: usize, seed: u64) -> Result<IdentityCheck> {
    let q = brst_charge(cx)?;
    run_identity(cx, trials, seed, |e| Ok(super_bracket(&q, e)? == kt_delta(e, cx)?))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Irreducibility {
    pub constraints: usize,
    pub independent: usize,
    pub irreducible: bool,
}

/// Compares the number of nonzero constraints with `rank(1 - a sigma0)`.
pub fn irreducibility(cx: &KTComplex) -> Result<Irreducibility> {
    let p = cx
        .projector_exact
        .as_ref()
        .ok_or_else(|| Error::NotApplicable("irreducibility needs a constant projector".into()))?;
    let comp = RatMatrix::identity(cx.m).sub(p);
    let constraints = cx.constraints.iter().filter(|r| !r.is_zero()).count();
    let independent = comp.rank();
    Ok(Irreducibility { constraints, independent, irreducible: constraints == independent })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub k: u32,
    #[serde(rename = "D")]
    pub d: u32,
    pub cycles: usize,
    pub boundaries: usize,
    pub h_dim: usize,
    /// Boundaries did not grow when the witness degree was raised by one.
    pub complete: bool,
    pub witness_degree: u32,
}

/// Antighost monomials of total level `level_sum` over the tower.
pub fn antighost_monomials(m: usize, truncation: u32, level_sum: u32) -> Vec<GradedMonomial> {
    let gens: Vec<Generator> = (1..=truncation.min(level_sum.max(1)))
        .flat_map(|k| (0..m).map(move |i| Generator::antighost(i, k)))
        .collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn rec(gens: &[Generator], remaining: u32, chosen: &mut Vec<Generator>, out: &mut Vec<GradedMonomial>) {
        if remaining == 0 {
            let (_, mono) = GradedMonomial::from_product(chosen).expect("odd generators used once");
            out.push(mono);
            return;
        }
        let Some((g, rest)) = gens.split_first() else { return };
        let max_mult = if g.is_odd() { 1 } else { remaining / g.level };
        for mult in (0..=max_mult.min(remaining / g.level)).rev() {
            for _ in 0..mult {
                chosen.push(*g);
            }
            rec(rest, remaining - mult * g.level, chosen, out);
            for _ in 0..mult {
                chosen.pop();
            }
        }
    }
    rec(&gens, level_sum, &mut chosen, &mut out);
    out
}

/// Exponent vectors over `(t, q, p)` of the momentum monomials of degree <= d.
pub fn momentum_monomials(m: usize, d: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; m];
    fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if i == cur.len() {
            let mut e = vec![0u32; 1 + cur.len()];
            e.extend_from_slice(cur);
            out.push(e);
            return;
        }
        for k in 0..=left {
            cur[i] = k;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, d, &mut cur, &mut out);
    out
}

type Coord = (GradedMonomial, Vec<u32>);

/// Matrix of delta from antighost degree `k` with p-degree <= `d` into
/// degree `k - 1`, as (row keys, source dimension, row-major entries).
fn delta_matrix(cx: &KTComplex, k: u32, d: u32) -> Result<(Vec<Coord>, usize, Vec<Rational>)> {
    let monos = antighost_monomials(cx.m, cx.truncation, k);
    let pmons = momentum_monomials(cx.m, d);
    let mut columns: Vec<Vec<(usize, Rational)>> = Vec::new();
    let mut index: HashMap<Coord, usize> = HashMap::new();
    let mut keys: Vec<Coord> = Vec::new();
    for mono in &monos {
        for e in &pmons {
            let coeff = CoeffPoly::from_terms(cx.m, cx.m, vec![(e.clone(), int(1))])?;
            let image = kt_delta(&GradedElement::monomial(coeff, mono.clone()), cx)?;
            let mut col = Vec::new();
            for (gm, poly) in image.terms() {
                for (pe, c) in poly.terms() {
                    let key = (gm.clone(), pe.clone());
                    let row = *index.entry(key.clone()).or_insert_with(|| {
                        keys.push(key);
                        keys.len() - 1
                    });
                    col.push((row, c.clone()));
                }
            }
            columns.push(col);
        }
    }
    let (rows, cols) = (keys.len(), columns.len());
    let mut data = vec![Rational::from_integer(0.into()); rows * cols];
    for (j, col) in columns.into_iter().enumerate() {
        for (i, c) in col {
            data[i * cols + j] = c;
        }
    }
    Ok((keys, cols, data))
}

fn p_degree(e: &[u32], m: usize) -> u32 {
    e[1 + m..].iter().sum()
}

/// Dimension of `delta(C_{k+1}, p-degree <= w)` intersected with p-degree <= d.
fn boundary_dim(cx: &KTComplex, k: u32, d: u32, w: u32) -> Result<usize> {
    let (keys, cols, data) = delta_matrix(cx, k + 1, w)?;
    let rows = keys.len();
    let full = rank_of_rows(rows, cols, data.clone());
    let high: Vec<usize> = (0..rows).filter(|&i| p_degree(&keys[i].1, cx.m) > d).collect();
    let mut sub = Vec::with_capacity(high.len() * cols);
    for &i in &high {
        sub.extend_from_slice(&data[i * cols..(i + 1) * cols]);
    }
    Ok(full - rank_of_rows(high.len(), cols, sub))
}

/// Fibrewise homology `H_k` on antighost-degree-`k` elements whose momentum
/// coefficients have degree <= `d`. Requires a constant projector and
/// `k + 1 <= K`.
pub fn homology(cx: &KTComplex, k: u32, d: u32) -> Result<HomologyReport> {
    if cx.projector_exact.is_none() {
        return Err(Error::NotApplicable("fibrewise homology needs a projector constant in (t, q)".into()));
    }
    if k + 1 > cx.truncation {
        return Err(Error::InvalidInput(format!("degree {k} needs generators of level {} but K = {}", k + 1, cx.truncation)));
    }
    let dim = antighost_monomials(cx.m, cx.truncation, k).len() * momentum_monomials(cx.m, d).len();
    let cycles = if k == 0 {
        dim
    } else {
        let (keys, cols, data) = delta_matrix(cx, k, d)?;
        cols - rank_of_rows(keys.len(), cols, data)
    };
    // delta preserves (p-degree + number of antighost factors), so a
    // preimage of anything in degree k, p-degree <= d, needs p-degree at
    // most d + k - 1.
    let w = d + k.saturating_sub(1);
    let boundaries = boundary_dim(cx, k, d, w)?;
    let complete = boundary_dim(cx, k, d, w + 1)? == boundaries;
    Ok(HomologyReport { k, d, cycles, boundaries, h_dim: cycles - boundaries, complete, witness_degree: w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog::*;
    use crate::poly::rat;
    use crate::split::{build_sigma, default_sigma};

    fn complex(model: &QuadraticModel, k: u32) -> KTComplex {
        KTComplex::new(model, &default_sigma(model).unwrap(), k).unwrap()
    }

    fn p(i: usize) -> CoeffPoly {
        CoeffPoly::p(i, 2, 2)
    }

    #[test]
    fn differential_on_generators() {
        let cx = complex(&diagonal_degenerate(), 4);
        let d = |i, k| kt_delta(&cx.antighost(i, k), &cx).unwrap();
        assert_eq!(d(1, 1), GradedElement::scalar(p(1)));
        assert!(d(0, 1).is_zero());
        assert_eq!(d(0, 2), cx.antighost(0, 1));
        assert!(d(1, 2).is_zero());
        assert_eq!(d(1, 3), cx.antighost(1, 2));

        let cx2 = complex(&coupled_degenerate(), 4);
        let expected = cx2.antighost(0, 1).checked_add(&cx2.antighost(1, 1)).unwrap().scale(&rat(1, 2));
        assert_eq!(kt_delta(&cx2.antighost(0, 2), &cx2).unwrap(), expected);
    }

    #[test]
    fn differential_rejects_out_of_range_generators() {
        let cx = complex(&diagonal_degenerate(), 2);
        assert!(matches!(kt_delta(&cx.antighost(0, 3), &cx), Err(Error::InvalidInput(_))));
        assert!(matches!(kt_delta(&cx.ghost(0, 1), &cx), Err(Error::InvalidInput(_))));
        assert!(matches!(
            KTComplex::new(&diagonal_degenerate(), &default_sigma(&diagonal_degenerate()).unwrap(), 0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn pointwise_split_is_rejected() {
        let model = rank_varying();
        let split = build_sigma(&model, &PolyMatrix::zeros(1, 1, 1, 0), None).unwrap();
        assert!(matches!(KTComplex::new(&model, &split, 2), Err(Error::RequiresSymbolic(_))));
    }

    #[test]
    fn nilpotency_examples() {
        for model in [diagonal_degenerate(), coupled_degenerate()] {
            let report = check_nilpotency(&complex(&model, 4), 25, 7).unwrap();
            assert!(report.passed(), "{:?}", report.failures);
            assert_eq!(report.generators_checked, 8);
        }
        let k1 = complex(&coupled_degenerate(), 1);
        let prod = k1.antighost(0, 1).graded_mul(&k1.antighost(1, 1)).unwrap();
        assert!(kt_delta(&kt_delta(&prod, &k1).unwrap(), &k1).unwrap().is_zero());
        assert!(check_nilpotency(&k1, 10, 1).unwrap().passed());
    }

    #[test]
    fn homology_examples() {
        let h0 = homology(&complex(&diagonal_degenerate(), 4), 0, 3).unwrap();
        assert_eq!((h0.cycles, h0.boundaries, h0.h_dim), (10, 6, 4));
        assert!(h0.complete);

        let cx = complex(&coupled_degenerate(), 4);
        let cycle = cx.antighost(0, 1).checked_add(&cx.antighost(1, 1)).unwrap();
        assert!(kt_delta(&cycle, &cx).unwrap().is_zero());
        assert_eq!(kt_delta(&cx.antighost(0, 2).scale(&int(2)), &cx).unwrap(), cycle);
        let h1 = homology(&cx, 1, 2).unwrap();
        assert_eq!(h1.h_dim, 0);
        assert!(h1.complete);

        let reg = complex(&regular_oscillator(), 3);
        assert_eq!(homology(&reg, 0, 3).unwrap().h_dim, 4);
        assert_eq!(homology(&reg, 1, 3).unwrap().h_dim, 0);
        assert!(matches!(homology(&reg, 3, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn charge_examples() {
        let cx = complex(&diagonal_degenerate(), 1);
        let q = brst_charge(&cx).unwrap();
        assert_eq!(q, cx.ghost(1, 1).scale_poly(&p(1)).unwrap());

        let cx2 = complex(&coupled_degenerate(), 1);
        let diff = cx2.ghost(0, 1).checked_sub(&cx2.ghost(1, 1)).unwrap();
        let expected = diff.scale_poly(&(&p(0) - &p(1))).unwrap().scale(&rat(1, 2));
        assert_eq!(brst_charge(&cx2).unwrap(), expected);

        let cx3 = complex(&diagonal_degenerate(), 3);
        let extra = cx3
            .ghost(0, 2)
            .graded_mul(&cx3.antighost(0, 1))
            .unwrap()
            .checked_add(&cx3.ghost(1, 3).graded_mul(&cx3.antighost(1, 2)).unwrap())
            .unwrap();
        let q3 = brst_charge(&cx3).unwrap();
        assert_eq!(q3.checked_sub(&q).unwrap(), extra);
    }

    #[test]
    fn bracket_examples() {
        let cx = complex(&diagonal_degenerate(), 4);
        let q = brst_charge(&cx).unwrap();
        assert_eq!(super_bracket(&q, &cx.antighost(1, 1)).unwrap(), GradedElement::scalar(p(1)));
        for j in 0..2 {
            assert!(super_bracket(&q, &GradedElement::scalar(p(j))).unwrap().is_zero());
        }
        let (cb, c) = (cx.ghost(0, 1), cx.antighost(0, 1));
        let lhs = super_bracket(&cb, &c).unwrap();
        let rhs = super_bracket(&c, &cb).unwrap();
        // both odd: {x, y} = {y, x}
        assert_eq!(lhs, rhs);
        assert_eq!(lhs, GradedElement::scalar(CoeffPoly::one(2, 2)));
        let (cb2, c2) = (cx.ghost(0, 2), cx.antighost(0, 2));
        assert_eq!(super_bracket(&cb2, &c2).unwrap(), super_bracket(&c2, &cb2).unwrap().neg());
    }

    #[test]
    fn charge_generates_differential() {
        for model in [diagonal_degenerate(), coupled_degenerate()] {
            let report = verify_charge(&complex(&model, 4), 20, 11).unwrap();
            assert!(report.passed(), "{:?}", report.failures);
        }
        let cx = complex(&diagonal_degenerate(), 2);
        let f = GradedElement::scalar(&p(0) * &p(1));
        assert!(super_bracket(&brst_charge(&cx).unwrap(), &f).unwrap().is_zero());
        assert!(kt_delta(&f, &cx).unwrap().is_zero());
    }

    #[test]
    fn irreducibility_counts() {
        let r = irreducibility(&complex(&coupled_degenerate(), 2)).unwrap();
        assert_eq!(r, Irreducibility { constraints: 2, independent: 1, irreducible: false });
        let r = irreducibility(&complex(&diagonal_degenerate(), 2)).unwrap();
        assert!(r.irreducible);
    }

    #[test]
    fn basis_enumeration() {
        assert_eq!(momentum_monomials(2, 3).len(), 10);
        assert_eq!(antighost_monomials(2, 4, 0).len(), 1);
        assert_eq!(antighost_monomials(2, 4, 1).len(), 2);
        // c2 (2) + c1c1' (1)
        assert_eq!(antighost_monomials(2, 4, 2).len(), 3);
    }
}
