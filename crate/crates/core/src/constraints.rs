//! Constraint sets on `V*Q`: ideal membership, first/second class split and
//! the iterative secondary-constraint search.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{extended_bracket, momentum_lattice, poisson_v, HamiltonianForm};
use crate::linalg::RatMatrix;
use crate::model::QuadraticModel;
use crate::poly::{CoeffPoly, Point, Rational, Var};
use crate::split::{constraint_polys, SigmaSplit};

#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintSet {
    pub generators: Vec<CoeffPoly>,
    /// Linear relations `sum_k w_k g_k = 0` among the generators.
    pub relations: Vec<Vec<Rational>>,
}

impl ConstraintSet {
    pub fn new(generators: Vec<CoeffPoly>) -> Result<Self> {
        if let Some(first) = generators.first() {
            let m = first.num_q();
            if generators.iter().any(|g| g.num_q() != m || g.num_p() != m) {
                return Err(Error::SignatureMismatch("constraints must share one phase space".into()));
            }
        }
        let relations = linear_relations(&generators);
        Ok(ConstraintSet { generators, relations })
    }

    /// Non-vanishing primary constraints `R_i`.
    pub fn primary(split: &SigmaSplit, model: &QuadraticModel) -> Result<Self> {
        let polys = constraint_polys(split, model)?.into_iter().filter(|r| !r.is_zero()).collect();
        Self::new(polys)
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }
}

fn affine_row(g: &CoeffPoly) -> Option<Vec<Rational>> {
    if g.degree() > 1 {
        return None;
    }
    let n = g.arity();
    let mut row = vec![Rational::zero(); n + 1];
    for (e, c) in g.terms() {
        match e.iter().position(|&k| k == 1) {
            Some(idx) => row[idx] = c.clone(),
            None => row[n] = c.clone(),
        }
    }
    Some(row)
}

/// Left null space of the generators' affine coefficient rows; empty when any
/// generator is nonlinear.
fn linear_relations(gens: &[CoeffPoly]) -> Vec<Vec<Rational>> {
    let Some(rows) = gens.iter().map(affine_row).collect::<Option<Vec<_>>>() else {
        return Vec::new();
    };
    if rows.is_empty() {
        return Vec::new();
    }
    let mat = RatMatrix::from_rows(rows).expect("equal arity").transpose();
    nullspace(&mat)
}

fn nullspace(mat: &RatMatrix) -> Vec<Vec<Rational>> {
    let (r, pivots) = mat.rref();
    let n = mat.cols();
    (0..n)
        .filter(|c| !pivots.contains(c))
        .map(|free| {
            let mut v = vec![Rational::zero(); n];
            v[free] = Rational::one();
            for (row, &pc) in pivots.iter().enumerate() {
                v[pc] = -r.get(row, free).clone();
            }
            v
        })
        .collect()
}

/// Ideal generated by affine-linear polynomials. Its zero set is an affine
/// subspace, so membership is exact vanishing after substituting a
/// parametrization of that subspace.
#[derive(Clone, Debug)]
pub struct LinearIdeal {
    substitution: Vec<(Var, CoeffPoly)>,
}

impl LinearIdeal {
    pub fn new(gens: &[CoeffPoly], num_q: usize, num_p: usize) -> Result<Self> {
        let rows = gens
            .iter()
            .map(|g| {
                affine_row(g).ok_or_else(|| {
                    Error::NotApplicable(format!("exact ideal membership needs affine-linear generators, got {g}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let arity = 1 + num_q + num_p;
        if rows.is_empty() {
            return Ok(LinearIdeal { substitution: Vec::new() });
        }
        let (r, pivots) = RatMatrix::from_rows(rows)?.rref();
        if pivots.last() == Some(&arity) {
            return Err(Error::InvalidConstraint("constraints have no common zero; the ideal is the whole ring".into()));
        }
        let var_of = |idx: usize| match idx {
            0 => Var::T,
            i if i <= num_q => Var::Q(i - 1),
            i => Var::P(i - 1 - num_q),
        };
        let substitution = pivots
            .iter()
            .enumerate()
            .map(|(row, &pc)| {
                let mut expr = CoeffPoly::constant(-r.get(row, arity).clone(), num_q, num_p);
                for col in pc + 1..arity {
                    let c = r.get(row, col);
                    if !c.is_zero() {
                        expr = &expr - &CoeffPoly::var(var_of(col), num_q, num_p)?.scale(c);
                    }
                }
                Ok((var_of(pc), expr))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(LinearIdeal { substitution })
    }

    /// Restriction of `f` to the zero set.
    pub fn reduce(&self, f: &CoeffPoly) -> Result<CoeffPoly> {
        f.substitute(&self.substitution)
    }

    pub fn contains(&self, f: &CoeffPoly) -> Result<bool> {
        Ok(self.reduce(f)?.is_zero())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    First,
    Second,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MembershipMode {
    Symbolic,
    Sampled,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub classes: Vec<ConstraintClass>,
    /// `brackets[i][j] = {g_i, g_j}_V`
    pub brackets: Vec<Vec<CoeffPoly>>,
    /// Whether `brackets[i][j]` lies in the constraint ideal.
    pub in_ideal: Vec<Vec<bool>>,
}

/// Sampled zero set of constraints that are affine in the momenta: at each
/// `(t, q)` where the linear system is solvable, momenta are drawn from the
/// solution space.
fn sampled_zero_set(set: &ConstraintSet, grid: &[Point], tol: f64) -> Result<Vec<Point>> {
    let m = set.generators[0].num_q();
    let n = set.len();
    if set.generators.iter().any(|g| g.degree_in_p() > 1) {
        return Err(Error::NotApplicable("sampled membership needs momentum-affine constraints".into()));
    }
    let coeff: Vec<Vec<crate::poly::FloatPoly>> = set
        .generators
        .iter()
        .map(|g| {
            let base = g.substitute(&(0..m).map(|i| (Var::P(i), CoeffPoly::zero(m, m))).collect::<Vec<_>>())?;
            let mut row = vec![base.compile()];
            for i in 0..m {
                row.push(g.d(Var::P(i)).compile());
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for pt in grid {
        let mut x = vec![pt.t];
        x.extend_from_slice(&pt.q);
        x.extend(std::iter::repeat_n(0.0, m));
        let g0 = DVector::from_iterator(n, coeff.iter().map(|r| r[0].eval(&x)));
        let gm = DMatrix::from_fn(n, m, |k, i| coeff[k][i + 1].eval(&x));
        let part = gm
            .clone()
            .svd(true, true)
            .solve(&(-&g0), 1e-12)
            .map_err(|e| Error::InvalidInput(e.to_string()))?;
        if (&gm * &part + &g0).amax() > tol {
            continue;
        }
        let kernel = kernel_basis(&gm);
        for z in momentum_lattice(kernel.len().min(4)) {
            let mut p = part.clone();
            for (w, v) in z.iter().zip(&kernel) {
                p += v * *w;
            }
            out.push(Point::new(pt.t, pt.q.clone(), p.iter().copied().collect()));
        }
    }
    if out.is_empty() {
        return Err(Error::InvalidConstraint("no grid point lies over the constraint set".into()));
    }
    Ok(out)
}

/// Orthonormal kernel basis of `mat` from the eigenvectors of `mat^T mat`.
fn kernel_basis(mat: &DMatrix<f64>) -> Vec<DVector<f64>> {
    let gram = mat.transpose() * mat;
    let eig = nalgebra::SymmetricEigen::new(gram);
    eig.eigenvalues
        .iter()
        .enumerate()
        .filter(|(_, l)| l.abs() <= 1e-12)
        .map(|(k, _)| eig.eigenvectors.column(k).into_owned())
        .collect()
}

/// First/second class split. In symbolic mode the constraints must be
/// affine-linear; in sampled mode they must be affine in the momenta and
/// membership is vanishing to `tol` on sampled points of their zero set.
pub fn classify_constraints(
    set: &ConstraintSet,
    mode: MembershipMode,
    grid: &[Point],
    tol: f64,
) -> Result<Classification> {
    let n = set.len();
    if n == 0 {
        return Ok(Classification { classes: Vec::new(), brackets: Vec::new(), in_ideal: Vec::new() });
    }
    let m = set.generators[0].num_q();
    let mut brackets = vec![Vec::with_capacity(n); n];
    for (i, gi) in set.generators.iter().enumerate() {
        for gj in &set.generators {
            brackets[i].push(poisson_v(gi, gj)?);
        }
    }
    let in_ideal: Vec<Vec<bool>> = match mode {
        MembershipMode::Symbolic => {
            let ideal = LinearIdeal::new(&set.generators, m, m)?;
            brackets.iter().map(|row| row.iter().map(|b| ideal.contains(b)).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?
        }
        MembershipMode::Sampled => {
            let points = sampled_zero_set(set, grid, tol)?;
            brackets
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|b| {
                            let f = b.compile();
                            Ok(points.iter().all(|pt| {
                                let x = pt.flat_for(m, m).expect("sampled point dimensions");
                                f.eval(&x).abs() <= tol
                            }))
                        })
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<_>>()?
        }
    };
    let classes = in_ideal
        .iter()
        .map(|row| if row.iter().all(|&b| b) { ConstraintClass::First } else { ConstraintClass::Second })
        .collect();
    Ok(Classification { classes, brackets, in_ideal })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgorithmOutcome {
    /// Generator lists after each round, starting with the initial set.
    pub chain: Vec<Vec<CoeffPoly>>,
    pub closed: bool,
}

impl AlgorithmOutcome {
    pub fn final_set(&self) -> &[CoeffPoly] {
        self.chain.last().map(Vec::as_slice).unwrap_or(&[])
    }
}

fn normalize(f: &CoeffPoly) -> CoeffPoly {
    match f.leading_coefficient() {
        Some(c) => f.scale(&(Rational::one() / c.clone())),
        None => f.clone(),
    }
}

/// Adjoins `{H*, f}` for every generator whose bracket does not vanish on
/// the current constraint set, until nothing new appears or `max_rounds`
/// rounds have run.
pub fn constraint_algorithm(h: &HamiltonianForm, initial: &ConstraintSet, max_rounds: usize) -> Result<AlgorithmOutcome> {
    let m = h.m();
    let mut current: Vec<CoeffPoly> = initial.generators.clone();
    let mut chain = vec![current.clone()];
    for _ in 0..max_rounds {
        let mut ideal = LinearIdeal::new(&current, m, m)?;
        let mut added = false;
        let snapshot = current.clone();
        for f in &snapshot {
            let reduced = ideal.reduce(&extended_bracket(f, h)?)?;
            if reduced.is_zero() {
                continue;
            }
            current.push(normalize(&reduced));
            ideal = LinearIdeal::new(&current, m, m)?;
            added = true;
        }
        if !added {
            return Ok(AlgorithmOutcome { chain, closed: true });
        }
        chain.push(current.clone());
    }
    let ideal = LinearIdeal::new(&current, m, m)?;
    let closed = current
        .iter()
        .map(|f| ideal.contains(&extended_bracket(f, h)?))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .all(|b| b);
    Ok(AlgorithmOutcome { chain, closed })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::build_hamiltonian;
    use crate::model::catalog::*;
    use crate::poly::{int, rat};
    use crate::split::{default_sigma, solve_connection};

    fn p(i: usize) -> CoeffPoly {
        CoeffPoly::p(i, 2, 2)
    }

    fn q(i: usize) -> CoeffPoly {
        CoeffPoly::q(i, 2, 2)
    }

    fn form(model: &QuadraticModel) -> HamiltonianForm {
        let s = default_sigma(model).unwrap();
        let frame = solve_connection(model, &s, &vec![CoeffPoly::zero(model.m(), 0); model.m()]).unwrap();
        build_hamiltonian(model, &s, &frame).unwrap()
    }

    #[test]
    fn linear_ideal_membership() {
        let ideal = LinearIdeal::new(&[p(1)], 2, 2).unwrap();
        assert!(ideal.contains(&(&p(1) * &q(0))).unwrap());
        assert!(!ideal.contains(&p(0)).unwrap());
        let bad = LinearIdeal::new(&[p(1), &p(1) - &CoeffPoly::one(2, 2)], 2, 2);
        assert!(matches!(bad, Err(Error::InvalidConstraint(_))));
        assert!(matches!(LinearIdeal::new(&[p(1).pow(2)], 2, 2), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn classification_examples() {
        let grid = diagonal_degenerate().domain.lattice(3);
        let set = ConstraintSet::new(vec![p(1)]).unwrap();
        let c = classify_constraints(&set, MembershipMode::Symbolic, &grid, 1e-10).unwrap();
        assert_eq!(c.classes, vec![ConstraintClass::First]);

        let set = ConstraintSet::new(vec![p(1), q(1)]).unwrap();
        for mode in [MembershipMode::Symbolic, MembershipMode::Sampled] {
            let c = classify_constraints(&set, mode, &grid, 1e-10).unwrap();
            assert_eq!(c.classes, vec![ConstraintClass::Second, ConstraintClass::Second]);
            assert_eq!(c.brackets[0][1], CoeffPoly::one(2, 2));
            assert_eq!(c.brackets[1][0], CoeffPoly::constant(int(-1), 2, 2));
        }

        let m2 = coupled_degenerate();
        let set = ConstraintSet::primary(&default_sigma(&m2).unwrap(), &m2).unwrap();
        assert_eq!(set.len(), 2);
        assert_eq!(set.relations, vec![vec![int(1), int(1)]]);
        for mode in [MembershipMode::Symbolic, MembershipMode::Sampled] {
            let c = classify_constraints(&set, mode, &grid, 1e-10).unwrap();
            assert_eq!(c.classes, vec![ConstraintClass::First; 2]);
            assert!(c.brackets.iter().flatten().all(CoeffPoly::is_zero));
        }
    }

    #[test]
    fn algorithm_examples() {
        let h = form(&diagonal_degenerate());
        let out = constraint_algorithm(&h, &ConstraintSet::new(vec![p(1)]).unwrap(), 5).unwrap();
        assert!(out.closed);
        assert_eq!(out.chain, vec![vec![p(1)]]);

        let h = form(&diagonal_degenerate_with_potential());
        let out = constraint_algorithm(&h, &ConstraintSet::new(vec![p(1)]).unwrap(), 5).unwrap();
        assert!(out.closed);
        assert_eq!(out.chain, vec![vec![p(1)], vec![p(1), q(1)]]);

        let out = constraint_algorithm(&h, &ConstraintSet::new(vec![]).unwrap(), 5).unwrap();
        assert!(out.closed);
        assert_eq!(out.final_set().len(), 0);
    }

    #[test]
    fn algorithm_reports_open_when_rounds_run_out() {
        let h = form(&diagonal_degenerate_with_potential());
        let out = constraint_algorithm(&h, &ConstraintSet::new(vec![p(1)]).unwrap(), 0).unwrap();
        assert!(!out.closed);
        let scaled = ConstraintSet::new(vec![p(1).scale(&rat(2, 1))]).unwrap();
        let out = constraint_algorithm(&h, &scaled, 3).unwrap();
        assert_eq!(out.final_set()[1], q(1));
    }
}
