//! Quadratic Lagrangians `L = 1/2 a_ij v^i v^j + b_i v^i + c` on a trivial
//! configuration bundle, their Legendre map and the constant-rank checks.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{sym_pinv, sym_rank, DEFAULT_ZERO_EIGEN_TOL};
use crate::poly::{CoeffPoly, FloatPoly, PolyLiteral, PolyMatrix, Point, Var};

/// Axis-aligned `(t, q)` box used to build validation grids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub t: [f64; 2],
    pub q: Vec<[f64; 2]>,
}

impl Domain {
    pub fn unit(m: usize) -> Self {
        Domain { t: [0.0, 1.0], q: vec![[-1.0, 1.0]; m] }
    }

    /// Lattice with `per_axis` points along each of the `m + 1` axes.
    pub fn lattice(&self, per_axis: usize) -> Vec<Point> {
        let per_axis = per_axis.max(1);
        let axes: Vec<[f64; 2]> = std::iter::once(self.t).chain(self.q.iter().copied()).collect();
        let coord = |range: [f64; 2], k: usize| {
            if per_axis == 1 {
                0.5 * (range[0] + range[1])
            } else {
                range[0] + (range[1] - range[0]) * k as f64 / (per_axis - 1) as f64
            }
        };
        let total = per_axis.pow(axes.len() as u32);
        (0..total)
            .map(|mut idx| {
                let mut xs = Vec::with_capacity(axes.len());
                for range in &axes {
                    xs.push(coord(*range, idx % per_axis));
                    idx /= per_axis;
                }
                Point::config(xs[0], xs[1..].to_vec())
            })
            .collect()
    }
}

/// JSON model file: `{m, a, b, c, domain, constraints}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ModelConfig {
    pub m: usize,
    pub a: Vec<Vec<Vec<PolyLiteral>>>,
    pub b: Vec<Vec<PolyLiteral>>,
    pub c: Vec<PolyLiteral>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
    /// Optional user constraint set, polynomials in `(t, q, p)`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<Vec<PolyLiteral>>,
}

impl ModelConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_model(&self) -> Result<QuadraticModel> {
        let m = self.m;
        if m == 0 {
            return Err(Error::InvalidInput("m must be positive".into()));
        }
        let a = PolyMatrix::from_literal(&self.a, m, 0)?;
        let b = self.b.iter().map(|l| CoeffPoly::from_literal(l, m, 0)).collect::<Result<Vec<_>>>()?;
        let c = CoeffPoly::from_literal(&self.c, m, 0)?;
        let mut model = QuadraticModel::new(a, b, c)?;
        if let Some(d) = &self.domain {
            if d.q.len() != m {
                return Err(Error::DimensionMismatch(format!("domain has {} q-ranges for m = {m}", d.q.len())));
            }
            if d.t[0] > d.t[1] || d.q.iter().any(|r| r[0] > r[1]) {
                return Err(Error::InvalidInput("domain range with lo > hi".into()));
            }
            model.domain = d.clone();
        }
        Ok(model)
    }

    pub fn constraint_polys(&self) -> Result<Vec<CoeffPoly>> {
        self.constraints.iter().map(|l| CoeffPoly::from_literal(l, self.m, self.m)).collect()
    }

    pub fn from_model(model: &QuadraticModel) -> Self {
        ModelConfig {
            m: model.m,
            a: model.a.to_literal(),
            b: model.b.iter().map(CoeffPoly::to_literal).collect(),
            c: model.c.to_literal(),
            domain: Some(model.domain.clone()),
            constraints: Vec::new(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuadraticModel {
    m: usize,
    a: PolyMatrix,
    b: Vec<CoeffPoly>,
    c: CoeffPoly,
    pub domain: Domain,
    fa: Vec<FloatPoly>,
    fb: Vec<FloatPoly>,
    fc: FloatPoly,
}

impl QuadraticModel {
    /// `a` must be an exactly symmetric `m x m` matrix of configuration
    /// polynomials (no momenta), `b` a vector of `m` of them.
    pub fn new(a: PolyMatrix, b: Vec<CoeffPoly>, c: CoeffPoly) -> Result<Self> {
        let m = a.rows();
        if !a.is_square() || b.len() != m {
            return Err(Error::DimensionMismatch(format!(
                "a is {}x{}, b has {} entries",
                a.rows(),
                a.cols(),
                b.len()
            )));
        }
        let config_sig = |p: &CoeffPoly| p.num_q() == m && p.num_p() == 0;
        if !a.entries().iter().chain(&b).chain(std::iter::once(&c)).all(config_sig) {
            return Err(Error::SignatureMismatch(format!("coefficients must be polynomials in (t, q1..q{m})")));
        }
        if !a.is_symmetric() {
            return Err(Error::AsymmetricMatrix { asymmetry: f64::INFINITY, tol: 0.0 });
        }
        Ok(QuadraticModel {
            m,
            fa: a.entries().iter().map(CoeffPoly::compile).collect(),
            fb: b.iter().map(CoeffPoly::compile).collect(),
            fc: c.compile(),
            a,
            b,
            c,
            domain: Domain::unit(m),
        })
    }

    pub fn with_domain(mut self, domain: Domain) -> Self {
        self.domain = domain;
        self
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn a(&self) -> &PolyMatrix {
        &self.a
    }

    pub fn b(&self) -> &[CoeffPoly] {
        &self.b
    }

    pub fn c(&self) -> &CoeffPoly {
        &self.c
    }

    /// True when `a` has no `(t, q)` dependence.
    pub fn has_constant_metric(&self) -> bool {
        self.a.is_constant()
    }

    fn config_flat(&self, t: f64, q: &[f64]) -> Result<Vec<f64>> {
        if q.len() != self.m {
            return Err(Error::MissingCoordinate(format!("expected {} positions, got {}", self.m, q.len())));
        }
        let mut x = Vec::with_capacity(1 + self.m);
        x.push(t);
        x.extend_from_slice(q);
        Ok(x)
    }

    pub fn a_at(&self, t: f64, q: &[f64]) -> Result<DMatrix<f64>> {
        let x = self.config_flat(t, q)?;
        Ok(DMatrix::from_fn(self.m, self.m, |i, j| self.fa[i * self.m + j].eval(&x)))
    }

    pub fn b_at(&self, t: f64, q: &[f64]) -> Result<DVector<f64>> {
        let x = self.config_flat(t, q)?;
        Ok(DVector::from_iterator(self.m, self.fb.iter().map(|f| f.eval(&x))))
    }

    pub fn c_at(&self, t: f64, q: &[f64]) -> Result<f64> {
        let x = self.config_flat(t, q)?;
        Ok(self.fc.eval(&x))
    }

    /// `1/2 v.a.v + b.v + c`
    pub fn lagrangian_eval(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<f64> {
        let v = self.velocity(qdot)?;
        let a = self.a_at(t, q)?;
        let b = self.b_at(t, q)?;
        Ok(0.5 * v.dot(&(&a * &v)) + b.dot(&v) + self.c_at(t, q)?)
    }

    /// `p_i = a_ij v^j + b_i`
    pub fn legendre_map(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
        let v = self.velocity(qdot)?;
        let p = self.a_at(t, q)? * v + self.b_at(t, q)?;
        Ok(p.iter().copied().collect())
    }

    /// `dL/dq^i` at `(t, q, qdot)`.
    pub fn lagrangian_q_gradient(&self, t: f64, q: &[f64], qdot: &[f64]) -> Result<Vec<f64>> {
        let v = self.velocity(qdot)?;
        let pt = Point::config(t, q.to_vec());
        (0..self.m)
            .map(|i| {
                let var = Var::Q(i);
                let da = self.a.map(|e| e.differentiate(var))?.evaluate(&pt)?;
                let db = self.b.iter().map(|e| e.differentiate(var)?.evaluate(&pt)).collect::<Result<Vec<_>>>()?;
                let dc = self.c.differentiate(var)?.evaluate(&pt)?;
                Ok(0.5 * v.dot(&(&da * &v)) + DVector::from_vec(db).dot(&v) + dc)
            })
            .collect()
    }

    fn velocity(&self, qdot: &[f64]) -> Result<DVector<f64>> {
        if qdot.len() != self.m {
            return Err(Error::MissingCoordinate(format!("expected {} velocities, got {}", self.m, qdot.len())));
        }
        Ok(DVector::from_column_slice(qdot))
    }
}

/// Components `Gamma^i(t, q)` of the horizontal field `d_t + Gamma^i d_i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReferenceFrame {
    pub gamma: Vec<CoeffPoly>,
}

impl ReferenceFrame {
    pub fn new(gamma: Vec<CoeffPoly>) -> Self {
        ReferenceFrame { gamma }
    }

    pub fn zero(m: usize) -> Self {
        ReferenceFrame { gamma: vec![CoeffPoly::zero(m, 0); m] }
    }

    pub fn at(&self, t: f64, q: &[f64]) -> Result<Vec<f64>> {
        let pt = Point::config(t, q.to_vec());
        self.gamma.iter().map(|g| g.evaluate(&pt)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub rank: usize,
    pub max_b_residual: f64,
    pub points_checked: usize,
    pub tol: f64,
}

/// Checks the constant-rank hypothesis and `b in Im a` on every grid point.
pub fn validate_model(model: &QuadraticModel, grid: &[Point], tol: f64) -> Result<ValidationReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty validation grid".into()));
    }
    let rank_tol = tol.max(DEFAULT_ZERO_EIGEN_TOL);
    let mut first: Option<(usize, Vec<f64>)> = None;
    let mut max_res: f64 = 0.0;
    for pt in grid {
        let a = model.a_at(pt.t, &pt.q)?;
        let rank = sym_rank(&a, rank_tol);
        let coords: Vec<f64> = std::iter::once(pt.t).chain(pt.q.iter().copied()).collect();
        match &first {
            None => first = Some((rank, coords.clone())),
            Some((r0, at0)) if *r0 != rank => {
                return Err(Error::ConstantRankViolation {
                    first_rank: *r0,
                    first_at: at0.clone(),
                    rank,
                    at: coords,
                })
            }
            _ => {}
        }
        let s0 = sym_pinv(&a, rank_tol)?;
        let b = model.b_at(pt.t, &pt.q)?;
        let res = (&b - &a * (&s0 * &b)).amax();
        if res > tol {
            return Err(Error::ZeroSectionViolation { residual: res, at: coords });
        }
        max_res = max_res.max(res);
    }
    Ok(ValidationReport {
        rank: first.map(|f| f.0).unwrap_or(0),
        max_b_residual: max_res,
        points_checked: grid.len(),
        tol,
    })
}

/// Ready-made models used throughout the tests and the demo.
pub mod catalog {
    use super::*;
    use crate::poly::{int, rat, Rational};

    fn constant_matrix(rows: &[&[i64]]) -> PolyMatrix {
        let m = rows.len();
        PolyMatrix::from_fn(m, m, |i, j| CoeffPoly::constant(int(rows[i][j]), m, 0))
    }

    /// One-dimensional harmonic oscillator `1/2 v^2 - 1/2 q^2`.
    pub fn regular_oscillator() -> QuadraticModel {
        let c = CoeffPoly::q(0, 1, 0).pow(2).scale(&rat(-1, 2));
        QuadraticModel::new(constant_matrix(&[&[1]]), vec![CoeffPoly::zero(1, 0)], c).unwrap()
    }

    /// `a = diag(1, 0)`, `b = 0`, `c = 0`.
    pub fn diagonal_degenerate() -> QuadraticModel {
        QuadraticModel::new(constant_matrix(&[&[1, 0], &[0, 0]]), vec![CoeffPoly::zero(2, 0); 2], CoeffPoly::zero(2, 0))
            .unwrap()
    }

    /// `a = diag(1, 0)` with potential `c = -1/2 (q2)^2`.
    pub fn diagonal_degenerate_with_potential() -> QuadraticModel {
        let c = CoeffPoly::q(1, 2, 0).pow(2).scale(&rat(-1, 2));
        QuadraticModel::new(constant_matrix(&[&[1, 0], &[0, 0]]), vec![CoeffPoly::zero(2, 0); 2], c).unwrap()
    }

    /// `a = [[1, 1], [1, 1]]`, `b = 0`, `c = 0`.
    pub fn coupled_degenerate() -> QuadraticModel {
        QuadraticModel::new(constant_matrix(&[&[1, 1], &[1, 1]]), vec![CoeffPoly::zero(2, 0); 2], CoeffPoly::zero(2, 0))
            .unwrap()
    }

    /// `a = [[1]]`, `b = [t]`, `c = 0`.
    pub fn drifting_free_particle() -> QuadraticModel {
        QuadraticModel::new(constant_matrix(&[&[1]]), vec![CoeffPoly::t(1, 0)], CoeffPoly::zero(1, 0)).unwrap()
    }

    /// `a = [[q1]]`: rank drops at `q1 = 0`.
    pub fn rank_varying() -> QuadraticModel {
        let a = PolyMatrix::from_fn(1, 1, |_, _| CoeffPoly::q(0, 1, 0));
        QuadraticModel::new(a, vec![CoeffPoly::zero(1, 0)], CoeffPoly::zero(1, 0))
            .unwrap()
            .with_domain(Domain { t: [0.0, 1.0], q: vec![[0.0, 1.0]] })
    }

    /// Constant metric `a = sum_k w_k v_k v_k^T` from integer data.
    pub fn from_rank_factors(m: usize, factors: &[(Rational, Vec<i64>)]) -> QuadraticModel {
        let a = PolyMatrix::from_fn(m, m, |i, j| {
            let v = factors.iter().fold(Rational::from_integer(0.into()), |acc, (w, vec)| {
                acc + w * int(vec[i] * vec[j])
            });
            CoeffPoly::constant(v, m, 0)
        });
        QuadraticModel::new(a, vec![CoeffPoly::zero(m, 0); m], CoeffPoly::zero(m, 0)).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::catalog::*;
    use super::*;

    #[test]
    fn validation_examples() {
        let grid = Domain::unit(2).lattice(3);
        assert_eq!(grid.len(), 27);
        let r = validate_model(&diagonal_degenerate(), &grid, 1e-9).unwrap();
        assert_eq!((r.rank, r.max_b_residual), (1, 0.0));
        let r = validate_model(&coupled_degenerate(), &grid, 1e-9).unwrap();
        assert_eq!(r.rank, 1);
        assert!(r.max_b_residual < 1e-15);

        let rv = rank_varying();
        let err = validate_model(&rv, &rv.domain.lattice(3), 1e-9).unwrap_err();
        assert!(matches!(err, Error::ConstantRankViolation { .. }));
    }

    #[test]
    fn validation_rejects_b_outside_image() {
        let a = diagonal_degenerate().a().clone();
        let b = vec![CoeffPoly::zero(2, 0), CoeffPoly::one(2, 0)];
        let model = QuadraticModel::new(a, b, CoeffPoly::zero(2, 0)).unwrap();
        let err = validate_model(&model, &Domain::unit(2).lattice(2), 1e-9).unwrap_err();
        assert!(matches!(err, Error::ZeroSectionViolation { .. }));
        assert!(validate_model(&model, &[], 1e-9).is_err());
    }

    #[test]
    fn lagrangian_examples() {
        assert_eq!(regular_oscillator().lagrangian_eval(0.0, &[1.0], &[0.0]).unwrap(), -0.5);
        assert_eq!(diagonal_degenerate().lagrangian_eval(0.0, &[0.0, 0.0], &[3.0, 7.0]).unwrap(), 4.5);
        assert_eq!(coupled_degenerate().lagrangian_eval(0.3, &[1.0, 2.0], &[0.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(diagonal_degenerate().legendre_map(0.0, &[0.0, 0.0], &[3.0, 7.0]).unwrap(), vec![3.0, 0.0]);
        assert_eq!(coupled_degenerate().legendre_map(0.0, &[0.0, 0.0], &[1.0, 0.0]).unwrap(), vec![1.0, 1.0]);
        assert_eq!(diagonal_degenerate().legendre_map(0.0, &[0.5, 0.5], &[0.0, 0.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn model_rejects_asymmetric_metric() {
        let a = PolyMatrix::from_fn(2, 2, |i, j| CoeffPoly::constant(crate::poly::int((i * 2 + j) as i64), 2, 0));
        assert!(QuadraticModel::new(a, vec![CoeffPoly::zero(2, 0); 2], CoeffPoly::zero(2, 0)).is_err());
    }

    #[test]
    fn config_round_trip() {
        let model = coupled_degenerate();
        let cfg = ModelConfig::from_model(&model);
        let text = serde_json::to_string(&cfg).unwrap();
        let back = ModelConfig::from_json(&text).unwrap().to_model().unwrap();
        assert_eq!(back.a(), model.a());
        assert_eq!(back.c(), model.c());
    }
}
