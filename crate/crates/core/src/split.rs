//! The splitting map `sigma = sigma0 + sigma1` with `a sigma0 a = a`,
//! `sigma0 a sigma0 = sigma0`, `a sigma1 = sigma1 a = 0`, and the induced
//! decompositions of velocities, momenta and the primary constraints.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{asymmetry, max_abs, sym_pinv, DEFAULT_ZERO_EIGEN_TOL};
use crate::model::{QuadraticModel, ReferenceFrame};
use crate::poly::{CoeffPoly, PolyMatrix, Rational, Var};

#[derive(Clone, Debug, PartialEq)]
pub enum Sigma0 {
    /// Exact polynomial entries.
    Symbolic(PolyMatrix),
    /// Moore-Penrose pseudoinverse recomputed at each `(t, q)`.
    Pointwise { tol: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaSplit {
    sigma0: Sigma0,
    sigma1: PolyMatrix,
}

impl SigmaSplit {
    pub fn is_symbolic(&self) -> bool {
        matches!(self.sigma0, Sigma0::Symbolic(_))
    }

    pub fn sigma0(&self) -> &Sigma0 {
        &self.sigma0
    }

    pub fn sigma0_poly(&self) -> Option<&PolyMatrix> {
        match &self.sigma0 {
            Sigma0::Symbolic(s) => Some(s),
            Sigma0::Pointwise { .. } => None,
        }
    }

    pub fn sigma1(&self) -> &PolyMatrix {
        &self.sigma1
    }

    fn require_symbolic(&self, what: &str) -> Result<&PolyMatrix> {
        self.sigma0_poly().ok_or_else(|| Error::RequiresSymbolic(what.to_string()))
    }

    /// `a sigma0` as a polynomial matrix.
    pub fn projector(&self, model: &QuadraticModel) -> Result<PolyMatrix> {
        let s0 = self.require_symbolic("projector a sigma0")?;
        model.a().checked_mul(s0)
    }

    pub fn sigma0_at(&self, model: &QuadraticModel, t: f64, q: &[f64]) -> Result<DMatrix<f64>> {
        match &self.sigma0 {
            Sigma0::Symbolic(s) => s.evaluate(&crate::poly::Point::config(t, q.to_vec())),
            Sigma0::Pointwise { tol } => sym_pinv(&model.a_at(t, q)?, *tol),
        }
    }

    pub fn sigma1_at(&self, t: f64, q: &[f64]) -> Result<DMatrix<f64>> {
        self.sigma1.evaluate(&crate::poly::Point::config(t, q.to_vec()))
    }

    pub fn projector_at(&self, model: &QuadraticModel, t: f64, q: &[f64]) -> Result<DMatrix<f64>> {
        Ok(model.a_at(t, q)? * self.sigma0_at(model, t, q)?)
    }
}

/// Builds the splitting. Without an override, `sigma0` is the exact
/// Moore-Penrose pseudoinverse when `a` is constant and a pointwise one
/// otherwise.
pub fn build_sigma(
    model: &QuadraticModel,
    sigma1_choice: &PolyMatrix,
    sigma0_override: Option<&PolyMatrix>,
) -> Result<SigmaSplit> {
    let a = model.a();
    let m = model.m();
    let check_shape = |s: &PolyMatrix, name: &str| -> Result<()> {
        if s.rows() != m || s.cols() != m || s.num_q() != m || s.num_p() != 0 {
            return Err(Error::InvalidSigma(format!("{name} must be an {m}x{m} matrix over (t, q)")));
        }
        if !s.is_symmetric() {
            return Err(Error::InvalidSigma(format!("{name} is not symmetric")));
        }
        Ok(())
    };

    check_shape(sigma1_choice, "sigma1")?;
    if !a.checked_mul(sigma1_choice)?.is_zero() || !sigma1_choice.checked_mul(a)?.is_zero() {
        return Err(Error::InvalidSigma("a sigma1 = sigma1 a = 0 fails".into()));
    }

    let sigma0 = match sigma0_override {
        Some(s0) => {
            check_shape(s0, "sigma0")?;
            if a.checked_mul(s0)?.checked_mul(a)? != *a {
                return Err(Error::InvalidSigma("a sigma0 a = a fails".into()));
            }
            if s0.checked_mul(a)?.checked_mul(s0)? != *s0 {
                return Err(Error::InvalidSigma("sigma0 a sigma0 = sigma0 fails".into()));
            }
            Sigma0::Symbolic(s0.clone())
        }
        None => match a.to_rationals() {
            Some(exact) => Sigma0::Symbolic(PolyMatrix::from_rationals(&exact.pseudoinverse(), m, 0)),
            None => Sigma0::Pointwise { tol: DEFAULT_ZERO_EIGEN_TOL },
        },
    };
    Ok(SigmaSplit { sigma0, sigma1: sigma1_choice.clone() })
}

/// `build_sigma` with `sigma1 = 0` and the default `sigma0`.
pub fn default_sigma(model: &QuadraticModel) -> Result<SigmaSplit> {
    build_sigma(model, &PolyMatrix::zeros(model.m(), model.m(), model.m(), 0), None)
}

/// Connection `Gamma = -sigma0 b + upsilon` with `a upsilon = 0`.
pub fn solve_connection(model: &QuadraticModel, split: &SigmaSplit, upsilon: &[CoeffPoly]) -> Result<ReferenceFrame> {
    let m = model.m();
    if upsilon.len() != m || upsilon.iter().any(|u| u.num_q() != m || u.num_p() != 0) {
        return Err(Error::InvalidOffset(format!("offset must have {m} components over (t, q)")));
    }
    if model.a().mul_vec(upsilon)?.iter().any(|x| !x.is_zero()) {
        return Err(Error::InvalidOffset("a upsilon != 0".into()));
    }
    let b_zero = model.b().iter().all(CoeffPoly::is_zero);
    let base = if b_zero {
        vec![CoeffPoly::zero(m, 0); m]
    } else {
        let s0 = split.require_symbolic("connection -sigma0 b with nonzero b")?;
        s0.mul_vec(model.b())?.iter().map(|x| -x).collect()
    };
    let gamma: Vec<CoeffPoly> = base.iter().zip(upsilon).map(|(g, u)| g + u).collect();
    let residual = model.a().mul_vec(&gamma)?;
    if residual.iter().zip(model.b()).any(|(ag, b)| !(ag + b).is_zero()) {
        return Err(Error::InvalidFrame("a Gamma + b != 0; b is not in the image of a".into()));
    }
    Ok(ReferenceFrame::new(gamma))
}

/// Checks `a Gamma + b = 0` exactly.
pub fn frame_solves_kernel_condition(model: &QuadraticModel, frame: &ReferenceFrame) -> Result<bool> {
    if frame.gamma.len() != model.m() {
        return Ok(false);
    }
    let ag = model.a().mul_vec(&frame.gamma)?;
    Ok(ag.iter().zip(model.b()).all(|(x, b)| (x + b).is_zero()))
}

/// `(S, F)` with `F = sigma0 (a v + b)` and `S = v - F`.
pub fn velocity_split(
    split: &SigmaSplit,
    model: &QuadraticModel,
    t: f64,
    q: &[f64],
    qdot: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let v = DVector::from_column_slice(qdot);
    let pi = model.a_at(t, q)? * &v + model.b_at(t, q)?;
    let f = split.sigma0_at(model, t, q)? * pi;
    let s = &v - &f;
    Ok((s.iter().copied().collect(), f.iter().copied().collect()))
}

/// `(R, P)` with `P = a sigma0 p` and `R = p - P`.
pub fn momentum_split(
    split: &SigmaSplit,
    model: &QuadraticModel,
    t: f64,
    q: &[f64],
    p: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if p.len() != model.m() {
        return Err(Error::MissingCoordinate(format!("expected {} momenta", model.m())));
    }
    let pv = DVector::from_column_slice(p);
    let proj = split.projector_at(model, t, q)? * &pv;
    let r = &pv - &proj;
    Ok((r.iter().copied().collect(), proj.iter().copied().collect()))
}

/// Values of the primary constraints `R_i = p_i - a_ij sigma0^jk p_k`.
pub fn constraint_values(split: &SigmaSplit, model: &QuadraticModel, t: f64, q: &[f64], p: &[f64]) -> Result<Vec<f64>> {
    Ok(momentum_split(split, model, t, q, p)?.0)
}

/// The primary constraints as polynomials in `(t, q, p)`.
pub fn constraint_polys(split: &SigmaSplit, model: &QuadraticModel) -> Result<Vec<CoeffPoly>> {
    let m = model.m();
    let proj = split.projector(model)?.with_momenta(m)?;
    let momenta: Vec<CoeffPoly> = (0..m).map(|i| CoeffPoly::p(i, m, m)).collect();
    let pp = proj.mul_vec(&momenta)?;
    Ok(momenta.iter().zip(&pp).map(|(p, x)| p - x).collect())
}

/// Substitution `p -> (a sigma0) p`, i.e. restriction to the constraint space.
pub fn restriction_to_constraint_space(split: &SigmaSplit, model: &QuadraticModel) -> Result<Vec<(Var, CoeffPoly)>> {
    let m = model.m();
    let proj = split.projector(model)?.with_momenta(m)?;
    let momenta: Vec<CoeffPoly> = (0..m).map(|i| CoeffPoly::p(i, m, m)).collect();
    Ok(proj.mul_vec(&momenta)?.into_iter().enumerate().map(|(i, x)| (Var::P(i), x)).collect())
}

/// `c' = c - 1/2 b.sigma0.b`
pub fn c_prime(model: &QuadraticModel, split: &SigmaSplit) -> Result<CoeffPoly> {
    if model.b().iter().all(CoeffPoly::is_zero) {
        return Ok(model.c().clone());
    }
    let s0 = split.require_symbolic("c' with nonzero b")?;
    let sb = s0.mul_vec(model.b())?;
    let bsb = model.b().iter().zip(&sb).fold(CoeffPoly::zero(model.m(), 0), |acc, (b, x)| &acc + &(b * x));
    Ok(model.c() - &bsb.scale(&crate::poly::rat(1, 2)))
}

/// Pointwise value of `c'`, available in both modes.
pub fn c_prime_at(model: &QuadraticModel, split: &SigmaSplit, t: f64, q: &[f64]) -> Result<f64> {
    let b = model.b_at(t, q)?;
    let s0 = split.sigma0_at(model, t, q)?;
    Ok(model.c_at(t, q)? - 0.5 * b.dot(&(s0 * &b)))
}

/// Largest violation of every splitting identity at one point.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct IdentityResiduals {
    pub a_sigma0_a: f64,
    pub sigma0_a_sigma0: f64,
    pub a_sigma1: f64,
    pub sigma1_a: f64,
    pub sigma0_asymmetry: f64,
    pub sigma1_asymmetry: f64,
    pub projector_idempotence: f64,
    pub complement_idempotence: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.a_sigma0_a,
            self.sigma0_a_sigma0,
            self.a_sigma1,
            self.sigma1_a,
            self.sigma0_asymmetry,
            self.sigma1_asymmetry,
            self.projector_idempotence,
            self.complement_idempotence,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    pub fn merge(&mut self, other: &IdentityResiduals) {
        self.a_sigma0_a = self.a_sigma0_a.max(other.a_sigma0_a);
        self.sigma0_a_sigma0 = self.sigma0_a_sigma0.max(other.sigma0_a_sigma0);
        self.a_sigma1 = self.a_sigma1.max(other.a_sigma1);
        self.sigma1_a = self.sigma1_a.max(other.sigma1_a);
        self.sigma0_asymmetry = self.sigma0_asymmetry.max(other.sigma0_asymmetry);
        self.sigma1_asymmetry = self.sigma1_asymmetry.max(other.sigma1_asymmetry);
        self.projector_idempotence = self.projector_idempotence.max(other.projector_idempotence);
        self.complement_idempotence = self.complement_idempotence.max(other.complement_idempotence);
    }
}

pub fn identity_residuals_at(split: &SigmaSplit, model: &QuadraticModel, t: f64, q: &[f64]) -> Result<IdentityResiduals> {
    let a = model.a_at(t, q)?;
    let s0 = split.sigma0_at(model, t, q)?;
    let s1 = split.sigma1_at(t, q)?;
    let proj = &a * &s0;
    let comp = DMatrix::identity(a.nrows(), a.ncols()) - &proj;
    Ok(IdentityResiduals {
        a_sigma0_a: max_abs(&(&proj * &a - &a)),
        sigma0_a_sigma0: max_abs(&(&s0 * &a * &s0 - &s0)),
        a_sigma1: max_abs(&(&a * &s1)),
        sigma1_a: max_abs(&(&s1 * &a)),
        sigma0_asymmetry: asymmetry(&s0),
        sigma1_asymmetry: asymmetry(&s1),
        projector_idempotence: max_abs(&(&proj * &proj - &proj)),
        complement_idempotence: max_abs(&(&comp * &comp - &comp)),
    })
}

/// Exact check of every splitting identity for a symbolic split.
pub fn symbolic_identities_hold(split: &SigmaSplit, model: &QuadraticModel) -> Result<bool> {
    let a = model.a();
    let s0 = split.require_symbolic("exact identity check")?;
    let s1 = split.sigma1();
    let proj = a.checked_mul(s0)?;
    let id = PolyMatrix::identity(model.m(), model.m(), 0);
    let comp = id.checked_sub(&proj)?;
    Ok(proj.checked_mul(a)? == *a
        && s0.checked_mul(a)?.checked_mul(s0)? == *s0
        && a.checked_mul(s1)?.is_zero()
        && s1.checked_mul(a)?.is_zero()
        && s0.is_symmetric()
        && s1.is_symmetric()
        && proj.checked_mul(&proj)? == proj
        && comp.checked_mul(&comp)? == comp)
}

/// Number of independent primary constraints, `rank(1 - a sigma0)`, next to
/// the number of constraint functions that are not identically zero.
pub fn constraint_reducibility(split: &SigmaSplit, model: &QuadraticModel) -> Result<(usize, usize)> {
    let proj = split.projector(model)?;
    let exact = proj.to_rationals().ok_or_else(|| Error::RequiresSymbolic("constant projector".into()))?;
    let comp = crate::linalg::RatMatrix::identity(model.m()).sub(&exact);
    let nonzero = (0..model.m()).filter(|&i| (0..model.m()).any(|j| !num_traits::Zero::is_zero(comp.get(i, j)))).count();
    Ok((comp.rank(), nonzero))
}

/// Constant `sigma1 = lambda * e_k e_k^T` helper for diagonal kernels.
pub fn diagonal_sigma1(m: usize, entries: &[Rational]) -> PolyMatrix {
    PolyMatrix::from_fn(m, m, |i, j| {
        if i == j {
            CoeffPoly::constant(entries[i].clone(), m, 0)
        } else {
            CoeffPoly::zero(m, 0)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::catalog::*;
    use crate::poly::{int, rat, RatMatrix};

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-12)
    }

    #[test]
    fn build_sigma_examples() {
        let s = default_sigma(&diagonal_degenerate()).unwrap();
        let expected = PolyMatrix::from_rationals(&RatMatrix::from_rows(vec![vec![int(1), int(0)], vec![int(0), int(0)]]).unwrap(), 2, 0);
        assert_eq!(s.sigma0_poly().unwrap(), &expected);

        let s = default_sigma(&coupled_degenerate()).unwrap();
        let quarter = PolyMatrix::from_rationals(&RatMatrix::from_fn(2, 2, |_, _| rat(1, 4)), 2, 0);
        assert_eq!(s.sigma0_poly().unwrap(), &quarter);

        let model = diagonal_degenerate();
        let s1 = diagonal_sigma1(2, &[int(0), rat(3, 2)]);
        let s = build_sigma(&model, &s1, None).unwrap();
        assert!(model.a().checked_mul(s.sigma1()).unwrap().is_zero());
        assert!(symbolic_identities_hold(&s, &model).unwrap());
    }

    #[test]
    fn build_sigma_rejects_bad_choices() {
        let model = diagonal_degenerate();
        let bad_s1 = diagonal_sigma1(2, &[int(1), int(0)]);
        assert!(matches!(build_sigma(&model, &bad_s1, None), Err(Error::InvalidSigma(_))));

        let zero = PolyMatrix::zeros(2, 2, 2, 0);
        let bad_s0 = diagonal_sigma1(2, &[int(2), int(0)]);
        assert!(matches!(build_sigma(&model, &zero, Some(&bad_s0)), Err(Error::InvalidSigma(_))));

        // a non-Moore-Penrose generalized inverse is still accepted
        let other = PolyMatrix::from_rationals(
            &RatMatrix::from_rows(vec![vec![int(1), int(1)], vec![int(1), int(1)]]).unwrap(),
            2,
            0,
        );
        let s = build_sigma(&model, &zero, Some(&other)).unwrap();
        assert!(s.is_symbolic());
    }

    #[test]
    fn non_constant_metric_is_pointwise() {
        let model = rank_varying();
        let s = default_sigma(&model).unwrap();
        assert!(!s.is_symbolic());
        let s0 = s.sigma0_at(&model, 0.0, &[2.0]).unwrap();
        assert!((s0[(0, 0)] - 0.5).abs() < 1e-15);
        assert!(matches!(c_prime(&drifting_free_particle(), &s), Err(Error::RequiresSymbolic(_))));
    }

    #[test]
    fn connection_examples() {
        let model = diagonal_degenerate();
        let s = default_sigma(&model).unwrap();
        let g = solve_connection(&model, &s, &[CoeffPoly::zero(2, 0), CoeffPoly::zero(2, 0)]).unwrap();
        assert!(g.gamma.iter().all(CoeffPoly::is_zero));

        let ups = vec![CoeffPoly::zero(2, 0), CoeffPoly::q(0, 2, 0)];
        let g = solve_connection(&model, &s, &ups).unwrap();
        assert_eq!(g.gamma, ups);
        assert!(frame_solves_kernel_condition(&model, &g).unwrap());

        let drift = drifting_free_particle();
        let s = default_sigma(&drift).unwrap();
        let g = solve_connection(&drift, &s, &[CoeffPoly::zero(1, 0)]).unwrap();
        assert_eq!(g.gamma, vec![-&CoeffPoly::t(1, 0)]);

        let bad = vec![CoeffPoly::one(2, 0), CoeffPoly::zero(2, 0)];
        assert!(matches!(solve_connection(&model, &default_sigma(&model).unwrap(), &bad), Err(Error::InvalidOffset(_))));
    }

    #[test]
    fn velocity_split_examples() {
        let m1 = diagonal_degenerate();
        let s = default_sigma(&m1).unwrap();
        let (sv, fv) = velocity_split(&s, &m1, 0.0, &[0.0, 0.0], &[3.0, 7.0]).unwrap();
        assert!(close(&fv, &[3.0, 0.0]) && close(&sv, &[0.0, 7.0]));

        let m2 = coupled_degenerate();
        let s2 = default_sigma(&m2).unwrap();
        let (sv, fv) = velocity_split(&s2, &m2, 0.0, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(close(&fv, &[0.5, 0.5]) && close(&sv, &[0.5, -0.5]));

        // a kernel velocity (value of a connection) has no F part
        let (sv, fv) = velocity_split(&s, &m1, 0.0, &[0.0, 0.0], &[0.0, 4.0]).unwrap();
        assert!(close(&fv, &[0.0, 0.0]) && close(&sv, &[0.0, 4.0]));
    }

    #[test]
    fn momentum_split_examples() {
        let m1 = diagonal_degenerate();
        let s = default_sigma(&m1).unwrap();
        let (r, p) = momentum_split(&s, &m1, 0.0, &[0.0, 0.0], &[1.0, 5.0]).unwrap();
        assert!(close(&p, &[1.0, 0.0]) && close(&r, &[0.0, 5.0]));

        let m2 = coupled_degenerate();
        let s2 = default_sigma(&m2).unwrap();
        let (r, p) = momentum_split(&s2, &m2, 0.0, &[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(close(&p, &[0.5, 0.5]) && close(&r, &[0.5, -0.5]));

        let on = m2.legendre_map(0.0, &[0.0, 0.0], &[0.3, -1.1]).unwrap();
        let (r, _) = momentum_split(&s2, &m2, 0.0, &[0.0, 0.0], &on).unwrap();
        assert!(close(&r, &[0.0, 0.0]));
    }

    #[test]
    fn constraint_examples() {
        let m1 = diagonal_degenerate();
        let r = constraint_polys(&default_sigma(&m1).unwrap(), &m1).unwrap();
        assert_eq!(r, vec![CoeffPoly::zero(2, 2), CoeffPoly::p(1, 2, 2)]);

        let m2 = coupled_degenerate();
        let r = constraint_polys(&default_sigma(&m2).unwrap(), &m2).unwrap();
        let diff = (&CoeffPoly::p(0, 2, 2) - &CoeffPoly::p(1, 2, 2)).scale(&rat(1, 2));
        assert_eq!(r[0], diff);
        assert_eq!(r[1], -&diff);
        assert!((&r[0] + &r[1]).is_zero());
        assert_eq!(constraint_reducibility(&default_sigma(&m2).unwrap(), &m2).unwrap(), (1, 2));

        let reg = regular_oscillator();
        let r = constraint_polys(&default_sigma(&reg).unwrap(), &reg).unwrap();
        assert!(r.iter().all(CoeffPoly::is_zero));
    }

    #[test]
    fn c_prime_examples() {
        let reg = regular_oscillator();
        assert_eq!(&c_prime(&reg, &default_sigma(&reg).unwrap()).unwrap(), reg.c());
        let drift = drifting_free_particle();
        let cp = c_prime(&drift, &default_sigma(&drift).unwrap()).unwrap();
        assert_eq!(cp, CoeffPoly::t(1, 0).pow(2).scale(&rat(-1, 2)));
        let m1 = diagonal_degenerate();
        assert_eq!(&c_prime(&m1, &default_sigma(&m1).unwrap()).unwrap(), m1.c());
    }
}
