//! Canonical Poisson bracket on `V*Q`, the Hamiltonian forms
//! `H = p dq - [p.Gamma + 1/2 sigma0 pp + sigma1 pp - c'] dt`, their flows,
//! symmetry currents and the association test against the Lagrangian.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{QuadraticModel, ReferenceFrame};
use crate::poly::{rat, CoeffPoly, FloatPoly, Point, Rational, Var};
use crate::split::{c_prime, frame_solves_kernel_condition, SigmaSplit};

fn check_phase_pair(f: &CoeffPoly, g: &CoeffPoly) -> Result<usize> {
    if !f.same_signature(g) || f.num_q() != f.num_p() {
        return Err(Error::SignatureMismatch(format!(
            "bracket needs two phase-space polynomials of equal dimension, got (q:{}, p:{}) and (q:{}, p:{})",
            f.num_q(),
            f.num_p(),
            g.num_q(),
            g.num_p()
        )));
    }
    Ok(f.num_q())
}

/// `{f, g}_V = df/dp_i dg/dq^i - dg/dp_i df/dq^i`
pub fn poisson_v(f: &CoeffPoly, g: &CoeffPoly) -> Result<CoeffPoly> {
    let m = check_phase_pair(f, g)?;
    let mut out = CoeffPoly::zero(m, m);
    for i in 0..m {
        let (p, q) = (Var::P(i), Var::Q(i));
        out = &out + &(&f.d(p) * &g.d(q));
        out = &out - &(&g.d(p) * &f.d(q));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianForm {
    m: usize,
    pub frame: ReferenceFrame,
    pub split: Option<SigmaSplit>,
    hfun: CoeffPoly,
}

impl HamiltonianForm {
    /// Form with an arbitrary Hamiltonian function and `Gamma = 0`; no
    /// relation to a Lagrangian is implied.
    pub fn from_function(hfun: CoeffPoly) -> Result<Self> {
        let m = hfun.num_q();
        if hfun.num_p() != m {
            return Err(Error::SignatureMismatch("Hamiltonian must live on V*Q".into()));
        }
        Ok(HamiltonianForm { m, frame: ReferenceFrame::zero(m), split: None, hfun })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The function `H` in `p dq - H dt`.
    pub fn hfun(&self) -> &CoeffPoly {
        &self.hfun
    }

    /// Energy function with respect to the form's own frame,
    /// `H - p.Gamma = -J_Gamma`.
    pub fn energy_function(&self) -> Result<CoeffPoly> {
        let j = current(&ProjectableField::frame(&self.frame), self)?;
        Ok(-&j)
    }
}

/// Builds the quadratic Hamiltonian form from a frame solving
/// `a Gamma + b = 0`.
pub fn build_hamiltonian(model: &QuadraticModel, split: &SigmaSplit, frame: &ReferenceFrame) -> Result<HamiltonianForm> {
    let m = model.m();
    if !frame_solves_kernel_condition(model, frame)? {
        return Err(Error::InvalidFrame("frame does not satisfy a Gamma + b = 0".into()));
    }
    let s0 = split
        .sigma0_poly()
        .ok_or_else(|| Error::RequiresSymbolic("Hamiltonian function needs polynomial sigma0".into()))?
        .with_momenta(m)?;
    let s1 = split.sigma1().with_momenta(m)?;
    let momenta: Vec<CoeffPoly> = (0..m).map(|i| CoeffPoly::p(i, m, m)).collect();
    let quad = |s: &crate::poly::PolyMatrix| -> Result<CoeffPoly> {
        let sp = s.mul_vec(&momenta)?;
        Ok(momenta.iter().zip(&sp).fold(CoeffPoly::zero(m, m), |acc, (p, x)| &acc + &(p * x)))
    };
    let mut h = CoeffPoly::zero(m, m);
    for (p, g) in momenta.iter().zip(&frame.gamma) {
        h = &h + &(p * &g.with_momenta(m)?);
    }
    h = &h + &quad(&s0)?.scale(&rat(1, 2));
    h = &h + &quad(&s1)?;
    h = &h - &c_prime(model, split)?.with_momenta(m)?;
    Ok(HamiltonianForm { m, frame: frame.clone(), split: Some(split.clone()), hfun: h })
}

/// Components of `d_t + dH/dp_i d_i - dH/dq^i d^i`; the time component is 1.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonVectorField {
    pub dq: Vec<CoeffPoly>,
    pub dp: Vec<CoeffPoly>,
}

impl HamiltonVectorField {
    pub fn compile(&self) -> CompiledField {
        CompiledField {
            m: self.dq.len(),
            dq: self.dq.iter().map(CoeffPoly::compile).collect(),
            dp: self.dp.iter().map(CoeffPoly::compile).collect(),
        }
    }
}

pub fn hamiltonian_vector_field(h: &HamiltonianForm) -> HamiltonVectorField {
    let m = h.m;
    HamiltonVectorField {
        dq: (0..m).map(|i| h.hfun.d(Var::P(i))).collect(),
        dp: (0..m).map(|i| -&h.hfun.d(Var::Q(i))).collect(),
    }
}

/// Floating-point right-hand side of the Hamilton equations.
#[derive(Clone, Debug)]
pub struct CompiledField {
    m: usize,
    dq: Vec<FloatPoly>,
    dp: Vec<FloatPoly>,
}

impl CompiledField {
    pub fn m(&self) -> usize {
        self.m
    }

    /// `x = (t, q, p)`; writes `(qdot, pdot)` into `out`.
    pub fn eval_into(&self, x: &[f64], out: &mut [f64]) {
        for (o, f) in out.iter_mut().zip(self.dq.iter().chain(&self.dp)) {
            *o = f.eval(x);
        }
    }
}

/// Lie derivative of `f` along the Hamiltonian connection, computed by
/// applying the vector field component by component.
pub fn evolution(f: &CoeffPoly, h: &HamiltonianForm) -> Result<CoeffPoly> {
    check_phase_pair(f, &h.hfun)?;
    let field = hamiltonian_vector_field(h);
    let mut out = f.d(Var::T);
    for i in 0..h.m {
        out = &out + &(&field.dq[i] * &f.d(Var::Q(i)));
        out = &out + &(&field.dp[i] * &f.d(Var::P(i)));
    }
    Ok(out)
}

/// Bracket `{H*, f}` on `T*Q` of the pulled-back `f` with the Hamiltonian
/// function of the homogeneous form, realized as `d_t f + {H, f}_V`.
pub fn extended_bracket(f: &CoeffPoly, h: &HamiltonianForm) -> Result<CoeffPoly> {
    Ok(&f.d(Var::T) + &poisson_v(&h.hfun, f)?)
}

/// Projectable field `u^t d_t + u^i(t, q) d_i` with constant `u^t`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectableField {
    pub ut: Rational,
    pub u: Vec<CoeffPoly>,
}

impl ProjectableField {
    pub fn vertical(u: Vec<CoeffPoly>) -> Self {
        ProjectableField { ut: Rational::from_integer(0.into()), u }
    }

    pub fn frame(frame: &ReferenceFrame) -> Self {
        ProjectableField { ut: Rational::from_integer(1.into()), u: frame.gamma.clone() }
    }

    pub fn is_vertical(&self) -> bool {
        num_traits::Zero::is_zero(&self.ut)
    }
}

/// `J_u = p_i u^i - u^t H`
pub fn current(u: &ProjectableField, h: &HamiltonianForm) -> Result<CoeffPoly> {
    let m = h.m;
    if u.u.len() != m {
        return Err(Error::DimensionMismatch(format!("field has {} components, m = {m}", u.u.len())));
    }
    let mut j = h.hfun.scale(&-u.ut.clone());
    for (i, ui) in u.u.iter().enumerate() {
        if ui.num_q() != m || ui.num_p() != 0 {
            return Err(Error::SignatureMismatch("field components must be polynomials in (t, q)".into()));
        }
        j = &j + &(&CoeffPoly::p(i, m, m) * &ui.with_momenta(m)?);
    }
    Ok(j)
}

/// Commutator of vertical fields, `[u, w]^i = u^j d_j w^i - w^j d_j u^i`.
pub fn vertical_commutator(u: &[CoeffPoly], w: &[CoeffPoly]) -> Result<Vec<CoeffPoly>> {
    if u.len() != w.len() {
        return Err(Error::DimensionMismatch("field dimensions differ".into()));
    }
    let m = u.len();
    Ok((0..m)
        .map(|i| {
            (0..m).fold(CoeffPoly::zero(u[i].num_q(), u[i].num_p()), |acc, j| {
                let term = &(&u[j] * &w[i].d(Var::Q(j))) - &(&w[j] * &u[i].d(Var::Q(j)));
                &acc + &term
            })
        })
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AssociationMode {
    /// Points restricted to the Lagrangian constraint space.
    Weak,
    /// Arbitrary momenta.
    Full,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssociationReport {
    pub mode: AssociationMode,
    pub max_residual: f64,
    pub worst_point: Option<Point>,
    pub points_checked: usize,
}

/// Momentum lattice `{-1, 0, 1}^m` used by the association check.
pub fn momentum_lattice(m: usize) -> Vec<Vec<f64>> {
    let total = 3usize.pow(m as u32);
    (0..total)
        .map(|mut k| {
            (0..m)
                .map(|_| {
                    let v = (k % 3) as f64 - 1.0;
                    k /= 3;
                    v
                })
                .collect()
        })
        .collect()
}

/// Residual of `H = p_i dH/dp_i - L(t, q, dH/dp)` over the grid.
pub fn check_association(
    model: &QuadraticModel,
    split: &SigmaSplit,
    h: &HamiltonianForm,
    mode: AssociationMode,
    grid: &[Point],
) -> Result<AssociationReport> {
    let m = model.m();
    if h.m != m {
        return Err(Error::DimensionMismatch("form and model dimensions differ".into()));
    }
    let hf = h.hfun.compile();
    let dh: Vec<FloatPoly> = (0..m).map(|i| h.hfun.d(Var::P(i)).compile()).collect();
    let lattice = momentum_lattice(m);
    let mut worst = 0.0_f64;
    let mut worst_point = None;
    let mut count = 0;
    for pt in grid {
        let proj = match mode {
            AssociationMode::Weak => Some(split.projector_at(model, pt.t, &pt.q)?),
            AssociationMode::Full => None,
        };
        for raw in &lattice {
            let p: Vec<f64> = match &proj {
                Some(pr) => (pr * nalgebra::DVector::from_column_slice(raw)).iter().copied().collect(),
                None => raw.clone(),
            };
            let mut x = vec![pt.t];
            x.extend_from_slice(&pt.q);
            x.extend_from_slice(&p);
            let v: Vec<f64> = dh.iter().map(|d| d.eval(&x)).collect();
            let pv: f64 = p.iter().zip(&v).map(|(a, b)| a * b).sum();
            let rhs = pv - model.lagrangian_eval(pt.t, &pt.q, &v)?;
            let res = (hf.eval(&x) - rhs).abs();
            count += 1;
            if res > worst || worst_point.is_none() {
                worst = worst.max(res);
                worst_point = Some(Point::new(pt.t, pt.q.clone(), p));
            }
        }
    }
    Ok(AssociationReport { mode, max_residual: worst, worst_point, points_checked: count })
}
