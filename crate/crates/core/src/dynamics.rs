//! Fixed-step RK4 integration of the Hamilton equations and the residual
//! checks run along the resulting curves.

use std::fmt::Write as _;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hamiltonian::{hamiltonian_vector_field, HamiltonianForm};
use crate::model::{QuadraticModel, ReferenceFrame};
use crate::poly::Var;
use crate::split::{constraint_values, SigmaSplit};

pub const DEFAULT_DRIFT_TOL: f64 = 1e-8;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-4;

/// Minimum sample count for the finite-difference residuals.
pub const MIN_SAMPLES: usize = 5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sample {
    pub t: f64,
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    samples: Vec<Sample>,
    step: f64,
    pub meta: String,
}

impl Trajectory {
    /// Validates a uniform, strictly increasing time grid and consistent
    /// dimensions.
    pub fn from_samples(samples: Vec<Sample>, step: f64) -> Result<Self> {
        if !(step > 0.0) {
            return Err(Error::InvalidInput("step must be positive".into()));
        }
        if let Some(first) = samples.first() {
            let m = first.q.len();
            if samples.iter().any(|s| s.q.len() != m || s.p.len() != m) {
                return Err(Error::DimensionMismatch("sample dimensions differ".into()));
            }
            for (k, s) in samples.iter().enumerate() {
                let expected = first.t + k as f64 * step;
                if (s.t - expected).abs() > 1e-9 * step.max(expected.abs()) {
                    return Err(Error::InvalidInput(format!("sample {k} at t = {} breaks the uniform grid", s.t)));
                }
            }
        }
        Ok(Trajectory { samples, step, meta: String::new() })
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&Sample> {
        self.samples.last()
    }

    pub fn m(&self) -> usize {
        self.samples.first().map_or(0, |s| s.q.len())
    }

    /// CSV with header `t,q1..qm,p1..pm` and shortest round-trip floats.
    pub fn to_csv(&self) -> String {
        let m = self.m();
        let mut out = String::from("t");
        for i in 1..=m {
            write!(out, ",q{i}").unwrap();
        }
        for i in 1..=m {
            write!(out, ",p{i}").unwrap();
        }
        out.push('\n');
        for s in &self.samples {
            write!(out, "{:?}", s.t).unwrap();
            for x in s.q.iter().chain(&s.p) {
                write!(out, ",{x:?}").unwrap();
            }
            out.push('\n');
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty CSV".into()))?;
        let cols = header.split(',').count();
        if cols < 1 || cols % 2 == 0 {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let m = (cols - 1) / 2;
        let samples = lines
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                let vals = l
                    .split(',')
                    .map(|x| x.trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string())))
                    .collect::<Result<Vec<_>>>()?;
                if vals.len() != cols {
                    return Err(Error::Parse(format!("row has {} fields, expected {cols}", vals.len())));
                }
                Ok(Sample { t: vals[0], q: vals[1..1 + m].to_vec(), p: vals[1 + m..].to_vec() })
            })
            .collect::<Result<Vec<_>>>()?;
        let step = if samples.len() > 1 { samples[1].t - samples[0].t } else { 1.0 };
        Self::from_samples(samples, step)
    }
}

/// Classic RK4 for `qdot = dH/dp`, `pdot = -dH/dq` with uniform `step`.
/// The last sample sits at the first grid time not before `t_end`.
pub fn integrate_hamilton(
    h: &HamiltonianForm,
    t0: f64,
    q0: &[f64],
    p0: &[f64],
    t_end: f64,
    step: f64,
) -> Result<Trajectory> {
    let m = h.m();
    if q0.len() != m || p0.len() != m {
        return Err(Error::DimensionMismatch(format!("initial state must have {m} positions and {m} momenta")));
    }
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::InvalidInput("step must be positive".into()));
    }
    if !(t_end > t0) {
        return Err(Error::InvalidInput("t_end must exceed t0".into()));
    }
    let n_steps = ((t_end - t0) / step - 1e-9).ceil().max(1.0) as usize;
    let field = hamiltonian_vector_field(h).compile();

    let dim = 2 * m;
    let mut state: Vec<f64> = q0.iter().chain(p0).copied().collect();
    let mut samples = Vec::with_capacity(n_steps + 1);
    samples.push(Sample { t: t0, q: q0.to_vec(), p: p0.to_vec() });

    let mut x = vec![0.0; 1 + dim];
    let mut eval = |t: f64, y: &[f64], out: &mut [f64]| {
        x[0] = t;
        x[1..].copy_from_slice(y);
        field.eval_into(&x, out);
    };
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim], vec![0.0; dim]);
    for k in 0..n_steps {
        let t = t0 + k as f64 * step;
        eval(t, &state, &mut k1);
        for i in 0..dim {
            tmp[i] = state[i] + 0.5 * step * k1[i];
        }
        eval(t + 0.5 * step, &tmp, &mut k2);
        for i in 0..dim {
            tmp[i] = state[i] + 0.5 * step * k2[i];
        }
        eval(t + 0.5 * step, &tmp, &mut k3);
        for i in 0..dim {
            tmp[i] = state[i] + step * k3[i];
        }
        eval(t + step, &tmp, &mut k4);
        for i in 0..dim {
            state[i] += step / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        let t_next = t0 + (k + 1) as f64 * step;
        if state.iter().any(|v| !v.is_finite()) {
            let last = samples.last().expect("initial sample");
            return Err(Error::Divergence {
                t: t_next,
                last_t: last.t,
                last_state: last.q.iter().chain(&last.p).copied().collect(),
            });
        }
        samples.push(Sample { t: t_next, q: state[..m].to_vec(), p: state[m..].to_vec() });
    }
    Trajectory::from_samples(samples, step)
}

/// `max_k ||R(t_k, q_k, p_k)||_inf`
pub fn constraint_drift(traj: &Trajectory, split: &SigmaSplit, model: &QuadraticModel) -> Result<f64> {
    let mut worst = 0.0_f64;
    for s in traj.samples() {
        let r = constraint_values(split, model, s.t, &s.q, &s.p)?;
        worst = r.iter().fold(worst, |acc, x| acc.max(x.abs()));
    }
    Ok(worst)
}

fn require_samples(traj: &Trajectory) -> Result<()> {
    if traj.len() < MIN_SAMPLES {
        return Err(Error::TooFewSamples { needed: MIN_SAMPLES, got: traj.len() });
    }
    Ok(())
}

/// Central-difference velocities at samples `1..n-1`; entry `k` belongs to
/// sample `k + 1`.
fn central_velocities(traj: &Trajectory) -> Vec<Vec<f64>> {
    let s = traj.samples();
    let h2 = 2.0 * traj.step();
    (1..s.len() - 1)
        .map(|k| s[k + 1].q.iter().zip(&s[k - 1].q).map(|(a, b)| (a - b) / h2).collect())
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |acc, (x, y)| acc.max((x - y).abs()))
}

/// `max ||dL/dq - d/dt (a qdot + b)||_inf` along the projected curve, with
/// both time derivatives from central differences.
pub fn lagrange_residual(traj: &Trajectory, model: &QuadraticModel) -> Result<f64> {
    require_samples(traj)?;
    let s = traj.samples();
    let vel = central_velocities(traj);
    let momenta: Vec<Vec<f64>> = vel
        .iter()
        .enumerate()
        .map(|(k, v)| model.legendre_map(s[k + 1].t, &s[k + 1].q, v))
        .collect::<Result<_>>()?;
    let h2 = 2.0 * traj.step();
    let mut worst = 0.0_f64;
    for k in 1..vel.len() - 1 {
        let sample = &s[k + 1];
        let grad = model.lagrangian_q_gradient(sample.t, &sample.q, &vel[k])?;
        let dpi: Vec<f64> = momenta[k + 1].iter().zip(&momenta[k - 1]).map(|(a, b)| (a - b) / h2).collect();
        worst = worst.max(max_abs_diff(&grad, &dpi));
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SplitResiduals {
    /// `||S(qdot) - Gamma||_inf`
    pub gauge: f64,
    /// `||sigma0 (a qdot + b) - sigma0 p||_inf`
    pub momentum: f64,
}

pub fn split_residuals(
    traj: &Trajectory,
    split: &SigmaSplit,
    model: &QuadraticModel,
    frame: &ReferenceFrame,
) -> Result<SplitResiduals> {
    require_samples(traj)?;
    let s = traj.samples();
    let mut out = SplitResiduals { gauge: 0.0, momentum: 0.0 };
    for (k, v) in central_velocities(traj).iter().enumerate() {
        let sample = &s[k + 1];
        let s0 = split.sigma0_at(model, sample.t, &sample.q)?;
        let vv = DVector::from_column_slice(v);
        let f = &s0 * (model.a_at(sample.t, &sample.q)? * &vv + model.b_at(sample.t, &sample.q)?);
        let gauge_part: Vec<f64> = (&vv - &f).iter().copied().collect();
        let gamma = frame.at(sample.t, &sample.q)?;
        out.gauge = out.gauge.max(max_abs_diff(&gauge_part, &gamma));
        let sp = &s0 * DVector::from_column_slice(&sample.p);
        out.momentum = out.momentum.max((&f - sp).amax());
    }
    Ok(out)
}

/// Residual of the constrained Hamilton equations on the constraint space:
/// the `pdot = -dH/dq` block together with the momentum block of
/// [`split_residuals`].
pub fn constrained_equation_check(
    traj: &Trajectory,
    split: &SigmaSplit,
    model: &QuadraticModel,
    h: &HamiltonianForm,
    drift_tol: f64,
) -> Result<f64> {
    require_samples(traj)?;
    let drift = constraint_drift(traj, split, model)?;
    if drift > drift_tol {
        return Err(Error::NotApplicable(format!("trajectory leaves the constraint space (drift {drift:e})")));
    }
    let m = model.m();
    let grad_q: Vec<_> = (0..m).map(|i| h.hfun().d(Var::Q(i)).compile()).collect();
    let s = traj.samples();
    let h2 = 2.0 * traj.step();
    let mut worst = 0.0_f64;
    for k in 1..s.len() - 1 {
        let mut x = vec![s[k].t];
        x.extend_from_slice(&s[k].q);
        x.extend_from_slice(&s[k].p);
        for i in 0..m {
            let pdot = (s[k + 1].p[i] - s[k - 1].p[i]) / h2;
            worst = worst.max((pdot + grad_q[i].eval(&x)).abs());
        }
    }
    let zero_frame = ReferenceFrame::zero(m);
    let momentum = split_residuals(traj, split, model, &zero_frame)?.momentum;
    Ok(worst.max(momentum))
}
