use std::path::Path;

use serde_json::{json, Map, Value};

use quadham::constraints::{classify_constraints, constraint_algorithm, ConstraintSet, LinearIdeal, MembershipMode};
use quadham::dynamics::{constrained_equation_check, constraint_drift, integrate_hamilton, lagrange_residual, split_residuals};
use quadham::hamiltonian::build_hamiltonian;
use quadham::koszul_tate::{brst_charge, check_nilpotency, homology, irreducibility, kt_delta, verify_charge};
use quadham::linalg::DEFAULT_ZERO_EIGEN_TOL;
use quadham::model::{validate_model, ModelConfig};
use quadham::poly::Var;
use quadham::split::{
    build_sigma, c_prime, constraint_polys, constraint_reducibility, constraint_values, identity_residuals_at, solve_connection,
    symbolic_identities_hold, IdentityResiduals,
};
use quadham::{CoeffPoly, Error, HamiltonianForm, KTComplex, PolyMatrix, QuadraticModel, ReferenceFrame, Result, SigmaSplit};

use crate::args::{parse_initial, parse_sigma1, parse_upsilon, Command, Options};

/// Random elements checked on top of every generator.
const RANDOM_TRIALS: usize = 20;
const IDENTITY_TOL: f64 = 1e-10;
const MAX_ROUNDS: usize = 10;

pub struct Outcome {
    pub body: Map<String, Value>,
    pub passed: bool,
    pub csv: Option<String>,
}

impl Outcome {
    fn new(body: Value, passed: bool) -> Self {
        let Value::Object(body) = body else { unreachable!("reports are objects") };
        Outcome { body, passed, csv: None }
    }
}

struct Setup {
    config: ModelConfig,
    model: QuadraticModel,
}

fn load(path: Option<&Path>) -> Result<Setup> {
    let path = path.ok_or_else(|| Error::InvalidInput("--model is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::InvalidInput(format!("cannot read {}: {e}", path.display())))?;
    let config = ModelConfig::from_json(&text)?;
    let model = config.to_model()?;
    Ok(Setup { config, model })
}

fn matrix(m: &PolyMatrix) -> Value {
    let rows: Vec<Vec<String>> = (0..m.rows()).map(|i| (0..m.cols()).map(|j| m.get(i, j).to_string()).collect()).collect();
    json!(rows)
}

fn strings(polys: &[CoeffPoly]) -> Value {
    json!(polys.iter().map(ToString::to_string).collect::<Vec<_>>())
}

fn split_and_frame(model: &QuadraticModel, opts: &Options) -> Result<(SigmaSplit, ReferenceFrame)> {
    let m = model.m();
    let split = build_sigma(model, &parse_sigma1(opts.sigma1.as_deref(), m)?, None)?;
    let frame = solve_connection(model, &split, &parse_upsilon(opts.upsilon.as_deref(), m)?)?;
    Ok((split, frame))
}

fn hamiltonian(model: &QuadraticModel, opts: &Options) -> Result<(SigmaSplit, HamiltonianForm)> {
    let (split, frame) = split_and_frame(model, opts)?;
    let h = build_hamiltonian(model, &split, &frame)?;
    Ok((split, h))
}

fn check(value: f64, tol: f64) -> Value {
    json!({ "value": value, "tol": tol, "passed": value <= tol })
}

fn skipped(reason: &str) -> Value {
    json!({ "skipped": reason })
}

fn failed(v: &Value) -> bool {
    v.get("passed") == Some(&Value::Bool(false))
}

pub fn run(command: Command, opts: &Options) -> Result<Outcome> {
    opts.check_ranges()?;
    let setup = load(opts.model.as_deref())?;
    match command {
        Command::Validate => validate(&setup, opts),
        Command::Split => split(&setup, opts),
        Command::Simulate => simulate(&setup, opts, false),
        Command::LagrangeCheck => simulate(&setup, opts, true),
        Command::Classify => classify(&setup, opts),
        Command::Kt => kt(&setup, opts),
        Command::Brst => brst(&setup, opts),
    }
}

fn validate(s: &Setup, opts: &Options) -> Result<Outcome> {
    let grid = s.model.domain.lattice(opts.grid);
    let report = validate_model(&s.model, &grid, DEFAULT_ZERO_EIGEN_TOL)?;
    Ok(Outcome::new(
        json!({
            "m": s.model.m(),
            "constant_metric": s.model.has_constant_metric(),
            "validation": report,
        }),
        true,
    ))
}

fn split(s: &Setup, opts: &Options) -> Result<Outcome> {
    let model = &s.model;
    let (split, frame) = split_and_frame(model, opts)?;
    let mut residuals = IdentityResiduals::default();
    let grid = model.domain.lattice(opts.grid);
    for pt in &grid {
        residuals.merge(&identity_residuals_at(&split, model, pt.t, &pt.q)?);
    }
    let identity_max = residuals.max();

    let symbolic = split.sigma0_poly().is_some();
    let (sigma0, projector, constraints, exact) = match split.sigma0_poly() {
        Some(s0) => (
            json!({ "mode": "symbolic", "matrix": matrix(s0) }),
            matrix(&split.projector(model)?),
            strings(&constraint_polys(&split, model)?),
            Some(symbolic_identities_hold(&split, model)?),
        ),
        None => (json!({ "mode": "pointwise", "tol": DEFAULT_ZERO_EIGEN_TOL }), Value::Null, Value::Null, None),
    };
    let reducibility = match constraint_reducibility(&split, model) {
        Ok((independent, nonzero)) => json!({ "independent": independent, "nonzero": nonzero }),
        Err(_) => Value::Null,
    };
    let cp = c_prime(model, &split).map(|c| Value::String(c.to_string())).unwrap_or(Value::Null);
    let passed = identity_max <= IDENTITY_TOL && exact != Some(false);
    Ok(Outcome::new(
        json!({
            "sigma0": sigma0,
            "sigma1": matrix(split.sigma1()),
            "projector": projector,
            "constraints": constraints,
            "c_prime": cp,
            "gamma": strings(&frame.gamma),
            "identity_residuals": residuals,
            "identity_max": identity_max,
            "identity_tol": IDENTITY_TOL,
            "points_checked": grid.len(),
            "symbolic": symbolic,
            "symbolic_identities": exact,
            "reducibility": reducibility,
        }),
        passed,
    ))
}

fn is_static(h: &HamiltonianForm) -> bool {
    !h.hfun().depends_on(Var::T) && h.frame.gamma.iter().all(|g| !g.depends_on(Var::T))
}

fn simulate(s: &Setup, opts: &Options, residuals: bool) -> Result<Outcome> {
    let model = &s.model;
    let m = model.m();
    let (split, h) = hamiltonian(model, opts)?;
    let (t0, q0, p0) = parse_initial(opts.initial.as_deref(), m)?;
    let traj = integrate_hamilton(&h, t0, &q0, &p0, opts.t_end, opts.step)?;
    let last = traj.last().expect("at least two samples");

    let r0 = constraint_values(&split, model, t0, &q0, &p0)?.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let on_constraints = r0 <= opts.tol_drift;
    let drift = constraint_drift(&traj, &split, model)?;
    let drift_check = if on_constraints { check(drift, opts.tol_drift) } else { skipped("initial state is off the constraint space") };

    let energy = if is_static(&h) {
        let e = h.energy_function()?.compile();
        let at = |t: f64, q: &[f64], p: &[f64]| {
            let x: Vec<f64> = std::iter::once(t).chain(q.iter().copied()).chain(p.iter().copied()).collect();
            e.eval(&x)
        };
        let e0 = at(t0, &q0, &p0);
        let var = traj.samples().iter().fold(0.0_f64, |acc, s| acc.max((at(s.t, &s.q, &s.p) - e0).abs()));
        json!({ "initial": e0, "max_variation": var })
    } else {
        Value::Null
    };

    let mut checks = Map::new();
    checks.insert("constraint_drift".into(), drift_check);
    if residuals {
        let tol = opts.tol_residual;
        match lagrange_residual(&traj, model) {
            Ok(r) => {
                checks.insert("lagrange".into(), check(r, tol));
                let sr = split_residuals(&traj, &split, model, &h.frame)?;
                checks.insert("gauge".into(), check(sr.gauge, tol));
                checks.insert("momentum".into(), check(sr.momentum, tol));
            }
            Err(Error::TooFewSamples { needed, got }) => {
                let reason = format!("need {needed} samples, got {got}");
                for key in ["lagrange", "gauge", "momentum"] {
                    checks.insert(key.into(), skipped(&reason));
                }
            }
            Err(e) => return Err(e),
        }
        let constrained = match constrained_equation_check(&traj, &split, model, &h, opts.tol_drift) {
            Ok(r) => check(r, tol),
            Err(Error::NotApplicable(msg)) => skipped(&msg),
            Err(Error::TooFewSamples { needed, got }) => skipped(&format!("need {needed} samples, got {got}")),
            Err(e) => return Err(e),
        };
        checks.insert("constrained_equations".into(), constrained);
    }
    let passed = !checks.values().any(failed);

    let mut out = Outcome::new(
        json!({
            "hamiltonian": h.hfun().to_string(),
            "gamma": strings(&h.frame.gamma),
            "step": opts.step,
            "t_end": opts.t_end,
            "samples": traj.len(),
            "initial": { "t": t0, "q": q0, "p": p0 },
            "final": last,
            "initial_constraint_residual": r0,
            "energy": energy,
            "checks": checks,
        }),
        passed,
    );
    out.csv = Some(traj.to_csv());
    Ok(out)
}

fn classify(s: &Setup, opts: &Options) -> Result<Outcome> {
    let model = &s.model;
    let m = model.m();
    let (split, frame) = split_and_frame(model, opts)?;
    let user = s.config.constraint_polys()?;
    let (source, gens) = if user.is_empty() {
        ("primary", constraint_polys(&split, model)?.into_iter().filter(|g| !g.is_zero()).collect::<Vec<_>>())
    } else {
        ("model", user)
    };
    let set = ConstraintSet::new(gens)?;
    let grid: Vec<_> = model.domain.lattice(opts.grid);
    let (mode, classes) = match classify_constraints(&set, MembershipMode::Symbolic, &grid, opts.tol_residual) {
        Err(Error::NotApplicable(_)) => ("sampled", classify_constraints(&set, MembershipMode::Sampled, &grid, opts.tol_residual)?),
        other => ("symbolic", other?),
    };

    let primary = constraint_polys(&split, model).and_then(|r| LinearIdeal::new(&r, m, m));
    let vanishes_on_constraint_space = match &primary {
        Ok(ideal) => json!(set.generators.iter().map(|g| ideal.contains(g)).collect::<Result<Vec<_>>>()?),
        Err(_) => Value::Null,
    };

    let algorithm = match build_hamiltonian(model, &split, &frame).and_then(|h| constraint_algorithm(&h, &set, MAX_ROUNDS)) {
        Ok(out) => json!({
            "chain": out.chain.iter().map(|c| strings(c)).collect::<Vec<_>>(),
            "closed": out.closed,
            "max_rounds": MAX_ROUNDS,
        }),
        Err(e @ (Error::NotApplicable(_) | Error::RequiresSymbolic(_))) => json!({ "skipped": e.to_string() }),
        Err(e) => return Err(e),
    };

    let brackets: Vec<Vec<String>> = classes.brackets.iter().map(|row| row.iter().map(ToString::to_string).collect()).collect();
    let relations: Vec<Vec<String>> = set.relations.iter().map(|r| r.iter().map(ToString::to_string).collect()).collect();
    Ok(Outcome::new(
        json!({
            "source": source,
            "mode": mode,
            "generators": strings(&set.generators),
            "classes": classes.classes,
            "brackets": brackets,
            "brackets_in_ideal": classes.in_ideal,
            "relations": relations,
            "vanishes_on_constraint_space": vanishes_on_constraint_space,
            "algorithm": algorithm,
        }),
        true,
    ))
}

fn complex(s: &Setup, opts: &Options) -> Result<KTComplex> {
    let (split, _) = split_and_frame(&s.model, opts)?;
    KTComplex::new(&s.model, &split, opts.k)
}

const NORMALIZATION: &str = "ghosts rescaled to absorb the imaginary unit; all coefficients rational";

fn kt(s: &Setup, opts: &Options) -> Result<Outcome> {
    let cx = complex(s, opts)?;
    let differential: Map<String, Value> = cx
        .antighosts()
        .into_iter()
        .map(|g| {
            let image = kt_delta(&quadham::GradedElement::generator(g, cx.m(), cx.m()), &cx)?;
            Ok((g.to_string(), Value::String(image.to_string())))
        })
        .collect::<Result<_>>()?;
    let nilpotency = check_nilpotency(&cx, RANDOM_TRIALS, opts.seed)?;

    let mut passed = nilpotency.passed();
    let (homology_rows, h_dim) = match (0..opts.k).map(|k| homology(&cx, k, opts.d)).collect::<Result<Vec<_>>>() {
        Ok(rows) => {
            passed &= rows.iter().all(|r| r.k == 0 || !r.complete || r.h_dim == 0);
            let dims: Map<String, Value> = rows.iter().map(|r| (r.k.to_string(), json!(r.h_dim))).collect();
            (json!(rows), Value::Object(dims))
        }
        Err(e @ Error::NotApplicable(_)) => (json!({ "skipped": e.to_string() }), Value::Null),
        Err(e) => return Err(e),
    };
    let irreducible = irreducibility(&cx).map(|r| json!(r)).unwrap_or(Value::Null);
    Ok(Outcome::new(
        json!({
            "K": cx.truncation(),
            "D": opts.d,
            "normalization": NORMALIZATION,
            "differential": differential,
            "nilpotency": { "passed": nilpotency.passed(), "report": nilpotency },
            "homology": homology_rows,
            "h_dim": h_dim,
            "irreducibility": irreducible,
        }),
        passed,
    ))
}

fn brst(s: &Setup, opts: &Options) -> Result<Outcome> {
    let cx = complex(s, opts)?;
    let q = brst_charge(&cx)?;
    let report = verify_charge(&cx, RANDOM_TRIALS, opts.seed)?;
    Ok(Outcome::new(
        json!({
            "K": cx.truncation(),
            "normalization": NORMALIZATION,
            "charge": q.to_string(),
            "charge_terms": q.num_terms(),
            "bracket_matches_differential": { "passed": report.passed(), "report": report },
        }),
        report.passed(),
    ))
}
