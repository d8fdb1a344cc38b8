use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use quadham::poly::{parse_rational, rational_to_f64, PolyLiteral};
use quadham::{CoeffPoly, Error, PolyMatrix, Result};

#[derive(Debug, Parser)]
#[command(name = "quadham", version, about = "Hamiltonian analysis of degenerate quadratic Lagrangians")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Check symmetry, constant rank and b in Im a over the domain grid.
    Validate,
    /// Splitting maps, primary constraints, c' and the reference frame.
    Split,
    /// Integrate the Hamilton equations and write trajectory.csv.
    Simulate,
    /// Integrate, then check the Lagrange equations and split residuals.
    LagrangeCheck,
    /// First/second class split and the secondary-constraint search.
    Classify,
    /// Koszul-Tate differential, nilpotency and homology.
    Kt,
    /// BRST charge and its bracket with the antighosts.
    Brst,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Split => "split",
            Command::Simulate => "simulate",
            Command::LagrangeCheck => "lagrange-check",
            Command::Classify => "classify",
            Command::Kt => "kt",
            Command::Brst => "brst",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct Options {
    /// Model file (JSON).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// Output directory for report.json and trajectory.csv.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1e-3)]
    pub step: f64,
    #[arg(long = "t-end", global = true, default_value_t = 1.0)]
    pub t_end: f64,
    /// Initial state `t0,q1,..,qm,p1,..,pm`.
    #[arg(long, global = true)]
    pub initial: Option<String>,
    /// Constant rows `r,r;r,r` or a JSON polynomial matrix over (t, q).
    #[arg(long, global = true)]
    pub sigma1: Option<String>,
    /// Kernel offset: constants `u1,..,um` or a JSON list of polynomials over (t, q).
    #[arg(long, global = true)]
    pub upsilon: Option<String>,
    /// Antighost truncation level.
    #[arg(long = "K", global = true, default_value_t = 4)]
    pub k: u32,
    /// Maximum momentum degree for homology.
    #[arg(long = "D", global = true, default_value_t = 2)]
    pub d: u32,
    /// Grid points per (t, q) axis.
    #[arg(long, global = true, default_value_t = 3)]
    pub grid: usize,
    #[arg(long = "tol-drift", global = true, default_value_t = 1e-8)]
    pub tol_drift: f64,
    #[arg(long = "tol-residual", global = true, default_value_t = 1e-4)]
    pub tol_residual: f64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
}

impl Options {
    pub fn check_ranges(&self) -> Result<()> {
        let positive = |x: f64, name: &str| {
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidInput(format!("--{name} must be positive and finite")))
            }
        };
        positive(self.step, "step")?;
        positive(self.tol_drift, "tol-drift")?;
        positive(self.tol_residual, "tol-residual")?;
        if !self.t_end.is_finite() {
            return Err(Error::InvalidInput("--t-end must be finite".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidInput("--K must be at least 1".into()));
        }
        if self.grid == 0 {
            return Err(Error::InvalidInput("--grid must be at least 1".into()));
        }
        Ok(())
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(|x| parse_rational(x.trim()).map(|r| rational_to_f64(&r))).collect()
}

/// `(t0, q0, p0)`; defaults to the origin at `t = 0`.
pub fn parse_initial(s: Option<&str>, m: usize) -> Result<(f64, Vec<f64>, Vec<f64>)> {
    let Some(s) = s else {
        return Ok((0.0, vec![0.0; m], vec![0.0; m]));
    };
    let v = parse_list(s)?;
    if v.len() != 1 + 2 * m {
        return Err(Error::DimensionMismatch(format!("--initial needs 1 + 2m = {} values, got {}", 1 + 2 * m, v.len())));
    }
    Ok((v[0], v[1..=m].to_vec(), v[m + 1..].to_vec()))
}

pub fn parse_sigma1(s: Option<&str>, m: usize) -> Result<PolyMatrix> {
    let Some(s) = s.map(str::trim) else {
        return Ok(PolyMatrix::zeros(m, m, m, 0));
    };
    if s.starts_with('[') {
        let lits: Vec<Vec<Vec<PolyLiteral>>> = serde_json::from_str(s).map_err(|e| Error::Parse(format!("--sigma1: {e}")))?;
        return PolyMatrix::from_literal(&lits, m, 0);
    }
    let rows: Vec<&str> = s.split(';').collect();
    if rows.len() != m {
        return Err(Error::DimensionMismatch(format!("--sigma1 needs {m} rows")));
    }
    let mut entries = Vec::with_capacity(m * m);
    for row in rows {
        let vals: Vec<&str> = row.split(',').collect();
        if vals.len() != m {
            return Err(Error::DimensionMismatch(format!("--sigma1 rows need {m} entries")));
        }
        for v in vals {
            entries.push(CoeffPoly::constant(parse_rational(v.trim())?, m, 0));
        }
    }
    PolyMatrix::new(m, m, entries)
}

pub fn parse_upsilon(s: Option<&str>, m: usize) -> Result<Vec<CoeffPoly>> {
    let Some(s) = s.map(str::trim) else {
        return Ok(vec![CoeffPoly::zero(m, 0); m]);
    };
    let polys = if s.starts_with('[') {
        let lits: Vec<Vec<PolyLiteral>> = serde_json::from_str(s).map_err(|e| Error::Parse(format!("--upsilon: {e}")))?;
        lits.iter().map(|l| CoeffPoly::from_literal(l, m, 0)).collect::<Result<Vec<_>>>()?
    } else {
        s.split(',').map(|x| Ok(CoeffPoly::constant(parse_rational(x.trim())?, m, 0))).collect::<Result<Vec<_>>>()?
    };
    if polys.len() != m {
        return Err(Error::DimensionMismatch(format!("--upsilon needs {m} components")));
    }
    Ok(polys)
}
