use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::equilibria::Sign;
use crate::error::{Error, Result};
use crate::evolution::{Beta, Diffusivity, ProblemSpec, DEFAULT_DT};
use crate::io::TrajectoryColumns;
use crate::pullback::{PullbackOptions, DEFAULT_DEPTH, DEFAULT_T0};
use crate::spatial::Grid;

/// Everything a run depends on. Loaded from JSON (unknown keys rejected),
/// overridden by flags, resolved per command and written next to the
/// outputs; feeding the written file back reproduces the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub lambda: f64,
    /// Constant cubic coefficient; shorthand for `beta = constant:b`.
    pub b: Option<f64>,
    pub b1: Option<f64>,
    pub b2: Option<f64>,
    /// `constant:B`, `sinusoidal:B1,B2[,OMEGA]` or `table:T=B,...`.
    pub beta: Option<String>,
    /// `constant:C`, `saturating`, `rational` or `table:S=A,...`.
    pub a: String,
    pub n: usize,
    pub dt: f64,
    pub horizon: Option<f64>,
    pub tolerance: f64,
    pub seed: u64,
    pub out: PathBuf,
    pub plot: bool,

    /// Initial datum for `simulate`: `sine:A[,K]` or `random`.
    pub init: String,
    pub sample_every: usize,
    pub columns: TrajectoryColumns,

    /// `LO:HI:STEP`, inclusive.
    pub lambda_grid: String,

    pub j: usize,
    pub sign: Sign,
    pub t0: f64,
    pub depth: usize,
    /// `START:END` of the traced time window.
    pub window: String,
    pub sample_dt: f64,

    /// `sandwich`, `invariance` or `pullback`.
    pub suite: String,
    /// Triples (sandwich) or samples (invariance).
    pub triples: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lambda: 3.0,
            b: None,
            b1: None,
            b2: None,
            beta: None,
            a: "saturating".into(),
            n: 255,
            dt: DEFAULT_DT,
            horizon: None,
            tolerance: 1e-6,
            seed: 0,
            out: PathBuf::from("kci-out"),
            plot: false,
            init: "sine:0.5,1".into(),
            sample_every: 100,
            columns: TrajectoryColumns::Nodes,
            lambda_grid: "0.5:9.5:0.5".into(),
            j: 1,
            sign: Sign::Plus,
            t0: DEFAULT_T0,
            depth: DEFAULT_DEPTH,
            window: "0:6".into(),
            sample_dt: 1.0,
            suite: "sandwich".into(),
            triples: 100,
        }
    }
}

/// Which problem family a command needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Needs {
    /// Time-dependent β.
    Forcing,
    /// A single constant `b`.
    Autonomous,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::invalid(format!("config {}: {e}", path.display())))
    }

    pub fn diffusivity(&self) -> Result<Diffusivity> {
        self.a.parse()
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::on_pi(self.n)
    }

    pub fn problem(&self) -> Result<ProblemSpec> {
        ProblemSpec::nonlocal(self.lambda, self.diffusivity()?, self.beta_fn()?)
    }

    /// The constant `b` of the autonomous problem.
    pub fn constant_b(&self) -> Result<f64> {
        match self.beta_fn()? {
            Beta::Constant { b } => Ok(b),
            _ => Err(Error::invalid(
                "this command needs a constant cubic coefficient (--b or --beta constant:B)",
            )),
        }
    }

    pub fn beta_fn(&self) -> Result<Beta> {
        let beta: Beta = match (&self.beta, self.b) {
            (Some(_), Some(_)) => return Err(Error::invalid("give either b or beta, not both")),
            (Some(desc), None) => desc.parse()?,
            (None, Some(b)) => Beta::constant(b),
            (None, None) => Beta::sinusoidal(self.b1.unwrap_or(1.0), self.b2.unwrap_or(2.0)),
        };
        beta.validate()?;
        let (lo, hi) = beta.bounds();
        if let Some(b1) = self.b1 {
            if lo < b1 {
                return Err(Error::invalid(format!(
                    "beta falls below b1 = {b1} (min {lo})"
                )));
            }
        }
        if let Some(b2) = self.b2 {
            if hi > b2 {
                return Err(Error::invalid(format!("beta exceeds b2 = {b2} (max {hi})")));
            }
        }
        Ok(beta)
    }

    pub fn pullback_options(&self) -> PullbackOptions {
        PullbackOptions {
            t0: self.t0,
            depth: self.depth,
            dt: self.dt,
            tolerance: self.tolerance,
            ..PullbackOptions::default()
        }
    }

    pub fn lambdas(&self) -> Result<Vec<f64>> {
        let parts = parse_floats(&self.lambda_grid, "lambda grid", 3)?;
        let (lo, hi, step) = (parts[0], parts[1], parts[2]);
        if !(step > 0.0 && hi >= lo && lo > 0.0) {
            return Err(Error::invalid(format!(
                "lambda grid needs 0 < LO ≤ HI and STEP > 0, got `{}`",
                self.lambda_grid
            )));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize;
        if count > 100_000 {
            return Err(Error::invalid("lambda grid has too many points"));
        }
        Ok((0..=count).map(|k| lo + k as f64 * step).collect())
    }

    pub fn window_bounds(&self) -> Result<(f64, f64)> {
        let w = parse_floats(&self.window, "window", 2)?;
        Ok((w[0], w[1]))
    }

    /// Numeric checks shared by all commands; module constructors check
    /// the rest.
    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if let Some(h) = self.horizon {
            if !(h.is_finite() && h >= 0.0) {
                return Err(Error::invalid(format!(
                    "horizon must be non-negative, got {h}"
                )));
            }
        }
        if !(self.tolerance.is_finite() && self.tolerance >= 0.0) {
            return Err(Error::invalid("tolerance must be non-negative"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every must be at least 1"));
        }
        if !(self.sample_dt > 0.0) {
            return Err(Error::invalid("sample_dt must be positive"));
        }
        if self.j == 0 {
            return Err(Error::invalid("j must be at least 1"));
        }
        self.grid()?;
        self.diffusivity()?;
        Ok(())
    }
}

fn parse_floats(s: &str, what: &str, count: usize) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| Error::invalid(format!("{what}: cannot parse `{s}`")))?;
    if v.len() != count || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid(format!(
            "{what}: expected {count} colon-separated numbers, got `{s}`"
        )));
    }
    Ok(v)
}

pub fn parse_sign(s: &str) -> Result<Sign> {
    match s {
        "plus" | "+" => Ok(Sign::Plus),
        "minus" | "-" => Ok(Sign::Minus),
        other => Err(Error::invalid(format!(
            "sign must be plus or minus, got `{other}`"
        ))),
    }
}
