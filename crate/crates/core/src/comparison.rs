//! The comparison sandwich `T₂(t−s)u₀ ≤ S_β(t,s)u₁ ≤ T₁(t−s)u₂` run as a
//! numerical experiment, and the γ-shift bound.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{EvolveOptions, Integrator, ProblemKind, ProblemSpec, StepPlan};
use crate::spatial::{partial_order_leq, Grid, Profile};

/// Smallest `γ ≥ 0` with `γ + d/du[(λ/2)u − b₂u³] ≥ 0` and
/// `γ + d/du[λu − (b₁/2)u³] ≥ 0` for all `|u| ≤ R`.
pub fn gamma_bound(r: f64, lambda: f64, b1: f64, b2: f64) -> Result<f64> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::invalid(format!("R must be non-negative, got {r}")));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(b1 > 0.0 && b1 <= b2 && b2.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 < b1 ≤ b2, got b1={b1}, b2={b2}"
        )));
    }
    let r2 = r * r;
    Ok((3.0 * b2 * r2 - 0.5 * lambda)
        .max(1.5 * b1 * r2 - lambda)
        .max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleViolation {
    pub time: f64,
    /// `max(T₂u₀ − Su₁, 0)` and the node where it occurs.
    pub lower: f64,
    pub lower_node: usize,
    /// `max(Su₁ − T₁u₂, 0)` and the node where it occurs.
    pub upper: f64,
    pub upper_node: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SandwichReport {
    pub horizon: f64,
    pub dt: f64,
    pub samples: usize,
    pub max_lower_violation: f64,
    pub max_upper_violation: f64,
    pub per_sample: Vec<SampleViolation>,
}

impl SandwichReport {
    pub fn max_violation(&self) -> f64 {
        self.max_lower_violation.max(self.max_upper_violation)
    }
}

fn worst(a: &[f64], b: &[f64]) -> (f64, usize) {
    a.iter()
        .zip(b)
        .enumerate()
        .fold((0.0, 0), |(w, at), (i, (x, y))| {
            let d = x - y;
            if d > w {
                (d, i)
            } else {
                (w, at)
            }
        })
}

/// Evolves `u0` under the lower auxiliary problem, `u1` under the
/// time-changed form of `problem`, and `u2` under the upper auxiliary
/// problem, in lockstep with a common step, and records the ordering
/// violations. Every step is checked; every `sample_every`-th step (and the
/// last) is kept in the report.
pub fn sandwich_run(
    u0: &Profile,
    u1: &Profile,
    u2: &Profile,
    s: f64,
    t: f64,
    problem: &ProblemSpec,
    opts: &EvolveOptions,
) -> Result<SandwichReport> {
    if !matches!(
        problem.kind,
        ProblemKind::Nonlocal | ProblemKind::TimeChanged
    ) {
        return Err(Error::invalid(
            "the middle leg must be the non-local or time-changed problem",
        ));
    }
    u0.grid().ensure_same(u1.grid())?;
    u1.grid().ensure_same(u2.grid())?;
    for (a, b, what) in [(u0, u1, "u0 ≤ u1"), (u1, u2, "u1 ≤ u2")] {
        let c = partial_order_leq(a, b, 0.0)?;
        if !c.holds {
            return Err(Error::invalid(format!(
                "initial data not ordered: {what} fails by {}",
                c.max_violation
            )));
        }
    }
    let middle = problem.to_time_changed();
    let lower = problem.lower_auxiliary()?;
    let upper = problem.upper_auxiliary()?;
    let mut legs = [
        Integrator::new(u0, s, &lower, None)?,
        Integrator::new(u1, s, &middle, None)?,
        Integrator::new(u2, s, &upper, None)?,
    ];
    let plan = StepPlan::new(s, t, opts.dt)?;
    let every = opts.sample_every.max(1);
    let mut report = SandwichReport {
        horizon: t - s,
        dt: opts.dt,
        samples: 0,
        max_lower_violation: 0.0,
        max_upper_violation: 0.0,
        per_sample: Vec::new(),
    };
    for k in 0..=plan.steps {
        if k > 0 {
            let tk = plan.time(k);
            for leg in legs.iter_mut() {
                leg.advance_to(tk)?;
            }
        }
        let [lo, mid, up] = &legs;
        let (lv, ln) = worst(lo.state().values, mid.state().values);
        let (uv, un) = worst(mid.state().values, up.state().values);
        report.max_lower_violation = report.max_lower_violation.max(lv);
        report.max_upper_violation = report.max_upper_violation.max(uv);
        if k % every == 0 || k == plan.steps {
            report.per_sample.push(SampleViolation {
                time: mid.time(),
                lower: lv,
                lower_node: ln,
                upper: uv,
                upper_node: un,
            });
        }
    }
    report.samples = report.per_sample.len();
    Ok(report)
}

/// A smooth profile that is positive inside `(0, L)`:
/// `A·sin(πx/L)·exp(Σ c_k cos(kπx/L))` with `A ∈ [0, 1)`.
fn positive_bump(grid: Grid, rng: &mut ChaCha8Rng) -> Profile {
    let amp = rng.gen_range(0.0..1.0);
    let c: Vec<f64> = (1..=3).map(|_| rng.gen_range(-0.5..0.5)).collect();
    let w = std::f64::consts::PI / grid.length();
    Profile::from_fn(grid, |x| {
        let e: f64 = c
            .iter()
            .enumerate()
            .map(|(k, ck)| ck * ((k + 1) as f64 * w * x).cos())
            .sum();
        amp * (w * x).sin() * e.exp()
    })
}

/// Random `0 ≤ u₀ ≤ u₁ ≤ u₂`, all smooth.
pub fn random_ordered_triple(grid: Grid, rng: &mut ChaCha8Rng) -> [Profile; 3] {
    let u0 = positive_bump(grid, rng);
    let d1 = positive_bump(grid, rng);
    let d2 = positive_bump(grid, rng);
    let u1 = u0.zip_with(&d1, |a, b| a + b).expect("same grid");
    let u2 = u1.zip_with(&d2, |a, b| a + b).expect("same grid");
    [u0, u1, u2]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichSuite {
    pub lambdas: Vec<f64>,
    pub b1: f64,
    pub b2: f64,
    pub triples: usize,
    pub horizon: f64,
    pub n: usize,
    pub dt: f64,
    pub seed: u64,
    pub tolerance: f64,
}

impl Default for SandwichSuite {
    fn default() -> Self {
        Self {
            lambdas: vec![3.0, 5.0, 9.0],
            b1: 1.0,
            b2: 2.0,
            triples: 100,
            horizon: 20.0,
            n: 255,
            dt: 1e-3,
            seed: 0,
            tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TripleOutcome {
    pub index: usize,
    pub lambda: f64,
    pub violation: f64,
    /// Same triple at half the step.
    pub violation_refined: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: SandwichSuite,
    pub max_violation: f64,
    pub max_violation_refined: f64,
    pub passed: bool,
    pub triples: Vec<TripleOutcome>,
}

/// Random ordered triples cycled over `lambdas`, with the sinusoidal
/// `β ∈ [b₁, b₂]` and saturating diffusivity; each triple is run at `dt`
/// and at `dt/2`. Passes when every violation is within `tolerance` and the
/// refined violation is at most half the coarse one (plus round-off).
pub fn sandwich_suite(suite: &SandwichSuite) -> Result<SuiteReport> {
    use crate::evolution::{Beta, Diffusivity};
    if suite.lambdas.is_empty() || suite.triples == 0 {
        return Err(Error::invalid("sandwich suite needs lambdas and triples"));
    }
    let grid = Grid::on_pi(suite.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(suite.seed);
    let cases: Vec<(usize, f64, [Profile; 3])> = (0..suite.triples)
        .map(|i| {
            let lambda = suite.lambdas[i % suite.lambdas.len()];
            (i, lambda, random_ordered_triple(grid, &mut rng))
        })
        .collect();
    let outcomes = cases
        .par_iter()
        .map(|(i, lambda, [u0, u1, u2])| {
            let p = ProblemSpec::nonlocal(
                *lambda,
                Diffusivity::Saturating,
                Beta::sinusoidal(suite.b1, suite.b2),
            )?;
            let run = |dt: f64| {
                let opts = EvolveOptions::with_dt(dt).sampled(usize::MAX);
                sandwich_run(u0, u1, u2, 0.0, suite.horizon, &p, &opts).map(|r| r.max_violation())
            };
            Ok(TripleOutcome {
                index: *i,
                lambda: *lambda,
                violation: run(suite.dt)?,
                violation_refined: run(0.5 * suite.dt)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_violation = outcomes.iter().fold(0.0f64, |m, o| m.max(o.violation));
    let max_violation_refined = outcomes
        .iter()
        .fold(0.0f64, |m, o| m.max(o.violation_refined));
    let passed = outcomes.iter().all(|o| {
        o.violation <= suite.tolerance
            && o.violation_refined <= suite.tolerance
            && o.violation_refined <= 0.5 * o.violation + 1e-12
    });
    Ok(SuiteReport {
        suite: suite.clone(),
        max_violation,
        max_violation_refined,
        passed,
        triples: outcomes,
    })
}
