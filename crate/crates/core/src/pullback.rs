//! Pullback approximation of non-autonomous equilibria inside the invariant
//! regions: start deeper and deeper in the past, evolve to the target time,
//! and watch the end slices settle.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::Sign;
use crate::error::{Error, Result};
use crate::evolution::{Integrator, ProblemSpec, StepPlan, DEFAULT_DT};
use crate::regions::{
    check_problem_fits, region_spec, sample_region, RegionSpec, DEFAULT_TOLERANCE,
};
use crate::spatial::{nondegeneracy_check, zero_crossings, Grid, Profile, ZeroSet};

pub const DEFAULT_T0: f64 = 5.0;
pub const DEFAULT_DEPTH: usize = 6;
/// Cauchy gap below which a pullback slice counts as converged.
pub const CONVERGENCE_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PullbackOptions {
    /// Base horizon `T₀`; level `k` starts at `t − 2^k·T₀`.
    pub t0: f64,
    pub depth: usize,
    pub dt: f64,
    /// Region membership is checked every this many steps and at the end.
    pub check_every: usize,
    pub tolerance: f64,
}

impl Default for PullbackOptions {
    fn default() -> Self {
        Self {
            t0: DEFAULT_T0,
            depth: DEFAULT_DEPTH,
            dt: DEFAULT_DT,
            check_every: 100,
            tolerance: DEFAULT_TOLERANCE,
        }
    }
}

impl PullbackOptions {
    fn validate(&self) -> Result<()> {
        if !(self.t0 > 0.0 && self.t0.is_finite()) {
            return Err(Error::invalid(format!(
                "T0 must be positive, got {}",
                self.t0
            )));
        }
        if self.depth > 30 {
            return Err(Error::invalid(format!("depth {} is too large", self.depth)));
        }
        if !(self.dt > 0.0) {
            return Err(Error::invalid(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        Ok(())
    }

    fn start(&self, t: f64, k: usize) -> f64 {
        t - (1u64 << k) as f64 * self.t0
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PullbackRun {
    pub t: f64,
    pub starts: Vec<f64>,
    /// `ξ_k(t) = S(t, s_k)u_start`.
    pub slices: Vec<Profile>,
    /// `‖ξ_{k+1}(t) − ξ_k(t)‖_∞`.
    pub gaps: Vec<f64>,
    pub converged: bool,
    /// Largest region exit distance seen along the way.
    pub max_exit: f64,
}

impl PullbackRun {
    pub fn slice(&self) -> &Profile {
        self.slices.last().expect("at least one level")
    }

    pub fn final_gap(&self) -> Option<f64> {
        self.gaps.last().copied()
    }
}

/// Evolves `u0` from `s` through the increasing `times`, returning the state
/// at each, and fails if it leaves the region by more than the tolerance.
fn run_through(
    u0: &Profile,
    s: f64,
    times: &[f64],
    problem: &ProblemSpec,
    region: &RegionSpec,
    opts: &PullbackOptions,
) -> Result<(Vec<Profile>, f64)> {
    let grid = *u0.grid();
    let mut it = Integrator::new(u0, s, problem, Some(region.symmetry))?;
    let mut out = Vec::with_capacity(times.len());
    let mut max_exit = 0.0f64;
    let every = opts.check_every.max(1);
    let mut check = |it: &Integrator<'_>, force: bool, count: usize| -> Result<()> {
        if force || count % every == 0 {
            let u = Profile::from_vec_unchecked(grid, it.state().values.to_vec());
            let d = region.exit_distance(&u)?;
            max_exit = max_exit.max(d);
            if d > opts.tolerance {
                return Err(Error::RegionExit {
                    distance: d,
                    time: it.time(),
                });
            }
        }
        Ok(())
    };
    let mut count = 0usize;
    for &t in times {
        let plan = StepPlan::new(it.time(), t, opts.dt)?;
        for k in 1..=plan.steps {
            it.advance_to(plan.time(k))?;
            count += 1;
            check(&it, false, count)?;
        }
        check(&it, true, count)?;
        out.push(it.profile());
    }
    Ok((out, max_exit))
}

fn gaps_of(slices: &[Profile]) -> Vec<f64> {
    slices
        .windows(2)
        .map(|w| w[1].sup_distance(&w[0]).expect("same grid"))
        .collect()
}

/// `ξ_k(t)` for `k = 0..=depth` from the common start `u_start`.
pub fn pullback_slice(
    t: f64,
    region: &RegionSpec,
    problem: &ProblemSpec,
    u_start: &Profile,
    opts: &PullbackOptions,
) -> Result<PullbackRun> {
    opts.validate()?;
    check_problem_fits(region, problem)?;
    let d = region.exit_distance(u_start)?;
    if d > opts.tolerance {
        return Err(Error::invalid(format!(
            "start profile is outside the region by {d:e}"
        )));
    }
    let starts: Vec<f64> = (0..=opts.depth).map(|k| opts.start(t, k)).collect();
    let levels = starts
        .par_iter()
        .map(|&s| run_through(u_start, s, &[t], problem, region, opts))
        .collect::<Result<Vec<_>>>()?;
    let max_exit = levels.iter().fold(0.0f64, |m, l| m.max(l.1));
    let slices: Vec<Profile> = levels.into_iter().map(|mut l| l.0.remove(0)).collect();
    let gaps = gaps_of(&slices);
    let converged = gaps.last().is_some_and(|&g| g <= CONVERGENCE_GAP);
    Ok(PullbackRun {
        t,
        starts,
        slices,
        gaps,
        converged,
        max_exit,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSample {
    pub t: f64,
    pub zeros: ZeroSet,
    /// Per arch: smallest and largest value.
    pub arch_min: Vec<f64>,
    pub arch_max: Vec<f64>,
    pub gaps: Vec<f64>,
    pub exit_distance: f64,
    pub zeros_ok: bool,
    pub in_region: bool,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trace {
    pub j: usize,
    pub sign: Sign,
    pub lambda: f64,
    pub options: PullbackOptions,
    pub samples: Vec<TraceSample>,
    pub slices: Vec<Profile>,
    /// Largest final Cauchy gap over the window.
    pub max_final_gap: f64,
    pub valid: bool,
    pub first_failure: Option<(f64, String)>,
}

fn arch_signs(grid: &Grid, j: usize, sign: Sign) -> Vec<f64> {
    let arch = (grid.n() + 1) / j;
    (0..grid.n())
        .map(|i| {
            if ((i + 1) / arch) % 2 == 0 {
                sign.factor()
            } else {
                -sign.factor()
            }
        })
        .collect()
}

/// Follows the non-autonomous equilibrium in `X_j^sign` over `window`.
///
/// Every level `k` is started once, at `t₀ − 2^k·T₀`, and carried through
/// the whole window, so the slice at a later sample time is the same
/// pullback limit taken from a slightly deeper start. At each sample time
/// the deepest slice is checked for (a) zeros at `kL/j` within `2h`,
/// (b) region membership and (c) domination of the floor `½|inner|` on
/// every arch.
pub fn trace_equilibrium(
    j: usize,
    sign: Sign,
    problem: &ProblemSpec,
    grid: &Grid,
    window: (f64, f64),
    sample_dt: f64,
    opts: &PullbackOptions,
) -> Result<Trace> {
    opts.validate()?;
    let (b1, b2) = problem.beta.bounds();
    let region = region_spec(j, sign, problem.lambda, b1, b2, grid)?;
    check_problem_fits(&region, problem)?;
    let (t0, t1) = window;
    if !(t1 >= t0) || !(sample_dt > 0.0) {
        return Err(Error::invalid(
            "window must be increasing and sample_dt positive",
        ));
    }
    let count = ((t1 - t0) / sample_dt + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=count).map(|m| t0 + m as f64 * sample_dt).collect();

    let u_start = region.interpolate(|_| 0.5);
    let levels = (0..=opts.depth)
        .into_par_iter()
        .map(|k| run_through(&u_start, opts.start(t0, k), &times, problem, &region, opts))
        .collect::<Result<Vec<_>>>()?;

    let h = grid.spacing();
    let arch_len = grid.length() / j as f64;
    let signs = arch_signs(grid, j, sign);
    let inner = region.inner();
    let floor = Profile::new(
        *grid,
        inner.values().iter().map(|v| 0.5 * v.abs()).collect(),
    )?;
    let arch_nodes = (grid.n() + 1) / j;

    let mut samples = Vec::with_capacity(times.len());
    let mut slices = Vec::with_capacity(times.len());
    let mut first_failure = None;
    for (m, &t) in times.iter().enumerate() {
        let level_slices: Vec<Profile> = levels.iter().map(|l| l.0[m].clone()).collect();
        let gaps = gaps_of(&level_slices);
        let xi = level_slices.last().expect("depth ≥ 0").clone();

        let zeros = zero_crossings(&xi, 1e-6 * xi.sup_norm());
        let zeros_ok = match &zeros {
            ZeroSet::Zeros(z) => {
                z.len() == j + 1
                    && z.iter()
                        .enumerate()
                        .all(|(k, x)| (x - k as f64 * arch_len).abs() <= 2.0 * h)
            }
            ZeroSet::IdenticallySmall => false,
        };
        let exit_distance = region.exit_distance(&xi)?;
        let in_region = exit_distance <= opts.tolerance;
        let signed = Profile::new(
            *grid,
            xi.values().iter().zip(&signs).map(|(v, s)| v * s).collect(),
        )?;
        let nondegenerate = nondegeneracy_check(&[signed], &floor)?;

        let mut arch_min = Vec::with_capacity(j);
        let mut arch_max = Vec::with_capacity(j);
        for a in 0..j {
            let lo = a * arch_nodes;
            let hi = ((a + 1) * arch_nodes - 1).min(grid.n());
            let part = &xi.values()[lo..hi];
            arch_min.push(part.iter().cloned().fold(f64::INFINITY, f64::min));
            arch_max.push(part.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
        }

        if first_failure.is_none() {
            let reason = if !zeros_ok {
                Some("zero set moved")
            } else if !in_region {
                Some("left the region")
            } else if !nondegenerate {
                Some("fell below the non-degeneracy floor")
            } else {
                None
            };
            if let Some(r) = reason {
                first_failure = Some((t, r.to_string()));
            }
        }
        samples.push(TraceSample {
            t,
            zeros,
            arch_min,
            arch_max,
            gaps,
            exit_distance,
            zeros_ok,
            in_region,
            nondegenerate,
        });
        slices.push(xi);
    }
    let max_final_gap = samples
        .iter()
        .filter_map(|s| s.gaps.last().copied())
        .fold(0.0f64, f64::max);
    Ok(Trace {
        j,
        sign,
        lambda: problem.lambda,
        options: *opts,
        valid: first_failure.is_none(),
        first_failure,
        samples,
        slices,
        max_final_gap,
    })
}

/// Largest pairwise sup-norm gap at `t` among `bundle_size` region samples
/// started at `t − 2^depth·T₀`.
pub fn attraction_test(
    region: &RegionSpec,
    problem: &ProblemSpec,
    t: f64,
    bundle_size: usize,
    depth: usize,
    seed: u64,
    opts: &PullbackOptions,
) -> Result<f64> {
    opts.validate()?;
    check_problem_fits(region, problem)?;
    if bundle_size == 0 {
        return Err(Error::invalid("bundle must hold at least one start"));
    }
    let s = opts.start(t, depth);
    let starts = sample_region(region, seed, bundle_size);
    let ends = starts
        .par_iter()
        .map(|u| run_through(u, s, &[t], problem, region, opts).map(|mut r| r.0.remove(0)))
        .collect::<Result<Vec<_>>>()?;
    let mut worst = 0.0f64;
    for a in 0..ends.len() {
        for b in a + 1..ends.len() {
            worst = worst.max(ends[a].sup_distance(&ends[b])?);
        }
    }
    Ok(worst)
}
