//! Time integration of the non-local problem, its time-changed form, the
//! two local auxiliary problems and the autonomous non-local problem.

mod coefficients;
mod integrator;
mod problem;
mod trajectory;

use std::sync::Arc;

pub use coefficients::{Beta, CustomFn, Diffusivity, DIFFUSIVITY_HI, DIFFUSIVITY_LO};
pub(crate) use integrator::StepPlan;
pub use integrator::{
    evolve, propagate, step, EvolveOptions, Integrator, StepState, BLOW_UP_LIMIT, DEFAULT_DT,
};
pub use problem::{ProblemKind, ProblemSpec};
pub use trajectory::{invert_time_map, time_map, TimeMap, Trajectory};

use crate::error::{Error, Result};
use crate::spatial::Profile;

/// Integrates the non-local problem on `[s, t]`, then the time-changed
/// problem on `[0, φ(t)]` driven by the recorded time map, and returns the
/// largest sup-norm gap between `u(t_k)` and `w(φ(t_k))` over the samples.
pub fn check_equivalence_timechange(
    u0: &Profile,
    s: f64,
    t: f64,
    problem: &ProblemSpec,
    opts: &EvolveOptions,
) -> Result<f64> {
    if problem.kind != ProblemKind::Nonlocal {
        return Err(Error::invalid(
            "equivalence check needs the non-local problem",
        ));
    }
    let direct = evolve(u0, s, t, problem, opts)?;
    let map = Arc::new(direct.time_map.clone());
    let changed = problem.to_time_changed().with_reference(map);
    let tau_end = *direct.phi.last().expect("non-empty trajectory");
    let w = evolve(u0, 0.0, tau_end, &changed, &opts.sampled(1))?;

    let mut worst = 0.0f64;
    for (u, &tau) in direct.profiles.iter().zip(&direct.phi) {
        let i = w
            .times
            .partition_point(|&v| v <= tau)
            .clamp(1, w.times.len().max(2) - 1);
        let wt = if w.times.len() == 1 {
            w.profiles[0].clone()
        } else {
            let (t0, t1) = (w.times[i - 1], w.times[i]);
            let theta = ((tau - t0) / (t1 - t0)).clamp(0.0, 1.0);
            w.profiles[i - 1].zip_with(&w.profiles[i], |a, b| a + theta * (b - a))?
        };
        worst = worst.max(u.sup_distance(&wt)?);
    }
    Ok(worst)
}
