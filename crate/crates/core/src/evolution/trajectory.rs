use serde::{Deserialize, Serialize};

use super::problem::ProblemSpec;
use crate::error::{Error, Result};
use crate::spatial::Profile;

/// `φ(t) = ∫_s^t a(‖u_x(σ)‖²) dσ` at every step of a run, with `φ(s) = 0`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TimeMap {
    pub times: Vec<f64>,
    pub phi: Vec<f64>,
}

impl TimeMap {
    pub(crate) fn push(&mut self, t: f64, phi: f64) {
        self.times.push(t);
        self.phi.push(phi);
    }

    pub fn range(&self) -> Option<(f64, f64)> {
        Some((*self.phi.first()?, *self.phi.last()?))
    }

    /// `φ(t)` by linear interpolation between steps.
    pub fn phi_at(&self, t: f64) -> Result<f64> {
        interpolate_monotone(&self.times, &self.phi, t, "time")
    }

    /// `φ⁻¹(τ)` by monotone linear interpolation. No extrapolation.
    pub fn invert(&self, tau: f64) -> Result<f64> {
        interpolate_monotone(&self.phi, &self.times, tau, "changed time")
    }
}

fn interpolate_monotone(xs: &[f64], ys: &[f64], x: f64, what: &str) -> Result<f64> {
    let (Some(&lo), Some(&hi)) = (xs.first(), xs.last()) else {
        return Err(Error::invalid("empty time map"));
    };
    // Accept round-off at the ends; anything further is extrapolation.
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if x < lo - slack || x > hi + slack {
        return Err(Error::invalid(format!(
            "{what} {x} outside the time map range [{lo}, {hi}]"
        )));
    }
    if xs.len() == 1 {
        return Ok(ys[0]);
    }
    let x = x.clamp(lo, hi);
    let i = xs.partition_point(|&v| v <= x).clamp(1, xs.len() - 1);
    let (x0, x1) = (xs[i - 1], xs[i]);
    let (y0, y1) = (ys[i - 1], ys[i]);
    Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Sampled states of one run.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub problem: ProblemSpec,
    /// Values of the integration variable at the samples.
    pub times: Vec<f64>,
    /// Original time at the samples; differs from `times` only for
    /// the time-changed problem.
    pub clock: Vec<f64>,
    pub phi: Vec<f64>,
    pub profiles: Vec<Profile>,
    /// Full-resolution time map (every step).
    pub time_map: TimeMap,
}

impl Trajectory {
    pub fn last(&self) -> &Profile {
        self.profiles
            .last()
            .expect("trajectory always holds its initial state")
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub fn time_map(traj: &Trajectory) -> &[f64] {
    &traj.phi
}

pub fn invert_time_map(traj: &Trajectory, tau: f64) -> Result<f64> {
    traj.time_map.invert(tau)
}
