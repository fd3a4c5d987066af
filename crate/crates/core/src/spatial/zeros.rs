use serde::{Deserialize, Serialize};

use super::Profile;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "zeros", rename_all = "snake_case")]
pub enum ZeroSet {
    /// `‖u‖_∞ < δ`: no sign structure to report.
    IdenticallySmall,
    /// Sorted locations in `[0, L]`, always including both end points.
    Zeros(Vec<f64>),
}

impl ZeroSet {
    pub fn locations(&self) -> Option<&[f64]> {
        match self {
            ZeroSet::IdenticallySmall => None,
            ZeroSet::Zeros(z) => Some(z),
        }
    }
}

pub fn default_dead_band(u: &Profile) -> f64 {
    1e-6 * u.sup_norm()
}

/// Zeros of `u`: the two end points plus every interior sign change whose
/// flanks exceed the dead band `δ` in magnitude. Each crossing is placed by
/// linear interpolation between the nodes that bracket it.
pub fn zero_crossings(u: &Profile, delta: f64) -> ZeroSet {
    let delta = delta.abs();
    if u.sup_norm() < delta || u.sup_norm() == 0.0 {
        return ZeroSet::IdenticallySmall;
    }
    let grid = u.grid();
    let v = u.values();
    let h = grid.spacing();
    let mut zeros = vec![0.0];
    let mut last: Option<usize> = None;
    for (i, &x) in v.iter().enumerate() {
        if x.abs() <= delta {
            continue;
        }
        if let Some(prev) = last {
            if v[prev].signum() != x.signum() {
                let sign = v[prev].signum();
                // first node after `prev` that leaves the sign of `prev`
                let p = (prev..i)
                    .find(|&p| v[p + 1].signum() != sign || v[p + 1] == 0.0)
                    .unwrap_or(i - 1);
                let (a, b) = (v[p], v[p + 1]);
                let frac = if a == b { 0.5 } else { a / (a - b) };
                zeros.push(grid.node(p) + frac.clamp(0.0, 1.0) * h);
            }
        }
        last = Some(i);
    }
    zeros.push(grid.length());
    ZeroSet::Zeros(zeros)
}
