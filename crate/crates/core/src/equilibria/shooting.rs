//! Positive solutions of `c·u″ + λu − bu³ = 0`, `u(0) = u(L) = 0`, by
//! shooting on the initial slope.

use crate::error::{Error, Result};
use crate::spatial::{Grid, Profile};

/// Largest RK4 substep; each grid cell is split into equal substeps no
/// longer than this.
const MAX_SUBSTEP: f64 = 1e-3;

/// A converged shot.
#[derive(Debug, Clone)]
pub struct Shot {
    pub profile: Profile,
    /// `u′(0)`.
    pub slope: f64,
    /// Largest change of `c·v²/2 + λu²/2 − bu⁴/4` along the final shot.
    pub energy_drift: f64,
    /// `max |u(x_i) − u(L − x_i)|` before symmetrisation.
    pub asymmetry: f64,
}

struct Ode {
    c: f64,
    lambda: f64,
    b: f64,
}

impl Ode {
    #[inline]
    fn accel(&self, u: f64) -> f64 {
        (-self.lambda * u + self.b * u * u * u) / self.c
    }

    #[inline]
    fn rk4(&self, u: f64, v: f64, h: f64) -> (f64, f64) {
        let k1u = v;
        let k1v = self.accel(u);
        let k2u = v + 0.5 * h * k1v;
        let k2v = self.accel(u + 0.5 * h * k1u);
        let k3u = v + 0.5 * h * k2v;
        let k3v = self.accel(u + 0.5 * h * k2u);
        let k4u = v + h * k3v;
        let k4v = self.accel(u + h * k3u);
        (
            u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
            v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
        )
    }

    fn energy(&self, u: f64, v: f64) -> f64 {
        0.5 * self.c * v * v + 0.5 * self.lambda * u * u - 0.25 * self.b * u.powi(4)
    }
}

enum Outcome {
    /// `u` reached zero at or before `L`: the slope is too small.
    ZeroInside,
    /// `u` stayed positive on `(0, L]` (or escaped upward): too large.
    Positive,
}

fn substeps(grid: &Grid) -> (usize, f64) {
    let h = grid.spacing();
    let m = (h / MAX_SUBSTEP).ceil().max(1.0) as usize;
    (m, h / m as f64)
}

fn classify(ode: &Ode, grid: &Grid, p: f64, escape: f64) -> Outcome {
    let (m, hs) = substeps(grid);
    let (mut u, mut v) = (0.0, p);
    for _ in 0..(grid.n() + 1) * m {
        (u, v) = ode.rk4(u, v, hs);
        if u <= 0.0 {
            return Outcome::ZeroInside;
        }
        if !(u < escape) {
            return Outcome::Positive;
        }
    }
    Outcome::Positive
}

/// Positive arch on `grid` solving `c·u″ + λu − bu³ = 0` with zero ends.
pub fn shoot_positive(c: f64, lambda: f64, b: f64, grid: &Grid) -> Result<Profile> {
    shoot(c, lambda, b, grid).map(|s| s.profile)
}

/// As [`shoot_positive`], with the slope and the energy drift of the final
/// integration.
pub fn shoot(c: f64, lambda: f64, b: f64, grid: &Grid) -> Result<Shot> {
    for (v, name) in [(c, "c"), (lambda, "lambda"), (b, "b")] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::invalid(format!("{name} must be positive, got {v}")));
        }
    }
    let first = c * (std::f64::consts::PI / grid.length()).powi(2);
    if lambda <= first {
        return Err(Error::Threshold(format!(
            "no positive solution: lambda = {lambda} ≤ c·(π/L)² = {first}"
        )));
    }
    let ode = Ode { c, lambda, b };
    let ceiling = (lambda / b).sqrt();
    let escape = 10.0 * ceiling;

    let mut hi = 2.0 * (lambda / c).sqrt() * ceiling;
    if matches!(classify(&ode, grid, hi, escape), Outcome::ZeroInside) {
        hi *= 2.0;
        if matches!(classify(&ode, grid, hi, escape), Outcome::ZeroInside) {
            return Err(Error::Bracket {
                g_lo: 0.0,
                g_hi: hi,
            });
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match classify(&ode, grid, mid, escape) {
            Outcome::ZeroInside => lo = mid,
            Outcome::Positive => hi = mid,
        }
    }
    let p = hi;

    let (m, hs) = substeps(grid);
    let (mut u, mut v) = (0.0, p);
    let e0 = ode.energy(u, v);
    let mut drift = 0.0f64;
    let mut values = Vec::with_capacity(grid.n());
    for _ in 0..grid.n() {
        for _ in 0..m {
            (u, v) = ode.rk4(u, v, hs);
            drift = drift.max((ode.energy(u, v) - e0).abs());
        }
        values.push(u);
    }
    // Average with the mirror image to strip the residual asymmetry of the
    // last bisection digit.
    let n = values.len();
    let asymmetry = (0..n).fold(0.0f64, |m, i| m.max((values[i] - values[n - 1 - i]).abs()));
    let sym: Vec<f64> = (0..n)
        .map(|i| 0.5 * (values[i] + values[n - 1 - i]))
        .collect();
    Ok(Shot {
        profile: Profile::new(*grid, sym)?,
        slope: p,
        energy_drift: drift,
        asymmetry,
    })
}
