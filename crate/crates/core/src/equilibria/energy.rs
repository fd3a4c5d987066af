//! Energy of the non-local elliptic problem on one arch and its constrained
//! minimisation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Diffusivity;
use crate::spatial::{h10_from_modes, Grid, Profile, SineTransform};

pub const MAX_ITERATIONS: usize = 100_000;
pub const GRADIENT_TOL: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;

fn check_arch_grid(grid: &Grid, j: usize) -> Result<()> {
    if j == 0 {
        return Err(Error::invalid("arch index j must be ≥ 1"));
    }
    let want = std::f64::consts::PI / j as f64;
    if (grid.length() - want).abs() > 1e-12 * want {
        return Err(Error::GridMismatch(format!(
            "energy for j = {j} lives on (0, π/{j}), grid length is {}",
            grid.length()
        )));
    }
    Ok(())
}

/// `½∫₀^{‖u_x‖²} a(s) ds + ∫(−λ/2·u² + b/4·u⁴) dx` over `(0, π/j)`; the
/// spatial integral is the trapezoid rule with zero end values.
pub fn energy(u: &Profile, j: usize, lambda: f64, b: f64, a: &Diffusivity) -> Result<f64> {
    check_arch_grid(u.grid(), j)?;
    let n = u.grid().n();
    let modes = SineTransform::new(n).forward(u.values());
    Ok(energy_parts(u.grid(), u.values(), &modes, lambda, b, a))
}

fn energy_parts(
    grid: &Grid,
    values: &[f64],
    modes: &[f64],
    lambda: f64,
    b: f64,
    a: &Diffusivity,
) -> f64 {
    let h10 = h10_from_modes(grid, modes);
    let potential: f64 = values
        .iter()
        .map(|&u| {
            let u2 = u * u;
            -0.5 * lambda * u2 + 0.25 * b * u2 * u2
        })
        .sum();
    0.5 * a.integral(h10) + grid.spacing() * potential
}

/// The admissible set: `0 ≤ v ≤ √(λ/b)` on `(0, π/j)`, even about `π/(2j)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub j: usize,
    pub ceiling: f64,
}

impl ConstraintSet {
    pub fn new(j: usize, lambda: f64, b: f64) -> Result<Self> {
        if j == 0 {
            return Err(Error::invalid("arch index j must be ≥ 1"));
        }
        let ceiling = (lambda / b).sqrt();
        if !(ceiling > 0.0 && ceiling.is_finite()) {
            return Err(Error::invalid(format!(
                "box ceiling √(λ/b) must be positive, got λ={lambda}, b={b}"
            )));
        }
        Ok(Self { j, ceiling })
    }

    /// Clamp into the box, then average with the mirror image.
    pub fn project(&self, u: &Profile) -> Profile {
        let v = u.values();
        let n = v.len();
        let clamp = |x: f64| x.clamp(0.0, self.ceiling);
        let out = (0..n)
            .map(|i| 0.5 * (clamp(v[i]) + clamp(v[n - 1 - i])))
            .collect();
        Profile::from_vec_unchecked(*u.grid(), out)
    }

    pub fn contains(&self, u: &Profile, tol: f64) -> bool {
        let v = u.values();
        let n = v.len();
        v.iter()
            .enumerate()
            .all(|(i, &x)| x >= -tol && x <= self.ceiling + tol && (x - v[n - 1 - i]).abs() <= tol)
    }
}

#[derive(Debug, Clone)]
pub struct Minimizer {
    pub profile: Profile,
    pub energy: f64,
    /// `H¹₀` norm of the projected gradient step at termination.
    pub gradient_norm: f64,
    pub iterations: usize,
}

/// Projected gradient descent of [`energy`] over the [`ConstraintSet`].
///
/// The search direction is the gradient for the inner product
/// `a(‖u_x‖²)·∫u_x v_x`, i.e. `u + (−Δ)⁻¹(−λu + bu³)/a(‖u_x‖²)`; steps
/// backtrack from 1 by halves under the Armijo rule. Energy differences are
/// formed term by term so the test stays meaningful near convergence.
pub fn minimize_energy(
    lambda: f64,
    b: f64,
    a: &Diffusivity,
    j: usize,
    init: &Profile,
) -> Result<Minimizer> {
    let grid = *init.grid();
    check_arch_grid(&grid, j)?;
    a.validate()?;
    if !(b > 0.0) {
        return Err(Error::invalid(format!("b must be positive, got {b}")));
    }
    let threshold = a.at_zero() * (j * j) as f64;
    if !(lambda > threshold) {
        return Err(Error::Threshold(format!(
            "no nontrivial minimiser: lambda = {lambda} ≤ a(0)·j² = {threshold}"
        )));
    }
    let set = ConstraintSet::new(j, lambda, b)?;
    let n = grid.n();
    let h = grid.spacing();
    let kappa2 = grid.laplacian_symbol();
    let half_len = 0.5 * grid.length();
    let mut dst = SineTransform::new(n);

    let h1_dot = |x: &[f64], y: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .zip(&kappa2)
            .map(|((a, b), k)| a * b * k)
            .sum::<f64>()
            * half_len
    };
    // E(u + d) − E(u) without cancellation
    let energy_change = |u: &[f64], um: &[f64], d: &[f64], dm: &[f64], n0: f64| -> f64 {
        let dn = 2.0 * h1_dot(um, dm) + h1_dot(dm, dm);
        let pot: f64 = u
            .iter()
            .zip(d)
            .map(|(&x, &y)| {
                -0.5 * lambda * y * (2.0 * x + y)
                    + 0.25 * b * y * (4.0 * x * x * x + y * (6.0 * x * x + y * (4.0 * x + y)))
            })
            .sum();
        0.5 * a.integral_between(n0, n0 + dn) + h * pot
    };

    let mut u = set.project(init).into_values();
    let mut modes = dst.forward(&u);
    let mut grad_modes = vec![0.0; n];
    let mut last_norm = f64::INFINITY;

    for iter in 0..MAX_ITERATIONS {
        let n0 = h10_from_modes(&grid, &modes);
        let c = a.eval(n0);
        let f: Vec<f64> = u.iter().map(|&x| -lambda * x + b * x * x * x).collect();
        let f_modes = dst.forward(&f);
        for k in 0..n {
            grad_modes[k] = modes[k] + f_modes[k] / (c * kappa2[k]);
        }
        let grad = dst.inverse(&grad_modes);

        let step_at = |alpha: f64, dst: &mut SineTransform| -> (Vec<f64>, Vec<f64>) {
            let moved: Vec<f64> = u.iter().zip(&grad).map(|(x, g)| x - alpha * g).collect();
            let next = set
                .project(&Profile::from_vec_unchecked(grid, moved))
                .into_values();
            let d: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
            let dm = dst.forward(&d);
            (d, dm)
        };

        let (d_full, dm_full) = step_at(1.0, &mut dst);
        last_norm = h1_dot(&dm_full, &dm_full).sqrt();
        if last_norm <= GRADIENT_TOL {
            let e = energy_parts(&grid, &u, &modes, lambda, b, a);
            if e >= 0.0 {
                return Err(Error::NoConvergence {
                    what: "energy minimisation",
                    detail: format!("stationary point has E = {e:e} ≥ 0 (trivial)"),
                });
            }
            return Ok(Minimizer {
                profile: Profile::new(grid, u)?,
                energy: e,
                gradient_norm: last_norm,
                iterations: iter,
            });
        }

        let mut alpha = 1.0;
        let (mut d, mut dm) = (d_full, dm_full);
        loop {
            // E′(u)[d] = a(N)·⟨u, d⟩_{H¹} + ∫(−λu + bu³)d
            let slope =
                c * h1_dot(&modes, &dm) + h * f.iter().zip(&d).map(|(x, y)| x * y).sum::<f64>();
            let change = energy_change(&u, &modes, &d, &dm, n0);
            if change <= ARMIJO * slope {
                for (x, y) in u.iter_mut().zip(&d) {
                    *x += y;
                }
                for (x, y) in modes.iter_mut().zip(&dm) {
                    *x += y;
                }
                break;
            }
            alpha *= 0.5;
            if alpha < 1e-12 {
                return Err(Error::NoConvergence {
                    what: "energy minimisation",
                    detail: format!("line search stalled, projected gradient {last_norm:e}"),
                });
            }
            (d, dm) = step_at(alpha, &mut dst);
        }
    }
    Err(Error::NoConvergence {
        what: "energy minimisation",
        detail: format!("{MAX_ITERATIONS} iterations, projected gradient {last_norm:e}"),
    })
}
