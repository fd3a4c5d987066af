//! Invariant regions `X_j^± = Y_j^± ∩ Z_j`: profiles between the `j`-arch
//! equilibria of the two local auxiliary problems that carry the `Z_j`
//! reflection symmetry.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibria::{nonlocal_positive_equilibrium, Sign};
use crate::error::{Error, Result};
use crate::evolution::{
    Diffusivity, EvolveOptions, Integrator, ProblemKind, ProblemSpec, StepPlan,
};
use crate::spatial::{reflect_from_fundamental, symmetry_defect, Grid, Profile, SymmetryClass};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionSpec {
    pub j: usize,
    pub sign: Sign,
    pub lambda: f64,
    pub b1: f64,
    pub b2: f64,
    pub lower: Profile,
    pub upper: Profile,
    pub symmetry: SymmetryClass,
}

impl RegionSpec {
    pub fn grid(&self) -> &Grid {
        self.lower.grid()
    }

    /// Largest distance of `u` outside the region: below `lower`, above
    /// `upper`, or off `Z_j`.
    pub fn exit_distance(&self, u: &Profile) -> Result<f64> {
        u.grid().ensure_same(self.grid())?;
        let box_exit = u
            .values()
            .iter()
            .zip(self.lower.values().iter().zip(self.upper.values()))
            .fold(0.0f64, |m, (&x, (&lo, &hi))| m.max(lo - x).max(x - hi));
        Ok(box_exit.max(symmetry_defect(u, self.symmetry)?))
    }

    /// `(lower + upper)/2`.
    pub fn midpoint(&self) -> Profile {
        self.lower
            .zip_with(&self.upper, |a, b| 0.5 * (a + b))
            .expect("envelopes share a grid")
    }

    /// The member of the region closest to zero on every arch. Equal to
    /// `lower` for `j = 1`; for `j ≥ 2` the nodewise envelopes are not in
    /// `Z_j` themselves and this is the symmetric profile that touches
    /// `lower` on the positive arches and `upper` on the negative ones.
    pub fn inner(&self) -> Profile {
        self.interpolate(|_| if self.sign == Sign::Plus { 0.0 } else { 1.0 })
    }

    /// The member of the region farthest from zero on every arch.
    pub fn outer(&self) -> Profile {
        self.interpolate(|_| if self.sign == Sign::Plus { 1.0 } else { 0.0 })
    }

    /// `lower + θ(x)·(upper − lower)` for `θ` with values in `[0, 1]`, taken
    /// on the first half-arch and continued by the `Z_j` reflections.
    pub fn interpolate(&self, theta: impl Fn(f64) -> f64) -> Profile {
        let grid = *self.grid();
        let vals: Vec<f64> = grid
            .nodes()
            .into_iter()
            .zip(self.lower.values().iter().zip(self.upper.values()))
            .map(|(x, (&lo, &hi))| {
                let t = theta(x).clamp(0.0, 1.0);
                let v = if t <= 0.5 {
                    lo + t * (hi - lo)
                } else {
                    hi - (1.0 - t) * (hi - lo)
                };
                v.clamp(lo, hi)
            })
            .collect();
        let u = Profile::from_vec_unchecked(grid, vals);
        reflect_from_fundamental(&u, self.symmetry).expect("grid checked at construction")
    }
}

/// Builds `X_j^sign` on `grid` from the `j`-arch equilibria of
/// `z″ + λz − (b₁/2)z³ = 0` and `v″ + (λ/2)v − b₂v³ = 0`.
pub fn region_spec(
    j: usize,
    sign: Sign,
    lambda: f64,
    b1: f64,
    b2: f64,
    grid: &Grid,
) -> Result<RegionSpec> {
    let symmetry = SymmetryClass::new(j)?;
    symmetry.check_grid(grid)?;
    if !(b1 > 0.0 && b1 <= b2 && b2.is_finite()) {
        return Err(Error::invalid(format!(
            "need 0 < b1 ≤ b2, got b1={b1}, b2={b2}"
        )));
    }
    let threshold = 2.0 * (j as f64 * std::f64::consts::PI / grid.length()).powi(2);
    if !(lambda > threshold) {
        return Err(Error::Threshold(format!(
            "region X_{j} needs lambda > 2j² = {threshold}, got {lambda}"
        )));
    }
    let unit = Diffusivity::constant(1.0);
    let phi_b1 = nonlocal_positive_equilibrium(lambda, 0.5 * b1, &unit, j, grid)?.profile;
    let phi_b2 = nonlocal_positive_equilibrium(0.5 * lambda, b2, &unit, j, grid)?.profile;
    let phi_b1 = reflect_from_fundamental(&phi_b1, symmetry)?;
    let phi_b2 = reflect_from_fundamental(&phi_b2, symmetry)?;
    let s = sign.factor();
    let lower = phi_b1.zip_with(&phi_b2, |a, b| (s * a).min(s * b))?;
    let upper = phi_b1.zip_with(&phi_b2, |a, b| (s * a).max(s * b))?;
    Ok(RegionSpec {
        j,
        sign,
        lambda,
        b1,
        b2,
        lower,
        upper,
        symmetry,
    })
}

pub fn in_region(u: &Profile, spec: &RegionSpec, tol: f64) -> Result<bool> {
    Ok(spec.exit_distance(u)? <= tol)
}

/// `count` profiles `lower + θ·(upper − lower)` with `θ` a random smooth
/// field in `[0, 1]` built from `cos(2mjx)`, `m = 1..4`.
pub fn sample_region(spec: &RegionSpec, seed: u64, count: usize) -> Vec<Profile> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = 2.0 * spec.j as f64 * std::f64::consts::PI / spec.grid().length();
    (0..count)
        .map(|_| {
            let centre: f64 = rng.gen_range(0.0..1.0);
            let room = centre.min(1.0 - centre);
            let raw: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let total: f64 = raw.iter().map(|c: &f64| c.abs()).sum::<f64>().max(1e-300);
            let coeffs: Vec<f64> = raw.iter().map(|c| c * room / total).collect();
            spec.interpolate(|x| {
                centre
                    + coeffs
                        .iter()
                        .enumerate()
                        .map(|(m, c)| c * ((m + 1) as f64 * w * x).cos())
                        .sum::<f64>()
            })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub samples: usize,
    pub horizon: f64,
    /// Largest [`RegionSpec::exit_distance`] over samples, steps and nodes.
    pub max_exit_distance: f64,
    /// Largest `|u(kL/j)|`, `k = 1..j−1`.
    pub max_pinned_zero: f64,
    /// Largest amount by which a node takes the wrong sign for its arch.
    pub max_sign_violation: f64,
}

/// Evolves `samples` random members of the region under the non-local
/// problem (with the `Z_j` mask) from `t = 0` to `horizon` and records how
/// far the trajectories leave it.
pub fn invariance_test(
    spec: &RegionSpec,
    problem: &ProblemSpec,
    horizon: f64,
    samples: usize,
    seed: u64,
    opts: &EvolveOptions,
) -> Result<InvarianceReport> {
    let starts = sample_region(spec, seed, samples);
    invariance_from(spec, problem, horizon, &starts, opts)
}

/// As [`invariance_test`] for given starting profiles.
pub fn invariance_from(
    spec: &RegionSpec,
    problem: &ProblemSpec,
    horizon: f64,
    starts: &[Profile],
    opts: &EvolveOptions,
) -> Result<InvarianceReport> {
    check_problem_fits(spec, problem)?;
    let grid = *spec.grid();
    let np1 = grid.n() + 1;
    let arch = np1 / spec.j;
    let pins: Vec<usize> = (1..spec.j).map(|k| k * arch - 1).collect();
    let sign = spec.sign.factor();
    let arch_sign: Vec<f64> = (0..grid.n())
        .map(|i| {
            if ((i + 1) / arch) % 2 == 0 {
                sign
            } else {
                -sign
            }
        })
        .collect();

    let per_start = starts
        .par_iter()
        .map(|u0| {
            let mut it = Integrator::new(u0, 0.0, problem, Some(spec.symmetry))?;
            let plan = StepPlan::new(0.0, horizon, opts.dt)?;
            let (mut exit, mut pin, mut wrong) = (0.0f64, 0.0f64, 0.0f64);
            for k in 0..=plan.steps {
                if k > 0 {
                    it.advance_to(plan.time(k))?;
                }
                let st = it.state();
                let u = Profile::from_vec_unchecked(grid, st.values.to_vec());
                exit = exit.max(spec.exit_distance(&u)?);
                for &p in &pins {
                    pin = pin.max(st.values[p].abs());
                }
                for (v, s) in st.values.iter().zip(&arch_sign) {
                    wrong = wrong.max(-v * s);
                }
            }
            Ok((exit, pin, wrong))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InvarianceReport {
        samples: starts.len(),
        horizon,
        max_exit_distance: per_start.iter().fold(0.0, |m, r| m.max(r.0)),
        max_pinned_zero: per_start.iter().fold(0.0, |m, r| m.max(r.1)),
        max_sign_violation: per_start.iter().fold(0.0, |m, r| m.max(r.2)),
    })
}

pub(crate) fn check_problem_fits(spec: &RegionSpec, problem: &ProblemSpec) -> Result<()> {
    if !matches!(
        problem.kind,
        ProblemKind::Nonlocal | ProblemKind::AutonomousNonlocal
    ) {
        return Err(Error::invalid("region runs use the non-local problem"));
    }
    if (problem.lambda - spec.lambda).abs() > 1e-12 * spec.lambda {
        return Err(Error::invalid(format!(
            "problem lambda {} differs from the region's {}",
            problem.lambda, spec.lambda
        )));
    }
    let (lo, hi) = problem.beta.bounds();
    if lo < spec.b1 - 1e-12 || hi > spec.b2 + 1e-12 {
        return Err(Error::invalid(format!(
            "beta range [{lo}, {hi}] is not inside [{}, {}]",
            spec.b1, spec.b2
        )));
    }
    Ok(())
}
