//! Equilibria of the autonomous non-local problem
//! `a(‖u_x‖²)u″ + λu − bu³ = 0` on `(0, L)` with zero ends.
//!
//! A non-local equilibrium is a constant-diffusion equilibrium at the
//! self-consistent value `c* = a(‖u_x(c*)‖²)`. The `j`-arch branch is built
//! from one arch on `(0, L/j)` with cubic coefficient `b/j`, scaled by
//! `1/√j` and continued by odd reflections.

mod energy;
mod shooting;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use energy::{energy, minimize_energy, ConstraintSet, Minimizer, GRADIENT_TOL, MAX_ITERATIONS};
pub use shooting::{shoot, shoot_positive, Shot};

use crate::error::{Error, Result};
use crate::evolution::Diffusivity;
use crate::spatial::{h10_norm_sq, Grid, Profile, SineTransform};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn factor(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// The zero solution.
    Trivial,
    ShootingFixedPoint,
    EnergyMinimization,
    ReflectionConstruction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumRecord {
    pub profile: Profile,
    /// Number of arches; 0 for the zero solution.
    pub j: usize,
    pub sign: Sign,
    pub c_star: f64,
    pub h10_norm_sq: f64,
    pub residual: f64,
    pub method: Method,
    /// Number of self-consistent roots found for this `(j, sign)`; more
    /// than one is possible only for non-monotone `a`.
    pub multiplicity: usize,
}

impl EquilibriumRecord {
    pub fn amplitude(&self) -> f64 {
        self.profile.sup_norm()
    }

    pub fn negated(&self) -> Self {
        Self {
            profile: self.profile.scaled(-1.0),
            sign: match self.sign {
                Sign::Plus => Sign::Minus,
                Sign::Minus => Sign::Plus,
            },
            ..self.clone()
        }
    }
}

/// `‖a(‖u_x‖²)u″ + λu − bu³‖_{L²}` with `u″` taken spectrally.
pub fn residual_norm(u: &Profile, lambda: f64, b: f64, a: &Diffusivity) -> f64 {
    let grid = u.grid();
    let mut dst = SineTransform::new(grid.n());
    let mut modes = dst.forward(u.values());
    let c = a.eval(crate::spatial::h10_from_modes(grid, &modes));
    for (m, k2) in modes.iter_mut().zip(grid.laplacian_symbol()) {
        *m *= -k2;
    }
    let uxx = dst.inverse(&modes);
    let sum: f64 = u
        .values()
        .iter()
        .zip(&uxx)
        .map(|(&v, &d)| {
            let r = c * d + lambda * v - b * v * v * v;
            r * r
        })
        .sum();
    (grid.spacing() * sum).sqrt()
}

/// Scales a positive symmetric arch `v` on `(0, L/j)` by `1/√j` and extends
/// it to `target = (0, L)` by odd reflection about every `kL/j`. The copy is
/// nodal when the grids line up (`n_target + 1 = j(n_v + 1)`), otherwise it
/// goes through the sine series (mode `m` of the arch is mode `mj` on
/// `(0, L)`).
pub fn odd_reflect_scale(v: &Profile, j: usize, target: &Grid) -> Result<Profile> {
    if j == 0 {
        return Err(Error::invalid("arch index j must be ≥ 1"));
    }
    let arch = v.grid();
    let want = target.length() / j as f64;
    if (arch.length() - want).abs() > 1e-12 * want {
        return Err(Error::GridMismatch(format!(
            "arch length {} is not L/j = {want}",
            arch.length()
        )));
    }
    let vals = v.values();
    let sup = v.sup_norm();
    if vals.iter().any(|&x| x < -1e-12 * (1.0 + sup)) {
        return Err(Error::invalid("arch must be non-negative"));
    }
    let nv = vals.len();
    let asym = (0..nv).fold(0.0f64, |m, i| m.max((vals[i] - vals[nv - 1 - i]).abs()));
    if asym > 1e-8 * (1.0 + sup) {
        return Err(Error::invalid(format!(
            "arch is not symmetric about its centre (defect {asym:e})"
        )));
    }
    let scale = 1.0 / (j as f64).sqrt();
    if target.n() + 1 == j * (nv + 1) {
        let m = nv + 1;
        let out = (1..=target.n())
            .map(|p| {
                let (q, r) = (p / m, p % m);
                if r == 0 {
                    0.0
                } else if q % 2 == 0 {
                    scale * vals[r - 1]
                } else {
                    -scale * vals[r - 1]
                }
            })
            .collect();
        return Profile::new(*target, out);
    }
    let arch_modes = SineTransform::new(nv).forward(vals);
    let mut modes = vec![0.0; target.n()];
    for (m, &c) in arch_modes.iter().enumerate() {
        let k = (m + 1) * j;
        if k > target.n() {
            break;
        }
        modes[k - 1] = scale * c;
    }
    let out = SineTransform::new(target.n()).inverse(&modes);
    Profile::new(*target, out)
}

/// Grid for one arch of a `j`-arch profile on `target`: nodal-compatible
/// when possible, otherwise as fine as the target.
fn arch_grid(target: &Grid, j: usize) -> Result<Grid> {
    let length = target.length() / j as f64;
    let np1 = target.n() + 1;
    if np1 % j == 0 && np1 / j >= 4 {
        Grid::new(np1 / j - 1, length)
    } else {
        Grid::new(target.n(), length)
    }
}

/// First eigenvalue of `−d²/dx²` on one arch: `(jπ/L)²`.
fn arch_eigenvalue(target: &Grid, j: usize) -> f64 {
    (j as f64 * std::f64::consts::PI / target.length()).powi(2)
}

struct SelfConsistency<'a> {
    lambda: f64,
    b_arch: f64,
    a: &'a Diffusivity,
    grid: Grid,
    eig: f64,
}

impl SelfConsistency<'_> {
    fn arch(&self, c: f64) -> Result<Option<Profile>> {
        if self.lambda <= c * self.eig {
            return Ok(None);
        }
        shoot_positive(c, self.lambda, self.b_arch, &self.grid).map(Some)
    }

    fn g(&self, c: f64) -> Result<f64> {
        let n = match self.arch(c)? {
            Some(v) => h10_norm_sq(&v),
            None => 0.0,
        };
        Ok(self.a.eval(n) - c)
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, g_lo: f64) -> Result<f64> {
        if g_lo == 0.0 {
            return Ok(lo);
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-14 || mid <= lo || mid >= hi {
                break;
            }
            let gm = self.g(mid)?;
            if gm == 0.0 {
                return Ok(mid);
            }
            if (gm > 0.0) == (g_lo > 0.0) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// All roots of `g(c) = a(N(c)) − c` with a nontrivial arch.
    fn roots(&self) -> Result<Vec<f64>> {
        let lo = 1.0;
        let hi = 2.0f64.min(self.lambda / self.eig);
        let g_lo = self.g(lo)?;
        if self.a.is_monotone() {
            let g_hi = self.g(hi)?;
            if g_lo < 0.0 || g_hi > 0.0 {
                return Err(Error::Bracket { g_lo, g_hi });
            }
            return Ok(vec![self.bisect(lo, hi, g_lo)?]);
        }
        let steps = ((hi - lo) / 1e-3).ceil().max(1.0) as usize;
        let cs: Vec<f64> = (0..=steps)
            .map(|k| if k == steps { hi } else { lo + k as f64 * 1e-3 })
            .collect();
        let gs = cs.iter().map(|&c| self.g(c)).collect::<Result<Vec<_>>>()?;
        let mut roots = Vec::new();
        for k in 0..steps {
            let (c0, c1, g0, g1) = (cs[k], cs[k + 1], gs[k], gs[k + 1]);
            // the right end is trivial (N = 0 when c ≥ λ/eig); skip it
            if g1 == 0.0 && k + 1 < steps {
                roots.push(c1);
            } else if g0 != 0.0 && (g0 > 0.0) != (g1 > 0.0) {
                roots.push(self.bisect(c0, c1, g0)?);
            } else if k == 0 && g0 == 0.0 {
                roots.push(c0);
            }
        }
        if roots.is_empty() {
            return Err(Error::Bracket {
                g_lo,
                g_hi: *gs.last().unwrap_or(&0.0),
            });
        }
        Ok(roots)
    }
}

/// Every positive `j`-arch equilibrium on `grid`, one per self-consistent
/// root (exactly one when `a` is non-decreasing).
pub fn nonlocal_positive_equilibria(
    lambda: f64,
    b: f64,
    a: &Diffusivity,
    j: usize,
    grid: &Grid,
) -> Result<Vec<EquilibriumRecord>> {
    if j == 0 {
        return Err(Error::invalid("arch index j must be ≥ 1"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("b must be positive, got {b}")));
    }
    a.validate()?;
    let eig = arch_eigenvalue(grid, j);
    let threshold = a.at_zero() * eig;
    if !(lambda > threshold) {
        return Err(Error::Threshold(format!(
            "no {j}-arch equilibrium: lambda = {lambda} ≤ a(0)·(jπ/L)² = {threshold}"
        )));
    }
    let sc = SelfConsistency {
        lambda,
        b_arch: b / j as f64,
        a,
        grid: arch_grid(grid, j)?,
        eig,
    };
    let roots = sc.roots()?;
    let multiplicity = roots.len();
    roots
        .into_iter()
        .map(|c| {
            let v = sc.arch(c)?.ok_or_else(|| Error::NoConvergence {
                what: "self-consistency",
                detail: format!("root c = {c} has no positive arch"),
            })?;
            let u = odd_reflect_scale(&v, j, grid)?;
            Ok(EquilibriumRecord {
                h10_norm_sq: h10_norm_sq(&u),
                residual: residual_norm(&u, lambda, b, a),
                profile: u,
                j,
                sign: Sign::Plus,
                c_star: c,
                method: if j == 1 {
                    Method::ShootingFixedPoint
                } else {
                    Method::ReflectionConstruction
                },
                multiplicity,
            })
        })
        .collect()
}

/// The positive `j`-arch equilibrium (the smallest-`c*` one if several).
pub fn nonlocal_positive_equilibrium(
    lambda: f64,
    b: f64,
    a: &Diffusivity,
    j: usize,
    grid: &Grid,
) -> Result<EquilibriumRecord> {
    let mut all = nonlocal_positive_equilibria(lambda, b, a, j, grid)?;
    Ok(all.swap_remove(0))
}

fn zero_record(grid: &Grid, a: &Diffusivity) -> EquilibriumRecord {
    EquilibriumRecord {
        profile: Profile::zeros(*grid),
        j: 0,
        sign: Sign::Plus,
        c_star: a.at_zero(),
        h10_norm_sq: 0.0,
        residual: 0.0,
        method: Method::Trivial,
        multiplicity: 1,
    }
}

/// Zero plus `±` the `j`-arch equilibria for every `j` with
/// `a(0)(jπ/L)² < λ`, ordered by `j`, positive before negative.
pub fn equilibria_catalog(
    lambda: f64,
    b: f64,
    a: &Diffusivity,
    grid: &Grid,
) -> Result<Vec<EquilibriumRecord>> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    if !(b > 0.0 && b.is_finite()) {
        return Err(Error::invalid(format!("b must be positive, got {b}")));
    }
    a.validate()?;
    let a0 = a.at_zero();
    let mut js = Vec::new();
    let mut j = 1;
    while lambda > a0 * arch_eigenvalue(grid, j) {
        if 4 * j > grid.n() {
            return Err(Error::invalid(format!(
                "grid of {} nodes cannot resolve {j} arches",
                grid.n()
            )));
        }
        js.push(j);
        j += 1;
    }
    let branches = js
        .par_iter()
        .map(|&j| nonlocal_positive_equilibria(lambda, b, a, j, grid))
        .collect::<Result<Vec<_>>>()?;
    let mut out = vec![zero_record(grid, a)];
    for branch in branches {
        for rec in branch {
            let neg = rec.negated();
            out.push(rec);
            out.push(neg);
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BranchSummary {
    pub j: usize,
    pub h10_norm_sq: f64,
    pub c_star: f64,
    pub residual: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda: f64,
    pub count: usize,
    /// Positive branches only; each stands for a `±` pair.
    pub branches: Vec<BranchSummary>,
    pub error: Option<String>,
}

/// The catalog at every `λ`; a failing `λ` is recorded and the sweep goes on.
pub fn bifurcation_sweep(
    lambdas: &[f64],
    b: f64,
    a: &Diffusivity,
    grid: &Grid,
) -> Result<Vec<SweepRow>> {
    if lambdas.is_empty() {
        return Err(Error::invalid("empty lambda list"));
    }
    if lambdas.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::invalid("lambda values must be strictly increasing"));
    }
    Ok(lambdas
        .par_iter()
        .map(|&lambda| match equilibria_catalog(lambda, b, a, grid) {
            Ok(recs) => SweepRow {
                lambda,
                count: recs.len(),
                branches: recs
                    .iter()
                    .filter(|r| r.j > 0 && r.sign == Sign::Plus)
                    .map(|r| BranchSummary {
                        j: r.j,
                        h10_norm_sq: r.h10_norm_sq,
                        c_star: r.c_star,
                        residual: r.residual,
                        amplitude: r.amplitude(),
                    })
                    .collect(),
                error: None,
            },
            Err(e) => SweepRow {
                lambda,
                count: 0,
                branches: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect())
}
