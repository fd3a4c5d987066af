//! Dirichlet grids on `(0, L)`, grid profiles and the operations the rest of
//! the crate builds on: sine transforms, the H¹₀ seminorm, the nodal partial
//! order, the `Z_j` reflection classes and zero counting.

mod symmetry;
pub(crate) mod transform;
mod zeros;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use symmetry::{reflect_from_fundamental, symmetry_defect, symmetry_project, SymmetryClass};
pub(crate) use transform::SineTransform;
pub use zeros::{default_dead_band, zero_crossings, ZeroSet};

/// Uniform grid of `n` interior nodes `x_i = iL/(n+1)`, `i = 1..=n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct Grid {
    n: usize,
    length: f64,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    n: usize,
    length: f64,
}

impl TryFrom<GridRepr> for Grid {
    type Error = Error;
    fn try_from(r: GridRepr) -> Result<Self> {
        Grid::new(r.n, r.length)
    }
}

impl From<Grid> for GridRepr {
    fn from(g: Grid) -> Self {
        GridRepr {
            n: g.n,
            length: g.length,
        }
    }
}

impl Grid {
    pub fn new(n: usize, length: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::invalid(format!(
                "grid needs at least 3 interior nodes, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::invalid(format!(
                "interval length must be positive, got {length}"
            )));
        }
        Ok(Self { n, length })
    }

    /// `n` interior nodes on `(0, π)`.
    pub fn on_pi(n: usize) -> Result<Self> {
        Self::new(n, PI)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / (self.n as f64 + 1.0)
    }

    /// Position of interior node `i` (zero-based, so `node(0) = h`).
    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 1.0) * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }

    /// `kπ/L` for the one-based mode index `k`.
    pub fn wavenumber(&self, k: usize) -> f64 {
        k as f64 * PI / self.length
    }

    /// Eigenvalues `(kπ/L)²` of `−d²/dx²` for modes `1..=n`.
    pub fn laplacian_symbol(&self) -> Vec<f64> {
        (1..=self.n).map(|k| self.wavenumber(k).powi(2)).collect()
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self.n != other.n || (self.length - other.length).abs() > 1e-14 * self.length {
            return Err(Error::GridMismatch(format!(
                "(n={}, L={}) vs (n={}, L={})",
                self.n, self.length, other.n, other.length
            )));
        }
        Ok(())
    }
}

pub fn make_grid(n: usize, length: f64) -> Result<Grid> {
    Grid::new(n, length)
}

/// Interior nodal values of a function vanishing at both ends of the grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    grid: Grid,
    values: Vec<f64>,
}

impl Profile {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.n()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("non-finite value at node {i}")));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_vec_unchecked(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Discrete `L²(0,L)` norm; the trapezoid rule with zero end values.
    pub fn l2_norm(&self) -> f64 {
        (self.grid.spacing() * self.values.iter().map(|v| v * v).sum::<f64>()).sqrt()
    }

    pub fn modes(&self) -> Vec<f64> {
        sine_transform(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    pub fn zip_with(&self, other: &Profile, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn sup_distance(&self, other: &Profile) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs())))
    }
}

pub fn sine_transform(u: &Profile) -> Vec<f64> {
    SineTransform::new(u.grid.n()).forward(&u.values)
}

pub fn inverse_sine_transform(modes: &[f64], grid: &Grid) -> Result<Profile> {
    if modes.len() != grid.n() {
        return Err(Error::GridMismatch(format!(
            "{} modes for a grid of {} nodes",
            modes.len(),
            grid.n()
        )));
    }
    let values = SineTransform::new(grid.n()).inverse(modes);
    Profile::new(*grid, values)
}

/// `‖u_x‖² = Σ_k (kπ/L)² û_k² · L/2`, computed from the sine coefficients.
pub fn h10_norm_sq(u: &Profile) -> f64 {
    h10_from_modes(&u.grid, &u.modes())
}

pub(crate) fn h10_from_modes(grid: &Grid, modes: &[f64]) -> f64 {
    let half_len = 0.5 * grid.length();
    modes
        .iter()
        .enumerate()
        .map(|(i, m)| grid.wavenumber(i + 1).powi(2) * m * m)
        .sum::<f64>()
        * half_len
}

/// Result of a nodal order comparison `u ≤ v`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderCheck {
    pub holds: bool,
    /// `max_i (u_i − v_i, 0)`.
    pub max_violation: f64,
}

pub fn partial_order_leq(u: &Profile, v: &Profile, tol: f64) -> Result<OrderCheck> {
    u.grid.ensure_same(&v.grid)?;
    let mut holds = true;
    let mut max_violation = 0.0_f64;
    for (&a, &b) in u.values.iter().zip(&v.values) {
        if a > b + tol {
            holds = false;
        }
        max_violation = max_violation.max(a - b);
    }
    Ok(OrderCheck {
        holds,
        max_violation,
    })
}

/// Every slice dominates `floor` nodewise (within 1e-10).
pub fn nondegeneracy_check(slices: &[Profile], floor: &Profile) -> Result<bool> {
    let mut ok = true;
    for s in slices {
        ok &= partial_order_leq(floor, s, 1e-10)?.holds;
    }
    Ok(ok)
}
