use serde::{Deserialize, Serialize};

use super::{Grid, Profile, SineTransform};
use crate::error::{Error, Result};

/// The reflection class `Z_j`: even about the arch centres `(2k−1)π/(2j)`,
/// odd about the arch ends `kπ/j`. Its members are spanned by `sin(mjx)`
/// with `m` odd.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryClass {
    pub j: usize,
}

impl SymmetryClass {
    pub fn new(j: usize) -> Result<Self> {
        if j == 0 {
            return Err(Error::invalid("symmetry class index j must be ≥ 1"));
        }
        Ok(Self { j })
    }

    /// Reflection centres must fall on nodes: `2j | n+1`, and each arch needs
    /// a handful of nodes: `j ≤ n/4`.
    pub fn check_grid(&self, grid: &Grid) -> Result<()> {
        let n = grid.n();
        if 4 * self.j > n {
            return Err(Error::invalid(format!(
                "Z_{} needs at least {} nodes, grid has {n}",
                self.j,
                4 * self.j
            )));
        }
        if (n + 1) % (2 * self.j) != 0 {
            return Err(Error::invalid(format!(
                "n+1 = {} is not divisible by 2j = {}",
                n + 1,
                2 * self.j
            )));
        }
        Ok(())
    }

    /// Whether sine mode `k` (one-based) belongs to `Z_j`.
    pub fn keeps_mode(&self, k: usize) -> bool {
        k % self.j == 0 && (k / self.j) % 2 == 1
    }

    pub(crate) fn mode_mask(&self, n: usize) -> Vec<f64> {
        (1..=n)
            .map(|k| if self.keeps_mode(k) { 1.0 } else { 0.0 })
            .collect()
    }

    /// Fundamental-domain representative of position index `p ∈ 0..=n+1`,
    /// returned as `(sign, index)` with index 0 meaning the boundary.
    fn fold(&self, p: usize, n_plus_1: usize) -> (f64, usize) {
        let m = n_plus_1 / self.j;
        let q = p / m;
        let r = p % m;
        let r = r.min(m - r);
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        (sign, r)
    }
}

/// Orthogonal projection onto `Z_j`: the average over the reflection group,
/// which in sine coefficients keeps exactly the odd multiples of `j`.
pub fn symmetry_project(u: &Profile, class: SymmetryClass) -> Result<Profile> {
    class.check_grid(u.grid())?;
    let n = u.grid().n();
    let mut t = SineTransform::new(n);
    let mut buf = u.values().to_vec();
    t.forward_in_place(&mut buf);
    for (k, v) in buf.iter_mut().enumerate() {
        if !class.keeps_mode(k + 1) {
            *v = 0.0;
        }
    }
    t.inverse_in_place(&mut buf);
    Ok(Profile::from_vec_unchecked(*u.grid(), buf))
}

/// Largest nodal discrepancy between `u` and its images under the `Z_j`
/// reflections. Zero exactly when `u` is built by reflection.
pub fn symmetry_defect(u: &Profile, class: SymmetryClass) -> Result<f64> {
    class.check_grid(u.grid())?;
    let v = u.values();
    let np1 = v.len() + 1;
    let mut worst = 0.0_f64;
    for (i, &x) in v.iter().enumerate() {
        let (sign, r) = class.fold(i + 1, np1);
        let rep = if r == 0 { 0.0 } else { sign * v[r - 1] };
        worst = worst.max((x - rep).abs());
    }
    Ok(worst)
}

/// Rebuild `u` from its values on the first half-arch `(0, π/(2j)]` so that
/// it lies in `Z_j` exactly, node for node.
pub fn reflect_from_fundamental(u: &Profile, class: SymmetryClass) -> Result<Profile> {
    class.check_grid(u.grid())?;
    let v = u.values();
    let np1 = v.len() + 1;
    let out = (0..v.len())
        .map(|i| {
            let (sign, r) = class.fold(i + 1, np1);
            if r == 0 {
                0.0
            } else {
                sign * v[r - 1]
            }
        })
        .collect();
    Ok(Profile::from_vec_unchecked(*u.grid(), out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    /// Nodal group average over the reflection group generating `Z_j`,
    /// acting on the odd `2(n+1)`-periodic extension. Elements are affine maps
    /// `p ↦ ε·p + c (mod 2(n+1))` with a sign; the closure is enumerated
    /// explicitly. Independent of the spectral filter.
    fn group_average(u: &[f64], j: usize) -> Vec<f64> {
        let np1 = (u.len() + 1) as i64;
        let period = 2 * np1;
        let m = np1 / j as i64;
        let ext = |p: i64| -> f64 {
            let p = p.rem_euclid(period);
            if p == 0 || p == np1 {
                0.0
            } else if p < np1 {
                u[p as usize - 1]
            } else {
                -u[(period - p) as usize - 1]
            }
        };
        // (ε, c, sign)
        let gens = [(-1_i64, 0_i64, -1.0_f64), (-1, m, 1.0), (-1, 2 * m, -1.0)];
        let mut group = vec![(1_i64, 0_i64, 1.0_f64)];
        let mut k = 0;
        while k < group.len() {
            let (e1, c1, s1) = group[k];
            for &(e2, c2, s2) in &gens {
                // g2 ∘ g1: p ↦ e2(e1 p + c1) + c2
                let g = (e2 * e1, (e2 * c1 + c2).rem_euclid(period), s1 * s2);
                if !group.iter().any(|h| h.0 == g.0 && h.1 == g.1 && h.2 == g.2) {
                    group.push(g);
                }
            }
            k += 1;
        }
        (1..np1)
            .map(|p| {
                group
                    .iter()
                    .map(|&(e, c, s)| s * ext(e * p + c))
                    .sum::<f64>()
                    / group.len() as f64
            })
            .collect()
    }

    #[test]
    fn sin_jx_is_fixed() {
        for j in [1, 2, 4] {
            let g = Grid::on_pi(255).unwrap();
            let u = Profile::from_fn(g, |x| (j as f64 * x).sin());
            let p = symmetry_project(&u, SymmetryClass::new(j).unwrap()).unwrap();
            assert!(p.sup_distance(&u).unwrap() < 1e-12);
            assert!(symmetry_defect(&u, SymmetryClass::new(j).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn sin_x_projects_to_zero_for_j2() {
        let g = Grid::on_pi(255).unwrap();
        let u = Profile::from_fn(g, f64::sin);
        let p = symmetry_project(&u, SymmetryClass::new(2).unwrap()).unwrap();
        let oracle = group_average(u.values(), 2);
        assert!(oracle.iter().all(|v| v.abs() < 1e-10));
        assert!(p.sup_norm() < 1e-12);
    }

    #[test]
    fn projection_agrees_with_group_average() {
        let g = Grid::on_pi(47).unwrap();
        let u = Profile::from_fn(g, |x| {
            x * (PI - x) * (1.0 + (5.0 * x).cos()) + (2.0 * x).sin()
        });
        for j in [1, 2, 3] {
            let p = symmetry_project(&u, SymmetryClass::new(j).unwrap()).unwrap();
            let oracle = group_average(u.values(), j);
            for (a, b) in p.values().iter().zip(&oracle) {
                assert!((a - b).abs() < 1e-10, "j={j}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn rejects_incompatible_resolution() {
        let g = Grid::on_pi(255).unwrap();
        let u = Profile::zeros(g);
        assert!(symmetry_project(&u, SymmetryClass::new(3).unwrap()).is_err());
        let g = Grid::on_pi(7).unwrap();
        assert!(symmetry_project(&Profile::zeros(g), SymmetryClass::new(4).unwrap()).is_err());
    }

    #[test]
    fn reflection_is_exact_and_in_class() {
        let g = Grid::on_pi(95).unwrap();
        let u = Profile::from_fn(g, |x| (x * 1.3).sin().powi(2) + 0.1 * x);
        let c = SymmetryClass::new(3).unwrap();
        let r = reflect_from_fundamental(&u, c).unwrap();
        assert_eq!(symmetry_defect(&r, c).unwrap(), 0.0);
        let p = symmetry_project(&r, c).unwrap();
        assert!(p.sup_distance(&r).unwrap() < 1e-12);
    }
}
