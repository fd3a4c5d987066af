//! The Kirchhoff diffusivity `a(s)` and the cubic forcing coefficient `β(t)`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// User-supplied function with its declared properties.
#[derive(Clone)]
pub struct CustomFn {
    pub name: String,
    pub f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for CustomFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CustomFn({})", self.name)
    }
}

/// Diffusivity `a: ℝ⁺ → [1, 2]`, evaluated at `‖u_x‖²`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Diffusivity {
    Constant {
        c: f64,
    },
    /// `1 + min(1, s)`
    Saturating,
    /// `2 − 1/(1 + s)`
    Rational,
    /// Piecewise linear through `(s, a)` knots, constant outside them.
    Table {
        points: Vec<(f64, f64)>,
    },
    #[serde(skip)]
    Custom {
        func: CustomFn,
        monotone: bool,
    },
}

pub const DIFFUSIVITY_LO: f64 = 1.0;
pub const DIFFUSIVITY_HI: f64 = 2.0;

fn interpolate(points: &[(f64, f64)], x: f64) -> f64 {
    match points {
        [] => f64::NAN,
        [(_, y)] => *y,
        _ => {
            let first = points[0];
            let last = points[points.len() - 1];
            if x <= first.0 {
                return first.1;
            }
            if x >= last.0 {
                return last.1;
            }
            let i = points.partition_point(|p| p.0 <= x);
            let (x0, y0) = points[i - 1];
            let (x1, y1) = points[i];
            y0 + (y1 - y0) * (x - x0) / (x1 - x0)
        }
    }
}

fn check_knots(points: &[(f64, f64)], what: &str) -> Result<()> {
    if points.is_empty() {
        return Err(Error::invalid(format!(
            "{what} table needs at least one knot"
        )));
    }
    if points.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::invalid(format!("{what} table has non-finite knots")));
    }
    if points.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid(format!(
            "{what} table abscissae must be strictly increasing"
        )));
    }
    Ok(())
}

impl Diffusivity {
    pub fn constant(c: f64) -> Self {
        Diffusivity::Constant { c }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        monotone: bool,
    ) -> Self {
        Diffusivity::Custom {
            func: CustomFn {
                name: name.into(),
                f: Arc::new(f),
            },
            monotone,
        }
    }

    pub fn eval(&self, s: f64) -> f64 {
        match self {
            Diffusivity::Constant { c } => *c,
            Diffusivity::Saturating => 1.0 + s.clamp(0.0, 1.0),
            Diffusivity::Rational => 2.0 - 1.0 / (1.0 + s.max(0.0)),
            Diffusivity::Table { points } => interpolate(points, s),
            Diffusivity::Custom { func, .. } => (func.f)(s),
        }
    }

    pub fn at_zero(&self) -> f64 {
        self.eval(0.0)
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Diffusivity::Constant { .. })
    }

    /// Non-decreasing in `s`; declared for custom functions.
    pub fn is_monotone(&self) -> bool {
        match self {
            Diffusivity::Constant { .. } | Diffusivity::Saturating | Diffusivity::Rational => true,
            Diffusivity::Table { points } => points.windows(2).all(|w| w[1].1 >= w[0].1),
            Diffusivity::Custom { monotone, .. } => *monotone,
        }
    }

    /// Checks `1 ≤ a(s) ≤ 2` on a sample of `s ∈ [0, 10⁴]`. Local Lipschitz
    /// continuity is assumed, not checked.
    pub fn validate(&self) -> Result<()> {
        match self {
            Diffusivity::Constant { c } if !c.is_finite() => {
                return Err(Error::invalid("constant diffusivity must be finite"))
            }
            Diffusivity::Table { points } => check_knots(points, "diffusivity")?,
            _ => {}
        }
        let linear = (0..=1000).map(|i| i as f64 * 0.01);
        let geometric = (0..=400).map(|i| 10f64.powf(-6.0 + i as f64 * 0.025));
        for s in linear.chain(geometric) {
            let a = self.eval(s);
            if !(DIFFUSIVITY_LO - 1e-12..=DIFFUSIVITY_HI + 1e-12).contains(&a) {
                return Err(Error::invalid(format!(
                    "diffusivity a({s}) = {a} leaves [1, 2]"
                )));
            }
        }
        Ok(())
    }

    /// `∫₀^upper a(s) ds`.
    pub fn integral(&self, upper: f64) -> f64 {
        if upper <= 0.0 {
            return 0.0;
        }
        match self {
            Diffusivity::Constant { c } => c * upper,
            Diffusivity::Saturating => {
                if upper <= 1.0 {
                    upper + 0.5 * upper * upper
                } else {
                    1.5 + 2.0 * (upper - 1.0)
                }
            }
            _ => adaptive_simpson(&|s| self.eval(s), 0.0, upper, 1e-10),
        }
    }
}

impl Diffusivity {
    /// `∫_lo^hi a(s) ds` for `0 ≤ lo, hi`, accurate relative to `|hi − lo|`
    /// even when the two bounds are close.
    pub fn integral_between(&self, lo: f64, hi: f64) -> f64 {
        if hi < lo {
            return -self.integral_between(hi, lo);
        }
        let (lo, hi) = (lo.max(0.0), hi.max(0.0));
        let width = hi - lo;
        if width == 0.0 {
            return 0.0;
        }
        match self {
            Diffusivity::Constant { c } => c * width,
            Diffusivity::Saturating => {
                let below = (hi.min(1.0) - lo).max(0.0);
                let above = (hi - lo.max(1.0)).max(0.0);
                let mid = lo + 0.5 * below;
                width + below * mid + above
            }
            _ => adaptive_simpson(&|s| self.eval(s), lo, hi, 1e-12 * width),
        }
    }
}

impl FromStr for Diffusivity {
    type Err = Error;

    /// `constant:C`, `saturating`, `rational` or `table:S0=A0,S1=A1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let a = match name.trim() {
            "constant" => Diffusivity::Constant {
                c: parse_num(params, "constant diffusivity")?,
            },
            "saturating" => Diffusivity::Saturating,
            "rational" => Diffusivity::Rational,
            "table" => Diffusivity::Table {
                points: parse_table(params)?,
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown diffusivity `{other}` (constant:C | saturating | rational | table:S=A,...)"
                )))
            }
        };
        a.validate()?;
        Ok(a)
    }
}

/// Cubic coefficient `β: ℝ → [b₁, b₂]`. Every variant is defined on all of ℝ,
/// which pullback runs rely on.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Beta {
    Constant {
        b: f64,
    },
    /// `b₁ + (b₂ − b₁)(1 + sin ωt)/2`
    Sinusoidal {
        b1: f64,
        b2: f64,
        omega: f64,
    },
    /// Piecewise linear through `(t, β)` knots, constant outside them.
    Table {
        points: Vec<(f64, f64)>,
    },
    #[serde(skip)]
    Custom {
        func: CustomFn,
        b1: f64,
        b2: f64,
    },
}

impl Beta {
    pub fn constant(b: f64) -> Self {
        Beta::Constant { b }
    }

    pub fn sinusoidal(b1: f64, b2: f64) -> Self {
        Beta::Sinusoidal { b1, b2, omega: 1.0 }
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        b1: f64,
        b2: f64,
    ) -> Self {
        Beta::Custom {
            func: CustomFn {
                name: name.into(),
                f: Arc::new(f),
            },
            b1,
            b2,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Beta::Constant { b } => *b,
            Beta::Sinusoidal { b1, b2, omega } => b1 + (b2 - b1) * 0.5 * (1.0 + (omega * t).sin()),
            Beta::Table { points } => interpolate(points, t),
            Beta::Custom { func, .. } => (func.f)(t),
        }
    }

    /// Declared range `[b₁, b₂]`.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            Beta::Constant { b } => (*b, *b),
            Beta::Sinusoidal { b1, b2, .. } => (*b1, *b2),
            Beta::Table { points } => points
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    (lo.min(p.1), hi.max(p.1))
                }),
            Beta::Custom { b1, b2, .. } => (*b1, *b2),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Beta::Constant { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if let Beta::Table { points } = self {
            check_knots(points, "beta")?;
        }
        if let Beta::Sinusoidal { omega, .. } = self {
            if !omega.is_finite() {
                return Err(Error::invalid("beta frequency must be finite"));
            }
        }
        let (b1, b2) = self.bounds();
        if !(b1.is_finite() && b2.is_finite() && b1 > 0.0 && b1 <= b2) {
            return Err(Error::invalid(format!(
                "beta bounds must satisfy 0 < b1 ≤ b2, got [{b1}, {b2}]"
            )));
        }
        if let Beta::Custom { .. } = self {
            for i in 0..=2000 {
                let t = -100.0 + 0.1 * i as f64;
                let v = self.eval(t);
                if !(b1 - 1e-12..=b2 + 1e-12).contains(&v) {
                    return Err(Error::invalid(format!(
                        "beta({t}) = {v} leaves [{b1}, {b2}]"
                    )));
                }
            }
        }
        Ok(())
    }
}

impl FromStr for Beta {
    type Err = Error;

    /// `constant:B`, `sinusoidal:B1,B2[,OMEGA]` or `table:T0=B0,T1=B1,...`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, params) = s.split_once(':').unwrap_or((s, ""));
        let beta = match name.trim() {
            "constant" => Beta::Constant {
                b: parse_num(params, "constant beta")?,
            },
            "sinusoidal" => {
                let nums: Vec<f64> = params
                    .split(',')
                    .map(|p| parse_num(p, "sinusoidal beta"))
                    .collect::<Result<_>>()?;
                match nums[..] {
                    [b1, b2] => Beta::Sinusoidal { b1, b2, omega: 1.0 },
                    [b1, b2, omega] => Beta::Sinusoidal { b1, b2, omega },
                    _ => {
                        return Err(Error::invalid(
                            "sinusoidal beta takes B1,B2[,OMEGA]".to_string(),
                        ))
                    }
                }
            }
            "table" => Beta::Table {
                points: parse_table(params)?,
            },
            other => {
                return Err(Error::invalid(format!(
                    "unknown beta `{other}` (constant:B | sinusoidal:B1,B2[,OMEGA] | table:T=B,...)"
                )))
            }
        };
        beta.validate()?;
        Ok(beta)
    }
}

fn parse_num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::invalid(format!("{what}: cannot parse `{s}` as a number")))
}

fn parse_table(s: &str) -> Result<Vec<(f64, f64)>> {
    s.split(',')
        .map(|kv| {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("table entry `{kv}` is not X=Y")))?;
            Ok((parse_num(k, "table")?, parse_num(v, "table")?))
        })
        .collect()
}

/// Adaptive Simpson quadrature with Richardson correction.
pub(crate) fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, a, b);
    recurse(f, a, b, fa, fm, fb, whole, tol, 50)
}
