use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::coefficients::{Beta, Diffusivity};
use super::trajectory::TimeMap;
use crate::error::{Error, Result};

/// Which evolution equation a run integrates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    /// `u_t − a(‖u_x‖²)u_xx = λu − β(t)u³`
    Nonlocal,
    /// `w_t = w_xx + (λw − β(φ⁻¹(t))w³) / a(‖w_x‖²)`
    TimeChanged,
    /// `z_t = z_xx + λz − (b₁/2)z³`, the semigroup `T₁`
    LocalUpper,
    /// `v_t = v_xx + (λ/2)v − b₂v³`, the semigroup `T₂`
    LocalLower,
    /// `u_t = a(‖u_x‖²)u_xx + λu − bu³`, the semigroup `T_b`
    AutonomousNonlocal,
}

impl ProblemKind {
    /// Whether the diffusion coefficient is `a(‖u_x‖²)` rather than 1.
    pub fn has_kirchhoff_diffusion(self) -> bool {
        matches!(
            self,
            ProblemKind::Nonlocal | ProblemKind::AutonomousNonlocal
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub lambda: f64,
    pub diffusivity: Diffusivity,
    pub beta: Beta,
    /// Time map of a reference run; when present a `TimeChanged` problem
    /// evaluates `β(φ⁻¹(τ))` through it instead of its own clock.
    #[serde(skip)]
    pub reference: Option<Arc<TimeMap>>,
}

impl ProblemSpec {
    fn build(kind: ProblemKind, lambda: f64, diffusivity: Diffusivity, beta: Beta) -> Result<Self> {
        let p = Self {
            kind,
            lambda,
            diffusivity,
            beta,
            reference: None,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn nonlocal(lambda: f64, a: Diffusivity, beta: Beta) -> Result<Self> {
        Self::build(ProblemKind::Nonlocal, lambda, a, beta)
    }

    pub fn time_changed(lambda: f64, a: Diffusivity, beta: Beta) -> Result<Self> {
        Self::build(ProblemKind::TimeChanged, lambda, a, beta)
    }

    pub fn autonomous(lambda: f64, a: Diffusivity, b: f64) -> Result<Self> {
        Self::build(
            ProblemKind::AutonomousNonlocal,
            lambda,
            a,
            Beta::constant(b),
        )
    }

    /// `T₁`: parameters `(λ, b₁)`, integrates `λz − (b₁/2)z³` with `a ≡ 1`.
    pub fn local_upper(lambda: f64, b1: f64) -> Result<Self> {
        Self::build(
            ProblemKind::LocalUpper,
            lambda,
            Diffusivity::constant(1.0),
            Beta::constant(b1),
        )
    }

    /// `T₂`: parameters `(λ, b₂)`, integrates `(λ/2)v − b₂v³` with `a ≡ 1`.
    pub fn local_lower(lambda: f64, b2: f64) -> Result<Self> {
        Self::build(
            ProblemKind::LocalLower,
            lambda,
            Diffusivity::constant(1.0),
            Beta::constant(b2),
        )
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::invalid(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        self.diffusivity.validate()?;
        self.beta.validate()?;
        match self.kind {
            ProblemKind::LocalUpper | ProblemKind::LocalLower => {
                if !matches!(self.diffusivity, Diffusivity::Constant { c } if c == 1.0) {
                    return Err(Error::invalid("local auxiliary problems use a ≡ 1"));
                }
            }
            ProblemKind::AutonomousNonlocal if !self.beta.is_constant() => {
                return Err(Error::invalid(
                    "the autonomous problem needs a constant beta",
                ));
            }
            _ => {}
        }
        Ok(())
    }

    pub fn with_reference(mut self, map: Arc<TimeMap>) -> Self {
        self.reference = Some(map);
        self
    }

    /// The same equation written in the changed time variable.
    pub fn to_time_changed(&self) -> Self {
        Self {
            kind: ProblemKind::TimeChanged,
            lambda: self.lambda,
            diffusivity: self.diffusivity.clone(),
            beta: self.beta.clone(),
            reference: None,
        }
    }

    /// `T₁` for this problem's `(λ, b₁)`.
    pub fn upper_auxiliary(&self) -> Result<Self> {
        Self::local_upper(self.lambda, self.beta.bounds().0)
    }

    /// `T₂` for this problem's `(λ, b₂)`.
    pub fn lower_auxiliary(&self) -> Result<Self> {
        Self::local_lower(self.lambda, self.beta.bounds().1)
    }

    /// Reaction `f(u) = lin·u − cub·u³` frozen for one step, given the
    /// original-time clock and the current `a(‖u_x‖²)`.
    pub(crate) fn reaction_coefficients(&self, clock: f64, a_now: f64) -> (f64, f64) {
        let lambda = self.lambda;
        match self.kind {
            ProblemKind::Nonlocal => (lambda, self.beta.eval(clock)),
            ProblemKind::AutonomousNonlocal => (lambda, self.beta.eval(0.0)),
            ProblemKind::LocalUpper => (lambda, 0.5 * self.beta.eval(0.0)),
            ProblemKind::LocalLower => (0.5 * lambda, self.beta.eval(0.0)),
            ProblemKind::TimeChanged => (lambda / a_now, self.beta.eval(clock) / a_now),
        }
    }

    pub(crate) fn diffusion_coefficient(&self, a_now: f64) -> f64 {
        if self.kind.has_kirchhoff_diffusion() {
            a_now
        } else {
            1.0
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn local_kinds_force_unit_diffusion() {
        let mut p = ProblemSpec::local_upper(3.0, 1.0).unwrap();
        assert_eq!(p.reaction_coefficients(0.0, 1.0), (3.0, 0.5));
        p.diffusivity = Diffusivity::Saturating;
        assert!(p.validate().is_err());
        let p = ProblemSpec::local_lower(3.0, 2.0).unwrap();
        assert_eq!(p.reaction_coefficients(0.0, 1.0), (1.5, 2.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ProblemSpec::local_upper(-1.0, 1.0).is_err());
        assert!(ProblemSpec::autonomous(1.0, Diffusivity::Saturating, 0.0).is_err());
        let mut p = ProblemSpec::autonomous(1.0, Diffusivity::Saturating, 1.0).unwrap();
        p.beta = Beta::sinusoidal(1.0, 2.0);
        assert!(p.validate().is_err());
    }

    #[test]
    fn auxiliaries_take_beta_bounds() {
        let p =
            ProblemSpec::nonlocal(5.0, Diffusivity::Rational, Beta::sinusoidal(1.0, 3.0)).unwrap();
        let up = p.upper_auxiliary().unwrap();
        let lo = p.lower_auxiliary().unwrap();
        assert_eq!(up.reaction_coefficients(0.0, 1.0), (5.0, 0.5));
        assert_eq!(lo.reaction_coefficients(0.0, 1.0), (2.5, 3.0));
    }
}
