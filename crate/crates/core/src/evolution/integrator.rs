//! First-order IMEX stepping in sine-mode space.
//!
//! One step from `u` at time `t` with step `dt`:
//!
//! ```text
//! c   = a(‖u_x‖²)            (1 for the unit-diffusion kinds)
//! û⁺_k = [u + dt·f(t, u)]^_k / (1 + dt·c·(kπ/L)²)
//! ```
//!
//! The coefficient is frozen at the start of the step and the reaction is
//! explicit, so each step is one forward and one inverse sine transform.

use serde::{Deserialize, Serialize};

use super::problem::{ProblemKind, ProblemSpec};
use super::trajectory::{TimeMap, Trajectory};
use crate::error::{Error, Result};
use crate::spatial::{h10_from_modes, Grid, Profile, SineTransform, SymmetryClass};

/// Any node exceeding this magnitude aborts the run.
pub const BLOW_UP_LIMIT: f64 = 1e6;

pub const DEFAULT_DT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveOptions {
    pub dt: f64,
    /// Record every `sample_every`-th step (the final state is always kept).
    pub sample_every: usize,
    /// Keep the state in `Z_j` by discarding the other sine modes each step.
    pub symmetry: Option<SymmetryClass>,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            dt: DEFAULT_DT,
            sample_every: 1,
            symmetry: None,
        }
    }
}

impl EvolveOptions {
    pub fn with_dt(dt: f64) -> Self {
        Self {
            dt,
            ..Self::default()
        }
    }

    pub fn sampled(mut self, every: usize) -> Self {
        self.sample_every = every.max(1);
        self
    }

    pub fn symmetric(mut self, class: SymmetryClass) -> Self {
        self.symmetry = Some(class);
        self
    }
}

/// Read-only view of the integrator state handed to observers.
#[derive(Debug, Clone, Copy)]
pub struct StepState<'a> {
    pub step: usize,
    /// Integration variable (the changed time for `TimeChanged`).
    pub time: f64,
    /// Original time.
    pub clock: f64,
    /// `∫ c dt` since the start of the run.
    pub phi: f64,
    /// `a(‖u_x‖²)` at this state.
    pub kirchhoff: f64,
    pub values: &'a [f64],
    pub modes: &'a [f64],
}

pub struct Integrator<'p> {
    problem: &'p ProblemSpec,
    grid: Grid,
    dst: SineTransform,
    symbol: Vec<f64>,
    mask: Option<Vec<f64>>,
    values: Vec<f64>,
    modes: Vec<f64>,
    next: Vec<f64>,
    scratch: Vec<f64>,
    time: f64,
    clock: f64,
    phi: f64,
    kirchhoff: f64,
    steps: usize,
}

impl<'p> Integrator<'p> {
    /// Starts at `u0` and integration time `s`. With a symmetry class the
    /// initial state is projected onto `Z_j`.
    pub fn new(
        u0: &Profile,
        s: f64,
        problem: &'p ProblemSpec,
        symmetry: Option<SymmetryClass>,
    ) -> Result<Self> {
        problem.validate()?;
        if !s.is_finite() {
            return Err(Error::invalid("start time must be finite"));
        }
        let grid = *u0.grid();
        let n = grid.n();
        let mask = match symmetry {
            Some(class) => {
                class.check_grid(&grid)?;
                Some(class.mode_mask(n))
            }
            None => None,
        };
        let mut dst = SineTransform::new(n);
        let mut modes = dst.forward(u0.values());
        let mut values = u0.values().to_vec();
        if let Some(mask) = &mask {
            modes.iter_mut().zip(mask).for_each(|(m, k)| *m *= k);
            values = dst.inverse(&modes);
        }
        let kirchhoff = problem.diffusivity.eval(h10_from_modes(&grid, &modes));
        let clock = match (&problem.kind, &problem.reference) {
            (ProblemKind::TimeChanged, Some(map)) => map.invert(s)?,
            _ => s,
        };
        Ok(Self {
            problem,
            symbol: grid.laplacian_symbol(),
            grid,
            dst,
            mask,
            values,
            modes,
            next: vec![0.0; n],
            scratch: vec![0.0; n],
            time: s,
            clock,
            phi: 0.0,
            kirchhoff,
            steps: 0,
        })
    }

    pub fn state(&self) -> StepState<'_> {
        StepState {
            step: self.steps,
            time: self.time,
            clock: self.clock,
            phi: self.phi,
            kirchhoff: self.kirchhoff,
            values: &self.values,
            modes: &self.modes,
        }
    }

    pub fn profile(&self) -> Profile {
        Profile::from_vec_unchecked(self.grid, self.values.clone())
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    /// Advance to integration time `t_next > time`.
    pub fn advance_to(&mut self, t_next: f64) -> Result<()> {
        let dt = t_next - self.time;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let a_now = self.kirchhoff;
        let (lin, cub) = self.problem.reaction_coefficients(self.clock, a_now);
        let c = self.problem.diffusion_coefficient(a_now);

        for (out, &u) in self.next.iter_mut().zip(&self.values) {
            *out = u + dt * (lin * u - cub * u * u * u);
        }
        self.dst.forward_in_place(&mut self.next);
        for (m, &k2) in self.next.iter_mut().zip(&self.symbol) {
            *m /= 1.0 + dt * c * k2;
        }
        if let Some(mask) = &self.mask {
            self.next.iter_mut().zip(mask).for_each(|(m, k)| *m *= k);
        }
        self.scratch.copy_from_slice(&self.next);
        self.dst.inverse_in_place(&mut self.scratch);

        if self
            .scratch
            .iter()
            .any(|v| !v.is_finite() || v.abs() > BLOW_UP_LIMIT)
        {
            return Err(Error::BlowUp {
                step: self.steps + 1,
                time: t_next,
                limit: BLOW_UP_LIMIT,
                last: Box::new(self.profile()),
            });
        }

        std::mem::swap(&mut self.modes, &mut self.next);
        std::mem::swap(&mut self.values, &mut self.scratch);
        let a_new = self
            .problem
            .diffusivity
            .eval(h10_from_modes(&self.grid, &self.modes));
        let c_new = self.problem.diffusion_coefficient(a_new);
        self.phi += 0.5 * dt * (c + c_new);
        if self.problem.kind == ProblemKind::TimeChanged {
            self.clock = match &self.problem.reference {
                Some(map) => map.invert(t_next)?,
                None => self.clock + 0.5 * dt * (1.0 / a_now + 1.0 / a_new),
            };
        } else {
            self.clock = t_next;
        }
        self.kirchhoff = a_new;
        self.time = t_next;
        self.steps += 1;
        Ok(())
    }

    /// Integrate from the current time to `t` in equal steps no longer than
    /// `dt`, calling `observe` on the initial state and after every step.
    pub fn run(&mut self, t: f64, dt: f64, mut observe: impl FnMut(&StepState<'_>)) -> Result<()> {
        let s = self.time;
        let plan = StepPlan::new(s, t, dt)?;
        observe(&self.state());
        for k in 1..=plan.steps {
            self.advance_to(plan.time(k))?;
            observe(&self.state());
        }
        Ok(())
    }
}

/// `steps` equal steps covering `[s, t]`, each at most `dt`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct StepPlan {
    s: f64,
    t: f64,
    pub steps: usize,
}

impl StepPlan {
    pub(crate) fn new(s: f64, t: f64, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::invalid(format!("dt must be positive, got {dt}")));
        }
        if !(t >= s) || !t.is_finite() {
            return Err(Error::invalid(format!("end time {t} precedes start {s}")));
        }
        let steps = ((t - s) / dt - 1e-9).ceil().max(0.0) as usize;
        Ok(Self { s, t, steps })
    }

    pub(crate) fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.t
        } else {
            self.s + (self.t - self.s) * (k as f64 / self.steps as f64)
        }
    }
}

/// One IMEX step of `problem` from `u` at time `t`.
pub fn step(u: &Profile, t: f64, dt: f64, problem: &ProblemSpec) -> Result<Profile> {
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("dt must be positive, got {dt}")));
    }
    let mut it = Integrator::new(u, t, problem, None)?;
    it.advance_to(t + dt)?;
    Ok(it.profile())
}

/// The process `S(t, s)u0` sampled along the way.
pub fn evolve(
    u0: &Profile,
    s: f64,
    t: f64,
    problem: &ProblemSpec,
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    let mut it = Integrator::new(u0, s, problem, opts.symmetry)?;
    let every = opts.sample_every.max(1);
    let plan = StepPlan::new(s, t, opts.dt)?;
    let last = plan.steps;
    let mut traj = Trajectory {
        problem: problem.clone(),
        times: Vec::new(),
        clock: Vec::new(),
        phi: Vec::new(),
        profiles: Vec::new(),
        time_map: TimeMap::default(),
    };
    let grid = *u0.grid();
    it.run(t, opts.dt, |st| {
        traj.time_map.push(st.time, st.phi);
        if st.step % every == 0 || st.step == last {
            traj.times.push(st.time);
            traj.clock.push(st.clock);
            traj.phi.push(st.phi);
            traj.profiles
                .push(Profile::from_vec_unchecked(grid, st.values.to_vec()));
        }
    })?;
    Ok(traj)
}

/// `S(t, s)u0` without keeping intermediate states.
pub fn propagate(
    u0: &Profile,
    s: f64,
    t: f64,
    problem: &ProblemSpec,
    opts: &EvolveOptions,
) -> Result<Profile> {
    let mut it = Integrator::new(u0, s, problem, opts.symmetry)?;
    it.run(t, opts.dt, |_| {})?;
    Ok(it.profile())
}
