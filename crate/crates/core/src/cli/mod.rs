//! The `kci` command line: flag parsing, config resolution, dispatch and
//! result files.

pub mod config;
pub mod plot;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub use config::RunConfig;
use config::{parse_sign, Needs};
use plot::{emit_plot, PlotKind, Series};

use crate::comparison::{random_ordered_triple, sandwich_run, sandwich_suite, SandwichSuite};
use crate::equilibria::{bifurcation_sweep, equilibria_catalog, Sign};
use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolveOptions};
use crate::io;
use crate::pullback::trace_equilibrium;
use crate::regions::{invariance_test, region_spec};
use crate::spatial::Profile;

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_PROPERTY: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "kci",
    version,
    about = "Kirchhoff-diffusion Chafee-Infante toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Integrate the non-local problem from an initial profile.
    Simulate(Flags),
    /// Catalog the equilibria of the autonomous problem.
    Equilibria(Flags),
    /// Count equilibria over a grid of λ.
    Bifurcate(Flags),
    /// Run one comparison sandwich on a random ordered triple.
    Compare(Flags),
    /// Trace the non-autonomous equilibrium in one region.
    Pullback(Flags),
    /// Run a property suite (sandwich, invariance, pullback).
    Verify(Flags),
}

#[derive(Debug, Default, Args)]
struct Flags {
    /// JSON config; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b1: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b2: Option<f64>,
    /// constant:B | sinusoidal:B1,B2[,OMEGA] | table:T=B,...
    #[arg(long)]
    beta: Option<String>,
    /// constant:C | saturating | rational | table:S=A,...
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    dt: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    horizon: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// sine:A[,K] | random
    #[arg(long)]
    init: Option<String>,
    #[arg(long)]
    sample_every: Option<usize>,
    /// nodes | modes
    #[arg(long)]
    columns: Option<String>,
    /// LO:HI:STEP
    #[arg(long)]
    lambda_grid: Option<String>,
    #[arg(long)]
    j: Option<usize>,
    /// plus | minus
    #[arg(long)]
    sign: Option<String>,
    #[arg(long)]
    t0: Option<f64>,
    #[arg(long)]
    depth: Option<usize>,
    /// START:END
    #[arg(long, allow_hyphen_values = true)]
    window: Option<String>,
    #[arg(long)]
    sample_dt: Option<f64>,
    /// sandwich | invariance | pullback
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    triples: Option<usize>,
}

impl Flags {
    fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        macro_rules! set {
            ($($f:ident),*) => {$(
                if let Some(v) = &self.$f { c.$f = v.clone(); }
            )*};
        }
        set!(
            lambda,
            a,
            n,
            dt,
            tolerance,
            seed,
            out,
            init,
            sample_every,
            lambda_grid,
            j,
            t0,
            depth,
            window,
            sample_dt,
            suite,
            triples
        );
        if self.b.is_some() {
            c.b = self.b;
            c.beta = None;
        }
        if self.beta.is_some() {
            c.beta = self.beta.clone();
            c.b = None;
        }
        if self.b1.is_some() {
            c.b1 = self.b1;
        }
        if self.b2.is_some() {
            c.b2 = self.b2;
        }
        if self.horizon.is_some() {
            c.horizon = self.horizon;
        }
        if self.plot {
            c.plot = true;
        }
        if let Some(s) = &self.columns {
            c.columns = s.parse()?;
        }
        if let Some(s) = &self.sign {
            c.sign = parse_sign(s)?;
        }
        Ok(c)
    }
}

/// Fills in the command-dependent defaults so the written config is
/// self-contained.
fn finish(mut c: RunConfig, needs: Needs, horizon: f64) -> Result<RunConfig> {
    if c.horizon.is_none() {
        c.horizon = Some(horizon);
    }
    if needs == Needs::Autonomous && c.b.is_none() && c.beta.is_none() {
        c.b = Some(1.0);
    }
    c.validate()?;
    match needs {
        Needs::Autonomous => {
            c.constant_b()?;
        }
        Needs::Forcing => {
            c.beta_fn()?;
        }
    }
    std::fs::create_dir_all(&c.out)?;
    io::write_json(&c.out.join("config.json"), &c)?;
    Ok(c)
}

/// Maps an error to the exit-code taxonomy.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidInput(_) | Error::GridMismatch(_) | Error::Threshold(_) => EXIT_INVALID,
        Error::Io(_) | Error::Json(_) | Error::Csv(_) => EXIT_INVALID,
        Error::BlowUp { .. }
        | Error::NoConvergence { .. }
        | Error::Bracket { .. }
        | Error::RegionExit { .. } => EXIT_NUMERICAL,
    }
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("KCI_THREADS") {
        let k: usize = v.trim().parse().ok().filter(|&k| k > 0).ok_or_else(|| {
            Error::invalid(format!("KCI_THREADS must be a positive integer, got `{v}`"))
        })?;
        // A second call in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global();
    }
    Ok(())
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() {
                EXIT_INVALID
            } else {
                EXIT_OK
            };
            let _ = e.print();
            return code;
        }
    };
    let result = configure_threads().and_then(|_| dispatch(&cli.command));
    match result {
        Ok(Outcome { line, passed }) => {
            println!("{line}");
            if passed {
                EXIT_OK
            } else {
                EXIT_PROPERTY
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

struct Outcome {
    line: String,
    passed: bool,
}

impl Outcome {
    fn ok(line: String) -> Self {
        Self { line, passed: true }
    }
}

fn dispatch(cmd: &Command) -> Result<Outcome> {
    match cmd {
        Command::Simulate(f) => simulate(finish(f.resolve()?, Needs::Forcing, 10.0)?),
        Command::Equilibria(f) => equilibria(finish(f.resolve()?, Needs::Autonomous, 0.0)?),
        Command::Bifurcate(f) => bifurcate(finish(f.resolve()?, Needs::Autonomous, 0.0)?),
        Command::Compare(f) => compare(finish(f.resolve()?, Needs::Forcing, 20.0)?),
        Command::Pullback(f) => pullback(finish(f.resolve()?, Needs::Forcing, 0.0)?),
        Command::Verify(f) => verify(finish(f.resolve()?, Needs::Forcing, 20.0)?),
    }
}

fn horizon(c: &RunConfig) -> f64 {
    c.horizon.unwrap_or(0.0)
}

fn initial_profile(c: &RunConfig) -> Result<Profile> {
    let grid = c.grid()?;
    let (name, params) = c.init.split_once(':').unwrap_or((c.init.as_str(), ""));
    match name {
        "sine" => {
            let nums: Vec<f64> = params
                .split(',')
                .map(|p| p.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::invalid(format!("init: cannot parse `{}`", c.init)))?;
            let (amp, k) = match nums[..] {
                [amp] => (amp, 1.0),
                [amp, k] if k >= 1.0 && k.fract() == 0.0 => (amp, k),
                _ => return Err(Error::invalid("init sine takes A[,K] with integer K ≥ 1")),
            };
            if !amp.is_finite() {
                return Err(Error::invalid("init amplitude must be finite"));
            }
            let w = k * std::f64::consts::PI / grid.length();
            Ok(Profile::from_fn(grid, |x| amp * (w * x).sin()))
        }
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
            let [_, mid, _] = random_ordered_triple(grid, &mut rng);
            Ok(mid)
        }
        other => Err(Error::invalid(format!(
            "unknown init `{other}` (sine:A[,K] | random)"
        ))),
    }
}

fn profile_series(label: impl Into<String>, u: &Profile) -> Series {
    Series::new(label, u.grid().nodes(), u.values().to_vec())
}

fn simulate(c: RunConfig) -> Result<Outcome> {
    let problem = c.problem()?;
    let u0 = initial_profile(&c)?;
    let t = horizon(&c);
    let opts = EvolveOptions::with_dt(c.dt).sampled(c.sample_every);
    let traj = evolve(&u0, 0.0, t, &problem, &opts)?;
    let steps = ((t / c.dt) - 1e-9).ceil().max(0.0) as usize;
    io::write_trajectory_csv(&c.out.join("trajectory.csv"), &traj, c.columns)?;
    io::write_profile_csv(&c.out.join("final.csv"), traj.last())?;
    io::write_json(
        &c.out.join("manifest.json"),
        &io::RunManifest {
            kind: problem.kind,
            problem: problem.clone(),
            n: c.n,
            length: u0.grid().length(),
            dt: c.dt,
            seed: c.seed,
            start: 0.0,
            end: t,
            samples: traj.len(),
            steps,
        },
    )?;
    if c.plot {
        let count = traj.len();
        let picks: Vec<usize> = if count <= 6 {
            (0..count).collect()
        } else {
            (0..6).map(|k| k * (count - 1) / 5).collect()
        };
        let series: Vec<Series> = picks
            .iter()
            .map(|&i| profile_series(format!("t = {}", traj.times[i]), &traj.profiles[i]))
            .collect();
        emit_plot(&series, PlotKind::Profiles, &c.out.join("profiles.svg"))?;
    }
    let last = traj.last();
    Ok(Outcome::ok(format!(
        "simulate: t = {t}, {} samples, sup|u| = {:.6e}, phi = {:.6e}",
        traj.len(),
        last.sup_norm(),
        traj.phi.last().copied().unwrap_or(0.0)
    )))
}

#[derive(Serialize)]
struct RecordRow {
    j: usize,
    sign: Sign,
    method: crate::equilibria::Method,
    c_star: f64,
    h10_norm_sq: f64,
    residual: f64,
    amplitude: f64,
    multiplicity: usize,
}

fn equilibria(c: RunConfig) -> Result<Outcome> {
    let grid = c.grid()?;
    let a = c.diffusivity()?;
    let b = c.constant_b()?;
    let records = equilibria_catalog(c.lambda, b, &a, &grid)?;
    io::write_catalog_json(&c.out.join("catalog.json"), &records)?;
    let mut w = csv::Writer::from_path(c.out.join("equilibria.csv"))?;
    for r in &records {
        w.serialize(RecordRow {
            j: r.j,
            sign: r.sign,
            method: r.method,
            c_star: r.c_star,
            h10_norm_sq: r.h10_norm_sq,
            residual: r.residual,
            amplitude: r.amplitude(),
            multiplicity: r.multiplicity,
        })?;
    }
    w.flush()?;
    if c.plot {
        let series: Vec<Series> = records
            .iter()
            .map(|r| {
                let s = if r.sign == Sign::Plus { "+" } else { "-" };
                profile_series(format!("j = {} {s}", r.j), &r.profile)
            })
            .collect();
        emit_plot(&series, PlotKind::Profiles, &c.out.join("equilibria.svg"))?;
    }
    let worst = records.iter().fold(0.0f64, |m, r| m.max(r.residual));
    Ok(Outcome::ok(format!(
        "equilibria: lambda = {}, {} equilibria, max residual = {worst:.3e}",
        c.lambda,
        records.len()
    )))
}

fn bifurcate(c: RunConfig) -> Result<Outcome> {
    let grid = c.grid()?;
    let a = c.diffusivity()?;
    let b = c.constant_b()?;
    let lambdas = c.lambdas()?;
    let rows = bifurcation_sweep(&lambdas, b, &a, &grid)?;
    io::write_bifurcation_csv(&c.out.join("bifurcation.csv"), &rows)?;
    if c.plot {
        let s = Series::new(
            "count",
            rows.iter().map(|r| r.lambda).collect(),
            rows.iter().map(|r| r.count as f64).collect(),
        );
        emit_plot(&[s], PlotKind::Bifurcation, &c.out.join("bifurcation.svg"))?;
    }
    if let Some(bad) = rows.iter().find(|r| r.error.is_some()) {
        return Err(Error::NoConvergence {
            what: "bifurcation sweep",
            detail: format!(
                "lambda = {}: {}",
                bad.lambda,
                bad.error.as_deref().unwrap_or_default()
            ),
        });
    }
    let counts: Vec<String> = rows.iter().map(|r| r.count.to_string()).collect();
    Ok(Outcome::ok(format!(
        "bifurcate: {} values of lambda, counts {}",
        rows.len(),
        counts.join(",")
    )))
}

fn compare(c: RunConfig) -> Result<Outcome> {
    let grid = c.grid()?;
    let problem = c.problem()?;
    let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
    let [u0, u1, u2] = random_ordered_triple(grid, &mut rng);
    let opts = EvolveOptions::with_dt(c.dt).sampled(c.sample_every);
    let report = sandwich_run(&u0, &u1, &u2, 0.0, horizon(&c), &problem, &opts)?;
    io::write_json(&c.out.join("sandwich.json"), &report)?;
    let worst = report.max_violation();
    let passed = worst <= c.tolerance;
    Ok(Outcome {
        line: format!(
            "compare: {} worst violation {worst:.3e} (tolerance {:e})",
            verdict(passed),
            c.tolerance
        ),
        passed,
    })
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn pullback(c: RunConfig) -> Result<Outcome> {
    let grid = c.grid()?;
    let problem = c.problem()?;
    let trace = trace_equilibrium(
        c.j,
        c.sign,
        &problem,
        &grid,
        c.window_bounds()?,
        c.sample_dt,
        &c.pullback_options(),
    )?;
    let (b1, b2) = problem.beta.bounds();
    let region = region_spec(c.j, c.sign, c.lambda, b1, b2, &grid)?;
    io::write_trace_csv(&c.out.join("trace.csv"), &trace)?;
    io::write_json(&c.out.join("trace.json"), &io::TraceSummary::from(&trace))?;
    io::write_json(&c.out.join("region.json"), &region)?;
    if let Some(last) = trace.slices.last() {
        io::write_profile_csv(&c.out.join("slice.csv"), last)?;
        if c.plot {
            let series = [
                profile_series("lower", &region.lower),
                profile_series("upper", &region.upper),
                profile_series("slice", last),
            ];
            emit_plot(&series, PlotKind::Envelope, &c.out.join("envelope.svg"))?;
        }
    }
    let mut line = format!(
        "pullback: {} j = {} over {} samples, max final gap {:.3e}",
        verdict(trace.valid),
        c.j,
        trace.samples.len(),
        trace.max_final_gap
    );
    if let Some((t, why)) = &trace.first_failure {
        line.push_str(&format!("; first failure at t = {t}: {why}"));
    }
    Ok(Outcome {
        line,
        passed: trace.valid,
    })
}

fn verify(c: RunConfig) -> Result<Outcome> {
    match c.suite.as_str() {
        "sandwich" => {
            let beta = c.beta_fn()?;
            let (b1, b2) = beta.bounds();
            let suite = SandwichSuite {
                b1,
                b2,
                triples: c.triples,
                horizon: horizon(&c),
                n: c.n,
                dt: c.dt,
                seed: c.seed,
                tolerance: c.tolerance,
                ..SandwichSuite::default()
            };
            let report = sandwich_suite(&suite)?;
            write_report(&c.out, "verify_sandwich.json", &report)?;
            Ok(Outcome {
                line: format!(
                    "verify sandwich: {} {} triples, worst violation {:.3e} (dt/2: {:.3e})",
                    verdict(report.passed),
                    report.triples.len(),
                    report.max_violation,
                    report.max_violation_refined
                ),
                passed: report.passed,
            })
        }
        "invariance" => {
            let grid = c.grid()?;
            let problem = c.problem()?;
            let (b1, b2) = problem.beta.bounds();
            let spec = region_spec(c.j, c.sign, c.lambda, b1, b2, &grid)?;
            let opts = EvolveOptions::with_dt(c.dt);
            let report = invariance_test(&spec, &problem, horizon(&c), c.triples, c.seed, &opts)?;
            write_report(&c.out, "verify_invariance.json", &report)?;
            let worst = report
                .max_exit_distance
                .max(report.max_pinned_zero)
                .max(report.max_sign_violation);
            let passed = worst <= c.tolerance;
            Ok(Outcome {
                line: format!(
                    "verify invariance: {} {} samples, worst exit {worst:.3e}",
                    verdict(passed),
                    report.samples
                ),
                passed,
            })
        }
        "pullback" => {
            let out = pullback(c)?;
            Ok(Outcome {
                line: format!("verify {}", out.line),
                passed: out.passed,
            })
        }
        other => Err(Error::invalid(format!(
            "unknown suite `{other}` (sandwich | invariance | pullback)"
        ))),
    }
}

fn write_report<T: Serialize>(dir: &Path, name: &str, report: &T) -> Result<()> {
    io::write_json(&dir.join(name), report)
}
