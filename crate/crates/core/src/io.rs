//! CSV and JSON writers for profiles, trajectories, catalogs and reports.
//!
//! Floats are written with Rust's shortest round-trip formatting, so equal
//! inputs give byte-identical files.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::equilibria::{EquilibriumRecord, SweepRow};
use crate::error::{Error, Result};
use crate::evolution::{ProblemKind, ProblemSpec, Trajectory};
use crate::pullback::Trace;
use crate::spatial::{Grid, Profile, ZeroSet};

/// Shortest round-trip form, exponent notation for very small or large
/// magnitudes (as in the JSON output).
fn num(v: f64) -> String {
    format!("{v:?}")
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let f = File::open(path)?;
    Ok(serde_json::from_reader(std::io::BufReader::new(f))?)
}

/// Columns `x, u`.
pub fn write_profile_csv(path: &Path, u: &Profile) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "u"])?;
    for (x, v) in u.grid().nodes().iter().zip(u.values()) {
        w.write_record([num(*x), num(*v)])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct ProfileDoc {
    grid: Grid,
    values: Vec<f64>,
}

/// `{"grid": {...}, "values": [...]}`.
pub fn write_profile_json(path: &Path, u: &Profile) -> Result<()> {
    write_json(
        path,
        &ProfileDoc {
            grid: *u.grid(),
            values: u.values().to_vec(),
        },
    )
}

pub fn read_profile_json(path: &Path) -> Result<Profile> {
    let doc: ProfileDoc = read_json(path)?;
    Profile::new(doc.grid, doc.values)
}

/// What the per-sample columns of a trajectory CSV hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryColumns {
    #[default]
    Nodes,
    Modes,
}

impl std::str::FromStr for TrajectoryColumns {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nodes" => Ok(Self::Nodes),
            "modes" => Ok(Self::Modes),
            other => Err(Error::invalid(format!(
                "columns must be `nodes` or `modes`, got `{other}`"
            ))),
        }
    }
}

/// `t, phi, u_1..u_n` (or `mode_1..mode_n`), one row per sample.
pub fn write_trajectory_csv(
    path: &Path,
    traj: &Trajectory,
    columns: TrajectoryColumns,
) -> Result<()> {
    let n = traj.last().grid().n();
    let prefix = match columns {
        TrajectoryColumns::Nodes => "u",
        TrajectoryColumns::Modes => "mode",
    };
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "phi".to_string()];
    header.extend((1..=n).map(|i| format!("{prefix}_{i}")));
    w.write_record(&header)?;
    for ((t, phi), u) in traj.times.iter().zip(&traj.phi).zip(&traj.profiles) {
        let data = match columns {
            TrajectoryColumns::Nodes => u.values().to_vec(),
            TrajectoryColumns::Modes => u.modes(),
        };
        let mut row = vec![num(*t), num(*phi)];
        row.extend(data.iter().copied().map(num));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: ProblemKind,
    pub problem: ProblemSpec,
    pub n: usize,
    pub length: f64,
    pub dt: f64,
    pub seed: u64,
    pub start: f64,
    pub end: f64,
    pub samples: usize,
    pub steps: usize,
}

/// The catalog as a JSON list of records.
pub fn write_catalog_json(path: &Path, records: &[EquilibriumRecord]) -> Result<()> {
    write_json(path, records)
}

/// `lambda, count, error`, then `h10_j, c_star_j, residual_j` for every
/// branch index that appears in the sweep (blank where absent).
pub fn write_bifurcation_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let max_j = rows
        .iter()
        .flat_map(|r| r.branches.iter().map(|b| b.j))
        .max()
        .unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "lambda".to_string(),
        "count".to_string(),
        "error".to_string(),
    ];
    for j in 1..=max_j {
        header.push(format!("h10_{j}"));
        header.push(format!("c_star_{j}"));
        header.push(format!("residual_{j}"));
    }
    w.write_record(&header)?;
    for r in rows {
        let mut rec = vec![
            num(r.lambda),
            r.count.to_string(),
            r.error.clone().unwrap_or_default(),
        ];
        for j in 1..=max_j {
            match r.branches.iter().find(|b| b.j == j) {
                Some(b) => {
                    rec.push(num(b.h10_norm_sq));
                    rec.push(num(b.c_star));
                    rec.push(num(b.residual));
                }
                None => rec.extend(std::iter::repeat(String::new()).take(3)),
            }
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn zeros_field(z: &ZeroSet) -> String {
    match z.locations() {
        Some(l) => l.iter().copied().map(num).collect::<Vec<_>>().join(";"),
        None => "degenerate".to_string(),
    }
}

/// One row per sampled time: `t, zeros, min_k, max_k` per arch, final gap.
pub fn write_trace_csv(path: &Path, trace: &Trace) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec!["t".to_string(), "zeros".to_string()];
    for k in 1..=trace.j {
        header.push(format!("min_{k}"));
        header.push(format!("max_{k}"));
    }
    header.extend(["gap", "exit_distance", "ok"].map(String::from));
    w.write_record(&header)?;
    for s in &trace.samples {
        let mut rec = vec![num(s.t), zeros_field(&s.zeros)];
        for (lo, hi) in s.arch_min.iter().zip(&s.arch_max) {
            rec.push(num(*lo));
            rec.push(num(*hi));
        }
        rec.push(num(s.gaps.last().copied().unwrap_or(f64::NAN)));
        rec.push(num(s.exit_distance));
        rec.push((s.zeros_ok && s.in_region && s.nondegenerate).to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TraceSummary {
    pub j: usize,
    pub sign: crate::equilibria::Sign,
    pub lambda: f64,
    pub options: crate::pullback::PullbackOptions,
    pub samples: usize,
    pub max_final_gap: f64,
    pub valid: bool,
    pub first_failure: Option<(f64, String)>,
}

impl From<&Trace> for TraceSummary {
    fn from(t: &Trace) -> Self {
        Self {
            j: t.j,
            sign: t.sign,
            lambda: t.lambda,
            options: t.options,
            samples: t.samples.len(),
            max_final_gap: t.max_final_gap,
            valid: t.valid,
            first_failure: t.first_failure.clone(),
        }
    }
}
