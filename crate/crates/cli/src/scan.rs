use std::io::Write;
use std::time::Instant;

use clap::ValueEnum;
use envelope_core::{Mean, Solution, SolverConfig};
use rayon::prelude::*;

use crate::config::{SystemDescription, SystemKind};
use crate::error::CliError;
use crate::solve::{mean_columns, solve_system};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScanVar {
    /// Particle count of an identical system.
    #[value(name = "n")]
    N,
    #[value(name = "n_a")]
    NA,
    #[value(name = "n_b")]
    NB,
    /// `Q` of an identical system, `Q_rel` of a two-species system.
    #[value(name = "q")]
    Q,
    /// Factor multiplying the primary pair potential.
    #[value(name = "coupling")]
    Coupling,
}

impl ScanVar {
    pub fn name(self) -> &'static str {
        match self {
            ScanVar::N => "n",
            ScanVar::NA => "n_a",
            ScanVar::NB => "n_b",
            ScanVar::Q => "q",
            ScanVar::Coupling => "coupling",
        }
    }

    fn check(self, kind: SystemKind) -> Result<(), CliError> {
        let ok = match self {
            ScanVar::N => kind == SystemKind::Identical,
            ScanVar::NA | ScanVar::NB => kind == SystemKind::TwoSpecies,
            ScanVar::Q | ScanVar::Coupling => true,
        };
        if ok {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "scan variable {} does not apply to {} systems",
                self.name(),
                match kind {
                    SystemKind::Identical => "identical",
                    SystemKind::TwoSpecies => "two-species",
                }
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSpec {
    pub var: ScanVar,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl ScanSpec {
    /// Evenly spaced values from `from` to `to` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.from];
        }
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.to
                } else {
                    self.from + (self.to - self.from) * i as f64 / last
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct ScanRow {
    pub index: usize,
    pub value: f64,
    pub wall_time: f64,
    pub outcome: Result<Solution, String>,
}

fn count(v: f64) -> Result<u64, String> {
    if v >= 0.0 && (v - v.round()).abs() <= 1e-9 && v <= u32::MAX as f64 {
        Ok(v.round() as u64)
    } else {
        Err(format!("{v} is not a non-negative integer"))
    }
}

fn apply(base: &SystemDescription, var: ScanVar, v: f64) -> Result<SystemDescription, String> {
    let mut d = base.clone();
    match var {
        ScanVar::N | ScanVar::NA => d.a.count = count(v)?,
        ScanVar::NB => {
            d.b.as_mut()
                .expect("two-species system has species b")
                .count = count(v)?
        }
        ScanVar::Q => match d.kind {
            SystemKind::Identical => d.q = Some(v),
            SystemKind::TwoSpecies => d.q_rel = Some(v),
        },
        ScanVar::Coupling => d.coupling = v,
    }
    Ok(d)
}

fn run_point(
    base: &SystemDescription,
    spec: &ScanSpec,
    cfg: &SolverConfig,
    i: usize,
    v: f64,
) -> ScanRow {
    let start = Instant::now();
    let outcome = apply(base, spec.var, v).and_then(|d| {
        let system = d.build().map_err(|e| e.to_string())?;
        solve_system(&system, cfg).map_err(|e| e.to_string())
    });
    ScanRow {
        index: i,
        value: v,
        wall_time: start.elapsed().as_secs_f64(),
        outcome,
    }
}

/// Solves every scan point, concurrently; rows come back in index order.
pub fn scan(
    base: &SystemDescription,
    spec: &ScanSpec,
    cfg: &SolverConfig,
) -> Result<Vec<ScanRow>, CliError> {
    spec.var.check(base.kind)?;
    if spec.steps == 0 {
        return Err(CliError::Config("--steps must be at least 1".into()));
    }
    if !spec.from.is_finite() || !spec.to.is_finite() {
        return Err(CliError::Config("scan range must be finite".into()));
    }
    let values = spec.values();
    Ok(values
        .par_iter()
        .enumerate()
        .map(|(i, &v)| run_point(base, spec, cfg, i, v))
        .collect())
}

/// Scientific notation with 17 significant digits.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn header(var: ScanVar, means: &[Mean]) -> Vec<String> {
    let mut h = vec![
        "index".to_string(),
        var.name().to_string(),
        "energy".to_string(),
    ];
    h.extend(means.iter().map(|m| m.name().to_string()));
    h.extend(["residual_norm", "iterations", "wall_time_s", "error"].map(String::from));
    h
}

pub fn write_csv(
    rows: &[ScanRow],
    var: ScanVar,
    base: &SystemDescription,
    w: &mut dyn Write,
) -> Result<(), CliError> {
    let system = base.build().map_err(|e| CliError::Config(e.to_string()))?;
    let means = mean_columns(&system);
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header(var, means))?;
    for row in rows {
        let mut rec = vec![row.index.to_string(), fmt17(row.value)];
        match &row.outcome {
            Ok(sol) => {
                rec.push(fmt17(sol.energy));
                rec.extend(
                    means
                        .iter()
                        .map(|m| sol.mean(*m).map(fmt17).unwrap_or_default()),
                );
                rec.push(fmt17(sol.residual_norm));
                rec.push(sol.iterations.to_string());
                rec.push(fmt17(row.wall_time));
                rec.push(String::new());
            }
            Err(msg) => {
                rec.extend(std::iter::repeat_n(String::new(), means.len() + 3));
                rec.push(fmt17(row.wall_time));
                rec.push(msg.clone());
            }
        }
        out.write_record(&rec)?;
    }
    out.flush()?;
    Ok(())
}
