use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use envelope_core::compact::{solve_identical, solve_two_species};
use envelope_core::extremization::{extremize, extremize_identical};
use envelope_core::{Mean, Solution, SolverConfig};
use serde::Serialize;

use crate::config::{Output, RunConfig, System};
use crate::error::CliError;

/// Compact route for either kind of system.
pub fn solve_system(system: &System, cfg: &SolverConfig) -> envelope_core::Result<Solution> {
    match system {
        System::Identical(s) => solve_identical(s, cfg),
        System::TwoSpecies(s) => solve_two_species(s, cfg),
    }
}

/// Extremization route for either kind of system.
pub fn extremize_system(system: &System, cfg: &SolverConfig) -> envelope_core::Result<Solution> {
    match system {
        System::Identical(s) => extremize_identical(s, cfg).map(|(sol, _)| sol),
        System::TwoSpecies(s) => extremize(s, cfg).map(|(sol, _)| sol),
    }
}

/// Mean quantities reported for a kind of system, in column order.
pub fn mean_columns(system: &System) -> &'static [Mean] {
    match system {
        System::Identical(_) => &[Mean::P0, Mean::Rho0],
        System::TwoSpecies(_) => &[
            Mean::PA,
            Mean::PB,
            Mean::PPrimeA,
            Mean::PPrimeB,
            Mean::RAA,
            Mean::RBB,
            Mean::RPrime0,
            Mean::BigP0,
            Mean::BigR0,
        ],
    }
}

/// Machine-readable result of `solve`.
#[derive(Debug, Serialize)]
pub struct SolveRecord {
    pub system: String,
    pub method: String,
    pub energy: f64,
    pub means: BTreeMap<String, f64>,
    pub residual_norm: f64,
    pub iterations: usize,
    pub ambiguous: bool,
    pub tol: f64,
    pub max_iter: usize,
}

impl SolveRecord {
    pub fn new(system: &System, sol: &Solution, cfg: &SolverConfig) -> Self {
        Self {
            system: system.describe(),
            method: sol.method.name().to_string(),
            energy: sol.energy,
            means: sol
                .means
                .iter()
                .map(|(m, v)| (m.name().to_string(), *v))
                .collect(),
            residual_norm: sol.residual_norm,
            iterations: sol.iterations,
            ambiguous: sol.ambiguous,
            tol: cfg.tol,
            max_iter: cfg.max_iter,
        }
    }
}

pub fn cmd_solve(
    run: &RunConfig,
    cfg: &SolverConfig,
    out: Option<&Path>,
    w: &mut dyn Write,
) -> Result<(), CliError> {
    let system = run
        .system
        .build()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let sol = solve_system(&system, cfg)?;
    writeln!(w, "system = {}", system.describe())?;
    writeln!(w, "method = {}", sol.method)?;
    if run.wants(Output::Energy) {
        writeln!(w, "energy = {}", sol.energy)?;
    }
    if run.wants(Output::Means) {
        for m in mean_columns(&system) {
            if let Some(v) = sol.mean(*m) {
                writeln!(w, "{m} = {v}")?;
            }
        }
    }
    if run.wants(Output::Residuals) {
        writeln!(w, "residual_norm = {:e}", sol.residual_norm)?;
        writeln!(w, "iterations = {}", sol.iterations)?;
    }
    if sol.ambiguous {
        writeln!(w, "ambiguous = true")?;
    }
    if let Some(path) = out {
        let file = std::fs::File::create(path)
            .map_err(|e| CliError::Output(format!("cannot create {}: {e}", path.display())))?;
        serde_json::to_writer_pretty(file, &SolveRecord::new(&system, &sol, cfg))?;
    }
    Ok(())
}
