use std::io::Write;

use envelope_core::oracle::{
    closed_form_two_body, exact_ho_energy, exact_ho_identical, radial_two_body,
};
use envelope_core::{Dimension, OracleResult, Solution, SolverConfig};
use envelope_core::{KineticLaw, PotentialLaw};

use crate::config::System;
use crate::error::CliError;
use crate::solve::{extremize_system, solve_system};

/// Sign of `E_ET - E_oracle` beyond the combined accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundSide {
    Above,
    Below,
    Equal,
}

impl BoundSide {
    pub fn name(self) -> &'static str {
        match self {
            BoundSide::Above => "above",
            BoundSide::Below => "below",
            BoundSide::Equal => "equal",
        }
    }
}

#[derive(Debug)]
pub struct Comparison {
    pub compact: envelope_core::Result<Solution>,
    pub extremization: envelope_core::Result<Solution>,
    /// Reference energy, or the reason none applies.
    pub oracle: Result<OracleResult, String>,
}

impl Comparison {
    pub fn bound_side(&self, cfg: &SolverConfig) -> Option<BoundSide> {
        let (Ok(et), Ok(o)) = (&self.compact, &self.oracle) else {
            return None;
        };
        let d = et.energy - o.energy;
        let slack = o.est_accuracy + 10.0 * cfg.tol * o.energy.abs().max(1.0);
        Some(if d.abs() <= slack {
            BoundSide::Equal
        } else if d > 0.0 {
            BoundSide::Above
        } else {
            BoundSide::Below
        })
    }
}

fn nonrel_mass(k: &KineticLaw) -> Option<f64> {
    match *k {
        KineticLaw::NonRelativistic { mass } => Some(mass),
        _ => None,
    }
}

/// Two-body state with global quantum number `q`: `(n, l)` in one
/// dimension follows from `q = n_1d + 1/2`, elsewhere the circular state
/// `n = 0`, `l = q - D/2` is taken.
fn two_body_labels(q: f64, dim: Dimension) -> Result<(u32, u32), String> {
    let k = q - f64::from(dim.get()) / 2.0;
    if k < -1e-9 || (k - k.round()).abs() > 1e-9 {
        return Err(format!(
            "Q = {q} does not label a two-body state in D = {dim}"
        ));
    }
    let k = k.round() as u32;
    Ok(if dim.get() == 1 {
        (k / 2, k % 2)
    } else {
        (0, k)
    })
}

fn two_body_oracle(
    mu: f64,
    v: &PotentialLaw,
    dim: Dimension,
    q: f64,
) -> Result<OracleResult, String> {
    let (n, l) = two_body_labels(q, dim)?;
    closed_form_two_body(mu, v, dim, n, l)
        .or_else(|_| radial_two_body(mu, v, dim, n, l))
        .map_err(|e| e.to_string())
}

/// Exact or numeric reference energy when one exists for the system.
pub fn oracle_for(system: &System) -> Result<OracleResult, String> {
    match system {
        System::Identical(s) => {
            if let Ok(o) = exact_ho_identical(s) {
                return Ok(o);
            }
            match (s.n, nonrel_mass(&s.kinetic)) {
                (2, Some(m)) => two_body_oracle(m / 2.0, &s.potential, s.dim, s.q.value()),
                _ => Err(
                    "no oracle for this system (needs harmonic forces or a non-relativistic pair)"
                        .into(),
                ),
            }
        }
        System::TwoSpecies(s) => {
            if let Ok(o) = exact_ho_energy(s) {
                return Ok(o);
            }
            match (
                s.n_a,
                s.n_b,
                nonrel_mass(&s.kinetic_a),
                nonrel_mass(&s.kinetic_b),
            ) {
                (1, 1, Some(ma), Some(mb)) => {
                    two_body_oracle(ma * mb / (ma + mb), &s.v_ab, s.dim, s.qrel())
                }
                _ => Err(
                    "no oracle for this system (needs harmonic forces or a non-relativistic pair)"
                        .into(),
                ),
            }
        }
    }
}

pub fn compare(system: &System, cfg: &SolverConfig) -> Comparison {
    Comparison {
        compact: solve_system(system, cfg),
        extremization: extremize_system(system, cfg),
        oracle: oracle_for(system),
    }
}

fn diffs(e: f64, reference: f64) -> (f64, f64) {
    let abs = (e - reference).abs();
    (abs, abs / reference.abs().max(f64::MIN_POSITIVE))
}

/// Prints the comparison table; fails with the first solver error.
pub fn cmd_compare(system: &System, cfg: &SolverConfig, w: &mut dyn Write) -> Result<(), CliError> {
    let c = compare(system, cfg);
    writeln!(w, "system = {}", system.describe())?;
    writeln!(
        w,
        "{:<30} {:>24} {:>12} {:>12}",
        "route", "energy", "abs_diff", "rel_diff"
    )?;
    let reference = c.compact.as_ref().ok().map(|s| s.energy);
    let mut row = |name: &str, e: Option<f64>, note: &str| -> std::io::Result<()> {
        match (e, reference) {
            (Some(e), Some(r)) => {
                let (a, rel) = diffs(e, r);
                writeln!(w, "{name:<30} {e:>24} {a:>12.3e} {rel:>12.3e}{note}")
            }
            (Some(e), None) => writeln!(w, "{name:<30} {e:>24}{note}"),
            (None, _) => writeln!(w, "{name:<30} {:>24}{note}", "-"),
        }
    };
    match &c.compact {
        Ok(s) => row(&format!("compact ({})", s.method), Some(s.energy), "")?,
        Err(e) => row("compact", None, &format!("  failed: {e}"))?,
    }
    match &c.extremization {
        Ok(s) => row("extremization", Some(s.energy), "")?,
        Err(e) => row("extremization", None, &format!("  failed: {e}"))?,
    }
    match &c.oracle {
        Ok(o) => {
            let note = if o.est_accuracy > 0.0 {
                format!("  (accuracy {:.1e})", o.est_accuracy)
            } else {
                String::new()
            };
            row(&format!("oracle ({})", o.method), Some(o.energy), &note)?
        }
        Err(why) => row("oracle", None, &format!("  unavailable: {why}"))?,
    }
    if let (Some(side), Ok(et), Ok(o)) = (c.bound_side(cfg), &c.compact, &c.oracle) {
        writeln!(
            w,
            "bound_side = {} (ET - oracle = {:e})",
            side.name(),
            et.energy - o.energy
        )?;
    }
    if let Err(e) = c.compact {
        return Err(e.into());
    }
    if let Err(e) = c.extremization {
        return Err(e.into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_from_q() {
        let d3 = Dimension::new(3).unwrap();
        let d1 = Dimension::new(1).unwrap();
        assert_eq!(two_body_labels(1.5, d3), Ok((0, 0)));
        assert_eq!(two_body_labels(3.5, d3), Ok((0, 2)));
        assert_eq!(two_body_labels(0.5, d1), Ok((0, 0)));
        assert_eq!(two_body_labels(3.5, d1), Ok((1, 1)));
        assert!(two_body_labels(1.7, d3).is_err());
        assert!(two_body_labels(1.0, d3).is_err());
    }
}
