//! Invariant battery behind `envelope validate`.

use std::io::Write;

use envelope_core::compact::{solve_identical, solve_two_species};
use envelope_core::extremization::extremize;
use envelope_core::model::{global_quantum_number, QuantumNumbers, TwoSpeciesBuilder};
use envelope_core::oracle::{
    closed_form_two_body, exact_ho_energy, exact_ho_identical, radial_two_body,
};
use envelope_core::{
    Dimension, GlobalQuantumNumber, IdenticalSystemSpec, SolverConfig, TwoSpeciesSystemSpec,
};
use envelope_core::{KineticLaw, PotentialLaw, PowerTerm};

use crate::error::CliError;

/// When set to anything but `0`, the derivative check perturbs every law
/// derivative by one part in a thousand. Exercises the failure path.
pub const CORRUPT_DERIVATIVE_ENV: &str = "ET_VALIDATE_CORRUPT_DERIVATIVE";

pub const FD_CHECK: &str = "finite-difference derivatives";

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub cases: usize,
    pub worst: f64,
    pub tol: f64,
    /// First case that raised an error instead of producing a number.
    pub error: Option<String>,
}

impl Check {
    fn new(name: &'static str, tol: f64) -> Self {
        Self {
            name,
            cases: 0,
            worst: 0.0,
            tol,
            error: None,
        }
    }

    fn record(&mut self, deviation: f64) {
        self.cases += 1;
        // NaN must fail the check
        if deviation.is_nan() || deviation > self.worst {
            self.worst = deviation;
        }
    }

    fn record_result(&mut self, case: &str, r: envelope_core::Result<f64>) {
        match r {
            Ok(d) => self.record(d),
            Err(e) => {
                self.cases += 1;
                if self.error.is_none() {
                    self.error = Some(format!("{case}: {e}"));
                }
            }
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && self.worst <= self.tol
    }
}

fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn dim(d: u32) -> Dimension {
    Dimension::new(d).expect("valid dimension")
}

fn nonrel(m: f64) -> KineticLaw {
    KineticLaw::non_relativistic(m).expect("valid mass")
}

fn relat(m: f64) -> KineticLaw {
    KineticLaw::relativistic(m).expect("valid mass")
}

fn pot(terms: &[(f64, f64)]) -> PotentialLaw {
    PotentialLaw::sum(terms.iter().map(|&(a, b)| PowerTerm::new(a, b)).collect())
        .expect("valid potential")
}

fn linear(a: f64) -> PotentialLaw {
    pot(&[(a, 1.0)])
}

fn coulomb(alpha: f64) -> PotentialLaw {
    pot(&[(-alpha, -1.0)])
}

fn harmonic(k: f64) -> PotentialLaw {
    pot(&[(k, 2.0)])
}

fn funnel(a: f64, alpha: f64) -> PotentialLaw {
    pot(&[(a, 1.0), (-alpha, -1.0)])
}

/// Tolerance for checks whose accuracy follows the solver tolerance.
fn solver_tol(floor: f64, cfg: &SolverConfig) -> f64 {
    floor.max(10.0 * cfg.tol)
}

fn ho_identical(cfg: &SolverConfig) -> Check {
    let mut c = Check::new("harmonic identical exactness", solver_tol(1e-10, cfg));
    for n in [2, 3, 5, 10, 50] {
        for d in 1..=3 {
            for (m, k) in [(1.0, 0.5), (2.5, 3.0), (0.3, 0.1)] {
                let r =
                    IdenticalSystemSpec::ground(n, dim(d), nonrel(m), harmonic(k)).and_then(|s| {
                        let exact = exact_ho_identical(&s)?.energy;
                        Ok(rel_diff(solve_identical(&s, cfg)?.energy, exact))
                    });
                c.record_result(&format!("N={n} D={d} m={m} k={k}"), r);
            }
        }
    }
    c
}

fn ho_two_species(cfg: &SolverConfig) -> Check {
    let mut c = Check::new("harmonic two-species exactness", solver_tol(1e-10, cfg));
    for (na, nb) in [(2, 2), (2, 3), (3, 1), (1, 4), (1, 1), (7, 5)] {
        for (ma, mb, kaa, kbb, kab) in [(1.0, 2.0, 0.5, 1.0, 2.0), (0.4, 3.0, 2.0, 0.2, 0.7)] {
            let r = TwoSpeciesBuilder::new(na, nb, dim(3), nonrel(ma), harmonic(kab))
                .kinetic_b(nonrel(mb))
                .v_aa(harmonic(kaa))
                .v_bb(harmonic(kbb))
                .build()
                .and_then(|s| {
                    let exact = exact_ho_energy(&s)?.energy;
                    Ok(rel_diff(solve_two_species(&s, cfg)?.energy, exact))
                });
            c.record_result(&format!("{na}+{nb} m=({ma},{mb})"), r);
        }
    }
    c
}

/// Kinetic families x potential families x species counts.
pub fn battery() -> Vec<(&'static str, envelope_core::Result<TwoSpeciesSystemSpec>)> {
    let ultra = KineticLaw::UltraRelativistic;
    let b = |na, nb, k, v| TwoSpeciesBuilder::new(na, nb, dim(3), k, v);
    vec![
        (
            "nonrel linear 2+2",
            b(2, 2, nonrel(1.0), linear(1.0)).build(),
        ),
        (
            "nonrel coulomb 2+3",
            b(2, 3, nonrel(1.0), coulomb(1.0))
                .kinetic_b(nonrel(2.0))
                .build(),
        ),
        (
            "nonrel harmonic 3+1",
            b(3, 1, nonrel(1.0), harmonic(0.5))
                .kinetic_b(nonrel(3.0))
                .build(),
        ),
        (
            "nonrel funnel 1+1",
            b(1, 1, nonrel(1.0), funnel(1.0, 0.5)).build(),
        ),
        (
            "rel linear 2+3",
            b(2, 3, relat(1.0), linear(1.0))
                .kinetic_b(relat(0.3))
                .build(),
        ),
        (
            "rel coulomb 2+2",
            b(2, 2, relat(0.5), coulomb(0.4))
                .kinetic_b(relat(2.0))
                .build(),
        ),
        (
            "rel harmonic 1+1",
            b(1, 1, relat(1.0), harmonic(1.0)).build(),
        ),
        (
            "rel funnel 3+1",
            b(3, 1, relat(0.2), funnel(0.5, 0.3))
                .kinetic_b(relat(5.0))
                .build(),
        ),
        ("ultra linear 1+1", b(1, 1, ultra, linear(1.0)).build()),
        ("ultra harmonic 2+2", b(2, 2, ultra, harmonic(0.7)).build()),
        (
            "ultra/nonrel funnel 2+3",
            b(2, 3, ultra, funnel(1.0, 0.2))
                .kinetic_b(nonrel(1.5))
                .build(),
        ),
        (
            "rel/nonrel mixed 2+2",
            b(2, 2, relat(0.3), linear(0.8))
                .kinetic_b(nonrel(4.0))
                .v_bb(harmonic(0.6))
                .v_ab(funnel(1.0, 0.4))
                .build(),
        ),
    ]
}

fn routes_agree(cfg: &SolverConfig) -> Check {
    let mut c = Check::new("compact vs extremization", solver_tol(1e-8, cfg));
    for (name, spec) in battery() {
        let r = spec.and_then(|s| {
            let compact = solve_two_species(&s, cfg)?.energy;
            let (ext, _) = extremize(&s, cfg)?;
            Ok(rel_diff(ext.energy, compact))
        });
        c.record_result(name, r);
    }
    c
}

fn kinetic_laws() -> Vec<KineticLaw> {
    vec![
        nonrel(1.0),
        relat(0.5),
        relat(3.0),
        KineticLaw::UltraRelativistic,
        KineticLaw::power_law(1.0, 1.5).expect("valid law"),
        KineticLaw::power_law(0.5, 3.0).expect("valid law"),
    ]
}

fn potential_laws() -> Vec<PotentialLaw> {
    vec![
        linear(1.0),
        coulomb(0.7),
        harmonic(2.0),
        funnel(1.0, 0.5),
        pot(&[(1.0, 0.5)]),
        pot(&[(0.3, 3.0)]),
        pot(&[(-1.0, -0.5), (0.2, 1.5)]),
    ]
}

fn aux_residuals() -> Check {
    let mut c = Check::new("auxiliary inverse residuals", 1e-10);
    let grid: Vec<f64> = (-12..=12).map(|i| 10f64.powf(i as f64 / 4.0)).collect();
    for k in kinetic_laws()
        .into_iter()
        .filter(|k| k.pinned_mass().is_none())
    {
        for &u in &grid {
            let x = k.mass_floor() + u;
            let r = k.aux_inverse(x).map(|g| rel_diff(k.derivative(g), g / x));
            c.record_result(&format!("{k:?} x={x}"), r);
        }
    }
    for v in potential_laws()
        .into_iter()
        .filter(|v| v.pinned_spring().is_none())
    {
        for &x in &grid {
            let r = v
                .aux_inverse(x)
                .map(|j| rel_diff(v.derivative(j), 2.0 * x * j));
            c.record_result(&format!("{v:?} x={x}"), r);
        }
    }
    c
}

fn corrupted() -> bool {
    std::env::var(CORRUPT_DERIVATIVE_ENV).is_ok_and(|v| !v.is_empty() && v != "0")
}

fn fd_derivatives() -> Check {
    let mut c = Check::new(FD_CHECK, 1e-6);
    let skew = if corrupted() { 1.0 + 1e-3 } else { 1.0 };
    let fd = |f: &dyn Fn(f64) -> f64, x: f64| {
        let h = 1e-5 * x;
        (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h)
    };
    for i in -8..=8 {
        let x = 10f64.powf(i as f64 / 4.0);
        for k in kinetic_laws() {
            let d = k.derivative(x) * skew;
            c.record((fd(&|p| k.value(p), x) - d).abs() / d.abs().max(1.0));
        }
        for v in potential_laws() {
            let d = v.derivative(x) * skew;
            c.record((fd(&|r| v.value(r), x) - d).abs() / d.abs().max(1.0));
        }
    }
    c
}

fn species_symmetry(cfg: &SolverConfig) -> Check {
    let mut c = Check::new("species symmetry reductions", solver_tol(1e-10, cfg));
    let cases = [
        (2, 3, nonrel(1.0), linear(1.0)),
        (3, 3, relat(0.5), funnel(1.0, 0.3)),
        (2, 2, KineticLaw::UltraRelativistic, harmonic(0.5)),
        (4, 1, nonrel(2.0), coulomb(1.0)),
    ];
    for (na, nb, k, v) in cases {
        let name = format!("{na}+{nb} {k:?}");
        let r = TwoSpeciesBuilder::new(na, nb, dim(3), k, v.clone())
            .build()
            .and_then(|s| {
                let two = solve_two_species(&s, cfg)?.energy;
                let swapped = solve_two_species(&s.swapped(), cfg)?.energy;
                let single =
                    solve_identical(&IdenticalSystemSpec::ground(na + nb, dim(3), k, v)?, cfg)?
                        .energy;
                Ok(rel_diff(two, single).max(rel_diff(swapped, two)))
            });
        c.record_result(&name, r);
    }
    c
}

fn radial_oracle() -> Check {
    let mut c = Check::new("radial oracle vs closed forms", 1e-6);
    let cases = [
        (coulomb(1.0), 3, 0, 0),
        (coulomb(0.7), 3, 1, 2),
        (coulomb(1.0), 2, 0, 1),
        (harmonic(1.5), 3, 1, 1),
        (harmonic(0.5), 1, 2, 1),
        (linear(1.0), 3, 0, 0),
        (linear(2.0), 1, 1, 1),
    ];
    for (v, d, n, l) in cases {
        let r = closed_form_two_body(0.5, &v, dim(d), n, l).and_then(|exact| {
            let num = radial_two_body(0.5, &v, dim(d), n, l)?;
            Ok(rel_diff(num.energy, exact.energy))
        });
        c.record_result(&format!("{v:?} D={d} n={n} l={l}"), r);
    }
    c
}

fn monotone_in_q(cfg: &SolverConfig) -> Check {
    // deviation is the largest non-positive step, zero when increasing
    let mut c = Check::new("energy increasing in Q", 0.0);
    for v in [
        linear(1.0),
        coulomb(1.0),
        funnel(1.0, 0.5),
        pot(&[(1.0, 0.5)]),
    ] {
        for n in [2, 3, 10] {
            let mut last = f64::NEG_INFINITY;
            for step in 0..=4 {
                let q = (n - 1) as f64 * 1.5 + 0.5 * step as f64;
                let r = GlobalQuantumNumber::new(q)
                    .and_then(|q| IdenticalSystemSpec::new(n, dim(3), nonrel(1.0), v.clone(), q))
                    .and_then(|s| solve_identical(&s, cfg))
                    .map(|sol| {
                        let d = if sol.energy > last {
                            0.0
                        } else {
                            1.0 + (last - sol.energy)
                        };
                        last = sol.energy;
                        d
                    });
                c.record_result(&format!("{v:?} N={n} Q={q}"), r);
            }
        }
    }
    c
}

fn q_additivity() -> Check {
    let mut c = Check::new("quantum number additivity", 0.0);
    for d in 1..=3 {
        for len_a in 1..=5u32 {
            for len_b in 1..=5u32 {
                let l_max = if d == 1 { 1 } else { 4 };
                let mk = |len: u32, seed: u32| {
                    QuantumNumbers::new(
                        (0..len)
                            .map(|i| ((i * 7 + seed) % 5, (i * 3 + seed) % l_max))
                            .collect(),
                    )
                };
                let (a, b) = (mk(len_a, 1), mk(len_b, 2));
                let q = |qn: &QuantumNumbers| {
                    global_quantum_number::<f64>(qn, dim(d)).map(|g| g.value())
                };
                let r = q(&a).and_then(|qa| {
                    let qb = q(&b)?;
                    Ok((q(&a.concat(&b))? - (qa + qb)).abs())
                });
                c.record_result(&format!("D={d} {a:?} {b:?}"), r);
            }
        }
    }
    c
}

/// Runs every check in a fixed order.
pub fn run_checks(cfg: &SolverConfig) -> Vec<Check> {
    vec![
        ho_identical(cfg),
        ho_two_species(cfg),
        routes_agree(cfg),
        aux_residuals(),
        fd_derivatives(),
        species_symmetry(cfg),
        radial_oracle(),
        monotone_in_q(cfg),
        q_additivity(),
    ]
}

pub fn cmd_validate(cfg: &SolverConfig, w: &mut dyn Write) -> Result<(), CliError> {
    let checks = run_checks(cfg);
    writeln!(
        w,
        "{:<32} {:>6} {:>10} {:>10}  status",
        "check", "cases", "worst", "tol"
    )?;
    for c in &checks {
        let status = match (&c.error, c.passed()) {
            (Some(e), _) => format!("FAIL ({e})"),
            (None, true) => "pass".to_string(),
            (None, false) => "FAIL".to_string(),
        };
        writeln!(
            w,
            "{:<32} {:>6} {:>10.2e} {:>10.2e}  {status}",
            c.name, c.cases, c.worst, c.tol
        )?;
    }
    let failed: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed())
        .map(|c| c.name.to_string())
        .collect();
    writeln!(w, "solver tol = {:e}", cfg.tol)?;
    writeln!(
        w,
        "result: {}/{} checks passed",
        checks.len() - failed.len(),
        checks.len()
    )?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Validation(failed))
    }
}
