//! Acceptance suite: one line per criterion, non-zero exit if any fails.
//!
//! Run with `cargo test -p envelope-core --test acceptance` (add
//! `--release` for representative timings).

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use envelope_core::compact::{
    solve_identical, solve_na_plus_one, solve_two_body, solve_two_species,
};
use envelope_core::extremization::extremize;
use envelope_core::laws::{KineticLaw, PotentialLaw, PowerTerm};
use envelope_core::model::{boson_ground_q, GlobalQuantumNumber, Mean, TwoSpeciesBuilder};
use envelope_core::oracle::{exact_ho_energy, exact_ho_identical, radial_two_body};
use envelope_core::{Dimension, IdenticalSystemSpec, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

const HO_IDENTICAL_TOL: f64 = 1e-10;
const HO_IDENTICAL_TIME: Duration = Duration::from_millis(10);
const HO_TWO_SPECIES_TOL: f64 = 1e-10;
const ROUTE_AGREEMENT_TOL: f64 = 1e-8;
const REDUCTION_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-10;
const ORACLE_ACCURACY: f64 = 1e-6;
const AUX_RESIDUAL_TOL: f64 = 1e-10;
const AUX_SAMPLES: usize = 1000;
const COST_RATIO_LIMIT: f64 = 2.0;
const COST_REPEATS: usize = 50;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn failure(detail: impl ToString) -> Outcome {
    outcome(false, detail.to_string())
}

fn dim(d: u32) -> Dimension {
    Dimension::new(d).unwrap()
}

fn ho_identical() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let cfg = SolverConfig::default();
    let (mut worst, mut slowest) = (0f64, Duration::ZERO);
    for _ in 0..20 {
        let n = rng.gen_range(2..=50);
        let d = dim(rng.gen_range(1..=3));
        let m = rng.gen_range(0.2..5.0);
        let k = rng.gen_range(0.05..3.0);
        let spec = IdenticalSystemSpec::ground(n, d, nonrel(m), harmonic(k)).unwrap();
        let start = Instant::now();
        let sol = match solve_identical(&spec, &cfg) {
            Ok(s) => s,
            Err(e) => return failure(format!("N={n} D={d}: {e}")),
        };
        slowest = slowest.max(start.elapsed());
        let exact = exact_ho_identical(&spec).unwrap().energy;
        worst = worst.max(rel_diff(sol.energy, exact));
    }
    outcome(
        worst <= HO_IDENTICAL_TOL && slowest < HO_IDENTICAL_TIME,
        format!(
            "20 specs, max rel err {worst:.2e} (tol {HO_IDENTICAL_TOL:e}), slowest {:.3} ms (limit {} ms)",
            slowest.as_secs_f64() * 1e3,
            HO_IDENTICAL_TIME.as_millis()
        ),
    )
}

fn ho_two_species() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let cfg = SolverConfig::default();
    let mut worst = 0f64;
    for _ in 0..10 {
        let (na, nb) = (rng.gen_range(1..=8), rng.gen_range(1..=8));
        let d = dim(rng.gen_range(1..=3));
        let spec = TwoSpeciesBuilder::new(
            na,
            nb,
            d,
            nonrel(rng.gen_range(0.2..5.0)),
            harmonic(rng.gen_range(0.1..3.0)),
        )
        .kinetic_b(nonrel(rng.gen_range(0.2..5.0)))
        .v_bb(harmonic(rng.gen_range(0.1..3.0)))
        .v_ab(harmonic(rng.gen_range(0.1..3.0)))
        .build()
        .unwrap();
        let sol = match solve_two_species(&spec, &cfg) {
            Ok(s) => s,
            Err(e) => return failure(format!("({na},{nb}) D={d}: {e}")),
        };
        let exact = exact_ho_energy(&spec).unwrap().energy;
        worst = worst.max(rel_diff(sol.energy, exact));
    }
    outcome(
        worst <= HO_TWO_SPECIES_TOL,
        format!("10 specs, max rel err {worst:.2e} (tol {HO_TWO_SPECIES_TOL:e})"),
    )
}

fn route_equivalence() -> Outcome {
    let cfg = SolverConfig::default();
    let mut worst = (0f64, "");
    let systems = battery();
    for (name, spec) in &systems {
        let compact = match solve_two_species(spec, &cfg) {
            Ok(s) => s,
            Err(e) => return failure(format!("{name}: compact route: {e}")),
        };
        let ext = match extremize(spec, &cfg) {
            Ok((s, _)) => s,
            Err(e) => return failure(format!("{name}: extremization route: {e}")),
        };
        let d = rel_diff(compact.energy, ext.energy);
        if d >= worst.0 {
            worst = (d, name);
        }
    }
    outcome(
        worst.0 <= ROUTE_AGREEMENT_TOL,
        format!(
            "{} systems, max rel diff {:.2e} on '{}' (tol {ROUTE_AGREEMENT_TOL:e})",
            systems.len(),
            worst.0,
            worst.1
        ),
    )
}

fn reductions() -> Outcome {
    let cfg = SolverConfig::default();
    let run = || -> envelope_core::Result<(f64, f64, f64)> {
        // (a) both species identical
        let mut sym = 0f64;
        for (na, nb, k, v) in [
            (2, 3, nonrel(1.0), linear(1.0)),
            (3, 3, relat(0.5), coulomb(0.3)),
            (2, 2, KineticLaw::UltraRelativistic, funnel(1.0, 0.2)),
        ] {
            let two = TwoSpeciesBuilder::new(na, nb, dim(3), k, v.clone()).build()?;
            let one = IdenticalSystemSpec::ground(na + nb, dim(3), k, v)?;
            let s2 = solve_two_species(&two, &cfg)?;
            let s1 = solve_identical(&one, &cfg)?;
            let r0 = s2.expect_mean(Mean::RPrime0);
            sym = sym
                .max(rel_diff(s2.energy, s1.energy))
                .max(rel_diff(
                    s2.expect_mean(Mean::PPrimeA),
                    s2.expect_mean(Mean::PPrimeB),
                ))
                .max(rel_diff(s2.expect_mean(Mean::RAA), r0))
                .max(rel_diff(s2.expect_mean(Mean::RBB), r0));
        }
        // (b) a single b particle goes through the N_a + 1 set with p_b = 0
        let spec = TwoSpeciesBuilder::new(4, 1, dim(3), nonrel(1.0), linear(1.0))
            .kinetic_b(relat(2.0))
            .v_ab(funnel(0.7, 0.3))
            .build()?;
        let dispatched = solve_two_species(&spec, &cfg)?;
        let direct = solve_na_plus_one(&spec, &cfg)?;
        let na1 = rel_diff(dispatched.energy, direct.energy)
            .max(dispatched.expect_mean(Mean::PB).abs())
            .max(rel_diff(
                dispatched.expect_mean(Mean::PPrimeB),
                dispatched.expect_mean(Mean::BigP0),
            ));
        // (c) one particle of each kind
        let spec = TwoSpeciesBuilder::new(1, 1, dim(3), nonrel(1.0), linear(1.0))
            .kinetic_b(nonrel(3.0))
            .build()?;
        let two_body = rel_diff(
            solve_two_species(&spec, &cfg)?.energy,
            solve_two_body(&spec, &cfg)?.energy,
        );
        Ok((sym, na1, two_body))
    };
    match run() {
        Ok((a, b, c)) => outcome(
            a <= REDUCTION_TOL && b <= REDUCTION_TOL && c <= REDUCTION_TOL,
            format!("symmetric {a:.2e}, N_a+1 {b:.2e}, two-body {c:.2e} (tol {REDUCTION_TOL:e})"),
        ),
        Err(e) => failure(e),
    }
}

fn closed_forms() -> Outcome {
    let cfg = SolverConfig::default();
    let solve = |v: PotentialLaw<f64>| {
        let spec = TwoSpeciesBuilder::new(1, 1, dim(3), nonrel(1.0), v)
            .q_rel(GlobalQuantumNumber::new(1.5).unwrap())
            .build()
            .unwrap();
        solve_two_species(&spec, &cfg).map(|s| s.energy)
    };
    let (c, l) = match (solve(coulomb(1.0)), solve(linear(1.0))) {
        (Ok(c), Ok(l)) => (c, l),
        (Err(e), _) | (_, Err(e)) => return failure(e),
    };
    let l_exact = 3.0 * 0.75f64.powf(2.0 / 3.0);
    let (dc, dl) = ((c + 1.0 / 9.0).abs(), (l - l_exact).abs());
    outcome(
        dc <= CLOSED_FORM_TOL && dl <= CLOSED_FORM_TOL,
        format!(
            "coulomb {c:.12} (err {dc:.1e}), linear {l:.12} vs {l_exact:.12} (err {dl:.1e}), tol {CLOSED_FORM_TOL:e}"
        ),
    )
}

fn bound_direction() -> Outcome {
    let cfg = SolverConfig::default();
    let mut sides = Vec::new();
    for (label, v) in [("coulomb", coulomb(1.0)), ("linear", linear(1.0))] {
        let mut signs = Vec::new();
        for k in 0..3u32 {
            let q = 1.5 + f64::from(k);
            let spec = TwoSpeciesBuilder::new(1, 1, dim(3), nonrel(1.0), v.clone())
                .q_rel(GlobalQuantumNumber::new(q).unwrap())
                .build()
                .unwrap();
            let et = match solve_two_species(&spec, &cfg) {
                Ok(s) => s.energy,
                Err(e) => return failure(format!("{label} Q={q}: {e}")),
            };
            // Q = 2n + l + 3/2 with n = 0
            let oracle = match radial_two_body(0.5, &v, dim(3), 0, k) {
                Ok(o) => o,
                Err(e) => return failure(format!("{label} l={k}: oracle: {e}")),
            };
            if oracle.est_accuracy > ORACLE_ACCURACY * oracle.energy.abs() {
                return failure(format!(
                    "{label} l={k}: oracle accuracy {:.1e} above {ORACLE_ACCURACY:e} relative",
                    oracle.est_accuracy
                ));
            }
            signs.push((et - oracle.energy).signum());
        }
        if signs.iter().any(|s| *s != signs[0]) {
            return failure(format!("{label}: ET minus oracle changes sign: {signs:?}"));
        }
        sides.push(format!(
            "{label} {}",
            if signs[0] > 0.0 { "above" } else { "below" }
        ));
    }
    outcome(
        true,
        format!("one-sided over Q = ground..ground+2: {}", sides.join(", ")),
    )
}

fn aux_residuals() -> Outcome {
    let mut rng = StdRng::seed_from_u64(7);
    let kinetics = [
        relat(1.0),
        relat(0.0),
        KineticLaw::UltraRelativistic,
        KineticLaw::power_law(0.7, 1.5).unwrap(),
        KineticLaw::power_law(2.0, 3.0).unwrap(),
    ];
    let potentials = [
        (linear(1.3), 0.0),
        (coulomb(0.8), 0.0),
        (PotentialLaw::power(1.0, 0.5).unwrap(), 0.0),
        (PotentialLaw::power(0.4, 3.0).unwrap(), 0.0),
        (PotentialLaw::power(-1.0, -0.5).unwrap(), 0.0),
        (funnel(1.0, 0.5), 0.0),
        // V'(r)/(2r) = k + a/(2r) > k
        (
            PotentialLaw::sum(vec![PowerTerm::new(0.5, 2.0), PowerTerm::new(1.0, 1.0)]).unwrap(),
            0.5,
        ),
    ];
    let mut worst = 0f64;
    let mut checked = 0;
    for i in 0..AUX_SAMPLES {
        let u: f64 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let k = &kinetics[i % kinetics.len()];
        let x = k.mass_floor() + u;
        let g = match k.aux_inverse(x) {
            Ok(g) => g,
            Err(e) => return failure(format!("G({x}) for {k:?}: {e}")),
        };
        worst = worst.max(rel_diff(k.derivative(g), g / x));
        let (v, floor) = &potentials[i % potentials.len()];
        let x = floor + u;
        let j = match v.aux_inverse(x) {
            Ok(j) => j,
            Err(e) => return failure(format!("J({x}) for {v:?}: {e}")),
        };
        worst = worst.max(rel_diff(v.derivative(j), 2.0 * x * j));
        checked += 2;
    }
    outcome(
        worst <= AUX_RESIDUAL_TOL,
        format!("{checked} samples, max rel residual {worst:.2e} (tol {AUX_RESIDUAL_TOL:e})"),
    )
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v[v.len() / 2]
}

fn n_independent_cost() -> Outcome {
    const BATCH: usize = 20;
    let cfg = SolverConfig::default();
    let small = IdenticalSystemSpec::ground(2, dim(3), nonrel(1.0), linear(1.0)).unwrap();
    let large = IdenticalSystemSpec::ground(100, dim(3), nonrel(1.0), linear(1.0)).unwrap();
    let time = |spec: &IdenticalSystemSpec| {
        let start = Instant::now();
        for _ in 0..BATCH {
            std::hint::black_box(solve_identical(std::hint::black_box(spec), &cfg).unwrap());
        }
        start.elapsed().as_secs_f64() / BATCH as f64
    };
    // warm-up, then interleave so that drifts hit both sizes alike
    time(&small);
    time(&large);
    let (mut ts, mut tl) = (Vec::new(), Vec::new());
    for _ in 0..COST_REPEATS {
        ts.push(time(&small));
        tl.push(time(&large));
    }
    let (ms, ml) = (median(ts), median(tl));
    let ratio = ml / ms;
    outcome(
        ratio <= COST_RATIO_LIMIT,
        format!(
            "median N=2 {:.2} us, N=100 {:.2} us, ratio {ratio:.2} (limit {COST_RATIO_LIMIT})",
            ms * 1e6,
            ml * 1e6
        ),
    )
}

fn q_additivity() -> Outcome {
    let mut cases = 0;
    for d in 1..=3 {
        let d = dim(d);
        for na in 1..=20u64 {
            for nb in 1..=20u64 {
                let lhs = boson_ground_q::<f64>(na, d).value()
                    + boson_ground_q::<f64>(nb, d).value()
                    + boson_ground_q::<f64>(2, d).value();
                let rhs = boson_ground_q::<f64>(na + nb, d).value();
                if lhs != rhs {
                    return failure(format!("N_a={na} N_b={nb} D={d}: {lhs} != {rhs}"));
                }
                cases += 1;
            }
        }
    }
    outcome(true, format!("{cases} cases, exact equality"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("HO exactness (identical)", ho_identical),
        ("HO exactness (two-species)", ho_two_species),
        ("compact vs extremization", route_equivalence),
        ("reduction identities", reductions),
        ("closed-form two-body values", closed_forms),
        ("bound direction vs radial oracle", bound_direction),
        ("auxiliary-function residuals", aux_residuals),
        ("N-independent cost", n_independent_cost),
        ("quantum-number additivity", q_additivity),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {}. {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
