#![allow(dead_code)]

use envelope_core::laws::{KineticLaw, PotentialLaw, PowerTerm};
use envelope_core::model::TwoSpeciesBuilder;
use envelope_core::{Dimension, TwoSpeciesSystemSpec};

pub fn d3() -> Dimension {
    Dimension::new(3).unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

pub fn nonrel(m: f64) -> KineticLaw<f64> {
    KineticLaw::non_relativistic(m).unwrap()
}

pub fn relat(m: f64) -> KineticLaw<f64> {
    KineticLaw::relativistic(m).unwrap()
}

pub fn linear(a: f64) -> PotentialLaw<f64> {
    PotentialLaw::linear(a).unwrap()
}

pub fn coulomb(alpha: f64) -> PotentialLaw<f64> {
    PotentialLaw::coulomb(alpha).unwrap()
}

pub fn harmonic(k: f64) -> PotentialLaw<f64> {
    PotentialLaw::harmonic(k).unwrap()
}

pub fn funnel(a: f64, alpha: f64) -> PotentialLaw<f64> {
    PotentialLaw::sum(vec![PowerTerm::new(a, 1.0), PowerTerm::new(-alpha, -1.0)]).unwrap()
}

/// Kinetic families x potential families x species counts. The
/// ultra-relativistic Coulomb pairing is left out: `p - alpha/r` has no
/// minimum, so neither route binds.
pub fn battery() -> Vec<(&'static str, TwoSpeciesSystemSpec)> {
    let ultra = KineticLaw::UltraRelativistic;
    let b = |na, nb, k, v| TwoSpeciesBuilder::new(na, nb, d3(), k, v);
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
    .into_iter()
    .map(|(name, s)| (name, s.unwrap()))
    .collect()
}
