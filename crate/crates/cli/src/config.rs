//! Flat `key = value` run configuration.
//!
//! ```text
//! # three bosons in a harmonic trap
//! system.kind = identical
//! system.dim = 3
//! species.a.count = 3
//! species.a.kinetic = nonrel
//! species.a.mass = 1
//! potential.aa.form = harmonic
//! potential.aa.coef = 0.5
//! ```
//!
//! Every key present must be consumed by the chosen system kind and law
//! forms; leftovers are reported as unknown.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use envelope_core::model::boson_ground_q;
use envelope_core::GlobalQuantumNumber;
use envelope_core::{Dimension, IdenticalSystemSpec, SolverConfig, TwoSpeciesSystemSpec};
use envelope_core::{KineticLaw, PotentialLaw, PowerTerm};

use crate::error::CliError;

/// Environment variable overriding the default solver tolerance.
pub const TOL_ENV: &str = "ET_SOLVER_TOL";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SystemKind {
    Identical,
    TwoSpecies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Output {
    Energy,
    Means,
    Residuals,
}

impl Output {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "energy" => Some(Self::Energy),
            "means" => Some(Self::Means),
            "residuals" => Some(Self::Residuals),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Species {
    pub count: u64,
    pub kinetic: KineticLaw,
}

/// Parsed system before validation, so that scans can vary counts, quantum
/// numbers and couplings and rebuild.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemDescription {
    pub kind: SystemKind,
    pub dim: u32,
    pub a: Species,
    pub b: Option<Species>,
    pub v_aa: Option<PotentialLaw>,
    pub v_bb: Option<PotentialLaw>,
    pub v_ab: Option<PotentialLaw>,
    /// Explicit `Q` of identical systems; boson ground state when absent.
    pub q: Option<f64>,
    pub q_a: Option<f64>,
    pub q_b: Option<f64>,
    pub q_rel: Option<f64>,
    /// Factor applied to the primary pair potential (`aa` for identical
    /// systems, `ab` otherwise).
    pub coupling: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum System {
    Identical(IdenticalSystemSpec),
    TwoSpecies(TwoSpeciesSystemSpec),
}

impl System {
    pub fn describe(&self) -> String {
        match self {
            System::Identical(s) => format!("identical N={} D={}", s.n, s.dim),
            System::TwoSpecies(s) => {
                format!("two-species N_a={} N_b={} D={}", s.n_a, s.n_b, s.dim)
            }
        }
    }
}

fn quantum(q: Option<f64>, n: u64, dim: Dimension) -> envelope_core::Result<GlobalQuantumNumber> {
    match q {
        Some(q) => GlobalQuantumNumber::new(q),
        None => Ok(boson_ground_q(n, dim)),
    }
}

fn missing(what: &str) -> envelope_core::Error {
    envelope_core::Error::InvalidInput(format!("{what} is required"))
}

impl SystemDescription {
    fn primary(&self) -> Option<&PotentialLaw> {
        match self.kind {
            SystemKind::Identical => self.v_aa.as_ref(),
            SystemKind::TwoSpecies => self.v_ab.as_ref(),
        }
    }

    fn coupled(&self) -> envelope_core::Result<PotentialLaw> {
        let v = self
            .primary()
            .ok_or_else(|| missing("primary pair potential"))?;
        if self.coupling == 1.0 {
            Ok(v.clone())
        } else {
            v.scaled(self.coupling)
        }
    }

    /// Validated spec for the current parameters.
    pub fn build(&self) -> envelope_core::Result<System> {
        let dim = Dimension::new(self.dim)?;
        match self.kind {
            SystemKind::Identical => {
                let q = quantum(self.q, self.a.count, dim)?;
                let spec = IdenticalSystemSpec::new(
                    self.a.count,
                    dim,
                    self.a.kinetic,
                    self.coupled()?,
                    q,
                )?;
                Ok(System::Identical(spec))
            }
            SystemKind::TwoSpecies => {
                let b = self.b.as_ref().ok_or_else(|| missing("species b"))?;
                let v_ab = self.coupled()?;
                // intra-species laws only matter when the species has pairs
                let intra = |v: &Option<PotentialLaw>, n: u64, key: &str| match v {
                    Some(v) => Ok(v.clone()),
                    None if n < 2 => Ok(v_ab.clone()),
                    None => Err(missing(key)),
                };
                let spec = TwoSpeciesSystemSpec {
                    n_a: self.a.count,
                    n_b: b.count,
                    dim,
                    kinetic_a: self.a.kinetic,
                    kinetic_b: b.kinetic,
                    v_aa: intra(&self.v_aa, self.a.count, "potential.aa")?,
                    v_bb: intra(&self.v_bb, b.count, "potential.bb")?,
                    v_ab: v_ab.clone(),
                    q_a: quantum(self.q_a, self.a.count, dim)?,
                    q_b: quantum(self.q_b, b.count, dim)?,
                    q_rel: quantum(self.q_rel, 2, dim)?,
                };
                spec.validate()?;
                Ok(System::TwoSpecies(spec))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverOverrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub bracket_growth: Option<f64>,
    pub damping: Option<f64>,
}

impl SolverOverrides {
    /// Default config, then `ET_SOLVER_TOL`, then the config file, then the
    /// command-line flags.
    pub fn resolve(
        &self,
        tol_flag: Option<f64>,
        max_iter_flag: Option<usize>,
    ) -> Result<SolverConfig, CliError> {
        let mut cfg = SolverConfig::default();
        if let Some(tol) = env_tol()? {
            cfg.tol = tol;
        }
        if let Some(t) = self.tol {
            cfg.tol = t;
        }
        if let Some(m) = self.max_iter {
            cfg.max_iter = m;
        }
        if let Some(g) = self.bracket_growth {
            cfg.bracket_growth = g;
        }
        if let Some(d) = self.damping {
            cfg.damping = d;
        }
        if let Some(t) = tol_flag {
            cfg.tol = t;
        }
        if let Some(m) = max_iter_flag {
            cfg.max_iter = m;
        }
        cfg.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

fn env_tol() -> Result<Option<f64>, CliError> {
    match std::env::var(TOL_ENV) {
        Ok(s) if !s.trim().is_empty() => s
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{TOL_ENV} = {s:?} is not a number"))),
        _ => Ok(None),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub system: SystemDescription,
    pub solver: SolverOverrides,
    pub outputs: Vec<Output>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        text.parse()
    }

    pub fn wants(&self, o: Output) -> bool {
        self.outputs.contains(&o)
    }
}

impl std::str::FromStr for RunConfig {
    type Err = CliError;

    fn from_str(text: &str) -> Result<Self, CliError> {
        let mut entries = Entries::parse(text)?;
        let cfg = RunConfig::from_entries(&mut entries)?;
        entries.finish()?;
        cfg.system
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }
}

struct Entry {
    line: usize,
    value: String,
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}", self.line)
    }
}

/// Raw key/value pairs; interpretation removes the keys it uses.
struct Entries(BTreeMap<String, Entry>);

fn bad(key: &str, e: &Entry, why: impl fmt::Display) -> CliError {
    CliError::Config(format!("{e}: {key} = {:?}: {why}", e.value))
}

impl Entries {
    fn parse(text: &str) -> Result<Self, CliError> {
        let mut map = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::Config(format!(
                    "line {}: expected `key = value`, got {raw:?}",
                    i + 1
                ))
            })?;
            let key = key.trim();
            if key.is_empty() || key.contains(char::is_whitespace) {
                return Err(CliError::Config(format!(
                    "line {}: malformed key {key:?}",
                    i + 1
                )));
            }
            let entry = Entry {
                line: i + 1,
                value: value.trim().to_string(),
            };
            if let Some(prev) = map.insert(key.to_string(), entry) {
                return Err(CliError::Config(format!(
                    "line {}: duplicate key {key} (first set on {prev})",
                    i + 1
                )));
            }
        }
        Ok(Self(map))
    }

    fn take_str(&mut self, key: &str) -> Option<(String, Entry)> {
        self.0.remove(key).map(|e| (e.value.clone(), e))
    }

    fn take<V: std::str::FromStr>(&mut self, key: &str) -> Result<Option<V>, CliError>
    where
        V::Err: fmt::Display,
    {
        match self.0.remove(key) {
            None => Ok(None),
            Some(e) => e.value.parse().map(Some).map_err(|err| bad(key, &e, err)),
        }
    }

    fn require<V: std::str::FromStr>(&mut self, key: &str) -> Result<V, CliError>
    where
        V::Err: fmt::Display,
    {
        self.take(key)?
            .ok_or_else(|| CliError::Config(format!("missing key {key}")))
    }

    fn finish(self) -> Result<(), CliError> {
        match self.0.iter().next() {
            None => Ok(()),
            Some((key, e)) => {
                let rest: Vec<&str> = self.0.keys().map(String::as_str).collect();
                Err(CliError::Config(format!(
                    "{e}: unknown or unused key {key} (unused: {})",
                    rest.join(", ")
                )))
            }
        }
    }
}

fn law_error(key: &str, e: envelope_core::Error) -> CliError {
    CliError::Config(format!("{key}: {e}"))
}

impl RunConfig {
    fn from_entries(en: &mut Entries) -> Result<Self, CliError> {
        let kind = match en.take_str("system.kind") {
            None => return Err(CliError::Config("missing key system.kind".into())),
            Some((v, e)) => match v.as_str() {
                "identical" => SystemKind::Identical,
                "two-species" => SystemKind::TwoSpecies,
                _ => return Err(bad("system.kind", &e, "expected identical or two-species")),
            },
        };
        let dim = en.take("system.dim")?.unwrap_or(3);
        let a = species(en, "a")?;
        let (b, v_aa, v_bb, v_ab, q, q_a, q_b, q_rel) = match kind {
            SystemKind::Identical => {
                let v = potential(en, "aa")?
                    .ok_or_else(|| CliError::Config("missing key potential.aa.form".into()))?;
                (
                    None,
                    Some(v),
                    None,
                    None,
                    en.take("quantum.q")?,
                    None,
                    None,
                    None,
                )
            }
            SystemKind::TwoSpecies => {
                let b = species(en, "b")?;
                let v_ab = potential(en, "ab")?
                    .ok_or_else(|| CliError::Config("missing key potential.ab.form".into()))?;
                (
                    Some(b),
                    potential(en, "aa")?,
                    potential(en, "bb")?,
                    Some(v_ab),
                    None,
                    en.take("quantum.q_a")?,
                    en.take("quantum.q_b")?,
                    en.take("quantum.q_rel")?,
                )
            }
        };
        let solver = SolverOverrides {
            tol: en.take("solver.tol")?,
            max_iter: en.take("solver.max_iter")?,
            bracket_growth: en.take("solver.bracket_growth")?,
            damping: en.take("solver.damping")?,
        };
        let outputs = match en.take_str("outputs") {
            None => vec![Output::Energy, Output::Means, Output::Residuals],
            Some((v, e)) => v
                .split(',')
                .map(|s| {
                    Output::parse(s.trim())
                        .ok_or_else(|| bad("outputs", &e, "expected energy, means or residuals"))
                })
                .collect::<Result<_, _>>()?,
        };
        Ok(Self {
            system: SystemDescription {
                kind,
                dim,
                a,
                b,
                v_aa,
                v_bb,
                v_ab,
                q,
                q_a,
                q_b,
                q_rel,
                coupling: 1.0,
            },
            solver,
            outputs,
        })
    }
}

fn species(en: &mut Entries, s: &str) -> Result<Species, CliError> {
    let key = |f: &str| format!("species.{s}.{f}");
    let count = en.require(&key("count"))?;
    let form = en.take_str(&key("kinetic"));
    let kinetic = match form.as_ref().map(|(v, _)| v.as_str()).unwrap_or("nonrel") {
        "nonrel" => KineticLaw::non_relativistic(en.require(&key("mass"))?),
        "rel" => KineticLaw::relativistic(en.require(&key("mass"))?),
        "ultra" => Ok(KineticLaw::UltraRelativistic),
        "power" => KineticLaw::power_law(en.require(&key("coef"))?, en.require(&key("exponent"))?),
        _ => {
            let (_, e) = form.expect("default form is known");
            return Err(bad(
                &key("kinetic"),
                &e,
                "expected nonrel, rel, ultra or power",
            ));
        }
    }
    .map_err(|e| law_error(&key("kinetic"), e))?;
    Ok(Species { count, kinetic })
}

fn potential(en: &mut Entries, pair: &str) -> Result<Option<PotentialLaw>, CliError> {
    let key = |f: &str| format!("potential.{pair}.{f}");
    let Some((form, entry)) = en.take_str(&key("form")) else {
        return Ok(None);
    };
    let v = match form.as_str() {
        "harmonic" => PotentialLaw::harmonic(en.require(&key("coef"))?),
        "linear" => PotentialLaw::linear(en.require(&key("coef"))?),
        "coulomb" => PotentialLaw::coulomb(en.require(&key("coef"))?),
        "power" => PotentialLaw::power(en.require(&key("coef"))?, en.require(&key("exponent"))?),
        "sum" => {
            let (text, e) = en
                .take_str(&key("terms"))
                .ok_or_else(|| CliError::Config(format!("missing key {}", key("terms"))))?;
            PotentialLaw::sum(parse_terms(&text).map_err(|why| bad(&key("terms"), &e, why))?)
        }
        _ => {
            return Err(bad(
                &key("form"),
                &entry,
                "expected harmonic, linear, coulomb, power or sum",
            ))
        }
    }
    .map_err(|e| law_error(&key("form"), e))?;
    Ok(Some(v))
}

/// `coef:exponent, coef:exponent, ...`
fn parse_terms(text: &str) -> Result<Vec<PowerTerm>, String> {
    text.split(',')
        .map(|t| {
            let (c, b) = t
                .split_once(':')
                .ok_or_else(|| format!("term {:?} is not coef:exponent", t.trim()))?;
            let num = |s: &str| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("{:?}: {e}", s.trim()))
            };
            Ok(PowerTerm::new(num(c)?, num(b)?))
        })
        .collect()
}
