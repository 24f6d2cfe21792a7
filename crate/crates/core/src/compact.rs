//! Solvers for the compact envelope-theory equations.
//!
//! Identical particles (`N` bodies, one momentum `p0` and one pair distance
//! `rho0`):
//!
//! ```text
//! E  = N T(p0) + C_N V(rho0)
//! N T'(p0) p0 = C_N V'(rho0) rho0
//! Q(N) = sqrt(C_N) p0 rho0
//! ```
//!
//! Two species: the energy, three virial equations and three quantization
//! conditions in the six means `p_a, p_b, r_aa, r_bb, P0, R0`, with
//! `p'_a^2 = p_a^2 + P0^2/N_a^2`, `p'_b` likewise and
//! `r'_0^2 = (N_a-1)/(2N_a) r_aa^2 + (N_b-1)/(2N_b) r_bb^2 + R0^2`.
//!
//! In every set the quantization conditions eliminate the distances, so the
//! identical and two-body cases reduce to one scalar equation in a momentum
//! and the two-species cases to a 3- (or 2-) dimensional system solved by
//! damped Newton in log variables.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::laws::{KineticLaw, PotentialLaw};
use crate::model::{pair_count, IdenticalSystemSpec, Mean, Method, Solution, TwoSpeciesSystemSpec};
use crate::numeric::{brent, damped_newton, log_grid_brackets, max_norm, span_steps};
use crate::Real;

/// Tolerances and iteration limits of the compact solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Bound on the max-norm of the scaled residuals.
    pub tol: T,
    pub max_iter: usize,
    /// Ratio between consecutive points of the geometric bracketing grid.
    pub bracket_growth: T,
    /// Initial Newton step length; halved on overshoot.
    pub damping: T,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-10).max(T::epsilon() * T::lit(64.0)),
            max_iter: 200,
            bracket_growth: T::lit(2.0),
            damping: T::one(),
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > T::zero()) || !self.tol.is_finite() {
            return Err(Error::InvalidInput(format!(
                "tol must be > 0, got {}",
                self.tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be >= 1".into()));
        }
        if !(self.bracket_growth > T::one()) || !self.bracket_growth.is_finite() {
            return Err(Error::InvalidInput(format!(
                "bracket_growth must be > 1, got {}",
                self.bracket_growth
            )));
        }
        if !(self.damping > T::zero() && self.damping <= T::one()) {
            return Err(Error::InvalidInput(format!(
                "damping must lie in (0, 1], got {}",
                self.damping
            )));
        }
        Ok(())
    }
}

fn scaled<T: Real>(lhs: T, rhs_terms: &[T]) -> T {
    let rhs = rhs_terms.iter().fold(T::zero(), |s, t| s + *t);
    let scale = rhs_terms.iter().fold(lhs.abs(), |s, t| s + t.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (lhs - rhs) / scale
    }
}

struct Root1d<T> {
    x: T,
    energy: T,
    residual: T,
    iterations: usize,
    ambiguous: bool,
}

/// Scans a geometric grid centred on 1 for sign changes of the scaled
/// residual returned by `f` (as `(residual, energy)`), refines each with
/// Brent and keeps the lowest-energy root.
fn solve_scalar<T: Real, F: Fn(T) -> Option<(T, T)>>(
    f: F,
    cfg: &SolverConfig<T>,
    what: &str,
) -> Result<Root1d<T>> {
    let residual = |x: T| f(x).map(|v| v.0);
    let brackets = log_grid_brackets(
        residual,
        T::one(),
        cfg.bracket_growth,
        span_steps(cfg.bracket_growth),
    );
    if brackets.is_empty() {
        return Err(Error::NoSolution(format!(
            "{what}: no sign change of the virial equation (non-binding system?)"
        )));
    }
    let mut roots = Vec::with_capacity(brackets.len());
    let mut last_err = None;
    for (lo, hi, flo, fhi) in &brackets {
        let refined = if lo == hi {
            Ok((*lo, 0))
        } else {
            brent(
                |x| residual(x).unwrap_or_else(T::nan),
                *lo,
                *hi,
                *flo,
                *fhi,
                cfg.max_iter,
            )
        };
        match refined {
            Ok((x, it)) => {
                if let Some((res, energy)) = f(x) {
                    roots.push(Root1d {
                        x,
                        energy,
                        residual: res.abs(),
                        iterations: it,
                        ambiguous: false,
                    });
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    let ambiguous = roots.len() > 1;
    let best = roots.into_iter().min_by(|a, b| {
        a.energy
            .partial_cmp(&b.energy)
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    match best {
        Some(mut r) => {
            if r.residual > cfg.tol {
                return Err(Error::NoConvergence {
                    iterations: r.iterations,
                    residual: r.residual.to_f64().unwrap_or(f64::NAN),
                    residuals: vec![r.residual.to_f64().unwrap_or(f64::NAN)],
                });
            }
            r.ambiguous = ambiguous;
            Ok(r)
        }
        None => Err(last_err.unwrap_or_else(|| Error::NoSolution(what.into()))),
    }
}

/// `(scaled virial residual, energy)` of `n` identical bodies at momentum
/// `p`, with the distance fixed by quantization.
fn identical_equation<T: Real>(
    n: T,
    c: T,
    q: T,
    kinetic: &KineticLaw<T>,
    potential: &PotentialLaw<T>,
    p: T,
) -> Option<(T, T)> {
    let rho = q / (c.sqrt() * p);
    let lhs = n * kinetic.derivative(p) * p;
    let rhs = c * potential.derivative(rho) * rho;
    let energy = n * kinetic.value(p) + c * potential.value(rho);
    let res = scaled(lhs, &[rhs]);
    (res.is_finite() && energy.is_finite()).then_some((res, energy))
}

/// Solves the three compact equations for `N` identical particles.
pub fn solve_identical<T: Real>(
    spec: &IdenticalSystemSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<Solution<T>> {
    spec.validate()?;
    cfg.validate()?;
    let n = T::count(spec.n);
    let c = T::count(spec.pairs());
    let q = spec.q.value();
    let root = solve_scalar(
        |p| identical_equation(n, c, q, &spec.kinetic, &spec.potential, p),
        cfg,
        "identical system",
    )?;
    let p0 = root.x;
    let rho0 = q / (c.sqrt() * p0);
    Ok(Solution {
        energy: n * spec.kinetic.value(p0) + c * spec.potential.value(rho0),
        means: BTreeMap::from([(Mean::P0, p0), (Mean::Rho0, rho0)]),
        residual_norm: root.residual,
        iterations: root.iterations,
        method: Method::CompactIdentical,
        ambiguous: root.ambiguous,
    })
}

/// Residuals `[energy, virial, quantization]` (left minus right) of a
/// candidate identical-particle solution carrying `energy`, `p0` and `rho0`.
pub fn residuals_identical<T: Real>(
    spec: &IdenticalSystemSpec<T>,
    candidate: &Solution<T>,
) -> Result<Vec<T>> {
    let get = |m: Mean| {
        candidate
            .mean(m)
            .ok_or_else(|| Error::InvalidInput(format!("candidate lacks mean {m}")))
    };
    let (p0, rho0) = (get(Mean::P0)?, get(Mean::Rho0)?);
    let n = T::count(spec.n);
    let c = T::count(spec.pairs());
    Ok(vec![
        candidate.energy - (n * spec.kinetic.value(p0) + c * spec.potential.value(rho0)),
        n * spec.kinetic.derivative(p0) * p0 - c * spec.potential.derivative(rho0) * rho0,
        spec.q.value() - c.sqrt() * p0 * rho0,
    ])
}

/// All means of a two-species configuration, derived from the momenta with
/// the quantization conditions imposed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoSpeciesState<T> {
    pub p_a: T,
    pub p_b: T,
    pub big_p: T,
    /// Zero when `n_a = 1`.
    pub r_aa: T,
    /// Zero when `n_b = 1`.
    pub r_bb: T,
    pub big_r: T,
    pub p_prime_a: T,
    pub p_prime_b: T,
    pub r_prime_0: T,
}

struct Counts<T> {
    na: T,
    nb: T,
    ca: T,
    cb: T,
    a_internal: bool,
    b_internal: bool,
}

impl<T: Real> Counts<T> {
    fn of(spec: &TwoSpeciesSystemSpec<T>) -> Self {
        Self {
            na: T::count(spec.n_a),
            nb: T::count(spec.n_b),
            ca: T::count(pair_count(spec.n_a)),
            cb: T::count(pair_count(spec.n_b)),
            a_internal: spec.n_a >= 2,
            b_internal: spec.n_b >= 2,
        }
    }
}

impl<T: Real> TwoSpeciesState<T> {
    /// Momenta are the independent variables; `p_a` (`p_b`) is ignored and
    /// taken as zero for a single particle of type `a` (`b`).
    pub fn from_momenta(spec: &TwoSpeciesSystemSpec<T>, p_a: T, p_b: T, big_p: T) -> Self {
        let k = Counts::of(spec);
        let two = T::lit(2.0);
        let p_a = if k.a_internal { p_a } else { T::zero() };
        let p_b = if k.b_internal { p_b } else { T::zero() };
        let r_aa = if k.a_internal {
            spec.qa() / (k.ca.sqrt() * p_a)
        } else {
            T::zero()
        };
        let r_bb = if k.b_internal {
            spec.qb() / (k.cb.sqrt() * p_b)
        } else {
            T::zero()
        };
        Self::assemble(&k, p_a, p_b, big_p, r_aa, r_bb, spec.qrel() / big_p, two)
    }

    /// Distances are the independent variables; momenta follow from the
    /// quantization conditions.
    pub fn from_distances(spec: &TwoSpeciesSystemSpec<T>, r_aa: T, r_bb: T, big_r: T) -> Self {
        let k = Counts::of(spec);
        let two = T::lit(2.0);
        let r_aa = if k.a_internal { r_aa } else { T::zero() };
        let r_bb = if k.b_internal { r_bb } else { T::zero() };
        let p_a = if k.a_internal {
            spec.qa() / (k.ca.sqrt() * r_aa)
        } else {
            T::zero()
        };
        let p_b = if k.b_internal {
            spec.qb() / (k.cb.sqrt() * r_bb)
        } else {
            T::zero()
        };
        Self::assemble(&k, p_a, p_b, spec.qrel() / big_r, r_aa, r_bb, big_r, two)
    }

    #[allow(clippy::too_many_arguments)]
    fn assemble(
        k: &Counts<T>,
        p_a: T,
        p_b: T,
        big_p: T,
        r_aa: T,
        r_bb: T,
        big_r: T,
        two: T,
    ) -> Self {
        let p_prime_a = (p_a * p_a + big_p * big_p / (k.na * k.na)).sqrt();
        let p_prime_b = (p_b * p_b + big_p * big_p / (k.nb * k.nb)).sqrt();
        let r_prime_0 = ((k.na - T::one()) / (two * k.na) * r_aa * r_aa
            + (k.nb - T::one()) / (two * k.nb) * r_bb * r_bb
            + big_r * big_r)
            .sqrt();
        Self {
            p_a,
            p_b,
            big_p,
            r_aa,
            r_bb,
            big_r,
            p_prime_a,
            p_prime_b,
            r_prime_0,
        }
    }

    /// Energy `N_a T_a(p'_a) + N_b T_b(p'_b) + C_a V_aa(r_aa) + C_b V_bb(r_bb)
    /// + N_a N_b V_ab(r'_0)`.
    pub fn energy(&self, spec: &TwoSpeciesSystemSpec<T>) -> T {
        let k = Counts::of(spec);
        let mut e = k.na * spec.kinetic_a.value(self.p_prime_a)
            + k.nb * spec.kinetic_b.value(self.p_prime_b)
            + k.na * k.nb * spec.v_ab.value(self.r_prime_0);
        if k.a_internal {
            e += k.ca * spec.v_aa.value(self.r_aa);
        }
        if k.b_internal {
            e += k.cb * spec.v_bb.value(self.r_bb);
        }
        e
    }

    /// Left side and right-side terms of the virial equations for species
    /// `a`, species `b` and the relative motion.
    fn virial_terms(&self, spec: &TwoSpeciesSystemSpec<T>) -> [(T, [T; 2]); 3] {
        let k = Counts::of(spec);
        let dta = spec.kinetic_a.derivative(self.p_prime_a);
        let dtb = spec.kinetic_b.derivative(self.p_prime_b);
        let dvab = spec.v_ab.derivative(self.r_prime_0);
        let va = if k.a_internal {
            (
                k.na * dta * self.p_a * self.p_a / self.p_prime_a,
                [
                    k.ca * spec.v_aa.derivative(self.r_aa) * self.r_aa,
                    k.nb / k.na * k.ca * dvab * self.r_aa * self.r_aa / self.r_prime_0,
                ],
            )
        } else {
            (T::zero(), [T::zero(); 2])
        };
        let vb = if k.b_internal {
            (
                k.nb * dtb * self.p_b * self.p_b / self.p_prime_b,
                [
                    k.cb * spec.v_bb.derivative(self.r_bb) * self.r_bb,
                    k.na / k.nb * k.cb * dvab * self.r_bb * self.r_bb / self.r_prime_0,
                ],
            )
        } else {
            (T::zero(), [T::zero(); 2])
        };
        let p2 = self.big_p * self.big_p;
        let vrel = (
            dta * p2 / (k.na * self.p_prime_a) + dtb * p2 / (k.nb * self.p_prime_b),
            [
                k.na * k.nb * dvab * self.big_r * self.big_r / self.r_prime_0,
                T::zero(),
            ],
        );
        [va, vb, vrel]
    }

    /// Scaled virial residuals `[a, b, rel]`; entries of absent species are 0.
    pub fn scaled_virials(&self, spec: &TwoSpeciesSystemSpec<T>) -> [T; 3] {
        self.virial_terms(spec).map(|(lhs, rhs)| scaled(lhs, &rhs))
    }

    /// Raw virial residuals (left minus right) `[a, b, rel]`.
    pub fn virials(&self, spec: &TwoSpeciesSystemSpec<T>) -> [T; 3] {
        self.virial_terms(spec)
            .map(|(lhs, rhs)| lhs - rhs[0] - rhs[1])
    }

    fn means(&self, spec: &TwoSpeciesSystemSpec<T>) -> BTreeMap<Mean, T> {
        let mut m = BTreeMap::from([
            (Mean::PA, self.p_a),
            (Mean::PB, self.p_b),
            (Mean::PPrimeA, self.p_prime_a),
            (Mean::PPrimeB, self.p_prime_b),
            (Mean::RPrime0, self.r_prime_0),
            (Mean::BigP0, self.big_p),
            (Mean::BigR0, self.big_r),
        ]);
        if spec.n_a >= 2 {
            m.insert(Mean::RAA, self.r_aa);
        }
        if spec.n_b >= 2 {
            m.insert(Mean::RBB, self.r_bb);
        }
        m
    }
}

/// Residuals `[energy, virial_a, virial_b, virial_rel, quant_a, quant_b,
/// quant_rel]` (left minus right) of a two-species candidate. Missing `p_a`,
/// `p_b`, `r_aa` or `r_bb` are read as zero; the primed means are recomputed
/// from the six primary means.
pub fn residuals_two_species<T: Real>(
    spec: &TwoSpeciesSystemSpec<T>,
    candidate: &Solution<T>,
) -> Result<Vec<T>> {
    let opt = |m: Mean| candidate.mean(m).unwrap_or_else(T::zero);
    let big_p = candidate
        .mean(Mean::BigP0)
        .ok_or_else(|| Error::InvalidInput("candidate lacks mean P0".into()))?;
    let big_r = candidate
        .mean(Mean::BigR0)
        .ok_or_else(|| Error::InvalidInput("candidate lacks mean R0".into()))?;
    let k = Counts::of(spec);
    let (p_a, p_b, r_aa, r_bb) = (opt(Mean::PA), opt(Mean::PB), opt(Mean::RAA), opt(Mean::RBB));
    let state = TwoSpeciesState::assemble(&k, p_a, p_b, big_p, r_aa, r_bb, big_r, T::lit(2.0));
    let [va, vb, vrel] = state.virials(spec);
    Ok(vec![
        candidate.energy - state.energy(spec),
        va,
        vb,
        vrel,
        spec.qa() - k.ca.sqrt() * p_a * r_aa,
        spec.qb() - k.cb.sqrt() * p_b * r_bb,
        spec.qrel() - big_p * big_r,
    ])
}

/// Two-species solver. Dispatches to [`solve_na_plus_one`] when one species
/// has a single particle and to [`solve_two_body`] when both do.
pub fn solve_two_species<T: Real>(
    spec: &TwoSpeciesSystemSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<Solution<T>> {
    spec.validate()?;
    cfg.validate()?;
    match (spec.n_a, spec.n_b) {
        (1, 1) => solve_two_body(spec, cfg),
        (_, 1) => solve_na_plus_one(spec, cfg),
        (1, _) => Ok(solve_na_plus_one(&spec.swapped(), cfg)?.swap_species()),
        _ => solve_momenta(spec, cfg, Method::CompactTwoSpecies),
    }
}

/// Five-equation set for `N_a + 1` particles (`n_b = 1`, `n_a >= 2`). The
/// single particle has `p_b = 0` and `p'_b = P0`.
pub fn solve_na_plus_one<T: Real>(
    spec: &TwoSpeciesSystemSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<Solution<T>> {
    spec.validate()?;
    cfg.validate()?;
    if spec.n_b != 1 || spec.n_a < 2 {
        return Err(Error::InvalidInput(format!(
            "N_a + 1 solver needs n_b = 1 and n_a >= 2, got ({}, {})",
            spec.n_a, spec.n_b
        )));
    }
    solve_momenta(spec, cfg, Method::CompactNaPlusOne)
}

/// Two-body equations `T'_a(P0) P0 + T'_b(P0) P0 = V'_ab(R0) R0`,
/// `Q(2) = P0 R0`.
pub fn solve_two_body<T: Real>(
    spec: &TwoSpeciesSystemSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<Solution<T>> {
    spec.validate()?;
    cfg.validate()?;
    if spec.n_a != 1 || spec.n_b != 1 {
        return Err(Error::InvalidInput(format!(
            "two-body solver needs n_a = n_b = 1, got ({}, {})",
            spec.n_a, spec.n_b
        )));
    }
    let q = spec.qrel();
    let eval = |p: T| {
        let r = q / p;
        let lhs = (spec.kinetic_a.derivative(p) + spec.kinetic_b.derivative(p)) * p;
        let rhs = spec.v_ab.derivative(r) * r;
        let energy = spec.kinetic_a.value(p) + spec.kinetic_b.value(p) + spec.v_ab.value(r);
        let res = scaled(lhs, &[rhs]);
        (res.is_finite() && energy.is_finite()).then_some((res, energy))
    };
    let root = solve_scalar(eval, cfg, "two-body system")?;
    let big_p = root.x;
    let big_r = q / big_p;
    Ok(Solution {
        energy: spec.kinetic_a.value(big_p) + spec.kinetic_b.value(big_p) + spec.v_ab.value(big_r),
        // with one particle per species p'_a = p'_b = P0 and r'_0 = R0
        means: TwoSpeciesState::from_momenta(spec, T::zero(), T::zero(), big_p).means(spec),
        residual_norm: root.residual,
        iterations: root.iterations,
        method: Method::CompactTwoBody,
        ambiguous: root.ambiguous,
    })
}

/// Which momenta are unknowns: `p_a` when `n_a >= 2`, `p_b` when `n_b >= 2`,
/// and always `P0`.
struct Layout {
    a: bool,
    b: bool,
}

impl Layout {
    fn unpack<T: Real>(&self, x: &[T]) -> (T, T, T) {
        let mut it = x.iter().map(|v| v.exp());
        let p_a = if self.a {
            it.next().unwrap()
        } else {
            T::zero()
        };
        let p_b = if self.b {
            it.next().unwrap()
        } else {
            T::zero()
        };
        (p_a, p_b, it.next().unwrap())
    }

    fn pack<T: Real>(&self, p_a: T, p_b: T, big_p: T) -> Vec<T> {
        let mut v = Vec::with_capacity(3);
        if self.a {
            v.push(p_a.ln());
        }
        if self.b {
            v.push(p_b.ln());
        }
        v.push(big_p.ln());
        v
    }

    fn select<T: Real>(&self, r: [T; 3]) -> Vec<T> {
        let mut v = Vec::with_capacity(3);
        if self.a {
            v.push(r[0]);
        }
        if self.b {
            v.push(r[1]);
        }
        v.push(r[2]);
        v
    }
}

fn seed_species<T: Real>(
    n: u64,
    q: T,
    kinetic: &KineticLaw<T>,
    potential: &PotentialLaw<T>,
    cfg: &SolverConfig<T>,
) -> T {
    if n < 2 {
        return T::zero();
    }
    let nn = T::count(n);
    let c = T::count(pair_count(n));
    solve_scalar(
        |p| identical_equation(nn, c, q, kinetic, potential, p),
        cfg,
        "seed",
    )
    .map(|r| r.x)
    .unwrap_or_else(|_| T::one())
}

fn solve_momenta<T: Real>(
    spec: &TwoSpeciesSystemSpec<T>,
    cfg: &SolverConfig<T>,
    method: Method,
) -> Result<Solution<T>> {
    let layout = Layout {
        a: spec.n_a >= 2,
        b: spec.n_b >= 2,
    };
    let residual = |x: &[T]| -> Option<Vec<T>> {
        let (p_a, p_b, big_p) = layout.unpack(x);
        let s = TwoSpeciesState::from_momenta(spec, p_a, p_b, big_p);
        let r = layout.select(s.scaled_virials(spec));
        r.iter().all(|v| v.is_finite()).then_some(r)
    };

    // decoupled seeds: each species alone, then the relative motion
    let p_a = seed_species(spec.n_a, spec.qa(), &spec.kinetic_a, &spec.v_aa, cfg);
    let p_b = seed_species(spec.n_b, spec.qb(), &spec.kinetic_b, &spec.v_bb, cfg);
    let big_p = solve_scalar(
        |p| {
            let s = TwoSpeciesState::from_momenta(spec, p_a, p_b, p);
            let r = s.scaled_virials(spec)[2];
            let e = s.energy(spec);
            (r.is_finite() && e.is_finite()).then_some((r, e))
        },
        cfg,
        "relative-motion seed",
    )
    .map(|r| r.x)
    .unwrap_or_else(|_| T::one());
    let x0 = layout.pack(p_a, p_b, big_p);

    let max_step = T::lit(2.0);
    let mut out = damped_newton(&residual, &x0, cfg.tol, cfg.max_iter, cfg.damping, max_step);
    let mut iterations = out.iterations;
    if !out.converged {
        // coordinate-wise bracketing sweeps, then Newton again
        let x = coordinate_sweeps(&residual, out.x.clone(), cfg);
        let retry = damped_newton(&residual, &x, cfg.tol, cfg.max_iter, cfg.damping, max_step);
        iterations += retry.iterations;
        if retry.residual < out.residual {
            out = retry;
        }
    }
    if !out.converged {
        let res = residual(&out.x).unwrap_or_default();
        return Err(Error::NoConvergence {
            iterations,
            residual: out.residual.to_f64().unwrap_or(f64::NAN),
            residuals: res.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
        });
    }
    let (p_a, p_b, big_p) = layout.unpack(&out.x);
    let state = TwoSpeciesState::from_momenta(spec, p_a, p_b, big_p);
    Ok(Solution {
        energy: state.energy(spec),
        means: state.means(spec),
        residual_norm: out.residual,
        iterations,
        method,
        ambiguous: false,
    })
}

/// Gauss-Seidel style sweeps: equation `i` is solved for unknown `i` by
/// bracketing in log space, the root nearest the current value being kept.
fn coordinate_sweeps<T: Real, F: Fn(&[T]) -> Option<Vec<T>>>(
    f: &F,
    mut x: Vec<T>,
    cfg: &SolverConfig<T>,
) -> Vec<T> {
    let step = cfg.bracket_growth.ln();
    let k_max = span_steps(cfg.bracket_growth);
    for _ in 0..cfg.max_iter.min(50) {
        for i in 0..x.len() {
            let centre = x[i];
            let component = |t: T| {
                let mut y = x.clone();
                y[i] = t;
                f(&y).map(|r| r[i])
            };
            let mut best: Option<T> = None;
            let mut prev: Option<(T, T)> = None;
            for k in -k_max..=k_max {
                let t = centre + step * T::from_i32(k).unwrap();
                let v = component(t);
                if let (Some((pt, pv)), Some(v)) = (prev, v) {
                    if (pv < T::zero()) != (v < T::zero()) {
                        if let Ok((root, _)) = brent(
                            |s| component(s).unwrap_or_else(T::nan),
                            pt,
                            t,
                            pv,
                            v,
                            cfg.max_iter,
                        ) {
                            if best.is_none_or(|b| (root - centre).abs() < (b - centre).abs()) {
                                best = Some(root);
                            }
                        }
                    }
                }
                prev = v.map(|v| (t, v));
            }
            if let Some(b) = best {
                x[i] = b;
            }
        }
        if f(&x).is_some_and(|r| max_norm(&r) <= cfg.tol) {
            break;
        }
    }
    x
}
