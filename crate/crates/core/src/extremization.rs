//! Auxiliary-Hamiltonian route: the eigenvalue `E_ho + B` of the harmonic
//! auxiliary Hamiltonian is made stationary with respect to the auxiliary
//! masses `mu_a, mu_b` and spring constants `rho_aa, rho_bb, rho_ab`.
//!
//! The harmonic part decouples into the internal motion of each species and
//! the relative motion of the two centres of mass, with frequencies
//!
//! ```text
//! w_a^2   = 2 (N_a rho_aa + N_b rho_ab) / mu_a
//! w_b^2   = 2 (N_b rho_bb + N_a rho_ab) / mu_b
//! w_rel^2 = 2 rho_ab (N_b / mu_a + N_a / mu_b)
//! E_ho    = Q(N_a) w_a + Q(N_b) w_b + Q(2) w_rel
//! ```
//!
//! and `B` collects `N [T(G(mu)) - G^2/(2 mu)]` per species and
//! `C [V(J(rho)) - rho J^2]` per interaction. Because `G` and `J` are defined
//! by stationarity, `dB/dmu = N G^2/(2 mu^2)` and `dB/drho = -C J^2`, which
//! gives an exact gradient. This module never calls the compact solvers.

use std::collections::BTreeMap;

use crate::compact::SolverConfig;
use crate::error::{Error, Result};
use crate::laws::{KineticLaw, PotentialLaw};
use crate::model::{
    pair_count, AuxiliaryParameters, IdenticalSystemSpec, Mean, Method, Solution,
    TwoSpeciesSystemSpec,
};
use crate::numeric::{max_norm, solve_dense};
use crate::Real;

/// `E_ho`, `B` and their sum at one set of auxiliary parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryEnergyBreakdown<T> {
    pub e_ho: T,
    pub b: T,
    pub total: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Slot<T> {
    Absent,
    Pinned(T),
    Free { floor: T },
}

/// Either spec flattened into one two-species layout; identical particles
/// are `N_b = 0` with `Q(N_b) = Q(2) = 0`.
struct AuxProblem<'a, T> {
    na: T,
    nb: T,
    ca: T,
    cb: T,
    qa: T,
    qb: T,
    qrel: T,
    kin: [Option<&'a KineticLaw<T>>; 2],
    pot: [Option<&'a PotentialLaw<T>>; 3],
    slots: [Slot<T>; 5],
}

const MU_A: usize = 0;
const MU_B: usize = 1;
const RHO_AA: usize = 2;
const RHO_BB: usize = 3;
const RHO_AB: usize = 4;

fn kin_slot<T: Real>(k: Option<&KineticLaw<T>>) -> Slot<T> {
    match k {
        None => Slot::Absent,
        Some(k) => match k.pinned_mass() {
            Some(m) => Slot::Pinned(m),
            None => Slot::Free {
                floor: k.mass_floor(),
            },
        },
    }
}

fn pot_slot<T: Real>(v: Option<&PotentialLaw<T>>) -> Slot<T> {
    match v {
        None => Slot::Absent,
        Some(v) => match v.pinned_spring() {
            Some(k) => Slot::Pinned(k),
            None => Slot::Free { floor: T::zero() },
        },
    }
}

impl<'a, T: Real> AuxProblem<'a, T> {
    fn two_species(spec: &'a TwoSpeciesSystemSpec<T>) -> Self {
        let kin = [Some(&spec.kinetic_a), Some(&spec.kinetic_b)];
        let pot = [
            (spec.n_a >= 2).then_some(&spec.v_aa),
            (spec.n_b >= 2).then_some(&spec.v_bb),
            Some(&spec.v_ab),
        ];
        Self::assemble(
            spec.n_a,
            spec.n_b,
            spec.qa(),
            spec.qb(),
            spec.qrel(),
            kin,
            pot,
        )
    }

    fn identical(spec: &'a IdenticalSystemSpec<T>) -> Self {
        Self::assemble(
            spec.n,
            0,
            spec.q.value(),
            T::zero(),
            T::zero(),
            [Some(&spec.kinetic), None],
            [Some(&spec.potential), None, None],
        )
    }

    fn assemble(
        na: u64,
        nb: u64,
        qa: T,
        qb: T,
        qrel: T,
        kin: [Option<&'a KineticLaw<T>>; 2],
        pot: [Option<&'a PotentialLaw<T>>; 3],
    ) -> Self {
        let slots = [
            kin_slot(kin[0]),
            kin_slot(kin[1]),
            pot_slot(pot[0]),
            pot_slot(pot[1]),
            pot_slot(pot[2]),
        ];
        Self {
            na: T::count(na),
            nb: T::count(nb),
            ca: T::count(pair_count(na)),
            cb: T::count(pair_count(nb)),
            qa,
            qb,
            qrel,
            kin,
            pot,
            slots,
        }
    }

    /// Multiplicity of each slot in `B`.
    fn weight(&self, i: usize) -> T {
        [self.na, self.nb, self.ca, self.cb, self.na * self.nb][i]
    }

    /// `[w_a, w_b, w_rel]`.
    fn frequencies(&self, a: &[T; 5]) -> [T; 3] {
        let two = T::lit(2.0);
        let wa = if self.qa > T::zero() {
            (two * (self.na * a[RHO_AA] + self.nb * a[RHO_AB]) / a[MU_A]).sqrt()
        } else {
            T::zero()
        };
        let wb = if self.qb > T::zero() {
            (two * (self.nb * a[RHO_BB] + self.na * a[RHO_AB]) / a[MU_B]).sqrt()
        } else {
            T::zero()
        };
        let wrel = if self.qrel > T::zero() && self.nb > T::zero() {
            (two * a[RHO_AB] * (self.nb / a[MU_A] + self.na / a[MU_B])).sqrt()
        } else {
            T::zero()
        };
        [wa, wb, wrel]
    }

    fn harmonic(&self, a: &[T; 5]) -> (T, [T; 5]) {
        let two = T::lit(2.0);
        let [wa, wb, wrel] = self.frequencies(a);
        let mut g = [T::zero(); 5];
        if wa > T::zero() {
            let dw = self.qa / (two * wa);
            g[MU_A] -= dw * wa * wa / a[MU_A];
            g[RHO_AA] += dw * two * self.na / a[MU_A];
            g[RHO_AB] += dw * two * self.nb / a[MU_A];
        }
        if wb > T::zero() {
            let dw = self.qb / (two * wb);
            g[MU_B] -= dw * wb * wb / a[MU_B];
            g[RHO_BB] += dw * two * self.nb / a[MU_B];
            g[RHO_AB] += dw * two * self.na / a[MU_B];
        }
        if wrel > T::zero() {
            let dw = self.qrel / (two * wrel);
            g[MU_A] -= dw * two * a[RHO_AB] * self.nb / (a[MU_A] * a[MU_A]);
            g[MU_B] -= dw * two * a[RHO_AB] * self.na / (a[MU_B] * a[MU_B]);
            g[RHO_AB] += dw * two * (self.nb / a[MU_A] + self.na / a[MU_B]);
        }
        (self.qa * wa + self.qb * wb + self.qrel * wrel, g)
    }

    fn b_terms(&self, a: &[T; 5]) -> Result<(T, [T; 5])> {
        let two = T::lit(2.0);
        let mut b = T::zero();
        let mut g = [T::zero(); 5];
        for i in 0..5 {
            let w = self.weight(i);
            match self.slots[i] {
                Slot::Absent => {}
                Slot::Pinned(v) => {
                    let tol = T::lit(1e-12).max(T::epsilon() * T::lit(16.0));
                    if (a[i] - v).abs() > tol * v.abs() {
                        return Err(Error::DegenerateLaw(if i < 2 {
                            "quadratic kinetic law (mu must equal its pinned mass)"
                        } else {
                            "harmonic potential (rho must equal its coefficient)"
                        }));
                    }
                }
                Slot::Free { .. } if i < 2 => {
                    let k = self.kin[i].expect("free kinetic slot has a law");
                    let mu = a[i];
                    let gg = k.aux_inverse(mu)?;
                    b += w * (k.value(gg) - gg * gg / (two * mu));
                    g[i] = w * gg * gg / (two * mu * mu);
                }
                Slot::Free { .. } => {
                    let v = self.pot[i - 2].expect("free potential slot has a law");
                    let rho = a[i];
                    let j = v.aux_inverse(rho)?;
                    b += w * (v.value(j) - rho * j * j);
                    g[i] = -w * j * j;
                }
            }
        }
        Ok((b, g))
    }

    fn breakdown(&self, a: &[T; 5]) -> Result<(AuxiliaryEnergyBreakdown<T>, [T; 5])> {
        let (e_ho, gh) = self.harmonic(a);
        let (b, gb) = self.b_terms(a)?;
        let mut g = [T::zero(); 5];
        for i in 0..5 {
            if matches!(self.slots[i], Slot::Free { .. }) {
                g[i] = gh[i] + gb[i];
            }
        }
        Ok((
            AuxiliaryEnergyBreakdown {
                e_ho,
                b,
                total: e_ho + b,
            },
            g,
        ))
    }

    fn free(&self) -> Vec<(usize, T)> {
        self.slots
            .iter()
            .enumerate()
            .filter_map(|(i, s)| match s {
                Slot::Free { floor } => Some((i, *floor)),
                _ => None,
            })
            .collect()
    }

    /// Parameters with pinned slots filled and free slots from
    /// `theta = ln(alpha)`; `None` if a free slot is not above its floor.
    fn params(&self, free: &[(usize, T)], theta: &[T]) -> Option<[T; 5]> {
        let mut a = [T::zero(); 5];
        for (i, s) in self.slots.iter().enumerate() {
            if let Slot::Pinned(v) = s {
                a[i] = *v;
            }
        }
        for ((i, floor), t) in free.iter().zip(theta) {
            a[*i] = t.exp();
            if !(a[*i] > *floor) || !a[*i].is_finite() {
                return None;
            }
        }
        Some(a)
    }

    /// Gradient with respect to `theta` and the total energy.
    fn theta_gradient(&self, free: &[(usize, T)], theta: &[T]) -> Option<(Vec<T>, T, [T; 5])> {
        let a = self.params(free, theta)?;
        let (br, g) = self.breakdown(&a).ok()?;
        let gt: Vec<T> = free.iter().map(|(i, _)| g[*i] * a[*i]).collect();
        (br.total.is_finite() && gt.iter().all(|v| v.is_finite())).then_some((gt, br.total, a))
    }

    /// Candidate starting points: every mean distance set to `lambda` and
    /// every mean momentum to `1/lambda`, mapped to auxiliary parameters by
    /// the stationarity relations of `G` and `J`.
    fn seed_from_scale(&self, free: &[(usize, T)], lambda: T) -> Option<Vec<T>> {
        let p = T::one() / lambda;
        let two = T::lit(2.0);
        free.iter()
            .map(|&(i, floor)| {
                let alpha = if i < 2 {
                    let k = self.kin[i]?;
                    p / k.derivative(p)
                } else {
                    let v = self.pot[i - 2]?;
                    v.derivative(lambda) / (two * lambda)
                };
                (alpha > floor && alpha.is_finite()).then(|| alpha.ln())
            })
            .collect()
    }

    /// Means of the harmonic eigenstate from the virial theorem applied to
    /// each decoupled part.
    fn means(&self, a: &[T; 5]) -> BTreeMap<Mean, T> {
        let two = T::lit(2.0);
        let [wa, wb, wrel] = self.frequencies(a);
        let (ea, eb, erel) = (self.qa * wa, self.qb * wb, self.qrel * wrel);
        if self.nb == T::zero() {
            let p0 = (a[MU_A] * ea / self.na).sqrt();
            let rho0 = (ea / (two * self.ca * a[RHO_AA])).sqrt();
            return BTreeMap::from([(Mean::P0, p0), (Mean::Rho0, rho0)]);
        }
        let mut m = BTreeMap::new();
        let (mut p_a, mut p_b) = (T::zero(), T::zero());
        if self.ca > T::zero() {
            p_a = (a[MU_A] * ea / self.na).sqrt();
            let r_aa = (ea / (two * self.ca * (a[RHO_AA] + self.nb * a[RHO_AB] / self.na))).sqrt();
            m.insert(Mean::RAA, r_aa);
        }
        if self.cb > T::zero() {
            p_b = (a[MU_B] * eb / self.nb).sqrt();
            let r_bb = (eb / (two * self.cb * (a[RHO_BB] + self.na * a[RHO_AB] / self.nb))).sqrt();
            m.insert(Mean::RBB, r_bb);
        }
        let (ma, mb) = (self.na * a[MU_A], self.nb * a[MU_B]);
        let reduced = ma * mb / (ma + mb);
        let big_p = (reduced * erel).sqrt();
        let big_r = (erel / (two * self.na * self.nb * a[RHO_AB])).sqrt();
        let p_prime_a = (p_a * p_a + big_p * big_p / (self.na * self.na)).sqrt();
        let p_prime_b = (p_b * p_b + big_p * big_p / (self.nb * self.nb)).sqrt();
        let r_aa = m.get(&Mean::RAA).copied().unwrap_or_else(T::zero);
        let r_bb = m.get(&Mean::RBB).copied().unwrap_or_else(T::zero);
        let r_prime_0 = ((self.na - T::one()) / (two * self.na) * r_aa * r_aa
            + (self.nb - T::one()) / (two * self.nb) * r_bb * r_bb
            + big_r * big_r)
            .sqrt();
        m.extend([
            (Mean::PA, p_a),
            (Mean::PB, p_b),
            (Mean::PPrimeA, p_prime_a),
            (Mean::PPrimeB, p_prime_b),
            (Mean::RPrime0, r_prime_0),
            (Mean::BigP0, big_p),
            (Mean::BigR0, big_r),
        ]);
        m
    }

    fn extremize(
        &self,
        cfg: &SolverConfig<T>,
        seed: Option<&AuxiliaryParameters<T>>,
    ) -> Result<(Solution<T>, AuxiliaryParameters<T>)> {
        cfg.validate()?;
        let free = self.free();
        let theta0 = match seed {
            Some(s) => {
                let a = s.to_array();
                free.iter()
                    .map(|&(i, floor)| {
                        if a[i] > floor && a[i].is_finite() {
                            Ok(a[i].ln())
                        } else {
                            Err(Error::InvalidInput(format!(
                                "seed parameter {i} = {} not above its floor {floor}",
                                a[i]
                            )))
                        }
                    })
                    .collect::<Result<Vec<T>>>()?
            }
            None => self.scan_seed(&free)?,
        };
        let (theta, iterations) = self.newton(&free, theta0, cfg)?;
        let (_, energy, a) = self
            .theta_gradient(&free, &theta)
            .ok_or_else(|| Error::NoSolution("extremum left the parameter domain".into()))?;
        let (_, g) = self.breakdown(&a)?;
        let scale = T::one().max(energy.abs());
        let grad_norm = max_norm(&g) / scale;
        if grad_norm > cfg.tol {
            return Err(Error::NoConvergence {
                iterations,
                residual: grad_norm.to_f64().unwrap_or(f64::NAN),
                residuals: g.iter().map(|v| v.to_f64().unwrap_or(f64::NAN)).collect(),
            });
        }
        Ok((
            Solution {
                energy,
                means: self.means(&a),
                residual_norm: grad_norm,
                iterations,
                method: Method::Extremization,
                ambiguous: false,
            },
            AuxiliaryParameters::from_array(a),
        ))
    }

    /// Picks the scale whose seed has the lowest interior minimum of the
    /// energy along the scan; without one, the smallest normalised
    /// gradient.
    fn scan_seed(&self, free: &[(usize, T)]) -> Result<Vec<T>> {
        if free.is_empty() {
            return Ok(Vec::new());
        }
        let decades = if T::epsilon() < T::lit(1e-10) { 6 } else { 4 };
        let mut points: Vec<Option<(T, T, Vec<T>)>> = Vec::new();
        for k in -10 * decades..=10 * decades {
            let lambda = T::lit(10.0).powf(T::from_i32(k).unwrap() / T::lit(10.0));
            let point = self.seed_from_scale(free, lambda).and_then(|theta| {
                let (g, _, a) = self.theta_gradient(free, &theta)?;
                let (br, _) = self.breakdown(&a).ok()?;
                let scale = br.e_ho.abs() + br.b.abs();
                (scale > T::zero()).then(|| (br.total, max_norm(&g) / scale, theta))
            });
            points.push(point);
        }
        let mut best_min: Option<(T, usize)> = None;
        for i in 1..points.len().saturating_sub(1) {
            if let (Some(l), Some(c), Some(r)) = (&points[i - 1], &points[i], &points[i + 1]) {
                if c.0 <= l.0 && c.0 <= r.0 && best_min.is_none_or(|(e, _)| c.0 < e) {
                    best_min = Some((c.0, i));
                }
            }
        }
        if let Some((_, i)) = best_min {
            return Ok(points[i].take().unwrap().2);
        }
        points
            .into_iter()
            .flatten()
            .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
            .map(|(_, _, t)| t)
            .ok_or_else(|| {
                Error::NoSolution(
                    "no admissible starting point for the auxiliary parameters".into(),
                )
            })
    }

    /// Newton iteration on `grad_theta E = 0` with a finite-difference
    /// Hessian of the exact gradient; steps are damped until the gradient
    /// norm decreases.
    fn newton(
        &self,
        free: &[(usize, T)],
        mut theta: Vec<T>,
        cfg: &SolverConfig<T>,
    ) -> Result<(Vec<T>, usize)> {
        let n = free.len();
        if n == 0 {
            return Ok((theta, 0));
        }
        let h = T::lit(1e-5).max(T::epsilon().cbrt());
        let max_step = T::lit(3.0);
        let eval = |t: &[T]| self.theta_gradient(free, t);
        let converged = |a: &[T; 5], e: T| -> bool {
            self.breakdown(a)
                .map(|(_, g)| max_norm(&g) <= cfg.tol * T::one().max(e.abs()))
                .unwrap_or(false)
        };
        let (mut g, mut e, mut a) = eval(&theta)
            .ok_or_else(|| Error::NoSolution("starting point outside the domain".into()))?;
        let mut norm = max_norm(&g);
        let mut polish = 0;
        for iter in 1..=cfg.max_iter {
            if converged(&a, e) {
                polish += 1;
                if polish > 2 || norm == T::zero() {
                    return Ok((theta, iter - 1));
                }
            }
            let mut hess = vec![T::zero(); n * n];
            for j in 0..n {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[j] += h;
                tm[j] -= h;
                // one-sided next to the mass floor
                let column: Vec<T> = match (eval(&tp), eval(&tm)) {
                    (Some((gp, _, _)), Some((gm, _, _))) => gp
                        .iter()
                        .zip(&gm)
                        .map(|(p, m)| (*p - *m) / (h + h))
                        .collect(),
                    (Some((gp, _, _)), None) => {
                        gp.iter().zip(&g).map(|(p, c)| (*p - *c) / h).collect()
                    }
                    (None, Some((gm, _, _))) => {
                        g.iter().zip(&gm).map(|(c, m)| (*c - *m) / h).collect()
                    }
                    (None, None) => {
                        return Err(Error::NoSolution(
                            "Hessian stencil left the parameter domain".into(),
                        ))
                    }
                };
                for i in 0..n {
                    hess[i * n + j] = column[i];
                }
            }
            for i in 0..n {
                for j in 0..i {
                    let s = (hess[i * n + j] + hess[j * n + i]) * T::lit(0.5);
                    hess[i * n + j] = s;
                    hess[j * n + i] = s;
                }
            }
            let rhs: Vec<T> = g.iter().map(|v| -*v).collect();
            let mut step = match solve_dense(hess.clone(), rhs) {
                Some(s) => s,
                // singular Hessian: descend on |grad|^2 instead
                None => (0..n)
                    .map(|j| -(0..n).fold(T::zero(), |s, i| s + hess[i * n + j] * g[i]))
                    .collect(),
            };
            let len = max_norm(&step);
            if len > max_step {
                let s = max_step / len;
                step.iter_mut().for_each(|v| *v *= s);
            }
            let mut lambda = cfg.damping;
            let mut accepted = false;
            for _ in 0..60 {
                let trial: Vec<T> = theta
                    .iter()
                    .zip(&step)
                    .map(|(t, s)| *t + lambda * *s)
                    .collect();
                if let Some((gt, et, at)) = eval(&trial) {
                    let tn = max_norm(&gt);
                    if tn < norm {
                        theta = trial;
                        g = gt;
                        e = et;
                        a = at;
                        norm = tn;
                        accepted = true;
                        break;
                    }
                }
                lambda *= T::lit(0.5);
            }
            if !accepted {
                return Ok((theta, iter));
            }
        }
        Ok((theta, cfg.max_iter))
    }
}

fn check_params<T: Real>(a: &[T; 5]) -> Result<()> {
    if a.iter().any(|v| !v.is_finite() || *v < T::zero()) {
        return Err(Error::InvalidInput(format!(
            "auxiliary parameters must be finite and non-negative, got {a:?}"
        )));
    }
    Ok(())
}

/// Exact eigenvalue of the harmonic auxiliary Hamiltonian.
pub fn harmonic_eigenvalue<T: Real>(
    params: &AuxiliaryParameters<T>,
    spec: &TwoSpeciesSystemSpec<T>,
) -> Result<T> {
    let a = params.to_array();
    check_params(&a)?;
    Ok(AuxProblem::two_species(spec).harmonic(&a).0)
}

/// The constant `B` separating the auxiliary Hamiltonian from its harmonic
/// part.
pub fn b_function<T: Real>(
    params: &AuxiliaryParameters<T>,
    spec: &TwoSpeciesSystemSpec<T>,
) -> Result<T> {
    let a = params.to_array();
    check_params(&a)?;
    Ok(AuxProblem::two_species(spec).b_terms(&a)?.0)
}

pub fn energy_breakdown<T: Real>(
    params: &AuxiliaryParameters<T>,
    spec: &TwoSpeciesSystemSpec<T>,
) -> Result<AuxiliaryEnergyBreakdown<T>> {
    let a = params.to_array();
    check_params(&a)?;
    Ok(AuxProblem::two_species(spec).breakdown(&a)?.0)
}

/// Exact gradient of `E_ho + B` with respect to the five auxiliary
/// parameters. Entries of pinned or absent parameters are zero.
pub fn aux_gradient<T: Real>(
    params: &AuxiliaryParameters<T>,
    spec: &TwoSpeciesSystemSpec<T>,
) -> Result<[T; 5]> {
    let a = params.to_array();
    check_params(&a)?;
    Ok(AuxProblem::two_species(spec).breakdown(&a)?.1)
}

/// Finds the stationary point of the auxiliary eigenvalue for a two-species
/// system, starting from a scale scan independent of the compact route.
pub fn extremize<T: Real>(
    spec: &TwoSpeciesSystemSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<(Solution<T>, AuxiliaryParameters<T>)> {
    spec.validate()?;
    AuxProblem::two_species(spec).extremize(cfg, None)
}

/// As [`extremize`], starting from user-supplied parameters (for instance
/// those reconstructed from a compact solution).
pub fn extremize_from<T: Real>(
    spec: &TwoSpeciesSystemSpec<T>,
    cfg: &SolverConfig<T>,
    seed: &AuxiliaryParameters<T>,
) -> Result<(Solution<T>, AuxiliaryParameters<T>)> {
    spec.validate()?;
    AuxProblem::two_species(spec).extremize(cfg, Some(seed))
}

/// Identical-particle version of [`extremize`]; only `mu_a` and `rho_aa`
/// are used.
pub fn extremize_identical<T: Real>(
    spec: &IdenticalSystemSpec<T>,
    cfg: &SolverConfig<T>,
) -> Result<(Solution<T>, AuxiliaryParameters<T>)> {
    spec.validate()?;
    AuxProblem::identical(spec).extremize(cfg, None)
}
