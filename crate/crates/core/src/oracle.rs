//! Reference energies that do not go through the envelope approximation:
//! the exact harmonic many-body spectrum, closed-form two-body results and a
//! numeric solver for the two-body radial equation.

use std::fmt;

use crate::error::{Error, Result};
use crate::laws::{KineticLaw, PotentialLaw};
use crate::model::{pair_count, Dimension, IdenticalSystemSpec, TwoSpeciesSystemSpec};
use crate::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OracleMethod {
    ExactHo,
    ClosedForm,
    RadialNumeric,
}

impl OracleMethod {
    pub fn name(self) -> &'static str {
        match self {
            Self::ExactHo => "exact-ho",
            Self::ClosedForm => "closed-form",
            Self::RadialNumeric => "radial-numeric",
        }
    }
}

impl fmt::Display for OracleMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleResult<T> {
    pub energy: T,
    pub method: OracleMethod,
    /// Absolute accuracy estimate; zero for exact formulas.
    pub est_accuracy: T,
    /// Nodes of the radial eigenfunction on `r > 0` (radial solver only).
    pub nodes: Option<u32>,
}

impl<T: Real> OracleResult<T> {
    fn exact(energy: T, method: OracleMethod) -> Self {
        Self {
            energy,
            method,
            est_accuracy: T::zero(),
            nodes: None,
        }
    }
}

fn quadratic_mass<T: Real>(k: &KineticLaw<T>, label: &str) -> Result<T> {
    k.pinned_mass()
        .ok_or_else(|| Error::InvalidInput(format!("{label} kinetic law is not p^2/2m: {k:?}")))
}

fn harmonic_coef<T: Real>(v: &PotentialLaw<T>, label: &str) -> Result<T> {
    match v.pinned_spring() {
        Some(k) if k > T::zero() => Ok(k),
        _ => Err(Error::InvalidInput(format!(
            "{label} potential is not a confining k r^2: {v:?}"
        ))),
    }
}

/// Exact eigenvalue `Q sqrt(2 N k / m)` of `N` identical particles with
/// pairwise `k r^2` interactions.
pub fn exact_ho_identical<T: Real>(spec: &IdenticalSystemSpec<T>) -> Result<OracleResult<T>> {
    spec.validate()?;
    let m = quadratic_mass(&spec.kinetic, "particle")?;
    let k = harmonic_coef(&spec.potential, "pair")?;
    let n = T::count(spec.n);
    let e = spec.q.value() * (T::lit(2.0) * n * k / m).sqrt();
    Ok(OracleResult::exact(e, OracleMethod::ExactHo))
}

/// Exact eigenvalue of a harmonic two-species system: internal motion of
/// each species plus the relative motion of the two centres of mass.
pub fn exact_ho_energy<T: Real>(spec: &TwoSpeciesSystemSpec<T>) -> Result<OracleResult<T>> {
    spec.validate()?;
    let two = T::lit(2.0);
    let ma = quadratic_mass(&spec.kinetic_a, "species a")?;
    let mb = quadratic_mass(&spec.kinetic_b, "species b")?;
    let kab = harmonic_coef(&spec.v_ab, "a-b")?;
    let (na, nb) = (T::count(spec.n_a), T::count(spec.n_b));
    let kaa = if pair_count(spec.n_a) > 0 {
        harmonic_coef(&spec.v_aa, "a-a")?
    } else {
        T::zero()
    };
    let kbb = if pair_count(spec.n_b) > 0 {
        harmonic_coef(&spec.v_bb, "b-b")?
    } else {
        T::zero()
    };
    let wa = (two * (na * kaa + nb * kab) / ma).sqrt();
    let wb = (two * (nb * kbb + na * kab) / mb).sqrt();
    let wrel = (two * kab * (nb / ma + na / mb)).sqrt();
    let e = spec.qa() * wa + spec.qb() * wb + spec.qrel() * wrel;
    Ok(OracleResult::exact(e, OracleMethod::ExactHo))
}

/// Zeros of the Airy function `Ai`, as positive numbers.
const AIRY_ZEROS: [f64; 5] = [
    2.338_107_410_459_767,
    4.087_949_444_130_971,
    5.520_559_828_095_551,
    6.786_708_090_071_759,
    7.944_133_587_120_853,
];

fn check_radial_labels(dim: Dimension, l: u32) -> Result<()> {
    if dim.get() > 3 {
        return Err(Error::InvalidInput(format!(
            "radial oracle supports D <= 3, got {dim}"
        )));
    }
    if dim.get() == 1 && l > 1 {
        return Err(Error::InvalidInput(format!(
            "in one dimension l is the parity label 0 or 1, got {l}"
        )));
    }
    Ok(())
}

/// Closed-form energy of the two-body state `(n, l)` with reduced mass `mu`
/// for `k r^2` (any D), `-alpha/r` (D = 2, 3, and odd states in D = 1) and
/// `a r` (s states in D = 3, odd states in D = 1, first five levels).
pub fn closed_form_two_body<T: Real>(
    mu: T,
    potential: &PotentialLaw<T>,
    dim: Dimension,
    n: u32,
    l: u32,
) -> Result<OracleResult<T>> {
    check_radial_labels(dim, l)?;
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::InvalidInput(format!(
            "reduced mass must be positive, got {mu}"
        )));
    }
    potential.validate()?;
    let two = T::lit(2.0);
    let (nf, lf) = (T::from_u32(n).unwrap(), T::from_u32(l).unwrap());
    let [t] = potential.terms() else {
        return Err(Error::InvalidInput(
            "no closed form for a sum of power laws".into(),
        ));
    };
    let (a, b) = (t.coef, t.exponent);
    let d = dim.get();
    let e = if b == two && a > T::zero() {
        (two * a / mu).sqrt() * (two * nf + lf + dim.half::<T>())
    } else if b == -T::one() && a < T::zero() && (d >= 2 || l == 1) {
        // principal number n + l + (D-1)/2; the odd 1D states behave as l = 0 in 3D
        let nu = if d == 1 {
            nf + T::one()
        } else {
            nf + lf + (T::count(u64::from(d)) - T::one()) / two
        };
        -mu * a * a / (two * nu * nu)
    } else if b == T::one() && a > T::zero() && ((d == 3 && l == 0) || (d == 1 && l == 1)) {
        let z = AIRY_ZEROS
            .get(n as usize)
            .ok_or_else(|| Error::InvalidInput(format!("no tabulated Airy zero for n = {n}")))?;
        (a * a / (two * mu)).cbrt() * T::lit(*z)
    } else {
        return Err(Error::InvalidInput(format!(
            "no closed form for {potential:?} with D = {d}, l = {l}"
        )));
    };
    Ok(OracleResult::exact(e, OracleMethod::ClosedForm))
}

/// Controls of the radial solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialOptions<T> {
    /// Target accuracy relative to `max(|E|, energy scale)`.
    pub rel_accuracy: T,
    pub initial_points: usize,
    pub max_points: usize,
}

impl<T: Real> Default for RadialOptions<T> {
    fn default() -> Self {
        Self {
            rel_accuracy: T::lit(1e-9),
            initial_points: 4000,
            max_points: 256_000,
        }
    }
}

/// Numerov solution of the reduced radial equation
/// `-u''/(2 mu) + [V(r) + (L(L+1))/(2 mu r^2)] u = E u`,
/// `L = l + (D-3)/2`, for the state with `n` radial nodes. In one dimension
/// `l` labels parity (0 even, 1 odd).
pub fn radial_two_body<T: Real>(
    mu: T,
    potential: &PotentialLaw<T>,
    dim: Dimension,
    n: u32,
    l: u32,
) -> Result<OracleResult<T>> {
    radial_two_body_with(mu, potential, dim, n, l, &RadialOptions::default())
}

pub fn radial_two_body_with<T: Real>(
    mu: T,
    potential: &PotentialLaw<T>,
    dim: Dimension,
    n: u32,
    l: u32,
    opts: &RadialOptions<T>,
) -> Result<OracleResult<T>> {
    check_radial_labels(dim, l)?;
    if !(mu > T::zero()) || !mu.is_finite() {
        return Err(Error::InvalidInput(format!(
            "reduced mass must be positive, got {mu}"
        )));
    }
    if opts.initial_points < 100 || opts.max_points < opts.initial_points {
        return Err(Error::InvalidInput(format!(
            "bad radial grid sizes {opts:?}"
        )));
    }
    let problem = Radial::new(mu, potential, dim, l)?;
    let n = n as usize;

    let provisional = problem.grid(problem.domain_end(problem.escale), opts.initial_points);
    let (lo, hi) = problem.bracket(&provisional, n)?;
    let coarse = problem.bisect(&provisional, n, lo, hi).0;

    let r_max = problem.domain_end(coarse);
    let mut points = opts.initial_points;
    let mut grid = problem.grid(r_max, points);
    let (mut energy, _) = problem.refine(&grid, n, coarse)?;
    let target = opts.rel_accuracy * energy.abs().max(problem.escale);
    loop {
        if points * 2 > opts.max_points {
            return Err(Error::NoConvergence {
                iterations: points,
                residual: f64::NAN,
                residuals: Vec::new(),
            });
        }
        points *= 2;
        grid = problem.grid(r_max, points);
        let (fine, fine_nodes) = problem.refine(&grid, n, energy)?;
        let change = (fine - energy).abs();
        let extrapolated = fine + (fine - energy) / T::lit(15.0);
        energy = fine;
        if change <= target {
            return Ok(OracleResult {
                energy: extrapolated,
                method: OracleMethod::RadialNumeric,
                est_accuracy: change,
                nodes: Some(fine_nodes as u32),
            });
        }
    }
}

struct Radial<'a, T> {
    mu: T,
    v: &'a PotentialLaw<T>,
    /// `L + 1/2`; negative only for even states in one dimension.
    s: T,
    /// Length scale where kinetic and potential energies are comparable.
    length: T,
    escale: T,
    /// Limit of `V` at infinity, `None` if confining.
    v_inf: Option<T>,
}

struct Grid<T> {
    /// Log grid (`x = ln r`) or, for even 1D states, uniform in `r` from 0.
    uniform: bool,
    h: T,
    /// `2 mu r^2` (log) or `2 mu` (uniform) at each point.
    c: Vec<T>,
    /// `c V(r)` plus the constant centrifugal part.
    w: Vec<T>,
}

impl<'a, T: Real> Radial<'a, T> {
    fn new(mu: T, v: &'a PotentialLaw<T>, dim: Dimension, l: u32) -> Result<Self> {
        v.validate()?;
        let two = T::lit(2.0);
        if v.terms().iter().any(|t| t.exponent <= -two) {
            return Err(Error::InvalidInput(
                "radial oracle needs every exponent above -2".into(),
            ));
        }
        let s = T::from_u32(l).unwrap() + (T::count(u64::from(dim.get())) - two) / two;
        if s < T::zero() && v.terms().iter().any(|t| t.exponent < T::zero()) {
            return Err(Error::InvalidInput(
                "even one-dimensional states need a potential finite at the origin".into(),
            ));
        }
        let lead = v.leading();
        let v_inf = if lead.exponent > T::zero() {
            if lead.coef < T::zero() {
                return Err(Error::NoBoundState(
                    "potential is unbounded below at large r".into(),
                ));
            }
            None
        } else {
            Some(T::zero())
        };
        // sum 2 mu |a| l^(2+b) = 1 is monotone in l
        let g = |t: T| {
            let len = t.exp();
            v.terms().iter().fold(T::zero(), |acc, term| {
                acc + two * mu * term.coef.abs() * len.powf(two + term.exponent)
            }) - T::one()
        };
        let (mut lo, mut hi) = (T::lit(-60.0), T::lit(60.0));
        if !(g(lo) < T::zero() && g(hi) > T::zero()) {
            return Err(Error::InvalidInput(
                "cannot determine the potential length scale".into(),
            ));
        }
        for _ in 0..200 {
            let mid = (lo + hi) / two;
            if g(mid) < T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let length = ((lo + hi) / two).exp();
        Ok(Self {
            mu,
            v,
            s,
            length,
            escale: T::one() / (two * mu * length * length),
            v_inf,
        })
    }

    /// Radius where `int kappa dr` beyond the outer turning point of
    /// energy `e` reaches 40.
    fn domain_end(&self, e: T) -> T {
        let two = T::lit(2.0);
        let factor = T::lit(1.01);
        let cap = self.length * T::lit(1e12);
        let mut r = self.length * T::lit(1e-3);
        let mut integral = T::zero();
        while r < cap {
            let next = r * factor;
            let excess = self.v.value(next) - e;
            if excess <= T::zero() {
                integral = T::zero();
            } else {
                integral += (two * self.mu * excess).sqrt() * (next - r);
            }
            r = next;
            if integral >= T::lit(40.0) && r > self.length {
                break;
            }
        }
        r
    }

    fn grid(&self, r_max: T, points: usize) -> Grid<T> {
        let two = T::lit(2.0);
        let uniform = self.s < T::zero();
        let (start, h) = if uniform {
            (T::zero(), r_max / T::count(points as u64 - 1))
        } else {
            let x0 = (self.length * T::lit(1e-10)).ln();
            (x0, (r_max.ln() - x0) / T::count(points as u64 - 1))
        };
        let mut c = Vec::with_capacity(points);
        let mut w = Vec::with_capacity(points);
        for i in 0..points {
            let x = start + h * T::count(i as u64);
            if uniform {
                let v0 = if i == 0 { T::zero() } else { self.v.value(x) };
                c.push(two * self.mu);
                w.push(two * self.mu * v0);
            } else {
                let r = x.exp();
                let ci = two * self.mu * r * r;
                c.push(ci);
                w.push(self.s * self.s + ci * self.v.value(r));
            }
        }
        Grid { uniform, h, c, w }
    }

    /// Sign changes of the solution regular at the origin, integrated over
    /// the whole grid. Monotone non-decreasing in `e`.
    fn nodes(&self, g: &Grid<T>, e: T) -> usize {
        let twelve = T::lit(12.0);
        let h2 = g.h * g.h / twelve;
        let coef = |i: usize| T::one() - h2 * (g.w[i] - g.c[i] * e);
        let big = T::max_value().powf(T::lit(0.25));
        let (mut prev, mut cur) = if g.uniform {
            // even solution: phi(-h) = phi(h)
            let p0 = T::one();
            (
                p0,
                (twelve - T::lit(10.0) * coef(0)) * p0 / (coef(1) + coef(1)),
            )
        } else {
            (T::one(), (self.s * g.h).exp())
        };
        let mut count = 0;
        let mut sign_ref = if cur != T::zero() { cur } else { prev };
        if prev * cur < T::zero() {
            count += 1;
        }
        let (mut gp, mut gc) = (coef(0), coef(1));
        for i in 1..g.c.len() - 1 {
            let gn = coef(i + 1);
            if gn <= T::lit(0.05) {
                break;
            }
            let next = ((twelve - T::lit(10.0) * gc) * cur - gp * prev) / gn;
            if next != T::zero() {
                if next * sign_ref < T::zero() {
                    count += 1;
                }
                sign_ref = next;
            }
            prev = cur;
            cur = next;
            gp = gc;
            gc = gn;
            if cur.abs() > big {
                prev /= big;
                cur /= big;
            }
        }
        count
    }

    /// Energies with at most `n` and more than `n` nodes.
    fn bracket(&self, g: &Grid<T>, n: usize) -> Result<(T, T)> {
        let mut lo = (0..=60)
            .map(|k| self.v.value(self.length * T::lit(1.2).powi(k - 30)))
            .fold(T::infinity(), T::min);
        let mut step = self.escale;
        for _ in 0..200 {
            if self.nodes(g, lo) <= n {
                break;
            }
            lo -= step;
            step *= T::lit(2.0);
        }
        if self.nodes(g, lo) > n {
            return Err(Error::NoBoundState(
                "no energy below the requested level found".into(),
            ));
        }
        for k in 0..80 {
            let hi = match self.v_inf {
                Some(cap) if lo >= cap => break,
                Some(cap) => lo + (cap - lo) * (T::one() - T::lit(0.5).powi(k + 1)),
                None => lo + self.escale * T::lit(2.0).powi(k),
            };
            let grid_hi = self.grid(self.domain_end(hi), g.c.len());
            if self.nodes(&grid_hi, hi) > n {
                if self.nodes(&grid_hi, lo) <= n {
                    return Ok((lo, hi));
                }
                return Err(Error::NoBoundState(
                    "node count not monotone in energy".into(),
                ));
            }
        }
        Err(Error::NoBoundState(format!(
            "no bound state with {n} nodes below the continuum"
        )))
    }

    /// Bisection on the node count; returns the eigenvalue and the node
    /// count just below it.
    fn bisect(&self, g: &Grid<T>, n: usize, mut lo: T, mut hi: T) -> (T, usize) {
        let two = T::lit(2.0);
        for _ in 0..400 {
            let mid = (lo + hi) / two;
            if mid <= lo || mid >= hi {
                break;
            }
            if self.nodes(g, mid) > n {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= T::epsilon() * two * lo.abs().max(hi.abs()) {
                break;
            }
        }
        ((lo + hi) / two, self.nodes(g, lo))
    }

    /// Eigenvalue on `g` near a previous estimate.
    fn refine(&self, g: &Grid<T>, n: usize, guess: T) -> Result<(T, usize)> {
        let mut width = T::lit(1e-4) * guess.abs().max(self.escale);
        for _ in 0..60 {
            let lo = guess - width;
            let hi = match self.v_inf {
                Some(cap) => (guess + width).min((guess + cap) / T::lit(2.0)),
                None => guess + width,
            };
            if self.nodes(g, lo) <= n && self.nodes(g, hi) > n {
                return Ok(self.bisect(g, n, lo, hi));
            }
            width *= T::lit(4.0);
        }
        Err(Error::NoBoundState(
            "eigenvalue lost during grid refinement".into(),
        ))
    }
}
