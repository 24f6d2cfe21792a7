//! Problem statements, quantum-number bookkeeping and solution containers.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::laws::{KineticLaw, PotentialLaw};
use crate::Real;

/// Largest particle count accepted by the specs.
pub const MAX_PARTICLES: u64 = 1_000_000;

/// Space dimension `D >= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Dimension(u32);

impl Dimension {
    pub fn new(d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidInput("dimension must be at least 1".into()));
        }
        Ok(Self(d))
    }

    pub fn get(self) -> u32 {
        self.0
    }

    /// `D / 2`, the zero-point contribution of one Jacobi variable.
    pub fn half<T: Real>(self) -> T {
        T::count(self.0 as u64) / T::lit(2.0)
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Radial and orbital quantum numbers `(n_i, l_i)` of the internal Jacobi
/// variables, one pair per variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QuantumNumbers {
    pairs: Vec<(u32, u32)>,
}

impl QuantumNumbers {
    pub fn new(pairs: Vec<(u32, u32)>) -> Self {
        Self { pairs }
    }

    /// All-zero quantum numbers of an `n`-body internal state.
    pub fn ground(n: u64) -> Self {
        Self {
            pairs: vec![(0, 0); n.saturating_sub(1) as usize],
        }
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Concatenation of two lists of Jacobi quantum numbers.
    pub fn concat(&self, other: &Self) -> Self {
        let mut pairs = self.pairs.clone();
        pairs.extend_from_slice(&other.pairs);
        Self { pairs }
    }
}

/// The harmonic band number `Q(N)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct GlobalQuantumNumber<T>(T);

impl<T: Real> GlobalQuantumNumber<T> {
    /// Wraps a user-supplied `Q`; admissibility against a particle count is
    /// checked by the system specs.
    pub fn new(q: T) -> Result<Self> {
        if !q.is_finite() || q < T::zero() {
            return Err(Error::InvalidInput(format!(
                "Q must be finite and >= 0, got {q}"
            )));
        }
        Ok(Self(q))
    }

    pub fn value(self) -> T {
        self.0
    }
}

/// `Q = sum(2 n_i + l_i + D/2)` for `D >= 2`, `sum(n_i + 1/2)` for `D = 1`.
pub fn global_quantum_number<T: Real>(
    qn: &QuantumNumbers,
    dim: Dimension,
) -> Result<GlobalQuantumNumber<T>> {
    let mut q = T::zero();
    for &(n, l) in qn.pairs() {
        if dim.get() == 1 {
            if l != 0 {
                return Err(Error::InvalidInput(format!(
                    "orbital number l = {l} is meaningless in one dimension"
                )));
            }
            q += T::count(n as u64) + T::lit(0.5);
        } else {
            q += T::count(2 * n as u64 + l as u64) + dim.half::<T>();
        }
    }
    Ok(GlobalQuantumNumber(q))
}

/// Number of pairs `N(N-1)/2`.
pub fn pair_count(n: u64) -> u64 {
    n * n.saturating_sub(1) / 2
}

/// Ground-state `Q(N)` for bosons: `(N-1) D / 2`. Returns zero for `N = 1`.
pub fn boson_ground_q<T: Real>(n: u64, dim: Dimension) -> GlobalQuantumNumber<T> {
    GlobalQuantumNumber(T::count(n.saturating_sub(1)) * dim.half::<T>())
}

fn check_count(label: &str, n: u64, min: u64) -> Result<()> {
    if n < min || n > MAX_PARTICLES {
        return Err(Error::InvalidInput(format!(
            "{label} must lie in [{min}, {MAX_PARTICLES}], got {n}"
        )));
    }
    Ok(())
}

fn check_q<T: Real>(label: &str, q: T, n: u64, dim: Dimension) -> Result<()> {
    let ground = boson_ground_q::<T>(n, dim).value();
    // admit values a few ulps below the ground state
    if !q.is_finite() || q < ground * (T::one() - T::epsilon() * T::lit(8.0)) {
        return Err(Error::InvalidInput(format!(
            "{label} = {q} is below the ground-state minimum {ground} for N = {n}, D = {dim}"
        )));
    }
    Ok(())
}

/// `N` identical particles.
#[derive(Debug, Clone, PartialEq)]
pub struct IdenticalSystemSpec<T> {
    pub n: u64,
    pub dim: Dimension,
    pub kinetic: KineticLaw<T>,
    pub potential: PotentialLaw<T>,
    pub q: GlobalQuantumNumber<T>,
}

impl<T: Real> IdenticalSystemSpec<T> {
    /// Builds a validated spec.
    pub fn new(
        n: u64,
        dim: Dimension,
        kinetic: KineticLaw<T>,
        potential: PotentialLaw<T>,
        q: GlobalQuantumNumber<T>,
    ) -> Result<Self> {
        let spec = Self {
            n,
            dim,
            kinetic,
            potential,
            q,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Boson ground state of the given system.
    pub fn ground(
        n: u64,
        dim: Dimension,
        kinetic: KineticLaw<T>,
        potential: PotentialLaw<T>,
    ) -> Result<Self> {
        Self::new(n, dim, kinetic, potential, boson_ground_q(n, dim))
    }

    pub fn validate(&self) -> Result<()> {
        check_count("particle count", self.n, 2)?;
        self.kinetic.validate()?;
        self.potential.validate()?;
        check_q("Q", self.q.value(), self.n, self.dim)
    }

    pub fn pairs(&self) -> u64 {
        pair_count(self.n)
    }
}

/// `N_a` particles of type `a` and `N_b` particles of type `b`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoSpeciesSystemSpec<T> {
    pub n_a: u64,
    pub n_b: u64,
    pub dim: Dimension,
    pub kinetic_a: KineticLaw<T>,
    pub kinetic_b: KineticLaw<T>,
    pub v_aa: PotentialLaw<T>,
    pub v_bb: PotentialLaw<T>,
    pub v_ab: PotentialLaw<T>,
    /// `Q(N_a)`, ignored when `n_a = 1`.
    pub q_a: GlobalQuantumNumber<T>,
    /// `Q(N_b)`, ignored when `n_b = 1`.
    pub q_b: GlobalQuantumNumber<T>,
    /// `Q(2)` of the relative motion of the two centres of mass.
    pub q_rel: GlobalQuantumNumber<T>,
}

impl<T: Real> TwoSpeciesSystemSpec<T> {
    pub fn validate(&self) -> Result<()> {
        check_count("n_a", self.n_a, 1)?;
        check_count("n_b", self.n_b, 1)?;
        self.kinetic_a.validate()?;
        self.kinetic_b.validate()?;
        self.v_aa.validate()?;
        self.v_bb.validate()?;
        self.v_ab.validate()?;
        if self.n_a >= 2 {
            check_q("q_a", self.q_a.value(), self.n_a, self.dim)?;
        }
        if self.n_b >= 2 {
            check_q("q_b", self.q_b.value(), self.n_b, self.dim)?;
        }
        check_q("q_rel", self.q_rel.value(), 2, self.dim)
    }

    /// Effective `Q(N_a)`: zero for a single particle.
    pub fn qa(&self) -> T {
        if self.n_a >= 2 {
            self.q_a.value()
        } else {
            T::zero()
        }
    }

    pub fn qb(&self) -> T {
        if self.n_b >= 2 {
            self.q_b.value()
        } else {
            T::zero()
        }
    }

    pub fn qrel(&self) -> T {
        self.q_rel.value()
    }

    /// Same system with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            n_a: self.n_b,
            n_b: self.n_a,
            dim: self.dim,
            kinetic_a: self.kinetic_b,
            kinetic_b: self.kinetic_a,
            v_aa: self.v_bb.clone(),
            v_bb: self.v_aa.clone(),
            v_ab: self.v_ab.clone(),
            q_a: self.q_b,
            q_b: self.q_a,
            q_rel: self.q_rel,
        }
    }
}

/// Builder for boson-ground-state two-species specs.
#[derive(Debug, Clone)]
pub struct TwoSpeciesBuilder<T> {
    spec: TwoSpeciesSystemSpec<T>,
}

impl<T: Real> TwoSpeciesBuilder<T> {
    /// Starts from a system where every law is shared and every `Q` is the
    /// boson ground state.
    pub fn new(
        n_a: u64,
        n_b: u64,
        dim: Dimension,
        kinetic: KineticLaw<T>,
        potential: PotentialLaw<T>,
    ) -> Self {
        Self {
            spec: TwoSpeciesSystemSpec {
                n_a,
                n_b,
                dim,
                kinetic_a: kinetic,
                kinetic_b: kinetic,
                v_aa: potential.clone(),
                v_bb: potential.clone(),
                v_ab: potential,
                q_a: boson_ground_q(n_a, dim),
                q_b: boson_ground_q(n_b, dim),
                q_rel: boson_ground_q(2, dim),
            },
        }
    }

    pub fn kinetic_a(mut self, k: KineticLaw<T>) -> Self {
        self.spec.kinetic_a = k;
        self
    }

    pub fn kinetic_b(mut self, k: KineticLaw<T>) -> Self {
        self.spec.kinetic_b = k;
        self
    }

    pub fn v_aa(mut self, v: PotentialLaw<T>) -> Self {
        self.spec.v_aa = v;
        self
    }

    pub fn v_bb(mut self, v: PotentialLaw<T>) -> Self {
        self.spec.v_bb = v;
        self
    }

    pub fn v_ab(mut self, v: PotentialLaw<T>) -> Self {
        self.spec.v_ab = v;
        self
    }

    pub fn q_a(mut self, q: GlobalQuantumNumber<T>) -> Self {
        self.spec.q_a = q;
        self
    }

    pub fn q_b(mut self, q: GlobalQuantumNumber<T>) -> Self {
        self.spec.q_b = q;
        self
    }

    pub fn q_rel(mut self, q: GlobalQuantumNumber<T>) -> Self {
        self.spec.q_rel = q;
        self
    }

    pub fn build(self) -> Result<TwoSpeciesSystemSpec<T>> {
        self.spec.validate()?;
        Ok(self.spec)
    }
}

/// Named mean quantities reported with a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Mean {
    /// `sqrt(<p_i^2>)` for identical particles.
    P0,
    /// `sqrt(<r_ij^2>)` for identical particles.
    Rho0,
    PA,
    PB,
    PPrimeA,
    PPrimeB,
    RAA,
    RBB,
    RPrime0,
    /// Relative momentum of the two centres of mass.
    BigP0,
    /// Distance between the two centres of mass.
    BigR0,
}

impl Mean {
    pub const ALL: [Mean; 11] = [
        Mean::P0,
        Mean::Rho0,
        Mean::PA,
        Mean::PB,
        Mean::PPrimeA,
        Mean::PPrimeB,
        Mean::RAA,
        Mean::RBB,
        Mean::RPrime0,
        Mean::BigP0,
        Mean::BigR0,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mean::P0 => "p0",
            Mean::Rho0 => "rho0",
            Mean::PA => "p_a",
            Mean::PB => "p_b",
            Mean::PPrimeA => "p_prime_a",
            Mean::PPrimeB => "p_prime_b",
            Mean::RAA => "r_aa",
            Mean::RBB => "r_bb",
            Mean::RPrime0 => "r_prime_0",
            Mean::BigP0 => "P0",
            Mean::BigR0 => "R0",
        }
    }

    /// Counterpart under the exchange of species `a` and `b`.
    pub fn swapped(self) -> Self {
        match self {
            Mean::PA => Mean::PB,
            Mean::PB => Mean::PA,
            Mean::PPrimeA => Mean::PPrimeB,
            Mean::PPrimeB => Mean::PPrimeA,
            Mean::RAA => Mean::RBB,
            Mean::RBB => Mean::RAA,
            other => other,
        }
    }
}

impl fmt::Display for Mean {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which equation set produced a solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    CompactIdentical,
    CompactTwoSpecies,
    CompactNaPlusOne,
    CompactTwoBody,
    Extremization,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::CompactIdentical => "compact-identical",
            Method::CompactTwoSpecies => "compact-two-species",
            Method::CompactNaPlusOne => "compact-na-plus-1",
            Method::CompactTwoBody => "compact-two-body",
            Method::Extremization => "extremization",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Approximate eigenvalue with the mean quantities and solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution<T> {
    pub energy: T,
    pub means: BTreeMap<Mean, T>,
    /// Max-norm of the scaled residuals of the equations actually solved.
    pub residual_norm: T,
    pub iterations: usize,
    pub method: Method,
    /// Set when several roots were bracketed; the lowest-energy one is kept.
    pub ambiguous: bool,
}

impl<T: Real> Solution<T> {
    pub fn mean(&self, m: Mean) -> Option<T> {
        self.means.get(&m).copied()
    }

    /// Panicking accessor for means a given method always reports.
    pub fn expect_mean(&self, m: Mean) -> T {
        self.mean(m)
            .unwrap_or_else(|| panic!("solution from {} has no mean {}", self.method, m))
    }

    pub(crate) fn swap_species(mut self) -> Self {
        self.means = self
            .means
            .into_iter()
            .map(|(k, v)| (k.swapped(), v))
            .collect();
        self
    }
}

/// Auxiliary masses and spring constants of the harmonic Hamiltonian.
///
/// Entries belonging to absent interactions (a single particle of a species)
/// are zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AuxiliaryParameters<T> {
    pub mu_a: T,
    pub mu_b: T,
    pub rho_aa: T,
    pub rho_bb: T,
    pub rho_ab: T,
}

impl<T: Real> AuxiliaryParameters<T> {
    pub fn to_array(self) -> [T; 5] {
        [self.mu_a, self.mu_b, self.rho_aa, self.rho_bb, self.rho_ab]
    }

    pub fn from_array(a: [T; 5]) -> Self {
        Self {
            mu_a: a[0],
            mu_b: a[1],
            rho_aa: a[2],
            rho_bb: a[3],
            rho_ab: a[4],
        }
    }
}
