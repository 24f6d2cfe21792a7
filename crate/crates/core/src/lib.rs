//! Envelope theory solvers for systems of identical particles and for
//! two-species systems of `N_a + N_b` particles.
//!
//! The approximate eigenvalue is obtained from a small algebraic system in the
//! mean momenta and mean pair distances (the compact equations). An
//! independent route extremizes the eigenvalue of the auxiliary harmonic
//! Hamiltonian over its parameters, and [`oracle`] provides reference energies
//! (exact harmonic spectra and a radial shooting solver) for cross-checks.
//!
//! All numerical code is generic over the scalar type through [`Real`]. The
//! aliases at the crate root fix the scalar to `f64`, which is what the CLI
//! and the acceptance suite use.

// `!(x > 0)` is used on purpose so that NaN fails the test
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compact;
pub mod error;
pub mod extremization;
pub mod laws;
pub mod model;
pub mod numeric;
pub mod oracle;

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, NumAssign};

pub use error::{Error, Result};
pub use model::{Dimension, Mean, Method, QuantumNumbers};

/// Floating-point scalar accepted by every solver.
pub trait Real:
    Float + FromPrimitive + NumAssign + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Converts an integer count into the scalar type.
    #[inline]
    fn count(n: u64) -> Self {
        Self::from_u64(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub type KineticLaw = laws::KineticLaw<f64>;
pub type PotentialLaw = laws::PotentialLaw<f64>;
pub type PowerTerm = laws::PowerTerm<f64>;
pub type GlobalQuantumNumber = model::GlobalQuantumNumber<f64>;
pub type IdenticalSystemSpec = model::IdenticalSystemSpec<f64>;
pub type TwoSpeciesSystemSpec = model::TwoSpeciesSystemSpec<f64>;
pub type Solution = model::Solution<f64>;
pub type AuxiliaryParameters = model::AuxiliaryParameters<f64>;
pub type SolverConfig = compact::SolverConfig<f64>;
pub type AuxiliaryEnergyBreakdown = extremization::AuxiliaryEnergyBreakdown<f64>;
pub type OracleResult = oracle::OracleResult<f64>;
