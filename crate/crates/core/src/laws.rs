//! Kinetic-energy and potential families.
//!
//! Besides values and first derivatives, each law provides the auxiliary
//! inverse that links it to the harmonic auxiliary Hamiltonian:
//!
//! * kinetic: `G(x)` solves `T'(G) = G / x`,
//! * potential: `J(x)` solves `V'(J) = 2 x J`.
//!
//! Quadratic laws (`p^2 / 2m`, `a r^2`) make these relations degenerate. Their
//! auxiliary parameter is then pinned ([`KineticLaw::pinned_mass`],
//! [`PotentialLaw::pinned_spring`]) instead of being found by inversion.

use crate::error::{Error, Result};
use crate::numeric::{brent, expand_bracket};
use crate::Real;

/// One-particle kinetic energy `T(p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KineticLaw<T> {
    /// `p^2 / (2m)`
    NonRelativistic { mass: T },
    /// `sqrt(p^2 + m^2)`
    Relativistic { mass: T },
    /// `p`
    UltraRelativistic,
    /// `A p^beta`
    PowerLaw { coef: T, exponent: T },
}

impl<T: Real> KineticLaw<T> {
    pub fn non_relativistic(mass: T) -> Result<Self> {
        let k = Self::NonRelativistic { mass };
        k.validate()?;
        Ok(k)
    }

    pub fn relativistic(mass: T) -> Result<Self> {
        let k = Self::Relativistic { mass };
        k.validate()?;
        Ok(k)
    }

    pub fn power_law(coef: T, exponent: T) -> Result<Self> {
        let k = Self::PowerLaw { coef, exponent };
        k.validate()?;
        Ok(k)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::NonRelativistic { mass } => mass.is_finite() && mass > T::zero(),
            Self::Relativistic { mass } => mass.is_finite() && mass >= T::zero(),
            Self::UltraRelativistic => true,
            Self::PowerLaw { coef, exponent } => {
                coef.is_finite() && exponent.is_finite() && coef > T::zero() && exponent > T::zero()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid kinetic law {self:?}")))
        }
    }

    pub fn value(&self, p: T) -> T {
        match *self {
            Self::NonRelativistic { mass } => p * p / (mass + mass),
            Self::Relativistic { mass } => p.hypot(mass),
            Self::UltraRelativistic => p,
            Self::PowerLaw { coef, exponent } => coef * p.powf(exponent),
        }
    }

    /// `dT/dp`, for `p > 0`.
    pub fn derivative(&self, p: T) -> T {
        match *self {
            Self::NonRelativistic { mass } => p / mass,
            Self::Relativistic { mass } => p / p.hypot(mass),
            Self::UltraRelativistic => T::one(),
            Self::PowerLaw { coef, exponent } => coef * exponent * p.powf(exponent - T::one()),
        }
    }

    /// Mass at which the auxiliary kinetic term coincides with the law, for
    /// quadratic laws.
    pub fn pinned_mass(&self) -> Option<T> {
        match *self {
            Self::NonRelativistic { mass } => Some(mass),
            Self::PowerLaw { coef, exponent } if exponent == T::lit(2.0) => {
                Some(T::one() / (coef + coef))
            }
            _ => None,
        }
    }

    /// Smallest admissible auxiliary mass (exclusive).
    pub fn mass_floor(&self) -> T {
        match *self {
            Self::Relativistic { mass } => mass,
            _ => T::zero(),
        }
    }

    /// `G(x)` solving `T'(G) = G / x`.
    pub fn aux_inverse(&self, x: T) -> Result<T> {
        if !(x > T::zero()) || !x.is_finite() {
            return Err(Error::Domain {
                what: "kinetic auxiliary inverse",
                value: x.to_f64().unwrap_or(f64::NAN),
            });
        }
        match *self {
            Self::NonRelativistic { .. } => Err(Error::DegenerateLaw("non-relativistic kinetic")),
            Self::Relativistic { mass } => {
                if x < mass {
                    return Err(Error::Domain {
                        what: "relativistic kinetic auxiliary inverse (x < m)",
                        value: x.to_f64().unwrap_or(f64::NAN),
                    });
                }
                Ok(((x - mass) * (x + mass)).sqrt())
            }
            Self::UltraRelativistic => Ok(x),
            Self::PowerLaw { coef, exponent } => {
                let two = T::lit(2.0);
                if exponent == two {
                    return Err(Error::DegenerateLaw("quadratic power-law kinetic"));
                }
                // A beta G^(beta-2) = 1/x
                let g = (x * coef * exponent).powf(T::one() / (two - exponent));
                if g > T::zero() && g.is_finite() {
                    Ok(g)
                } else {
                    Err(Error::Domain {
                        what: "power-law kinetic auxiliary inverse (out of range)",
                        value: x.to_f64().unwrap_or(f64::NAN),
                    })
                }
            }
        }
    }
}

/// One term `a r^b` of a potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTerm<T> {
    pub coef: T,
    pub exponent: T,
}

impl<T: Real> PowerTerm<T> {
    pub fn new(coef: T, exponent: T) -> Self {
        Self { coef, exponent }
    }

    fn value(&self, r: T) -> T {
        self.coef * r.powf(self.exponent)
    }

    fn derivative(&self, r: T) -> T {
        self.coef * self.exponent * r.powf(self.exponent - T::one())
    }

    fn binds(&self) -> bool {
        self.coef * self.exponent > T::zero()
    }
}

/// Two-body central potential `V(r) = sum_k a_k r^{b_k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialLaw<T> {
    terms: Vec<PowerTerm<T>>,
}

impl<T: Real> PotentialLaw<T> {
    /// Sum of power-law terms. At least one term must be attractive
    /// (`a b > 0`).
    pub fn sum(terms: Vec<PowerTerm<T>>) -> Result<Self> {
        let v = Self { terms };
        v.validate()?;
        Ok(v)
    }

    pub fn power(coef: T, exponent: T) -> Result<Self> {
        Self::sum(vec![PowerTerm::new(coef, exponent)])
    }

    /// `k r^2`
    pub fn harmonic(k: T) -> Result<Self> {
        Self::power(k, T::lit(2.0))
    }

    /// `a r`
    pub fn linear(a: T) -> Result<Self> {
        Self::power(a, T::one())
    }

    /// `-alpha / r`
    pub fn coulomb(alpha: T) -> Result<Self> {
        Self::power(-alpha, -T::one())
    }

    pub fn validate(&self) -> Result<()> {
        if self.terms.is_empty() {
            return Err(Error::InvalidInput("potential has no terms".into()));
        }
        for t in &self.terms {
            if !t.coef.is_finite() || !t.exponent.is_finite() {
                return Err(Error::InvalidInput(format!(
                    "non-finite potential term {t:?}"
                )));
            }
            if t.coef == T::zero() || t.exponent == T::zero() {
                return Err(Error::InvalidInput(format!(
                    "potential term {t:?} needs nonzero coefficient and exponent"
                )));
            }
        }
        if !self.terms.iter().any(PowerTerm::binds) {
            return Err(Error::InvalidInput(
                "potential is repulsive everywhere (no term with a*b > 0)".into(),
            ));
        }
        Ok(())
    }

    pub fn terms(&self) -> &[PowerTerm<T>] {
        &self.terms
    }

    pub fn value(&self, r: T) -> T {
        self.terms.iter().fold(T::zero(), |s, t| s + t.value(r))
    }

    pub fn derivative(&self, r: T) -> T {
        self.terms
            .iter()
            .fold(T::zero(), |s, t| s + t.derivative(r))
    }

    /// All coefficients multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> Result<Self> {
        Self::sum(
            self.terms
                .iter()
                .map(|t| PowerTerm::new(t.coef * factor, t.exponent))
                .collect(),
        )
    }

    /// Spring constant for a single harmonic term.
    pub fn pinned_spring(&self) -> Option<T> {
        match self.terms.as_slice() {
            [t] if t.exponent == T::lit(2.0) => Some(t.coef),
            _ => None,
        }
    }

    /// Term with the largest exponent.
    pub fn leading(&self) -> PowerTerm<T> {
        *self
            .terms
            .iter()
            .max_by(|a, b| a.exponent.partial_cmp(&b.exponent).unwrap())
            .expect("validated potential has terms")
    }

    /// `J(x)` solving `V'(J) = 2 x J`. Closed form for one term, bracketed
    /// root finding for sums.
    pub fn aux_inverse(&self, x: T) -> Result<T> {
        check_aux_arg(x)?;
        match self.terms.as_slice() {
            [t] => single_term_inverse(t, x),
            _ => self.aux_inverse_numeric(x),
        }
    }

    /// Numeric route for `J(x)`, also usable on single-term laws.
    pub fn aux_inverse_numeric(&self, x: T) -> Result<T> {
        check_aux_arg(x)?;
        let two = T::lit(2.0);
        let seed = self
            .terms
            .iter()
            .filter(|t| t.binds() && t.exponent != two)
            .map(|t| single_term_inverse(t, x))
            .find_map(|r| r.ok().filter(|v| v.is_finite() && *v > T::zero()))
            .unwrap_or_else(T::one);
        // h(r) = V'(r)/(2 r) - x, normalised so that its scale does not
        // depend on r
        let h = |r: T| self.derivative(r) / (two * r) - x;
        let max_steps = if T::epsilon() < T::lit(1e-10) {
            400
        } else {
            120
        };
        let (lo, hi, flo, fhi) =
            expand_bracket(h, seed, T::lit(1.5), max_steps).ok_or_else(|| {
                Error::NoBinding(format!("V'(J) = 2xJ has no positive root for x = {x}"))
            })?;
        if lo == hi {
            return Ok(lo);
        }
        let (root, _) = brent(h, lo, hi, flo, fhi, 200)?;
        Ok(root)
    }
}

fn check_aux_arg<T: Real>(x: T) -> Result<()> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::Domain {
            what: "potential auxiliary inverse",
            value: x.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(())
}

fn single_term_inverse<T: Real>(t: &PowerTerm<T>, x: T) -> Result<T> {
    let two = T::lit(2.0);
    if t.exponent == two {
        return Err(Error::DegenerateLaw("harmonic potential"));
    }
    if !t.binds() {
        return Err(Error::NoBinding(format!("term {t:?} is repulsive")));
    }
    // a b J^(b-2) = 2x
    let j = (t.coef * t.exponent / (two * x)).powf(T::one() / (two - t.exponent));
    if j > T::zero() && j.is_finite() {
        Ok(j)
    } else {
        Err(Error::NoBinding(format!(
            "J({x}) for {t:?} is out of range"
        )))
    }
}
