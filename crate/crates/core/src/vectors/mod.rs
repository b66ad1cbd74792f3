//! Vector types for the Laurent, N-adic step and Fock backends.

mod laurent;
mod step;

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub use laurent::{LaurentPoly, PRUNE_TOL};
pub use step::StepFunction;
pub(crate) use step::cells as step_cells;

use crate::error::{Error, Result};
use crate::fock::FockVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    Laurent,
    Step,
    Fock,
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Backend::Laurent => "laurent",
            Backend::Step => "step",
            Backend::Fock => "fock",
        })
    }
}

/// A vector in one of the concrete Hilbert spaces.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexVec {
    Laurent(LaurentPoly),
    Step(StepFunction),
    Fock(FockVector),
}

impl From<LaurentPoly> for ComplexVec {
    fn from(v: LaurentPoly) -> Self {
        ComplexVec::Laurent(v)
    }
}

impl From<StepFunction> for ComplexVec {
    fn from(v: StepFunction) -> Self {
        ComplexVec::Step(v)
    }
}

impl From<FockVector> for ComplexVec {
    fn from(v: FockVector) -> Self {
        ComplexVec::Fock(v)
    }
}

fn mismatch(a: &ComplexVec, b: &ComplexVec) -> Error {
    Error::BackendMismatch { expected: a.backend(), found: b.backend() }
}

impl ComplexVec {
    pub fn backend(&self) -> Backend {
        match self {
            ComplexVec::Laurent(_) => Backend::Laurent,
            ComplexVec::Step(_) => Backend::Step,
            ComplexVec::Fock(_) => Backend::Fock,
        }
    }

    pub fn as_laurent(&self) -> Option<&LaurentPoly> {
        match self {
            ComplexVec::Laurent(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match self {
            ComplexVec::Step(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_fock(&self) -> Option<&FockVector> {
        match self {
            ComplexVec::Fock(p) => Some(p),
            _ => None,
        }
    }

    /// The zero vector of the same space.
    pub fn zero_like(&self) -> ComplexVec {
        match self {
            ComplexVec::Laurent(_) => LaurentPoly::zero().into(),
            ComplexVec::Step(s) => StepFunction::zero(s.n()).into(),
            ComplexVec::Fock(f) => FockVector::zero(f.n()).into(),
        }
    }

    pub fn inner(&self, other: &ComplexVec) -> Result<Complex64> {
        match (self, other) {
            (ComplexVec::Laurent(a), ComplexVec::Laurent(b)) => Ok(a.inner(b)),
            (ComplexVec::Step(a), ComplexVec::Step(b)) => a.inner(b),
            (ComplexVec::Fock(a), ComplexVec::Fock(b)) => a.inner(b),
            _ => Err(mismatch(self, other)),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        match self {
            ComplexVec::Laurent(a) => a.norm_sqr(),
            ComplexVec::Step(a) => a.norm_sqr(),
            ComplexVec::Fock(a) => a.norm_sqr(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().max(0.0).sqrt()
    }

    pub fn scale(&self, s: Complex64) -> ComplexVec {
        match self {
            ComplexVec::Laurent(a) => a.scale(s).into(),
            ComplexVec::Step(a) => a.scale(s).into(),
            ComplexVec::Fock(a) => a.scale(s).into(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: Complex64, other: &ComplexVec) -> Result<ComplexVec> {
        match (self, other) {
            (ComplexVec::Laurent(a), ComplexVec::Laurent(b)) => Ok(a.axpy(s, b).into()),
            (ComplexVec::Step(a), ComplexVec::Step(b)) => Ok(a.add(&b.scale(s))?.into()),
            (ComplexVec::Fock(a), ComplexVec::Fock(b)) => Ok(a.axpy(s, b)?.into()),
            _ => Err(mismatch(self, other)),
        }
    }

    pub fn add(&self, other: &ComplexVec) -> Result<ComplexVec> {
        self.axpy(Complex64::new(1.0, 0.0), other)
    }

    pub fn sub(&self, other: &ComplexVec) -> Result<ComplexVec> {
        self.axpy(Complex64::new(-1.0, 0.0), other)
    }

    pub fn distance(&self, other: &ComplexVec) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }
}

/// `⟨f|g⟩` for two vectors of the same backend.
pub fn inner_product(f: &ComplexVec, g: &ComplexVec) -> Result<Complex64> {
    f.inner(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixing_backends_is_an_error() {
        let a: ComplexVec = LaurentPoly::e(0).into();
        let b: ComplexVec = StepFunction::one(2).into();
        assert_eq!(
            a.inner(&b),
            Err(Error::BackendMismatch { expected: Backend::Laurent, found: Backend::Step })
        );
        assert!(a.add(&b).is_err());
    }

    #[test]
    fn untagged_json_picks_the_backend() {
        let v: ComplexVec = serde_json::from_str(r#"{"coeffs":[[1,1.0,0.0]]}"#).unwrap();
        assert_eq!(v.backend(), Backend::Laurent);
        let v: ComplexVec = serde_json::from_str(r#"{"N":2,"level":0,"values":[[1.0,0.0]]}"#).unwrap();
        assert_eq!(v.backend(), Backend::Step);
    }
}
