//! Representations of the Cuntz algebra `O_N` built from quadrature-mirror filter banks.
//!
//! The operators `S_j f = m_j(z) f(z^N)` act on finite Laurent polynomials; two
//! further backends (N-adic step functions and the Fock-type GNS space) carry the
//! same API. On top of them sit certificates for co-invariant, wandering, stable
//! and saturated subspaces, the attractor of normalized backward orbits, the
//! analytic model of `S_0`, and the cascade construction of scaling functions.

pub mod error;
pub mod attractor;
pub mod filterbank;
pub mod fixtures;
pub mod fock;
mod linalg;
mod par;
pub mod rep;
pub mod subspace;
pub mod vectors;
pub mod wavelet;
pub mod wold;

pub use error::{Error, Result};
pub use filterbank::{FilterBank, PolyphaseMatrix};
pub use rep::{FilterRep, MultiIndex, Representation, StepRep};
pub use subspace::Subspace;
pub use vectors::{Backend, ComplexVec, LaurentPoly, StepFunction};
