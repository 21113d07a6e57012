//! Numerical core for the one-loop self-energy of hydrogen-like ions in an
//! even-tempered Gaussian basis.

pub mod angular;
pub mod basis;
pub mod dirac;
pub mod error;
pub mod greens;
pub mod momentum_terms;
pub mod mp_assembly;
pub mod photon_pw;
pub mod quadrature;
pub mod special;

pub use error::{Error, Result};
