//! Cone fields on the open book of the three-sphere: adaptedness checks,
//! reachability estimates, section invariants and stochastic recurrence.

pub mod cone;
pub mod error;
pub mod geometry;
pub mod invariants;
pub mod quadrature;
pub mod reach;
pub mod region;
pub mod rng;
pub mod stats;
pub mod stochastic;

pub use error::{Error, Result};
