//! Complexity-restricted thermodynamics workbench.
//!
//! Dense simulation of small qubit registers together with the entropic
//! quantities that govern erasure under a budget of elementary gates:
//! hypothesis-testing entropies, their circuit-restricted variants, a
//! protocol simulator with work/complexity ledgers, and experiment drivers.
//!
//! All entropies are in nats. Convert with [`units::to_bits`] for display.

pub mod cxent;
pub mod entropy;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod quantum;
pub mod rng;
pub mod selfcheck;
pub mod thermo;
pub mod units;

pub use error::{Error, Result};
pub use quantum::{CMatrix, DensityOperator, HermitianOperator, PovmEffect, QubitRegister};
