//! Quaternion polynomial differential equations.

pub mod error;
pub mod field;
pub mod integrator;
pub mod invariants;
pub mod quadrature;
pub mod quat;
pub mod rational;
pub mod repro;
pub mod structure;
pub mod verify;

pub use error::{Error, Result};
pub use field::{Family, FieldSpec, Regime, StructureCase};
pub use quat::Quaternion;
