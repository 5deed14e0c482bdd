//! Reduced-order modelling of incompressible flow with proper orthogonal
//! decomposition on grad-div stabilized Taylor–Hood finite elements.

pub mod assembly;
pub mod config;
pub mod diagnostics;
pub mod eigen;
pub mod error;
pub mod fe_space;
pub mod fom;
pub mod lagrange;
pub mod linsolve;
pub mod manufactured;
pub mod mesh;
pub mod pod;
pub mod quadrature;
pub mod rom;
pub mod snapshots;
pub mod sparse;
pub mod study;

pub use error::{Error, Result};
