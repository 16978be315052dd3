//! Superpotentials, holomorphic sections and normal-bundle splitting types
//! for nonlinear deformations of rank-2 bundles over the projective line.

pub mod bundle;
pub mod cli;
pub mod critical;
pub mod error;
pub mod laurent;
pub mod linalg;
pub mod potential;
pub mod scalar;
pub mod sections;
pub mod selftest;
pub mod superpotential;

pub use error::{Error, Result};
