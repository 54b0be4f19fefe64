//! Numerical laboratory for projectively Hermitian Yang–Mills metrics on flat
//! lattice models: matrix calculus, lattice geometry, gauged curvature,
//! continuity-method solver, Donaldson functional, Morrey–Campanato analysis
//! and discrete Poincaré constants.

pub mod analysis;
pub mod donaldson;
pub mod error;
pub mod fields;
pub mod geometry;
pub mod matcalc;
pub mod poincare;
pub mod solver;

pub use error::{PhymError, Result};
