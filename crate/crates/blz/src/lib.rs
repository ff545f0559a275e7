//! Integrable-structure numerics for quantum sine-Gordon and c<1 CFT.
//!
//! Q-functions from the massive and conformal non-linear integral equations,
//! T-functions from quantum Wronskians, massless TBA, classical KdV
//! monodromies, and the same Q/T data as spectral determinants of the
//! modified sinh-Gordon linear problem.

pub mod cli;
pub mod error;
pub mod kdv;
pub mod kernels;
pub mod nlie;
pub mod odeim;
pub mod numerics;
pub mod params;
pub mod relations;
pub mod tba;
pub mod vacuum;

pub use error::{Error, Result};
