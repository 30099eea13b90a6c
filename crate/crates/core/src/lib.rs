//! Random products of quasi-periodic linear cocycles over the
//! shift-times-rotations skew product: Lyapunov spectra, homoclinic
//! holonomies, and numerical pinching/twisting certificates.

pub mod certify;
pub mod circle;
pub mod cocycle;
pub mod error;
pub mod holonomy;
pub mod lab;
pub mod linalg;
pub mod lyapunov;
pub mod quadrature;

pub use error::{LabError, Result};
