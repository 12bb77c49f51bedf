//! Finite-level analysis on nested fractals.
//!
//! The crate builds graph approximations of nested fractals (Sierpinski
//! gasket, Vicsek family, custom IFS), assembles their renormalized
//! Dirichlet forms and spectral heat kernels, evaluates Korevaar-Schoen /
//! sub-Gaussian / BV variation functionals, and measures a family of
//! functional inequalities (Poincare, pseudo-Poincare, Morrey, Sobolev,
//! coarea, truncation, maximal function, Lusin-Holder) at desk scale.
//!
//! Modules follow the pipeline order:
//!
//! * [`geometry`] - IFS data, word addressing, level meshes, spatial index
//! * [`spectral`] - resistance renormalization, energy forms, eigensolvers,
//!   heat kernels
//! * [`functions`] - discrete functions, variation functionals, BV machinery
//! * [`checks`] - inequality measurements and reports

extern crate openblas_src;

pub mod checks;
pub mod error;
pub mod export;
pub mod functions;
pub mod geometry;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{FractalSpec, LevelMesh};
pub use spectral::{EnergyForm, SpectralData};
