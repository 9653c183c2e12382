//! Heat conduction in piecewise-homogeneous media separated by parallel
//! hyperplanes, solved with integral transforms whose kernels do not
//! separate the transverse variables.
//!
//! The crate is organised bottom-up:
//!
//! * [`special`] and [`quadrature`]: Bessel functions of real order and the
//!   deterministic Gauss–Legendre engines, including Abel-limit extrapolation.
//! * [`media`]: the segmented axis, per-layer diffusivities and interface
//!   coupling coefficients.
//! * [`eigen`]: primal/dual Sturm–Liouville eigenfunctions built by
//!   transfer-matrix propagation, the complete spectral family used by the
//!   transforms, and the two-layer closed forms.
//! * [`kernels`]: the non-separated kernels `φ_{k,j}`.
//! * [`field`], [`transforms`]: initial data and the transform pairs.
//! * [`heat`]: the spectral solution of the layered heat problem.
//! * [`fd`]: an independent Crank–Nicolson reference solver.

pub mod eigen;
pub mod error;
pub mod fd;
pub mod field;
pub mod heat;
pub mod kernels;
pub mod media;
pub mod quadrature;
pub mod special;
pub mod transforms;

pub use error::{Error, Result};
pub use num_complex::Complex64;
