//! Simulation of weak polarization measurements on a pre- and postselected
//! optical beam.
//!
//! The model is a birefringent crystal that displaces the transverse beam
//! profile by `±epsilon` conditioned on linear polarization. Postselecting
//! the polarization and imaging the beam (directly or in the Fourier plane)
//! exposes the real and imaginary parts of the polarization weak value as
//! pointer shifts. The crate builds that chain out of small pieces:
//!
//! - [`qcore`]: polarization kets, Hermitian observables, Poincare coordinates
//! - [`weakval`]: weak values, exact detection probabilities, series expansions
//! - [`pointer`]: analytic Gaussian beam profiles and pointer weak values
//! - [`crystal`]: the crystal coupling, perturbed densities, pointer centroids
//! - [`metrology`]: amplification sweeps, displacement estimators, photon sampling
//! - [`directstate`]: direct reconstruction of a polarization state
//! - [`condavg`]: generalized eigenvalues and conditioned averages
//!
//! Everything works in natural units `hbar = 1` with lengths in units of the
//! beam width; [`qcore::UnitSystem`] rescales results at the output boundary.

pub mod condavg;
pub mod crystal;
pub mod directstate;
mod error;
pub mod metrology;
pub mod pointer;
pub mod qcore;
pub mod quad;
pub mod rng;
pub mod weakval;

pub use error::{Error, Result};
