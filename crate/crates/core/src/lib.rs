//! Spectral Galerkin solver for the fractional Schrödinger equation
//! `i psi_t = gamma (-Delta)^{alpha/2} psi + T psi` on the whole real line.
//!
//! Space is discretized with (scaled) Malmquist-Takenaka functions, whose
//! Fourier transforms are Laguerre functions. This makes the Galerkin matrix of
//! the fractional Laplacian explicit, and every multiplication operator a
//! Hermitian Toeplitz matrix computable by FFT. Time stepping uses either
//! dense Hermitian exponentials (exact propagator and symmetric splittings) or
//! the Krogstad-P22 exponential integrator for the cubic nonlinearity.

pub mod basis;
pub mod diagnostics;
pub mod error;
pub mod expm;
pub mod fft;
pub mod fraclap;
pub mod linalg;
pub mod nonlinear;
pub mod potential;
pub mod problem;
pub mod special;
pub mod stepper;

pub use basis::{analyze, synthesize, SampledFunction, SpectralState, ThetaGrid};
pub use error::{Error, Result};
