//! Numerical engine for the Casimir force between a metallic sphere and a
//! plate, computed from first principles with the plane-wave scattering
//! formula, together with the derivative-expansion evaluator and the
//! auxiliary experimental physics and statistics needed to compare a
//! torsional-oscillator force measurement against theory.
//!
//! The crate is organised around the physics pipeline:
//!
//! * [`materials`] — dielectric permittivity models on the imaginary
//!   frequency axis and the Matsubara grid,
//! * [`kernels`] — matrix elements of the round-trip operator in the
//!   plane-wave basis (Fresnel, Mie, scattering amplitudes, polarization
//!   rotation, zero-frequency limits),
//! * [`spectral`] — Fourier-Chebyshev/trapezoidal quadrature, assembly of
//!   the discretized round-trip operator, block diagonalization over the
//!   angular index, and log-det / trace-solve primitives,
//! * [`engine`] — Matsubara summation for free energy and force, PFA and
//!   derivative-expansion evaluators, θ extraction,
//! * [`exper`] — closed-form experimental physics (electrostatic
//!   calibration, patches, oscillator noise),
//! * [`edgefit`] — harmonic analysis of the rotating-trench signal,
//! * [`stats`] — median-method estimation, error combination and the
//!   experiment-vs-theory comparison machinery.
//!
//! All quantities are SI throughout; frequencies are rad/s.

pub mod constants;
pub mod edgefit;
pub mod engine;
pub mod exper;
pub mod kernels;
pub mod materials;
pub mod scaled;
pub mod spectral;
pub mod stats;

pub use engine::{DESpec, ForceResult, Geometry, MaterialPair, MatsubaraFilter, ThetaTable};
pub use materials::{MaterialModel, ThermalSpec};
pub use scaled::Scaled;
