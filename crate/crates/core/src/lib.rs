//! Steady-state simulation of flux-pumped superconducting parametric
//! amplifiers.
//!
//! The crate covers three device families that share one rotating-frame
//! Hamiltonian template,
//!
//! ```text
//! H = Δ a†a + (λ/2) a†² + (λ*/2) a² + K a†²a² + Λ (a†³a + a†a³) + ζ (a†⁴ + a⁴)
//! ```
//!
//! * the ideal degenerate parametric amplifier (only Δ and λ),
//! * the single-loop DC-SQUID amplifier (all terms, K never vanishes),
//! * the symmetrically threaded SQUID with a linear centre inductor, whose
//!   Kerr and quartic terms vanish at static flux F = −π/2.
//!
//! Modules, bottom-up:
//!
//! * [`fock`]: truncated Fock-space operators and density matrices.
//! * [`model`]: Hamiltonian builders and circuit-to-coefficient maps.
//! * [`lindblad`]: sparse Liouvillian, steady state, moments, Wigner
//!   functions and output squeezing.
//! * [`response`]: probe-based gain matrix, closed-form gain, added noise.
//! * [`semiclassical`]: harmonic balance, pump-mode fixed points and the
//!   analytic gain with self-consistent effective parameters.
//! * [`grid`]: CSV and binary export of 2-D fields.
//!
//! All rates are expressed in units of the signal-port coupling κ unless a
//! function says otherwise; [`model::Units`] converts at the boundary.

pub mod error;
pub mod fock;
pub mod grid;
pub mod lindblad;
pub mod model;
pub mod response;
pub mod semiclassical;

pub use error::{Error, Result};
pub use fock::{DensityOperator, HilbertSpace, Operator};
pub use lindblad::{EnvironmentParams, GaussianMoments, Liouvillian, SteadyStateSolver};
pub use model::{CircuitSpec, HamiltonianCoefficients, Topology};
pub use num_complex::Complex64;
pub use response::{GainMatrix, ProbeSpec};
