//! Steady-state squeezing of resonance fluorescence from a coherently driven
//! single-photon emitter (SPE), optionally coupled to a lossy cavity.
//!
//! The crate is organised bottom-up:
//!
//! - [`observables`]: squeezing quantities of a two-level state (variance,
//!   optimal phase, purity, bounds).
//! - [`freespace`]: closed-form steady states of the driven emitter without a
//!   cavity, including pure dephasing and incoherent pumping.
//! - [`cavity`]: the truncated density-matrix hierarchy of emitter plus cavity,
//!   its steady-state solve and truncation control.
//! - [`approx`]: the analytical purification-rate approximation.
//! - [`detection`]: homodyne cross-correlation observables and the squeezing
//!   detection criterion.
//! - [`scan`]: configuration-driven sweeps, threshold bisection and data
//!   emission.
//!
//! All variances are reported in units of `|χ|²` with `χ = 1`.

pub mod approx;
pub mod cavity;
pub mod detection;
pub mod error;
pub mod freespace;
pub mod observables;
pub mod scan;

pub use error::{Error, Result};
pub use num_complex::Complex64;
