//! Pseudospectral laboratory for one-dimensional cubic dispersive equations
//!
//! The equation under study is `i u_t + u_xx = C(u, conj(u), u)` on a large
//! periodic domain, where `C` is a translation-invariant trilinear form given
//! by a Fourier-multiplier symbol `c(k1, k2, k3)`. The crate provides
//!
//! * unit-scale frequency partitions and projectors ([`lattice`]),
//! * frequency envelopes with the discrete maximal property ([`envelope`]),
//! * a symbol calculus: parsing, hypothesis checks, resonance geometry and the
//!   constructive division of quartic symbols ([`symbolic`]),
//! * multilinear form evaluation with low-rank fast paths ([`forms`], [`lowrank`]),
//! * an integrating-factor RK4 time integrator ([`solver`]),
//! * corrected density-flux pairs and their residuals ([`conservation`]),
//! * interaction functionals over the half plane `x > y` ([`morawetz`]),
//! * norm and estimate-ratio reports ([`metrics`]).
//!
//! Frequency-side conventions follow the continuum normalization
//! `F u (k) = (2π)^{-1/2} ∫ u(x) e^{-ikx} dx`, discretized so that Parseval
//! holds exactly with measure `dk = 2π/L`. With the constant symbol the
//! trilinear form is pointwise `u |u|^2`, which pins every multilinear
//! prefactor used here.

pub mod conservation;
pub mod data;
pub mod envelope;
pub mod forms;
pub mod grid;
pub mod lattice;
pub mod lowrank;
pub mod metrics;
pub mod morawetz;
pub mod solver;
pub mod symbolic;
pub mod tol;

pub use grid::{Field, GridSpec, SpectralField};
pub use lattice::{Localizer, SpatialPartition, UnitPartition};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
