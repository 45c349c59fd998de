//! Conditional-state simulator for ultracold lattice atoms scattering probe
//! light into a lossy cavity.
//!
//! The library is organized in four layers:
//!
//! * [`lattice`] — lattice geometry, light-mode profiles, Fock configurations,
//!   coupling coefficients and initial atom-number distributions;
//! * [`dynamics`] — closed-form per-configuration cavity amplitudes and phase
//!   exponents (transient, steady-state and dissipation-free), conditional
//!   superpositions and the collapse-and-revival coherence proxy;
//! * [`trajectory`] — the stochastic photocount engine: no-count evolution plus
//!   quantum jumps for the reduced atom-number distribution, a full
//!   configuration-space oracle engine for small systems, and reproducible
//!   parallel ensembles;
//! * [`stats`] — moment and width diagnostics, analytic collapse estimators
//!   and regime-fitting utilities.

pub mod dynamics;
pub mod lattice;
pub mod stats;
pub mod trajectory;
