//! 1D dissipative quantum hydrodynamics.
//!
//! The crate integrates the Madelung (fluid) form of the Schrödinger–Langevin
//! equation for a particle in an external potential with linear friction,
//! builds the stationary states it relaxes to, and evaluates the Liapunov
//! functional and second-variation diagnostics used to judge their stability.
//!
//! Module map:
//! - [`grid`]: uniform grid, finite differences, quadrature;
//! - [`params`], [`state`]: physical constants, potential, field states;
//! - [`madelung`]: wavefunction ↔ fluid transforms, quantum potential/pressure;
//! - [`stationary`]: oscillator eigenstates and the tridiagonal eigensolver;
//! - [`hydro`]: leapfrog integrator for the fluid equations;
//! - [`wavefn`]: split-step wavefunction integrator (cross-validation oracle);
//! - [`stability`]: Liapunov functional, dissipation rate, second variation;
//! - [`diagnostics`]: distances, currents, energies;
//! - [`scenario`], [`runner`]: scenario files, bundled runs, output tables.
//!
//! Every state type is a plain value: cheap to clone, safe to share across
//! threads, with no interior mutability. Operations are pure functions.

pub mod diagnostics;
pub mod error;
pub mod grid;
pub mod hydro;
pub mod madelung;
pub mod params;
pub mod runner;
pub mod scenario;
pub mod stability;
pub mod state;
pub mod stationary;
pub mod wavefn;

pub use error::{Error, Result};
pub use grid::{cumulative_integral, derivative, integrate, second_derivative, Grid1D};
pub use madelung::{
    quantum_potential, quantum_pressure, to_hydro, to_wavefn, PressureVariant, DEFAULT_RHO_FLOOR,
};
pub use params::{Params, PotentialSpec};
pub use state::{HydroState, StationaryState, WaveState, DEFAULT_TOL_NORM};
