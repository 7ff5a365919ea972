//! Coupled-channel simulation of strong-field photodissociation of a
//! diatomic molecule with explicit rotational dynamics.
//!
//! Two Σ electronic surfaces are propagated on a radial grid with a
//! Chebyshev expansion of the short-time propagator. Thermal initial
//! ensembles are handled either exactly (one propagation per occupied
//! rotational state) or with random-phase wavefunctions, whose projector
//! average converges to the thermal density operator.

pub mod angular;
pub mod error;
pub mod grid;
pub mod observables;
pub mod presets;
pub mod propagator;
pub mod runner;
pub mod system;
pub mod thermal;
pub mod units;
pub mod wavefunction;

pub use error::{Error, Result};
