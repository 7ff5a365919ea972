//! Ready-made model systems.
//!
//! The toy system is small enough for exhaustive testing: a Morse ground
//! state, a repulsive exponential excited state placed roughly one 350 nm
//! photon above the ground vibrational level, and a 512-point grid. The
//! default production model uses the grid, mass and pulse settings of the
//! reference parameter sheet with analytic curves standing in for the
//! ab-initio ones.

use crate::angular::ChannelSet;
use crate::error::Result;
use crate::grid::RadialGrid;
use crate::system::{MolecularSystem, PotentialCurve, Pulse, SystemParams, TransitionDipole};
use crate::units::AMU;

pub const TOY_POINTS: usize = 512;
pub const TOY_R_MIN: f64 = 1.0;
pub const TOY_DR: f64 = 0.08;
pub const TOY_J_MAX: u32 = 6;
/// Highest initially occupied rotational level of the toy ensemble.
pub const TOY_INITIAL_J_MAX: u32 = 4;
pub const TOY_TEMPERATURE_K: f64 = 100.0;
pub const TOY_WAVELENGTH_NM: f64 = 350.0;
pub const TOY_FWHM_FS: f64 = 5.0;
pub const TOY_INTENSITY: f64 = 1e10;
pub const TOY_DT_FS: f64 = 0.1;
pub const TOY_STEPS: usize = 600;

pub fn toy_grid() -> RadialGrid {
    RadialGrid::new(TOY_R_MIN, TOY_R_MIN + TOY_POINTS as f64 * TOY_DR, TOY_POINTS)
        .expect("valid toy grid")
}

pub fn toy_ground() -> PotentialCurve {
    PotentialCurve::Morse {
        depth: 0.1,
        width: 1.0,
        r_eq: 2.0,
        asymptote: 0.0,
    }
}

pub fn toy_excited() -> PotentialCurve {
    PotentialCurve::RepulsiveExponential {
        amplitude: 0.03 * 3f64.exp(),
        decay: 1.5,
        asymptote: 0.0,
    }
}

pub fn toy_pulse(intensity_w_cm2: f64) -> Pulse {
    Pulse::from_lab_units(
        intensity_w_cm2,
        TOY_WAVELENGTH_NM,
        TOY_FWHM_FS,
        3.0 * TOY_FWHM_FS,
        0.0,
    )
}

pub fn toy_params(intensity_w_cm2: f64) -> SystemParams {
    SystemParams {
        reduced_mass: AMU,
        ground: toy_ground(),
        excited: toy_excited(),
        dipole: TransitionDipole::Constant(1.0),
        pulse: toy_pulse(intensity_w_cm2),
        potential_cap: None,
    }
}

/// Toy system with the given rotational truncation.
pub fn toy_system(j_max: u32, m_max: Option<u32>, intensity_w_cm2: f64) -> Result<MolecularSystem> {
    let channels = ChannelSet::new(j_max, m_max, 2)?;
    MolecularSystem::new(toy_grid(), channels, toy_params(intensity_w_cm2))
}

pub const TABLE1_REDUCED_MASS_AMU: f64 = 9.5;
pub const TABLE1_DR: f64 = 0.0244;
pub const TABLE1_R_MAX: f64 = 50.0;
pub const TABLE1_POINTS: usize = 2048;
pub const TABLE1_TEMPERATURE_K: f64 = 10.0;
pub const TABLE1_INITIAL_J_MAX: u32 = 10;
pub const TABLE1_J_MAX: u32 = 20;
pub const TABLE1_DT_FS: f64 = 0.05;
pub const TABLE1_STEPS: usize = 7500;
pub const TABLE1_FWHM_FS: f64 = 30.0;
pub const TABLE1_WAVELENGTH_NM: f64 = 350.0;
pub const TABLE1_INTENSITIES: [f64; 2] = [1e10, 1e13];

/// Ground curve with `rₑ` chosen so that `B = 1/(2mᵣrₑ²) ≈ 4.0·10⁻⁶` hartree.
pub fn table1_ground() -> PotentialCurve {
    PotentialCurve::Morse {
        depth: 0.1,
        width: 1.0,
        r_eq: 2.68,
        asymptote: 0.0,
    }
}

/// Repulsive curve about one 350 nm photon above the ground level at `rₑ`.
pub fn table1_excited() -> PotentialCurve {
    PotentialCurve::RepulsiveExponential {
        amplitude: 0.032 * (1.5f64 * 2.68).exp(),
        decay: 1.5,
        asymptote: 0.0,
    }
}

pub fn table1_grid() -> RadialGrid {
    RadialGrid::new(
        TABLE1_R_MAX - TABLE1_POINTS as f64 * TABLE1_DR,
        TABLE1_R_MAX,
        TABLE1_POINTS,
    )
    .expect("valid default grid")
}
