//! Unit conversions between the laboratory units used in configuration
//! files and the atomic units used everywhere inside the crate.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Electron masses per unified atomic mass unit.
pub const AMU: f64 = 1822.888486209;
/// Atomic time units per femtosecond.
pub const FEMTOSECOND: f64 = 41.341373335182;
/// Bohr per angstrom.
pub const ANGSTROM: f64 = 1.0 / 0.529177210903;
/// Bohr per nanometre.
pub const NANOMETRE: f64 = 10.0 * ANGSTROM;
pub const HARTREE_IN_EV: f64 = 27.211386245988;
pub const HARTREE_IN_WAVENUMBER: f64 = 219474.6313632;
/// Boltzmann constant in hartree per kelvin.
pub const BOLTZMANN: f64 = 3.166811563e-6;
/// Speed of light in atomic units.
pub const SPEED_OF_LIGHT: f64 = 137.035999084;
/// Atomic units of dipole moment per debye.
pub const DEBYE: f64 = 0.393430238;

const VACUUM_PERMITTIVITY_SI: f64 = 8.8541878128e-12;
const SPEED_OF_LIGHT_SI: f64 = 299_792_458.0;
const ATOMIC_FIELD_SI: f64 = 5.14220674763e11;

/// Peak electric field (a.u.) of a linearly polarized wave with the given
/// cycle-averaged intensity in W/cm², from I = ε₀cE²/2.
pub fn field_from_intensity(w_per_cm2: f64) -> f64 {
    let w_per_m2 = w_per_cm2 * 1.0e4;
    (2.0 * w_per_m2 / (VACUUM_PERMITTIVITY_SI * SPEED_OF_LIGHT_SI)).sqrt() / ATOMIC_FIELD_SI
}

/// Photon energy (hartree) of light with the given vacuum wavelength in nm.
pub fn photon_energy_from_wavelength(nm: f64) -> f64 {
    2.0 * PI * SPEED_OF_LIGHT / (nm * NANOMETRE)
}

/// Physical dimension of a configured quantity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    InverseLength,
    Time,
    Energy,
    Mass,
    Temperature,
    Intensity,
    Dipole,
    Angle,
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Dimension::Length => "length",
            Dimension::InverseLength => "inverse length",
            Dimension::Time => "time",
            Dimension::Energy => "energy",
            Dimension::Mass => "mass",
            Dimension::Temperature => "temperature",
            Dimension::Intensity => "intensity",
            Dimension::Dipole => "dipole moment",
            Dimension::Angle => "angle",
        };
        f.write_str(name)
    }
}

/// (unit symbol, dimension, factor to the internal unit)
const UNITS: &[(&str, Dimension, f64)] = &[
    ("bohr", Dimension::Length, 1.0),
    ("angstrom", Dimension::Length, ANGSTROM),
    ("nm", Dimension::Length, NANOMETRE),
    ("1/bohr", Dimension::InverseLength, 1.0),
    ("1/angstrom", Dimension::InverseLength, 1.0 / ANGSTROM),
    ("fs", Dimension::Time, FEMTOSECOND),
    ("au_time", Dimension::Time, 1.0),
    ("hartree", Dimension::Energy, 1.0),
    ("eV", Dimension::Energy, 1.0 / HARTREE_IN_EV),
    ("cm-1", Dimension::Energy, 1.0 / HARTREE_IN_WAVENUMBER),
    ("amu", Dimension::Mass, AMU),
    ("me", Dimension::Mass, 1.0),
    ("K", Dimension::Temperature, 1.0),
    ("W/cm2", Dimension::Intensity, 1.0),
    ("au_dipole", Dimension::Dipole, 1.0),
    ("debye", Dimension::Dipole, DEBYE),
    ("rad", Dimension::Angle, 1.0),
    ("deg", Dimension::Angle, PI / 180.0),
];

/// A number with an explicit unit, written in files as `"<value> <unit>"`.
///
/// The original text form is kept so that configs serialize back exactly as
/// they were read.
#[derive(Debug, Clone, PartialEq)]
pub struct Quantity {
    pub value: f64,
    pub unit: String,
}

impl Quantity {
    pub fn new(value: f64, unit: &str) -> Self {
        Quantity {
            value,
            unit: unit.to_string(),
        }
    }

    pub fn dimension(&self) -> Result<Dimension> {
        lookup(&self.unit).map(|(d, _)| d)
    }

    /// Value in internal (atomic) units, checking the expected dimension.
    /// Intensity stays in W/cm², wavelength-like lengths stay lengths, and
    /// temperature stays in kelvin.
    pub fn to_internal(&self, expected: Dimension) -> Result<f64> {
        let (dim, factor) = lookup(&self.unit)?;
        if dim != expected {
            return Err(Error::Unit(format!(
                "`{self}` has dimension {dim}, expected {expected}"
            )));
        }
        Ok(self.value * factor)
    }

    /// Value expressed in the named unit.
    pub fn in_unit(&self, unit: &str) -> Result<f64> {
        let (dim, factor) = lookup(&self.unit)?;
        let (target_dim, target_factor) = lookup(unit)?;
        if dim != target_dim {
            return Err(Error::Unit(format!("cannot express `{self}` in {unit}")));
        }
        Ok(self.value * factor / target_factor)
    }
}

fn lookup(unit: &str) -> Result<(Dimension, f64)> {
    UNITS
        .iter()
        .find(|(name, _, _)| *name == unit)
        .map(|&(_, d, f)| (d, f))
        .ok_or_else(|| Error::Unit(format!("unknown unit `{unit}`")))
}

impl fmt::Display for Quantity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.value, self.unit)
    }
}

impl FromStr for Quantity {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut parts = s.split_whitespace();
        let (Some(number), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::Unit(format!(
                "`{s}` is not of the form \"<value> <unit>\""
            )));
        };
        let value: f64 = number
            .parse()
            .map_err(|_| Error::Unit(format!("`{number}` is not a number")))?;
        lookup(unit)?;
        Ok(Quantity::new(value, unit))
    }
}

impl Serialize for Quantity {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Quantity {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}
