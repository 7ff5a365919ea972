use crate::units;

/// Gaussian-enveloped linearly polarized pulse, stored in atomic units.
///
/// `ε(t) = E₀ exp(-4 ln2 (t - t₀)² / τ²) cos(ω (t - t₀) + φ)` with `τ` the
/// FWHM of the field envelope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub peak_field: f64,
    pub omega: f64,
    pub fwhm: f64,
    pub center: f64,
    pub cep: f64,
}

impl Pulse {
    /// Builds a pulse from laboratory units (W/cm², nm, fs, fs, rad).
    pub fn from_lab_units(intensity: f64, wavelength_nm: f64, fwhm_fs: f64, center_fs: f64, cep: f64) -> Self {
        Pulse {
            peak_field: units::field_from_intensity(intensity),
            omega: units::photon_energy_from_wavelength(wavelength_nm),
            fwhm: fwhm_fs * units::FEMTOSECOND,
            center: center_fs * units::FEMTOSECOND,
            cep,
        }
    }

    pub fn off() -> Self {
        Pulse {
            peak_field: 0.0,
            omega: 0.0,
            fwhm: 1.0,
            center: 0.0,
            cep: 0.0,
        }
    }

    pub fn envelope(&self, t: f64) -> f64 {
        let x = (t - self.center) / self.fwhm;
        self.peak_field * (-4.0 * std::f64::consts::LN_2 * x * x).exp()
    }

    pub fn field_at(&self, t: f64) -> f64 {
        if self.peak_field == 0.0 {
            return 0.0;
        }
        self.envelope(t) * (self.omega * (t - self.center) + self.cep).cos()
    }
}

pub fn field_at(pulse: &Pulse, t: f64) -> f64 {
    pulse.field_at(t)
}
