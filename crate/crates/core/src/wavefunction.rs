use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex amplitudes over (channel × radial point), channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    n_points: usize,
    n_channels: usize,
    data: Vec<Complex64>,
}

impl Wavefunction {
    pub fn zeros(n_channels: usize, n_points: usize) -> Self {
        Wavefunction {
            n_points,
            n_channels,
            data: vec![Complex64::default(); n_channels * n_points],
        }
    }

    pub fn from_vec(n_channels: usize, n_points: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n_channels * n_points {
            return Err(Error::Shape {
                expected: n_channels * n_points,
                got: data.len(),
            });
        }
        Ok(Wavefunction {
            n_points,
            n_channels,
            data,
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn channel(&self, c: usize) -> &[Complex64] {
        &self.data[c * self.n_points..(c + 1) * self.n_points]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [Complex64] {
        &mut self.data[c * self.n_points..(c + 1) * self.n_points]
    }

    /// `Σ|ψ|² Δr` over all channels.
    pub fn norm_sqr(&self, dr: f64) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * dr
    }

    pub fn channel_norm_sqr(&self, c: usize, dr: f64) -> f64 {
        self.channel(c).iter().map(|z| z.norm_sqr()).sum::<f64>() * dr
    }

    /// `⟨self|other⟩` with the `Δr` quadrature weight.
    pub fn inner(&self, other: &Wavefunction, dr: f64) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * dr
    }

    pub fn scale(&mut self, factor: Complex64) {
        for z in &mut self.data {
            *z *= factor;
        }
    }

    /// `self += a · other`
    pub fn add_scaled(&mut self, a: Complex64, other: &Wavefunction) {
        for (z, w) in self.data.iter_mut().zip(&other.data) {
            *z += a * w;
        }
    }

    pub fn same_shape(&self, other: &Wavefunction) -> Result<()> {
        if self.data.len() != other.data.len() {
            return Err(Error::Shape {
                expected: self.data.len(),
                got: other.data.len(),
            });
        }
        Ok(())
    }
}
