//! Uniform radial grid and its conjugate momentum grid.
//!
//! Coordinate points sit at cell centres, `r_i = r_min + (i + 1/2) Δr`, so the
//! centrifugal term stays finite even for `r_min = 0`. Momenta follow the
//! standard discrete Fourier ordering: non-negative momenta first, then the
//! negative ones, with the Nyquist momentum stored as `-π/Δr`.
//!
//! The transform pair is normalized as a sampled continuous Fourier
//! transform, `ψ̃(p) = (2π)^{-1/2} ∫ e^{-ipr} ψ(r) dr`, which makes it unitary
//! between the `Δr`- and `Δp`-weighted inner products.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

#[derive(Clone)]
pub struct RadialGrid {
    r_min: f64,
    r_max: f64,
    dr: f64,
    dp: f64,
    points: Vec<f64>,
    momenta: Vec<f64>,
    /// `e^{-i p_k r_0}`, the offset phase of the first grid point.
    offset_phase: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for RadialGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialGrid")
            .field("r_min", &self.r_min)
            .field("r_max", &self.r_max)
            .field("n_points", &self.points.len())
            .field("dr", &self.dr)
            .finish()
    }
}

impl RadialGrid {
    /// Builds a grid of `n_points` cells covering `[r_min, r_max]`.
    pub fn new(r_min: f64, r_max: f64, n_points: usize) -> Result<Self> {
        if n_points < 8 || !n_points.is_power_of_two() {
            return Err(Error::Config(format!(
                "grid size must be a power of two >= 8, got {n_points}"
            )));
        }
        if !(r_min >= 0.0) || !r_min.is_finite() {
            return Err(Error::Domain(format!(
                "r_min must be non-negative, got {r_min}"
            )));
        }
        if !(r_max > r_min) || !r_max.is_finite() {
            return Err(Error::Config(format!(
                "r_max ({r_max}) must exceed r_min ({r_min})"
            )));
        }
        let n = n_points;
        let dr = (r_max - r_min) / n as f64;
        let dp = 2.0 * PI / (n as f64 * dr);
        let points: Vec<f64> = (0..n).map(|i| r_min + (i as f64 + 0.5) * dr).collect();
        let momenta: Vec<f64> = (0..n)
            .map(|k| {
                let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
                signed * dp
            })
            .collect();
        let r0 = points[0];
        let offset_phase = momenta
            .iter()
            .map(|&p| Complex64::from_polar(1.0, -p * r0))
            .collect();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(RadialGrid {
            r_min,
            r_max,
            dr,
            dp,
            points,
            momenta,
            offset_phase,
            forward,
            inverse,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn r_min(&self) -> f64 {
        self.r_min
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn dr(&self) -> f64 {
        self.dr
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    /// Momenta in discrete Fourier order.
    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn nyquist_momentum(&self) -> f64 {
        PI / self.dr
    }

    /// Scratch length required by the in-place transforms.
    pub fn scratch_len(&self) -> usize {
        self.forward
            .get_inplace_scratch_len()
            .max(self.inverse.get_inplace_scratch_len())
    }

    pub fn to_momentum(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(amplitudes.len())?;
        let mut out = amplitudes.to_vec();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.to_momentum_in_place(&mut out, &mut scratch);
        Ok(out)
    }

    pub fn to_coordinate(&self, amplitudes: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(amplitudes.len())?;
        let mut out = amplitudes.to_vec();
        let mut scratch = vec![Complex64::default(); self.scratch_len()];
        self.to_coordinate_in_place(&mut out, &mut scratch);
        Ok(out)
    }

    /// In-place forward transform; `buf` must have the grid length.
    pub fn to_momentum_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward.process_with_scratch(buf, scratch);
        let scale = self.dr / (2.0 * PI).sqrt();
        for (z, phase) in buf.iter_mut().zip(&self.offset_phase) {
            *z *= phase * scale;
        }
    }

    pub fn to_coordinate_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        let scale = self.dp / (2.0 * PI).sqrt();
        for (z, phase) in buf.iter_mut().zip(&self.offset_phase) {
            *z *= phase.conj() * scale;
        }
        self.inverse.process_with_scratch(buf, scratch);
    }

    /// Replaces `buf` by `F⁻¹ diag(factor) F buf`. `factor` is indexed in
    /// discrete Fourier order; offset phases cancel and are skipped.
    pub fn apply_momentum_diagonal(
        &self,
        buf: &mut [Complex64],
        factor: &[f64],
        scratch: &mut [Complex64],
    ) {
        self.forward.process_with_scratch(buf, scratch);
        let inv_n = 1.0 / buf.len() as f64;
        for (z, &f) in buf.iter_mut().zip(factor) {
            *z *= f * inv_n;
        }
        self.inverse.process_with_scratch(buf, scratch);
    }

    /// `Σ|ψ(r_i)|² Δr`.
    pub fn norm_sqr(&self, amplitudes: &[Complex64]) -> f64 {
        amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.dr
    }

    pub(crate) fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(Error::Shape {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }
}
