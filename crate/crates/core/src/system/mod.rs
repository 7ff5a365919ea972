//! The molecular system: two Σ potential curves coupled by a transition
//! dipole and a linearly polarized pulse, on a radial grid with a set of
//! rotational channels.
//!
//! Per channel `(n, j, m)` the Hamiltonian is
//! `p²/2mᵣ + Vₙ(r) + j(j+1)/(2mᵣr²)`, and the field couples
//! `(n, j, m) ↔ (1-n, j±1, m)` with strength `-μ(r) ε(t) ⟨j±1,m|cos θ|j,m⟩`.
//! No rotating-wave approximation is made.

mod eigen;
mod potential;
mod pulse;

pub use eigen::VibrationalState;
pub use potential::{PotentialCurve, Table, TransitionDipole};
pub use pulse::{field_at, Pulse};

use num_complex::Complex64;

use crate::angular::{centrifugal_factor, ChannelSet};
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone)]
pub struct SystemParams {
    /// Reduced mass in electron masses.
    pub reduced_mass: f64,
    pub ground: PotentialCurve,
    pub excited: PotentialCurve,
    pub dipole: TransitionDipole,
    pub pulse: Pulse,
    /// Optional ceiling applied to both sampled potentials (hartree).
    pub potential_cap: Option<f64>,
}

/// Lower and upper bounds of the spectrum of `Ĥ(t)` valid at all times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub e_min: f64,
    pub e_max: f64,
}

impl SpectralBounds {
    pub fn center(&self) -> f64 {
        0.5 * (self.e_max + self.e_min)
    }

    pub fn half_width(&self) -> f64 {
        0.5 * (self.e_max - self.e_min)
    }
}

/// Task-local scratch space for [`MolecularSystem::apply_hamiltonian`].
#[derive(Debug, Clone)]
pub struct HamiltonianWorkspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl HamiltonianWorkspace {
    pub fn new(grid: &RadialGrid) -> Self {
        HamiltonianWorkspace {
            buf: vec![Complex64::default(); grid.len()],
            scratch: vec![Complex64::default(); grid.scratch_len()],
        }
    }
}

#[derive(Debug, Clone)]
pub struct MolecularSystem {
    grid: RadialGrid,
    channels: ChannelSet,
    params: SystemParams,
    potentials: [Vec<f64>; 2],
    dipole: Vec<f64>,
    /// `1/(2 mᵣ r²)` on the grid.
    inv_two_m_r2: Vec<f64>,
    /// `p²/(2 mᵣ)` in discrete Fourier order.
    kinetic: Vec<f64>,
}

impl MolecularSystem {
    pub fn new(grid: RadialGrid, channels: ChannelSet, params: SystemParams) -> Result<Self> {
        if !(params.reduced_mass > 0.0) || !params.reduced_mass.is_finite() {
            return Err(Error::Domain(format!(
                "reduced mass must be positive, got {}",
                params.reduced_mass
            )));
        }
        let cap = |mut v: Vec<f64>| {
            if let Some(c) = params.potential_cap {
                v.iter_mut().for_each(|x| *x = x.min(c));
            }
            v
        };
        let ground = cap(params.ground.sample(&grid)?);
        let excited = cap(params.excited.sample(&grid)?);
        let dipole = params.dipole.sample(&grid)?;
        let m = params.reduced_mass;
        let inv_two_m_r2 = grid.points().iter().map(|r| 0.5 / (m * r * r)).collect();
        let kinetic = grid.momenta().iter().map(|p| 0.5 * p * p / m).collect();
        Ok(MolecularSystem {
            grid,
            channels,
            params,
            potentials: [ground, excited],
            dipole,
            inv_two_m_r2,
            kinetic,
        })
    }

    /// Same system driven by a different pulse.
    pub fn with_pulse(&self, pulse: Pulse) -> Self {
        let mut out = self.clone();
        out.params.pulse = pulse;
        out
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn channels(&self) -> &ChannelSet {
        &self.channels
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn reduced_mass(&self) -> f64 {
        self.params.reduced_mass
    }

    pub fn pulse(&self) -> &Pulse {
        &self.params.pulse
    }

    /// Sampled (and capped) potential of surface `n`.
    pub fn potential(&self, n: u8) -> &[f64] {
        &self.potentials[n as usize]
    }

    pub fn dipole(&self) -> &[f64] {
        &self.dipole
    }

    pub fn kinetic_factors(&self) -> &[f64] {
        &self.kinetic
    }

    pub fn inv_two_m_r2(&self) -> &[f64] {
        &self.inv_two_m_r2
    }

    pub fn field_at(&self, t: f64) -> f64 {
        self.params.pulse.field_at(t)
    }

    pub fn zero_wavefunction(&self) -> Wavefunction {
        Wavefunction::zeros(self.channels.len(), self.grid.len())
    }

    pub fn check_shape(&self, psi: &Wavefunction) -> Result<()> {
        if psi.n_points() != self.grid.len() {
            return Err(Error::Shape {
                expected: self.grid.len(),
                got: psi.n_points(),
            });
        }
        if psi.n_channels() != self.channels.len() {
            return Err(Error::Shape {
                expected: self.channels.len(),
                got: psi.n_channels(),
            });
        }
        Ok(())
    }

    /// `out = Ĥ(t) ψ`.
    pub fn apply_hamiltonian(
        &self,
        psi: &Wavefunction,
        t: f64,
        out: &mut Wavefunction,
        ws: &mut HamiltonianWorkspace,
    ) -> Result<()> {
        self.check_shape(psi)?;
        self.check_shape(out)?;
        let all: Vec<usize> = (0..self.channels.len()).collect();
        self.apply_affine(
            psi.as_slice(),
            self.field_at(t),
            out.as_mut_slice(),
            Affine::PLAIN,
            &all,
            ws,
        );
        Ok(())
    }

    /// Channels belonging to `m` blocks that carry any amplitude. `Ĥ` never
    /// couples different `m`, so the remaining channels stay exactly zero.
    pub fn active_channels(&self, psi: &Wavefunction) -> Vec<usize> {
        let mut live_m = std::collections::BTreeSet::new();
        for c in self.channels.channels() {
            if psi.channel(c.flat_index).iter().any(|z| *z != Complex64::default()) {
                live_m.insert(c.m());
            }
        }
        self.channels
            .channels()
            .iter()
            .filter(|c| live_m.contains(&c.m()))
            .map(|c| c.flat_index)
            .collect()
    }

    /// `out ← α Ĥψ + β ψ + γ out` over the listed channels, with the field
    /// frozen at `field`. Channels outside `active` are left untouched.
    pub(crate) fn apply_affine(
        &self,
        psi: &[Complex64],
        field: f64,
        out: &mut [Complex64],
        affine: Affine,
        active: &[usize],
        ws: &mut HamiltonianWorkspace,
    ) {
        let n = self.grid.len();
        let Affine { alpha, beta, gamma } = affine;
        for &c in active {
            let ch = self.channels.get(c);
            let psi_c = &psi[c * n..(c + 1) * n];
            ws.buf.copy_from_slice(psi_c);
            self.grid
                .apply_momentum_diagonal(&mut ws.buf, &self.kinetic, &mut ws.scratch);
            let v = &self.potentials[ch.electronic as usize];
            let jj = centrifugal_factor(ch.j());
            let couplings = self.channels.couplings(c);
            let out_c = &mut out[c * n..(c + 1) * n];
            for i in 0..n {
                let mut h = ws.buf[i] + (v[i] + jj * self.inv_two_m_r2[i]) * psi_c[i];
                if field != 0.0 {
                    let mut coupled = Complex64::default();
                    for &(p, cos) in couplings {
                        coupled += cos * psi[p * n + i];
                    }
                    h -= field * self.dipole[i] * coupled;
                }
                let value = alpha * h + beta * psi_c[i];
                out_c[i] = if gamma == 0.0 {
                    value
                } else {
                    value + gamma * out_c[i]
                };
            }
        }
    }

    /// Bounds enclosing every Rayleigh quotient of `Ĥ(t)` for all `t`.
    pub fn spectral_bounds(&self) -> SpectralBounds {
        let p_max = self.grid.nyquist_momentum();
        let kinetic_max = 0.5 * p_max * p_max / self.reduced_mass();
        let v_max = self.potentials.iter().flatten().copied().fold(f64::MIN, f64::max);
        let v_min = self.potentials.iter().flatten().copied().fold(f64::MAX, f64::min);
        let centrifugal_max = centrifugal_factor(self.channels.j_max()) * self.inv_two_m_r2[0];
        // |⟨cos θ⟩| ≤ 1 for any truncation of the rotational basis
        let mu_max = self.dipole.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let coupling = self.params.pulse.peak_field.abs() * mu_max;
        SpectralBounds {
            e_min: v_min - coupling,
            e_max: kinetic_max + v_max + centrifugal_max + coupling,
        }
    }

    /// Lowest vibrational eigenpair of the ground surface for rotational
    /// quantum number `j`.
    pub fn vibrational_ground_state(&self, j: u32) -> Result<VibrationalState> {
        eigen::vibrational_ground_state(self, j)
    }
}

/// Coefficients of [`MolecularSystem::apply_affine`].
#[derive(Debug, Clone, Copy)]
pub(crate) struct Affine {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Affine {
    pub const PLAIN: Affine = Affine {
        alpha: 1.0,
        beta: 0.0,
        gamma: 0.0,
    };
}
