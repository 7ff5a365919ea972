use log::warn;
use num_complex::Complex64;

use crate::angular::ChannelSet;
use crate::error::{Error, Result};
use crate::grid::RadialGrid;
use crate::system::MolecularSystem;
use crate::wavefunction::Wavefunction;

/// Ground-surface absorption beyond which the grid is declared too small.
pub const GROUND_ABSORPTION_LIMIT: f64 = 1e-3;
const GROUND_ABSORPTION_WARNING: f64 = 1e-8;

/// Multiplicative mask `cos^{1/8}(π/2 · (r - r_abs)/(r_max - r_abs))` beyond
/// the onset radius and exactly 1 before it.
#[derive(Debug, Clone)]
pub struct AbsorberSpec {
    onset: f64,
    enabled: bool,
    mask: Vec<f64>,
}

impl AbsorberSpec {
    pub fn new(grid: &RadialGrid, onset: f64) -> Result<Self> {
        if !(onset > grid.r_min() && onset < grid.r_max()) {
            return Err(Error::Config(format!(
                "absorber onset {onset} must lie inside ({}, {})",
                grid.r_min(),
                grid.r_max()
            )));
        }
        let width = grid.r_max() - onset;
        let mask = grid
            .points()
            .iter()
            .map(|&r| {
                if r <= onset {
                    1.0
                } else {
                    (0.5 * std::f64::consts::PI * (r - onset) / width).cos().powf(0.125)
                }
            })
            .collect();
        Ok(AbsorberSpec {
            onset,
            enabled: true,
            mask,
        })
    }

    pub fn disabled(grid: &RadialGrid) -> Self {
        AbsorberSpec {
            onset: grid.r_max(),
            enabled: false,
            mask: vec![1.0; grid.len()],
        }
    }

    pub fn is_enabled(&self) -> bool {
        self.enabled
    }

    pub fn onset(&self) -> f64 {
        self.onset
    }

    pub fn mask(&self) -> &[f64] {
        &self.mask
    }

    /// First grid index where the mask drops below 1.
    fn first_masked(&self) -> usize {
        self.mask.iter().position(|&m| m < 1.0).unwrap_or(self.mask.len())
    }
}

/// Outgoing fragment amplitude removed by the absorber, banked in momentum
/// space per dissociative channel.
///
/// Amplitudes are stored in the free interaction picture,
/// `Ã(p) = Σ e^{+ip²t/2mᵣ} δψ̃(p, t)`, so that the asymptotic amplitude at
/// any later time `t_f` is `Ã(p) e^{-ip²t_f/2mᵣ}`.
#[derive(Debug, Clone)]
pub struct FragmentAccumulator {
    n_points: usize,
    /// Flat indices of the dissociative channels, in channel order.
    channels: Vec<usize>,
    amplitudes: Vec<Complex64>,
    absorbed_norm: f64,
    absorbed_ground_norm: f64,
    warned: bool,
}

impl FragmentAccumulator {
    pub fn new(channels: &ChannelSet, grid: &RadialGrid) -> Self {
        let diss: Vec<usize> = channels.dissociative().map(|c| c.flat_index).collect();
        FragmentAccumulator {
            n_points: grid.len(),
            amplitudes: vec![Complex64::default(); diss.len() * grid.len()],
            channels: diss,
            absorbed_norm: 0.0,
            absorbed_ground_norm: 0.0,
            warned: false,
        }
    }

    /// Norm removed from the dissociative channels so far.
    pub fn absorbed_norm(&self) -> f64 {
        self.absorbed_norm
    }

    /// Norm removed from the bound surface so far.
    pub fn absorbed_ground_norm(&self) -> f64 {
        self.absorbed_ground_norm
    }

    /// Dissociative channel flat indices matching the amplitude blocks.
    pub fn channels(&self) -> &[usize] {
        &self.channels
    }

    /// Interaction-picture amplitudes (channel-major).
    pub fn raw_amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Banked momentum amplitudes evolved freely to `t_final`.
    pub fn amplitudes_at(&self, t_final: f64, sys: &MolecularSystem) -> Vec<Complex64> {
        let phases: Vec<Complex64> = sys
            .kinetic_factors()
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t_final))
            .collect();
        self.amplitudes
            .chunks(self.n_points)
            .flat_map(|block| block.iter().zip(&phases).map(|(a, ph)| a * ph))
            .collect()
    }
}

/// Applies the mask to every active channel at time `t`, banking the
/// removed dissociative amplitude in `acc`.
pub fn absorb_and_accumulate(
    psi: &mut Wavefunction,
    acc: &mut FragmentAccumulator,
    absorber: &AbsorberSpec,
    t: f64,
    sys: &MolecularSystem,
    active: &[usize],
) -> Result<()> {
    if !absorber.is_enabled() {
        return Ok(());
    }
    let grid = sys.grid();
    let n = grid.len();
    let start = absorber.first_masked();
    let mut removed = vec![Complex64::default(); n];
    let mut scratch = vec![Complex64::default(); grid.scratch_len()];
    let free_phase: Vec<Complex64> = sys
        .kinetic_factors()
        .iter()
        .map(|&e| Complex64::from_polar(1.0, e * t))
        .collect();
    for &c in active {
        let ch = psi.channel_mut(c);
        let mut lost = 0.0;
        removed.iter_mut().for_each(|z| *z = Complex64::default());
        for i in start..n {
            let m = absorber.mask[i];
            lost += (1.0 - m * m) * ch[i].norm_sqr();
            removed[i] = (1.0 - m) * ch[i];
            ch[i] *= m;
        }
        lost *= grid.dr();
        match acc.channels.binary_search(&c) {
            Ok(slot) => {
                acc.absorbed_norm += lost;
                grid.to_momentum_in_place(&mut removed, &mut scratch);
                let bank = &mut acc.amplitudes[slot * n..(slot + 1) * n];
                for ((a, d), ph) in bank.iter_mut().zip(&removed).zip(&free_phase) {
                    *a += d * ph;
                }
            }
            Err(_) => {
                acc.absorbed_ground_norm += lost;
            }
        }
    }
    if acc.absorbed_ground_norm > GROUND_ABSORPTION_LIMIT {
        return Err(Error::GridTooSmall(acc.absorbed_ground_norm));
    }
    if acc.absorbed_ground_norm > GROUND_ABSORPTION_WARNING && !acc.warned {
        warn!(
            "bound-surface amplitude reached the absorber ({:.2e} of the norm)",
            acc.absorbed_ground_norm
        );
        acc.warned = true;
    }
    Ok(())
}
