//! Ground vibrational state of a single radial channel by dense
//! diagonalization of the Fourier-grid Hamiltonian.
//!
//! The kinetic matrix is the exact periodic one used by the propagator, so
//! the eigenvector is also an eigenvector of the matrix-free operator. Only
//! a window around the potential well is diagonalized; the window grows
//! until the eigenvector has decayed to round-off at both ends.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use super::MolecularSystem;
use crate::angular::{centrifugal_factor, GROUND};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct VibrationalState {
    pub j: u32,
    /// Real amplitudes on the full grid, `Σ|Φ|²Δr = 1`.
    pub amplitudes: Vec<f64>,
    /// Eigenvalue in hartree.
    pub energy: f64,
}

const EDGE_TOLERANCE: f64 = 1e-14;

pub(super) fn vibrational_ground_state(sys: &MolecularSystem, j: u32) -> Result<VibrationalState> {
    let grid = sys.grid();
    let n = grid.len();
    let jj = centrifugal_factor(j);
    let v_eff: Vec<f64> = sys
        .potential(GROUND)
        .iter()
        .zip(sys.inv_two_m_r2())
        .map(|(v, c)| v + jj * c)
        .collect();

    // column 0 of the periodic kinetic matrix: T_ik = t[(i - k) mod n]
    let mut kernel = vec![Complex64::default(); n];
    kernel[0] = Complex64::new(1.0, 0.0);
    let mut scratch = vec![Complex64::default(); grid.scratch_len()];
    grid.apply_momentum_diagonal(&mut kernel, sys.kinetic_factors(), &mut scratch);
    let t: Vec<f64> = kernel.iter().map(|z| z.re).collect();

    let (i_min, v_min) = v_eff
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::MAX), |acc, (i, v)| if v < acc.1 { (i, v) } else { acc });
    let asymptote = v_eff[n - 1];
    let ceiling = v_min + 0.25 * (asymptote - v_min).max(0.0);
    let mut lo = i_min;
    while lo > 0 && v_eff[lo - 1] <= ceiling {
        lo -= 1;
    }
    let mut hi = i_min;
    while hi + 1 < n && v_eff[hi + 1] <= ceiling {
        hi += 1;
    }
    lo = lo.saturating_sub(16);
    hi = (hi + 16).min(n - 1);

    loop {
        let w = hi - lo + 1;
        let h = DMatrix::from_fn(w, w, |a, b| {
            let d = (a + n - b) % n;
            let mut x = t[d];
            if a == b {
                x += v_eff[lo + a];
            }
            x
        });
        let eig = SymmetricEigen::new(h);
        let k = eig
            .eigenvalues
            .iter()
            .enumerate()
            .fold((0, f64::MAX), |acc, (i, &e)| if e < acc.1 { (i, e) } else { acc })
            .0;
        let vec = eig.eigenvectors.column(k);
        let peak = vec.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let edge = vec[0].abs().max(vec[1].abs()).max(vec[w - 1].abs()).max(vec[w - 2].abs());
        let full = lo == 0 && hi == n - 1;
        if edge <= EDGE_TOLERANCE * peak || full {
            let mut amplitudes = vec![0.0; n];
            amplitudes[lo..=hi].copy_from_slice(vec.as_slice());
            let norm = (amplitudes.iter().map(|x| x * x).sum::<f64>() * grid.dr()).sqrt();
            let sign = if amplitudes[i_min] < 0.0 { -1.0 } else { 1.0 };
            amplitudes.iter_mut().for_each(|x| *x *= sign / norm);
            let energy = rayleigh_quotient(sys, &v_eff, &amplitudes);
            if energy >= asymptote {
                return Err(Error::Unbound {
                    j,
                    energy,
                    asymptote,
                });
            }
            return Ok(VibrationalState {
                j,
                amplitudes,
                energy,
            });
        }
        let grow = w / 2 + 1;
        lo = lo.saturating_sub(grow);
        hi = (hi + grow).min(n - 1);
    }
}

/// `⟨Φ|Ĥ|Φ⟩` on the full grid for normalized `Φ`.
fn rayleigh_quotient(sys: &MolecularSystem, v_eff: &[f64], phi: &[f64]) -> f64 {
    let grid = sys.grid();
    let mut buf: Vec<Complex64> = phi.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let mut scratch = vec![Complex64::default(); grid.scratch_len()];
    grid.apply_momentum_diagonal(&mut buf, sys.kinetic_factors(), &mut scratch);
    phi.iter()
        .zip(&buf)
        .zip(v_eff)
        .map(|((&x, tx), v)| x * (tx.re + v * x))
        .sum::<f64>()
        * grid.dr()
}
