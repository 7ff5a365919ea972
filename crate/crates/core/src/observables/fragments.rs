use num_complex::Complex64;

use crate::angular::EXCITED;
use crate::error::{Error, Result};
use crate::propagator::Evolution;
use crate::system::MolecularSystem;

use super::distribution::{MomentumBins, MomentumDensity};

/// Momentum amplitudes of one `m` block of dissociative channels,
/// `j = |m| ..= j_max`, laid out `j`-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentBlock {
    pub m: i32,
    /// Amplitude removed by the absorber, evolved freely to the final time.
    pub banked: Vec<Complex64>,
    /// Transform of the amplitude left on the grid.
    pub residue: Vec<Complex64>,
}

/// Final dissociative state of one propagation, in momentum space.
#[derive(Debug, Clone, PartialEq)]
pub struct FragmentState {
    n_points: usize,
    dp: f64,
    reduced_mass: f64,
    j_max: u32,
    momenta: Vec<f64>,
    /// Sorted by `m`; blocks that never carried amplitude are omitted.
    blocks: Vec<FragmentBlock>,
}

impl FragmentState {
    pub fn from_evolution(sys: &MolecularSystem, evolution: &Evolution) -> Result<Self> {
        sys.check_shape(&evolution.psi)?;
        let grid = sys.grid();
        let n = grid.len();
        let channels = sys.channels();
        let banked_all = evolution.fragments.amplitudes_at(evolution.t_final, sys);
        let bank_slots = evolution.fragments.channels();
        let mut scratch = vec![Complex64::default(); grid.scratch_len()];
        let mut blocks = Vec::new();
        for m in channels.m_values() {
            let js = m.unsigned_abs()..=channels.j_max();
            let nj = js.clone().count();
            let mut block = FragmentBlock {
                m,
                banked: vec![Complex64::default(); nj * n],
                residue: vec![Complex64::default(); nj * n],
            };
            let mut live = false;
            for (slot, j) in js.enumerate() {
                let c = channels
                    .index_of(EXCITED, j, m)
                    .expect("every (j, m) of the set has an excited channel");
                let grid_amp = evolution.psi.channel(c);
                let out = &mut block.residue[slot * n..(slot + 1) * n];
                out.copy_from_slice(grid_amp);
                grid.to_momentum_in_place(out, &mut scratch);
                if let Ok(b) = bank_slots.binary_search(&c) {
                    block.banked[slot * n..(slot + 1) * n]
                        .copy_from_slice(&banked_all[b * n..(b + 1) * n]);
                }
                live |= grid_amp.iter().any(|z| *z != Complex64::default());
            }
            live |= block.banked.iter().any(|z| *z != Complex64::default());
            if live {
                blocks.push(block);
            }
        }
        Ok(FragmentState {
            n_points: n,
            dp: grid.dp(),
            reduced_mass: sys.reduced_mass(),
            j_max: channels.j_max(),
            momenta: grid.momenta().to_vec(),
            blocks,
        })
    }

    /// Empty state compatible with `sys`.
    pub fn empty(sys: &MolecularSystem) -> Self {
        FragmentState {
            n_points: sys.grid().len(),
            dp: sys.grid().dp(),
            reduced_mass: sys.reduced_mass(),
            j_max: sys.channels().j_max(),
            momenta: sys.grid().momenta().to_vec(),
            blocks: Vec::new(),
        }
    }

    /// Rebuilds a state from stored parts, checking block sizes.
    pub fn from_parts(
        dp: f64,
        reduced_mass: f64,
        j_max: u32,
        momenta: Vec<f64>,
        mut blocks: Vec<FragmentBlock>,
    ) -> Result<Self> {
        let n = momenta.len();
        for b in &blocks {
            let nj = if b.m.unsigned_abs() > j_max {
                0
            } else {
                (j_max - b.m.unsigned_abs() + 1) as usize
            };
            if nj == 0 || b.banked.len() != nj * n || b.residue.len() != nj * n {
                return Err(Error::Shape {
                    expected: nj * n,
                    got: b.banked.len(),
                });
            }
        }
        blocks.sort_by_key(|b| b.m);
        Ok(FragmentState {
            n_points: n,
            dp,
            reduced_mass,
            j_max,
            momenta,
            blocks,
        })
    }

    pub fn reduced_mass(&self) -> f64 {
        self.reduced_mass
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn momenta(&self) -> &[f64] {
        &self.momenta
    }

    pub fn blocks(&self) -> &[FragmentBlock] {
        &self.blocks
    }

    pub fn block(&self, m: i32) -> Option<&FragmentBlock> {
        self.blocks.iter().find(|b| b.m == m)
    }

    /// Banked and residue amplitudes of channel `(j, m)`, if present.
    pub fn channel(&self, j: u32, m: i32) -> Option<(&[Complex64], &[Complex64])> {
        if j > self.j_max || m.unsigned_abs() > j {
            return None;
        }
        let b = self.block(m)?;
        let slot = (j - m.unsigned_abs()) as usize;
        let r = slot * self.n_points..(slot + 1) * self.n_points;
        Some((&b.banked[r.clone()], &b.residue[r]))
    }

    fn amplitudes(&self) -> impl Iterator<Item = (usize, &Complex64)> {
        let n = self.n_points;
        self.blocks.iter().flat_map(move |b| {
            b.banked
                .iter()
                .chain(&b.residue)
                .enumerate()
                .map(move |(i, z)| (i % n, z))
        })
    }

    /// Dissociation probability: total norm on the dissociative surface.
    pub fn probability(&self) -> f64 {
        self.amplitudes().map(|(_, z)| z.norm_sqr()).sum::<f64>() * self.dp
    }

    /// Unconditional `⟨p²/2mᵣ⟩` over the dissociative surface, i.e. `𝒫ℰ`.
    pub fn energy_weight(&self) -> f64 {
        let scale = 0.5 / self.reduced_mass;
        self.amplitudes()
            .map(|(k, z)| z.norm_sqr() * self.momenta[k] * self.momenta[k])
            .sum::<f64>()
            * scale
            * self.dp
    }

    /// Mean fragment kinetic energy, conditional on dissociation.
    pub fn kinetic_energy(&self) -> Result<f64> {
        let p = self.probability();
        if p == 0.0 {
            return Err(Error::Undefined("kinetic energy of an empty fragment state"));
        }
        Ok(self.energy_weight() / p)
    }

    /// `Σ cᵢ Sᵢ`, taken block by block; all terms must share one grid.
    pub fn superpose(terms: &[(Complex64, &FragmentState)]) -> Result<FragmentState> {
        let first = terms
            .first()
            .ok_or(Error::Undefined("superposition of no fragment states"))?
            .1;
        let mut out = FragmentState {
            n_points: first.n_points,
            dp: first.dp,
            reduced_mass: first.reduced_mass,
            j_max: first.j_max,
            momenta: first.momenta.clone(),
            blocks: Vec::new(),
        };
        for (c, s) in terms {
            if s.n_points != out.n_points || s.j_max != out.j_max || s.dp != out.dp {
                return Err(Error::Shape {
                    expected: out.n_points,
                    got: s.n_points,
                });
            }
            for b in &s.blocks {
                let pos = match out.blocks.binary_search_by_key(&b.m, |x| x.m) {
                    Ok(p) => p,
                    Err(p) => {
                        out.blocks.insert(
                            p,
                            FragmentBlock {
                                m: b.m,
                                banked: vec![Complex64::default(); b.banked.len()],
                                residue: vec![Complex64::default(); b.residue.len()],
                            },
                        );
                        p
                    }
                };
                let target = &mut out.blocks[pos];
                for (o, z) in target.banked.iter_mut().zip(&b.banked) {
                    *o += c * z;
                }
                for (o, z) in target.residue.iter_mut().zip(&b.residue) {
                    *o += c * z;
                }
            }
        }
        Ok(out)
    }

    /// Real parts of the per-`(m, P)` density matrices over `j`, folding
    /// `±p` and both sources incoherently.
    pub fn density(&self, bins: &MomentumBins) -> Result<MomentumDensity> {
        if bins.n_points() != self.n_points || bins.dp() != self.dp {
            return Err(Error::Shape {
                expected: bins.n_points(),
                got: self.n_points,
            });
        }
        let mut density = MomentumDensity::zeros(bins.clone(), self.j_max);
        let n = self.n_points;
        for b in &self.blocks {
            let nj = (self.j_max - b.m.unsigned_abs() + 1) as usize;
            let rho = density.block_mut(b.m);
            for (kb, &(pos, neg)) in bins.indices().iter().enumerate() {
                let cell = &mut rho[kb * nj * nj..(kb + 1) * nj * nj];
                for src in [&b.banked, &b.residue] {
                    for k in [pos, neg] {
                        for a in 0..nj {
                            let ca = src[a * n + k];
                            if ca == Complex64::default() {
                                continue;
                            }
                            for c in 0..nj {
                                let cc = src[c * n + k];
                                cell[a * nj + c] += (ca.conj() * cc).re;
                            }
                        }
                    }
                }
            }
        }
        Ok(density)
    }
}
