//! Thermal initial ensembles.
//!
//! The initial density is `ρ = Σ_{j,m} P_B(j) |Φ₀ⱼ, j, m⟩⟨Φ₀ⱼ, j, m|` on the
//! ground surface. The exact back-end propagates every occupied `(j, m)`
//! state; the random-phase back-end propagates superpositions
//! `Σ e^{iχ} √P_B(j) |Φ₀ⱼ, j, m⟩` whose projector average converges to `ρ`.
//! A deterministic variant uses discrete-Fourier phases, for which the
//! average over `N_init` members reproduces `ρ` exactly.

mod ensemble;

pub use ensemble::{
    aggregate, evaluate_member, jobs, run_ensemble, Aggregate, Backend, EnsembleResult, MemberJob,
    MemberFailure, MemberKind, MemberObservables, MemberRecord, Replay,
};

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};

use crate::angular::GROUND;
use crate::error::{Error, Result};
use crate::system::{MolecularSystem, VibrationalState};
use crate::units::BOLTZMANN;
use crate::wavefunction::Wavefunction;

pub const DEFAULT_PRUNE_THRESHOLD: f64 = 1e-10;
/// Fraction of the partition function captured by the automatic `J_init`.
pub const AUTO_J_MAX_COVERAGE: f64 = 1.0 - 1e-8;

/// `P_B(j) = e^{-βE_j}/𝒵` and `𝒵 = Σ_l (2l+1) e^{-βE_l}`, with energies
/// referenced to `E_0`.
pub fn boltzmann_weights(temperature_k: f64, energies: &[f64]) -> Result<(Vec<f64>, f64)> {
    weights_with_degeneracy(temperature_k, energies, |j| 2 * j as usize + 1)
}

fn weights_with_degeneracy(
    temperature_k: f64,
    energies: &[f64],
    degeneracy: impl Fn(u32) -> usize,
) -> Result<(Vec<f64>, f64)> {
    if !(temperature_k > 0.0) || !temperature_k.is_finite() {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {temperature_k} K"
        )));
    }
    let Some(&e0) = energies.first() else {
        return Err(Error::Domain("no rotational levels given".into()));
    };
    if energies.iter().any(|e| !e.is_finite()) {
        return Err(Error::Domain("rotational energies must be finite".into()));
    }
    let beta = 1.0 / (BOLTZMANN * temperature_k);
    let boltz: Vec<f64> = energies.iter().map(|e| (-beta * (e - e0)).exp()).collect();
    let z: f64 = boltz
        .iter()
        .enumerate()
        .map(|(j, b)| degeneracy(j as u32) as f64 * b)
        .sum();
    Ok((boltz.iter().map(|b| b / z).collect(), z))
}

/// Smallest `J` whose levels `0..=J` capture [`AUTO_J_MAX_COVERAGE`] of the
/// partition function. `energy(j)` is queried in increasing `j` until the
/// remaining terms are negligible or `j_limit` is reached.
pub fn auto_initial_j_max(
    temperature_k: f64,
    mut energy: impl FnMut(u32) -> Result<f64>,
    j_limit: u32,
) -> Result<u32> {
    if !(temperature_k > 0.0) {
        return Err(Error::Domain(format!(
            "temperature must be positive, got {temperature_k} K"
        )));
    }
    let beta = 1.0 / (BOLTZMANN * temperature_k);
    let e0 = energy(0)?;
    let mut terms = vec![1.0];
    let mut z = 1.0;
    for j in 1..=j_limit {
        let t = (2 * j + 1) as f64 * (-beta * (energy(j)? - e0)).exp();
        terms.push(t);
        z += t;
        if t < 1e-13 * z && t < terms[terms.len() - 2] {
            break;
        }
    }
    let mut acc = 0.0;
    for (j, t) in terms.iter().enumerate() {
        acc += t;
        if acc >= AUTO_J_MAX_COVERAGE * z {
            return Ok(j as u32);
        }
    }
    Ok(terms.len() as u32 - 1)
}

/// Boltzmann populations of the rotational levels `0..=J_init`.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSpec {
    pub temperature_k: f64,
    /// `1/k_BT` in inverse hartree.
    pub beta: f64,
    pub j_max_initial: u32,
    /// `E_j - E_0` in hartree.
    pub energies: Vec<f64>,
    /// `P_B(j)`, the weight of each single `(j, m)` state.
    pub weights: Vec<f64>,
    pub partition: f64,
}

impl ThermalSpec {
    /// Spec from absolute energies `E_0 ..= E_J`; `m_max` restricts which
    /// `(j, m)` states count towards `𝒵`.
    pub fn new(temperature_k: f64, energies: &[f64], m_max: Option<u32>) -> Result<Self> {
        let degeneracy = |j: u32| 2 * j.min(m_max.unwrap_or(j)) as usize + 1;
        let (weights, partition) = weights_with_degeneracy(temperature_k, energies, degeneracy)?;
        Ok(ThermalSpec {
            temperature_k,
            beta: 1.0 / (BOLTZMANN * temperature_k),
            j_max_initial: energies.len() as u32 - 1,
            energies: energies.iter().map(|e| e - energies[0]).collect(),
            weights,
            partition,
        })
    }
}

/// How the highest initially occupied level is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JMaxPolicy {
    Auto,
    Fixed(u32),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialState {
    pub j: u32,
    pub m: i32,
    /// `P_B(j)`, renormalized after pruning.
    pub weight: f64,
}

/// Per-realization seed: stream `k` of a generator keyed by the master seed.
pub fn realization_seed(master: u64, k: u64) -> u64 {
    let mut rng = ChaCha20Rng::seed_from_u64(master);
    rng.set_stream(k);
    rng.next_u64()
}

#[derive(Debug, Clone)]
pub struct RpwRealization {
    pub seed: u64,
    /// `χ` per occupied initial state, in state order.
    pub phases: Vec<f64>,
    pub psi: Wavefunction,
}

/// Occupied initial states with their vibrational wavefunctions.
#[derive(Debug, Clone)]
pub struct ThermalEnsemble {
    spec: ThermalSpec,
    states: Vec<InitialState>,
    pruned_mass: f64,
    vibrational: Vec<VibrationalState>,
}

impl ThermalEnsemble {
    pub fn new(
        sys: &MolecularSystem,
        temperature_k: f64,
        policy: JMaxPolicy,
        prune_threshold: f64,
    ) -> Result<Self> {
        let j_channels = sys.channels().j_max();
        let mut vibrational: Vec<VibrationalState> = Vec::new();
        let j_init = match policy {
            JMaxPolicy::Fixed(j) => j,
            JMaxPolicy::Auto => auto_initial_j_max(
                temperature_k,
                |j| {
                    if let Some(v) = vibrational.get(j as usize) {
                        return Ok(v.energy);
                    }
                    let v = sys.vibrational_ground_state(j)?;
                    let e = v.energy;
                    vibrational.push(v);
                    Ok(e)
                },
                j_channels,
            )?,
        };
        if j_init > j_channels {
            return Err(Error::Config(format!(
                "initial j_max {j_init} exceeds the channel basis j_max {j_channels}"
            )));
        }
        vibrational.truncate(j_init as usize + 1);
        for j in vibrational.len() as u32..=j_init {
            vibrational.push(sys.vibrational_ground_state(j)?);
        }
        let energies: Vec<f64> = vibrational.iter().map(|v| v.energy).collect();
        let m_max = sys.channels().m_max();
        let spec = ThermalSpec::new(temperature_k, &energies, m_max)?;

        let mut states = Vec::new();
        let mut pruned_mass = 0.0;
        for j in 0..=j_init {
            let w = spec.weights[j as usize];
            let mc = j.min(m_max.unwrap_or(j)) as i32;
            for m in -mc..=mc {
                if w < prune_threshold {
                    pruned_mass += w;
                } else {
                    states.push(InitialState { j, m, weight: w });
                }
            }
        }
        let kept = 1.0 - pruned_mass;
        for s in &mut states {
            s.weight /= kept;
        }
        Ok(ThermalEnsemble {
            spec,
            states,
            pruned_mass,
            vibrational,
        })
    }

    pub fn spec(&self) -> &ThermalSpec {
        &self.spec
    }

    pub fn states(&self) -> &[InitialState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    /// Thermal weight dropped by pruning (before renormalization).
    pub fn pruned_mass(&self) -> f64 {
        self.pruned_mass
    }

    pub fn vibrational(&self, j: u32) -> &VibrationalState {
        &self.vibrational[j as usize]
    }

    /// `Σᵢ cᵢ √wᵢ |Φ₀ⱼᵢ, jᵢ, mᵢ⟩` on the ground surface.
    pub fn superposition(&self, sys: &MolecularSystem, coefficients: &[Complex64]) -> Result<Wavefunction> {
        if coefficients.len() != self.states.len() {
            return Err(Error::Shape {
                expected: self.states.len(),
                got: coefficients.len(),
            });
        }
        let mut psi = sys.zero_wavefunction();
        for (s, c) in self.states.iter().zip(coefficients) {
            let ch = sys
                .channels()
                .index_of(GROUND, s.j, s.m)
                .ok_or_else(|| Error::Config(format!("state (j={}, m={}) outside the channel basis", s.j, s.m)))?;
            let amp = c * s.weight.sqrt();
            for (z, &phi) in psi.channel_mut(ch).iter_mut().zip(&self.vibrational(s.j).amplitudes) {
                *z += amp * phi;
            }
        }
        Ok(psi)
    }

    /// The normalized pure state `|Φ₀ⱼ, j, m⟩` of member `i`.
    pub fn member_state(&self, sys: &MolecularSystem, i: usize) -> Result<Wavefunction> {
        let mut c = vec![Complex64::default(); self.states.len()];
        let slot = c.get_mut(i).ok_or(Error::Shape {
            expected: self.states.len(),
            got: i,
        })?;
        *slot = Complex64::new(1.0 / self.states[i].weight.sqrt(), 0.0);
        self.superposition(sys, &c)
    }

    /// Uniform phases in `[0, 2π)`, one per occupied state.
    pub fn rpw_phases(&self, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.states.iter().map(|_| rng.random_range(0.0..2.0 * PI)).collect()
    }

    pub fn sample_rpw(&self, sys: &MolecularSystem, seed: u64) -> Result<RpwRealization> {
        let phases = self.rpw_phases(seed);
        let psi = self.superposition(sys, &unit_phasors(&phases))?;
        Ok(RpwRealization { seed, phases, psi })
    }

    /// Phases `χᵢᵏ = 2π k i / N_init` of deterministic member `k`.
    pub fn deterministic_phases(&self, k: usize) -> Vec<f64> {
        let n = self.states.len();
        (0..n)
            .map(|i| 2.0 * PI * ((k * i) % n) as f64 / n as f64)
            .collect()
    }

    pub fn deterministic_phase_set(&self, sys: &MolecularSystem) -> Result<Vec<Wavefunction>> {
        (0..self.states.len())
            .map(|k| self.superposition(sys, &unit_phasors(&self.deterministic_phases(k))))
            .collect()
    }
}

pub(crate) fn unit_phasors(phases: &[f64]) -> Vec<Complex64> {
    phases.iter().map(|&x| Complex64::from_polar(1.0, x)).collect()
}
