use num_complex::Complex64;
use rayon::prelude::*;

use super::{realization_seed, unit_phasors, ThermalEnsemble};
use crate::error::{Error, Result};
use crate::observables::{FragmentState, MomentumBins, MomentumDensity};
use crate::propagator::Propagation;
use crate::system::MolecularSystem;
use crate::wavefunction::Wavefunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Backend {
    Exact,
    Rpw,
    DeterministicPhase,
}

impl Backend {
    pub fn tag(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Rpw => "rpw",
            Backend::DeterministicPhase => "detphase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MemberKind {
    /// Pure state `i` of the ensemble.
    Exact { state: usize },
    /// Random-phase superposition with phases drawn from `seed`.
    Rpw { seed: u64 },
    /// Discrete-Fourier phase superposition `k`.
    Phased { k: usize },
}

/// One propagation of an ensemble together with its averaging weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemberJob {
    pub index: usize,
    pub weight: f64,
    pub kind: MemberKind,
}

impl MemberJob {
    pub fn seed(&self) -> Option<u64> {
        match self.kind {
            MemberKind::Rpw { seed } => Some(seed),
            _ => None,
        }
    }

    /// Superposition coefficients over the ensemble states (before the
    /// `√P_B` factors).
    pub fn coefficients(&self, ensemble: &ThermalEnsemble) -> Vec<Complex64> {
        match self.kind {
            MemberKind::Exact { state } => {
                let mut c = vec![Complex64::default(); ensemble.len()];
                c[state] = Complex64::new(1.0 / ensemble.states()[state].weight.sqrt(), 0.0);
                c
            }
            MemberKind::Rpw { seed } => unit_phasors(&ensemble.rpw_phases(seed)),
            MemberKind::Phased { k } => unit_phasors(&ensemble.deterministic_phases(k)),
        }
    }

    pub fn initial_state(&self, ensemble: &ThermalEnsemble, sys: &MolecularSystem) -> Result<Wavefunction> {
        ensemble.superposition(sys, &self.coefficients(ensemble))
    }
}

/// Members of an ensemble run. The exact back-end has one member per
/// occupied state; the deterministic-phase back-end has `N_init`; the
/// random-phase back-end has `realizations`, seeded per index.
pub fn jobs(backend: Backend, ensemble: &ThermalEnsemble, realizations: usize, master_seed: u64) -> Vec<MemberJob> {
    match backend {
        Backend::Exact => ensemble
            .states()
            .iter()
            .enumerate()
            .map(|(i, s)| MemberJob {
                index: i,
                weight: s.weight,
                kind: MemberKind::Exact { state: i },
            })
            .collect(),
        Backend::Rpw => (0..realizations)
            .map(|k| MemberJob {
                index: k,
                weight: 1.0 / realizations as f64,
                kind: MemberKind::Rpw {
                    seed: realization_seed(master_seed, k as u64),
                },
            })
            .collect(),
        Backend::DeterministicPhase => {
            let n = ensemble.len();
            (0..n)
                .map(|k| MemberJob {
                    index: k,
                    weight: 1.0 / n as f64,
                    kind: MemberKind::Phased { k },
                })
                .collect()
        }
    }
}

/// Observables of one member.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberObservables {
    pub probability: f64,
    /// `𝒫 ℰ`.
    pub energy_weight: f64,
    /// Absent when nothing dissociated.
    pub kinetic_energy: Option<f64>,
    pub density: MomentumDensity,
}

impl MemberObservables {
    pub fn from_fragments(fragments: &FragmentState, bins: &MomentumBins) -> Result<Self> {
        Ok(MemberObservables {
            probability: fragments.probability(),
            energy_weight: fragments.energy_weight(),
            kinetic_energy: fragments.kinetic_energy().ok(),
            density: fragments.density(bins)?,
        })
    }
}

/// Propagates one member to the final time.
pub fn evaluate_member(
    sys: &MolecularSystem,
    propagation: &Propagation,
    ensemble: &ThermalEnsemble,
    job: &MemberJob,
    bins: &MomentumBins,
) -> Result<(FragmentState, MemberObservables)> {
    let psi0 = job.initial_state(ensemble, sys)?;
    let evolution = propagation.run(sys, psi0)?;
    let fragments = FragmentState::from_evolution(sys, &evolution)?;
    let observables = MemberObservables::from_fragments(&fragments, bins)?;
    Ok((fragments, observables))
}

/// Why a member produced no observables.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberFailure {
    pub message: String,
    /// The Chebyshev recursion diverged.
    pub instability: bool,
}

impl From<Error> for MemberFailure {
    fn from(e: Error) -> Self {
        MemberFailure {
            instability: matches!(e, Error::Instability { .. }),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MemberRecord {
    pub job: MemberJob,
    pub outcome: std::result::Result<MemberObservables, MemberFailure>,
}

/// Weighted sums over members; `ℰ = Σ w𝒫ℰ / Σ w𝒫`.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub probability: f64,
    pub energy_weight: f64,
    pub density: MomentumDensity,
}

impl Aggregate {
    pub fn new(bins: MomentumBins, j_max: u32) -> Self {
        Aggregate {
            probability: 0.0,
            energy_weight: 0.0,
            density: MomentumDensity::zeros(bins, j_max),
        }
    }

    pub fn add(&mut self, weight: f64, member: &MemberObservables) -> Result<()> {
        self.probability += weight * member.probability;
        self.energy_weight += weight * member.energy_weight;
        self.density.add_scaled(weight, &member.density)
    }

    pub fn kinetic_energy(&self) -> Option<f64> {
        (self.probability > 0.0).then(|| self.energy_weight / self.probability)
    }
}

/// Sums the successful members in index order.
pub fn aggregate(records: &[MemberRecord], bins: &MomentumBins, j_max: u32) -> Result<Aggregate> {
    let mut agg = Aggregate::new(bins.clone(), j_max);
    for r in records {
        if let Ok(obs) = &r.outcome {
            agg.add(r.job.weight, obs)?;
        }
    }
    Ok(agg)
}

#[derive(Debug, Clone)]
pub struct EnsembleResult {
    pub backend: Backend,
    pub members: Vec<MemberRecord>,
    pub probability: f64,
    pub kinetic_energy: Option<f64>,
    pub density: MomentumDensity,
    /// False when any member failed.
    pub complete: bool,
    pub pruned_mass: f64,
}

impl EnsembleResult {
    pub fn from_records(
        backend: Backend,
        members: Vec<MemberRecord>,
        bins: &MomentumBins,
        j_max: u32,
        pruned_mass: f64,
    ) -> Result<Self> {
        let agg = aggregate(&members, bins, j_max)?;
        Ok(EnsembleResult {
            backend,
            complete: members.iter().all(|m| m.outcome.is_ok()),
            members,
            probability: agg.probability,
            kinetic_energy: agg.kinetic_energy(),
            density: agg.density,
            pruned_mass,
        })
    }

    /// Per-member `𝒫ᵏ` of the successful members, in index order.
    pub fn member_probabilities(&self) -> Vec<f64> {
        self.members
            .iter()
            .filter_map(|m| m.outcome.as_ref().ok().map(|o| o.probability))
            .collect()
    }
}

/// Propagates every member of `backend` on the rayon pool and aggregates
/// in index order, so the result does not depend on scheduling.
pub fn run_ensemble(
    backend: Backend,
    sys: &MolecularSystem,
    propagation: &Propagation,
    ensemble: &ThermalEnsemble,
    realizations: usize,
    master_seed: u64,
    bins: &MomentumBins,
) -> Result<EnsembleResult> {
    let members: Vec<MemberRecord> = jobs(backend, ensemble, realizations, master_seed)
        .into_par_iter()
        .map(|job| MemberRecord {
            job,
            outcome: evaluate_member(sys, propagation, ensemble, &job, bins)
                .map(|(_, obs)| obs)
                .map_err(MemberFailure::from),
        })
        .collect();
    EnsembleResult::from_records(backend, members, bins, sys.channels().j_max(), ensemble.pruned_mass())
}

/// Final fragment states of arbitrary superpositions, assembled from the
/// propagated exact members. The dynamics is linear, so a superposition of
/// initial states ends as the same superposition of final states.
#[derive(Debug, Clone, Copy)]
pub struct Replay<'a> {
    ensemble: &'a ThermalEnsemble,
    members: &'a [FragmentState],
}

impl<'a> Replay<'a> {
    /// `members[i]` must be the final state of exact member `i`.
    pub fn new(ensemble: &'a ThermalEnsemble, members: &'a [FragmentState]) -> Result<Self> {
        if members.len() != ensemble.len() {
            return Err(Error::Shape {
                expected: ensemble.len(),
                got: members.len(),
            });
        }
        Ok(Replay { ensemble, members })
    }

    pub fn fragments(&self, job: &MemberJob) -> Result<FragmentState> {
        let coefficients = job.coefficients(self.ensemble);
        let terms: Vec<(Complex64, &FragmentState)> = coefficients
            .iter()
            .zip(self.ensemble.states())
            .zip(self.members)
            .filter(|((c, _), _)| **c != Complex64::default())
            .map(|((c, s), f)| (c * s.weight.sqrt(), f))
            .collect();
        FragmentState::superpose(&terms)
    }

    pub fn evaluate(&self, job: &MemberJob, bins: &MomentumBins) -> Result<(FragmentState, MemberObservables)> {
        let fragments = self.fragments(job)?;
        let observables = MemberObservables::from_fragments(&fragments, bins)?;
        Ok((fragments, observables))
    }
}
