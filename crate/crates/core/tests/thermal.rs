mod common;

use common::*;
use num_complex::Complex64;
use photodiss::observables::{FragmentState, MomentumBins, PolarGrid};
use photodiss::propagator::{build_plan, AbsorberSpec, Propagation};
use photodiss::thermal::{
    evaluate_member, jobs, run_ensemble, Backend, JMaxPolicy, MemberKind, Replay, ThermalEnsemble,
};
use photodiss::units::FEMTOSECOND;
use rand::{Rng, SeedableRng};

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn ground_level_only() {
    let t = toy(2, 0, 0.0, 1);
    assert_eq!(t.ensemble.len(), 1);
    assert_eq!(t.ensemble.states()[0].weight, 1.0);
}

#[test]
fn nine_states_up_to_j_two() {
    let t = toy(3, 2, 0.0, 1);
    assert_eq!(t.ensemble.len(), 9);
    let total: f64 = t.ensemble.states().iter().map(|s| s.weight).sum();
    assert!((total - 1.0).abs() < 1e-12);
    // weights depend on j only
    for s in t.ensemble.states() {
        assert_eq!(s.weight, t.ensemble.spec().weights[s.j as usize]);
    }
    let spec = t.ensemble.spec();
    let degenerate: f64 = (0..=2).map(|j| (2 * j + 1) as f64 * spec.weights[j]).sum();
    assert!((degenerate - 1.0).abs() < 1e-12);
}

#[test]
fn pruning_reports_the_dropped_mass() {
    let sys = photodiss::presets::toy_system(5, None, 0.0).unwrap();
    let full = ThermalEnsemble::new(&sys, 10.0, JMaxPolicy::Fixed(4), 0.0).unwrap();
    let pruned = ThermalEnsemble::new(&sys, 10.0, JMaxPolicy::Fixed(4), 1e-10).unwrap();
    assert_eq!(full.len(), 25);
    assert!(pruned.len() < full.len());
    let dropped: f64 = full.states().iter().filter(|s| s.weight < 1e-10).map(|s| s.weight).sum();
    assert!(dropped > 0.0);
    assert!((pruned.pruned_mass() - dropped).abs() < 1e-24);
    let kept: f64 = pruned.states().iter().map(|s| s.weight).sum();
    assert!((kept - 1.0).abs() < 1e-12);
    for (a, b) in pruned.states().iter().zip(full.states()) {
        assert_eq!((a.j, a.m), (b.j, b.m));
        assert!((a.weight - b.weight / (1.0 - dropped)).abs() < 1e-15);
    }
}

#[test]
fn automatic_initial_j_max_stays_inside_the_basis() {
    let sys = photodiss::presets::toy_system(12, None, 0.0).unwrap();
    let e = ThermalEnsemble::new(&sys, 100.0, JMaxPolicy::Auto, 0.0).unwrap();
    let j = e.spec().j_max_initial;
    assert!((7..=11).contains(&j), "J_init = {j}");
    let too_small = photodiss::presets::toy_system(3, None, 0.0).unwrap();
    assert!(ThermalEnsemble::new(&too_small, 100.0, JMaxPolicy::Fixed(5), 0.0).is_err());
}

#[test]
fn rpw_norm_and_reproducibility() {
    let t = toy(3, 2, 0.0, 1);
    let dr = t.sys.grid().dr();
    for seed in [1u64, 2, 99, u64::MAX] {
        let a = t.ensemble.sample_rpw(&t.sys, seed).unwrap();
        let b = t.ensemble.sample_rpw(&t.sys, seed).unwrap();
        assert_eq!(a.phases, b.phases);
        assert_eq!(a.psi, b.psi);
        assert!((a.psi.norm_sqr(dr) - 1.0).abs() < 1e-12);
        assert!(a.phases.iter().all(|x| (0.0..2.0 * std::f64::consts::PI).contains(x)));
    }
}

#[test]
fn single_state_rpw_is_the_pure_state() {
    let t = toy(2, 0, 0.0, 1);
    let rpw = t.ensemble.sample_rpw(&t.sys, 17).unwrap();
    let exact = t.ensemble.member_state(&t.sys, 0).unwrap();
    let dr = t.sys.grid().dr();
    let overlap = exact.inner(&rpw.psi, dr);
    assert!((overlap.norm() - 1.0).abs() < 1e-12);
}

/// Overlaps `⟨member a| ρ̄ |member b⟩` of the uniform projector average.
fn averaged_projector(ensemble: &ThermalEnsemble, sys: &photodiss::system::MolecularSystem, states: &[photodiss::wavefunction::Wavefunction]) -> Vec<Vec<Complex64>> {
    let dr = sys.grid().dr();
    let n = ensemble.len();
    let members: Vec<_> = (0..n).map(|i| ensemble.member_state(sys, i).unwrap()).collect();
    let mut rho = vec![vec![Complex64::default(); n]; n];
    for psi in states {
        let proj: Vec<Complex64> = members.iter().map(|m| m.inner(psi, dr)).collect();
        for a in 0..n {
            for b in 0..n {
                rho[a][b] += proj[a] * proj[b].conj() / states.len() as f64;
            }
        }
    }
    rho
}

#[test]
fn two_point_phase_average_cancels_cross_terms() {
    let sys = photodiss::presets::toy_system(2, Some(0), 0.0).unwrap();
    let ensemble = ThermalEnsemble::new(&sys, 100.0, JMaxPolicy::Fixed(1), 0.0).unwrap();
    assert_eq!(ensemble.len(), 2);
    let pair: Vec<_> = [[1.0, 1.0], [1.0, -1.0]]
        .iter()
        .map(|c| {
            let c: Vec<Complex64> = c.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            ensemble.superposition(&sys, &c).unwrap()
        })
        .collect();
    let rho = averaged_projector(&ensemble, &sys, &pair);
    for a in 0..2 {
        for b in 0..2 {
            let expected = if a == b { ensemble.states()[a].weight } else { 0.0 };
            assert!((rho[a][b] - expected).norm() < 1e-12);
        }
    }
}

#[test]
fn deterministic_phases_reproduce_the_density() {
    let t = toy(3, 2, 0.0, 1);
    let set = t.ensemble.deterministic_phase_set(&t.sys).unwrap();
    assert_eq!(set.len(), 9);
    let rho = averaged_projector(&t.ensemble, &t.sys, &set);
    for a in 0..9 {
        for b in 0..9 {
            let expected = if a == b { t.ensemble.states()[a].weight } else { 0.0 };
            assert!((rho[a][b] - expected).norm() < 1e-12);
        }
    }
}

/// Off-diagonal elements of the averaged projector, in coefficient space.
#[test]
fn rpw_cross_terms_decay_as_inverse_root_k() {
    let t = toy(3, 2, 0.0, 1);
    let w: Vec<f64> = t.ensemble.states().iter().map(|s| s.weight).collect();
    let n = w.len();
    let ladder = [10usize, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000];
    let mut mean_offdiag = vec![0.0; ladder.len()];
    let ensembles = 10;
    for e in 0..ensembles {
        let mut acc = vec![Complex64::default(); n * n];
        let mut next = 0;
        for k in 0..10000 {
            let seed = photodiss::thermal::realization_seed(1000 + e, k as u64);
            let chi = t.ensemble.rpw_phases(seed);
            for a in 0..n {
                for b in 0..n {
                    if a != b {
                        acc[a * n + b] += Complex64::from_polar((w[a] * w[b]).sqrt(), chi[a] - chi[b]);
                    }
                }
            }
            if k + 1 == ladder[next] {
                let kk = (k + 1) as f64;
                let rms = (acc.iter().map(|z| (z / kk).norm_sqr()).sum::<f64>() / (n * n - n) as f64).sqrt();
                mean_offdiag[next] += rms / ensembles as f64;
                next += 1;
            }
        }
    }
    let ks: Vec<f64> = ladder.iter().map(|&k| k as f64).collect();
    let slope = log_log_slope(&ks, &mean_offdiag);
    assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
}

#[test]
fn deterministic_phase_back_end_equals_exact() {
    let t = toy(3, 2, 1e11, 300);
    let exact = run_ensemble(Backend::Exact, &t.sys, &t.propagation, &t.ensemble, 0, 0, &t.bins).unwrap();
    let det = run_ensemble(Backend::DeterministicPhase, &t.sys, &t.propagation, &t.ensemble, 0, 0, &t.bins).unwrap();
    assert!(exact.complete && det.complete);
    assert_eq!(det.members.len(), 9);
    assert!(exact.probability > 1e-4);
    assert!((exact.probability - det.probability).abs() < 1e-10 * exact.probability);
    let (ee, ed) = (exact.kinetic_energy.unwrap(), det.kinetic_energy.unwrap());
    assert!((ee - ed).abs() < 1e-10 * ee);
    let polar = PolarGrid::for_j_max(3, 24).unwrap();
    let (de, dd) = (exact.density.distribution(&polar), det.density.distribution(&polar));
    let scale = de.values.iter().fold(0.0f64, |m, v| m.max(*v));
    assert!(max_abs(&de.values, &dd.values) < 1e-10 * scale);

    // the ensemble energy is the 𝒫-weighted mean of member energies
    let (mut num, mut den) = (0.0, 0.0);
    for m in &exact.members {
        let o = m.outcome.as_ref().unwrap();
        num += m.job.weight * o.probability * o.kinetic_energy.unwrap();
        den += m.job.weight * o.probability;
    }
    assert!((num / den - ee).abs() < 1e-13 * ee);
}

#[test]
fn zero_field_means_zero_probability_everywhere() {
    let t = toy(3, 2, 0.0, 40);
    for backend in [Backend::Exact, Backend::Rpw, Backend::DeterministicPhase] {
        let r = run_ensemble(backend, &t.sys, &t.propagation, &t.ensemble, 3, 5, &t.bins).unwrap();
        assert_eq!(r.probability, 0.0, "{backend:?}");
        assert!(r.kinetic_energy.is_none());
    }
}

#[test]
fn replayed_realizations_match_propagated_ones() {
    let t = toy(3, 2, 1e11, 200);
    let exact_jobs = jobs(Backend::Exact, &t.ensemble, 0, 0);
    let members: Vec<FragmentState> = exact_jobs
        .iter()
        .map(|j| evaluate_member(&t.sys, &t.propagation, &t.ensemble, j, &t.bins).unwrap().0)
        .collect();
    let replay = Replay::new(&t.ensemble, &members).unwrap();
    for job in jobs(Backend::Rpw, &t.ensemble, 2, 77) {
        assert!(matches!(job.kind, MemberKind::Rpw { .. }));
        let (direct, obs) = evaluate_member(&t.sys, &t.propagation, &t.ensemble, &job, &t.bins).unwrap();
        let (replayed, robs) = replay.evaluate(&job, &t.bins).unwrap();
        assert!((direct.probability() - replayed.probability()).abs() < 1e-10 * direct.probability());
        assert!((obs.energy_weight - robs.energy_weight).abs() < 1e-10 * obs.energy_weight);
        for b in direct.blocks() {
            let r = replayed.block(b.m).unwrap();
            assert!(max_diff(&b.residue, &r.residue) < 1e-10);
        }
    }
}

#[test]
fn exact_distribution_matches_density_matrix_brute_force() {
    let sys = small_system(2, 1e13);
    let plan = build_plan(&sys, 0.1 * FEMTOSECOND, 1e-12).unwrap();
    let propagation = Propagation {
        plan,
        absorber: AbsorberSpec::disabled(sys.grid()),
        n_steps: 200,
    };
    let ensemble = ThermalEnsemble::new(&sys, 300.0, JMaxPolicy::Fixed(1), 0.0).unwrap();
    let bins = MomentumBins::new(sys.grid().len(), sys.grid().dp());
    let result = run_ensemble(Backend::Exact, &sys, &propagation, &ensemble, 0, 0, &bins).unwrap();

    let mut members = Vec::new();
    for job in jobs(Backend::Exact, &ensemble, 0, 0) {
        let evo = propagation.run(&sys, job.initial_state(&ensemble, &sys).unwrap()).unwrap();
        let amps: MemberAmplitudes = sys
            .channels()
            .dissociative()
            .map(|c| ((c.j(), c.m()), direct_transform(sys.grid(), evo.psi.channel(c.flat_index))))
            .collect();
        members.push((job.weight, amps));
    }
    let polar = PolarGrid::new(8).unwrap();
    let oracle = brute_force_distribution(&members, sys.grid().len(), sys.grid().dp(), polar.nodes());
    let dist = result.density.distribution(&polar);
    let scale = oracle.iter().fold(0.0f64, |m, v| m.max(*v));
    assert!(scale > 0.0);
    assert!(max_abs(&dist.values, &oracle) < 1e-9 * scale);
}

#[test]
fn rpw_estimator_is_unbiased() {
    let t = toy(3, 2, 1e11, 300);
    let exact_jobs = jobs(Backend::Exact, &t.ensemble, 0, 0);
    let members: Vec<FragmentState> = exact_jobs
        .iter()
        .map(|j| evaluate_member(&t.sys, &t.propagation, &t.ensemble, j, &t.bins).unwrap().0)
        .collect();
    let exact_p: f64 = exact_jobs.iter().zip(&members).map(|(j, f)| j.weight * f.probability()).sum();
    let exact_e: f64 = exact_jobs.iter().zip(&members).map(|(j, f)| j.weight * f.energy_weight()).sum();
    let replay = Replay::new(&t.ensemble, &members).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    let (mut ps, mut es) = (Vec::new(), Vec::new());
    for _ in 0..50 {
        let master: u64 = rng.random();
        let (mut p, mut e) = (0.0, 0.0);
        for job in jobs(Backend::Rpw, &t.ensemble, 100, master) {
            let f = replay.fragments(&job).unwrap();
            p += job.weight * f.probability();
            e += job.weight * f.energy_weight();
        }
        ps.push(p);
        es.push(e);
    }
    for (samples, exact) in [(ps, exact_p), (es, exact_e)] {
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let sd = (samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        assert!((mean - exact).abs() < 3.0 * sd / n.sqrt(), "{mean} vs {exact} (sd {sd})");
    }
}

#[test]
fn same_seed_same_running_means() {
    let t = toy(3, 2, 1e11, 30);
    let a = run_ensemble(Backend::Rpw, &t.sys, &t.propagation, &t.ensemble, 4, 9, &t.bins).unwrap();
    let b = run_ensemble(Backend::Rpw, &t.sys, &t.propagation, &t.ensemble, 4, 9, &t.bins).unwrap();
    let ma = photodiss::observables::running_means(&a.member_probabilities());
    let mb = photodiss::observables::running_means(&b.member_probabilities());
    assert_eq!(ma.iter().map(|x| x.to_bits()).collect::<Vec<_>>(), mb.iter().map(|x| x.to_bits()).collect::<Vec<_>>());
    assert_eq!(a.density, b.density);
}
