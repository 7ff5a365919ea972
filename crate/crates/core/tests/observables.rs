mod common;

use std::f64::consts::PI;

use common::*;
use num_complex::Complex64;
use photodiss::angular::EXCITED;
use photodiss::observables::{FragmentState, MomentumBins, PolarGrid};
use photodiss::propagator::{Evolution, FragmentAccumulator};
use photodiss::system::MolecularSystem;
use photodiss::thermal::{evaluate_member, jobs, Backend};
use photodiss::wavefunction::Wavefunction;
use photodiss::Error;

/// Wraps a hand-made grid state as a finished propagation.
fn settled(sys: &MolecularSystem, psi: Wavefunction) -> FragmentState {
    let evolution = Evolution {
        psi,
        fragments: FragmentAccumulator::new(sys.channels(), sys.grid()),
        t_final: 0.0,
    };
    FragmentState::from_evolution(sys, &evolution).unwrap()
}

fn gaussian(sys: &MolecularSystem, r0: f64, p0: f64, sigma: f64) -> Vec<Complex64> {
    let norm = (2.0 * PI * sigma * sigma).powf(-0.25);
    sys.grid()
        .points()
        .iter()
        .map(|&r| {
            let x = r - r0;
            norm * (-x * x / (4.0 * sigma * sigma)).exp() * Complex64::from_polar(1.0, p0 * r)
        })
        .collect()
}

#[test]
fn no_pulse_no_dissociation() {
    let toy = toy(2, 0, 0.0, 50);
    let job = jobs(Backend::Exact, &toy.ensemble, 0, 0)[0];
    let (frag, obs) = evaluate_member(&toy.sys, &toy.propagation, &toy.ensemble, &job, &toy.bins).unwrap();
    assert!(frag.probability() < 1e-14);
    assert!(obs.kinetic_energy.is_none());
    assert!(matches!(frag.kinetic_energy(), Err(Error::Undefined(_))));
}

#[test]
fn full_transfer_gives_unit_probability() {
    let sys = photodiss::presets::toy_system(2, None, 0.0).unwrap();
    let mut psi = sys.zero_wavefunction();
    let c = sys.channels().index_of(EXCITED, 1, -1).unwrap();
    psi.channel_mut(c).copy_from_slice(&gaussian(&sys, 15.0, 3.0, 1.5));
    let n = psi.norm_sqr(sys.grid().dr()).sqrt();
    psi.scale(Complex64::new(1.0 / n, 0.0));
    let frag = settled(&sys, psi);
    assert!((frag.probability() - 1.0).abs() < 1e-12);
}

#[test]
fn gaussian_kinetic_energy() {
    let sys = photodiss::presets::toy_system(1, None, 0.0).unwrap();
    let (p0, sigma) = (8.0, 1.2);
    let mut psi = sys.zero_wavefunction();
    let c = sys.channels().index_of(EXCITED, 0, 0).unwrap();
    psi.channel_mut(c).copy_from_slice(&gaussian(&sys, 20.0, p0, sigma));
    let frag = settled(&sys, psi);
    let exact = (p0 * p0 + 1.0 / (4.0 * sigma * sigma)) / (2.0 * sys.reduced_mass());
    let e = frag.kinetic_energy().unwrap();
    assert!(((e - exact) / exact).abs() < 1e-6, "{e} vs {exact}");
}

#[test]
fn plane_wave_kinetic_energy() {
    let sys = photodiss::presets::toy_system(1, None, 0.0).unwrap();
    let pk = sys.grid().momenta()[37];
    let mut psi = sys.zero_wavefunction();
    let c = sys.channels().index_of(EXCITED, 1, 0).unwrap();
    for (z, &r) in psi.channel_mut(c).iter_mut().zip(sys.grid().points()) {
        *z = Complex64::from_polar(0.1, pk * r);
    }
    let frag = settled(&sys, psi);
    let e = frag.kinetic_energy().unwrap();
    let exact = pk * pk / (2.0 * sys.reduced_mass());
    assert!(((e - exact) / exact).abs() < 1e-12);
}

#[test]
fn p_wave_is_cos_squared() {
    let sys = photodiss::presets::toy_system(2, None, 0.0).unwrap();
    let mut psi = sys.zero_wavefunction();
    let c = sys.channels().index_of(EXCITED, 1, 0).unwrap();
    psi.channel_mut(c).copy_from_slice(&gaussian(&sys, 20.0, 6.0, 1.0));
    let frag = settled(&sys, psi);
    let bins = MomentumBins::new(sys.grid().len(), sys.grid().dp());
    let density = frag.density(&bins).unwrap();
    let polar = PolarGrid::new(36).unwrap();
    let k = density.most_probable_index().unwrap();
    let slice = density.angular_slice(k, &polar);
    for (v, t) in slice.iter().zip(polar.nodes()) {
        let expected = slice[0] * t.cos() * t.cos();
        assert!((v - expected).abs() < 1e-12 * slice[0]);
    }
}

#[test]
fn coherent_j_sum_matches_brute_force() {
    let sys = photodiss::presets::toy_system(2, None, 0.0).unwrap();
    let bins = MomentumBins::new(sys.grid().len(), sys.grid().dp());
    let polar = PolarGrid::new(12).unwrap();
    let radial = gaussian(&sys, 20.0, 6.0, 1.0);
    let mut profiles = Vec::new();
    for sign in [1.0, -1.0] {
        let mut psi = sys.zero_wavefunction();
        let c0 = sys.channels().index_of(EXCITED, 0, 0).unwrap();
        let c2 = sys.channels().index_of(EXCITED, 2, 0).unwrap();
        for (i, z) in radial.iter().enumerate() {
            psi.channel_mut(c0)[i] = z / 2f64.sqrt();
            psi.channel_mut(c2)[i] = sign * z / 2f64.sqrt();
        }
        let member: MemberAmplitudes = [(0u32, c0), (2, c2)]
            .iter()
            .map(|&(j, c)| ((j, 0), direct_transform(sys.grid(), psi.channel(c))))
            .collect();
        let frag = settled(&sys, psi);
        let dist = frag.density(&bins).unwrap().distribution(&polar);
        // brute force over the bins that carry the packet
        let oracle = brute_force_distribution(&[(1.0, member)], sys.grid().len(), sys.grid().dp(), polar.nodes());
        let scale = dist.values.iter().fold(0.0f64, |m, v| m.max(*v));
        let err = dist
            .values
            .iter()
            .zip(&oracle)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-10 * scale, "deviation {err:e} of {scale:e}");
        let k = dist.most_probable_index().unwrap();
        profiles.push(dist.angular_slice(k));
    }
    let diff = profiles[0]
        .iter()
        .zip(&profiles[1])
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(diff > 0.1 * profiles[0].iter().fold(0.0f64, |m, v| m.max(*v)));
}

#[test]
fn polar_integral_reproduces_probability() {
    let toy = toy(4, 0, 1e11, 600);
    let job = jobs(Backend::Exact, &toy.ensemble, 0, 0)[0];
    let (frag, obs) = evaluate_member(&toy.sys, &toy.propagation, &toy.ensemble, &job, &toy.bins).unwrap();
    let polar = PolarGrid::for_j_max(4, 90).unwrap();
    let dist = obs.density.distribution(&polar);
    assert!(dist.values.iter().all(|v| *v >= 0.0));
    let integral = dist.integral();
    assert!(frag.probability() > 1e-4);
    assert!((integral - frag.probability()).abs() < 1e-6 * frag.probability(), "{integral} vs {}", frag.probability());
    assert!((obs.density.binned_mass() - integral).abs() < 1e-12 * integral);
}

/// First-order perturbation theory on the discretized excited continuum.
#[test]
fn weak_pulse_agrees_with_perturbation_theory() {
    use nalgebra::{DMatrix, SymmetricEigen};
    let toy = toy(2, 0, 1e10, 600);
    let sys = &toy.sys;
    let job = jobs(Backend::Exact, &toy.ensemble, 0, 0)[0];
    let (frag, _) = evaluate_member(sys, &toy.propagation, &toy.ensemble, &job, &toy.bins).unwrap();
    let p_numeric = frag.probability();

    let grid = sys.grid();
    let n = grid.len();
    let m = sys.reduced_mass();
    let r = grid.points();
    let h_full = dense_hamiltonian(&photodiss::presets::toy_system(0, None, 0.0).unwrap(), 0.0);
    // excited j = 0 block of the j_max = 0 system, then add the j = 1 barrier
    let mut h = DMatrix::from_fn(n, n, |a, b| h_full[(n + a, n + b)]);
    for a in 0..n {
        h[(a, a)] += 2.0 / (2.0 * m * r[a] * r[a]);
    }
    let eig = SymmetricEigen::new(h);
    let vib = toy.ensemble.vibrational(0);
    let cos = 1.0 / 3f64.sqrt();
    let t_final = toy.propagation.t_final();
    let steps = 20000;
    let dt = t_final / steps as f64;
    let mut p_pt = 0.0;
    for (k, &e) in eig.eigenvalues.iter().enumerate() {
        let overlap: f64 = (0..n).map(|a| eig.eigenvectors[(a, k)] * vib.amplitudes[a]).sum::<f64>()
            * grid.dr().sqrt();
        let omega = e - vib.energy;
        let mut integral = Complex64::default();
        for s in 0..=steps {
            let t = s as f64 * dt;
            let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
            integral += w * sys.field_at(t) * Complex64::from_polar(1.0, omega * t);
        }
        integral *= dt;
        p_pt += (overlap * cos).powi(2) * integral.norm_sqr();
    }
    let rel = (p_numeric - p_pt).abs() / p_pt;
    assert!(rel < 0.2, "propagated {p_numeric:e}, perturbative {p_pt:e}");
}

#[test]
fn kinetic_energy_follows_photon_budget() {
    let toy = toy(2, 0, 1e10, 600);
    let job = jobs(Backend::Exact, &toy.ensemble, 0, 0)[0];
    let (frag, _) = evaluate_member(&toy.sys, &toy.propagation, &toy.ensemble, &job, &toy.bins).unwrap();
    let e0 = toy.ensemble.vibrational(0).energy;
    let omega = toy.sys.pulse().omega;
    let budget = e0 + omega - toy.sys.params().excited.asymptote();
    // transform-limited bandwidth of the field envelope
    let bandwidth = 4.0 * 2f64.ln() / toy.sys.pulse().fwhm;
    let e = frag.kinetic_energy().unwrap();
    assert!((e - budget).abs() < bandwidth, "ℰ = {e}, budget {budget}, bandwidth {bandwidth}");
}
