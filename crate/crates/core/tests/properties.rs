use std::sync::OnceLock;

use num_complex::Complex64;
use proptest::prelude::*;

use photodiss::grid::RadialGrid;
use photodiss::observables::{error_bar, k_ladder, running_means, wootters_distance};
use photodiss::presets;
use photodiss::propagator::AbsorberSpec;
use photodiss::runner::ExperimentConfig;
use photodiss::system::MolecularSystem;
use photodiss::thermal::{boltzmann_weights, JMaxPolicy, ThermalEnsemble, ThermalSpec};
use photodiss::units::Quantity;

fn toy() -> &'static (MolecularSystem, ThermalEnsemble) {
    static TOY: OnceLock<(MolecularSystem, ThermalEnsemble)> = OnceLock::new();
    TOY.get_or_init(|| {
        let sys = presets::toy_system(4, None, 1e10).unwrap();
        let ens = ThermalEnsemble::new(&sys, 300.0, JMaxPolicy::Fixed(3), 1e-10).unwrap();
        (sys, ens)
    })
}

/// Increasing rotor-like levels starting at zero.
fn levels() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..1e-3f64, 1..30).prop_map(|gaps| {
        let mut e = 0.0;
        let mut out = vec![0.0];
        for g in gaps {
            e += g;
            out.push(e);
        }
        out
    })
}

fn slice() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, 12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn boltzmann_weights_are_normalized_and_decreasing(e in levels(), t in 0.5..5000.0f64) {
        let (w, z) = boltzmann_weights(t, &e).unwrap();
        let total: f64 = w.iter().enumerate().map(|(j, p)| (2 * j + 1) as f64 * p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        prop_assert!(z >= 1.0);
        prop_assert!(w.windows(2).all(|p| p[1] <= p[0]));
    }

    #[test]
    fn truncated_m_weights_are_normalized(e in levels(), t in 0.5..5000.0f64, m_max in 0u32..5) {
        let spec = ThermalSpec::new(t, &e, Some(m_max)).unwrap();
        let total: f64 = spec
            .weights
            .iter()
            .enumerate()
            .map(|(j, p)| (2 * (j as u32).min(m_max) + 1) as f64 * p)
            .sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wootters_distance_is_a_bounded_symmetric_metric(a in slice(), b in slice(), w in prop::collection::vec(0.01..1.0f64, 12)) {
        prop_assume!(a.iter().sum::<f64>() > 0.0 && b.iter().sum::<f64>() > 0.0);
        let ab = wootters_distance(&a, &b, &w).unwrap();
        let ba = wootters_distance(&b, &a, &w).unwrap();
        prop_assert!((0.0..=1.0).contains(&ab));
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(wootters_distance(&a, &a, &w).unwrap() < 1e-12);
        let scaled: Vec<f64> = a.iter().map(|x| 3.7 * x).collect();
        prop_assert!(wootters_distance(&a, &scaled, &w).unwrap() < 1e-7);
    }

    #[test]
    fn wootters_triangle_inequality(a in slice(), b in slice(), c in slice()) {
        prop_assume!([&a, &b, &c].iter().all(|s| s.iter().sum::<f64>() > 0.0));
        let w = [1.0; 12];
        let d = |x: &[f64], y: &[f64]| wootters_distance(x, y, &w).unwrap();
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-12);
    }

    #[test]
    fn random_phase_states_are_normalized(seed in any::<u64>()) {
        let (sys, ens) = toy();
        let rpw = ens.sample_rpw(sys, seed).unwrap();
        let norm = rpw.psi.norm_sqr(sys.grid().dr());
        prop_assert!((norm - 1.0).abs() < 1e-10, "norm {norm}");
        prop_assert!(rpw.phases.iter().all(|p| (0.0..2.0 * std::f64::consts::PI).contains(p)));
    }

    #[test]
    fn momentum_transform_round_trips(
        log_n in 3u32..9,
        r_min in 0.0..3.0f64,
        span in 1.0..50.0f64,
        seed in any::<u64>(),
    ) {
        let n = 1usize << log_n;
        let grid = RadialGrid::new(r_min, r_min + span, n).unwrap();
        let mut state = seed | 1;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        let x: Vec<Complex64> = (0..n).map(|_| Complex64::new(next(), next())).collect();
        let p = grid.to_momentum(&x).unwrap();
        let back = grid.to_coordinate(&p).unwrap();
        let err = x.iter().zip(&back).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12);
        // Parseval: Σ|ψ(r)|²Δr = Σ|φ(p)|²Δp
        let nr: f64 = x.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dr();
        let np: f64 = p.iter().map(|z| z.norm_sqr()).sum::<f64>() * grid.dp();
        prop_assert!((nr - np).abs() < 1e-12 * nr.max(1.0));
    }

    #[test]
    fn absorber_mask_is_monotone_and_bounded(frac in 0.05..0.95f64, log_n in 3u32..11) {
        let grid = RadialGrid::new(1.0, 41.0, 1usize << log_n).unwrap();
        let onset = 1.0 + 40.0 * frac;
        let absorber = AbsorberSpec::new(&grid, onset).unwrap();
        let mask = absorber.mask();
        prop_assert!(mask.iter().all(|m| (0.0..=1.0).contains(m)));
        prop_assert!(mask.windows(2).all(|w| w[1] <= w[0]));
        for (r, m) in grid.points().iter().zip(mask) {
            if *r <= onset {
                prop_assert_eq!(*m, 1.0);
            }
        }
    }

    #[test]
    fn ladder_is_increasing_and_ends_at_k(k in 1usize..100_000) {
        let l = k_ladder(k);
        prop_assert_eq!(*l.last().unwrap(), k);
        prop_assert!(l.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn error_bar_of_a_constant_sequence_vanishes(x in -1e3..1e3f64, k in 1usize..200) {
        let m = running_means(&vec![x; k]);
        prop_assert!(error_bar(&m) <= 1e-12 * x.abs().max(1.0));
    }

    #[test]
    fn quantities_round_trip_through_text(v in prop::num::f64::NORMAL, unit in prop::sample::select(vec!["bohr", "fs", "eV", "cm-1", "W/cm2", "K", "amu"])) {
        let q = Quantity::new(v, unit);
        let back: Quantity = q.to_string().parse().unwrap();
        prop_assert_eq!(back, q);
    }

    #[test]
    fn configs_round_trip_losslessly(
        intensity in 1e8..1e15f64,
        temperature in 1.0..1000.0f64,
        seed in any::<u32>(),
        k in 1usize..5000,
        dt in 0.001..0.5f64,
    ) {
        let mut c = ExperimentConfig::table1(intensity);
        c.thermal.temperature = Quantity::new(temperature, "K");
        c.ensemble.seed = seed as u64;
        c.ensemble.realizations = k;
        c.propagation.dt = Quantity::new(dt, "fs");
        let back = ExperimentConfig::parse(&c.to_toml()).unwrap();
        prop_assert_eq!(back.hash(), c.hash());
        prop_assert_eq!(back, c);
    }
}
