#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use photodiss::angular::ChannelSet;
use photodiss::grid::RadialGrid;
use photodiss::presets;
use photodiss::system::{MolecularSystem, PotentialCurve, Pulse, SystemParams, TransitionDipole};
use photodiss::units::AMU;
use photodiss::wavefunction::Wavefunction;
use rand::{Rng, SeedableRng};

/// 32-point version of the toy model.
pub fn small_system(j_max: u32, intensity: f64) -> MolecularSystem {
    let grid = RadialGrid::new(1.0, 9.0, 32).unwrap();
    let params = SystemParams {
        reduced_mass: AMU,
        ground: presets::toy_ground(),
        excited: presets::toy_excited(),
        dipole: TransitionDipole::Constant(1.3),
        pulse: presets::toy_pulse(intensity),
        potential_cap: None,
    };
    MolecularSystem::new(grid, ChannelSet::new(j_max, None, 2).unwrap(), params).unwrap()
}

/// Both surfaces identically zero; pulse off.
pub fn free_system(r_min: f64, r_max: f64, n: usize, mass: f64) -> MolecularSystem {
    let flat = PotentialCurve::RepulsiveExponential {
        amplitude: 0.0,
        decay: 1.0,
        asymptote: 0.0,
    };
    let params = SystemParams {
        reduced_mass: mass,
        ground: flat.clone(),
        excited: flat,
        dipole: TransitionDipole::Constant(1.0),
        pulse: Pulse::off(),
        potential_cap: None,
    };
    let grid = RadialGrid::new(r_min, r_max, n).unwrap();
    MolecularSystem::new(grid, ChannelSet::new(0, None, 2).unwrap(), params).unwrap()
}

pub fn random_state(sys: &MolecularSystem, seed: u64) -> Wavefunction {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let n = sys.channels().len() * sys.grid().len();
    let data = (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let mut psi = Wavefunction::from_vec(sys.channels().len(), sys.grid().len(), data).unwrap();
    let norm = psi.norm_sqr(sys.grid().dr()).sqrt();
    psi.scale(Complex64::new(1.0 / norm, 0.0));
    psi
}

/// Dense `Ĥ` assembled from scratch: explicit DFT kinetic matrix, diagonal
/// potentials and the textbook `cos θ` matrix elements.
pub fn dense_hamiltonian(sys: &MolecularSystem, field: f64) -> DMatrix<f64> {
    let grid = sys.grid();
    let n = grid.len();
    let dr = grid.dr();
    let m = sys.reduced_mass();
    let r = grid.points();
    let mut t = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in 0..n {
            let mut s = 0.0;
            for q in 0..n {
                let k = if q < n / 2 { q as f64 } else { q as f64 - n as f64 };
                let p = 2.0 * PI * k / (n as f64 * dr);
                s += p * p / (2.0 * m) * (p * (r[a] - r[b])).cos();
            }
            t[(a, b)] = s / n as f64;
        }
    }
    let channels = sys.channels().channels();
    let nc = channels.len();
    let mut h = DMatrix::zeros(nc * n, nc * n);
    for (ci, c) in channels.iter().enumerate() {
        let v = sys.params().ground.clone();
        let curve = if c.electronic == 0 { v } else { sys.params().excited.clone() };
        let j = c.j() as f64;
        for a in 0..n {
            for b in 0..n {
                h[(ci * n + a, ci * n + b)] = t[(a, b)];
            }
            h[(ci * n + a, ci * n + a)] += curve.value(r[a]) + j * (j + 1.0) / (2.0 * m * r[a] * r[a]);
        }
        for (cj, d) in channels.iter().enumerate() {
            if d.electronic == c.electronic || d.m() != c.m() {
                continue;
            }
            let (jl, jh) = (c.j().min(d.j()), c.j().max(d.j()));
            if jh != jl + 1 {
                continue;
            }
            let (jf, mf) = (jl as f64, c.m() as f64);
            let cos = (((jf + 1.0).powi(2) - mf * mf) / ((2.0 * jf + 1.0) * (2.0 * jf + 3.0))).sqrt();
            for a in 0..n {
                h[(ci * n + a, cj * n + a)] = -field * sys.params().dipole.value(r[a]) * cos;
            }
        }
    }
    h
}

/// `exp(-iHt) v` through the eigendecomposition of a real symmetric `H`.
pub fn dense_evolve(h: &DMatrix<f64>, t: f64, v: &[Complex64]) -> Vec<Complex64> {
    let eig = SymmetricEigen::new(h.clone());
    let u = &eig.eigenvectors;
    let dim = v.len();
    let mut coeff = vec![Complex64::default(); dim];
    for k in 0..dim {
        let mut s = Complex64::default();
        for i in 0..dim {
            s += u[(i, k)] * v[i];
        }
        coeff[k] = s * Complex64::from_polar(1.0, -eig.eigenvalues[k] * t);
    }
    (0..dim)
        .map(|i| (0..dim).map(|k| u[(i, k)] * coeff[k]).sum())
        .collect()
}

pub fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub struct Toy {
    pub sys: MolecularSystem,
    pub propagation: photodiss::propagator::Propagation,
    pub ensemble: photodiss::thermal::ThermalEnsemble,
    pub bins: photodiss::observables::MomentumBins,
}

/// Closed-box toy run: absorber off, `steps` steps of 0.1 fs.
pub fn toy(j_max: u32, j_init: u32, intensity: f64, steps: usize) -> Toy {
    use photodiss::propagator::{build_plan, AbsorberSpec, Propagation};
    use photodiss::thermal::{JMaxPolicy, ThermalEnsemble};
    let sys = presets::toy_system(j_max, Some(j_init), intensity).unwrap();
    let plan = build_plan(&sys, presets::TOY_DT_FS * photodiss::units::FEMTOSECOND, 1e-12).unwrap();
    let propagation = Propagation {
        plan,
        absorber: AbsorberSpec::disabled(sys.grid()),
        n_steps: steps,
    };
    let ensemble = ThermalEnsemble::new(
        &sys,
        presets::TOY_TEMPERATURE_K,
        JMaxPolicy::Fixed(j_init),
        photodiss::thermal::DEFAULT_PRUNE_THRESHOLD,
    )
    .unwrap();
    let bins = photodiss::observables::MomentumBins::new(sys.grid().len(), sys.grid().dp());
    Toy {
        sys,
        propagation,
        ensemble,
        bins,
    }
}

/// `Y_{lm}(θ, 0)` from the Rodrigues formula, Condon–Shortley phase.
pub fn rodrigues_harmonic(l: u32, m: i32, theta: f64) -> f64 {
    let ma = m.unsigned_abs();
    if ma > l {
        return 0.0;
    }
    // coefficients of (x² - 1)^l in ascending powers
    let mut poly = vec![1.0f64];
    for _ in 0..l {
        let mut next = vec![0.0; poly.len() + 2];
        for (k, c) in poly.iter().enumerate() {
            next[k + 2] += c;
            next[k] -= c;
        }
        poly = next;
    }
    for _ in 0..(l + ma) {
        poly = poly.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
        if poly.is_empty() {
            poly.push(0.0);
        }
    }
    let x = theta.cos();
    let deriv: f64 = poly.iter().rev().fold(0.0, |acc, c| acc * x + c);
    let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
    let plm = (-1f64).powi(ma as i32) * (1.0 - x * x).powf(ma as f64 / 2.0) * deriv
        / (2f64.powi(l as i32) * fact(l));
    let norm = ((2 * l + 1) as f64 / (4.0 * PI) * fact(l - ma) / fact(l + ma)).sqrt();
    let y = norm * plm;
    if m < 0 && ma % 2 == 1 {
        -y
    } else {
        y
    }
}

/// `(2π)^{-1/2} Σ e^{-ipr} ψ(r) Δr` evaluated term by term.
pub fn direct_transform(grid: &RadialGrid, amplitudes: &[Complex64]) -> Vec<Complex64> {
    let scale = grid.dr() / (2.0 * PI).sqrt();
    grid.momenta()
        .iter()
        .map(|&p| {
            grid.points()
                .iter()
                .zip(amplitudes)
                .map(|(&r, z)| z * Complex64::from_polar(1.0, -p * r))
                .sum::<Complex64>()
                * scale
        })
        .collect()
}

/// Momentum amplitudes of one member: `((j, m), amplitude per grid momentum)`.
pub type MemberAmplitudes = Vec<((u32, i32), Vec<Complex64>)>;

/// `𝒟(P, θ)` evaluated literally: for each member and each sign of the
/// radial momentum, `|Σ_{jm} c_{jm} Y_{jm}(θ, φ)|²` integrated over `φ` by
/// the trapezoid rule, summed with the member weights, divided by `P²`.
pub fn brute_force_distribution(
    members: &[(f64, MemberAmplitudes)],
    n_points: usize,
    dp: f64,
    thetas: &[f64],
) -> Vec<f64> {
    let n_phi = 64;
    let mut out = Vec::new();
    for k in 1..n_points / 2 {
        let p = k as f64 * dp;
        for &theta in thetas {
            let mut total = 0.0;
            for (w, amps) in members {
                for idx in [k, n_points - k] {
                    let mut integral = 0.0;
                    for s in 0..n_phi {
                        let phi = 2.0 * PI * s as f64 / n_phi as f64;
                        let mut sum = Complex64::default();
                        for ((j, m), c) in amps {
                            let y = rodrigues_harmonic(*j, *m, theta)
                                * Complex64::from_polar(1.0, *m as f64 * phi);
                            sum += c[idx] * y;
                        }
                        integral += sum.norm_sqr();
                    }
                    total += w * integral * 2.0 * PI / n_phi as f64;
                }
            }
            out.push(total / (p * p));
        }
    }
    out
}
