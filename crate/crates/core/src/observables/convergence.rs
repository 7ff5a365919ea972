use std::f64::consts::PI;

use crate::error::{Error, Result};

use super::distribution::{MomentumDensity, PolarGrid};

/// Wootters distance between two non-negative slices sampled on a common
/// grid with quadrature `measure`. Each slice is renormalized to unit mass
/// first; the result is `(2/π) arccos` of their Bhattacharyya overlap.
pub fn wootters_distance(a: &[f64], b: &[f64], measure: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() != measure.len() {
        return Err(Error::Shape {
            expected: measure.len(),
            got: if a.len() != measure.len() { a.len() } else { b.len() },
        });
    }
    let mass = |s: &[f64]| -> f64 { s.iter().zip(measure).map(|(x, w)| x.max(0.0) * w).sum() };
    let (ma, mb) = (mass(a), mass(b));
    if !(ma > 0.0 && mb > 0.0) {
        return Err(Error::Undefined("Wootters distance of a zero-mass slice"));
    }
    let mut overlap = 0.0;
    let mut hellinger = 0.0;
    for ((x, y), w) in a.iter().zip(b).zip(measure) {
        let pa = (x.max(0.0) * w / ma).sqrt();
        let pb = (y.max(0.0) * w / mb).sqrt();
        overlap += pa * pb;
        hellinger += (pa - pb) * (pa - pb);
    }
    if overlap == 0.0 {
        return Ok(1.0);
    }
    // arccos(1 - h) = 2 asin(sqrt(h/2)) keeps precision near zero distance
    let h = 0.5 * hellinger;
    Ok((4.0 / PI * (0.5 * h).sqrt().min(1.0).asin()).clamp(0.0, 1.0))
}

/// `⟨A⟩_k` for `k = 1..=K`.
pub fn running_means(values: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    values
        .iter()
        .enumerate()
        .map(|(k, v)| {
            sum += v;
            sum / (k + 1) as f64
        })
        .collect()
}

/// `(1/K) √(Σ_k (⟨A⟩_k − ⟨A⟩_K)²)` over a sequence of running means.
pub fn error_bar(means: &[f64]) -> f64 {
    let Some(&last) = means.last() else {
        return 0.0;
    };
    let s: f64 = means.iter().map(|m| (m - last) * (m - last)).sum();
    s.sqrt() / means.len() as f64
}

/// 1-2-5 sequence from 10 (or from 1 when `k_max < 10`) up to and including `k_max`.
pub fn k_ladder(k_max: usize) -> Vec<usize> {
    if k_max == 0 {
        return Vec::new();
    }
    let start = if k_max < 10 { 1 } else { 10 };
    let mut out = Vec::new();
    let mut decade = start;
    'outer: loop {
        for f in [1, 2, 5] {
            let k = f * decade;
            if k >= k_max {
                break 'outer;
            }
            out.push(k);
        }
        decade *= 10;
    }
    out.push(k_max);
    out
}

/// Observables of one realization needed for the convergence metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationSummary {
    pub probability: f64,
    /// `𝒫ᵏ ℰᵏ`, the unconditional mean kinetic energy.
    pub energy_weight: f64,
    /// `𝒟ᵏ(P, θ = 0)`.
    pub theta0: Vec<f64>,
    /// `𝒟ᵏ(P_mp, θ)` at the exact most-probable momentum.
    pub angular: Vec<f64>,
}

impl RealizationSummary {
    /// Summary of one realization with density `density`, sliced at the
    /// exact most-probable bin `p_mp_index`.
    pub fn new(
        probability: f64,
        energy_weight: f64,
        density: &MomentumDensity,
        p_mp_index: usize,
        polar: &PolarGrid,
    ) -> Self {
        RealizationSummary {
            probability,
            energy_weight,
            theta0: density.theta0_slice(),
            angular: density.angular_slice(p_mp_index, polar),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactReference {
    pub probability: f64,
    pub kinetic_energy: f64,
    pub theta0: Vec<f64>,
    pub angular: Vec<f64>,
    pub p_mp_index: usize,
    pub p_mp: f64,
    pub momentum_measure: Vec<f64>,
    pub angular_measure: Vec<f64>,
}

impl ExactReference {
    pub fn new(
        probability: f64,
        kinetic_energy: f64,
        density: &MomentumDensity,
        polar: &PolarGrid,
    ) -> Result<Self> {
        let p_mp_index = density.most_probable_index()?;
        Ok(ExactReference {
            probability,
            kinetic_energy,
            theta0: density.theta0_slice(),
            angular: density.angular_slice(p_mp_index, polar),
            p_mp_index,
            p_mp: density.bins().centers()[p_mp_index],
            momentum_measure: density.bins().measure(),
            angular_measure: polar.weights().to_vec(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub k: usize,
    pub p_abs_err: f64,
    pub p_rel_err: f64,
    pub ek_rel_err: Option<f64>,
    pub dw_p: Option<f64>,
    pub dw_theta: Option<f64>,
    pub errbar_p: f64,
    pub errbar_ek: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceRecord {
    /// Errors of the running ensemble means against `exact` at each ladder
    /// entry. Ensemble energies are `Σ𝒫ℰ / Σ𝒫`.
    pub fn build(
        realizations: &[RealizationSummary],
        exact: &ExactReference,
        ladder: &[usize],
    ) -> Result<Self> {
        if let Some(&k) = ladder.iter().find(|&&k| k == 0 || k > realizations.len()) {
            return Err(Error::Config(format!(
                "ladder entry {k} outside 1..={}",
                realizations.len()
            )));
        }
        let probs: Vec<f64> = realizations.iter().map(|r| r.probability).collect();
        let p_means = running_means(&probs);
        let mut e_means = Vec::with_capacity(realizations.len());
        let (mut sp, mut se) = (0.0, 0.0);
        for r in realizations {
            sp += r.probability;
            se += r.energy_weight;
            e_means.push(if sp > 0.0 { Some(se / sp) } else { None });
        }

        let mut theta0 = vec![0.0; exact.theta0.len()];
        let mut angular = vec![0.0; exact.angular.len()];
        let mut rows = Vec::with_capacity(ladder.len());
        let mut done = 0;
        for &k in ladder {
            for r in &realizations[done.min(k)..k] {
                add(&mut theta0, &r.theta0)?;
                add(&mut angular, &r.angular)?;
            }
            done = done.max(k);
            let p = p_means[k - 1];
            let p_abs_err = (p - exact.probability).abs();
            let ek = e_means[k - 1];
            let e_run: Option<Vec<f64>> = e_means[..k].iter().copied().collect();
            rows.push(ConvergenceRow {
                k,
                p_abs_err,
                p_rel_err: p_abs_err / exact.probability,
                ek_rel_err: ek.map(|e| (e - exact.kinetic_energy).abs() / exact.kinetic_energy),
                dw_p: wootters_distance(&theta0, &exact.theta0, &exact.momentum_measure).ok(),
                dw_theta: wootters_distance(&angular, &exact.angular, &exact.angular_measure).ok(),
                errbar_p: error_bar(&p_means[..k]),
                errbar_ek: e_run.map(|m| error_bar(&m)),
            });
        }
        Ok(ConvergenceRecord { rows })
    }
}

fn add(acc: &mut [f64], x: &[f64]) -> Result<()> {
    if acc.len() != x.len() {
        return Err(Error::Shape {
            expected: acc.len(),
            got: x.len(),
        });
    }
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += b);
    Ok(())
}
