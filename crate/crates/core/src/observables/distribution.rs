use std::f64::consts::PI;

use crate::angular::spherical_harmonics_column;
use crate::error::{Error, Result};

/// Radial-momentum bins `P_k = k Δp`, `k = 1 .. N/2 - 1`, each collecting
/// the grid momenta `±P_k`. The zero and Nyquist momenta are left out: the
/// former has no direction, the latter no partner.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumBins {
    n_points: usize,
    dp: f64,
    centers: Vec<f64>,
    indices: Vec<(usize, usize)>,
}

impl MomentumBins {
    pub fn new(n_points: usize, dp: f64) -> Self {
        let half = n_points / 2;
        let centers = (1..half).map(|k| k as f64 * dp).collect();
        let indices = (1..half).map(|k| (k, n_points - k)).collect();
        MomentumBins {
            n_points,
            dp,
            centers,
            indices,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    /// `len() + 1` edges, `P_k ± Δp/2`.
    pub fn edges(&self) -> Vec<f64> {
        (0..=self.len()).map(|k| (k as f64 + 0.5) * self.dp).collect()
    }

    /// Grid indices of `(+P_k, -P_k)` in discrete Fourier order.
    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    /// `P_k² ΔP`, the measure of the momentum slice.
    pub fn measure(&self) -> Vec<f64> {
        self.centers.iter().map(|p| p * p * self.dp).collect()
    }
}

/// Polar angles `θᵢ = iπ/n`, `i = 0..=n`, with Clenshaw–Curtis weights for
/// `∫ f(θ) sin θ dθ`. The rule is exact for polynomials in `cos θ` of degree
/// `≤ n`, which covers every `Y_{jm} Y_{j'm}` with `j + j' ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl PolarGrid {
    pub fn new(n_intervals: usize) -> Result<Self> {
        if n_intervals < 2 {
            return Err(Error::Config(format!(
                "need at least 2 polar intervals, got {n_intervals}"
            )));
        }
        let n = n_intervals;
        let nodes: Vec<f64> = (0..=n).map(|i| i as f64 * PI / n as f64).collect();
        let weights = nodes
            .iter()
            .enumerate()
            .map(|(i, &theta)| {
                let c = if i == 0 || i == n { 1.0 } else { 2.0 };
                let mut s = 1.0;
                for k in 1..=n / 2 {
                    let b = if 2 * k == n { 1.0 } else { 2.0 };
                    let kf = k as f64;
                    s -= b / (4.0 * kf * kf - 1.0) * (2.0 * kf * theta).cos();
                }
                c * s / n as f64
            })
            .collect();
        Ok(PolarGrid { nodes, weights })
    }

    /// Smallest grid integrating every product of harmonics up to `j_max`
    /// exactly, but never coarser than `n_intervals`.
    pub fn for_j_max(j_max: u32, n_intervals: usize) -> Result<Self> {
        PolarGrid::new(n_intervals.max(2 * j_max as usize).max(2))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Bin edges halfway between nodes, closed by `0` and `π`.
    pub fn edges(&self) -> Vec<f64> {
        let mut e = Vec::with_capacity(self.len() + 1);
        e.push(0.0);
        e.extend(self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        e.push(PI);
        e
    }
}

/// Per-`m` real density matrices over `j` for every momentum bin. The
/// momentum–angular distribution is linear in these, so ensembles are
/// aggregated here before any angular evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumDensity {
    bins: MomentumBins,
    j_max: u32,
    /// `(m, ρ)` sorted by `m`; `ρ` is `bins × nj × nj` with `nj = j_max - |m| + 1`.
    blocks: Vec<(i32, Vec<f64>)>,
}

impl MomentumDensity {
    pub fn zeros(bins: MomentumBins, j_max: u32) -> Self {
        MomentumDensity {
            bins,
            j_max,
            blocks: Vec::new(),
        }
    }

    /// Rebuilds a density from stored blocks, checking their sizes.
    pub fn from_blocks(bins: MomentumBins, j_max: u32, blocks: Vec<(i32, Vec<f64>)>) -> Result<Self> {
        let mut out = MomentumDensity::zeros(bins, j_max);
        for (m, rho) in blocks {
            if m.unsigned_abs() > j_max || rho.len() != out.block_size(m) {
                return Err(Error::Shape {
                    expected: if m.unsigned_abs() > j_max { 0 } else { out.block_size(m) },
                    got: rho.len(),
                });
            }
            out.block_mut(m).copy_from_slice(&rho);
        }
        Ok(out)
    }

    pub fn blocks(&self) -> &[(i32, Vec<f64>)] {
        &self.blocks
    }

    pub fn bins(&self) -> &MomentumBins {
        &self.bins
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    fn block_size(&self, m: i32) -> usize {
        let nj = (self.j_max - m.unsigned_abs() + 1) as usize;
        self.bins.len() * nj * nj
    }

    pub fn block(&self, m: i32) -> Option<&[f64]> {
        self.blocks
            .binary_search_by_key(&m, |b| b.0)
            .ok()
            .map(|i| self.blocks[i].1.as_slice())
    }

    pub(crate) fn block_mut(&mut self, m: i32) -> &mut [f64] {
        let pos = match self.blocks.binary_search_by_key(&m, |b| b.0) {
            Ok(p) => p,
            Err(p) => {
                let size = self.block_size(m);
                self.blocks.insert(p, (m, vec![0.0; size]));
                p
            }
        };
        &mut self.blocks[pos].1
    }

    pub fn m_values(&self) -> Vec<i32> {
        self.blocks.iter().map(|b| b.0).collect()
    }

    /// `self += w · other`.
    pub fn add_scaled(&mut self, w: f64, other: &MomentumDensity) -> Result<()> {
        if other.bins != self.bins || other.j_max != self.j_max {
            return Err(Error::Shape {
                expected: self.bins.len(),
                got: other.bins.len(),
            });
        }
        for (m, rho) in &other.blocks {
            for (a, b) in self.block_mut(*m).iter_mut().zip(rho) {
                *a += w * b;
            }
        }
        Ok(())
    }

    pub fn scale(&mut self, w: f64) {
        for (_, rho) in &mut self.blocks {
            rho.iter_mut().for_each(|x| *x *= w);
        }
    }

    /// Probability inside the momentum bins (trace of the density).
    pub fn binned_mass(&self) -> f64 {
        let mut s = 0.0;
        for (m, rho) in &self.blocks {
            let nj = (self.j_max - m.unsigned_abs() + 1) as usize;
            for cell in rho.chunks(nj * nj) {
                s += (0..nj).map(|a| cell[a * nj + a]).sum::<f64>();
            }
        }
        s * self.bins.dp()
    }

    /// `Σ_m Σ_{jj'} ρ_{jj'} Y_{jm}(θ) Y_{j'm}(θ)` for bin `k`, given the
    /// harmonic columns for each stored `m`.
    fn contract(&self, k: usize, columns: &[Vec<f64>]) -> f64 {
        let mut total = 0.0;
        for ((m, rho), y) in self.blocks.iter().zip(columns) {
            let nj = (self.j_max - m.unsigned_abs() + 1) as usize;
            let cell = &rho[k * nj * nj..(k + 1) * nj * nj];
            for a in 0..nj {
                let row: f64 = (0..nj).map(|c| cell[a * nj + c] * y[c]).sum();
                total += y[a] * row;
            }
        }
        total
    }

    fn columns(&self, theta: f64) -> Vec<Vec<f64>> {
        self.blocks
            .iter()
            .map(|(m, _)| spherical_harmonics_column(self.j_max, *m, theta))
            .collect()
    }

    /// `𝒟(P_k, θ)`, normalized so that `∫𝒟 P² dP sin θ dθ` is the binned
    /// probability (the azimuth is integrated out).
    pub fn value(&self, k: usize, theta: f64) -> f64 {
        let p = self.bins.centers()[k];
        let columns = self.columns(theta);
        (2.0 * PI / (p * p) * self.contract(k, &columns)).max(0.0)
    }

    /// `𝒟(P, θ = 0)` for every bin.
    pub fn theta0_slice(&self) -> Vec<f64> {
        let columns = self.columns(0.0);
        self.bins
            .centers()
            .iter()
            .enumerate()
            .map(|(k, p)| (2.0 * PI / (p * p) * self.contract(k, &columns)).max(0.0))
            .collect()
    }

    /// `𝒟(P_k, θᵢ)` over the polar nodes.
    pub fn angular_slice(&self, k: usize, polar: &PolarGrid) -> Vec<f64> {
        let p = self.bins.centers()[k];
        polar
            .nodes()
            .iter()
            .map(|&t| (2.0 * PI / (p * p) * self.contract(k, &self.columns(t))).max(0.0))
            .collect()
    }

    /// Bin maximizing `P² 𝒟(P, 0)`.
    pub fn most_probable_index(&self) -> Result<usize> {
        most_probable(&self.theta0_slice(), self.bins.centers())
    }

    pub fn distribution(&self, polar: &PolarGrid) -> MomentumAngularDistribution {
        let n_theta = polar.len();
        let all_columns: Vec<Vec<Vec<f64>>> = polar.nodes().iter().map(|&t| self.columns(t)).collect();
        let mut values = Vec::with_capacity(self.bins.len() * n_theta);
        for (k, p) in self.bins.centers().iter().enumerate() {
            let pref = 2.0 * PI / (p * p);
            for columns in &all_columns {
                values.push((pref * self.contract(k, columns)).max(0.0));
            }
        }
        MomentumAngularDistribution {
            p_centers: self.bins.centers().to_vec(),
            p_edges: self.bins.edges(),
            theta: polar.nodes().to_vec(),
            theta_edges: polar.edges(),
            theta_weights: polar.weights().to_vec(),
            values,
        }
    }
}

fn most_probable(theta0: &[f64], centers: &[f64]) -> Result<usize> {
    let (k, best) = theta0
        .iter()
        .zip(centers)
        .map(|(d, p)| d * p * p)
        .enumerate()
        .fold((0, 0.0), |acc, (k, v)| if v > acc.1 { (k, v) } else { acc });
    if best > 0.0 {
        Ok(k)
    } else {
        Err(Error::Undefined("most probable momentum of an empty θ = 0 slice"))
    }
}

/// `𝒟(P, θ)` on the polar grid, row-major in `P`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumAngularDistribution {
    pub p_centers: Vec<f64>,
    pub p_edges: Vec<f64>,
    pub theta: Vec<f64>,
    pub theta_edges: Vec<f64>,
    pub theta_weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl MomentumAngularDistribution {
    pub fn n_p(&self) -> usize {
        self.p_centers.len()
    }

    pub fn n_theta(&self) -> usize {
        self.theta.len()
    }

    pub fn value(&self, k: usize, i: usize) -> f64 {
        self.values[k * self.n_theta() + i]
    }

    pub fn theta0_slice(&self) -> Vec<f64> {
        (0..self.n_p()).map(|k| self.value(k, 0)).collect()
    }

    pub fn angular_slice(&self, k: usize) -> Vec<f64> {
        self.values[k * self.n_theta()..(k + 1) * self.n_theta()].to_vec()
    }

    pub fn most_probable_index(&self) -> Result<usize> {
        most_probable(&self.theta0_slice(), &self.p_centers)
    }

    /// `P_k² ΔP_k` per bin.
    pub fn momentum_measure(&self) -> Vec<f64> {
        self.p_centers
            .iter()
            .zip(self.p_edges.windows(2))
            .map(|(p, e)| p * p * (e[1] - e[0]))
            .collect()
    }

    /// `∫ 𝒟 P² dP sin θ dθ` by the bin and polar quadratures.
    pub fn integral(&self) -> f64 {
        let measure = self.momentum_measure();
        (0..self.n_p())
            .map(|k| {
                measure[k]
                    * (0..self.n_theta())
                        .map(|i| self.value(k, i) * self.theta_weights[i])
                        .sum::<f64>()
            })
            .sum()
    }
}
