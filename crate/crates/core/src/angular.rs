//! Rotational basis for Ω = 0 states.
//!
//! With both electronic states of Σ symmetry the Wigner matrices `D^j_{m,0}`
//! reduce (up to normalization) to the spherical harmonics `Y_{j,m}`, so only
//! `(j, m)` is stored. A field linearly polarized along the laboratory axis
//! couples through `cos θ`, which conserves `m` and changes `j` by one.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Electronic surface index: 0 is the bound ground state, 1 the dissociative one.
pub const GROUND: u8 = 0;
pub const EXCITED: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RotationalState {
    pub j: u32,
    pub m: i32,
}

impl RotationalState {
    pub fn new(j: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > j {
            return Err(Error::Domain(format!("|m| = {} exceeds j = {j}", m.abs())));
        }
        Ok(RotationalState { j, m })
    }

    /// Projection on the internuclear axis; always zero here.
    pub fn omega(&self) -> i32 {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelIndex {
    pub electronic: u8,
    pub rotational: RotationalState,
    pub flat_index: usize,
}

impl ChannelIndex {
    pub fn j(&self) -> u32 {
        self.rotational.j
    }

    pub fn m(&self) -> i32 {
        self.rotational.m
    }

    pub fn is_dissociative(&self) -> bool {
        self.electronic != GROUND
    }
}

/// `⟨j+1, m| cos θ |j, m⟩`.
pub fn cos_theta_element(j: u32, m: i32) -> Result<f64> {
    if m.unsigned_abs() > j {
        return Err(Error::Domain(format!("|m| = {} exceeds j = {j}", m.abs())));
    }
    let j = j as f64;
    let m = m as f64;
    Ok((((j + 1.0) * (j + 1.0) - m * m) / ((2.0 * j + 1.0) * (2.0 * j + 3.0))).sqrt())
}

/// `j(j+1)`, the eigenvalue of `Ĵ²` in units of ħ².
pub fn centrifugal_factor(j: u32) -> f64 {
    let j = j as f64;
    j * (j + 1.0)
}

/// Real values `Y_{j,m}(θ, φ = 0)` for `j = |m| ..= j_max`, Condon–Shortley phase.
pub fn spherical_harmonics_column(j_max: u32, m: i32, theta: f64) -> Vec<f64> {
    let ma = m.unsigned_abs();
    if ma > j_max {
        return Vec::new();
    }
    let x = theta.cos();
    let s = theta.sin();
    let mut ymm = 1.0 / (4.0 * PI).sqrt();
    for k in 1..=ma {
        let k = k as f64;
        ymm *= -((2.0 * k + 1.0) / (2.0 * k)).sqrt() * s;
    }
    let mut out = Vec::with_capacity((j_max - ma + 1) as usize);
    out.push(ymm);
    if j_max > ma {
        out.push((2.0 * ma as f64 + 3.0).sqrt() * x * ymm);
    }
    let mf = ma as f64;
    for l in (ma + 2)..=j_max {
        let lf = l as f64;
        let a = ((4.0 * lf * lf - 1.0) / (lf * lf - mf * mf)).sqrt();
        let b = (((lf - 1.0) * (lf - 1.0) - mf * mf) / (4.0 * (lf - 1.0) * (lf - 1.0) - 1.0)).sqrt();
        let n = out.len();
        out.push(a * (x * out[n - 1] - b * out[n - 2]));
    }
    if m < 0 && ma % 2 == 1 {
        for y in &mut out {
            *y = -*y;
        }
    }
    out
}

/// `Y_{j,m}(θ, 0)`.
pub fn spherical_harmonic(j: u32, m: i32, theta: f64) -> f64 {
    let column = spherical_harmonics_column(j, m, theta);
    column.last().copied().unwrap_or(0.0)
}

/// The full channel list of a coupled-channel calculation.
///
/// Ordering: electronic state outermost, then `m` ascending, then `j`
/// ascending from `|m|`.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    channels: Vec<ChannelIndex>,
    lookup: HashMap<(u8, u32, i32), usize>,
    j_max: u32,
    m_max: Option<u32>,
    /// Field couplings of each channel: (partner flat index, ⟨partner|cos θ|self⟩).
    couplings: Vec<Vec<(usize, f64)>>,
}

impl ChannelSet {
    pub fn new(j_max: u32, m_max: Option<u32>, n_electronic: u8) -> Result<Self> {
        if n_electronic != 2 {
            return Err(Error::Config(format!(
                "exactly two electronic states are supported, got {n_electronic}"
            )));
        }
        let m_lim = m_max.map_or(j_max, |mm| mm.min(j_max)) as i32;
        let mut channels = Vec::new();
        let mut lookup = HashMap::new();
        for n in 0..n_electronic {
            for m in -m_lim..=m_lim {
                for j in m.unsigned_abs()..=j_max {
                    let flat_index = channels.len();
                    channels.push(ChannelIndex {
                        electronic: n,
                        rotational: RotationalState { j, m },
                        flat_index,
                    });
                    lookup.insert((n, j, m), flat_index);
                }
            }
        }
        let couplings = channels
            .iter()
            .map(|c| {
                let partner = 1 - c.electronic;
                let (j, m) = (c.j(), c.m());
                let mut out = Vec::with_capacity(2);
                if let Some(&up) = lookup.get(&(partner, j + 1, m)) {
                    out.push((up, cos_theta_element(j, m).expect("|m| <= j")));
                }
                if j > 0 {
                    if let Some(&down) = lookup.get(&(partner, j - 1, m)) {
                        out.push((down, cos_theta_element(j - 1, m).expect("|m| <= j-1")));
                    }
                }
                out
            })
            .collect();
        Ok(ChannelSet {
            channels,
            lookup,
            j_max,
            m_max,
            couplings,
        })
    }

    pub fn len(&self) -> usize {
        self.channels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.channels.is_empty()
    }

    pub fn j_max(&self) -> u32 {
        self.j_max
    }

    pub fn m_max(&self) -> Option<u32> {
        self.m_max
    }

    pub fn channels(&self) -> &[ChannelIndex] {
        &self.channels
    }

    pub fn get(&self, flat_index: usize) -> &ChannelIndex {
        &self.channels[flat_index]
    }

    pub fn index_of(&self, electronic: u8, j: u32, m: i32) -> Option<usize> {
        self.lookup.get(&(electronic, j, m)).copied()
    }

    pub fn couplings(&self, flat_index: usize) -> &[(usize, f64)] {
        &self.couplings[flat_index]
    }

    /// Flat indices of the dissociative channels, in channel order.
    pub fn dissociative(&self) -> impl Iterator<Item = &ChannelIndex> {
        self.channels.iter().filter(|c| c.is_dissociative())
    }

    /// Distinct `m` values, ascending.
    pub fn m_values(&self) -> Vec<i32> {
        let lim = self.m_max.map_or(self.j_max, |mm| mm.min(self.j_max)) as i32;
        (-lim..=lim).collect()
    }
}

/// Number of channels `n_electronic · Σ_j (2 min(j, m_max) + 1)`.
pub fn channel_count(j_max: u32, m_max: Option<u32>, n_electronic: usize) -> usize {
    let per_surface: u32 = (0..=j_max)
        .map(|j| 2 * m_max.map_or(j, |mm| mm.min(j)) + 1)
        .sum();
    n_electronic * per_surface as usize
}

/// Enumerates all channels for the given truncation.
pub fn enumerate_channels(j_max: u32, m_max: Option<u32>, n_electronic: u8) -> Result<Vec<ChannelIndex>> {
    Ok(ChannelSet::new(j_max, m_max, n_electronic)?.channels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn channel_counts() {
        assert_eq!(enumerate_channels(1, None, 2).unwrap().len(), 8);
        assert_eq!(enumerate_channels(20, None, 2).unwrap().len(), 882);
        assert_eq!(enumerate_channels(10, Some(0), 2).unwrap().len(), 22);
        assert_eq!(channel_count(20, None, 2), 2 * 21 * 21);
        assert_eq!(channel_count(6, Some(2), 2), enumerate_channels(6, Some(2), 2).unwrap().len());
    }

    #[test]
    fn ordering_and_round_trip() {
        let set = ChannelSet::new(3, None, 2).unwrap();
        for (i, c) in set.channels().iter().enumerate() {
            assert_eq!(c.flat_index, i);
            assert_eq!(set.index_of(c.electronic, c.j(), c.m()), Some(i));
        }
        let first = set.get(0);
        assert_eq!((first.electronic, first.j(), first.m()), (0, 3, -3));
        assert!(set.channels().windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            (a.electronic, a.m(), a.j()) < (b.electronic, b.m(), b.j())
        }));
    }

    #[test]
    fn rejects_wrong_surface_count() {
        assert!(ChannelSet::new(2, None, 3).is_err());
    }

    #[test]
    fn cos_theta_values() {
        assert!((cos_theta_element(0, 0).unwrap() - 1.0 / 3f64.sqrt()).abs() < 1e-15);
        assert!((cos_theta_element(1, 1).unwrap() - (3.0f64 / 15.0).sqrt()).abs() < 1e-15);
        assert!((cos_theta_element(1, 1).unwrap() - 0.447214).abs() < 1e-6);
        assert!(cos_theta_element(1, 2).is_err());
        for j in 0..30 {
            for m in -(j as i32)..=(j as i32) {
                let c = cos_theta_element(j, m).unwrap();
                assert!((0.0..1.0).contains(&c));
            }
        }
    }

    #[test]
    fn centrifugal() {
        assert_eq!(centrifugal_factor(0), 0.0);
        assert_eq!(centrifugal_factor(1), 2.0);
        assert_eq!(centrifugal_factor(10), 110.0);
    }

    #[test]
    fn couplings_follow_selection_rules() {
        let set = ChannelSet::new(4, None, 2).unwrap();
        for c in set.channels() {
            for &(p, _) in set.couplings(c.flat_index) {
                let q = set.get(p);
                assert_ne!(q.electronic, c.electronic);
                assert_eq!(q.m(), c.m());
                assert_eq!(q.j().abs_diff(c.j()), 1);
            }
        }
        // coupling matrix is symmetric
        for c in set.channels() {
            for &(p, v) in set.couplings(c.flat_index) {
                let back = set.couplings(p).iter().find(|(q, _)| *q == c.flat_index).unwrap();
                assert_eq!(back.1, v);
            }
        }
    }

    #[test]
    fn low_order_harmonics() {
        let t = 0.7f64;
        let y00 = 1.0 / (4.0 * PI).sqrt();
        let y10 = (3.0 / (4.0 * PI)).sqrt() * t.cos();
        let y11 = -(3.0 / (8.0 * PI)).sqrt() * t.sin();
        let y20 = (5.0 / (16.0 * PI)).sqrt() * (3.0 * t.cos().powi(2) - 1.0);
        let y2m1 = (15.0 / (8.0 * PI)).sqrt() * t.sin() * t.cos();
        assert!((spherical_harmonic(0, 0, t) - y00).abs() < 1e-15);
        assert!((spherical_harmonic(1, 0, t) - y10).abs() < 1e-15);
        assert!((spherical_harmonic(1, 1, t) - y11).abs() < 1e-15);
        assert!((spherical_harmonic(1, -1, t) + y11).abs() < 1e-15);
        assert!((spherical_harmonic(2, 0, t) - y20).abs() < 1e-15);
        assert!((spherical_harmonic(2, -1, t) - y2m1).abs() < 1e-15);
    }
}
