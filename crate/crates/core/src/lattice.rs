//! Momentum grids of periodic d-dimensional cubic lattices.
//!
//! Momenta are stored as integer index vectors `m_j` with `k_j = 2 pi m_j / L_j`,
//! so the pairing `k <-> -k` is exact.

use std::collections::HashMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structure factor of the cubic lattice, `(1/d) sum_j cos k_j`.
pub fn eta(k: &[f64]) -> f64 {
    k.iter().map(|x| x.cos()).sum::<f64>() / k.len() as f64
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentumGrid {
    extents: Vec<usize>,
    sites: usize,
}

/// Symmetry class of grid momenta sharing the same structure factor by
/// reflection (and permutation, when all extents agree).
pub type ClassKey = Vec<usize>;

impl MomentumGrid {
    pub fn new(extents: &[usize]) -> Result<Self> {
        if extents.is_empty() || extents.iter().any(|&l| l < 2) {
            return Err(Error::InvalidParams(format!("bad lattice extents {extents:?}")));
        }
        Ok(Self {
            extents: extents.to_vec(),
            sites: extents.iter().product(),
        })
    }

    pub fn d(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    /// Number of grid momenta, equal to the number of sites.
    pub fn len(&self) -> usize {
        self.sites
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index vector of the `i`-th momentum; the last component varies fastest.
    pub fn indices(&self, mut i: usize) -> Vec<usize> {
        let mut m = vec![0; self.d()];
        for j in (0..self.d()).rev() {
            m[j] = i % self.extents[j];
            i /= self.extents[j];
        }
        m
    }

    pub fn index_of(&self, m: &[usize]) -> usize {
        m.iter().zip(&self.extents).fold(0, |acc, (&mj, &l)| acc * l + mj % l)
    }

    pub fn momentum(&self, i: usize) -> Vec<f64> {
        self.indices(i)
            .iter()
            .zip(&self.extents)
            .map(|(&m, &l)| 2.0 * PI * m as f64 / l as f64)
            .collect()
    }

    pub fn points(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        (0..self.sites).map(|i| self.momentum(i))
    }

    /// Grid index of `-k`.
    pub fn neg(&self, i: usize) -> usize {
        let m: Vec<usize> = self
            .indices(i)
            .iter()
            .zip(&self.extents)
            .map(|(&m, &l)| (l - m) % l)
            .collect();
        self.index_of(&m)
    }

    /// `k == -k` modulo `2 pi`: every component is 0 or pi.
    pub fn is_self_conjugate(&self, i: usize) -> bool {
        self.neg(i) == i
    }

    /// Canonical representative: each index folded to `min(m, L - m)`,
    /// sorted when the lattice is isotropic.
    pub fn class_key(&self, i: usize) -> ClassKey {
        let mut key: Vec<usize> = self
            .indices(i)
            .iter()
            .zip(&self.extents)
            .map(|(&m, &l)| m.min(l - m))
            .collect();
        if self.extents.windows(2).all(|w| w[0] == w[1]) {
            key.sort_unstable();
        }
        key
    }

    /// Structure factor of a class, evaluated on the folded indices so that
    /// every member of the class gets the bit-identical value.
    pub fn class_eta(&self, key: &ClassKey) -> f64 {
        let l_iso = self.extents[0];
        let iso = self.extents.windows(2).all(|w| w[0] == w[1]);
        key.iter()
            .enumerate()
            .map(|(j, &m)| {
                let l = if iso { l_iso } else { self.extents[j] };
                (2.0 * PI * m as f64 / l as f64).cos()
            })
            .sum::<f64>()
            / self.d() as f64
    }

    pub fn eta_at(&self, i: usize) -> f64 {
        self.class_eta(&self.class_key(i))
    }

    /// Distinct classes in first-appearance order and the class of every
    /// grid point.
    pub fn classes(&self) -> (Vec<ClassKey>, Vec<u32>) {
        let mut lookup: HashMap<ClassKey, u32> = HashMap::new();
        let mut keys = Vec::new();
        let mut of = Vec::with_capacity(self.sites);
        for i in 0..self.sites {
            let key = self.class_key(i);
            let id = *lookup.entry(key.clone()).or_insert_with(|| {
                keys.push(key);
                (keys.len() - 1) as u32
            });
            of.push(id);
        }
        (keys, of)
    }

    /// Nearest grid index to a real momentum; ties round toward the lower index.
    pub fn snap(&self, k: &[f64]) -> Result<usize> {
        if k.len() != self.d() {
            return Err(Error::InvalidParams(format!("momentum {k:?} has wrong dimension")));
        }
        let m: Vec<usize> = k
            .iter()
            .zip(&self.extents)
            .map(|(&kj, &l)| {
                let x = kj * l as f64 / (2.0 * PI);
                let r = (x - 0.5 - 1e-9).ceil() as i64;
                r.rem_euclid(l as i64) as usize
            })
            .collect();
        Ok(self.index_of(&m))
    }

    /// Exact grid index of `k`, or an off-grid error.
    pub fn locate(&self, k: &[f64]) -> Result<usize> {
        let i = self.snap(k)?;
        let on = self
            .momentum(i)
            .iter()
            .zip(k)
            .all(|(a, b)| {
                let diff = (a - b).rem_euclid(2.0 * PI);
                diff.min(2.0 * PI - diff) < 1e-9
            });
        if on {
            Ok(i)
        } else {
            Err(Error::OffGrid(k.to_vec()))
        }
    }
}

/// Piecewise-linear path through momentum space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPathSpec {
    pub endpoints: Vec<Vec<f64>>,
    pub samples_per_segment: usize,
    /// Include the final endpoint (segments are otherwise half-open).
    #[serde(default)]
    pub closed: bool,
}

/// Momenta along a path. With a grid, samples snap to grid momenta and
/// consecutive duplicates collapse.
pub fn k_path(spec: &KPathSpec, grid: Option<&MomentumGrid>) -> Result<Vec<Vec<f64>>> {
    let pts = &spec.endpoints;
    if pts.is_empty() {
        return Err(Error::InvalidParams("empty k-path".into()));
    }
    let d = pts[0].len();
    if pts.iter().any(|p| p.len() != d) {
        return Err(Error::InvalidParams("k-path endpoints differ in dimension".into()));
    }
    let mut raw: Vec<Vec<f64>> = Vec::new();
    if pts.len() == 1 {
        raw.push(pts[0].clone());
    } else {
        let s = spec.samples_per_segment.max(1);
        for w in pts.windows(2) {
            for j in 0..s {
                let f = j as f64 / s as f64;
                raw.push(w[0].iter().zip(&w[1]).map(|(a, b)| a + f * (b - a)).collect());
            }
        }
        if spec.closed {
            raw.push(pts[pts.len() - 1].clone());
        }
    }
    let Some(grid) = grid else {
        return Ok(raw);
    };
    let mut out: Vec<Vec<f64>> = Vec::new();
    let mut last = None;
    for k in &raw {
        let i = grid.snap(k)?;
        if last != Some(i) {
            out.push(grid.momentum(i));
            last = Some(i);
        }
    }
    Ok(out)
}
