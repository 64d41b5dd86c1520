//! Dense exact diagonalization of the truncated Bose-Hubbard Hamiltonian
//! on tiny periodic lattices, as an independent check of the
//! mean-field-plus-fluctuations energy.
//!
//! `H = -J sum_i sum_{j, a = +-1} b_i^dagger b_{i + a e_j} + 1/2 sum_i n_i (n_i - 1) - mu sum_i n_i`
//! with `J = t / f`. On a two-site ring both neighbours of a site coincide,
//! so the bond appears twice, exactly as in the momentum-space structure
//! factor.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::complexity::complexity_for;
use crate::error::{Error, Result};
use crate::onsite::{self_consistent_phi, ModelParams};

pub const MAX_SITES: usize = 4;
pub const MAX_TRUNCATION: usize = 5;
pub const MAX_DIMENSION: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Geometry {
    /// Periodic chain of the given length (d = 1, f = 2).
    Chain(usize),
    /// Periodic 2 x 2 plaquette (d = 2, f = 4).
    Plaquette,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallLatticeSpec {
    pub geometry: Geometry,
    pub n: usize,
    pub t: f64,
    pub mu_bar: f64,
}

impl SmallLatticeSpec {
    pub fn extents(&self) -> Vec<usize> {
        match self.geometry {
            Geometry::Chain(l) => vec![l],
            Geometry::Plaquette => vec![2, 2],
        }
    }

    pub fn sites(&self) -> usize {
        self.extents().iter().product()
    }

    pub fn model_params(&self) -> Result<ModelParams> {
        let ext = self.extents();
        ModelParams::new(ext.len(), ext, self.n, self.t, self.mu_bar)
    }

    pub fn dimension(&self) -> Option<usize> {
        self.n.checked_pow(self.sites() as u32)
    }

    fn validate(&self) -> Result<()> {
        self.model_params()?;
        if self.sites() > MAX_SITES || self.n > MAX_TRUNCATION {
            return Err(Error::InvalidParams(format!(
                "oracle limited to {MAX_SITES} sites and n <= {MAX_TRUNCATION}"
            )));
        }
        match self.dimension() {
            Some(dim) if dim <= MAX_DIMENSION => Ok(()),
            other => Err(Error::DimensionCap(other.unwrap_or(usize::MAX))),
        }
    }
}

/// Occupation of `site` in basis state `s` (base-`n` digits, site 0 slowest).
fn occupation(s: usize, site: usize, sites: usize, n: usize) -> usize {
    (s / n.pow((sites - 1 - site) as u32)) % n
}

/// Neighbour list with multiplicity: for every site, dimension and direction.
fn neighbour_pairs(extents: &[usize]) -> Vec<(usize, usize)> {
    let sites: usize = extents.iter().product();
    let d = extents.len();
    let coords = |mut i: usize| {
        let mut c = vec![0; d];
        for j in (0..d).rev() {
            c[j] = i % extents[j];
            i /= extents[j];
        }
        c
    };
    let index = |c: &[usize]| c.iter().zip(extents).fold(0, |acc, (&x, &l)| acc * l + x);
    let mut pairs = Vec::new();
    for i in 0..sites {
        let c = coords(i);
        for j in 0..d {
            for step in [1, extents[j] - 1] {
                let mut nb = c.clone();
                nb[j] = (c[j] + step) % extents[j];
                pairs.push((i, index(&nb)));
            }
        }
    }
    pairs
}

/// Dense many-body Hamiltonian in the occupation basis.
pub fn many_body_hamiltonian(spec: &SmallLatticeSpec) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let ext = spec.extents();
    let sites = spec.sites();
    let n = spec.n;
    let dim = spec.dimension().expect("validated");
    let hop = spec.t / (2 * ext.len()) as f64;
    let mut h = DMatrix::zeros(dim, dim);
    for s in 0..dim {
        let mut diag = 0.0;
        for i in 0..sites {
            let m = occupation(s, i, sites, n) as f64;
            diag += 0.5 * m * (m - 1.0) - spec.mu_bar * m;
        }
        h[(s, s)] = diag;
    }
    if hop != 0.0 {
        let stride = |i: usize| n.pow((sites - 1 - i) as u32);
        for (i, j) in neighbour_pairs(&ext) {
            // b_i^dagger b_j
            for s in 0..dim {
                let mi = occupation(s, i, sites, n);
                let mj = occupation(s, j, sites, n);
                if mj == 0 || mi + 1 >= n {
                    continue;
                }
                let amp = ((mi + 1) as f64 * mj as f64).sqrt();
                let target = s + stride(i) - stride(j);
                h[(target, s)] -= hop * amp;
            }
        }
    }
    Ok(h)
}

#[derive(Debug, Clone)]
pub struct ExactGroundState {
    pub energy: f64,
    pub vector: DVector<f64>,
    /// `<b_i>` per site.
    pub b_expectation: Vec<f64>,
    /// `<b_i^dagger b_j>`.
    pub correlations: DMatrix<f64>,
}

pub fn exact_ground_state(spec: &SmallLatticeSpec) -> Result<ExactGroundState> {
    let h = many_body_hamiltonian(spec)?;
    let eig = SymmetricEigen::new(h);
    let (i0, energy) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("non-empty spectrum");
    let vector: DVector<f64> = eig.eigenvectors.column(i0).into_owned();

    let sites = spec.sites();
    let n = spec.n;
    let stride = |i: usize| n.pow((sites - 1 - i) as u32);
    let mut b_expectation = vec![0.0; sites];
    let mut correlations = DMatrix::zeros(sites, sites);
    for s in 0..vector.len() {
        let cs = vector[s];
        if cs == 0.0 {
            continue;
        }
        for i in 0..sites {
            let mi = occupation(s, i, sites, n);
            if mi > 0 {
                // <s - e_i| b_i |s> = sqrt(m_i)
                b_expectation[i] += vector[s - stride(i)] * (mi as f64).sqrt() * cs;
            }
            for j in 0..sites {
                let mj = occupation(s, j, sites, n);
                if i == j {
                    correlations[(i, i)] += cs * cs * mi as f64;
                    continue;
                }
                if mj == 0 || mi + 1 >= n {
                    continue;
                }
                let target = s + stride(i) - stride(j);
                correlations[(i, j)] += vector[target] * ((mi + 1) as f64 * mj as f64).sqrt() * cs;
            }
        }
    }
    Ok(ExactGroundState {
        energy,
        vector,
        b_expectation,
        correlations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyComparison {
    pub exact: f64,
    /// `N (eps_0 + t phi^2)`.
    pub mean_field: f64,
    /// Mean field plus the zero-point shift of the quadratic fluctuations.
    pub quadratic: f64,
    pub mean_field_rel_error: f64,
    pub quadratic_rel_error: f64,
}

pub fn compare_energy(spec: &SmallLatticeSpec) -> Result<EnergyComparison> {
    let exact = exact_ground_state(spec)?.energy;
    let params = spec.model_params()?;
    let mfs = self_consistent_phi(&params)?;
    let report = complexity_for(&params, &mfs, &[1.0])?;
    let mean_field = params.sites() as f64 * mfs.free_energy;
    let quadratic = report.quadratic_energy();
    let rel = |e: f64| if exact != 0.0 { (e - exact).abs() / exact.abs() } else { (e - exact).abs() };
    Ok(EnergyComparison {
        exact,
        mean_field,
        quadratic,
        mean_field_rel_error: rel(mean_field),
        quadratic_rel_error: rel(quadratic),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain2(n: usize, t: f64, mu: f64) -> SmallLatticeSpec {
        SmallLatticeSpec {
            geometry: Geometry::Chain(2),
            n,
            t,
            mu_bar: mu,
        }
    }

    #[test]
    fn decoupled_sites() {
        for mu in [0.3, 0.5, 1.4] {
            let spec = chain2(4, 0.0, mu);
            let e = exact_ground_state(&spec).unwrap().energy;
            let per_site = (0..4)
                .map(|m| 0.5 * (m * (m - 1)) as f64 - mu * m as f64)
                .fold(f64::INFINITY, f64::min);
            assert!((e - 2.0 * per_site).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_symmetric() {
        let spec = SmallLatticeSpec {
            geometry: Geometry::Plaquette,
            n: 3,
            t: 0.1,
            mu_bar: 0.4,
        };
        let h = many_body_hamiltonian(&spec).unwrap();
        assert!((&h - h.transpose()).amax() <= 1e-12);
    }

    #[test]
    fn particle_number_conserved() {
        let spec = chain2(3, 0.05, 0.5);
        let h = many_body_hamiltonian(&spec).unwrap();
        let dim = h.nrows();
        let total = |s: usize| (0..2).map(|i| occupation(s, i, 2, 3)).sum::<usize>();
        for a in 0..dim {
            for b in 0..dim {
                if h[(a, b)] != 0.0 {
                    assert_eq!(total(a), total(b));
                }
            }
        }
        let g = exact_ground_state(&spec).unwrap();
        assert!(g.b_expectation.iter().all(|b| b.abs() < 1e-12));
        assert!((g.correlations.trace() - 2.0).abs() < 1e-2);
    }

    #[test]
    fn zero_hopping_all_agree() {
        let c = compare_energy(&chain2(3, 0.0, 0.5)).unwrap();
        assert!((c.exact - c.mean_field).abs() < 1e-14);
        assert!((c.exact - c.quadratic).abs() < 1e-14);
    }

    #[test]
    fn caps() {
        let big = SmallLatticeSpec {
            geometry: Geometry::Chain(5),
            n: 3,
            t: 0.1,
            mu_bar: 0.5,
        };
        assert!(exact_ground_state(&big).is_err());
        assert!(exact_ground_state(&chain2(6, 0.1, 0.5)).is_err());
    }
}
