//! Per-momentum blocks of the quadratic fluctuation Hamiltonian.
//!
//! In the basis `(gamma_k, gamma^dagger_{-k})` of spin-wave flavors
//! `alpha = 1..n-1` the block is `[[M, P], [P, M]]` with
//!
//! ```text
//! M_ab = (eps_a - eps_0) delta_ab - t eta_k (B_a0 B_b0 + B_0b B_0a)
//! P_ab = -t eta_k (B_0a B_b0 + B_0b B_a0)
//! ```
//!
//! where `B_ba = <b| b^dagger |a>` in the mean-field eigenbasis.

use nalgebra::DMatrix;

use crate::lattice;
use crate::onsite::{MeanFieldSolution, ModelParams};

#[derive(Debug, Clone, PartialEq)]
pub struct ModeBlock {
    pub k: Vec<f64>,
    pub eta: f64,
    pub m: DMatrix<f64>,
    pub p: DMatrix<f64>,
}

impl ModeBlock {
    /// Number of flavors, `n - 1`.
    pub fn flavors(&self) -> usize {
        self.m.nrows()
    }

    /// The full `2(n-1)` square block `[[M, P], [P, M]]`.
    pub fn h2(&self) -> DMatrix<f64> {
        let f = self.flavors();
        let mut h = DMatrix::zeros(2 * f, 2 * f);
        h.view_mut((0, 0), (f, f)).copy_from(&self.m);
        h.view_mut((f, f), (f, f)).copy_from(&self.m);
        h.view_mut((0, f), (f, f)).copy_from(&self.p);
        h.view_mut((f, 0), (f, f)).copy_from(&self.p);
        h
    }

    /// Block from explicit matrices (used for model Hamiltonians and tests).
    pub fn from_matrices(m: DMatrix<f64>, p: DMatrix<f64>) -> Self {
        assert_eq!(m.shape(), p.shape(), "M and P must have equal shape");
        assert!(m.is_square(), "M must be square");
        Self {
            k: Vec::new(),
            eta: f64::NAN,
            m: symmetrized(m),
            p: symmetrized(p),
        }
    }
}

fn symmetrized(a: DMatrix<f64>) -> DMatrix<f64> {
    (&a + a.transpose()) * 0.5
}

pub fn build_mode_block(mfs: &MeanFieldSolution, params: &ModelParams, k: &[f64]) -> ModeBlock {
    block_at_eta(mfs, params.t, lattice::eta(k), k)
}

/// Block at a given structure factor; `k` is carried only as a label.
pub fn block_at_eta(mfs: &MeanFieldSolution, t: f64, eta: f64, k: &[f64]) -> ModeBlock {
    let b = &mfs.b_dagger_matrix;
    let e = &mfs.energies;
    let f = e.len() - 1;
    let hop = t * eta;
    let mut m = DMatrix::zeros(f, f);
    let mut p = DMatrix::zeros(f, f);
    for a in 1..=f {
        for c in 1..=f {
            let diag = if a == c { e[a] - e[0] } else { 0.0 };
            m[(a - 1, c - 1)] = diag - hop * (b[(a, 0)] * b[(c, 0)] + b[(0, c)] * b[(0, a)]);
            p[(a - 1, c - 1)] = -hop * (b[(0, a)] * b[(c, 0)] + b[(0, c)] * b[(a, 0)]);
        }
    }
    ModeBlock {
        k: k.to_vec(),
        eta,
        m: symmetrized(m),
        p: symmetrized(p),
    }
}
