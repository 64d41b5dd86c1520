//! Bosonic Bogoliubov diagonalization of quadratic blocks.
//!
//! The block `H2 = [[M, P], [P, M]]` is factored as `L L^T` and the symmetric
//! matrix `L^T kappa L` is diagonalized (Colpa's construction). Its positive
//! eigenvalues are the normal frequencies; the transformation
//! `G = [[u, v], [v, u]]` is symplectic with respect to
//! `kappa = diag(1, .., 1, -1, .., -1)`. Squeezing angles are the logarithms of
//! the singular values of `u + v`.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::error::{Error, Result};
use crate::quadratic::ModeBlock;

/// Frequencies below this are treated as zero modes and carry no angle.
pub const ZERO_MODE_TOL: f64 = 1e-4;

/// Relative diagonal shift applied when the Cholesky factorization fails.
const SHIFT_REL: f64 = 1e-12;

/// Most negative eigenvalue of `H2` (relative to its max-norm) still accepted
/// as a rounding artifact of a gapless block.
const INDEFINITE_REL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct BogoliubovResult {
    /// Normal frequencies, ascending.
    pub omegas: Vec<f64>,
    /// Squeezing angle paired with each frequency; zero for zero modes.
    pub thetas: Vec<f64>,
    /// Which entries of `omegas` are zero modes (their angle is dropped).
    pub zero_mode: Vec<bool>,
    pub zero_mode_count: usize,
    /// Full `2f x 2f` transformation `[[u, v], [v, u]]`.
    pub g: DMatrix<f64>,
    /// Whether a diagonal shift was needed to factor the block.
    pub shifted: bool,
}

impl BogoliubovResult {
    pub fn flavors(&self) -> usize {
        self.omegas.len()
    }

    pub fn u(&self) -> DMatrix<f64> {
        let f = self.flavors();
        self.g.view((0, 0), (f, f)).into_owned()
    }

    pub fn v(&self) -> DMatrix<f64> {
        let f = self.flavors();
        self.g.view((f, 0), (f, f)).into_owned()
    }

    /// Angles of the modes that count, in ascending-frequency order.
    pub fn active_thetas(&self) -> impl Iterator<Item = f64> + '_ {
        self.thetas
            .iter()
            .zip(&self.zero_mode)
            .filter(|(_, &z)| !z)
            .map(|(&th, _)| th)
    }
}

/// `kappa = diag(+1 x f, -1 x f)`.
pub fn kappa(f: usize) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_fn(2 * f, |i, _| if i < f { 1.0 } else { -1.0 }))
}

/// Max-norm of `G kappa G^T - kappa`.
pub fn symplectic_check(g: &DMatrix<f64>) -> f64 {
    assert!(g.is_square() && g.nrows().is_multiple_of(2), "G must be square of even size");
    let k = kappa(g.nrows() / 2);
    (g * &k * g.transpose() - k).amax()
}

/// Max-norm of `G^{-1} kappa H2 G - diag(omega, -omega)`, using
/// `G^{-1} = kappa G^T kappa`.
pub fn similarity_residual(block: &ModeBlock, res: &BogoliubovResult) -> f64 {
    let f = block.flavors();
    let k = kappa(f);
    let g_inv = &k * res.g.transpose() * &k;
    let lhs = g_inv * &k * block.h2() * &res.g;
    let target = DMatrix::from_diagonal(&DVector::from_fn(2 * f, |i, _| {
        if i < f {
            res.omegas[i]
        } else {
            -res.omegas[i - f]
        }
    }));
    (lhs - target).amax()
}

fn factor(h2: &DMatrix<f64>, block: &ModeBlock) -> Result<(DMatrix<f64>, bool)> {
    if let Some(ch) = h2.clone().cholesky() {
        return Ok((ch.l(), false));
    }
    let scale = h2.amax().max(f64::MIN_POSITIVE);
    let dim = h2.nrows();
    let delta = SHIFT_REL * scale;
    let shifted = h2 + DMatrix::identity(dim, dim) * delta;
    if let Some(ch) = shifted.cholesky() {
        return Ok((ch.l(), true));
    }
    let lmin = SymmetricEigen::new(h2.clone()).eigenvalues.min();
    if lmin < -INDEFINITE_REL * scale {
        return Err(Error::Instability {
            t: f64::NAN,
            mu: f64::NAN,
            k: block.k.clone(),
            reason: format!("quadratic block not positive semidefinite (lambda_min = {lmin:e})"),
        });
    }
    let shifted = h2 + DMatrix::identity(dim, dim) * (2.0 * lmin.abs() + delta);
    shifted.cholesky().map(|ch| (ch.l(), true)).ok_or_else(|| Error::Instability {
        t: f64::NAN,
        mu: f64::NAN,
        k: block.k.clone(),
        reason: "Cholesky factorization failed after shift".into(),
    })
}

pub fn diagonalize_block(block: &ModeBlock) -> Result<BogoliubovResult> {
    let f = block.flavors();
    let h2 = block.h2();
    let (l, shifted) = factor(&h2, block)?;
    let k = kappa(f);
    let mut w = l.transpose() * &k * &l;
    w = (&w + w.transpose()) * 0.5;
    let eig = SymmetricEigen::new(w);

    let mut order: Vec<usize> = (0..2 * f).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let positive = &order[..f];
    if eig.eigenvalues[positive[f - 1]] < 0.0 {
        return Err(Error::Instability {
            t: f64::NAN,
            mu: f64::NAN,
            k: block.k.clone(),
            reason: "kappa H2 lacks f positive eigenvalues".into(),
        });
    }
    // ascending frequencies
    let modes: Vec<usize> = positive.iter().rev().copied().collect();
    let omegas: Vec<f64> = modes.iter().map(|&i| eig.eigenvalues[i]).collect();

    let lt = l.transpose();
    let mut g = DMatrix::zeros(2 * f, 2 * f);
    for (c, &i) in modes.iter().enumerate() {
        let rhs = eig.eigenvectors.column(i) * omegas[c].sqrt();
        let col = lt
            .solve_upper_triangular(&rhs)
            .ok_or_else(|| Error::Instability {
                t: f64::NAN,
                mu: f64::NAN,
                k: block.k.clone(),
                reason: "singular Cholesky factor".into(),
            })?;
        for r in 0..f {
            // [[u, v], [v, u]]: partner column of -omega is the swapped vector.
            g[(r, c)] = col[r];
            g[(r + f, c)] = col[r + f];
            g[(r, c + f)] = col[r + f];
            g[(r + f, c + f)] = col[r];
        }
    }

    let zero_mode: Vec<bool> = omegas.iter().map(|&w| w < ZERO_MODE_TOL).collect();
    let zero_mode_count = zero_mode.iter().filter(|&&z| z).count();
    let thetas = squeezing_angles(&g, f, &zero_mode);

    Ok(BogoliubovResult {
        omegas,
        thetas,
        zero_mode,
        zero_mode_count,
        g,
        shifted,
    })
}

/// `theta = ln sigma(u + v)` over the non-zero modes, each singular value
/// assigned to the mode its right singular vector overlaps most.
fn squeezing_angles(g: &DMatrix<f64>, f: usize, zero_mode: &[bool]) -> Vec<f64> {
    let active: Vec<usize> = (0..f).filter(|&c| !zero_mode[c]).collect();
    let mut thetas = vec![0.0; f];
    if active.is_empty() {
        return thetas;
    }
    let mut u_plus = DMatrix::zeros(f, active.len());
    for (j, &c) in active.iter().enumerate() {
        for r in 0..f {
            u_plus[(r, j)] = g[(r, c)] + g[(r + f, c)];
        }
    }
    let svd = SVD::new(u_plus, false, true);
    let vt = svd.v_t.expect("requested right singular vectors");
    let n = active.len();

    // Greedy maximum-overlap assignment; ties resolve by index order.
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for s in 0..n {
        for m in 0..n {
            cand.push((vt[(s, m)].abs(), s, m));
        }
    }
    cand.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut sv_used = vec![false; n];
    let mut mode_used = vec![false; n];
    for (_, s, m) in cand {
        if sv_used[s] || mode_used[m] {
            continue;
        }
        sv_used[s] = true;
        mode_used[m] = true;
        thetas[active[m]] = svd.singular_values[s].ln();
    }
    thetas
}
