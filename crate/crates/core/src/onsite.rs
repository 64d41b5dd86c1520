//! Single-site mean field: truncated ladder operators, the on-site
//! Hamiltonian, the self-consistent order parameter and the Mott-lobe
//! geometry it implies.
//!
//! Energies are in units of the on-site repulsion `U`; the hopping enters
//! only through `t = J f` with `f = 2d` the coordination number.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optimize::{bisect_indicator, brent_root, golden_section_min};

/// Default local Hilbert-space truncation.
pub const DEFAULT_TRUNCATION: usize = 6;
/// Order parameters below this are reported as an exact zero.
pub const PHI_TOL: f64 = 1e-8;
/// Step size at which the damped fixed-point iteration is declared converged.
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Damping of the fixed-point update.
pub const DAMPING: f64 = 0.5;
/// Iteration budget for the fixed-point stage.
pub const MAX_ITERATIONS: usize = 10_000;
/// Largest accepted self-consistency residual `|phi - <b>|`.
pub const RESIDUAL_TOL: f64 = 1e-10;

/// Physical inputs of one phase-diagram point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Spatial dimension of the cubic lattice.
    pub d: usize,
    /// Sites per dimension (periodic).
    pub extents: Vec<usize>,
    /// Local truncation: Fock states `0..n`.
    pub n: usize,
    /// Dimensionless hopping `J f / U`.
    pub t: f64,
    /// Dimensionless chemical potential `mu / U`.
    pub mu_bar: f64,
}

impl ModelParams {
    pub fn new(d: usize, extents: Vec<usize>, n: usize, t: f64, mu_bar: f64) -> Result<Self> {
        let p = Self {
            d,
            extents,
            n,
            t,
            mu_bar,
        };
        p.validate()?;
        Ok(p)
    }

    /// Square or cubic lattice with `l` sites per side.
    pub fn cubic(d: usize, l: usize, n: usize, t: f64, mu_bar: f64) -> Result<Self> {
        Self::new(d, vec![l; d], n, t, mu_bar)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidTruncation(self.n));
        }
        if self.d == 0 || self.d > 3 {
            return Err(Error::InvalidParams(format!("dimension {} not in 1..=3", self.d)));
        }
        if self.extents.len() != self.d {
            return Err(Error::InvalidParams(format!(
                "{} extents given for d = {}",
                self.extents.len(),
                self.d
            )));
        }
        if self.extents.iter().any(|&l| l < 2) {
            return Err(Error::InvalidParams("every extent must be >= 2".into()));
        }
        if !(self.t >= 0.0) || !self.t.is_finite() {
            return Err(Error::InvalidParams(format!("hopping t = {} must be finite and >= 0", self.t)));
        }
        if !self.mu_bar.is_finite() {
            return Err(Error::InvalidParams("chemical potential must be finite".into()));
        }
        Ok(())
    }

    /// Coordination number.
    pub fn f(&self) -> usize {
        2 * self.d
    }

    pub fn sites(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn with_t(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn with_mu(&self, mu_bar: f64) -> Self {
        Self { mu_bar, ..self.clone() }
    }
}

/// Matrices of `b`, `b^dagger` and `n` on the truncated Fock space.
#[derive(Debug, Clone)]
pub struct Ladder {
    pub b: DMatrix<f64>,
    pub b_dagger: DMatrix<f64>,
    pub number: DMatrix<f64>,
}

pub fn ladder_operators(n: usize) -> Result<Ladder> {
    if n < 2 {
        return Err(Error::InvalidTruncation(n));
    }
    let mut b = DMatrix::zeros(n, n);
    for m in 0..n - 1 {
        b[(m, m + 1)] = ((m + 1) as f64).sqrt();
    }
    let b_dagger = b.transpose();
    let number = DMatrix::from_diagonal(&DVector::from_fn(n, |m, _| m as f64));
    Ok(Ladder { b, b_dagger, number })
}

/// `H_MF = -t phi (b + b^dagger) + n(n-1)/2 - mu n` in the Fock basis.
pub fn onsite_hamiltonian(n: usize, t: f64, mu_bar: f64, phi: f64) -> DMatrix<f64> {
    let mut h = DMatrix::zeros(n, n);
    for m in 0..n {
        let mf = m as f64;
        h[(m, m)] = 0.5 * mf * (mf - 1.0) - mu_bar * mf;
        if m + 1 < n {
            let hop = -t * phi * (mf + 1.0).sqrt();
            h[(m, m + 1)] = hop;
            h[(m + 1, m)] = hop;
        }
    }
    h
}

/// Eigen-decomposition of the on-site Hamiltonian at a given `phi`.
/// Energies ascend; each eigenvector has its largest-magnitude component positive.
pub fn solve_onsite(params: &ModelParams, phi: f64) -> Result<(Vec<f64>, DMatrix<f64>)> {
    params.validate()?;
    if !(phi >= 0.0) {
        return Err(Error::InvalidParams(format!("phi = {phi} must be >= 0")));
    }
    Ok(diagonalize_onsite(params.n, params.t, params.mu_bar, phi))
}

fn diagonalize_onsite(n: usize, t: f64, mu_bar: f64, phi: f64) -> (Vec<f64>, DMatrix<f64>) {
    let h = onsite_hamiltonian(n, t, mu_bar, phi);
    if t * phi == 0.0 {
        // Diagonal: Fock states, degenerate levels kept in Fock-index order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| h[(a, a)].total_cmp(&h[(b, b)]).then(a.cmp(&b)));
        let energies = order.iter().map(|&m| h[(m, m)]).collect();
        let mut states = DMatrix::zeros(n, n);
        for (col, &m) in order.iter().enumerate() {
            states[(m, col)] = 1.0;
        }
        return (energies, states);
    }
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let energies = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut states = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        let mut v = eig.eigenvectors.column(i).into_owned();
        let mut pivot = 0;
        for r in 1..n {
            if v[r].abs() > v[pivot].abs() {
                pivot = r;
            }
        }
        if v[pivot] < 0.0 {
            v.neg_mut();
        }
        states.set_column(col, &v);
    }
    (energies, states)
}

/// `<Phi_0| b |Phi_0>` for a ground-state vector in the Fock basis.
fn expect_b(ground: &[f64]) -> f64 {
    ground
        .windows(2)
        .enumerate()
        .map(|(m, w)| ((m + 1) as f64).sqrt() * w[0] * w[1])
        .sum()
}

/// Ground energy and `<b>` of `H_MF(phi)`.
fn ground_at(n: usize, t: f64, mu_bar: f64, phi: f64) -> (f64, f64) {
    let (e, s) = diagonalize_onsite(n, t, mu_bar, phi);
    let g: Vec<f64> = s.column(0).iter().copied().collect();
    (e[0], expect_b(&g))
}

/// Per-site mean-field functional `F(phi) = eps_0(phi) + t phi^2`.
///
/// Its stationary points are exactly the self-consistent solutions since
/// `dF/dphi = 2 t (phi - <b>)`.
pub fn free_energy(params: &ModelParams, phi: f64) -> f64 {
    let (e0, _) = ground_at(params.n, params.t, params.mu_bar, phi);
    e0 + params.t * phi * phi
}

/// How the returned order parameter was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveRoute {
    /// No hopping or the trivial solution has the lowest functional.
    Trivial,
    FixedPoint,
    /// Bracketed root of the functional's gradient.
    Bracketed,
}

#[derive(Debug, Clone)]
pub struct MeanFieldSolution {
    pub phi: f64,
    /// On-site energies, ascending.
    pub energies: Vec<f64>,
    /// Eigenvectors of `H_MF` as columns, Fock basis.
    pub states: DMatrix<f64>,
    /// `B[(beta, alpha)] = <beta| b^dagger |alpha>` in the eigenbasis.
    pub b_dagger_matrix: DMatrix<f64>,
    pub converged: bool,
    pub free_energy: f64,
    pub iterations: usize,
    pub route: SolveRoute,
}

impl MeanFieldSolution {
    /// `phi - <Phi_0| b |Phi_0>`.
    pub fn residual(&self) -> f64 {
        let g: Vec<f64> = self.states.column(0).iter().copied().collect();
        self.phi - expect_b(&g)
    }

    /// Gap between the two lowest on-site levels.
    pub fn onsite_gap(&self) -> f64 {
        self.energies[1] - self.energies[0]
    }
}

fn assemble(params: &ModelParams, phi: f64, iterations: usize, route: SolveRoute) -> MeanFieldSolution {
    let (energies, states) = diagonalize_onsite(params.n, params.t, params.mu_bar, phi);
    let ladder = ladder_operators(params.n).expect("validated truncation");
    let b_dagger_matrix = states.transpose() * &ladder.b_dagger * &states;
    let free_energy = energies[0] + params.t * phi * phi;
    let mut sol = MeanFieldSolution {
        phi,
        energies,
        states,
        b_dagger_matrix,
        converged: true,
        free_energy,
        iterations,
        route,
    };
    sol.converged = sol.residual().abs() <= RESIDUAL_TOL;
    sol
}

struct FixedPoint {
    phi: f64,
    converged: bool,
    iterations: usize,
}

fn damped_fixed_point(params: &ModelParams, start: f64) -> FixedPoint {
    let mut phi = start;
    let mut prev_step = f64::INFINITY;
    for it in 1..=MAX_ITERATIONS {
        let (_, b) = ground_at(params.n, params.t, params.mu_bar, phi);
        let next = (1.0 - DAMPING) * phi + DAMPING * b;
        let step = (next - phi).abs();
        phi = next;
        if step < FIXED_POINT_TOL {
            return FixedPoint {
                phi,
                converged: true,
                iterations: it,
            };
        }
        // Stagnation: the observed contraction cannot reach the tolerance
        // within the remaining budget.
        if it > 50 {
            let ratio = step / prev_step;
            if ratio >= 1.0 {
                break;
            }
            let needed = (FIXED_POINT_TOL / step).ln() / ratio.ln();
            if needed > (MAX_ITERATIONS - it) as f64 {
                return FixedPoint {
                    phi,
                    converged: false,
                    iterations: it,
                };
            }
        }
        prev_step = step;
    }
    FixedPoint {
        phi,
        converged: false,
        iterations: MAX_ITERATIONS,
    }
}

/// Upper bound on any self-consistent `phi`: `<b> <= ||b|| = sqrt(n - 1)`.
fn phi_ceiling(n: usize) -> f64 {
    ((n - 1) as f64).sqrt() + 1.0
}

/// Minima of the functional located as `-` to `+` sign changes of its gradient.
fn bracketed_minima(params: &ModelParams) -> Result<Vec<f64>> {
    let (n, t, mu) = (params.n, params.t, params.mu_bar);
    let hi = phi_ceiling(n);
    let grad = |phi: f64| phi - ground_at(n, t, mu, phi).1;
    let mut xs: Vec<f64> = (1..=60).map(|j| hi * 0.5f64.powi(j)).collect();
    xs.extend((1..=64).map(|j| hi * j as f64 / 64.0));
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let hs: Vec<f64> = xs.iter().map(|&x| grad(x)).collect();
    let mut roots = Vec::new();
    for i in 0..xs.len() - 1 {
        if hs[i] < 0.0 && hs[i + 1] >= 0.0 {
            roots.push(brent_root(grad, xs[i], xs[i + 1], 1e-16)?);
        }
    }
    Ok(roots)
}

/// Self-consistent mean field with the default superfluid-biased start.
pub fn self_consistent_phi(params: &ModelParams) -> Result<MeanFieldSolution> {
    self_consistent_phi_from(params, None)
}

/// Self-consistent mean field starting the fixed-point stage at `warm`
/// (or 0.5 when absent). The trivial solution, the fixed point and every
/// bracketed minimum of the functional compete; the lowest functional wins.
pub fn self_consistent_phi_from(params: &ModelParams, warm: Option<f64>) -> Result<MeanFieldSolution> {
    params.validate()?;
    if params.t == 0.0 {
        return Ok(assemble(params, 0.0, 0, SolveRoute::Trivial));
    }
    let start = warm.filter(|w| *w > PHI_TOL).unwrap_or(0.5);
    let fp = damped_fixed_point(params, start);

    let mut candidates: Vec<(f64, SolveRoute)> = vec![(0.0, SolveRoute::Trivial)];
    if fp.converged && fp.phi > PHI_TOL {
        candidates.push((fp.phi, SolveRoute::FixedPoint));
    }
    for r in bracketed_minima(params)? {
        candidates.push((r, SolveRoute::Bracketed));
    }

    let mut best = (0.0, SolveRoute::Trivial, free_energy(params, 0.0));
    for &(phi, route) in &candidates[1..] {
        let f = free_energy(params, phi);
        if f < best.2 {
            best = (phi, route, f);
        }
    }
    let (mut phi, mut route) = (best.0, best.1);
    if phi < PHI_TOL {
        phi = 0.0;
        route = SolveRoute::Trivial;
    }
    let sol = assemble(params, phi, fp.iterations, route);
    if !sol.converged {
        return Err(Error::Convergence {
            iterations: fp.iterations,
            last_phi: phi,
        });
    }
    Ok(sol)
}

/// Default bisection tolerance in `t` for lobe boundaries.
pub const BOUNDARY_TOL: f64 = 1e-6;

/// Hopping at which the Mott lobe containing `mu_bar` ends, by bisection on
/// the indicator `phi > PHI_TOL`.
pub fn locate_lobe_boundary(params: &ModelParams, mu_bar: f64) -> Result<f64> {
    locate_lobe_boundary_tol(params, mu_bar, BOUNDARY_TOL)
}

pub fn locate_lobe_boundary_tol(params: &ModelParams, mu_bar: f64, tol: f64) -> Result<f64> {
    let base = params.with_mu(mu_bar);
    base.with_t(0.0).validate()?;
    let superfluid = |t: f64| -> Result<bool> { Ok(self_consistent_phi(&base.with_t(t))?.phi > PHI_TOL) };
    bisect_indicator(superfluid, 0.0, 1.0, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LobeTip {
    pub t_c: f64,
    pub mu_c: f64,
}

/// Tip of the Mott lobe with filling `lobe` (>= 1): the maximum of the
/// boundary over `mu in (lobe - 1, lobe)`.
pub fn locate_tip(params: &ModelParams, lobe: usize) -> Result<LobeTip> {
    if lobe == 0 {
        return Err(Error::InvalidParams("lobe index must be >= 1".into()));
    }
    let lo = (lobe - 1) as f64 + 1e-3;
    let hi = lobe as f64 - 1e-3;
    let (mu_c, neg_t) = golden_section_min(
        |mu| Ok(-locate_lobe_boundary_tol(params, mu, 1e-10)?),
        lo,
        hi,
        1e-6,
    )?;
    Ok(LobeTip { t_c: -neg_t, mu_c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn p(t: f64, mu: f64) -> ModelParams {
        ModelParams::cubic(2, 4, 6, t, mu).unwrap()
    }

    #[test]
    fn ladder_two_levels() {
        let l = ladder_operators(2).unwrap();
        assert_eq!(l.b, DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        assert_eq!(l.b_dagger, l.b.transpose());
        assert_eq!(l.number[(1, 1)], 1.0);
    }

    #[test]
    fn ladder_sqrt_entries() {
        let l = ladder_operators(3).unwrap();
        assert_abs_diff_eq!(l.b[(1, 2)], std::f64::consts::SQRT_2, epsilon = 1e-12);
    }

    #[test]
    fn ladder_commutator_truncation_defect() {
        let l = ladder_operators(4).unwrap();
        let c = &l.b * &l.b_dagger - &l.b_dagger * &l.b;
        for i in 0..4 {
            for j in 0..4 {
                let expected = match (i, j) {
                    (3, 3) => -3.0,
                    (a, b) if a == b => 1.0,
                    _ => 0.0,
                };
                assert_abs_diff_eq!(c[(i, j)], expected, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn ladder_rejects_small_truncation() {
        assert_eq!(ladder_operators(1).unwrap_err(), Error::InvalidTruncation(1));
    }

    #[test]
    fn zero_hopping_levels_are_fock_energies() {
        let (e, s) = solve_onsite(&p(0.0, 0.5), 0.3).unwrap();
        assert_abs_diff_eq!(e[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(e[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(e[2], 0.0, epsilon = 1e-15);
        // Ground is Fock |1>; the degenerate pair keeps Fock order |0>, |2>.
        assert_eq!(s[(1, 0)], 1.0);
        assert_eq!(s[(0, 1)], 1.0);
        assert_eq!(s[(2, 2)], 1.0);
    }

    #[test]
    fn zero_phi_b_matrix_is_fock() {
        let sol = self_consistent_phi(&p(0.05, 2f64.sqrt() - 1.0)).unwrap();
        assert_eq!(sol.phi, 0.0);
        // Map eigen-index back to Fock index through the states.
        let fock: Vec<usize> = (0..6)
            .map(|c| (0..6).find(|&r| sol.states[(r, c)] == 1.0).unwrap())
            .collect();
        for a in 0..6 {
            for b in 0..6 {
                let expected = if fock[b] == fock[a] + 1 { (fock[b] as f64).sqrt() } else { 0.0 };
                assert_abs_diff_eq!(sol.b_dagger_matrix[(b, a)], expected, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn states_are_orthonormal_with_sign_convention() {
        let (_, s) = solve_onsite(&p(0.2, 0.4), 0.7).unwrap();
        let g = s.transpose() * &s;
        assert!((g - DMatrix::<f64>::identity(6, 6)).amax() < 1e-12);
        for c in 0..6 {
            let col = s.column(c);
            let big = col.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
            assert!(big > 0.0);
        }
    }

    #[test]
    fn deep_mott_is_trivial() {
        let sol = self_consistent_phi(&p(0.05, 2f64.sqrt() - 1.0)).unwrap();
        assert_eq!(sol.phi, 0.0);
        assert_eq!(sol.route, SolveRoute::Trivial);
    }

    #[test]
    fn superfluid_has_gap_and_order() {
        let sol = self_consistent_phi(&p(0.2, 2f64.sqrt() - 1.0)).unwrap();
        assert!(sol.phi > 0.1);
        assert!(sol.onsite_gap() > 0.0);
        assert!(sol.residual().abs() <= 1e-10);
    }

    #[test]
    fn warm_start_agrees_with_cold_start() {
        let params = p(0.18, 0.4);
        let cold = self_consistent_phi(&params).unwrap();
        let warm = self_consistent_phi_from(&params, Some(cold.phi * 1.1)).unwrap();
        assert_abs_diff_eq!(cold.phi, warm.phi, epsilon = 1e-10);
    }

    #[test]
    fn lobe_closes_at_integer_mu() {
        let params = p(0.0, 0.0);
        assert!(locate_lobe_boundary(&params, 1e-3).unwrap() < 2e-3);
        assert!(locate_lobe_boundary(&params, 1.0 - 1e-3).unwrap() < 2e-3);
    }

    #[test]
    fn generic_boundary_matches_second_order_condition() {
        // 1/t = 2/(1 - mu) + 1/mu on the n = 1 lobe.
        let mu: f64 = 0.77;
        let exact = 1.0 / (2.0 / (1.0 - mu) + 1.0 / mu);
        let tb = locate_lobe_boundary(&p(0.0, 0.0), mu).unwrap();
        assert_abs_diff_eq!(tb, exact, epsilon = 2e-6);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(ModelParams::cubic(2, 4, 1, 0.1, 0.5).is_err());
        assert!(ModelParams::cubic(2, 1, 6, 0.1, 0.5).is_err());
        assert!(ModelParams::cubic(2, 4, 6, -0.1, 0.5).is_err());
        assert!(ModelParams::new(2, vec![4], 6, 0.1, 0.5).is_err());
        assert_eq!(p(0.1, 0.5).f(), 4);
    }
}
