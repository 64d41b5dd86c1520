//! Complexity sums `C_kappa = sum_{k, alpha} |theta_{k, alpha}|^kappa` over the
//! Brillouin zone, phase-diagram sweeps and their breakdowns.
//!
//! Every grid momentum contributes one term (full-zone convention). Blocks
//! depend on `k` only through `eta_k`, so they are computed once per symmetry
//! class, in parallel, and then reduced sequentially in grid order; results
//! are therefore independent of the worker count.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::{diagonalize_block, BogoliubovResult};
use crate::error::{Error, Result};
use crate::lattice::MomentumGrid;
use crate::onsite::{self_consistent_phi_from, MeanFieldSolution, ModelParams, SolveRoute};
use crate::quadratic::{block_at_eta, build_mode_block};

pub const DEFAULT_KAPPAS: [f64; 2] = [1.0, 2.0];

/// `|theta|^kappa` with exact special cases for the common orders.
pub fn theta_power(theta: f64, kappa: f64) -> f64 {
    let a = theta.abs();
    if kappa == 1.0 {
        a
    } else if kappa == 2.0 {
        a * a
    } else {
        a.powf(kappa)
    }
}

/// `sum_alpha |theta_alpha|^kappa` for each kappa, zero modes excluded.
pub fn mode_complexities(result: &BogoliubovResult, kappas: &[f64]) -> Vec<f64> {
    kappas
        .iter()
        .map(|&kp| result.active_thetas().map(|th| theta_power(th, kp)).sum())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSummary {
    pub phi: f64,
    pub free_energy: f64,
    pub onsite_gap: f64,
    pub route: SolveRoute,
}

impl From<&MeanFieldSolution> for MeanFieldSummary {
    fn from(m: &MeanFieldSolution) -> Self {
        Self {
            phi: m.phi,
            free_energy: m.free_energy,
            onsite_gap: m.onsite_gap(),
            route: m.route,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexityReport {
    pub params: ModelParams,
    pub kappas: Vec<f64>,
    /// `C_kappa` per kappa.
    pub totals: Vec<f64>,
    /// `C_kappa / N` per kappa.
    pub densities: Vec<f64>,
    /// Per grid momentum (grid order), per kappa.
    pub per_mode: Vec<Vec<f64>>,
    /// Per flavor (ascending frequency), per kappa.
    pub per_flavor: Vec<Vec<f64>>,
    pub zero_modes_dropped: usize,
    /// Smallest frequency that is not a zero mode.
    pub min_omega: f64,
    /// Frequencies at `k = 0`, ascending.
    pub gamma_omegas: Vec<f64>,
    /// `1/2 sum_k (sum_alpha omega_{k alpha} - tr M(k))`.
    pub zero_point_energy: f64,
    pub mean_field: MeanFieldSummary,
}

impl ComplexityReport {
    pub fn sites(&self) -> usize {
        self.params.sites()
    }

    /// `C_QC = sqrt(C_2)`, when kappa = 2 was requested.
    pub fn c_qc(&self) -> Option<f64> {
        self.kappa_index(2.0).map(|i| self.totals[i].sqrt())
    }

    pub fn kappa_index(&self, kappa: f64) -> Option<usize> {
        self.kappas.iter().position(|&k| k == kappa)
    }

    pub fn density(&self, kappa: f64) -> Option<f64> {
        self.kappa_index(kappa).map(|i| self.densities[i])
    }

    /// Ground energy of the quadratic theory, `N(eps_0 + t phi^2) + zero point`.
    pub fn quadratic_energy(&self) -> f64 {
        self.sites() as f64 * self.mean_field.free_energy + self.zero_point_energy
    }
}

struct ClassData {
    omegas: Vec<f64>,
    thetas: Vec<f64>,
    zero_mode: Vec<bool>,
    sums: Vec<f64>,
    trace_m: f64,
}

fn validate_kappas(kappas: &[f64]) -> Result<()> {
    if kappas.is_empty() || kappas.iter().any(|&k| !(k >= 1.0) || !k.is_finite()) {
        return Err(Error::InvalidParams(format!("kappa values must be >= 1, got {kappas:?}")));
    }
    Ok(())
}

/// Complexity of one phase point, solving the mean field from scratch.
pub fn phase_point_complexity(params: &ModelParams, kappas: &[f64]) -> Result<ComplexityReport> {
    phase_point_complexity_from(params, kappas, None)
}

/// As [`phase_point_complexity`] with a warm start for the order parameter.
pub fn phase_point_complexity_from(
    params: &ModelParams,
    kappas: &[f64],
    warm: Option<f64>,
) -> Result<ComplexityReport> {
    validate_kappas(kappas)?;
    let mfs = self_consistent_phi_from(params, warm)?;
    complexity_for(params, &mfs, kappas)
}

/// Complexity on the full momentum grid for a given mean-field solution.
pub fn complexity_for(params: &ModelParams, mfs: &MeanFieldSolution, kappas: &[f64]) -> Result<ComplexityReport> {
    validate_kappas(kappas)?;
    let grid = MomentumGrid::new(&params.extents)?;
    let (keys, class_of) = grid.classes();
    let mut rep = vec![usize::MAX; keys.len()];
    for (i, &c) in class_of.iter().enumerate() {
        if rep[c as usize] == usize::MAX {
            rep[c as usize] = i;
        }
    }

    let data: Vec<ClassData> = keys
        .par_iter()
        .zip(rep.par_iter())
        .map(|(key, &i)| {
            let k = grid.momentum(i);
            let block = block_at_eta(mfs, params.t, grid.class_eta(key), &k);
            let res = diagonalize_block(&block).map_err(|e| e.with_point(params.t, params.mu_bar, &k))?;
            Ok(ClassData {
                sums: mode_complexities(&res, kappas),
                trace_m: block.m.trace(),
                omegas: res.omegas,
                thetas: res.thetas,
                zero_mode: res.zero_mode,
            })
        })
        .collect::<Result<_>>()?;

    let nk = kappas.len();
    let flavors = params.n - 1;
    let mut totals = vec![0.0; nk];
    let mut per_mode = Vec::with_capacity(grid.len());
    let mut per_flavor = vec![vec![0.0; nk]; flavors];
    let mut zero_modes = 0;
    let mut min_omega = f64::INFINITY;
    let mut zero_point = 0.0;
    for &c in &class_of {
        let cd = &data[c as usize];
        for (tot, s) in totals.iter_mut().zip(&cd.sums) {
            *tot += s;
        }
        per_mode.push(cd.sums.clone());
        for (a, acc) in per_flavor.iter_mut().enumerate() {
            if cd.zero_mode[a] {
                zero_modes += 1;
                continue;
            }
            min_omega = min_omega.min(cd.omegas[a]);
            for (j, &kp) in kappas.iter().enumerate() {
                acc[j] += theta_power(cd.thetas[a], kp);
            }
        }
        zero_point += 0.5 * (cd.omegas.iter().sum::<f64>() - cd.trace_m);
    }
    let n = grid.len() as f64;
    Ok(ComplexityReport {
        params: params.clone(),
        kappas: kappas.to_vec(),
        densities: totals.iter().map(|c| c / n).collect(),
        totals,
        per_mode,
        per_flavor,
        zero_modes_dropped: zero_modes,
        min_omega,
        gamma_omegas: data[class_of[0] as usize].omegas.clone(),
        zero_point_energy: zero_point,
        mean_field: mfs.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScanAxis {
    T,
    Mu,
}

impl ScanAxis {
    pub fn apply(self, params: &ModelParams, x: f64) -> ModelParams {
        match self {
            ScanAxis::T => params.with_t(x),
            ScanAxis::Mu => params.with_mu(x),
        }
    }
}

impl std::str::FromStr for ScanAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "t" => Ok(ScanAxis::T),
            "mu" => Ok(ScanAxis::Mu),
            _ => Err(Error::InvalidParams(format!("unknown scan axis '{s}' (expected t or mu)"))),
        }
    }
}

/// `steps` equally spaced values on `[lo, hi]`; a single step gives `lo`.
pub fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    match steps {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..steps)
            .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub x: f64,
    pub report: Result<ComplexityReport>,
}

/// Complexity along a line in the phase diagram. Points are visited in
/// order with the previous order parameter as warm start; failures are
/// recorded per point and the sweep continues.
pub fn sweep(params: &ModelParams, axis: ScanAxis, values: &[f64], kappas: &[f64]) -> Vec<SweepPoint> {
    let mut warm = None;
    values
        .iter()
        .map(|&x| {
            let p = axis.apply(params, x);
            let report = phase_point_complexity_from(&p, kappas, warm);
            if let Ok(r) = &report {
                warm = Some(r.mean_field.phi);
            }
            SweepPoint { x, report }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchRow {
    pub t: f64,
    /// Per requested momentum, per kappa.
    pub per_k: Vec<Vec<f64>>,
}

/// Per-momentum complexity traces `sum_alpha |theta_{k alpha}|^kappa` versus `t`
/// for a fixed list of momenta. With `snap`, momenta move to the nearest grid
/// point; otherwise off-grid momenta are an error.
pub fn momentum_branch_scan(
    params: &ModelParams,
    t_values: &[f64],
    ks: &[Vec<f64>],
    kappas: &[f64],
    snap: bool,
) -> Result<(Vec<Vec<f64>>, Vec<BranchRow>)> {
    validate_kappas(kappas)?;
    let grid = MomentumGrid::new(&params.extents)?;
    let ks: Vec<Vec<f64>> = ks
        .iter()
        .map(|k| {
            let i = if snap { grid.snap(k)? } else { grid.locate(k)? };
            Ok(grid.momentum(i))
        })
        .collect::<Result<_>>()?;
    let mut warm = None;
    let mut rows = Vec::with_capacity(t_values.len());
    for &t in t_values {
        let p = params.with_t(t);
        let mfs = self_consistent_phi_from(&p, warm)?;
        warm = Some(mfs.phi);
        let per_k = ks
            .par_iter()
            .map(|k| {
                let res = diagonalize_block(&build_mode_block(&mfs, &p, k))
                    .map_err(|e| e.with_point(t, p.mu_bar, k))?;
                Ok(mode_complexities(&res, kappas))
            })
            .collect::<Result<_>>()?;
        rows.push(BranchRow { t, per_k });
    }
    Ok((ks, rows))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlavorRow {
    pub x: f64,
    /// Per flavor, per kappa; `None` when the point failed.
    pub per_flavor: Option<Vec<Vec<f64>>>,
}

pub fn flavor_breakdown(points: &[SweepPoint]) -> Vec<FlavorRow> {
    points
        .iter()
        .map(|p| FlavorRow {
            x: p.x,
            per_flavor: p.report.as_ref().ok().map(|r| r.per_flavor.clone()),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::SQRT_2;

    #[test]
    fn mode_sums_arithmetic() {
        let r = BogoliubovResult {
            omegas: vec![1.0, 2.0],
            thetas: vec![0.3, -0.4],
            zero_mode: vec![false, false],
            zero_mode_count: 0,
            g: nalgebra::DMatrix::identity(4, 4),
            shifted: false,
        };
        let s = mode_complexities(&r, &[1.0, 2.0]);
        assert!((s[0] - 0.7).abs() < 1e-15);
        assert!((s[1] - 0.25).abs() < 1e-15);
    }

    #[test]
    fn zero_hopping_has_zero_complexity() {
        let p = ModelParams::cubic(2, 8, 6, 0.0, 0.4).unwrap();
        let r = phase_point_complexity(&p, &DEFAULT_KAPPAS).unwrap();
        assert_eq!(r.totals, vec![0.0, 0.0]);
        assert_eq!(r.zero_point_energy, 0.0);
    }

    #[test]
    fn breakdowns_sum_to_total() {
        let p = ModelParams::cubic(2, 12, 6, 0.2, SQRT_2 - 1.0).unwrap();
        let r = phase_point_complexity(&p, &DEFAULT_KAPPAS).unwrap();
        for j in 0..2 {
            let by_mode: f64 = r.per_mode.iter().map(|v| v[j]).sum();
            let by_flavor: f64 = r.per_flavor.iter().map(|v| v[j]).sum();
            assert!((by_mode - r.totals[j]).abs() <= 1e-9 * r.totals[j]);
            assert!((by_flavor - r.totals[j]).abs() <= 1e-9 * r.totals[j]);
        }
        // the Goldstone mode at k = 0
        assert_eq!(r.zero_modes_dropped, 1);
    }

    #[test]
    fn single_step_sweep_matches_point() {
        let p = ModelParams::cubic(2, 10, 6, 0.12, 0.5).unwrap();
        let s = sweep(&p, ScanAxis::T, &linspace(0.12, 0.3, 1), &DEFAULT_KAPPAS);
        assert_eq!(s.len(), 1);
        let direct = phase_point_complexity(&p, &DEFAULT_KAPPAS).unwrap();
        assert_eq!(s[0].report.as_ref().unwrap(), &direct);
    }

    #[test]
    fn rejects_bad_kappa() {
        let p = ModelParams::cubic(2, 4, 6, 0.1, 0.5).unwrap();
        assert!(phase_point_complexity(&p, &[0.5]).is_err());
        assert!(phase_point_complexity(&p, &[]).is_err());
    }
}
