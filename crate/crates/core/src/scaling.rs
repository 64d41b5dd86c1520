//! Spectra along momentum cuts, gap scans, dispersion exponents and the
//! near-critical least-squares fits of complexity densities.

use std::f64::consts::{LN_10, PI};

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bogoliubov::diagonalize_block;
use crate::complexity::{phase_point_complexity_from, ScanAxis};
use crate::error::{Error, Result};
use crate::onsite::{self_consistent_phi, MeanFieldSolution, ModelParams};
use crate::quadratic::build_mode_block;

/// A flavor whose frequency at `k = 0` is below this counts as gapless.
pub const GAPLESS_TOL: f64 = 1e-3;

/// Frequencies at each momentum of a path, ascending per momentum.
pub fn spectrum_on_path(params: &ModelParams, mfs: &MeanFieldSolution, path: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    path.par_iter()
        .map(|k| {
            diagonalize_block(&build_mode_block(mfs, params, k))
                .map(|r| r.omegas)
                .map_err(|e| e.with_point(params.t, params.mu_bar, k))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub x: f64,
    /// Smallest non-zero-mode frequency over the grid and all flavors.
    pub min_omega: Option<f64>,
    /// Frequencies at `k = 0`.
    pub gamma_omegas: Vec<f64>,
    pub zero_modes: usize,
    pub error: Option<String>,
}

pub fn gap_scan(params: &ModelParams, axis: ScanAxis, values: &[f64]) -> Vec<GapPoint> {
    let mut warm = None;
    values
        .iter()
        .map(|&x| match phase_point_complexity_from(&axis.apply(params, x), &[1.0], warm) {
            Ok(r) => {
                warm = Some(r.mean_field.phi);
                GapPoint {
                    x,
                    min_omega: r.min_omega.is_finite().then_some(r.min_omega),
                    gamma_omegas: r.gamma_omegas,
                    zero_modes: r.zero_modes_dropped,
                    error: None,
                }
            }
            Err(e) => GapPoint {
                x,
                min_omega: None,
                gamma_omegas: Vec::new(),
                zero_modes: 0,
                error: Some(e.to_string()),
            },
        })
        .collect()
}

/// Least-squares `y = A x^p` in log-log form; returns `(A, p)`.
pub fn power_law_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Fit("power law needs at least two points".into()));
    }
    if x.iter().chain(y).any(|&v| !(v > 0.0)) {
        return Err(Error::Fit("power law needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let basis = DMatrix::from_fn(lx.len(), 2, |i, j| if j == 0 { 1.0 } else { lx[i] });
    let sol = least_squares(&basis, &DVector::from_vec(ly))?;
    Ok((sol.coefficients[0].exp(), sol.coefficients[1]))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DispersionFit {
    pub flavor: usize,
    /// `omega(k) - omega(0) ~ c k^z`.
    pub z: f64,
    pub prefactor: f64,
    pub gap: f64,
    pub gapless: bool,
    pub k_max: f64,
}

/// Dispersion exponent of `flavor` (0 = lowest) from the first `points`
/// nonzero grid momenta on the cut with all components but the last zero.
pub fn dispersion_exponent(params: &ModelParams, mfs: &MeanFieldSolution, flavor: usize, points: usize) -> Result<DispersionFit> {
    if points < 4 {
        return Err(Error::Fit("dispersion fit needs at least 4 momenta".into()));
    }
    if flavor >= params.n - 1 {
        return Err(Error::InvalidParams(format!("flavor {flavor} out of range")));
    }
    let l = *params.extents.last().expect("validated");
    if points > l / 2 {
        return Err(Error::Fit(format!("cut of length {l} has fewer than {points} momenta")));
    }
    let path: Vec<Vec<f64>> = (0..=points)
        .map(|m| {
            let mut k = vec![0.0; params.d];
            k[params.d - 1] = 2.0 * PI * m as f64 / l as f64;
            k
        })
        .collect();
    let spec = spectrum_on_path(params, mfs, &path)?;
    let gap = spec[0][flavor];
    let ks: Vec<f64> = path[1..].iter().map(|k| k[params.d - 1]).collect();
    let dw: Vec<f64> = spec[1..].iter().map(|w| w[flavor] - gap).collect();
    let (prefactor, z) = power_law_fit(&ks, &dw)?;
    Ok(DispersionFit {
        flavor,
        z,
        prefactor,
        gap,
        gapless: gap < GAPLESS_TOL,
        k_max: ks[ks.len() - 1],
    })
}

/// Convenience: solve the mean field and fit the given flavor.
pub fn dispersion_exponent_at(params: &ModelParams, flavor: usize, points: usize) -> Result<DispersionFit> {
    let mfs = self_consistent_phi(params)?;
    dispersion_exponent(params, &mfs, flavor, points)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitModel {
    /// `upsilon |d| ln(1/|d|)`
    Log1,
    /// `upsilon |d| ln^2 |d|`
    Log2,
    /// `D d^2`
    Quad,
    /// `a |d| + b |d|^(3/2)`
    Power32,
    /// `A |d|^p`, fitted in log-log form
    Purepow,
}

impl FitModel {
    pub fn name(self) -> &'static str {
        match self {
            FitModel::Log1 => "log1",
            FitModel::Log2 => "log2",
            FitModel::Quad => "quad",
            FitModel::Power32 => "power32",
            FitModel::Purepow => "purepow",
        }
    }

    pub fn coefficient_names(self) -> &'static [&'static str] {
        match self {
            FitModel::Log1 | FitModel::Log2 => &["upsilon"],
            FitModel::Quad => &["D"],
            FitModel::Power32 => &["a", "b"],
            FitModel::Purepow => &["A", "p"],
        }
    }

    fn basis(self, d: f64) -> Vec<f64> {
        match self {
            FitModel::Log1 => vec![d * (1.0 / d).ln()],
            FitModel::Log2 => vec![d * d.ln() * d.ln()],
            FitModel::Quad => vec![d * d],
            FitModel::Power32 => vec![d, d * d.sqrt()],
            FitModel::Purepow => unreachable!("fitted in log space"),
        }
    }

    /// Factor turning a natural-log coefficient into its base-10 counterpart.
    pub fn log10_factor(self) -> Option<f64> {
        match self {
            FitModel::Log1 => Some(LN_10),
            FitModel::Log2 => Some(LN_10 * LN_10),
            _ => None,
        }
    }
}

impl std::str::FromStr for FitModel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "log1" => Ok(FitModel::Log1),
            "log2" => Ok(FitModel::Log2),
            "quad" => Ok(FitModel::Quad),
            "power32" => Ok(FitModel::Power32),
            "purepow" => Ok(FitModel::Purepow),
            _ => Err(Error::InvalidParams(format!("unknown fit model '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// Scan values below the critical value.
    Below,
    Above,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitSpec {
    pub model: FitModel,
    pub side: Side,
    /// `[delta_min, delta_max]` in `|x - x_c|`.
    pub window: (f64, f64),
    pub critical_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub side: Side,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// RMS residual in the units of `delta c` (log units for `purepow`).
    pub rms: f64,
    pub window: (f64, f64),
    pub points: usize,
    /// Coefficients converted to base-10 logarithms, for the log models.
    pub log10_coefficients: Option<Vec<f64>>,
}

struct Lsq {
    coefficients: Vec<f64>,
    std_errors: Vec<f64>,
    rms: f64,
}

fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<Lsq> {
    let (n, p) = x.shape();
    if n < p {
        return Err(Error::Fit(format!("{n} points for {p} coefficients")));
    }
    // column scaling keeps the normal matrix well conditioned
    let scale: Vec<f64> = (0..p).map(|j| x.column(j).norm().max(f64::MIN_POSITIVE)).collect();
    let xs = DMatrix::from_fn(n, p, |i, j| x[(i, j)] / scale[j]);
    let normal = xs.transpose() * &xs;
    let eig = normal.clone().symmetric_eigen();
    let (lo, hi) = (eig.eigenvalues.min(), eig.eigenvalues.max());
    if !(lo > 1e-13 * hi) {
        return Err(Error::Fit("collinear basis functions in window".into()));
    }
    let chol = normal.cholesky().ok_or_else(|| Error::Fit("singular normal equations".into()))?;
    let beta = chol.solve(&(xs.transpose() * y));
    let resid = y - &xs * &beta;
    let ss = resid.norm_squared();
    let rms = (ss / n as f64).sqrt();
    let sigma2 = if n > p { ss / (n - p) as f64 } else { 0.0 };
    let cov = chol.inverse();
    Ok(Lsq {
        coefficients: (0..p).map(|j| beta[j] / scale[j]).collect(),
        std_errors: (0..p).map(|j| (sigma2 * cov[(j, j)]).sqrt() / scale[j]).collect(),
        rms,
    })
}

/// Fit `delta c = c_crit - c(x)` against `delta = |x - x_c|` on one side of
/// the critical value. At least five points must fall in the window.
pub fn fit_scaling(xs: &[f64], cs: &[f64], c_crit: f64, spec: &FitSpec) -> Result<FitResult> {
    let (lo, hi) = spec.window;
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidParams(format!("bad fit window [{lo}, {hi}]")));
    }
    if xs.len() != cs.len() {
        return Err(Error::InvalidParams("x and c lengths differ".into()));
    }
    let mut deltas = Vec::new();
    let mut dcs = Vec::new();
    for (&x, &c) in xs.iter().zip(cs) {
        let delta = match spec.side {
            Side::Below => spec.critical_value - x,
            Side::Above => x - spec.critical_value,
        };
        if delta >= lo && delta <= hi {
            deltas.push(delta);
            dcs.push(c_crit - c);
        }
    }
    if deltas.len() < 5 {
        return Err(Error::Fit(format!("only {} points in window [{lo}, {hi}]", deltas.len())));
    }
    let fit = if spec.model == FitModel::Purepow {
        if dcs.iter().any(|&v| !(v > 0.0)) {
            return Err(Error::Fit("pure power fit needs positive delta c".into()));
        }
        let basis = DMatrix::from_fn(deltas.len(), 2, |i, j| if j == 0 { 1.0 } else { deltas[i].ln() });
        let y = DVector::from_iterator(dcs.len(), dcs.iter().map(|v| v.ln()));
        let mut f = least_squares(&basis, &y)?;
        f.coefficients[0] = f.coefficients[0].exp();
        f.std_errors[0] *= f.coefficients[0];
        f
    } else {
        let rows: Vec<Vec<f64>> = deltas.iter().map(|&d| spec.model.basis(d)).collect();
        let basis = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
        least_squares(&basis, &DVector::from_vec(dcs))?
    };
    Ok(FitResult {
        model: spec.model,
        side: spec.side,
        log10_coefficients: spec
            .model
            .log10_factor()
            .map(|f| fit.coefficients.iter().map(|c| c * f).collect()),
        coefficients: fit.coefficients,
        std_errors: fit.std_errors,
        rms: fit.rms,
        window: spec.window,
        points: deltas.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuConsistency {
    pub p_hat: f64,
    /// `nu d` with the gaussian `nu = 1/2`.
    pub gaussian: f64,
    pub deviation: f64,
}

pub fn nu_consistency(fit: &FitResult, d: usize) -> Result<NuConsistency> {
    if fit.model != FitModel::Purepow {
        return Err(Error::InvalidParams("nu consistency needs a pure power fit".into()));
    }
    let gaussian = 0.5 * d as f64;
    Ok(NuConsistency {
        p_hat: fit.coefficients[1],
        gaussian,
        deviation: fit.coefficients[1] - gaussian,
    })
}
