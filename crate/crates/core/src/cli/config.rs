//! Run configuration: a JSON document whose keys mirror the command-line
//! flags. Flags override the document; everything is validated before any
//! computation starts.

use std::f64::consts::SQRT_2;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::complexity::{ScanAxis, DEFAULT_KAPPAS};
use crate::error::{Error, Result};
use crate::exact_oracle::Geometry;
use crate::lattice::KPathSpec;
use crate::onsite::{ModelParams, DEFAULT_TRUNCATION};
use crate::scaling::FitModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Meanfield,
    Spectrum,
    Sweep,
    Branches,
    Flavors,
    Gap,
    Fit,
    GaussianRef,
    Holo,
    Oracle,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Meanfield => "meanfield",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::Branches => "branches",
            Command::Flavors => "flavors",
            Command::Gap => "gap",
            Command::Fit => "fit",
            Command::GaussianRef => "gaussian-ref",
            Command::Holo => "holo",
            Command::Oracle => "oracle",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub axis: Option<ScanAxis>,
    pub range: Option<[f64; 2]>,
    pub steps: Option<usize>,
    pub spacing: Option<Spacing>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub model: Option<FitModel>,
    pub window: Option<[f64; 2]>,
    /// Mott lobe whose tip is the critical point.
    pub lobe: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BranchSection {
    pub k: Option<Vec<Vec<f64>>>,
    pub snap: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSection {
    pub d: Option<usize>,
    pub omega0: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HoloSection {
    pub d: Option<usize>,
    pub l: Option<f64>,
    pub g_n: Option<f64>,
    pub sigma_d: Option<f64>,
    pub nu: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleSection {
    pub geometry: Option<Geometry>,
    pub n: Option<usize>,
}

/// Configuration document as read from JSON; every key is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<Command>,
    pub lattice: Option<Vec<usize>>,
    pub n_trunc: Option<usize>,
    pub t: Option<f64>,
    pub mu: Option<f64>,
    pub kappa: Option<Vec<f64>>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub fit: FitSection,
    pub k_path: Option<KPathSpec>,
    #[serde(default)]
    pub branches: BranchSection,
    #[serde(default)]
    pub gaussian: GaussianSection,
    #[serde(default)]
    pub holo: HoloSection,
    #[serde(default)]
    pub oracle: OracleSection,
}

impl ConfigFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidParams(format!("config: {e}")))
    }
}

/// Parse `100x100` (or `20x20x20`).
pub fn parse_lattice(s: &str) -> Result<Vec<usize>> {
    s.split(['x', 'X'])
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .map_err(|_| Error::InvalidParams(format!("bad lattice '{s}' (expected e.g. 100x100)")))
        })
        .collect()
}

/// Parse a comma-separated list of numbers.
pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParams(format!("bad number '{p}' in '{s}'")))
        })
        .collect()
}

pub fn parse_pair(s: &str) -> Result<[f64; 2]> {
    match parse_list(s)?.as_slice() {
        &[a, b] => Ok([a, b]),
        _ => Err(Error::InvalidParams(format!("expected two comma-separated numbers, got '{s}'"))),
    }
}

/// Fully resolved configuration. This is what the run echoes; the worker
/// count and output directory are execution details kept out of the echo
/// so outputs do not depend on them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Command,
    pub params: ModelParams,
    pub kappa: Vec<f64>,
    pub scan: Option<ResolvedScan>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ResolvedFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_path: Option<KPathSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub branches: Option<ResolvedBranches>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gaussian: Option<ResolvedGaussian>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub holo: Option<ResolvedHolo>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<ResolvedOracle>,
    #[serde(skip)]
    pub workers: usize,
    #[serde(skip)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedScan {
    pub axis: ScanAxis,
    pub range: [f64; 2],
    pub steps: usize,
    pub spacing: Spacing,
}

impl ResolvedScan {
    pub fn values(&self) -> Vec<f64> {
        let [lo, hi] = self.range;
        match self.spacing {
            Spacing::Linear => crate::complexity::linspace(lo, hi, self.steps),
            Spacing::Log => crate::complexity::linspace(lo.ln(), hi.ln(), self.steps)
                .into_iter()
                .map(f64::exp)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedFit {
    pub model: FitModel,
    pub axis: ScanAxis,
    pub window: [f64; 2],
    /// Points per side, log-spaced across the window.
    pub steps: usize,
    pub lobe: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedBranches {
    pub k: Vec<Vec<f64>>,
    pub snap: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedGaussian {
    pub d: usize,
    pub omega0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedHolo {
    pub d: usize,
    pub l: f64,
    pub g_n: f64,
    pub sigma_d: f64,
    pub nu: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolvedOracle {
    pub geometry: Geometry,
    pub n: usize,
}

fn default_branch_momenta() -> Vec<Vec<f64>> {
    use std::f64::consts::PI;
    [PI / 2.0, PI / 5.0, PI / 10.0, 3.0 * PI / 50.0, PI / 25.0, PI / 50.0]
        .iter()
        .map(|&k| vec![0.0, k])
        .collect()
}

fn require_range(r: [f64; 2], what: &str) -> Result<()> {
    if !(r[0].is_finite() && r[1].is_finite()) {
        return Err(Error::InvalidParams(format!("{what} range must be finite")));
    }
    Ok(())
}

impl RunConfig {
    /// Merge a (possibly empty) document with command-line overrides.
    pub fn resolve(command: Command, file: ConfigFile, default_workers: usize) -> Result<Self> {
        if let Some(c) = file.command {
            if c != command {
                return Err(Error::InvalidParams(format!(
                    "config is for '{}' but '{}' was requested",
                    c.name(),
                    command.name()
                )));
            }
        }
        let extents = file.lattice.clone().unwrap_or_else(|| vec![100, 100]);
        let params = ModelParams::new(
            extents.len(),
            extents,
            file.n_trunc.unwrap_or(DEFAULT_TRUNCATION),
            file.t.unwrap_or(0.2),
            file.mu.unwrap_or(SQRT_2 - 1.0),
        )?;
        let kappa = file.kappa.clone().unwrap_or_else(|| DEFAULT_KAPPAS.to_vec());
        if kappa.is_empty() || kappa.iter().any(|&k| !(k >= 1.0 && k.is_finite())) {
            return Err(Error::InvalidParams(format!("kappa values must be >= 1, got {kappa:?}")));
        }
        let workers = file.workers.unwrap_or(default_workers);
        if workers == 0 {
            return Err(Error::InvalidParams("workers must be >= 1".into()));
        }

        let scan_with = |axis: ScanAxis, range: [f64; 2], steps: usize| -> Result<ResolvedScan> {
            let s = ResolvedScan {
                axis: file.scan.axis.unwrap_or(axis),
                range: file.scan.range.unwrap_or(range),
                steps: file.scan.steps.unwrap_or(steps),
                spacing: file.scan.spacing.unwrap_or_default(),
            };
            require_range(s.range, "scan")?;
            if s.steps == 0 {
                return Err(Error::InvalidParams("scan steps must be >= 1".into()));
            }
            if s.spacing == Spacing::Log && !(s.range[0] > 0.0 && s.range[1] > 0.0) {
                return Err(Error::InvalidParams("log spacing needs a positive range".into()));
            }
            Ok(s)
        };

        let mut cfg = RunConfig {
            command,
            params,
            kappa,
            scan: None,
            fit: None,
            k_path: None,
            branches: None,
            gaussian: None,
            holo: None,
            oracle: None,
            workers,
            out: file.out.clone().unwrap_or_else(|| PathBuf::from("out")),
        };
        match command {
            Command::Meanfield => {}
            Command::Spectrum => {
                let d = cfg.params.d;
                let mut end = vec![0.0; d];
                end[d - 1] = std::f64::consts::PI;
                cfg.k_path = Some(file.k_path.clone().unwrap_or(KPathSpec {
                    endpoints: vec![vec![0.0; d], end],
                    samples_per_segment: cfg.params.extents[d - 1],
                    closed: true,
                }));
            }
            Command::Sweep | Command::Flavors | Command::Gap => {
                cfg.scan = Some(scan_with(ScanAxis::T, [0.05, 0.30], 51)?);
            }
            Command::Branches => {
                let s = scan_with(ScanAxis::T, [0.05, 0.30], 51)?;
                if s.axis != ScanAxis::T {
                    return Err(Error::InvalidParams("branch scans run along t".into()));
                }
                cfg.scan = Some(s);
                let k = file.branches.k.clone().unwrap_or_else(default_branch_momenta);
                if k.iter().any(|k| k.len() != cfg.params.d) {
                    return Err(Error::InvalidParams("branch momenta must match the lattice dimension".into()));
                }
                cfg.branches = Some(ResolvedBranches {
                    k,
                    snap: file.branches.snap.unwrap_or(true),
                });
            }
            Command::Fit => {
                let default_model = if cfg.params.d == 3 { FitModel::Power32 } else { FitModel::Log1 };
                let model = file.fit.model.unwrap_or(default_model);
                let default_axis = if model == FitModel::Quad { ScanAxis::Mu } else { ScanAxis::T };
                let window = file.fit.window.unwrap_or([2e-3, 2e-2]);
                if !(window[0] > 0.0 && window[0] < window[1]) {
                    return Err(Error::InvalidParams(format!("bad fit window {window:?}")));
                }
                let steps = file.scan.steps.unwrap_or(16);
                if steps < 5 {
                    return Err(Error::InvalidParams("fits need at least 5 points per side".into()));
                }
                cfg.fit = Some(ResolvedFit {
                    model,
                    axis: file.scan.axis.unwrap_or(default_axis),
                    window,
                    steps,
                    lobe: file.fit.lobe.unwrap_or(1),
                });
            }
            Command::GaussianRef => {
                cfg.scan = Some(scan_with(ScanAxis::T, [0.0, 0.5], 11)?);
                let g = ResolvedGaussian {
                    d: file.gaussian.d.unwrap_or(cfg.params.d),
                    omega0: file.gaussian.omega0.unwrap_or(1.0),
                };
                if g.d == 0 || !(g.omega0 > 0.0) {
                    return Err(Error::InvalidParams("gaussian reference needs d >= 1 and omega0 > 0".into()));
                }
                cfg.gaussian = Some(g);
            }
            Command::Holo => {
                let mut s = scan_with(ScanAxis::T, [1e-3, 1e-1], 9)?;
                if file.scan.spacing.is_none() {
                    s.spacing = Spacing::Log;
                }
                cfg.scan = Some(s);
                cfg.holo = Some(ResolvedHolo {
                    d: file.holo.d.unwrap_or(cfg.params.d),
                    l: file.holo.l.unwrap_or(1.0),
                    g_n: file.holo.g_n.unwrap_or(1.0),
                    sigma_d: file.holo.sigma_d.unwrap_or(1.0),
                    nu: file.holo.nu.unwrap_or(0.5),
                });
            }
            Command::Oracle => {
                cfg.scan = Some(scan_with(ScanAxis::T, [0.0, 0.02], 5)?);
                cfg.oracle = Some(ResolvedOracle {
                    geometry: file.oracle.geometry.unwrap_or(Geometry::Chain(2)),
                    n: file.oracle.n.or(file.n_trunc).unwrap_or(3),
                });
            }
        }
        Ok(cfg)
    }
}
