//! Command-line front end: every subcommand writes one or more CSV tables
//! and a `manifest.json` into the output directory.

pub mod config;
pub mod output;

use std::fs;
use std::path::PathBuf;
use std::time::Instant;

use clap::Parser;
use serde::Serialize;

use crate::complexity::{flavor_breakdown, momentum_branch_scan, phase_point_complexity, sweep, ScanAxis};
use crate::error::Error;
use crate::exact_oracle::{compare_energy, SmallLatticeSpec};
use crate::gaussian_ref::{c_closed_form, c_kappa_quadrature, recursion_residual, GaussianParams};
use crate::holo::{cv_delta, HoloParams};
use crate::lattice::{k_path, MomentumGrid};
use crate::onsite::{locate_tip, self_consistent_phi, ModelParams};
use crate::scaling::{fit_scaling, gap_scan, nu_consistency, spectrum_on_path, FitModel, FitSpec, Side};

pub use config::{Command, ConfigFile, RunConfig};
use output::{kappa_label, num, opt, Manifest, OutputDir, PointStatus, Table};

#[derive(Debug, Parser)]
#[command(
    name = "bh-complexity",
    version,
    about = "Circuit complexity of Bose-Hubbard ground states",
    allow_negative_numbers = true
)]
pub struct Args {
    #[arg(value_enum)]
    pub command: Command,
    /// JSON configuration file (`-` reads standard input).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub workers: Option<usize>,
    /// Comma-separated complexity orders, e.g. `1,2`.
    #[arg(long)]
    pub kappa: Option<String>,
    /// Lattice extents, e.g. `100x100` or `20x20x20`.
    #[arg(long)]
    pub lattice: Option<String>,
    #[arg(long = "n-trunc")]
    pub n_trunc: Option<usize>,
    #[arg(long)]
    pub t: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// `t` or `mu`.
    #[arg(long = "scan-axis")]
    pub scan_axis: Option<String>,
    /// `lo,hi`.
    #[arg(long = "scan-range")]
    pub scan_range: Option<String>,
    #[arg(long = "scan-steps")]
    pub scan_steps: Option<usize>,
    /// One of log1, log2, quad, power32, purepow.
    #[arg(long = "fit-model")]
    pub fit_model: Option<String>,
    /// `delta_min,delta_max`.
    #[arg(long = "fit-window")]
    pub fit_window: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureKind {
    Config,
    Numerical,
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: FailureKind,
    pub message: String,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self.kind {
            FailureKind::Config => 2,
            FailureKind::Numerical => 3,
        }
    }

    fn config(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Config,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        Self {
            kind: if e.is_numerical() {
                FailureKind::Numerical
            } else {
                FailureKind::Config
            },
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::config(format!("i/o: {e}"))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn load_config(args: &Args) -> CliResult<ConfigFile> {
    let mut file = match &args.config {
        None => ConfigFile::default(),
        Some(p) => {
            let text = if p.as_os_str() == "-" {
                std::io::read_to_string(std::io::stdin())?
            } else {
                fs::read_to_string(p).map_err(|e| CliError::config(format!("{}: {e}", p.display())))?
            };
            ConfigFile::from_json(&text)?
        }
    };
    if let Some(s) = &args.lattice {
        file.lattice = Some(config::parse_lattice(s)?);
    }
    if let Some(n) = args.n_trunc {
        file.n_trunc = Some(n);
    }
    if let Some(t) = args.t {
        file.t = Some(t);
    }
    if let Some(mu) = args.mu {
        file.mu = Some(mu);
    }
    if let Some(k) = &args.kappa {
        file.kappa = Some(config::parse_list(k)?);
    }
    if let Some(w) = args.workers {
        file.workers = Some(w);
    }
    if let Some(o) = &args.out {
        file.out = Some(o.clone());
    }
    if let Some(a) = &args.scan_axis {
        file.scan.axis = Some(a.parse()?);
    }
    if let Some(r) = &args.scan_range {
        file.scan.range = Some(config::parse_pair(r)?);
    }
    if let Some(s) = args.scan_steps {
        file.scan.steps = Some(s);
    }
    if let Some(m) = &args.fit_model {
        file.fit.model = Some(m.parse()?);
    }
    if let Some(w) = &args.fit_window {
        file.fit.window = Some(config::parse_pair(w)?);
    }
    Ok(file)
}

/// Parse, execute and write outputs. Returns the manifest on success.
pub fn run(args: &Args) -> CliResult<Manifest> {
    let resolved = load_config(args).and_then(|file| {
        let default_workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1);
        Ok(RunConfig::resolve(args.command, file, default_workers)?)
    });
    match resolved {
        Ok(cfg) => execute(&cfg),
        Err(e) => {
            // best effort: the record is also printed by the binary
            if let Some(dir) = &args.out {
                let _ = fs::create_dir_all(dir)
                    .and_then(|()| fs::write(dir.join("error.json"), serde_json::to_vec_pretty(&e).expect("error serializes")));
            }
            Err(e)
        }
    }
}

/// Run a resolved configuration inside a pool of `cfg.workers` threads.
pub fn execute(cfg: &RunConfig) -> CliResult<Manifest> {
    let started = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::config(format!("thread pool: {e}")))?;
    let mut out = OutputDir::create(&cfg.out)?;
    let config_json = serde_json::to_value(cfg).expect("config serializes");
    let echo = format!(
        "{} {}\n{}",
        env!("CARGO_PKG_NAME"),
        env!("CARGO_PKG_VERSION"),
        serde_json::to_string_pretty(&config_json).expect("config serializes")
    );
    let mut ctx = Context {
        cfg,
        echo,
        points: Vec::new(),
        notes: Vec::new(),
    };
    let result = pool.install(|| dispatch(&mut ctx, &mut out));
    let result = result.and_then(|()| {
        let any_ok = ctx.points.is_empty() || ctx.points.iter().any(|p| p.status == "ok");
        if any_ok {
            Ok(())
        } else {
            Err(CliError {
                kind: FailureKind::Numerical,
                message: "every point failed".into(),
            })
        }
    });
    if let Err(e) = &result {
        let record = serde_json::to_vec_pretty(e).expect("error serializes");
        out.write("error.json", &record)?;
    }
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        command: cfg.command.name(),
        config: config_json,
        workers: cfg.workers,
        wall_time_s: started.elapsed().as_secs_f64(),
        zero_modes_total: ctx.points.iter().filter_map(|p| p.zero_modes).sum(),
        points: ctx.points,
        files: out.files.clone(),
        notes: ctx.notes,
    };
    fs::write(
        out.root().join("manifest.json"),
        serde_json::to_vec_pretty(&manifest).expect("manifest serializes"),
    )?;
    result.map(|()| manifest)
}

struct Context<'a> {
    cfg: &'a RunConfig,
    echo: String,
    points: Vec<PointStatus>,
    notes: Vec<String>,
}

fn dispatch(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    match ctx.cfg.command {
        Command::Meanfield => run_meanfield(ctx, out),
        Command::Spectrum => run_spectrum(ctx, out),
        Command::Sweep => run_sweep(ctx, out),
        Command::Flavors => run_flavors(ctx, out),
        Command::Branches => run_branches(ctx, out),
        Command::Gap => run_gap(ctx, out),
        Command::Fit => run_fit(ctx, out),
        Command::GaussianRef => run_gaussian(ctx, out),
        Command::Holo => run_holo(ctx, out),
        Command::Oracle => run_oracle(ctx, out),
    }
}

fn run_meanfield(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let p = &ctx.cfg.params;
    let mfs = self_consistent_phi(p)?;
    let mut header: Vec<String> = ["t", "mu", "phi", "free_energy", "residual", "alpha", "epsilon"]
        .map(String::from)
        .to_vec();
    header.extend((0..p.n).map(|b| format!("b_dagger_{b}")));
    let mut table = Table::new(header);
    for a in 0..p.n {
        let mut row = vec![
            num(p.t),
            num(p.mu_bar),
            num(mfs.phi),
            num(mfs.free_energy),
            num(mfs.residual()),
            a.to_string(),
            num(mfs.energies[a]),
        ];
        // row alpha of B: <alpha| b^dagger |beta>
        row.extend((0..p.n).map(|b| num(mfs.b_dagger_matrix[(a, b)])));
        table.push(row);
    }
    ctx.points.push(PointStatus::ok(p.t, None));
    out.write_table("meanfield.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_spectrum(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let p = &ctx.cfg.params;
    let grid = MomentumGrid::new(&p.extents)?;
    let path = k_path(ctx.cfg.k_path.as_ref().expect("resolved"), Some(&grid))?;
    let mfs = self_consistent_phi(p)?;
    let spec = spectrum_on_path(p, &mfs, &path)?;
    let mut header = vec!["index".to_string()];
    header.extend((1..=p.d).map(|j| format!("k_{j}")));
    header.extend((1..p.n).map(|a| format!("omega_{a}")));
    let mut table = Table::new(header);
    let two_pi = 2.0 * std::f64::consts::PI;
    for (i, (k, w)) in path.iter().zip(&spec).enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(k.iter().map(|x| num(x / two_pi)));
        row.extend(w.iter().map(|&x| num(x)));
        table.push(row);
    }
    ctx.points.push(PointStatus::ok(p.t, None));
    out.write_table("spectrum.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_sweep(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let scan = cfg.scan.as_ref().expect("resolved");
    let points = sweep(&cfg.params, scan.axis, &scan.values(), &cfg.kappa);
    let mut header: Vec<String> = vec!["x".into(), "t".into(), "mu".into(), "status".into(), "phi".into()];
    header.extend(cfg.kappa.iter().map(|k| format!("c_{}", kappa_label(*k))));
    header.extend(cfg.kappa.iter().map(|k| format!("C_{}", kappa_label(*k))));
    header.extend(["C_QC", "zero_modes", "min_omega"].map(String::from));
    let mut table = Table::new(header);
    for pt in &points {
        let p = scan.axis.apply(&cfg.params, pt.x);
        let mut row = vec![num(pt.x), num(p.t), num(p.mu_bar)];
        match &pt.report {
            Ok(r) => {
                row.push("ok".into());
                row.push(num(r.mean_field.phi));
                row.extend(r.densities.iter().map(|&v| num(v)));
                row.extend(r.totals.iter().map(|&v| num(v)));
                row.push(opt(r.c_qc()));
                row.push(r.zero_modes_dropped.to_string());
                row.push(num(r.min_omega));
                ctx.points.push(PointStatus::ok(pt.x, Some(r.zero_modes_dropped)));
            }
            Err(e) => {
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), 4 + 2 * cfg.kappa.len()));
                ctx.points.push(PointStatus::failed(pt.x, e.to_string()));
            }
        }
        table.push(row);
    }
    out.write_table("sweep.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_flavors(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let scan = cfg.scan.as_ref().expect("resolved");
    let points = sweep(&cfg.params, scan.axis, &scan.values(), &cfg.kappa);
    let n_sites = cfg.params.sites() as f64;
    let mut table = Table::new(["x", "t", "mu", "flavor", "kappa", "C", "c"]);
    for (pt, row) in points.iter().zip(flavor_breakdown(&points)) {
        let p = scan.axis.apply(&cfg.params, pt.x);
        match (&pt.report, row.per_flavor) {
            (Ok(r), Some(per_flavor)) => {
                for (a, vals) in per_flavor.iter().enumerate() {
                    for (k, v) in cfg.kappa.iter().zip(vals) {
                        table.push(vec![
                            num(pt.x),
                            num(p.t),
                            num(p.mu_bar),
                            (a + 1).to_string(),
                            kappa_label(*k),
                            num(*v),
                            num(v / n_sites),
                        ]);
                    }
                }
                ctx.points.push(PointStatus::ok(pt.x, Some(r.zero_modes_dropped)));
            }
            (Err(e), _) => ctx.points.push(PointStatus::failed(pt.x, e.to_string())),
            (Ok(_), None) => unreachable!("breakdown mirrors the sweep"),
        }
    }
    out.write_table("flavors.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_branches(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let scan = cfg.scan.as_ref().expect("resolved");
    let br = cfg.branches.as_ref().expect("resolved");
    let (ks, rows) = momentum_branch_scan(&cfg.params, &scan.values(), &br.k, &cfg.kappa, br.snap)?;
    let d = cfg.params.d;
    let mut header = vec!["t".to_string()];
    header.extend((1..=d).map(|j| format!("k_{j}")));
    header.extend(["kappa", "value"].map(String::from));
    let mut table = Table::new(header);
    let two_pi = 2.0 * std::f64::consts::PI;
    for r in &rows {
        for (k, vals) in ks.iter().zip(&r.per_k) {
            for (kp, v) in cfg.kappa.iter().zip(vals) {
                let mut row = vec![num(r.t)];
                row.extend(k.iter().map(|x| num(x / two_pi)));
                row.push(kappa_label(*kp));
                row.push(num(*v));
                table.push(row);
            }
        }
        ctx.points.push(PointStatus::ok(r.t, None));
    }
    out.write_table("branches.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_gap(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let scan = cfg.scan.as_ref().expect("resolved");
    let pts = gap_scan(&cfg.params, scan.axis, &scan.values());
    let mut header: Vec<String> = ["x", "t", "mu", "status", "min_omega", "zero_modes"]
        .map(String::from)
        .to_vec();
    header.extend((1..cfg.params.n).map(|a| format!("omega_k0_{a}")));
    let mut table = Table::new(header);
    for g in &pts {
        let p = scan.axis.apply(&cfg.params, g.x);
        let mut row = vec![num(g.x), num(p.t), num(p.mu_bar)];
        match &g.error {
            None => {
                row.push("ok".into());
                row.push(opt(g.min_omega));
                row.push(g.zero_modes.to_string());
                row.extend(g.gamma_omegas.iter().map(|&w| num(w)));
                ctx.points.push(PointStatus::ok(g.x, Some(g.zero_modes)));
            }
            Some(e) => {
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), 2 + cfg.params.n - 1));
                ctx.points.push(PointStatus::failed(g.x, e.clone()));
            }
        }
        table.push(row);
    }
    out.write_table("gap.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_fit(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let fit = cfg.fit.as_ref().expect("resolved");
    let tip = locate_tip(&cfg.params, fit.lobe)?;
    let at_tip = cfg.params.with_t(tip.t_c).with_mu(tip.mu_c);
    let crit_report = phase_point_complexity(&at_tip, &cfg.kappa)?;
    let critical_value = match fit.axis {
        ScanAxis::T => tip.t_c,
        ScanAxis::Mu => tip.mu_c,
    };
    // shrink slightly so rounding in x -> delta keeps every point inside
    let (lo, hi) = (fit.window[0] * (1.0 + 1e-9), fit.window[1] * (1.0 - 1e-9));
    let deltas: Vec<f64> = crate::complexity::linspace(lo.ln(), hi.ln(), fit.steps)
        .into_iter()
        .map(f64::exp)
        .collect();

    let mut scan_header: Vec<String> = ["side", "delta", "t", "mu", "status"].map(String::from).to_vec();
    scan_header.extend(cfg.kappa.iter().map(|k| format!("c_{}", kappa_label(*k))));
    let mut scan_table = Table::new(scan_header);
    let mut fit_table = Table::new([
        "kappa", "side", "model", "coef_1", "coef_2", "stderr_1", "stderr_2", "log10_coef_1", "rms", "points",
        "window_lo", "window_hi", "t_c", "mu_c", "c_crit",
    ]);

    for side in [Side::Below, Side::Above] {
        let xs: Vec<f64> = deltas
            .iter()
            .map(|d| match side {
                Side::Below => critical_value - d,
                Side::Above => critical_value + d,
            })
            .collect();
        let mut base = at_tip.clone();
        // scan the axis, hold the other coordinate at the tip
        if fit.axis == ScanAxis::T {
            base.mu_bar = tip.mu_c;
        } else {
            base.t = tip.t_c;
        }
        let points = sweep(&base, fit.axis, &xs, &cfg.kappa);
        let side_name = match side {
            Side::Below => "below",
            Side::Above => "above",
        };
        let mut cs: Vec<Vec<f64>> = vec![Vec::new(); cfg.kappa.len()];
        let mut ok_x = Vec::new();
        for (d, pt) in deltas.iter().zip(&points) {
            let p = fit.axis.apply(&base, pt.x);
            let mut row = vec![side_name.to_string(), num(*d), num(p.t), num(p.mu_bar)];
            match &pt.report {
                Ok(r) => {
                    row.push("ok".into());
                    row.extend(r.densities.iter().map(|&v| num(v)));
                    for (j, v) in r.densities.iter().enumerate() {
                        cs[j].push(*v);
                    }
                    ok_x.push(pt.x);
                    ctx.points.push(PointStatus::ok(pt.x, Some(r.zero_modes_dropped)));
                }
                Err(e) => {
                    row.push("failed".into());
                    row.extend(std::iter::repeat_n(String::new(), cfg.kappa.len()));
                    ctx.points.push(PointStatus::failed(pt.x, e.to_string()));
                }
            }
            scan_table.push(row);
        }
        for (j, kp) in cfg.kappa.iter().enumerate() {
            let spec = FitSpec {
                model: fit.model,
                side,
                window: (fit.window[0], fit.window[1]),
                critical_value,
            };
            let c_crit = crit_report.densities[j];
            let r = fit_scaling(&ok_x, &cs[j], c_crit, &spec)?;
            let coef = |i: usize| r.coefficients.get(i).copied();
            let se = |i: usize| r.std_errors.get(i).copied();
            fit_table.push(vec![
                kappa_label(*kp),
                side_name.into(),
                fit.model.name().into(),
                opt(coef(0)),
                opt(coef(1)),
                opt(se(0)),
                opt(se(1)),
                opt(r.log10_coefficients.as_ref().map(|c| c[0])),
                num(r.rms),
                r.points.to_string(),
                num(fit.window[0]),
                num(fit.window[1]),
                num(tip.t_c),
                num(tip.mu_c),
                num(c_crit),
            ]);
            if fit.model == FitModel::Purepow {
                let nc = nu_consistency(&r, cfg.params.d)?;
                ctx.notes.push(format!(
                    "kappa {kp} {side_name}: fitted power {:.4} vs gaussian nu*d = {}",
                    nc.p_hat, nc.gaussian
                ));
            }
        }
    }
    out.write_table("fit_scan.csv", &scan_table, &ctx.echo)?;
    out.write_table("fit.csv", &fit_table, &ctx.echo)?;
    Ok(())
}

fn run_gaussian(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let g = cfg.gaussian.as_ref().expect("resolved");
    let scan = cfg.scan.as_ref().expect("resolved");
    let mut table = Table::new([
        "m", "omega0", "d", "kappa", "closed_form", "truncated_at", "quadrature", "recursion_rel",
    ]);
    for m in scan.values() {
        for &kp in &cfg.kappa {
            let gp = GaussianParams::new(m, g.omega0, g.d, kp)?;
            let cf = c_closed_form(&gp).ok();
            let quad = c_kappa_quadrature(&gp)?;
            let rec = if kp >= 2.0 { Some(recursion_residual(&gp)?.relative) } else { None };
            table.push(vec![
                num(m),
                num(g.omega0),
                g.d.to_string(),
                kappa_label(kp),
                opt(cf.map(|c| c.value)),
                cf.and_then(|c| c.truncated_at).map(|o| o.to_string()).unwrap_or_default(),
                num(quad),
                opt(rec),
            ]);
        }
        ctx.points.push(PointStatus::ok(m, None));
    }
    out.write_table("gaussian_ref.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_holo(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let h = cfg.holo.as_ref().expect("resolved");
    let scan = cfg.scan.as_ref().expect("resolved");
    let mut table = Table::new(["delta_t", "xi", "delta_cv", "exponent"]);
    for dt in scan.values() {
        let r = cv_delta(&HoloParams {
            d: h.d,
            l: h.l,
            g_n: h.g_n,
            sigma_d: h.sigma_d,
            xi: f64::NAN,
            nu: h.nu,
            delta_t: Some(dt),
        })?;
        table.push(vec![num(dt), num(r.xi), num(r.delta_cv), opt(r.exponent)]);
        ctx.points.push(PointStatus::ok(dt, None));
    }
    out.write_table("holo.csv", &table, &ctx.echo)?;
    Ok(())
}

fn run_oracle(ctx: &mut Context, out: &mut OutputDir) -> CliResult<()> {
    let cfg = ctx.cfg;
    let o = cfg.oracle.as_ref().expect("resolved");
    let scan = cfg.scan.as_ref().expect("resolved");
    let mut table = Table::new([
        "t", "mu", "status", "exact", "mean_field", "quadratic", "mean_field_rel_error", "quadratic_rel_error",
    ]);
    for t in scan.values() {
        let spec = SmallLatticeSpec {
            geometry: o.geometry,
            n: o.n,
            t,
            mu_bar: cfg.params.mu_bar,
        };
        let mut row = vec![num(t), num(cfg.params.mu_bar)];
        match compare_energy(&spec) {
            Ok(c) => {
                row.push("ok".into());
                row.extend([c.exact, c.mean_field, c.quadratic, c.mean_field_rel_error, c.quadratic_rel_error].map(num));
                ctx.points.push(PointStatus::ok(t, None));
            }
            Err(e) if e.is_numerical() => {
                row.push("failed".into());
                row.extend(std::iter::repeat_n(String::new(), 5));
                ctx.points.push(PointStatus::failed(t, e.to_string()));
            }
            Err(e) => return Err(e.into()),
        }
        table.push(row);
    }
    out.write_table("oracle.csv", &table, &ctx.echo)?;
    Ok(())
}

/// Echo of a model point, for callers embedding the CLI.
pub fn describe(params: &ModelParams) -> String {
    format!(
        "d={} lattice={:?} n={} t={} mu={}",
        params.d, params.extents, params.n, params.t, params.mu_bar
    )
}
