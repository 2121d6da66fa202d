//! Batch command-line front end.
//!
//! Each command validates its configuration, runs one computation, and writes
//! a data file (CSV or JSON) plus a sidecar `<output>.meta.json` holding the
//! resolved configuration, library version and a timestamp. Data files embed
//! the configuration without the timestamp, so identical runs give identical
//! bytes.

use crate::error::{domain, Error, Result};
use crate::gaussfield::{
    build_cov, domination_check, factorize, fit_persistence_exponent, hemispheric_split,
    ks_distance_uniform, occupation_samples, persistence_curve, sample_fields,
    slepian_product_check, CovMatrix, Hurst,
};
use crate::polybasis::{format_real, BasisSpec};
use crate::rkhs::{norm_bound_sq, KernelSeries, RkhsShiftSpec};
use crate::singular_coeffs::{
    closed_form_series, fit_decay, fit_decay_with, kernel_endpoint_expansion, kernel_fn,
    predict_decay, EndpointExpansion, ParityFilter,
};
use crate::sphere_geom::{
    geodesic, make_grid, north_pole, project_ae, sample_half_sphere, GridKind, SphereGrid,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Coeffs,
    Decay,
    KernelCheck,
    RkhsBound,
    GeometryFuzz,
    Simulate,
    Persistence,
    Occupation,
    Slepian,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Coeffs => "coeffs",
            Command::Decay => "decay",
            Command::KernelCheck => "kernel-check",
            Command::RkhsBound => "rkhs-bound",
            Command::GeometryFuzz => "geometry-fuzz",
            Command::Simulate => "simulate",
            Command::Persistence => "persistence",
            Command::Occupation => "occupation",
            Command::Slepian => "slepian",
        }
    }

    pub fn is_stochastic(self) -> bool {
        matches!(
            self,
            Command::GeometryFuzz
                | Command::Simulate
                | Command::Persistence
                | Command::Occupation
                | Command::Slepian
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Flags shared by every command.
#[derive(Debug, Clone, Default, Args)]
pub struct Opts {
    /// Ambient dimension d (the sphere is S_{d-1} ⊂ R^d)
    #[arg(long)]
    pub d: Option<u32>,
    /// Hurst index, 0 < H <= 1/2
    #[arg(long)]
    pub hurst: Option<f64>,
    /// Shift exponent α in (0, 1/2)
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Cap radius δ in (0, 1]
    #[arg(long)]
    pub delta: Option<f64>,
    /// Exponent γ of (1-t)^γ
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Lowest index of a decay fit
    #[arg(long)]
    pub n_min: Option<usize>,
    /// Highest series index / truncation
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Parity filter for decay fits: all, odd, even
    #[arg(long)]
    pub parity: Option<String>,
    /// Number of abscissae for kernel-check
    #[arg(long)]
    pub points: Option<usize>,
    /// Grid as kind:size, kind one of equiangular, fibonacci, random
    #[arg(long)]
    pub grid: Option<String>,
    /// Comma-separated ascending levels ε
    #[arg(long, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Monte Carlo sample count
    #[arg(long)]
    pub samples: Option<usize>,
    /// Master seed (required by stochastic commands)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Data file; stdout when absent
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with any of the above fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for Monte Carlo commands
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum CliCommand {
    /// Closed-form Legendre coefficients of (1-t)^γ
    Coeffs(Opts),
    /// Predicted and fitted coefficient decay for (1-t)^γ or the kernel
    Decay(Opts),
    /// Truncated kernel series against the kernel on [-1, 1]
    KernelCheck(Opts),
    /// Upper bound on the squared RKHS norm of the shift function
    RkhsBound(Opts),
    /// Randomized checks of the azimuthal projection and covariance domination
    GeometryFuzz(Opts),
    /// Field samples on a grid
    Simulate(Opts),
    /// Persistence probabilities and exponent fits
    Persistence(Opts),
    /// Occupation fractions below zero and their distance to U[0,1]
    Occupation(Opts),
    /// Positive-correlation check on a hemispheric split
    Slepian(Opts),
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "sfbm",
    version,
    about = "Legendre series and Monte Carlo tools for spherical fractional Brownian motion"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hurst: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_min: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parity: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),*) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Config file (if any) overlaid with explicit flags.
    pub fn from_cli(cli: &Cli) -> Result<Self> {
        let (command, opts) = match &cli.command {
            CliCommand::Coeffs(o) => (Command::Coeffs, o),
            CliCommand::Decay(o) => (Command::Decay, o),
            CliCommand::KernelCheck(o) => (Command::KernelCheck, o),
            CliCommand::RkhsBound(o) => (Command::RkhsBound, o),
            CliCommand::GeometryFuzz(o) => (Command::GeometryFuzz, o),
            CliCommand::Simulate(o) => (Command::Simulate, o),
            CliCommand::Persistence(o) => (Command::Persistence, o),
            CliCommand::Occupation(o) => (Command::Occupation, o),
            CliCommand::Slepian(o) => (Command::Slepian, o),
        };
        let mut cfg = match &opts.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)?;
                serde_json::from_str::<RunConfig>(&text).map_err(|e| {
                    Error::Validation(format!("config file {}: {e}", path.display()))
                })?
            }
            None => RunConfig::default(),
        };
        if let Some(c) = cfg.command {
            if c != command {
                return Err(Error::Validation(format!(
                    "config file is for command {}, invoked as {}",
                    c.as_str(),
                    command.as_str()
                )));
            }
        }
        cfg.command = Some(command);
        overlay!(cfg, opts; d, hurst, alpha, delta, gamma, n_min, n_max, parity, points, grid, eps, samples, seed, output, format, workers);
        Ok(cfg)
    }

    pub fn command(&self) -> Result<Command> {
        self.command
            .ok_or_else(|| Error::Validation("no command given".into()))
    }

    /// Configuration as embedded in data files: everything that determines the
    /// data, without output location or thread count.
    pub fn data_config(&self) -> RunConfig {
        RunConfig {
            output: None,
            workers: None,
            format: None,
            ..self.clone()
        }
    }
}

fn need<T: Clone>(v: &Option<T>, flag: &str, cmd: Command) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::Validation(format!("{} requires --{flag}", cmd.as_str())))
}

fn parse_grid(spec: &str, d: usize, seed: Option<u64>) -> Result<SphereGrid> {
    let (kind, size) = spec
        .split_once(':')
        .ok_or_else(|| Error::Validation(format!("grid {spec:?} must look like kind:size")))?;
    let kind: GridKind = kind.parse()?;
    let size: usize = size
        .parse()
        .map_err(|_| Error::Validation(format!("grid size {size:?} is not a positive integer")))?;
    if kind == GridKind::RandomUniform && seed.is_none() {
        return Err(Error::Validation("random grids require --seed".into()));
    }
    make_grid(d, kind, size, seed.unwrap_or(0))
}

/// A table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Real(f64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Real(v) => format_real(*v),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(v) => json!(v),
            Cell::Real(v) if v.is_finite() => json!(v),
            Cell::Real(v) => json!(v.to_string()),
            Cell::Text(s) => json!(s),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Real(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Real)
    }
}

/// Primary output of a command; the first column is always `quantity`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        let mut c = vec!["quantity"];
        c.extend_from_slice(columns);
        Self {
            columns: c,
            rows: Vec::new(),
        }
    }

    fn push(&mut self, quantity: &str, cells: Vec<Cell>) {
        let mut row = vec![Cell::Text(quantity.into())];
        row.extend(cells);
        row.resize(self.columns.len(), Cell::Empty);
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, mut w: W, config: &RunConfig) -> Result<()> {
        writeln!(w, "# config {}", serde_json::to_string(config)?)?;
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for r in &self.rows {
            wr.write_record(r.iter().map(Cell::csv))?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn to_json(&self, config: &RunConfig) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let obj: serde_json::Map<String, Value> = self
                    .columns
                    .iter()
                    .zip(r)
                    .map(|(c, v)| (c.to_string(), v.json()))
                    .collect();
                Value::Object(obj)
            })
            .collect();
        json!({ "config": config, "rows": rows })
    }
}

/// Result of a command: the data table and a short summary for the console.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub table: Table,
    pub summary: Value,
}

fn grid_cov(cfg: &RunConfig, cmd: Command) -> Result<CovMatrix> {
    let d = need(&cfg.d, "d", cmd)? as usize;
    let h = Hurst::new(need(&cfg.hurst, "hurst", cmd)?)?;
    let grid = parse_grid(&need(&cfg.grid, "grid", cmd)?, d, cfg.seed)?;
    factorize(build_cov(h, &grid)?)
}

fn workers(cfg: &RunConfig) -> usize {
    cfg.workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
        .max(1)
}

/// Validates the parts common to all commands.
pub fn validate(cfg: &RunConfig) -> Result<Command> {
    let cmd = cfg.command()?;
    if let Some(d) = cfg.d {
        BasisSpec::new(d)?;
    }
    if let Some(h) = cfg.hurst {
        Hurst::new(h)?;
    }
    if cmd.is_stochastic() && cfg.seed.is_none() {
        return Err(Error::Validation(format!(
            "{} is stochastic and requires --seed",
            cmd.as_str()
        )));
    }
    if let Some(0) = cfg.samples {
        return Err(domain("--samples must be positive"));
    }
    if let Some(0) = cfg.workers {
        return Err(domain("--workers must be positive"));
    }
    Ok(cmd)
}

/// Runs the configured command and returns its table.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let cmd = validate(cfg)?;
    match cmd {
        Command::Coeffs => run_coeffs(cfg, cmd),
        Command::Decay => run_decay(cfg, cmd),
        Command::KernelCheck => run_kernel_check(cfg, cmd),
        Command::RkhsBound => run_rkhs_bound(cfg, cmd),
        Command::GeometryFuzz => run_geometry_fuzz(cfg, cmd),
        Command::Simulate => run_simulate(cfg, cmd),
        Command::Persistence => run_persistence(cfg, cmd),
        Command::Occupation => run_occupation(cfg, cmd),
        Command::Slepian => run_slepian(cfg, cmd),
    }
}

fn default_n_min(n_max: usize) -> usize {
    (n_max / 10).max(10)
}

fn run_coeffs(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let spec = BasisSpec::new(need(&cfg.d, "d", cmd)?)?;
    let gamma = need(&cfg.gamma, "gamma", cmd)?;
    let n_max = need(&cfg.n_max, "n-max", cmd)?;
    let series = closed_form_series(&spec, gamma, n_max)?;
    let law = predict_decay(&EndpointExpansion::new(vec![], vec![(1.0, gamma)])?);
    let n_min = default_n_min(n_max);
    let fitted = if n_max >= 2 * n_min {
        fit_decay(&series, n_min, n_max, ParityFilter::All)
            .ok()
            .map(|f| f.slope)
    } else {
        None
    };
    let mut t = Table::new(&["n", "a_n", "predicted_rate", "fitted_rate"]);
    for (n, &a) in series.values.iter().enumerate() {
        t.push(
            "legendre_coefficient",
            vec![n.into(), a.into(), law.rate().into(), fitted.into()],
        );
    }
    Ok(RunOutput {
        table: t,
        summary: json!({ "predicted_rate": law.rate(), "fitted_rate": fitted }),
    })
}

fn run_decay(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let spec = BasisSpec::new(need(&cfg.d, "d", cmd)?)?;
    let n_max = need(&cfg.n_max, "n-max", cmd)?;
    let n_min = cfg.n_min.unwrap_or_else(|| default_n_min(n_max));
    let mut t = Table::new(&[
        "parameter",
        "mode",
        "gamma",
        "predicted_slope",
        "fitted_slope",
        "r_squared",
        "n_min",
        "n_max",
        "parity",
    ]);
    let (param, law, predicted, fit, parity) = match (cfg.gamma, cfg.hurst) {
        (Some(g), None) => {
            let parity: ParityFilter = cfg.parity.as_deref().unwrap_or("all").parse()?;
            let law = predict_decay(&EndpointExpansion::new(vec![], vec![(1.0, g)])?);
            let fit = fit_decay_with(
                |n| crate::singular_coeffs::coeff_one_minus_t_pow(&spec, g, n),
                n_min,
                n_max,
                parity,
            )?;
            (g, law, law.rate(), fit, parity)
        }
        (None, Some(h)) => {
            let parity: ParityFilter = cfg.parity.as_deref().unwrap_or("odd").parse()?;
            let law = predict_decay(&kernel_endpoint_expansion(h, 3)?);
            let ks = KernelSeries::new(&spec, h, n_max)?;
            let fit = fit_decay(&ks.coeffs().amplitudes, n_min, n_max, parity)?;
            // amplitudes √(b_n N(d,n)) with N(d,n) ~ n^{d-2}
            (
                h,
                law,
                (law.rate() + spec.d() as f64 - 2.0) / 2.0,
                fit,
                parity,
            )
        }
        _ => {
            return Err(Error::Validation(
                "decay requires exactly one of --gamma or --hurst".into(),
            ))
        }
    };
    let quantity = if cfg.gamma.is_some() {
        "coefficient_decay_rate"
    } else {
        "kernel_amplitude_decay_rate"
    };
    let parity_s = match parity {
        ParityFilter::All => "all",
        ParityFilter::Odd => "odd",
        ParityFilter::Even => "even",
    };
    t.push(
        quantity,
        vec![
            param.into(),
            law.mode.as_str().into(),
            law.gamma.into(),
            predicted.into(),
            fit.slope.into(),
            fit.r_squared.into(),
            n_min.into(),
            n_max.into(),
            parity_s.into(),
        ],
    );
    Ok(RunOutput {
        table: t,
        summary: json!({ "mode": law.mode.as_str(), "predicted_slope": predicted, "fitted_slope": fit.slope }),
    })
}

fn run_kernel_check(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let spec = BasisSpec::new(need(&cfg.d, "d", cmd)?)?;
    let h = need(&cfg.hurst, "hurst", cmd)?;
    let n_max = need(&cfg.n_max, "n-max", cmd)?;
    let points = cfg.points.unwrap_or(2001).max(2);
    let ks = KernelSeries::new(&spec, h, n_max)?;
    let mut t = Table::new(&["t", "series", "exact", "abs_error"]);
    let mut worst = 0.0f64;
    for k in 0..points {
        let x = (-1.0 + 2.0 * k as f64 / (points - 1) as f64).clamp(-1.0, 1.0);
        let s = ks.eval(x)?;
        let e = kernel_fn(h, x);
        worst = worst.max((s - e).abs());
        t.push(
            "kernel_series_error",
            vec![x.into(), s.into(), e.into(), (s - e).abs().into()],
        );
    }
    Ok(RunOutput {
        table: t,
        summary: json!({ "max_abs_error": worst, "tail": ks.tail(), "clamped": ks.coeffs().clamped }),
    })
}

fn run_rkhs_bound(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let s = RkhsShiftSpec::new(
        need(&cfg.hurst, "hurst", cmd)?,
        need(&cfg.alpha, "alpha", cmd)?,
        need(&cfg.delta, "delta", cmd)?,
        need(&cfg.d, "d", cmd)?,
        need(&cfg.n_max, "n-max", cmd)?,
    )?;
    let b = norm_bound_sq(&s)?;
    let mut t = Table::new(&[
        "hurst",
        "alpha",
        "delta",
        "n_trunc",
        "bound",
        "tail_estimate",
        "partial_sum",
        "substituted",
    ]);
    t.push(
        "rkhs_norm_bound_sq",
        vec![
            b.hurst.into(),
            b.alpha.into(),
            b.delta.into(),
            b.n_trunc.into(),
            b.bound.into(),
            b.tail_estimate.into(),
            b.partial_sum.into(),
            b.substituted.len().into(),
        ],
    );
    Ok(RunOutput {
        table: t,
        summary: json!({ "bound": b.bound, "tail_estimate": b.tail_estimate }),
    })
}

fn run_geometry_fuzz(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let d = need(&cfg.d, "d", cmd)? as usize;
    let h = Hurst::new(need(&cfg.hurst, "hurst", cmd)?)?;
    let pairs = need(&cfg.samples, "samples", cmd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(need(&cfg.seed, "seed", cmd)?);
    let o = north_pole(d)?;
    let (mut topo, mut topo_excess, mut norm_err, mut dom) =
        (0usize, f64::NEG_INFINITY, 0.0f64, 0usize);
    for _ in 0..pairs {
        let a = sample_half_sphere(d, &mut rng)?;
        let b = sample_half_sphere(d, &mut rng)?;
        let (ya, yb) = (project_ae(&a)?, project_ae(&b)?);
        let flat = ya
            .iter()
            .zip(&yb)
            .map(|(x, y)| (x - y).powi(2))
            .sum::<f64>()
            .sqrt();
        let excess = geodesic(&a, &b)? - flat;
        topo_excess = topo_excess.max(excess);
        topo += (excess > 1e-12) as usize;
        let r = ya.iter().map(|x| x * x).sum::<f64>().sqrt();
        norm_err = norm_err.max((r - geodesic(&o, &a)?).abs());
        let (s, e) = domination_check(h, &a, &b)?;
        dom += (s < e - 1e-12) as usize;
    }
    let mut t = Table::new(&[
        "d",
        "pairs",
        "toponogov_violations",
        "max_toponogov_excess",
        "max_norm_error",
        "domination_violations",
    ]);
    t.push(
        "comparison_geometry",
        vec![
            d.into(),
            pairs.into(),
            topo.into(),
            topo_excess.into(),
            norm_err.into(),
            dom.into(),
        ],
    );
    Ok(RunOutput {
        table: t,
        summary: json!({ "toponogov_violations": topo, "domination_violations": dom, "max_norm_error": norm_err }),
    })
}

fn run_simulate(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let cov = grid_cov(cfg, cmd)?;
    let n = need(&cfg.samples, "samples", cmd)?;
    let mut rng = ChaCha8Rng::seed_from_u64(need(&cfg.seed, "seed", cmd)?);
    let x = sample_fields(&cov, &mut rng, n)?;
    let mut t = Table::new(&["sample", "point", "value"]);
    for (s, col) in x.column_iter().enumerate() {
        for (i, &v) in col.iter().enumerate() {
            t.push("field_value", vec![s.into(), i.into(), v.into()]);
        }
    }
    Ok(RunOutput {
        table: t,
        summary: json!({ "grid_size": cov.len(), "jitter_used": cov.jitter_used }),
    })
}

fn run_persistence(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let cov = grid_cov(cfg, cmd)?;
    let eps = need(&cfg.eps, "eps", cmd)?;
    let n = need(&cfg.samples, "samples", cmd)?;
    let curve = persistence_curve(&cov, &eps, n, need(&cfg.seed, "seed", cmd)?, workers(cfg))?;
    let mut t = Table::new(&["eps", "value", "uncertainty"]);
    for e in &curve.entries {
        t.push(
            "persistence_probability",
            vec![e.eps.into(), e.p_hat.into(), e.half_width.into()],
        );
    }
    let fit = fit_persistence_exponent(&curve).ok();
    if let Some(f) = &fit {
        t.push(
            "persistence_exponent",
            vec![Cell::Empty, f.slope.into(), f.stderr.into()],
        );
        if let Some(lc) = f.log_corrected {
            t.push(
                "persistence_exponent_log_corrected",
                vec![Cell::Empty, lc.slope.into(), lc.stderr.into()],
            );
        }
    }
    let target = (cov.grid.d as f64 - 1.0) / cov.hurst.value();
    Ok(RunOutput {
        table: t,
        summary: json!({
            "target_exponent": target,
            "fitted_exponent": fit.map(|f| f.slope),
            "log_corrected_exponent": fit.and_then(|f| f.log_corrected.map(|l| l.slope)),
            "jitter_used": cov.jitter_used,
        }),
    })
}

fn run_occupation(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let cov = grid_cov(cfg, cmd)?;
    let n = need(&cfg.samples, "samples", cmd)?;
    let occ = occupation_samples(&cov, n, need(&cfg.seed, "seed", cmd)?, workers(cfg))?;
    let ks = ks_distance_uniform(&occ);
    let mut t = Table::new(&["index", "value"]);
    for (i, &v) in occ.iter().enumerate() {
        t.push("occupation_fraction_below_zero", vec![i.into(), v.into()]);
    }
    t.push("ks_distance_to_uniform", vec![Cell::Empty, ks.into()]);
    Ok(RunOutput {
        table: t,
        summary: json!({ "ks_distance": ks, "ks_critical_95": 1.36 / (n as f64).sqrt() }),
    })
}

fn run_slepian(cfg: &RunConfig, cmd: Command) -> Result<RunOutput> {
    let cov = grid_cov(cfg, cmd)?;
    let eps = need(&cfg.eps, "eps", cmd)?;
    let n = need(&cfg.samples, "samples", cmd)?;
    let seed = need(&cfg.seed, "seed", cmd)?;
    let (a, b) = hemispheric_split(&cov.grid);
    let mut t = Table::new(&["eps", "p_full", "p_a", "p_b", "diff", "stderr", "margin"]);
    let mut worst = f64::INFINITY;
    for &e in &eps {
        let r = slepian_product_check(&cov, &a, &b, e, n, seed, workers(cfg))?;
        worst = worst.min(r.margin);
        t.push(
            "slepian_product_margin",
            vec![
                r.eps.into(),
                r.p_full.into(),
                r.p_a.into(),
                r.p_b.into(),
                r.diff.into(),
                r.stderr.into(),
                r.margin.into(),
            ],
        );
    }
    Ok(RunOutput {
        table: t,
        summary: json!({ "min_margin": worst }),
    })
}

/// Writes the data file and its sidecar (or the data to stdout).
pub fn write_output(cfg: &RunConfig, out: &RunOutput) -> Result<()> {
    let data_cfg = cfg.data_config();
    let format = cfg.format.unwrap_or_default();
    let mut bytes = Vec::new();
    match format {
        Format::Csv => out.table.write_csv(&mut bytes, &data_cfg)?,
        Format::Json => {
            serde_json::to_writer_pretty(&mut bytes, &out.table.to_json(&data_cfg))?;
            bytes.push(b'\n');
        }
    }
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, &bytes)?;
            let meta = json!({
                "command": cfg.command()?.as_str(),
                "config": cfg,
                "version": env!("CARGO_PKG_VERSION"),
                "timestamp_unix": std::time::SystemTime::now()
                    .duration_since(std::time::UNIX_EPOCH)
                    .map(|d| d.as_secs())
                    .unwrap_or(0),
                "summary": out.summary,
            });
            std::fs::write(sidecar_path(path), serde_json::to_vec_pretty(&meta)?)?;
        }
        None => std::io::stdout().write_all(&bytes)?,
    }
    Ok(())
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with(cli: Cli) -> i32 {
    let result = RunConfig::from_cli(&cli).and_then(|cfg| {
        let out = execute(&cfg)?;
        write_output(&cfg, &out)?;
        if cfg.output.is_some() {
            println!("{}", out.summary);
        }
        Ok(())
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            let cat = e.category();
            eprintln!(
                "{}",
                json!({ "error": { "category": cat.as_str(), "message": e.to_string() } })
            );
            cat.exit_code()
        }
    }
}
