//! Experiment driver behind the `chaos-stein` binary.
//!
//! One JSON config per run, tagged by `"command"`. Every run writes its CSV
//! tables plus a `manifest.json` into the output directory.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::Parser;
use log::info;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::bounds::{gamma_bound_single, gauss_bound_single, BoundReport, Metric};
use crate::breuer_major::{
    bm_bound_exact, bm_rate, bm_table_with, log_log_slope, BmInstance, BmMethod, BmOptions, BmRow, DEFAULT_OPERATION_BUDGET,
};
use crate::error::Error;
use crate::pearson::{
    density_from_tau, interior_grid, pearson_classify, stein_bound_check, stein_solve, Density, PearsonSpec, Tau,
};
use crate::simulate::{
    dkw_allowance, empirical_kolmogorov, empirical_wasserstein, sample_Zn, std_normal_cdf, std_normal_quantile,
};
use crate::tensor::{GramSpace, KernelJson, SymKernel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 3;
pub const EXIT_PRECONDITION: i32 = 4;
pub const EXIT_IO: i32 = 5;
pub const EXIT_COMPUTE: i32 = 6;

#[derive(Debug, Parser)]
#[command(name = "chaos-stein", version, about = "Stein–Malliavin bounds and Monte Carlo checks for Wiener chaos")]
pub struct Args {
    /// JSON experiment config.
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory (created if missing).
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Parse(String),
    #[error("precondition violated: {0}")]
    Precondition(Error),
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("computation failed: {0}")]
    Compute(Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => EXIT_PARSE,
            CliError::Precondition(_) => EXIT_PRECONDITION,
            CliError::Io { .. } => EXIT_IO,
            CliError::Compute(_) => EXIT_COMPUTE,
        }
    }
}

/// Numerical failures are compute errors; everything else, including a
/// divergent variance series, means the inputs were unacceptable.
impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Complexity(_)
            | Error::ResourceLimit(_)
            | Error::Accuracy(_)
            | Error::Integrability(_) => CliError::Compute(e),
            other => CliError::Precondition(other),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn default_gauss_metrics() -> Vec<String> {
    vec!["kolmogorov".into(), "tv".into(), "wasserstein".into()]
}

fn default_gamma_metrics() -> Vec<String> {
    vec!["h1".into()]
}

fn default_q() -> usize {
    2
}

fn default_chi2_ns() -> Vec<usize> {
    (4..=9).map(|k| 1usize << k).collect()
}

fn default_one() -> f64 {
    1.0
}

fn default_half() -> f64 {
    0.5
}

fn default_grid() -> usize {
    201
}

fn default_count() -> usize {
    100_000
}

/// A kernel given inline or as a path to its JSON file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum KernelSource {
    Inline(KernelJson),
    File(PathBuf),
}

impl KernelSource {
    fn load(&self, base: &Path) -> Result<SymKernel, CliError> {
        let json = match self {
            KernelSource::Inline(k) => k.clone(),
            KernelSource::File(p) => {
                let path = if p.is_absolute() { p.clone() } else { base.join(p) };
                let text = fs::read_to_string(&path).map_err(io_err(&path))?;
                serde_json::from_str(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))?
            }
        };
        Ok(json.into_kernel()?)
    }
}

/// Hurst indices: a number or a list.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    fn values(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(v) => vec![*v],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

/// Bounded test functions for the Stein solver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunction {
    /// `1{x <= z}`
    Step { z: f64 },
    /// `sign(x - z) / 2`
    HalfSign { z: f64 },
    Tanh,
    Sin,
    /// `cos(x) 1{|x| <= radius}`
    ClippedCos { radius: f64 },
    Zero,
}

impl TestFunction {
    pub fn func(self) -> impl Fn(f64) -> f64 + Send + Sync + 'static {
        move |x: f64| match self {
            TestFunction::Step { z } => {
                if x <= z {
                    1.0
                } else {
                    0.0
                }
            }
            TestFunction::HalfSign { z } => 0.5 * (x - z).signum(),
            TestFunction::Tanh => x.tanh(),
            TestFunction::Sin => x.sin(),
            TestFunction::ClippedCos { radius } => {
                if x.abs() <= radius {
                    x.cos()
                } else {
                    0.0
                }
            }
            TestFunction::Zero => 0.0,
        }
    }

    pub fn breaks(self) -> Vec<f64> {
        match self {
            TestFunction::Step { z } | TestFunction::HalfSign { z } => vec![z],
            TestFunction::ClippedCos { radius } => vec![-radius, radius],
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ExperimentConfig {
    /// Gaussian-target bounds for one kernel.
    Bound {
        kernel: KernelSource,
        #[serde(default = "default_q")]
        q: usize,
        #[serde(default = "default_gauss_metrics")]
        metrics: Vec<String>,
    },
    /// Exact Breuer–Major bounds over a grid of `n`.
    BreuerMajor {
        #[serde(alias = "H")]
        hurst: OneOrMany,
        #[serde(default = "default_q")]
        q: usize,
        ns: Vec<usize>,
        #[serde(default)]
        method: Option<String>,
        #[serde(default)]
        operation_budget: Option<f64>,
    },
    /// Centered-Gamma-target bounds for one kernel.
    Gamma {
        kernel: KernelSource,
        #[serde(default = "default_q")]
        q: usize,
        nu: f64,
        #[serde(default = "default_gamma_metrics")]
        metrics: Vec<String>,
    },
    /// `F_n = n^{-1} sum a(k-l)(G_k G_l - delta_kl)` against `N^2 - 1`, with
    /// `a(0) = 1` and `a(r) = 1 + amplitude * decay^{|r|}` otherwise.
    Chi2Example {
        #[serde(default = "default_chi2_ns")]
        ns: Vec<usize>,
        #[serde(default = "default_one")]
        amplitude: f64,
        #[serde(default = "default_half")]
        decay: f64,
        #[serde(default = "default_gamma_metrics")]
        metrics: Vec<String>,
    },
    /// Density, Stein solution and solution bounds for a quadratic `tau`.
    Pearson {
        spec: PearsonSpec,
        test_function: TestFunction,
        #[serde(default = "default_grid")]
        grid_points: usize,
    },
    /// Monte Carlo draws of `Z_n` compared with the standard normal.
    Simulate {
        #[serde(alias = "H")]
        hurst: f64,
        #[serde(default = "default_q")]
        q: usize,
        n: usize,
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        write_samples: bool,
    },
}

impl ExperimentConfig {
    pub fn command(&self) -> &'static str {
        match self {
            ExperimentConfig::Bound { .. } => "bound",
            ExperimentConfig::BreuerMajor { .. } => "breuer-major",
            ExperimentConfig::Gamma { .. } => "gamma",
            ExperimentConfig::Chi2Example { .. } => "chi2-example",
            ExperimentConfig::Pearson { .. } => "pearson",
            ExperimentConfig::Simulate { .. } => "simulate",
        }
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
    }

    pub fn override_seed(&mut self, new_seed: u64) {
        if let ExperimentConfig::Simulate { seed, .. } = self {
            *seed = new_seed;
        }
    }

    /// Checks every parameter before any computation starts.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            ExperimentConfig::Bound { q, metrics, .. } => {
                check_order(*q)?;
                for m in parse_metrics(metrics)? {
                    m.gaussian_constant()?;
                }
            }
            ExperimentConfig::Gamma { q, nu, metrics, .. } => {
                check_order(*q)?;
                if q % 2 == 1 {
                    return Err(Error::InvalidOrder(format!("Gamma bounds need an even order, got {q}")).into());
                }
                for m in parse_metrics(metrics)? {
                    m.gamma_constant(*nu)?;
                }
            }
            ExperimentConfig::BreuerMajor {
                hurst,
                q,
                ns,
                method,
                operation_budget,
            } => {
                if ns.is_empty() {
                    return Err(Error::InvalidParameter("ns is empty".into()).into());
                }
                for h in hurst.values() {
                    for &n in ns {
                        BmInstance::new(h, *q, n)?;
                    }
                }
                bm_options(method.as_deref(), *operation_budget)?;
            }
            ExperimentConfig::Chi2Example {
                ns,
                amplitude,
                decay,
                metrics,
            } => {
                if ns.is_empty() || ns.contains(&0) {
                    return Err(Error::InvalidParameter("ns must be nonempty and positive".into()).into());
                }
                if !amplitude.is_finite() || !(decay.abs() < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "need finite amplitude and |decay| < 1, got {amplitude}, {decay}"
                    ))
                    .into());
                }
                for m in parse_metrics(metrics)? {
                    m.gamma_constant(1.0)?;
                }
            }
            ExperimentConfig::Pearson { spec, grid_points, .. } => {
                spec.validate()?;
                if *grid_points < 2 {
                    return Err(Error::InvalidParameter("grid_points must be at least 2".into()).into());
                }
            }
            ExperimentConfig::Simulate { hurst, q, n, count, .. } => {
                BmInstance::new(*hurst, *q, *n)?;
                if *count == 0 {
                    return Err(Error::EmptySample.into());
                }
            }
        }
        Ok(())
    }
}

fn check_order(q: usize) -> Result<(), CliError> {
    if q < 2 {
        return Err(Error::InvalidOrder(format!("chaos order {q} < 2")).into());
    }
    Ok(())
}

fn parse_metrics(names: &[String]) -> Result<Vec<Metric>, CliError> {
    if names.is_empty() {
        return Err(Error::InvalidParameter("no metrics requested".into()).into());
    }
    names.iter().map(|s| s.parse::<Metric>().map_err(CliError::from)).collect()
}

fn bm_options(method: Option<&str>, budget: Option<f64>) -> Result<BmOptions, CliError> {
    let method = match method.map(|s| s.to_ascii_lowercase()) {
        None => BmMethod::Auto,
        Some(s) => match s.as_str() {
            "auto" => BmMethod::Auto,
            "naive" => BmMethod::Naive,
            "difference-sums" | "difference_sums" => BmMethod::DifferenceSums,
            "quadratic" => BmMethod::Quadratic,
            other => return Err(Error::InvalidParameter(format!("unknown method {other:?}")).into()),
        },
    };
    let operation_budget = budget.unwrap_or(DEFAULT_OPERATION_BUDGET);
    if !(operation_budget > 0.0) {
        return Err(Error::InvalidParameter(format!("operation budget {operation_budget}")).into());
    }
    Ok(BmOptions {
        method,
        operation_budget,
    })
}

/// Seventeen significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// A CSV table held in memory until the run succeeds.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    /// Lines written before the header, prefixed with `#`.
    pub comments: Vec<String>,
}

impl Table {
    fn new(name: &str, header: &[&str]) -> Self {
        Table {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            comments: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>, CliError> {
        let mut buf = Vec::new();
        for c in &self.comments {
            buf.extend_from_slice(format!("# {c}\n").as_bytes());
        }
        let mut w = csv::Writer::from_writer(buf);
        let to_cli = |e: csv::Error| CliError::Parse(e.to_string());
        w.write_record(&self.header).map_err(to_cli)?;
        for r in &self.rows {
            w.write_record(r).map_err(to_cli)?;
        }
        w.into_inner().map_err(|e| CliError::Parse(e.to_string()))
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub tables: Vec<Table>,
    pub summary: serde_json::Value,
}

fn report_row(prefix: &[String], rep: &BoundReport) -> Vec<String> {
    let mut row = prefix.to_vec();
    row.extend([
        rep.metric.label().to_string(),
        fmt_f64(rep.variance_term),
        fmt_f64(rep.contraction_sum()),
        fmt_f64(rep.squared_total),
        fmt_f64(rep.metric_constant),
        fmt_f64(rep.bound),
        rep.upper_total.map(fmt_f64).unwrap_or_default(),
    ]);
    row
}

const REPORT_COLUMNS: [&str; 7] = [
    "metric",
    "variance_term",
    "contraction_sum",
    "squared_total",
    "metric_constant",
    "bound",
    "upper_total",
];

fn with_report_columns(lead: &[&'static str]) -> Vec<&'static str> {
    lead.iter().copied().chain(REPORT_COLUMNS).collect()
}

/// The second-chaos kernel `M[k][l] = a(k - l)/n` of the chi-square example.
pub fn chi2_example_kernel(n: usize, amplitude: f64, decay: f64) -> crate::error::Result<SymKernel> {
    let space = GramSpace::identity(n);
    let a = |r: usize| if r == 0 { 1.0 } else { 1.0 + amplitude * decay.powi(r as i32) };
    let mut k = SymKernel::zero(&space, 2);
    for i in 0..n {
        for j in i..n {
            // coefficients sum over both orderings
            let mult = if i == j { 1.0 } else { 2.0 };
            k.add_entry(vec![i, j], mult * a(j - i) / n as f64)?;
        }
    }
    Ok(k)
}

/// Runs a validated config. `base` resolves relative kernel paths.
pub fn execute(config: &ExperimentConfig, base: &Path) -> Result<RunOutput, CliError> {
    config.validate()?;
    match config {
        ExperimentConfig::Bound { kernel, q, metrics } => {
            let f = kernel.load(base)?;
            let lead = ["q", "dim"];
            let mut t = Table::new("bound.csv", &with_report_columns(&lead));
            let mut reports = Vec::new();
            for m in parse_metrics(metrics)? {
                let rep = gauss_bound_single(&f, *q, m)?;
                t.push(report_row(&[q.to_string(), f.dim().to_string()], &rep));
                reports.push(rep);
            }
            Ok(RunOutput {
                tables: vec![t],
                summary: json!({ "reports": reports }),
            })
        }
        ExperimentConfig::Gamma { kernel, q, nu, metrics } => {
            let f = kernel.load(base)?;
            let lead = ["q", "dim", "nu"];
            let mut t = Table::new("gamma.csv", &with_report_columns(&lead));
            let mut reports = Vec::new();
            for m in parse_metrics(metrics)? {
                let rep = gamma_bound_single(&f, *q, *nu, m)?;
                t.push(report_row(&[q.to_string(), f.dim().to_string(), fmt_f64(*nu)], &rep));
                reports.push(rep);
            }
            Ok(RunOutput {
                tables: vec![t],
                summary: json!({ "reports": reports }),
            })
        }
        ExperimentConfig::BreuerMajor {
            hurst,
            q,
            ns,
            method,
            operation_budget,
        } => {
            let opts = bm_options(method.as_deref(), *operation_budget)?;
            let mut header: Vec<&str> = crate::breuer_major::BM_CSV_HEADER.to_vec();
            header.extend(["regime", "predicted"]);
            let mut t = Table::new("breuer_major.csv", &header);
            let mut slopes = Vec::new();
            for h in hurst.values() {
                info!("Breuer-Major H = {h}, q = {q}, {} values of n", ns.len());
                let rows: Vec<BmRow> = bm_table_with(h, *q, ns, &opts)?;
                let (_, regime) = bm_rate(h, *q)?;
                for r in &rows {
                    t.push(vec![
                        fmt_f64(r.hurst),
                        r.q.to_string(),
                        r.n.to_string(),
                        fmt_f64(r.variance_term),
                        fmt_f64(r.squared_total),
                        fmt_f64(r.kol_bound),
                        fmt_f64(r.rate_exponent),
                        format!("{regime:?}"),
                        fmt_f64(r.predicted),
                    ]);
                }
                if rows.len() >= 2 {
                    let xs: Vec<f64> = rows.iter().map(|r| r.n as f64).collect();
                    let ys: Vec<f64> = rows.iter().map(|r| r.kol_bound).collect();
                    slopes.push(json!({
                        "hurst": h,
                        "q": q,
                        "slope": log_log_slope(&xs, &ys),
                        "predicted_slope": -rows[0].rate_exponent,
                        "regime": format!("{regime:?}"),
                    }));
                }
            }
            Ok(RunOutput {
                tables: vec![t],
                summary: json!({ "slopes": slopes }),
            })
        }
        ExperimentConfig::Chi2Example {
            ns,
            amplitude,
            decay,
            metrics,
        } => {
            let metrics = parse_metrics(metrics)?;
            let lead = ["n", "amplitude", "decay", "nu"];
            let mut t = Table::new("chi2_example.csv", &with_report_columns(&lead));
            let mut slopes = Vec::new();
            let mut per_metric: Vec<Vec<f64>> = vec![Vec::new(); metrics.len()];
            for &n in ns {
                info!("chi-square example n = {n}");
                let f = chi2_example_kernel(n, *amplitude, *decay)?;
                for (mi, &m) in metrics.iter().enumerate() {
                    let rep = gamma_bound_single(&f, 2, 1.0, m)?;
                    per_metric[mi].push(rep.bound);
                    t.push(report_row(
                        &[n.to_string(), fmt_f64(*amplitude), fmt_f64(*decay), fmt_f64(1.0)],
                        &rep,
                    ));
                }
            }
            if ns.len() >= 2 {
                let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
                for (m, ys) in metrics.iter().zip(&per_metric) {
                    slopes.push(json!({ "metric": m.label(), "slope": log_log_slope(&xs, ys) }));
                }
            }
            Ok(RunOutput {
                tables: vec![t],
                summary: json!({ "slopes": slopes }),
            })
        }
        ExperimentConfig::Pearson {
            spec,
            test_function,
            grid_points,
        } => {
            let tau = Tau::from_spec(spec)?;
            let density = Arc::new(density_from_tau(&tau)?);
            let grid = interior_grid(&density, *grid_points);
            let sol = stein_solve(&density, test_function.func(), &test_function.breaks())?;
            let check = stein_bound_check(&sol, &grid)?;
            let params = [
                fmt_f64(spec.alpha),
                fmt_f64(spec.beta),
                fmt_f64(spec.gamma),
                fmt_f64(spec.a),
                fmt_f64(spec.b),
            ];
            let lead = ["alpha", "beta", "gamma", "a", "b"];
            let mut dens = Table::new("pearson_density.csv", &[&lead[..], &["x", "tau", "pdf"]].concat());
            let mut solt = Table::new(
                "pearson_solution.csv",
                &[&lead[..], &["x", "h", "U", "U_prime", "tau_U_prime", "x_U"]].concat(),
            );
            for &x in &grid {
                let mut row = params.to_vec();
                row.extend([fmt_f64(x), fmt_f64(tau.eval(x)), fmt_f64(density.pdf(x))]);
                dens.push(row);
                let u = sol.eval(x)?;
                let du = sol.derivative(x)?;
                let mut row = params.to_vec();
                row.extend([
                    fmt_f64(x),
                    fmt_f64(sol.h(x)),
                    fmt_f64(u),
                    fmt_f64(du),
                    fmt_f64(tau.eval(x) * du),
                    fmt_f64(x * u),
                ]);
                solt.push(row);
            }
            Ok(RunOutput {
                tables: vec![dens, solt],
                summary: json!({
                    "normalization": density.normalization(),
                    "mean_h": sol.mean_h(),
                    "bound_check": check,
                    "classification": pearson_classify(spec),
                }),
            })
        }
        ExperimentConfig::Simulate {
            hurst,
            q,
            n,
            count,
            seed,
            write_samples,
        } => {
            info!("sampling {count} draws of Z_n at H = {hurst}, q = {q}, n = {n}");
            let batch = sample_Zn(*hurst, *q, *n, *count, *seed)?;
            let kol = empirical_kolmogorov(&batch.values, &std_normal_cdf)?;
            let w1 = empirical_wasserstein(&batch.values, &std_normal_quantile)?;
            let bound = bm_bound_exact(&BmInstance::new(*hurst, *q, *n)?)?;
            let allowance = 3.0 * dkw_allowance(*count, 0.01);
            let mut t = Table::new(
                "simulate_summary.csv",
                &[
                    "H",
                    "q",
                    "n",
                    "count",
                    "seed",
                    "mean",
                    "variance",
                    "kolmogorov",
                    "wasserstein",
                    "kol_bound",
                    "mc_allowance",
                    "dominated",
                ],
            );
            t.push(vec![
                fmt_f64(*hurst),
                q.to_string(),
                n.to_string(),
                count.to_string(),
                seed.to_string(),
                fmt_f64(batch.mean()),
                fmt_f64(batch.variance()),
                fmt_f64(kol),
                fmt_f64(w1),
                fmt_f64(bound.bound),
                fmt_f64(allowance),
                (kol <= bound.bound + allowance).to_string(),
            ]);
            let mut tables = vec![t];
            if *write_samples {
                let mut s = Table::new("samples.csv", &["value"]);
                s.comments.push(format!("seed={} {}", batch.seed, batch.meta));
                for v in &batch.values {
                    s.push(vec![fmt_f64(*v)]);
                }
                tables.push(s);
            }
            Ok(RunOutput {
                tables,
                summary: json!({
                    "meta": batch.meta,
                    "kolmogorov": kol,
                    "wasserstein": w1,
                    "kol_bound": bound.bound,
                    "mc_allowance": allowance,
                }),
            })
        }
    }
}

/// Parses, runs and writes outputs; returns the process exit code.
pub fn run(args: &Args) -> Result<(), CliError> {
    let start = Instant::now();
    let text = fs::read_to_string(&args.config).map_err(io_err(&args.config))?;
    let mut config = ExperimentConfig::parse(&text)?;
    if let Some(seed) = args.seed {
        config.override_seed(seed);
    }
    config.validate()?;
    if let Some(threads) = args.threads {
        if threads == 0 {
            return Err(Error::InvalidParameter("--threads must be positive".into()).into());
        }
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let base = args.config.parent().map(Path::to_path_buf).unwrap_or_default();
    let output = execute(&config, &base)?;

    fs::create_dir_all(&args.out).map_err(io_err(&args.out))?;
    let mut files = Vec::new();
    for t in &output.tables {
        let path = args.out.join(&t.name);
        fs::write(&path, t.to_csv()?).map_err(io_err(&path))?;
        files.push(t.name.clone());
    }
    let manifest = json!({
        "command": config.command(),
        "config": config,
        "version": env!("CARGO_PKG_VERSION"),
        "threads": rayon::current_num_threads(),
        "outputs": files,
        "summary": output.summary,
        "timings": { "total_seconds": start.elapsed().as_secs_f64() },
    });
    let path = args.out.join("manifest.json");
    let text = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Parse(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(io_err(&path))?;
    Ok(())
}

/// Entry point used by the binary.
pub fn main_with_args(args: &Args) -> i32 {
    match run(args) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
