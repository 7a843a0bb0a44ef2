mod config;
mod format;
mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use opucz_core::intensity::{rho1_limit, rho1_n, rho2_limit, rho2_n_routes};
use opucz_core::kernel::{kernel_cd, kernel_direct, KernelEval};
use opucz_core::mc::{convergence_study, run_ensemble, AuditReport, CoeffModel, ConvergenceRow};
use opucz_core::opuc::{regularity_report, VerblunskySource};
use opucz_core::varlim::{var_limit_closed, var_limit_quadrature, var_limit_series, VarianceResult};
use opucz_core::{Error, Region};
use serde::Serialize;

use config::{resolve, BasisOpts, ConvergenceOpts, IntensityOpts, KernelOpts, SimulateOpts, VarianceOpts};
use format::{fmt_complex, fmt_g, parse_complex, parse_usize_list, round_g};

pub const THREADS_ENV: &str = "OPUCZ_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Compute(Error::from(e))
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Random polynomials spanned by orthonormal polynomials on the unit circle.
#[derive(Parser)]
#[command(name = "opucz", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// JSON file of options; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (the OPUCZ_THREADS environment variable takes precedence).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Build an orthonormal basis and print kappa and alpha, or the regularity table.
    Basis {
        #[command(flatten)]
        opts: BasisOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate K, K01 and K11 at a point pair.
    Kernel {
        #[command(flatten)]
        opts: KernelOpts,
        #[command(flatten)]
        common: Common,
    },
    /// One- or two-point zero densities for Gaussian coefficients.
    Intensity {
        #[command(flatten)]
        opts: IntensityOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo zero counts in a region.
    Simulate {
        #[command(flatten)]
        opts: SimulateOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Sector-count concentration across several degrees.
    Convergence {
        #[command(flatten)]
        opts: ConvergenceOpts,
        #[command(flatten)]
        common: Common,
    },
    /// Limiting variance of an annulus count.
    #[command(name = "variance-limit")]
    VarianceLimit {
        #[command(flatten)]
        opts: VarianceOpts,
        #[command(flatten)]
        common: Common,
    },
}

fn usage(flag: &str, e: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("--{flag}: {e}"))
}

fn source(text: &str) -> CliResult<VerblunskySource> {
    text.parse().map_err(|e: Error| usage("alphas", e))
}

fn region(text: &str) -> CliResult<Region> {
    text.parse().map_err(|e: Error| usage("region", e))
}

fn model(text: &str) -> CliResult<CoeffModel> {
    text.parse().map_err(|e: Error| usage("model", e))
}

fn point(flag: &str, text: &str) -> CliResult<Complex64> {
    parse_complex(text).ok_or_else(|| usage(flag, format!("'{text}' is not `re,im`")))
}

fn positive(flag: &str, v: usize, min: usize) -> CliResult<usize> {
    if v < min {
        return Err(usage(flag, format!("must be at least {min}, got {v}")));
    }
    Ok(v)
}

fn thread_count(flag: Option<usize>) -> CliResult<usize> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        return match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Usage(format!("{THREADS_ENV}: '{v}' is not a positive integer"))),
        };
    }
    match flag {
        Some(0) => Err(usage("threads", "must be positive")),
        Some(n) => Ok(n),
        None => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn with_pool<T: Send>(common: &Common, job: impl FnOnce() -> T + Send) -> CliResult<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count(common.threads)?)
        .build()
        .map_err(|e| usage("threads", e))?;
    Ok(pool.install(job))
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, body)?;
    Ok(())
}

fn with_suffix(prefix: &str, suffix: &str) -> PathBuf {
    PathBuf::from(format!("{prefix}{suffix}"))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("artifact serializes");
    s.push('\n');
    s
}

#[derive(Serialize)]
struct Artifact<'a, C: Serialize, R: Serialize> {
    command: &'a str,
    config: &'a C,
    results: R,
}

fn emit(lines: &[String]) -> CliResult<()> {
    let mut out = io::stdout().lock();
    for l in lines {
        writeln!(out, "{l}")?;
    }
    Ok(())
}

fn cmd_basis(flags: &BasisOpts, common: &Common) -> CliResult<()> {
    let cfg = resolve(flags, BasisOpts::defaults(), common.config.as_deref())?;
    let src = source(cfg.alphas.as_deref().unwrap())?;
    let n = cfg.n.unwrap();
    let mut lines = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    if cfg.report.unwrap() {
        let alphas = src.generate(positive("n", n, 1)?)?;
        let rep = regularity_report(&alphas, n)?;
        lines.push("k,epsilon,nevai_proxy".to_string());
        for (k, (e, p)) in rep.epsilons.iter().zip(&rep.nevai_proxy).enumerate() {
            lines.push(format!("{},{},{}", k + 1, fmt_g(*e), fmt_g(*p)));
            rows.push(vec![(k + 1) as f64, round_g(*e), round_g(*p)]);
        }
    } else {
        let basis = src.basis(n)?;
        lines.push("k,kappa,alpha_re,alpha_im".to_string());
        for k in 0..=n {
            let kappa = basis.kappa(k);
            match basis.alphas().as_slice().get(k) {
                Some(a) => {
                    lines.push(format!("{k},{},{},{}", fmt_g(kappa), fmt_g(a.re), fmt_g(a.im)));
                    rows.push(vec![k as f64, round_g(kappa), round_g(a.re), round_g(a.im)]);
                }
                None => {
                    lines.push(format!("{k},{},,", fmt_g(kappa)));
                    rows.push(vec![k as f64, round_g(kappa)]);
                }
            }
        }
    }
    emit(&lines)?;
    if let Some(out) = &cfg.out {
        let art = Artifact {
            command: "basis",
            config: &cfg,
            results: rows,
        };
        write_file(&with_suffix(out, ".json"), &json(&art))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct KernelRow {
    route: &'static str,
    k: [f64; 2],
    k01: [f64; 2],
    k11: [f64; 2],
}

fn kernel_row(route: &'static str, e: &KernelEval) -> KernelRow {
    let pair = |z: Complex64| [round_g(z.re), round_g(z.im)];
    KernelRow {
        route,
        k: pair(e.k),
        k01: pair(e.k01),
        k11: pair(e.k11),
    }
}

fn cmd_kernel(flags: &KernelOpts, common: &Common) -> CliResult<()> {
    let cfg = resolve(flags, KernelOpts::defaults(), common.config.as_deref())?;
    let src = source(cfg.alphas.as_deref().unwrap())?;
    let n = cfg.n.unwrap();
    let z = point("z", cfg.z.as_deref().unwrap())?;
    let w = point("w", cfg.w.as_deref().unwrap())?;
    let method = cfg.method.as_deref().unwrap();
    let routes: &[&str] = match method {
        "direct" => &["direct"],
        "cd" => &["cd"],
        "both" => &["direct", "cd"],
        other => return Err(usage("method", format!("'{other}' is not direct, cd or both"))),
    };
    let basis = src.basis(n + 1)?;
    let mut lines = vec!["route,quantity,re,im".to_string()];
    let mut rows = Vec::new();
    for &route in routes {
        let (name, e) = if route == "direct" {
            ("direct", kernel_direct(&basis, n, z, w)?)
        } else {
            ("cd", kernel_cd(&basis, n, z, w)?)
        };
        for (q, v) in [("K", e.k), ("K01", e.k01), ("K11", e.k11)] {
            lines.push(format!("{name},{q},{}", fmt_complex(v)));
        }
        rows.push(kernel_row(name, &e));
    }
    emit(&lines)?;
    if let Some(out) = &cfg.out {
        let art = Artifact {
            command: "kernel",
            config: &cfg,
            results: rows,
        };
        write_file(&with_suffix(out, ".json"), &json(&art))?;
    }
    Ok(())
}

fn cmd_intensity(flags: &IntensityOpts, common: &Common) -> CliResult<()> {
    let cfg = resolve(flags, IntensityOpts::defaults(), common.config.as_deref())?;
    let src = source(cfg.alphas.as_deref().unwrap())?;
    let n = positive("n", cfg.n.unwrap(), 1)?;
    let z = point("z", cfg.z.as_deref().unwrap())?;
    let w = cfg.w.as_deref().map(|t| point("w", t)).transpose()?;
    let basis = src.basis(n + 1)?;
    let mut values: Vec<(&str, f64)> = Vec::new();
    match w {
        None => {
            values.push(("rho1_n", rho1_n(&basis, n, z)?.value));
            if cfg.limit.unwrap() {
                values.push(("rho1_limit", rho1_limit(z)?.value));
            }
        }
        Some(w) => {
            let r = rho2_n_routes(&basis, n, z, w)?;
            values.push(("rho2_n", r.expanded));
            values.push(("rho2_n_permanent", r.permanent));
            if cfg.limit.unwrap() {
                values.push(("rho2_limit", rho2_limit(z, w)?.value));
            }
        }
    }
    let lines: Vec<String> = values.iter().map(|(k, v)| format!("{k} {}", fmt_g(*v))).collect();
    emit(&lines)?;
    if let Some(out) = &cfg.out {
        let results: serde_json::Map<String, serde_json::Value> =
            values.iter().map(|(k, v)| (k.to_string(), round_g(*v).into())).collect();
        let art = Artifact {
            command: "intensity",
            config: &cfg,
            results,
        };
        write_file(&with_suffix(out, ".json"), &json(&art))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SimulateSummary<'a> {
    command: &'static str,
    config: &'a SimulateOpts,
    n: usize,
    trials: usize,
    seed: u64,
    region: String,
    mean: f64,
    variance: f64,
    se_mean: f64,
    se_var: f64,
    excluded: usize,
    excluded_trials: &'a [usize],
    audit: AuditReport,
    elapsed_seconds: f64,
}

/// `trial,count` rows for the trials that were counted.
fn counts_csv(counts: &[usize], excluded: &[usize]) -> String {
    let mut s = String::from("trial,count\n");
    let mut skip = excluded.iter().peekable();
    let mut t = 0usize;
    for &c in counts {
        while skip.peek() == Some(&&t) {
            skip.next();
            t += 1;
        }
        s.push_str(&format!("{t},{c}\n"));
        t += 1;
    }
    s
}

fn cmd_simulate(flags: &SimulateOpts, common: &Common) -> CliResult<()> {
    let start = Instant::now();
    let cfg = resolve(flags, SimulateOpts::defaults(), common.config.as_deref())?;
    let src = source(cfg.alphas.as_deref().unwrap())?;
    let n = positive("n", cfg.n.unwrap(), 1)?;
    let model = model(cfg.model.as_deref().unwrap())?;
    let region = region(cfg.region.as_deref().unwrap())?;
    let trials = positive("trials", cfg.trials.unwrap(), 2)?;
    let seed = cfg.seed.unwrap();
    let out = cfg.out.clone().unwrap();
    let basis = src.basis(n)?;
    let stats = with_pool(common, || run_ensemble(&basis, model, &region, trials, seed))??;
    write_file(&with_suffix(&out, ".counts.csv"), &counts_csv(&stats.counts, &stats.excluded))?;
    let summary = SimulateSummary {
        command: "simulate",
        config: &cfg,
        n,
        trials,
        seed,
        region: region.to_string(),
        mean: round_g(stats.mean),
        variance: round_g(stats.variance),
        se_mean: round_g(stats.se_mean),
        se_var: round_g(stats.se_var),
        excluded: stats.excluded.len(),
        excluded_trials: &stats.excluded,
        audit: stats.audit,
        elapsed_seconds: round_g(start.elapsed().as_secs_f64()),
    };
    write_file(&with_suffix(&out, ".summary.json"), &json(&summary))?;
    emit(&[
        format!("mean {}", fmt_g(stats.mean)),
        format!("variance {}", fmt_g(stats.variance)),
        format!("se_mean {}", fmt_g(stats.se_mean)),
        format!("se_var {}", fmt_g(stats.se_var)),
        format!("excluded {}", stats.excluded.len()),
    ])
}

#[derive(Serialize)]
struct ConvergenceSummary<'a> {
    command: &'static str,
    config: &'a ConvergenceOpts,
    region: String,
    target_fraction: f64,
    rows: Vec<ConvergenceRow>,
    elapsed_seconds: f64,
}

fn convergence_csv(rows: &[ConvergenceRow]) -> String {
    let mut s = String::from("n,mean_abs_dev,var_over_n2,envelope_sqrtlogn,envelope_eps14\n");
    for r in rows {
        s.push_str(&format!(
            "{},{},{},{},{}\n",
            r.n,
            fmt_g(r.mean_abs_dev),
            fmt_g(r.var_over_n2),
            fmt_g(r.envelope_sqrtlogn),
            fmt_g(r.envelope_eps14)
        ));
    }
    s
}

fn cmd_convergence(flags: &ConvergenceOpts, common: &Common) -> CliResult<()> {
    let start = Instant::now();
    let cfg = resolve(flags, ConvergenceOpts::defaults(), common.config.as_deref())?;
    let src = source(cfg.alphas.as_deref().unwrap())?;
    let model = model(cfg.model.as_deref().unwrap())?;
    let region = region(cfg.region.as_deref().unwrap())?;
    if !matches!(region, Region::Sector { .. }) {
        return Err(usage("region", "convergence studies need a sector"));
    }
    let ns_text = cfg.ns.as_deref().unwrap();
    let ns = parse_usize_list(ns_text)
        .filter(|ns| !ns.is_empty() && ns[0] >= 2 && ns.windows(2).all(|w| w[0] < w[1]))
        .ok_or_else(|| usage("ns", format!("'{ns_text}' is not a strictly increasing list of degrees >= 2")))?;
    let trials = positive("trials", cfg.trials.unwrap(), 2)?;
    let seed = cfg.seed.unwrap();
    let out = cfg.out.clone().unwrap();
    let basis = src.basis(*ns.last().unwrap())?;
    let rows = with_pool(common, || convergence_study(&basis, model, &region, &ns, trials, seed))??;
    let csv = convergence_csv(&rows);
    write_file(&with_suffix(&out, ".convergence.csv"), &csv)?;
    let series = [
        ("mean |N/n - target|", "#1f77b4", rows.iter().map(|r| (r.n as f64, r.mean_abs_dev)).collect()),
        ("sqrt(log n / n)", "#d62728", rows.iter().map(|r| (r.n as f64, r.envelope_sqrtlogn)).collect()),
        ("max(sqrt(log n / n), eps^1/4)", "#2ca02c", rows.iter().map(|r| (r.n as f64, r.envelope_eps14)).collect()),
        ("Var / n^2", "#9467bd", rows.iter().map(|r| (r.n as f64, r.var_over_n2)).collect()),
    ]
    .into_iter()
    .map(|(label, color, points)| svg::Series { label, color, points })
    .collect::<Vec<_>>();
    let chart = svg::line_chart(&format!("Sector counts, {}", region), "n", "deviation", &series);
    write_file(&with_suffix(&out, ".convergence.svg"), &chart)?;
    let rounded: Vec<ConvergenceRow> = rows
        .iter()
        .map(|r| ConvergenceRow {
            mean_abs_dev: round_g(r.mean_abs_dev),
            var_over_n2: round_g(r.var_over_n2),
            envelope_sqrtlogn: round_g(r.envelope_sqrtlogn),
            envelope_eps14: round_g(r.envelope_eps14),
            mean: round_g(r.mean),
            variance: round_g(r.variance),
            ..*r
        })
        .collect();
    let summary = ConvergenceSummary {
        command: "convergence",
        config: &cfg,
        region: region.to_string(),
        target_fraction: round_g(region.angular_fraction()),
        rows: rounded,
        elapsed_seconds: round_g(start.elapsed().as_secs_f64()),
    };
    write_file(&with_suffix(&out, ".summary.json"), &json(&summary))?;
    print!("{csv}");
    Ok(())
}

fn cmd_variance(flags: &VarianceOpts, common: &Common) -> CliResult<()> {
    let cfg = resolve(flags, VarianceOpts::defaults(), common.config.as_deref())?;
    let (s, t) = (cfg.s.unwrap(), cfg.t.unwrap());
    let (tol, target) = (cfg.tol.unwrap(), cfg.target.unwrap());
    let method = cfg.method.as_deref().unwrap();
    let run = |m: &str| -> CliResult<VarianceResult> {
        Ok(match m {
            "closed" => var_limit_closed(s, t)?,
            "series" => var_limit_series(s, t, tol)?,
            _ => var_limit_quadrature(s, t, target)?,
        })
    };
    let methods: &[&str] = match method {
        "closed" | "series" | "quadrature" => std::slice::from_ref(&method),
        "all" => &["closed", "series", "quadrature"],
        other => return Err(usage("method", format!("'{other}' is not closed, series, quadrature or all"))),
    };
    let results = methods.iter().map(|m| run(m)).collect::<CliResult<Vec<_>>>()?;
    let lines: Vec<String> = if results.len() == 1 {
        vec![fmt_g(results[0].value)]
    } else {
        methods.iter().zip(&results).map(|(m, r)| format!("{m} {}", fmt_g(r.value))).collect()
    };
    emit(&lines)?;
    if let Some(out) = &cfg.out {
        let rounded: Vec<VarianceResult> = results
            .iter()
            .map(|r| VarianceResult {
                value: round_g(r.value),
                ..*r
            })
            .collect();
        let art = Artifact {
            command: "variance-limit",
            config: &cfg,
            results: rounded,
        };
        write_file(&with_suffix(out, ".json"), &json(&art))?;
    }
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match &cli.command {
        Command::Basis { opts, common } => cmd_basis(opts, common),
        Command::Kernel { opts, common } => cmd_kernel(opts, common),
        Command::Intensity { opts, common } => cmd_intensity(opts, common),
        Command::Simulate { opts, common } => cmd_simulate(opts, common),
        Command::Convergence { opts, common } => cmd_convergence(opts, common),
        Command::VarianceLimit { opts, common } => cmd_variance(opts, common),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            eprintln!("error: {}: {e}", e.name());
            ExitCode::from(1)
        }
    }
}
