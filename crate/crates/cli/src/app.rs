//! Argument parsing and subcommand dispatch.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use uplink_bounds::nonfading::upper_bound;

use crate::cache::{cache_dir, cache_key, Cache, TOOL_VERSION};
use crate::config::{parse_config, Overrides};
use crate::error::{CliError, CliResult};
use crate::output::{parse_csv, read_rows, to_csv, write_file, ResultRow};
use crate::spec::{Mode, Scenario, SweepSpec};
use crate::sweep::{check_invariants, run_point, run_sweep, RunOptions};
use crate::svg::render;
use crate::verify::{run_verify, Level};

#[derive(Debug, Parser)]
#[command(name = "uplink", version, about = "Throughput bounds for a two-cell uplink with two-state backhaul links")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep optimized non-fading throughputs and the upper bound.
    NfSweep(RunArgs),
    /// Sweep Monte Carlo fading throughputs.
    FadingSweep(RunArgs),
    /// Upper bound at the configured point, or along the configured sweep.
    UpperBound(RunArgs),
    /// Optimize every configured scheme and mode at the configured point.
    Optimize(RunArgs),
    /// Check closed forms against the Gaussian mutual-information oracle.
    Verify(VerifyArgs),
    /// Draw a results CSV as an SVG line chart.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    /// Experiment configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also draw the rows as an SVG chart.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Monte Carlo draws per point.
    #[arg(long)]
    pub samples: Option<usize>,
    /// Worker threads (all cores when absent).
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Neither read nor write the result cache.
    #[arg(long)]
    pub no_cache: bool,
    /// Optimizer refinement evaluations per search.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Fill the `ms` column with wall-clock times; implies --no-cache.
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum, default_value = "quick")]
    pub level: Level,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Report file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Added to the compression noises seen by the oracle.
    #[arg(long, hide = true, default_value_t = 0.0)]
    pub perturb_sigma: f64,
}

#[derive(Debug, Clone, Args)]
pub struct PlotArgs {
    /// Results CSV.
    pub input: PathBuf,
    /// SVG file (stdout when absent).
    #[arg(long)]
    pub svg: Option<PathBuf>,
    #[arg(long)]
    pub title: Option<String>,
}

/// Parses `args` and runs the subcommand, returning the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(command: Command) -> CliResult<()> {
    match command {
        Command::NfSweep(a) => sweep_command(&a, Scenario::Nonfading),
        Command::FadingSweep(a) => sweep_command(&a, Scenario::Fading),
        Command::UpperBound(a) => upper_bound_command(&a),
        Command::Optimize(a) => optimize_command(&a),
        Command::Verify(a) => verify_command(&a),
        Command::Plot(a) => plot_command(&a),
    }
}

fn load_spec(args: &RunArgs, scenario: Option<Scenario>) -> CliResult<SweepSpec> {
    let src = std::fs::read_to_string(&args.config).map_err(|e| CliError::io(&args.config, e))?;
    let overrides = Overrides {
        scenario,
        seed: args.seed,
        mc_samples: args.samples,
        budget: args.budget,
    };
    parse_config(&src, &overrides).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", args.config.display())),
        other => other,
    })
}

fn pool(jobs: Option<usize>) -> CliResult<rayon::ThreadPool> {
    if jobs == Some(0) {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} worker threads: {e}", jobs.unwrap_or(0))))
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn guard(rows: &[ResultRow]) -> CliResult<()> {
    check_invariants(rows).map_err(|e| CliError::Verification(format!("result ordering violated: {e}")))
}

/// Chart title naming the fixed parameters.
pub fn title(spec: &SweepSpec) -> String {
    let b = &spec.base;
    let swept = spec.sweep.as_ref().map(|s| s.param.name());
    let mut parts = Vec::new();
    let mut add = |name: &str, text: String| {
        if swept != Some(name) {
            parts.push(text);
        }
    };
    add("P_db", format!("P = {:.4} dB", 10.0 * b.power.log10()));
    add("alpha", format!("α = {}", b.alpha));
    add("C", format!("C = {}", b.cap_low));
    add("dC", format!("ΔC = {}", b.cap_delta));
    add("p", format!("p = {}", b.p_low));
    format!("{}: {}", spec.scenario, parts.join(", "))
}

/// Rows for `spec`, from the cache when possible. Returns the CSV text.
pub fn sweep_csv(spec: &SweepSpec, args: &RunArgs) -> CliResult<(String, Vec<ResultRow>)> {
    let use_cache = !args.no_cache && !args.timings;
    let cache = Cache::new(cache_dir());
    let key = cache_key(spec, TOOL_VERSION);
    if use_cache {
        if let Some(csv) = cache.lookup(&key) {
            match parse_csv(&csv) {
                Ok(rows) => {
                    log::info!("cache hit: served {} rows from {}", rows.len(), cache.entry_path(&key).display());
                    guard(&rows)?;
                    return Ok((csv, rows));
                }
                Err(e) => {
                    log::warn!("discarding corrupt cache entry {} ({e})", cache.entry_path(&key).display());
                    let _ = std::fs::remove_file(cache.entry_path(&key));
                }
            }
        }
    }
    let opts = RunOptions { timings: args.timings };
    let rows = pool(args.jobs)?.install(|| run_sweep(spec, opts))?;
    guard(&rows)?;
    let csv = to_csv(&rows);
    if use_cache {
        match cache.store(&key, &csv) {
            Ok(()) => log::info!("cache store: {}", cache.entry_path(&key).display()),
            Err(e) => log::warn!("could not write cache entry: {e}"),
        }
    }
    Ok((csv, rows))
}

fn finish_sweep(spec: &SweepSpec, args: &RunArgs) -> CliResult<()> {
    let (csv, rows) = sweep_csv(spec, args)?;
    emit(args.out.as_deref(), &csv)?;
    if let Some(svg) = &args.svg {
        write_file(svg, &render(&rows, &title(spec)))?;
    }
    Ok(())
}

fn sweep_command(args: &RunArgs, scenario: Scenario) -> CliResult<()> {
    let spec = load_spec(args, Some(scenario))?;
    if spec.sweep.is_none() {
        return Err(CliError::Config(format!(
            "{}: section [sweep] is required for a sweep",
            args.config.display()
        )));
    }
    finish_sweep(&spec, args)
}

fn upper_bound_command(args: &RunArgs) -> CliResult<()> {
    let mut spec = load_spec(args, Some(Scenario::Nonfading))?;
    spec.modes = vec![Mode::Upper];
    if spec.sweep.is_some() {
        return finish_sweep(&spec, args);
    }
    let report = upper_bound(&spec.base)?;
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))
}

fn optimize_command(args: &RunArgs) -> CliResult<()> {
    let spec = load_spec(args, None)?;
    let opts = RunOptions { timings: args.timings };
    let rows = pool(args.jobs)?.install(|| run_point(&spec, &spec.base, "none", 0.0, opts))?;
    guard(&rows)?;
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&rows).expect("rows serialize") + "\n"))?;
    if let Some(svg) = &args.svg {
        write_file(svg, &render(&rows, &title(&spec)))?;
    }
    Ok(())
}

fn verify_command(args: &VerifyArgs) -> CliResult<()> {
    if !args.perturb_sigma.is_finite() {
        return Err(CliError::Config("--perturb-sigma must be finite".into()));
    }
    let report = pool(args.jobs)?.install(|| run_verify(args.level, args.seed, args.perturb_sigma));
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&report).expect("report serializes") + "\n"))?;
    if report.passed {
        return Ok(());
    }
    for f in report.failures.iter().take(20) {
        eprintln!("FAILED {}: {} at {:?}", f.check, f.detail, f.params);
    }
    Err(CliError::Verification(format!("{} checks breached their tolerance", report.failures.len())))
}

fn plot_command(args: &PlotArgs) -> CliResult<()> {
    let rows = read_rows(&args.input)?;
    let title = args
        .title
        .clone()
        .unwrap_or_else(|| args.input.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());
    emit(args.svg.as_deref(), &render(&rows, &title))
}
