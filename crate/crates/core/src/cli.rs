//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 for input errors, 3 for numerical failures.
//! Errors are reported on stderr as a single `ERROR <code> <message>` line.

use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::diagnostics::{default_k, hill_estimator, TailEstimate};
use crate::error::{Error, Result};
use crate::harness::{
    emit_tables, parse_experiment, run_experiment, CellResult, McExperiment, TableFormat,
};
use crate::io::{export_csv, parse_csv};
use crate::panel::TimeSeriesPanel;
use crate::parse::{
    parse_algorithm, parse_innovations, parse_level_kind, parse_list, parse_quadrature,
    parse_scale, parse_transform,
};
use crate::preprocess::{apply_chain, Transform};
use crate::rank::{estimate, resolve_alpha, Algorithm, LevelSchedule, RankEstimate};
use crate::rtest::RandTestConfig;
use crate::simulate::{simulate_panel, DgpConfig, ScaleFn};
use crate::spectra::{moment_matrices, panel_spectrum, EigenSpectrum};
use crate::trends::{identify, pc_decompose};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "TRENDRANK_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "trendrank",
    version,
    about = "Common stochastic trends in heavy-tailed panels"
)]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate the number of common trends.
    Estimate(EstimateArgs),
    /// Estimate loadings and common trends.
    Trends(TrendsArgs),
    /// Simulate a panel from the VAR(1) design.
    Simulate(SimulateArgs),
    /// Run a Monte Carlo experiment described by a key = value file.
    Mc(McArgs),
    /// Hill tail-index estimate for every series.
    Hill(HillArgs),
}

#[derive(Debug, Args, Clone)]
pub struct InputArgs {
    /// CSV panel; `-` or absent reads stdin.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Output file; absent writes stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Comma-separated transforms applied in order: log, demean, detrend, initial.
    #[arg(long, default_value = "")]
    pub transform: String,
}

#[derive(Debug, Args, Clone)]
pub struct TestArgs {
    #[arg(long, default_value_t = 1e-4)]
    pub kappa: f64,
    /// Artificial draws per test.
    #[arg(long, default_value_t = 100)]
    pub m_draws: usize,
    /// gh2, gh4, or grid(u:w, ...).
    #[arg(long, default_value = "gh2")]
    pub quadrature: String,
    /// over-t, over-log-t, over-n, or fixed:<alpha>.
    #[arg(long, default_value = "over-t")]
    pub schedule: String,
    #[arg(long, default_value_t = 0.05)]
    pub alpha_base: f64,
    /// Strong-rule repetitions (1 = single randomized test).
    #[arg(long, default_value_t = 1)]
    pub s_reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Ridge added to S00 before inversion.
    #[arg(long, default_value_t = 0.0)]
    pub ridge: f64,
    /// bottom-up or top-down.
    #[arg(long, default_value = "bottom-up")]
    pub algorithm: String,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub test: TestArgs,
}

#[derive(Debug, Args)]
pub struct TrendsArgs {
    #[command(flatten)]
    pub io: InputArgs,
    #[command(flatten)]
    pub test: TestArgs,
    /// Number of trends; estimated when absent.
    #[arg(long)]
    pub m: Option<usize>,
    /// 1-based series indices whose loadings are normalized to the identity.
    #[arg(long)]
    pub identify: Option<String>,
    #[arg(long)]
    pub loadings_csv: Option<PathBuf>,
    #[arg(long)]
    pub trends_csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub t: usize,
    /// Tail index, or `gauss`.
    #[arg(long, default_value = "2")]
    pub eta: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// none, steps(c:h, ...), or poly(a0, a1, ...).
    #[arg(long, default_value = "none")]
    pub scale: String,
    #[arg(long, default_value_t = 0)]
    pub burn_in: usize,
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub d_seed: u64,
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct McArgs {
    /// Experiment file; must set `seed`.
    #[arg(long)]
    pub config: PathBuf,
    /// csv, json, or text.
    #[arg(long, default_value = "csv")]
    pub format: String,
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Keep per-cell wall times in JSON output (makes output non-reproducible).
    #[arg(long)]
    pub timings: bool,
}

#[derive(Debug, Args)]
pub struct HillArgs {
    #[command(flatten)]
    pub io: InputArgs,
    /// Order statistics; defaults to round(sqrt(n)).
    #[arg(long)]
    pub k: Option<usize>,
    /// Use levels instead of first differences.
    #[arg(long)]
    pub levels: bool,
}

#[derive(Debug, Clone, Serialize)]
struct TestEcho {
    kappa: f64,
    m_draws: usize,
    quadrature: String,
    schedule: String,
    alpha_base: f64,
    alpha: f64,
    s_reps: usize,
    seed: u64,
    ridge: f64,
    algorithm: &'static str,
}

#[derive(Debug, Serialize)]
struct InputEcho {
    input: String,
    transforms: Vec<Transform>,
    n: usize,
    t: usize,
    series: Vec<String>,
}

#[derive(Debug, Serialize)]
struct EstimateOutput<'a> {
    command: &'static str,
    input: InputEcho,
    config: TestEcho,
    m_hat: usize,
    algorithm: &'static str,
    alpha_used: f64,
    trail: &'a [crate::rank::TrailStep],
    spectrum: &'a EigenSpectrum,
}

#[derive(Debug, Serialize)]
struct TrendsOutput {
    command: &'static str,
    input: InputEcho,
    config: Option<TestEcho>,
    m: usize,
    m_estimated: bool,
    identified: bool,
    /// Series name of every loading row.
    ordering: Vec<String>,
    loadings: Vec<Vec<f64>>,
    rotation: Vec<Vec<f64>>,
    trends: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct HillSeries {
    name: String,
    estimate: Option<TailEstimate>,
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct HillOutput {
    command: &'static str,
    input: InputEcho,
    data: &'static str,
    k: Option<usize>,
    series: Vec<HillSeries>,
}

#[derive(Debug, Serialize)]
struct McOutput<'a> {
    command: &'static str,
    config: &'a McExperiment,
    cells: &'a [CellResult],
}

fn rows_of(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn parse_transforms(s: &str) -> Result<Vec<Transform>> {
    if s.trim().is_empty() {
        Ok(Vec::new())
    } else {
        parse_list(s, parse_transform)
    }
}

struct ResolvedTest {
    config: RandTestConfig,
    schedule: LevelSchedule,
    ridge: f64,
    algorithm: Algorithm,
    echo: TestEcho,
}

fn resolve_test(args: &TestArgs) -> Result<ResolvedTest> {
    let config = RandTestConfig {
        kappa: args.kappa,
        m_draws: args.m_draws,
        quadrature: parse_quadrature(&args.quadrature)?,
        alpha: 0.05,
        s_reps: args.s_reps,
        seed: args.seed,
    };
    config.validate()?;
    let schedule = LevelSchedule {
        kind: parse_level_kind(&args.schedule)?,
        base: args.alpha_base,
    };
    let algorithm = parse_algorithm(&args.algorithm)?;
    if !(args.ridge >= 0.0 && args.ridge.is_finite()) {
        return Err(Error::InvalidConfig(
            "ridge must be a finite non-negative number".into(),
        ));
    }
    let echo = TestEcho {
        kappa: args.kappa,
        m_draws: args.m_draws,
        quadrature: args.quadrature.clone(),
        schedule: args.schedule.clone(),
        alpha_base: args.alpha_base,
        alpha: f64::NAN,
        s_reps: args.s_reps,
        seed: args.seed,
        ridge: args.ridge,
        algorithm: algorithm.name(),
    };
    Ok(ResolvedTest {
        config,
        schedule,
        ridge: args.ridge,
        algorithm,
        echo,
    })
}

fn load_input(args: &InputArgs, stdin: &mut dyn Read) -> Result<(TimeSeriesPanel, InputEcho)> {
    let transforms = parse_transforms(&args.transform)?;
    let (label, text) = match &args.input {
        Some(p) if p != Path::new("-") => (p.display().to_string(), std::fs::read_to_string(p)?),
        _ => {
            let mut s = String::new();
            stdin.read_to_string(&mut s)?;
            ("-".to_string(), s)
        }
    };
    let raw = parse_csv(&text)?;
    let panel = apply_chain(&raw, &transforms)?;
    let echo = InputEcho {
        input: label,
        transforms,
        n: panel.n_series(),
        t: panel.t_len(),
        series: panel.series_names().to_vec(),
    };
    Ok((panel, echo))
}

fn write_output(path: &Option<PathBuf>, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) if p != Path::new("-") => std::fs::write(p, body)?,
        _ => stdout.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

fn rank_panel(
    panel: &TimeSeriesPanel,
    rt: &mut ResolvedTest,
) -> Result<(EigenSpectrum, RankEstimate)> {
    let spectrum = panel_spectrum(panel, rt.ridge)?;
    rt.echo.alpha = resolve_alpha(&rt.schedule, panel.t_len(), panel.n_series())?;
    let est = estimate(
        &spectrum,
        panel.t_len(),
        &rt.config,
        &rt.schedule,
        rt.algorithm,
    )?;
    Ok((spectrum, est))
}

fn cmd_estimate(args: &EstimateArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<()> {
    let mut rt = resolve_test(&args.test)?;
    let (panel, input) = load_input(&args.io, stdin)?;
    let (spectrum, est) = rank_panel(&panel, &mut rt)?;
    let out = EstimateOutput {
        command: "estimate",
        input,
        config: rt.echo.clone(),
        m_hat: est.m_hat,
        algorithm: est.algorithm.name(),
        alpha_used: est.alpha_used,
        trail: &est.trail,
        spectrum: &spectrum,
    };
    write_output(&args.io.output, &to_json(&out)?, stdout)
}

fn parse_identify(s: &str) -> Result<Vec<usize>> {
    parse_list(s, |x| {
        let k = crate::parse::parse_usize(x)?;
        if k == 0 {
            Err(Error::InvalidOrdering("series indices are 1-based".into()))
        } else {
            Ok(k - 1)
        }
    })
}

fn cmd_trends(args: &TrendsArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<()> {
    let mut rt = resolve_test(&args.test)?;
    let ordering = args.identify.as_deref().map(parse_identify).transpose()?;
    let (panel, input) = load_input(&args.io, stdin)?;
    let mp = moment_matrices(&panel)?;
    let (m, estimated, echo) = match args.m {
        Some(m) => (m, false, None),
        None => {
            let (_, est) = rank_panel(&panel, &mut rt)?;
            (est.m_hat, true, Some(rt.echo.clone()))
        }
    };
    let mut dec = pc_decompose(&panel, m, &mp)?;
    if let Some(order) = &ordering {
        dec = identify(&dec, order)?;
    }
    let names = panel.series_names();
    let ordering_names: Vec<String> = dec.ordering.iter().map(|&i| names[i].clone()).collect();

    if let Some(path) = &args.loadings_csv {
        let mut w = csv::Writer::from_writer(Vec::new());
        let mut header = vec!["series".to_string()];
        header.extend((1..=m).map(|k| format!("trend_{k}")));
        w.write_record(&header)
            .map_err(|e| Error::Io(e.to_string()))?;
        for (r, name) in ordering_names.iter().enumerate() {
            let mut row = vec![name.clone()];
            row.extend((0..m).map(|c| dec.loadings[(r, c)].to_string()));
            w.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
        }
        std::fs::write(path, w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
    }
    if let Some(path) = &args.trends_csv {
        let names: Vec<String> = (1..=m).map(|k| format!("trend_{k}")).collect();
        let tp = TimeSeriesPanel::with_names(dec.trends.clone(), names)?;
        std::fs::write(path, export_csv(&tp))?;
    }
    let out = TrendsOutput {
        command: "trends",
        input,
        config: echo,
        m,
        m_estimated: estimated,
        identified: dec.identified,
        ordering: ordering_names,
        loadings: rows_of(&dec.loadings),
        rotation: rows_of(&dec.rotation),
        trends: rows_of(&dec.trends),
    };
    write_output(&args.io.output, &to_json(&out)?, stdout)
}

fn cmd_simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let scale: ScaleFn = parse_scale(&args.scale)?;
    let cfg = DgpConfig {
        n_dim: args.n,
        m_trends: args.m,
        t_len: args.t,
        innovations: parse_innovations(&args.eta)?,
        ar_theta: args.theta,
        scale_fn: scale,
        burn_in: args.burn_in,
        seed: args.seed,
        d_matrix_seed: args.d_seed,
    };
    let panel = simulate_panel(&cfg)?;
    let echo = serde_json::to_string(&cfg).map_err(|e| Error::Io(e.to_string()))?;
    let body = format!("# trendrank simulate {echo}\n{}", export_csv(&panel));
    write_output(&args.output, &body, stdout)
}

fn thread_cap() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(Error::InvalidConfig(format!(
                "{THREADS_ENV} must be a positive integer, got '{v}'"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn cmd_mc(args: &McArgs, stdout: &mut dyn Write) -> Result<()> {
    let format: TableFormat = args.format.parse()?;
    let exp = parse_experiment(&std::fs::read_to_string(&args.config)?)?;
    let mut results = match thread_cap()? {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(|| run_experiment(&exp))?,
        None => run_experiment(&exp)?,
    };
    if !args.timings {
        for r in &mut results {
            r.cell.wall_time = 0.0;
        }
    }
    let body = match format {
        TableFormat::Json => to_json(&McOutput {
            command: "mc",
            config: &exp,
            cells: &results,
        })?,
        _ => {
            let echo = serde_json::to_string(&exp).map_err(|e| Error::Io(e.to_string()))?;
            let table = emit_tables(&results, format)?;
            if format == TableFormat::Csv {
                format!("# trendrank mc {echo}\n{table}")
            } else {
                table
            }
        }
    };
    write_output(&args.output, &body, stdout)
}

fn cmd_hill(args: &HillArgs, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<()> {
    let (panel, input) = load_input(&args.io, stdin)?;
    let data = if args.levels {
        panel.values().clone()
    } else {
        panel.differences()
    };
    let series = panel
        .series_names()
        .iter()
        .enumerate()
        .map(|(i, name)| {
            let x: Vec<f64> = data.row(i).iter().copied().collect();
            let k = args.k.unwrap_or_else(|| default_k(x.len()));
            match hill_estimator(&x, k) {
                Ok(e) => HillSeries {
                    name: name.clone(),
                    estimate: Some(e),
                    error: None,
                },
                Err(e) => HillSeries {
                    name: name.clone(),
                    estimate: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let out = HillOutput {
        command: "hill",
        input,
        data: if args.levels { "levels" } else { "differences" },
        k: args.k,
        series,
    };
    write_output(&args.io.output, &to_json(&out)?, stdout)
}

/// Run a parsed command.
pub fn run(config: &RunConfig, stdin: &mut dyn Read, stdout: &mut dyn Write) -> Result<()> {
    match &config.command {
        Command::Estimate(a) => cmd_estimate(a, stdin, stdout),
        Command::Trends(a) => cmd_trends(a, stdin, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
        Command::Mc(a) => cmd_mc(a, stdout),
        Command::Hill(a) => cmd_hill(a, stdin, stdout),
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_input_error() {
        EXIT_INPUT
    } else {
        EXIT_NUMERIC
    }
}

/// Parse arguments, run, and report errors. Returns the process exit code.
pub fn main_with_args<I, T>(
    args: I,
    stdin: &mut dyn Read,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let config = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return EXIT_OK;
            }
            let msg = e.to_string();
            let first = msg
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            let _ = writeln!(stderr, "ERROR Usage {first}");
            return EXIT_INPUT;
        }
    };
    match run(&config, stdin, stdout) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let msg = e.to_string().replace('\n', " ");
            let _ = writeln!(stderr, "ERROR {} {msg}", e.code());
            exit_code(&e)
        }
    }
}
