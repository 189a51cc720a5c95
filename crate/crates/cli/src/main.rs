//! Command-line front end: solve single runs, convergence studies,
//! Aitken order tables, and validation suites.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error.

use std::collections::HashMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use subdiff::analysis::RefinedParam;
use subdiff_cli::csvout;
use subdiff_cli::experiments::{
    aitken_cell, run_experiment, ExperimentConfig, ExperimentId, LevelRow,
};
use subdiff_cli::svg::{loglog_plot, Series};
use subdiff_cli::validate;

#[derive(Parser)]
#[command(
    name = "subdiff",
    about = "Space-time nonlocal diffusion experiments (L1 / weighted-operator scheme)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment at a single grid and report its errors.
    Solve(RunArgs),
    /// Refinement study: halve tau or h repeatedly and report errors/orders.
    Convergence(RunArgs),
    /// Aitken order table over (alpha, s) cells, time and space directions.
    OrderTable(TableArgs),
    /// Run validation suites; nonzero exit on any failure.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment id: green-alpha1 | sine-eigen | compact-support |
    /// variable-diffusivity | discrete-laplacian.
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    s: Option<f64>,
    /// Target grid spacing (the actual one closes the window exactly).
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    /// Window half-width.
    #[arg(long = "X")]
    x: Option<f64>,
    /// Time horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    refinements: Option<usize>,
    /// Which parameter the refinement halves: time | space.
    #[arg(long)]
    refine: Option<String>,
    /// CSV output path (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Optional log-log SVG plot of error_max.
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Worker thread count (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Enable the fixed-point/direct cross-check at sampled steps.
    #[arg(long, default_value_t = false)]
    cross_check: bool,
    /// Plain-text key=value defaults file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    /// variable-diffusivity (default) or discrete-laplacian.
    #[arg(long)]
    experiment: Option<String>,
    /// Comma-separated alpha values (rows).
    #[arg(long, default_value = "0.5,0.9")]
    alphas: String,
    /// Comma-separated s values (columns); ignored for discrete-laplacian.
    #[arg(long, default_value = "0.5,0.9")]
    ss: String,
    #[arg(long)]
    h: Option<f64>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long = "X")]
    x: Option<f64>,
    #[arg(long = "T")]
    horizon: Option<f64>,
    /// Directions to estimate: time | space | both.
    #[arg(long, default_value = "both")]
    direction: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long, default_value_t = false)]
    cross_check: bool,
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Suite id or "all".
    #[arg(long, default_value = "all")]
    suite: String,
}

fn read_config_file(path: &PathBuf) -> Result<HashMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let mut map = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(format!("config line {} is not key=value: '{raw}'", lineno + 1));
        };
        map.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn parse_from<T: FromStr>(map: &HashMap<String, String>, key: &str) -> Result<Option<T>, String>
where
    T::Err: std::fmt::Display,
{
    match map.get(key) {
        None => Ok(None),
        Some(v) => v
            .parse::<T>()
            .map(Some)
            .map_err(|e| format!("config key '{key}': {e}")),
    }
}

fn refine_from(s: &str) -> Result<RefinedParam, String> {
    match s {
        "time" => Ok(RefinedParam::Time),
        "space" => Ok(RefinedParam::Space),
        other => Err(format!("--refine must be 'time' or 'space', got '{other}'")),
    }
}

fn build_config(args: &RunArgs, single: bool) -> Result<ExperimentConfig, String> {
    let file = match &args.config {
        Some(p) => read_config_file(p)?,
        None => HashMap::new(),
    };
    let experiment = args
        .experiment
        .clone()
        .or_else(|| file.get("experiment").cloned())
        .ok_or("missing --experiment")?;
    let id = ExperimentId::from_str(&experiment).map_err(|e| e.to_string())?;
    let mut cfg = ExperimentConfig::defaults(id);
    if let Some(v) = parse_from::<f64>(&file, "alpha")? {
        cfg.alpha = v;
    }
    if let Some(v) = parse_from::<f64>(&file, "s")? {
        cfg.s = v;
    }
    if let Some(v) = parse_from::<f64>(&file, "h")? {
        cfg.h = v;
    }
    if let Some(v) = parse_from::<f64>(&file, "tau")? {
        cfg.tau = v;
    }
    if let Some(v) = parse_from::<f64>(&file, "X")? {
        cfg.half_width = v;
    }
    if let Some(v) = parse_from::<f64>(&file, "T")? {
        cfg.horizon = v;
    }
    if let Some(v) = parse_from::<usize>(&file, "refinements")? {
        cfg.refinements = v;
    }
    if let Some(v) = file.get("refine") {
        cfg.refine = refine_from(v)?;
    }
    if let Some(v) = args.alpha {
        cfg.alpha = v;
    }
    if let Some(v) = args.s {
        cfg.s = v;
    }
    if let Some(v) = args.h {
        cfg.h = v;
    }
    if let Some(v) = args.tau {
        cfg.tau = v;
    }
    if let Some(v) = args.x {
        cfg.half_width = v;
    }
    if let Some(v) = args.horizon {
        cfg.horizon = v;
    }
    if let Some(v) = args.refinements {
        cfg.refinements = v;
    }
    if let Some(v) = &args.refine {
        cfg.refine = refine_from(v)?;
    }
    cfg.cross_check = args.cross_check;
    if single {
        cfg.refinements = 1;
    }
    Ok(cfg)
}

fn init_threads(threads: Option<usize>) -> Result<(), String> {
    if let Some(n) = threads {
        if n > 0 {
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build_global()
                .map_err(|e| format!("thread pool: {e}"))?;
        }
    }
    Ok(())
}

fn emit_rows(rows: &[LevelRow], out: &Option<PathBuf>) -> Result<(), String> {
    let text = csvout::to_string(rows);
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_svg(rows: &[LevelRow], cfg: &ExperimentConfig, path: &PathBuf) -> Result<(), String> {
    let axis = match cfg.refine {
        RefinedParam::Time => "tau",
        RefinedParam::Space => "h",
    };
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| {
            let x = match cfg.refine {
                RefinedParam::Time => r.tau,
                RefinedParam::Space => r.h,
            };
            (x, r.error_max)
        })
        .collect();
    let series = vec![Series {
        label: format!("{} alpha={} s={}", rows[0].experiment, cfg.alpha, cfg.s),
        points,
    }];
    let text = loglog_plot(
        &format!("{} error vs {axis}", rows[0].experiment),
        axis,
        "sup error",
        &series,
    );
    std::fs::write(path, text).map_err(|e| format!("write {}: {e}", path.display()))
}

fn run_study(args: &RunArgs, single: bool) -> Result<u8, String> {
    init_threads(args.threads)?;
    let cfg = build_config(args, single)?;
    let outcome = run_experiment(&cfg).map_err(|e| e.to_string())?;
    for (level, msg) in &outcome.failures {
        eprintln!("warning: level {level} failed: {msg}");
    }
    emit_rows(&outcome.rows, &args.out)?;
    if let Some(svg) = &args.svg {
        if outcome.rows.is_empty() {
            return Err("no rows to plot".into());
        }
        emit_svg(&outcome.rows, &cfg, svg)?;
    }
    if args.cross_check && outcome.cross_check_max.is_finite() {
        eprintln!("cross-check max disagreement: {:.3e}", outcome.cross_check_max);
    }
    Ok(0)
}

fn run_table(args: &TableArgs) -> Result<u8, String> {
    init_threads(args.threads)?;
    let experiment = args
        .experiment
        .clone()
        .unwrap_or_else(|| "variable-diffusivity".to_string());
    let id = ExperimentId::from_str(&experiment).map_err(|e| e.to_string())?;
    if id.has_exact_reference() {
        return Err(format!(
            "order-table drives the no-exact-solution experiments; '{experiment}' has a reference"
        ));
    }
    let alphas: Vec<f64> = args
        .alphas
        .split(',')
        .map(|v| v.trim().parse::<f64>().map_err(|e| format!("--alphas: {e}")))
        .collect::<Result<_, _>>()?;
    let ss: Vec<f64> = if id == ExperimentId::DiscreteLaplacian {
        vec![1.0]
    } else {
        args.ss
            .split(',')
            .map(|v| v.trim().parse::<f64>().map_err(|e| format!("--ss: {e}")))
            .collect::<Result<_, _>>()?
    };
    let directions: Vec<RefinedParam> = match args.direction.as_str() {
        "time" => vec![RefinedParam::Time],
        "space" => vec![RefinedParam::Space],
        "both" => {
            if id == ExperimentId::DiscreteLaplacian {
                vec![RefinedParam::Time]
            } else {
                vec![RefinedParam::Time, RefinedParam::Space]
            }
        }
        other => return Err(format!("--direction must be time|space|both, got '{other}'")),
    };

    let mut rows = Vec::new();
    for &alpha in &alphas {
        for &s in &ss {
            for &dir in &directions {
                let mut cfg = ExperimentConfig::defaults(id);
                cfg.alpha = alpha;
                cfg.s = s;
                cfg.cross_check = args.cross_check;
                if let Some(v) = args.h {
                    cfg.h = v;
                }
                if let Some(v) = args.tau {
                    cfg.tau = v;
                }
                if let Some(v) = args.x {
                    cfg.half_width = v;
                }
                if let Some(v) = args.horizon {
                    cfg.horizon = v;
                }
                let started = std::time::Instant::now();
                let (d1, d2, p, _cross) =
                    aitken_cell(&cfg, dir).map_err(|e| e.to_string())?;
                let tag = match dir {
                    RefinedParam::Time => "time-order",
                    RefinedParam::Space => "space-order",
                };
                rows.push(LevelRow {
                    experiment: format!("{}:{tag}", id.name()),
                    alpha,
                    s,
                    h: cfg.h,
                    tau: cfg.tau,
                    half_width: cfg.half_width,
                    horizon: cfg.horizon,
                    error_max: d1,
                    error_at_final: d2,
                    order_est: p,
                    runtime_seconds: started.elapsed().as_secs_f64(),
                });
            }
        }
    }
    emit_rows(&rows, &args.out)?;
    Ok(0)
}

fn run_validate(args: &ValidateArgs) -> Result<u8, String> {
    let results = validate::run_suite(&args.suite).map_err(|e| e.to_string())?;
    let mut failures = 0usize;
    for r in &results {
        let tag = if r.passed { "PASS" } else { "FAIL" };
        println!("{tag} {}: {}", r.name, r.detail);
        if !r.passed {
            failures += 1;
        }
    }
    println!(
        "{} checks, {} failed",
        results.len(),
        failures
    );
    Ok(if failures == 0 { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(args) => run_study(args, true),
        Command::Convergence(args) => run_study(args, false),
        Command::OrderTable(args) => run_table(args),
        Command::Validate(args) => run_validate(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
