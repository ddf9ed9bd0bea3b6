use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use modspace::error::{Error, Result};
use modspace::grid::io::load_function;
use modspace::grid::TorusGrid;
use modspace::harness::{execute, resolve_workers, ExperimentConfig, Suite};
use modspace::norms::{norm_report, Space};
use modspace::partitions::{build_dyadic_partition, build_uniform_partition};

#[derive(Parser, Debug)]
#[command(name = "modspace", version, about = "Verification suites for weighted modulation and Besov norms")]
struct Cli {
    /// partition-check, retract-check, norm, embed-sweep, interp-verify or bernstein-sweep
    #[arg(value_parser = parse_suite)]
    suite: Suite,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, default `out/<suite>`
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,

    /// Single norm evaluation (`norm` without `--config`)
    #[arg(long, value_parser = parse_space)]
    space: Option<Space>,
    #[arg(long, value_parser = parse_exponent)]
    p: Option<f64>,
    #[arg(long, value_parser = parse_exponent)]
    q: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    s: Option<f64>,
    /// Grid binary file
    #[arg(long)]
    input: Option<PathBuf>,
    /// Uniform truncation, default the largest admissible value up to 12
    #[arg(long = "K")]
    truncation: Option<u32>,
    /// Top dyadic scale, default the largest admissible value up to 4
    #[arg(long = "J")]
    top: Option<u32>,
}

fn parse_suite(s: &str) -> std::result::Result<Suite, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_space(s: &str) -> std::result::Result<Space, String> {
    match s {
        "B" | "b" => Ok(Space::B),
        "M" | "m" => Ok(Space::M),
        "E" | "e" => Ok(Space::E),
        _ => Err(format!("unknown space {s}, expected B, M or E")),
    }
}

fn parse_exponent(s: &str) -> std::result::Result<f64, String> {
    match s {
        "inf" | "infinity" => Ok(f64::INFINITY),
        _ => s.parse().map_err(|e| format!("{e}")),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::InvalidExponent { .. } | Error::Theta(_) | Error::BumpRadius { .. } => 2,
        _ => 3,
    }
}

fn default_truncation(grid: &TorusGrid) -> u32 {
    let d = grid.dim() as f64;
    let top = (grid.samples() as f64 / 2.0 - 1.0) * grid.freq_spacing();
    let room = (top - d.sqrt().ceil() - 1.0).min(grid.nyquist() - d.sqrt() - 1e-9);
    (room.floor().max(0.0) as u32).min(12)
}

fn default_top(grid: &TorusGrid) -> u32 {
    let top = (grid.samples() as f64 / 2.0 - 1.0) * grid.freq_spacing();
    ((top - 1.0).max(1.0).log2().floor() as u32).saturating_sub(1).min(4)
}

fn single_norm(cli: &Cli) -> Result<u8> {
    let missing = |name: &str| Error::Config(format!("norm without --config needs --{name}"));
    let space = cli.space.ok_or_else(|| missing("space"))?;
    let p = cli.p.ok_or_else(|| missing("p"))?;
    let q = cli.q.ok_or_else(|| missing("q"))?;
    let s = cli.s.ok_or_else(|| missing("s"))?;
    let input = cli.input.as_ref().ok_or_else(|| missing("input"))?;
    let f = load_function(input)?;
    let grid = *f.grid();
    let family = match space {
        Space::B => build_dyadic_partition(&grid, cli.top.unwrap_or_else(|| default_top(&grid)))?,
        Space::M | Space::E => {
            build_uniform_partition(&grid, cli.truncation.unwrap_or_else(|| default_truncation(&grid)), None)?
        }
    };
    let report = norm_report(space, &f, &family, p, q, s)?;
    let out = json!({ "value": report.value, "pieces": report.pieces });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    let Some(path) = &cli.config else {
        if cli.suite == Suite::Norm {
            return single_norm(cli);
        }
        return Err(Error::Config(format!("{} needs --config", cli.suite)));
    };
    let mut config = ExperimentConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    let workers = resolve_workers(cli.workers, &config);
    let out = cli
        .out
        .clone()
        .or_else(|| config.output.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out").join(cli.suite.name()));
    let report = execute(&config, cli.suite, &out, workers)?;
    let summary = json!({
        "suite": report.suite,
        "passed": report.passed,
        "cases": report.cases,
        "assertions": report.assertions,
        "warnings": report.warnings,
        "output": out,
    });
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(if report.passed { 0 } else { 1 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
