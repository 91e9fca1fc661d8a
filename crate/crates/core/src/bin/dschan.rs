use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use dschan::harness::{
    emit_results, run_sweep, run_sweep_with_threads, run_trial, trial_seed, OutputFormat,
    PilotRule, SweepAxis, SweepSpec, SweepTable,
};
use dschan::{verify, Error, SystemConfig};

#[derive(Parser)]
#[command(
    name = "dschan",
    version,
    about = "Doubly-selective MIMO-OFDM channel estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE against SNR
    SweepSnr(SweepArgs),
    /// NMSE against normalized Doppler
    SweepDoppler(SweepArgs),
    /// NMSE against the number of transmit antennas (pilots grow with N_t)
    SweepAntennas(SweepArgs),
    /// Run a single trial and print its result as JSON
    Trial(CommonArgs),
    /// Check the dense operator identities behind the estimator
    Verify,
}

#[derive(Args)]
struct CommonArgs {
    /// TOML file with a `[system]` table and optional sweep fields
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Start from N = 1024, G = 96 instead of the desk-scale defaults
    #[arg(long, visible_alias = "paper-scale")]
    full_scale: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonArgs,
    #[arg(long)]
    trials: Option<usize>,
    /// Comma-separated sweep points
    #[arg(long, value_delimiter = ',')]
    points: Option<Vec<f64>>,
    #[arg(long, default_value = "results.csv")]
    out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Optional SVG line chart
    #[arg(long)]
    plot: Option<PathBuf>,
    /// Worker threads (defaults to all cores)
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    system: Option<SystemConfig>,
    trials: Option<usize>,
    points: Option<Vec<f64>>,
    pilot_rule: Option<PilotRule>,
}

fn load_config(path: &PathBuf) -> Result<ConfigFile, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    toml::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

fn base_config(common: &CommonArgs, file: Option<&ConfigFile>) -> SystemConfig {
    let mut cfg = file.and_then(|f| f.system.clone()).unwrap_or_else(|| {
        if common.full_scale {
            SystemConfig::full_scale()
        } else {
            SystemConfig::desk_scale()
        }
    });
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    cfg
}

fn sweep(axis: SweepAxis, args: &SweepArgs) -> Result<SweepTable, Error> {
    let file = args.common.config.as_ref().map(load_config).transpose()?;
    let mut base = base_config(&args.common, file.as_ref());
    let (default_points, default_rule) = match axis {
        SweepAxis::SnrDb => (
            vec![0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
            PilotRule::Fixed,
        ),
        SweepAxis::DopplerNorm => (vec![0.02, 0.057, 0.1, 0.15, 0.2], PilotRule::Fixed),
        SweepAxis::Antennas => {
            // G = 3 K N_t needs room for N_t = 25
            if file.as_ref().and_then(|f| f.system.as_ref()).is_none() {
                base.subcarriers = base.subcarriers.max(1024);
            }
            (vec![4.0, 9.0, 16.0, 25.0], PilotRule::Proportional)
        }
    };
    let spec = SweepSpec {
        base,
        axis,
        points: args
            .points
            .clone()
            .or_else(|| file.as_ref().and_then(|f| f.points.clone()))
            .unwrap_or(default_points),
        trials: args
            .trials
            .or_else(|| file.as_ref().and_then(|f| f.trials))
            .unwrap_or(200),
        pilot_rule: file
            .as_ref()
            .and_then(|f| f.pilot_rule)
            .unwrap_or(default_rule),
    };
    let table = match args.threads {
        Some(t) => run_sweep_with_threads(&spec, t)?,
        None => run_sweep(&spec)?,
    };
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    emit_results(&table, &spec, format, &args.out, args.plot.as_deref())?;
    Ok(table)
}

fn print_table(table: &SweepTable) {
    println!(
        "{:>10}  {:<20} {:>10} {:>8} {:>7} {:>6}",
        "point", "estimator", "NMSE dB", "stderr", "mu", "hit"
    );
    for r in &table.rows {
        let fmt = |v: Option<f64>, p: usize| v.map_or("n/a".to_string(), |x| format!("{x:.p$}"));
        println!(
            "{:>10}  {:<20} {:>10} {:>8} {:>7.3} {:>6}",
            r.axis_value,
            r.estimator.label(),
            fmt(r.mean_nmse_db, 2),
            fmt(r.stderr, 2),
            r.mu_phi,
            fmt(r.support_hit_rate, 2)
        );
    }
    if !table.failures.is_empty() {
        eprintln!("{} trial(s) failed", table.failures.len());
    }
}

fn run(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::SweepSnr(a) => print_table(&sweep(SweepAxis::SnrDb, &a)?),
        Command::SweepDoppler(a) => print_table(&sweep(SweepAxis::DopplerNorm, &a)?),
        Command::SweepAntennas(a) => print_table(&sweep(SweepAxis::Antennas, &a)?),
        Command::Trial(common) => {
            let file = common.config.as_ref().map(load_config).transpose()?;
            let cfg = base_config(&common, file.as_ref());
            let result = run_trial(&cfg, trial_seed(cfg.seed, 0, 0))?;
            println!(
                "{}",
                serde_json::to_string_pretty(&result).map_err(|e| Error::Format(e.to_string()))?
            );
        }
        Command::Verify => {
            let mut ok = true;
            for check in verify::run_all() {
                println!(
                    "[{}] {}: {}",
                    if check.passed { "PASS" } else { "FAIL" },
                    check.name,
                    check.detail
                );
                ok &= check.passed;
            }
            return Ok(ok);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
