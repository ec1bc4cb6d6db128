//! `qns`: command-line driver for the network simulator.

use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qns_core::analysis::{
    entanglement_rate, estimate_logical_error_rate, estimate_threshold, final_state_noise,
    fit_threshold_line, long_chain_error, to_json_line, with_workers, write_rate_csv, RateRow,
    ThresholdPoint,
};
use qns_core::config::RunConfig;
use qns_core::noise::{enumerate_fault_classes, full_rates, PhysicalNoise};
use qns_core::Error;

#[derive(Parser)]
#[command(
    name = "qns",
    version,
    about = "Surface-code entanglement distribution simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Effective phenomenological rates and final-state noise.
    Rates(NoiseArgs),
    /// Logical error rate of one configuration, as CSV.
    Simulate(RunArgs),
    /// Threshold sweep over ratios and sizes: CSV plus JSON estimates and fit.
    Threshold(RunArgs),
    /// Circuit-level fault count against the closed-form coefficients.
    Faults(NoiseArgs),
    /// Link success probability, ebit rate and long-chain error.
    RateCalc(RateArgs),
}

#[derive(Args)]
struct NoiseArgs {
    /// Werner noise parameter of each Bell pair.
    #[arg(long, default_value_t = 0.0)]
    q: f64,
    /// Local operation depolarizing rate.
    #[arg(long, default_value_t = 0.0)]
    p: f64,
    /// Memory depolarizing rate per generation window.
    #[arg(long = "pm", alias = "p-m", default_value_t = 0.0)]
    p_m: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Flat key-value config file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// `torus` or `network`.
    #[arg(long)]
    geometry: Option<String>,
    /// Torus code distance.
    #[arg(long, short = 'd')]
    distance: Option<usize>,
    #[arg(long)]
    alice_bob_distance: Option<usize>,
    #[arg(long)]
    margin: Option<usize>,
    /// Stabilizer rounds (default: distance, or margin for networks).
    #[arg(long)]
    rounds: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long = "pm", alias = "p-m")]
    p_m: Option<f64>,
    #[arg(long)]
    eps_s: Option<f64>,
    #[arg(long)]
    eps_e: Option<f64>,
    #[arg(long)]
    eps_c: Option<f64>,
    /// eps_S / eps_E.
    #[arg(long)]
    ratio: Option<f64>,
    /// Comma-separated ratios for `threshold`.
    #[arg(long)]
    ratios: Option<String>,
    /// Comma-separated torus distances for `threshold`.
    #[arg(long)]
    sizes: Option<String>,
    /// Comma-separated eps_E grid for `threshold` (default: coarse scan).
    #[arg(long)]
    grid: Option<String>,
    #[arg(long)]
    bootstrap: Option<usize>,
    /// Trials per configuration.
    #[arg(long, short = 'n')]
    trials: Option<u64>,
    #[arg(long, env = "QNS_SEED")]
    seed: Option<u64>,
    /// Worker threads (0 = one per core). Never changes the output.
    #[arg(long, short = 'j')]
    workers: Option<usize>,
    /// `likelihood` or `unit` matching weights.
    #[arg(long)]
    weights: Option<String>,
    /// CSV destination (default: stdout).
    #[arg(long, short = 'o')]
    output: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<RunConfig, Failure> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure::io(path, e))?;
                RunConfig::parse(&text)?
            }
            None => RunConfig::default(),
        };
        cfg.merge(&RunConfig {
            geometry: self.geometry.clone(),
            distance: self.distance,
            alice_bob_distance: self.alice_bob_distance,
            margin: self.margin,
            rounds: self.rounds,
            q: self.q,
            p: self.p,
            p_m: self.p_m,
            eps_s: self.eps_s,
            eps_e: self.eps_e,
            eps_c: self.eps_c,
            ratio: self.ratio,
            trials: self.trials,
            seed: self.seed,
            workers: self.workers,
            output: self.output.clone(),
            weights: self.weights.clone(),
            sizes: self.sizes.clone(),
            ratios: self.ratios.clone(),
            grid: self.grid.clone(),
            bootstrap: self.bootstrap,
        });
        Ok(cfg)
    }
}

#[derive(Args)]
struct RateArgs {
    /// Link length in km.
    #[arg(long, default_value_t = 10.0)]
    distance_km: f64,
    /// Fibre attenuation in dB/km.
    #[arg(long, default_value_t = 0.2)]
    attenuation: f64,
    /// Generation window T in seconds.
    #[arg(long, default_value_t = 0.2e-3)]
    window: f64,
    /// Attempts per window (sets the attempt time to window / attempts).
    #[arg(long, default_value_t = 6, conflicts_with = "attempt_time")]
    attempts: u64,
    /// Duration of one attempt in seconds.
    #[arg(long)]
    attempt_time: Option<f64>,
    /// Stabilizer rounds N.
    #[arg(long, default_value_t = 25)]
    rounds: u64,
    /// Nodes L along the chain.
    #[arg(long, default_value_t = 1e5)]
    length: f64,
    /// Decay constant of long error chains.
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
}

/// An error together with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn io(path: impl std::fmt::Debug, e: io::Error) -> Self {
        Failure {
            code: 1,
            message: format!("{path:?}: {e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Io(_) => 1,
            Error::Csv(c) if c.is_io_error() => 1,
            Error::NoCrossing { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Rates(a) => cmd_rates(&a),
        Command::Simulate(a) => cmd_simulate(&a.resolve()?),
        Command::Threshold(a) => cmd_threshold(&a.resolve()?),
        Command::Faults(a) => cmd_faults(&a),
        Command::RateCalc(a) => cmd_rate_calc(&a),
    }
}

fn print_json<T: serde::Serialize>(out: &mut impl Write, record: &T) -> Result<(), Failure> {
    writeln!(out, "{}", to_json_line(record)?)?;
    Ok(())
}

fn cmd_rates(a: &NoiseArgs) -> Result<(), Failure> {
    let noise = PhysicalNoise::new(a.q, a.p, a.p_m)?;
    let rates = full_rates(noise)?;
    let fidelity = final_state_noise(noise)?;
    let mut out = io::stdout().lock();
    print_json(&mut out, &rates)?;
    print_json(&mut out, &fidelity)?;
    writeln!(
        out,
        "{}",
        serde_json::json!({ "channel_error_rate": noise.channel_error_rate() })
    )?;
    Ok(())
}

fn cmd_faults(a: &NoiseArgs) -> Result<(), Failure> {
    let noise = PhysicalNoise::new(a.q, a.p, a.p_m)?;
    let report = enumerate_fault_classes(noise);
    io::stdout().lock().write_all(report.table().as_bytes())?;
    Ok(())
}

fn cmd_rate_calc(a: &RateArgs) -> Result<(), Failure> {
    let attempt_time = a
        .attempt_time
        .unwrap_or(a.window / a.attempts.max(1) as f64);
    let rate = entanglement_rate(
        a.distance_km,
        a.attenuation,
        attempt_time,
        a.window,
        a.rounds,
    )?;
    let eps_long = long_chain_error(a.length, a.rounds as f64, a.kappa)?;
    let mut out = io::stdout().lock();
    print_json(&mut out, &rate)?;
    writeln!(out, "{}", serde_json::json!({ "eps_long": eps_long }))?;
    Ok(())
}

/// CSV sink: a file when `output` is set, stdout otherwise.
fn open_output(cfg: &RunConfig) -> Result<Box<dyn Write>, Failure> {
    Ok(match &cfg.output {
        Some(path) if path != "-" => {
            Box::new(fs::File::create(path).map_err(|e| Failure::io(path, e))?)
        }
        _ => Box::new(io::stdout().lock()),
    })
}

fn cmd_simulate(cfg: &RunConfig) -> Result<(), Failure> {
    let trial = cfg.trial_config()?;
    let n = cfg.trials()?;
    let batch = with_workers(cfg.workers.unwrap_or(0), || {
        estimate_logical_error_rate(&trial, n)
    })??;
    write_rate_csv(open_output(cfg)?, &RateRow::from_batch(&batch))?;
    Ok(())
}

/// Writes the sweep CSV; JSON records go to stdout, or to stderr when the
/// CSV itself is on stdout.
fn cmd_threshold(cfg: &RunConfig) -> Result<(), Failure> {
    let opts = cfg.threshold_options()?;
    let ratios = cfg.ratio_list()?;
    let estimates = with_workers(cfg.workers.unwrap_or(0), || {
        ratios
            .iter()
            .map(|&r| estimate_threshold(r, &opts))
            .collect::<Result<Vec<_>, _>>()
    })??;
    let rows: Vec<RateRow> = estimates.iter().flat_map(RateRow::from_estimate).collect();
    let csv_on_stdout = !matches!(&cfg.output, Some(p) if p != "-");
    write_rate_csv(open_output(cfg)?, &rows)?;
    let mut json: Box<dyn Write> = if csv_on_stdout {
        Box::new(io::stderr().lock())
    } else {
        Box::new(io::stdout().lock())
    };
    for e in &estimates {
        print_json(
            &mut json,
            &serde_json::json!({
                "ratio": e.ratio,
                "eps_t": e.eps_t,
                "uncertainty": e.uncertainty,
                "crossings": e.crossings,
                "channel_error_rate": 0.75 * e.eps_t,
            }),
        )?;
    }
    if estimates.len() >= 2 {
        let points: Vec<ThresholdPoint> = estimates.iter().map(ThresholdPoint::from).collect();
        print_json(&mut json, &fit_threshold_line(&points)?)?;
    }
    Ok(())
}
