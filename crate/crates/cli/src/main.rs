//! Command-line front end for the rate-splitting interference-channel
//! simulator and its learning stack.

use rsic_cli::{config, runner, selftest};

use clap::{Args, Parser, Subcommand};
use config::{parse_order_source, ExperimentConfig, Preset, Scheme};
use rsic_core::channel::CsitErrorMode;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "rsic",
    about = "Two-user interference channel with rate splitting: simulator, \
             benchmark precoders, capacity bounds and MADDPG training",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Overrides {
    /// Configuration file (sectioned key = value text).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; every artifact lands below it.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (mandatory unless the config file provides one).
    #[arg(long)]
    seed: Option<u64>,
    /// Preset: `full` or `desk` (quarter-scale episodes, 10 eval runs).
    #[arg(long)]
    preset: Option<String>,
    /// Comma-separated SNR grid in dB.
    #[arg(long = "snr-db", value_delimiter = ',')]
    snr_db: Option<Vec<f64>>,
    /// Comma-separated scheme list.
    #[arg(long, value_delimiter = ',')]
    schemes: Option<Vec<String>>,
    /// Training episodes.
    #[arg(long)]
    episodes: Option<usize>,
    /// CSIT error mode: none | fixed | snr_scaled.
    #[arg(long)]
    csit: Option<String>,
    /// Decoding order source: exhaustive | learned | fixed:E1,E2.
    #[arg(long = "order-source")]
    order_source: Option<String>,
    #[arg(long = "eval-runs")]
    eval_runs: Option<usize>,
    #[arg(long = "eval-steps")]
    eval_steps: Option<usize>,
    /// Weight of user 1's rate in the reward.
    #[arg(long)]
    beta: Option<f64>,
    /// Antenna counts as m1,m2,n1,n2.
    #[arg(long, value_delimiter = ',')]
    antennas: Option<Vec<usize>>,
}

#[derive(Subcommand)]
enum Command {
    /// Train/evaluate every (scheme, snr) cell and emit sweep.csv.
    Sweep(Overrides),
    /// Per-episode convergence trace with confidence snapshots.
    Converge {
        #[command(flatten)]
        overrides: Overrides,
        /// Learning scheme to trace (maddpg_rs | maddpg_nors).
        #[arg(long, default_value = "maddpg_rs")]
        scheme: String,
    },
    /// Rate-pair trajectory during training for each configured weight.
    Region(Overrides),
    /// Train one learning scheme and write checkpoints plus the trace.
    Train {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "maddpg_rs")]
        scheme: String,
    },
    /// Evaluate a scheme (from checkpoints when it is a learning scheme).
    Eval {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "maddpg_rs")]
        scheme: String,
        /// Checkpoint directory (defaults to the sweep layout under --out).
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Run the fast invariant suite.
    Selftest,
}

fn resolve(overrides: &Overrides, require_cli_seed: bool) -> Result<ExperimentConfig, String> {
    let (mut cfg, mut seed_given) = match &overrides.config {
        Some(path) => ExperimentConfig::from_file(path).map_err(|e| e.to_string())?,
        None => (ExperimentConfig::default(), false),
    };
    if let Some(seed) = overrides.seed {
        cfg.seed = seed;
        seed_given = true;
    }
    if require_cli_seed && overrides.seed.is_none() {
        return Err("--seed is mandatory for this command".into());
    }
    if !seed_given {
        return Err(
            "no seed given: pass --seed or set experiment.seed (wall-clock seeding is not supported)"
                .into(),
        );
    }
    if let Some(out) = &overrides.out {
        cfg.out_dir = out.clone();
    }
    if let Some(p) = &overrides.preset {
        cfg.preset = Preset::parse(p).ok_or_else(|| format!("unknown preset `{p}`"))?;
    }
    if let Some(snr) = &overrides.snr_db {
        cfg.snr_db = snr.clone();
    }
    if let Some(schemes) = &overrides.schemes {
        cfg.schemes = schemes
            .iter()
            .map(|s| Scheme::parse(s).ok_or_else(|| format!("unknown scheme `{s}`")))
            .collect::<Result<_, _>>()?;
    }
    if let Some(e) = overrides.episodes {
        cfg.episodes = Some(e);
    }
    if let Some(c) = &overrides.csit {
        cfg.csit = CsitErrorMode::parse(c).ok_or_else(|| format!("unknown csit mode `{c}`"))?;
    }
    if let Some(o) = &overrides.order_source {
        cfg.order_source =
            parse_order_source(o).ok_or_else(|| format!("unknown order source `{o}`"))?;
    }
    if let Some(r) = overrides.eval_runs {
        cfg.eval_runs = r;
    }
    if let Some(s) = overrides.eval_steps {
        cfg.eval_steps = s;
    }
    if let Some(b) = overrides.beta {
        cfg.beta = b;
    }
    if let Some(a) = &overrides.antennas {
        if a.len() != 4 {
            return Err("--antennas needs exactly m1,m2,n1,n2".into());
        }
        cfg.antennas = rsic_core::channel::AntennaConfig::new(a[0], a[1], a[2], a[3]);
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    Scheme::parse(s).ok_or_else(|| format!("unknown scheme `{s}`"))
}

fn run() -> Result<(), String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Sweep(overrides) => {
            let cfg = resolve(&overrides, false)?;
            let stats = runner::run_sweep(&cfg).map_err(|e| e.to_string())?;
            println!(
                "sweep complete: {} cells -> {}",
                stats.len(),
                cfg.out_dir.join("sweep.csv").display()
            );
            for s in &stats {
                println!(
                    "  snr {:>6} dB  {:<15} mean sum-rate {:>8.4} (std {:.4})",
                    s.snr_db,
                    s.scheme.as_str(),
                    s.mean_sum_rate,
                    s.std_sum_rate
                );
            }
            Ok(())
        }
        Command::Converge { overrides, scheme } => {
            let cfg = resolve(&overrides, false)?;
            let scheme = parse_scheme(&scheme)?;
            runner::run_convergence(&cfg, scheme).map_err(|e| e.to_string())?;
            println!(
                "convergence trace -> {} and {}",
                cfg.out_dir.join("trace.csv").display(),
                cfg.out_dir.join("confidence.csv").display()
            );
            Ok(())
        }
        Command::Region(overrides) => {
            let cfg = resolve(&overrides, false)?;
            runner::run_rate_region(&cfg).map_err(|e| e.to_string())?;
            println!("rate region -> {}", cfg.out_dir.join("region.csv").display());
            Ok(())
        }
        Command::Train { overrides, scheme } => {
            let cfg = resolve(&overrides, true)?;
            let scheme = parse_scheme(&scheme)?;
            if !scheme.is_learning() {
                return Err(format!("`{scheme}` is not a learning scheme"));
            }
            let dir = runner::run_train(&cfg, scheme).map_err(|e| e.to_string())?;
            println!("checkpoints -> {}", dir.display());
            Ok(())
        }
        Command::Eval {
            overrides,
            scheme,
            checkpoint,
        } => {
            let cfg = resolve(&overrides, false)?;
            let scheme = parse_scheme(&scheme)?;
            let ckpt = checkpoint.unwrap_or_else(|| {
                runner::checkpoint_dir(&cfg.out_dir, scheme, cfg.snr_db[0], cfg.seed)
            });
            let stats = runner::run_eval(&cfg, scheme, &ckpt).map_err(|e| e.to_string())?;
            println!(
                "{} at {} dB: mean sum-rate {:.4} (std {:.4}), reward {:.4}",
                stats.scheme.as_str(),
                stats.snr_db,
                stats.mean_sum_rate,
                stats.std_sum_rate,
                stats.mean_reward
            );
            Ok(())
        }
        Command::Selftest => {
            if selftest::run() {
                Ok(())
            } else {
                Err("selftest failed".into())
            }
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
