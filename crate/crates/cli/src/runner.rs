//! Experiment orchestration: sweep cells, convergence traces, rate-region
//! trajectories, CSV emission and checkpoint handling.
//!
//! Every scheme in a cell is evaluated on the same channel draws (the
//! evaluation RNG streams depend only on the seed and run index), so bound
//! columns are paired with the schemes they dominate and the dominance
//! assertion runs per draw.

use crate::config::{order_source_str, ExperimentConfig, Scheme};
use rayon::prelude::*;
use rsic_core::bounds::{mimo_outer_bound, no_interference_rates};
use rsic_core::channel::{
    apply_estimation_error, sample_channel, ChannelRealization, EstimatedChannels,
};
use rsic_core::precoding::{mrt, normalize_no_rs, slnr, zf_with_fallback, TxChannels};
use rsic_core::rates::no_rs_rates;
use rsic_core::seeds::SeedSpace;
use rsic_learn::{MaddpgConfig, MaddpgSystem};
use std::io::Write;
use std::path::{Path, PathBuf};
use thiserror::Error;

/// Tolerance for the per-draw bound dominance assertion.
pub const DOMINANCE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum RunError {
    #[error("i/o failure at {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("checkpoint failure: {0}")]
    Checkpoint(#[from] rsic_learn::mlp::MlpError),
    #[error("environment failure: {0}")]
    Env(#[from] rsic_learn::env::EnvError),
    #[error(
        "bound dominance violated: {count} draws exceeded the outer bound \
         (max excess {max_excess:.3e}); this indicates a rate-calculus bug"
    )]
    DominanceViolated { count: usize, max_excess: f64 },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Per-draw rates of one scheme.
#[derive(Debug, Clone, Copy)]
struct DrawRates {
    r1: f64,
    r2: f64,
}

impl DrawRates {
    fn reward(&self, beta: f64) -> f64 {
        beta * self.r1 + (1.0 - beta) * self.r2
    }

    fn sum(&self) -> f64 {
        self.r1 + self.r2
    }
}

/// Aggregated evaluation of one (scheme, snr) cell.
#[derive(Debug, Clone)]
pub struct CellStats {
    pub scheme: Scheme,
    pub snr_db: f64,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub mean_reward: f64,
    pub mean_r1: f64,
    pub mean_r2: f64,
    pub n_runs: usize,
    pub n_steps: usize,
    pub zf_regularized_draws: usize,
    pub dominance_violations: usize,
    pub max_dominance_excess: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Closed-form precoders computed from the estimated channels; rates from
/// the true ones.
fn benchmark_rates(
    scheme: Scheme,
    ch: &ChannelRealization,
    est: &EstimatedChannels,
    beta: f64,
    zf_fallbacks: &mut usize,
) -> Result<DrawRates, RunError> {
    let q = (ch.config().q1(), ch.config().q2());
    let view1 = TxChannels::new(&est.h1, &est.g1);
    let view2 = TxChannels::new(&est.h2, &est.g2);
    let (w1, w2) = match scheme {
        Scheme::Mrt => (
            normalize_no_rs(&mrt(view1).map_err(rsic_learn::env::EnvError::from)?, 1.0)
                .map_err(rsic_learn::env::EnvError::from)?,
            normalize_no_rs(&mrt(view2).map_err(rsic_learn::env::EnvError::from)?, 1.0)
                .map_err(rsic_learn::env::EnvError::from)?,
        ),
        Scheme::Zf => {
            let (raw1, reg1) = zf_with_fallback(view1).map_err(rsic_learn::env::EnvError::from)?;
            let (raw2, reg2) = zf_with_fallback(view2).map_err(rsic_learn::env::EnvError::from)?;
            *zf_fallbacks += usize::from(reg1) + usize::from(reg2);
            (
                normalize_no_rs(&raw1, 1.0).map_err(rsic_learn::env::EnvError::from)?,
                normalize_no_rs(&raw2, 1.0).map_err(rsic_learn::env::EnvError::from)?,
            )
        }
        Scheme::Slnr => (
            slnr(view1, ch.noise_power, 1.0, q.0).map_err(rsic_learn::env::EnvError::from)?,
            slnr(view2, ch.noise_power, 1.0, q.1).map_err(rsic_learn::env::EnvError::from)?,
        ),
        _ => unreachable!("not a closed-form scheme"),
    };
    let report = no_rs_rates(ch, &w1, &w2, beta).map_err(rsic_learn::env::EnvError::from)?;
    Ok(DrawRates {
        r1: report.r1,
        r2: report.r2,
    })
}

/// Single-user rates with interference removed, under matched-filter
/// precoding on the true channels.
fn no_interference_draw(ch: &ChannelRealization) -> Result<DrawRates, RunError> {
    let w1 = normalize_no_rs(&ch.h1.hermitian(), 1.0).map_err(rsic_learn::env::EnvError::from)?;
    let w2 = normalize_no_rs(&ch.h2.hermitian(), 1.0).map_err(rsic_learn::env::EnvError::from)?;
    let (r1, r2) =
        no_interference_rates(ch, &w1, &w2).map_err(rsic_learn::env::EnvError::from)?;
    Ok(DrawRates { r1, r2 })
}

/// Evaluate one scheme over the paired Monte-Carlo draws of a cell.
pub fn evaluate_cell(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    snr_db: f64,
    system: Option<&MaddpgSystem>,
) -> Result<CellStats, RunError> {
    let seeds = SeedSpace::new(cfg.seed);
    let n_runs = cfg.resolved_eval_runs();
    let n_steps = cfg.eval_steps;
    let beta = cfg.beta;
    let mut per_run_sum = Vec::with_capacity(n_runs);
    let mut r1_total = 0.0;
    let mut r2_total = 0.0;
    let mut reward_total = 0.0;
    let mut zf_fallbacks = 0usize;
    let mut violations = 0usize;
    let mut max_excess = 0.0f64;
    for run in 0..n_runs {
        let mut ch_rng = seeds.stream_indexed("eval.channel", &[run as u64]);
        let mut err_rng = seeds.stream_indexed("eval.error", &[run as u64]);
        let mut sum_acc = 0.0;
        for _ in 0..n_steps {
            let ch = sample_channel(cfg.antennas, snr_db, &mut ch_rng);
            let est = apply_estimation_error(&ch, cfg.csit, &mut err_rng);
            // Per draw: (r1, r2, weighted value, sum value).
            let (r1, r2, reward, sum) = match scheme {
                Scheme::MaddpgRs | Scheme::MaddpgNors => {
                    let sys = system.expect("learning scheme needs a trained system");
                    let (a1, a2, order) = sys.act(&est);
                    let report = sys.env_step(&ch, &a1, &a2, order)?;
                    (report.r1, report.r2, report.reward, report.sum_rate())
                }
                Scheme::Mrt | Scheme::Zf | Scheme::Slnr => {
                    let r = benchmark_rates(scheme, &ch, &est, beta, &mut zf_fallbacks)?;
                    (r.r1, r.r2, r.reward(beta), r.sum())
                }
                Scheme::NoInterference => {
                    let r = no_interference_draw(&ch)?;
                    (r.r1, r.r2, r.reward(beta), r.sum())
                }
                Scheme::UpperBound => {
                    let b = mimo_outer_bound(&ch, 1.0, 1.0, beta);
                    (b.r1_max, b.r2_max, b.weighted_max, b.sum_max)
                }
            };
            if !matches!(scheme, Scheme::UpperBound | Scheme::NoInterference) {
                let bound = mimo_outer_bound(&ch, 1.0, 1.0, beta);
                let excess = reward - bound.weighted_max;
                if excess > DOMINANCE_TOL {
                    violations += 1;
                    max_excess = max_excess.max(excess);
                }
            }
            sum_acc += sum;
            r1_total += r1;
            r2_total += r2;
            reward_total += reward;
        }
        per_run_sum.push(sum_acc / n_steps as f64);
    }
    let (mean_sum_rate, std_sum_rate) = mean_std(&per_run_sum);
    let total = (n_runs * n_steps) as f64;
    Ok(CellStats {
        scheme,
        snr_db,
        mean_sum_rate,
        std_sum_rate,
        mean_reward: reward_total / total,
        mean_r1: r1_total / total,
        mean_r2: r2_total / total,
        n_runs,
        n_steps,
        zf_regularized_draws: zf_fallbacks,
        dominance_violations: violations,
        max_dominance_excess: max_excess,
    })
}

/// Checkpoint directory for one cell: `<out>/<scheme>/<snr>/<seed>/`.
pub fn checkpoint_dir(out: &Path, scheme: Scheme, snr_db: f64, seed: u64) -> PathBuf {
    out.join(scheme.as_str())
        .join(format!("{snr_db}"))
        .join(format!("{seed}"))
}

/// Train a learning scheme for one cell, or load its checkpoints if they
/// already exist. Returns the system and whether training happened.
pub fn train_or_load(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    snr_db: f64,
    out: &Path,
) -> Result<(MaddpgSystem, Vec<rsic_learn::TraceRow>), RunError> {
    let mcfg: MaddpgConfig = cfg.maddpg(snr_db, scheme == Scheme::MaddpgRs);
    let mut system = MaddpgSystem::new(mcfg);
    let dir = checkpoint_dir(out, scheme, snr_db, cfg.seed);
    if dir.join("agent1_precoder.ckpt").exists() {
        system.load_checkpoints(&dir)?;
        return Ok((system, Vec::new()));
    }
    let trace = system.train();
    system.save_checkpoints(&dir)?;
    Ok((system, trace))
}

fn fmt_f(v: f64) -> String {
    format!("{v:.6}")
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(io_err(path))?;
    }
    let mut f = std::fs::File::create(path).map_err(io_err(path))?;
    f.write_all(contents.as_bytes()).map_err(io_err(path))?;
    Ok(())
}

fn trace_csv(cfg: &ExperimentConfig, rows: &[rsic_learn::TraceRow], bound: f64) -> String {
    let hash = cfg.hash();
    let mut out = String::from(
        "episode,mean_reward,critic_loss_1,critic_loss_2,actor_grad_norm_1,actor_grad_norm_2,order_grad_norm,upper_bound,seed,config_hash\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.episode,
            fmt_f(r.mean_reward),
            fmt_f(r.critic_loss[0]),
            fmt_f(r.critic_loss[1]),
            fmt_f(r.actor_grad_norm[0]),
            fmt_f(r.actor_grad_norm[1]),
            fmt_f(r.order_grad_norm),
            fmt_f(bound),
            cfg.seed,
            hash
        ));
    }
    out
}

/// Mean weighted outer bound over the evaluation draws of a config (used as
/// the constant reference line of convergence traces).
pub fn mean_bound(cfg: &ExperimentConfig, snr_db: f64) -> f64 {
    let seeds = SeedSpace::new(cfg.seed);
    let mut total = 0.0;
    let n_runs = cfg.resolved_eval_runs();
    for run in 0..n_runs {
        let mut rng = seeds.stream_indexed("eval.channel", &[run as u64]);
        for _ in 0..cfg.eval_steps {
            let ch = sample_channel(cfg.antennas, snr_db, &mut rng);
            total += mimo_outer_bound(&ch, 1.0, 1.0, cfg.beta).weighted_max;
        }
    }
    total / (n_runs * cfg.eval_steps) as f64
}

fn thread_pool() -> rayon::ThreadPool {
    let workers = std::env::var("RSIC_WORKERS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&v| v > 0);
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    builder.build().expect("thread pool")
}

/// One full sweep: train/evaluate every (scheme, snr) cell and write
/// `sweep.csv` plus per-cell training traces under the output directory.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<CellStats>, RunError> {
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let cells: Vec<(usize, usize)> = (0..cfg.snr_db.len())
        .flat_map(|s| (0..cfg.schemes.len()).map(move |k| (s, k)))
        .collect();
    let pool = thread_pool();
    let results: Vec<Result<(CellStats, Option<String>), RunError>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(si, ki)| {
                let snr = cfg.snr_db[si];
                let scheme = cfg.schemes[ki];
                let (system, trace) = if scheme.is_learning() {
                    let (sys, trace) = train_or_load(cfg, scheme, snr, &out)?;
                    (Some(sys), trace)
                } else {
                    (None, Vec::new())
                };
                let stats = evaluate_cell(cfg, scheme, snr, system.as_ref())?;
                let trace_payload = if trace.is_empty() {
                    None
                } else {
                    Some(trace_csv(cfg, &trace, mean_bound(cfg, snr)))
                };
                Ok((stats, trace_payload))
            })
            .collect()
    });

    let mut stats_rows = Vec::with_capacity(results.len());
    for (cell, result) in cells.iter().zip(results) {
        let (stats, trace_payload) = result?;
        if let Some(payload) = trace_payload {
            let path = out.join(format!(
                "trace_{}_{}.csv",
                cfg.schemes[cell.1].as_str(),
                cfg.snr_db[cell.0]
            ));
            write_file(&path, &payload)?;
        }
        if stats.zf_regularized_draws > 0 {
            eprintln!(
                "zf: regularized pseudo-solve on {} draws at snr {} dB",
                stats.zf_regularized_draws, stats.snr_db
            );
        }
        stats_rows.push(stats);
    }

    let hash = cfg.hash();
    let mut csv = String::from(
        "snr_db,scheme,mean_sum_rate,std,n_runs,n_steps,order_source,csit_mode,seed,mean_reward,mean_r1,mean_r2,config_hash\n",
    );
    for s in &stats_rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.snr_db,
            s.scheme.as_str(),
            fmt_f(s.mean_sum_rate),
            fmt_f(s.std_sum_rate),
            s.n_runs,
            s.n_steps,
            order_source_str(cfg.order_source),
            cfg.csit.as_str(),
            cfg.seed,
            fmt_f(s.mean_reward),
            fmt_f(s.mean_r1),
            fmt_f(s.mean_r2),
            hash
        ));
    }
    write_file(&out.join("sweep.csv"), &csv)?;

    let violations: usize = stats_rows.iter().map(|s| s.dominance_violations).sum();
    if violations > 0 {
        let max_excess = stats_rows
            .iter()
            .map(|s| s.max_dominance_excess)
            .fold(0.0, f64::max);
        return Err(RunError::DominanceViolated {
            count: violations,
            max_excess,
        });
    }
    Ok(stats_rows)
}

/// Convergence protocol: per-episode trace plus periodic evaluation
/// snapshots with the one-standard-deviation confidence band.
pub fn run_convergence(cfg: &ExperimentConfig, scheme: Scheme) -> Result<(), RunError> {
    assert!(scheme.is_learning(), "convergence needs a learning scheme");
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let snr = cfg.snr_db[0];
    let bound = mean_bound(cfg, snr);
    let mcfg = cfg.maddpg(snr, scheme == Scheme::MaddpgRs);
    let mut system = MaddpgSystem::new(mcfg);
    let every = cfg.converge_eval_every.max(1);
    let n_runs = cfg.resolved_eval_runs();
    let n_steps = cfg.eval_steps;
    let mut snapshots: Vec<(usize, f64, f64)> = Vec::new();
    let rows = system.train_with(|episode, sys| {
        if episode % every == 0 {
            let s = sys.evaluate(n_runs, n_steps, cfg.csit);
            snapshots.push((episode, s.mean_reward, s.std_reward));
        }
    });
    system.save_checkpoints(&checkpoint_dir(&out, scheme, snr, cfg.seed))?;
    write_file(&out.join("trace.csv"), &trace_csv(cfg, &rows, bound))?;

    let hash = cfg.hash();
    let mut csv =
        String::from("episode,eval_mean,eval_std,band_lo,band_hi,upper_bound,seed,config_hash\n");
    for (episode, mean, std) in &snapshots {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            episode,
            fmt_f(*mean),
            fmt_f(*std),
            fmt_f(mean - std),
            fmt_f(mean + std),
            fmt_f(bound),
            cfg.seed,
            hash
        ));
    }
    write_file(&out.join("confidence.csv"), &csv)?;
    Ok(())
}

/// One logged rate-region point: (beta, episode, r1, r2).
type RegionRow = (f64, usize, f64, f64);

/// Rate-region protocol: for each weight, log the evaluated rate pair every
/// `log_every` episodes after the warm-up delay.
pub fn run_rate_region(cfg: &ExperimentConfig) -> Result<(), RunError> {
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let snr = cfg.snr_db[0];
    let hash = cfg.hash();
    let n_runs = cfg.resolved_eval_runs();
    let n_steps = cfg.eval_steps;
    let pool = thread_pool();
    let rows_per_beta: Vec<Result<Vec<RegionRow>, RunError>> = pool.install(|| {
        cfg.region_betas
            .par_iter()
            .map(|&beta| {
                let mut cell_cfg = cfg.clone();
                cell_cfg.beta = beta;
                let mcfg = cell_cfg.maddpg(snr, true);
                let mut system = MaddpgSystem::new(mcfg);
                let mut rows = Vec::new();
                system.train_with(|episode, sys| {
                    let logged = episode > cfg.region_delay
                        && (episode - cfg.region_delay).is_multiple_of(cfg.region_log_every);
                    if logged {
                        let s = sys.evaluate(n_runs, n_steps, cfg.csit);
                        rows.push((beta, episode, s.mean_r1, s.mean_r2));
                    }
                });
                Ok(rows)
            })
            .collect()
    });
    let mut csv = String::from("beta,episode,r1,r2,seed,config_hash\n");
    for rows in rows_per_beta {
        for (beta, episode, r1, r2) in rows? {
            csv.push_str(&format!(
                "{},{},{},{},{},{}\n",
                beta,
                episode,
                fmt_f(r1),
                fmt_f(r2),
                cfg.seed,
                hash
            ));
        }
    }
    write_file(&out.join("region.csv"), &csv)?;
    Ok(())
}

/// Train one learning scheme at the first SNR of the grid and persist the
/// trace and checkpoints.
pub fn run_train(cfg: &ExperimentConfig, scheme: Scheme) -> Result<PathBuf, RunError> {
    assert!(scheme.is_learning());
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let snr = cfg.snr_db[0];
    let mcfg = cfg.maddpg(snr, scheme == Scheme::MaddpgRs);
    let mut system = MaddpgSystem::new(mcfg);
    let rows = system.train();
    let dir = checkpoint_dir(&out, scheme, snr, cfg.seed);
    system.save_checkpoints(&dir)?;
    write_file(
        &out.join(format!("trace_{}_{}.csv", scheme.as_str(), snr)),
        &trace_csv(cfg, &rows, mean_bound(cfg, snr)),
    )?;
    Ok(dir)
}

/// Evaluate a previously trained scheme from its checkpoints and append a
/// one-row summary CSV.
pub fn run_eval(cfg: &ExperimentConfig, scheme: Scheme, ckpt: &Path) -> Result<CellStats, RunError> {
    let snr = cfg.snr_db[0];
    let system = if scheme.is_learning() {
        let mcfg = cfg.maddpg(snr, scheme == Scheme::MaddpgRs);
        let mut sys = MaddpgSystem::new(mcfg);
        sys.load_checkpoints(ckpt)?;
        Some(sys)
    } else {
        None
    };
    let stats = evaluate_cell(cfg, scheme, snr, system.as_ref())?;
    let out = cfg.out_dir.clone();
    std::fs::create_dir_all(&out).map_err(io_err(&out))?;
    let hash = cfg.hash();
    let csv = format!(
        "snr_db,scheme,mean_sum_rate,std,n_runs,n_steps,order_source,csit_mode,seed,mean_reward,mean_r1,mean_r2,config_hash\n{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        stats.snr_db,
        stats.scheme.as_str(),
        fmt_f(stats.mean_sum_rate),
        fmt_f(stats.std_sum_rate),
        stats.n_runs,
        stats.n_steps,
        order_source_str(cfg.order_source),
        cfg.csit.as_str(),
        cfg.seed,
        fmt_f(stats.mean_reward),
        fmt_f(stats.mean_r1),
        fmt_f(stats.mean_r2),
        hash
    );
    write_file(&out.join(format!("eval_{}_{}.csv", scheme.as_str(), snr)), &csv)?;
    if stats.dominance_violations > 0 {
        return Err(RunError::DominanceViolated {
            count: stats.dominance_violations,
            max_excess: stats.max_dominance_excess,
        });
    }
    Ok(stats)
}
