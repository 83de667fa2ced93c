//! Experiment configuration: a flat sectioned key-value file, CLI overrides,
//! presets, and a stable hash echoed into every output row.
//!
//! The format is deliberately plain so configs diff and hash cleanly:
//!
//! ```text
//! [experiment]
//! seed = 42
//! [channel]
//! m1 = 3
//! snr_db = 0,6,12,18
//! [schemes]
//! list = maddpg_rs,mrt,upper_bound
//! ```

use rsic_core::channel::{AntennaConfig, CsitErrorMode};
use rsic_core::rates::DecodingOrderPair;
use rsic_learn::OrderSource;
use std::fmt;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{file}:{line}: {msg}")]
    Parse {
        file: String,
        line: usize,
        msg: String,
    },
    #[error("field `{field}`: {msg}")]
    Field { field: String, msg: String },
    #[error("config file i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Comparison schemes selectable per experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    MaddpgRs,
    MaddpgNors,
    Mrt,
    Zf,
    Slnr,
    UpperBound,
    NoInterference,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::MaddpgRs,
        Scheme::MaddpgNors,
        Scheme::Mrt,
        Scheme::Zf,
        Scheme::Slnr,
        Scheme::UpperBound,
        Scheme::NoInterference,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::MaddpgRs => "maddpg_rs",
            Scheme::MaddpgNors => "maddpg_nors",
            Scheme::Mrt => "mrt",
            Scheme::Zf => "zf",
            Scheme::Slnr => "slnr",
            Scheme::UpperBound => "upper_bound",
            Scheme::NoInterference => "no_interference",
        }
    }

    pub fn parse(s: &str) -> Option<Scheme> {
        Scheme::ALL.iter().copied().find(|x| x.as_str() == s)
    }

    pub fn is_learning(&self) -> bool {
        matches!(self, Scheme::MaddpgRs | Scheme::MaddpgNors)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn parse_order_source(s: &str) -> Option<OrderSource> {
    match s {
        "exhaustive" => Some(OrderSource::Exhaustive),
        "learned" => Some(OrderSource::Learned),
        _ => {
            let rest = s.strip_prefix("fixed:")?;
            let (a, b) = rest.split_once(',')?;
            let eta1: u8 = a.trim().parse().ok()?;
            let eta2: u8 = b.trim().parse().ok()?;
            if eta1 > 1 || eta2 > 1 {
                return None;
            }
            Some(OrderSource::Fixed(DecodingOrderPair::new(eta1, eta2)))
        }
    }
}

pub fn order_source_str(o: OrderSource) -> String {
    match o {
        OrderSource::Exhaustive => "exhaustive".into(),
        OrderSource::Learned => "learned".into(),
        OrderSource::Fixed(p) => format!("fixed:{},{}", p.eta1, p.eta2),
    }
}

/// Fully resolved experiment description.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub antennas: AntennaConfig,
    pub snr_db: Vec<f64>,
    pub csit: CsitErrorMode,
    pub schemes: Vec<Scheme>,
    /// None means "use the per-configuration default" (2400 single-antenna,
    /// 4000 multi-antenna single-stream, 12000 multi-stream), scaled by the
    /// preset.
    pub episodes: Option<usize>,
    pub steps: usize,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub gamma: f64,
    pub tau: f64,
    pub learning_rate: f64,
    pub exploration_var: f64,
    pub hidden_size: usize,
    pub num_layers: usize,
    pub beta: f64,
    pub order_source: OrderSource,
    pub eval_runs: usize,
    pub eval_steps: usize,
    pub region_betas: Vec<f64>,
    pub region_log_every: usize,
    pub region_delay: usize,
    pub converge_eval_every: usize,
    pub preset: Preset,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Full,
    /// Quarter-scale episodes and 10 evaluation runs: the whole suite fits a
    /// laptop session.
    Desk,
}

impl Preset {
    pub fn parse(s: &str) -> Option<Preset> {
        match s {
            "full" => Some(Preset::Full),
            "desk" => Some(Preset::Desk),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Preset::Full => "full",
            Preset::Desk => "desk",
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            name: "experiment".into(),
            seed: 0,
            out_dir: PathBuf::from("runs/out"),
            antennas: AntennaConfig::siso(),
            snr_db: vec![0.0, 6.0, 12.0, 18.0],
            csit: CsitErrorMode::None,
            schemes: vec![Scheme::MaddpgRs, Scheme::UpperBound],
            episodes: None,
            steps: 200,
            batch_size: 128,
            replay_capacity: 15_000,
            gamma: 0.99,
            tau: 0.01,
            learning_rate: 5e-5,
            exploration_var: 0.1,
            hidden_size: 64,
            num_layers: 5,
            beta: 0.5,
            order_source: OrderSource::Exhaustive,
            eval_runs: 25,
            eval_steps: 200,
            region_betas: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            region_log_every: 100,
            region_delay: 500,
            converge_eval_every: 50,
            preset: Preset::Full,
        }
    }
}

impl ExperimentConfig {
    /// Episode count after the per-configuration default and preset scaling.
    pub fn resolved_episodes(&self) -> usize {
        let base = self.episodes.unwrap_or_else(|| {
            let a = self.antennas;
            if a.q1().max(a.q2()) > 1 {
                12_000
            } else if a.m1.max(a.m2) > 1 {
                4_000
            } else {
                2_400
            }
        });
        match self.preset {
            Preset::Full => base,
            Preset::Desk => (base / 4).max(1),
        }
    }

    pub fn resolved_eval_runs(&self) -> usize {
        match self.preset {
            Preset::Full => self.eval_runs,
            Preset::Desk => self.eval_runs.min(10),
        }
    }

    /// Canonical rendering: every field in a fixed order. Hashing this
    /// string identifies the experiment exactly.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let a = self.antennas;
        use std::fmt::Write;
        let _ = write!(
            s,
            "name={}\nseed={}\nm1={} m2={} n1={} n2={}\nsnr_db={:?}\ncsit={}\nschemes={:?}\n\
             episodes={} steps={} batch={} replay={}\ngamma={} tau={} lr={} noise={}\n\
             hidden={} layers={} beta={}\norder={}\neval_runs={} eval_steps={}\n\
             region_betas={:?} region_log_every={} region_delay={}\nconverge_eval_every={}\npreset={}\n",
            self.name,
            self.seed,
            a.m1,
            a.m2,
            a.n1,
            a.n2,
            self.snr_db,
            self.csit.as_str(),
            self.schemes.iter().map(|x| x.as_str()).collect::<Vec<_>>(),
            self.resolved_episodes(),
            self.steps,
            self.batch_size,
            self.replay_capacity,
            self.gamma,
            self.tau,
            self.learning_rate,
            self.exploration_var,
            self.hidden_size,
            self.num_layers,
            self.beta,
            order_source_str(self.order_source),
            self.resolved_eval_runs(),
            self.eval_steps,
            self.region_betas,
            self.region_log_every,
            self.region_delay,
            self.converge_eval_every,
            self.preset.as_str(),
        );
        s
    }

    /// FNV-1a hash of the canonical rendering, as fixed-width hex.
    pub fn hash(&self) -> String {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in self.canonical().bytes() {
            h ^= b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01B3);
        }
        format!("{h:016x}")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let field = |field: &str, msg: &str| {
            Err(ConfigError::Field {
                field: field.into(),
                msg: msg.into(),
            })
        };
        if self.schemes.is_empty() {
            return field("schemes.list", "at least one scheme is required");
        }
        if self.snr_db.is_empty() {
            return field("channel.snr_db", "at least one SNR point is required");
        }
        if !(0.0..=1.0).contains(&self.beta) {
            return field("train.beta", "beta must lie in [0,1]");
        }
        if self.num_layers < 2 {
            return field("train.num_layers", "need at least two connected layers");
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return field(
                "train.replay_capacity",
                "replay capacity must be at least the batch size",
            );
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return field("train.gamma", "gamma must lie in [0,1]");
        }
        if !(0.0 < self.tau && self.tau <= 1.0) {
            return field("train.tau", "tau must lie in (0,1]");
        }
        Ok(())
    }

    /// Parse a sectioned key-value file over the defaults.
    pub fn from_file(path: &std::path::Path) -> Result<(Self, bool), ConfigError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_str_named(&text, &path.display().to_string())
    }

    /// Returns the config and whether a seed was given explicitly (wall
    /// clock seeding is not a thing here: a missing seed is an error at run
    /// time).
    pub fn from_str_named(text: &str, file: &str) -> Result<(Self, bool), ConfigError> {
        let mut cfg = ExperimentConfig::default();
        let mut seed_given = false;
        let mut section = String::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| ConfigError::Parse {
                file: file.into(),
                line: line_no,
                msg,
            };
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err("unterminated section header".into()))?;
                section = name.trim().to_string();
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err("expected `key = value`".into()))?;
            let key = key.trim();
            let value = value.trim();
            let qualified = format!("{section}.{key}");
            macro_rules! parse_as {
                ($ty:ty) => {
                    value.parse::<$ty>().map_err(|e| {
                        err(format!("field `{qualified}`: cannot parse `{value}`: {e}"))
                    })?
                };
            }
            match qualified.as_str() {
                "experiment.name" => cfg.name = value.to_string(),
                "experiment.seed" => {
                    cfg.seed = parse_as!(u64);
                    seed_given = true;
                }
                "experiment.out_dir" => cfg.out_dir = PathBuf::from(value),
                "experiment.preset" => {
                    cfg.preset = Preset::parse(value)
                        .ok_or_else(|| err(format!("unknown preset `{value}`")))?
                }
                "channel.m1" => cfg.antennas.m1 = parse_as!(usize),
                "channel.m2" => cfg.antennas.m2 = parse_as!(usize),
                "channel.n1" => cfg.antennas.n1 = parse_as!(usize),
                "channel.n2" => cfg.antennas.n2 = parse_as!(usize),
                "channel.snr_db" => {
                    cfg.snr_db = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| err(format!("field `{qualified}`: {e}")))?;
                }
                "channel.csit" => {
                    cfg.csit = CsitErrorMode::parse(value)
                        .ok_or_else(|| err(format!("unknown csit mode `{value}`")))?
                }
                "schemes.list" => {
                    cfg.schemes = value
                        .split(',')
                        .map(|v| {
                            Scheme::parse(v.trim())
                                .ok_or_else(|| err(format!("unknown scheme `{}`", v.trim())))
                        })
                        .collect::<Result<_, _>>()?;
                }
                "train.episodes" => cfg.episodes = Some(parse_as!(usize)),
                "train.steps" => cfg.steps = parse_as!(usize),
                "train.batch_size" => cfg.batch_size = parse_as!(usize),
                "train.replay_capacity" => cfg.replay_capacity = parse_as!(usize),
                "train.gamma" => cfg.gamma = parse_as!(f64),
                "train.tau" => cfg.tau = parse_as!(f64),
                "train.learning_rate" => cfg.learning_rate = parse_as!(f64),
                "train.exploration_var" => cfg.exploration_var = parse_as!(f64),
                "train.hidden_size" => cfg.hidden_size = parse_as!(usize),
                "train.num_layers" => cfg.num_layers = parse_as!(usize),
                "train.beta" => cfg.beta = parse_as!(f64),
                "train.order_source" => {
                    cfg.order_source = parse_order_source(value)
                        .ok_or_else(|| err(format!("unknown order source `{value}`")))?
                }
                "eval.runs" => cfg.eval_runs = parse_as!(usize),
                "eval.steps" => cfg.eval_steps = parse_as!(usize),
                "region.betas" => {
                    cfg.region_betas = value
                        .split(',')
                        .map(|v| v.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| err(format!("field `{qualified}`: {e}")))?;
                }
                "region.log_every" => cfg.region_log_every = parse_as!(usize),
                "region.delay" => cfg.region_delay = parse_as!(usize),
                "converge.eval_every" => cfg.converge_eval_every = parse_as!(usize),
                _ => {
                    return Err(err(format!("unknown field `{qualified}`")));
                }
            }
        }
        Ok((cfg, seed_given))
    }

    /// MADDPG hyperparameters for one sweep cell.
    pub fn maddpg(&self, snr_db: f64, rate_splitting: bool) -> rsic_learn::MaddpgConfig {
        let mut m = rsic_learn::MaddpgConfig::new(self.antennas, snr_db, self.seed);
        m.beta = self.beta;
        m.episodes = self.resolved_episodes();
        m.steps_per_episode = self.steps;
        m.batch_size = self.batch_size;
        m.replay_capacity = self.replay_capacity;
        m.gamma = self.gamma;
        m.tau = self.tau;
        m.learning_rate = self.learning_rate;
        m.exploration_var = self.exploration_var;
        m.hidden_size = self.hidden_size;
        m.num_layers = self.num_layers;
        m.rate_splitting = rate_splitting;
        m.order_source = if rate_splitting {
            self.order_source
        } else {
            OrderSource::Exhaustive
        };
        m.csit = self.csit;
        m
    }
}
