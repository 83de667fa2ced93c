//! The multi-agent training loop: centralized critics over decentralized
//! actors, TD learning against target networks, deterministic policy
//! gradients through the action squash, and soft target blending. One
//! critic, actor and target update per environment step; a fresh i.i.d.
//! channel draw serves as the next state.

use crate::actions::ActionLayout;
use crate::agents::{decode_order_action, Agent, Head};
use crate::env::{env_step_no_rs, env_step_rs, observation, obs_dim, EnvError, OrderChoice};
use crate::mlp::{adam_step, soft_update};
use crate::replay::{ReplayBuffer, Transition};
use ndarray::{s, Array2};
use rand_chacha::ChaCha12Rng;
use rsic_core::channel::{
    apply_estimation_error, sample_channel, AntennaConfig, ChannelRealization, CsitErrorMode,
    EstimatedChannels,
};
use rsic_core::rates::{DecodingOrderPair, RateReport};
use rsic_core::seeds::SeedSpace;

/// How the decoding order is produced during training and evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OrderSource {
    /// Per-draw exhaustive search over the four pairs.
    Exhaustive,
    /// A constant pair.
    Fixed(DecodingOrderPair),
    /// The shared order head picks the pair from the full state.
    Learned,
}

impl OrderSource {
    pub fn as_str(&self) -> &'static str {
        match self {
            OrderSource::Exhaustive => "exhaustive",
            OrderSource::Fixed(_) => "fixed",
            OrderSource::Learned => "learned",
        }
    }
}

/// Hyperparameters; defaults follow the published table (minibatch 128,
/// replay 15000, five 64-wide layers, Adam at 5e-5, tau 0.01, gamma 0.99,
/// exploration variance 0.1, 200-step episodes, beta 0.5).
#[derive(Debug, Clone)]
pub struct MaddpgConfig {
    pub antennas: AntennaConfig,
    pub snr_db: f64,
    pub beta: f64,
    pub episodes: usize,
    pub steps_per_episode: usize,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub gamma: f64,
    pub tau: f64,
    pub learning_rate: f64,
    pub exploration_var: f64,
    pub hidden_size: usize,
    pub num_layers: usize,
    pub rate_splitting: bool,
    pub order_source: OrderSource,
    pub csit: CsitErrorMode,
    pub seed: u64,
}

impl MaddpgConfig {
    pub fn new(antennas: AntennaConfig, snr_db: f64, seed: u64) -> Self {
        MaddpgConfig {
            antennas,
            snr_db,
            beta: 0.5,
            episodes: 2400,
            steps_per_episode: 200,
            batch_size: 128,
            replay_capacity: 15_000,
            gamma: 0.99,
            tau: 0.01,
            learning_rate: 5e-5,
            exploration_var: 0.1,
            hidden_size: 64,
            num_layers: 5,
            rate_splitting: true,
            order_source: OrderSource::Exhaustive,
            csit: CsitErrorMode::None,
            seed,
        }
    }

    fn actor_dims(&self, in_dim: usize, out_dim: usize) -> Vec<usize> {
        let mut dims = vec![in_dim];
        dims.resize(self.num_layers, self.hidden_size);
        dims.push(out_dim);
        dims
    }
}

/// Per-episode training diagnostics.
#[derive(Debug, Clone, Copy)]
pub struct TraceRow {
    pub episode: usize,
    pub mean_reward: f64,
    pub critic_loss: [f64; 2],
    pub actor_grad_norm: [f64; 2],
    pub order_grad_norm: f64,
}

/// Evaluation summary over independent runs.
#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub per_run_reward: Vec<f64>,
    pub per_run_sum_rate: Vec<f64>,
    pub mean_reward: f64,
    pub std_reward: f64,
    pub mean_sum_rate: f64,
    pub std_sum_rate: f64,
    pub mean_r1: f64,
    pub mean_r2: f64,
    pub n_runs: usize,
    pub n_steps: usize,
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

/// The whole learning system: both agents, the optional shared order head,
/// the replay buffer and the RNG streams.
pub struct MaddpgSystem {
    pub cfg: MaddpgConfig,
    pub agents: [Agent; 2],
    pub order_head: Option<Head>,
    pub buffer: ReplayBuffer,
    seeds: SeedSpace,
    s_dim: usize,
}

impl MaddpgSystem {
    pub fn new(cfg: MaddpgConfig) -> Self {
        assert!(cfg.num_layers >= 2, "need at least two connected layers");
        assert!((0.0..=1.0).contains(&cfg.beta));
        let seeds = SeedSpace::new(cfg.seed);
        let a = cfg.antennas;
        let s_dim = obs_dim(a, 1) + obs_dim(a, 2);
        let order_extra = if cfg.order_source == OrderSource::Learned { 2 } else { 0 };
        let layouts = [
            ActionLayout { m: a.m1, q: a.q1(), rate_splitting: cfg.rate_splitting },
            ActionLayout { m: a.m2, q: a.q2(), rate_splitting: cfg.rate_splitting },
        ];
        let critic_in = s_dim + layouts[0].dim() + layouts[1].dim() + order_extra;
        let mut agents = Vec::with_capacity(2);
        for (i, layout) in layouts.iter().enumerate() {
            let idx = i + 1;
            let od = obs_dim(a, idx);
            let mut init = seeds.stream_indexed("init.agent", &[idx as u64]);
            let dir_out = 2 * layout.m * layout.q * if cfg.rate_splitting { 2 } else { 1 };
            let precoder = Head::new(&cfg.actor_dims(od, dir_out), cfg.learning_rate, &mut init);
            let power = cfg.rate_splitting.then(|| {
                Head::new(&cfg.actor_dims(od, layout.q), cfg.learning_rate, &mut init)
            });
            let critic = Head::new(
                &cfg.actor_dims(critic_in, 1),
                cfg.learning_rate,
                &mut init,
            );
            agents.push(Agent {
                obs_dim: od,
                layout: *layout,
                precoder,
                power,
                critic,
            });
        }
        let order_head = (cfg.order_source == OrderSource::Learned).then(|| {
            let mut init = seeds.stream("init.order");
            Head::new(&cfg.actor_dims(s_dim, 2), cfg.learning_rate, &mut init)
        });
        let buffer = ReplayBuffer::new(cfg.replay_capacity);
        let agents: [Agent; 2] = match agents.try_into() {
            Ok(v) => v,
            Err(_) => unreachable!(),
        };
        MaddpgSystem {
            cfg,
            agents,
            order_head,
            buffer,
            seeds,
            s_dim,
        }
    }

    pub fn state_dim(&self) -> usize {
        self.s_dim
    }

    /// Structural contract: each critic consumes the full state and both
    /// actions (plus the two relaxed order values when the order head is
    /// active).
    pub fn critic_input_dim(&self) -> usize {
        self.agents[0].critic.net.input_dim()
    }

    fn order_extra(&self) -> usize {
        if self.order_head.is_some() {
            2
        } else {
            0
        }
    }

    /// Resolve the decoding order for one state; returns the relaxed pair
    /// when the order head produced it.
    fn resolve_order(
        &self,
        state: &[f64],
        explore: Option<(&mut ChaCha12Rng, f64)>,
    ) -> (OrderChoice, Option<[f64; 2]>) {
        match self.cfg.order_source {
            OrderSource::Exhaustive => (OrderChoice::Exhaustive, None),
            OrderSource::Fixed(pair) => (OrderChoice::Use(pair), None),
            OrderSource::Learned => {
                let head = self.order_head.as_ref().expect("order head present");
                let (relaxed, pair) = decode_order_action(head, state, explore, false);
                (OrderChoice::Use(pair), Some(relaxed))
            }
        }
    }

    /// Score a pair of executed actions on the true channel.
    pub fn env_step(
        &self,
        ch_true: &ChannelRealization,
        a1: &[f64],
        a2: &[f64],
        order: OrderChoice,
    ) -> Result<RateReport, EnvError> {
        let (l1, l2) = (self.agents[0].layout, self.agents[1].layout);
        if self.cfg.rate_splitting {
            env_step_rs(ch_true, l1, l2, a1, a2, order, self.cfg.beta)
        } else {
            env_step_no_rs(ch_true, l1, l2, a1, a2, self.cfg.beta)
        }
    }

    /// Run the training loop, invoking `hook` after every completed episode.
    pub fn train_with(
        &mut self,
        mut hook: impl FnMut(usize, &MaddpgSystem),
    ) -> Vec<TraceRow> {
        let cfg = self.cfg.clone();
        let mut ch_rng = self.seeds.stream("train.channel");
        let mut err_rng = self.seeds.stream("train.error");
        let mut explore_rng = self.seeds.stream("train.explore");
        let mut replay_rng = self.seeds.stream("train.replay");

        let draw = |ch_rng: &mut ChaCha12Rng, err_rng: &mut ChaCha12Rng| {
            let ch = sample_channel(cfg.antennas, cfg.snr_db, ch_rng);
            let est = apply_estimation_error(&ch, cfg.csit, err_rng);
            (ch, est)
        };

        let (mut ch, mut est) = draw(&mut ch_rng, &mut err_rng);
        let mut rows = Vec::with_capacity(cfg.episodes);
        for episode in 1..=cfg.episodes {
            let mut reward_sum = 0.0;
            let mut critic_loss_sum = [0.0f64; 2];
            let mut actor_norm_sum = [0.0f64; 2];
            let mut order_norm_sum = 0.0f64;
            let mut updates = 0usize;
            for _ in 0..cfg.steps_per_episode {
                let o1 = observation(&est, 1);
                let o2 = observation(&est, 2);
                let state: Vec<f64> = o1.iter().chain(o2.iter()).copied().collect();
                let a1 = self.agents[0]
                    .select_action(&o1, Some((&mut explore_rng, cfg.exploration_var)));
                let a2 = self.agents[1]
                    .select_action(&o2, Some((&mut explore_rng, cfg.exploration_var)));
                let (order, relaxed) =
                    self.resolve_order(&state, Some((&mut explore_rng, cfg.exploration_var)));
                let report = self
                    .env_step(&ch, &a1, &a2, order)
                    .expect("environment step failed");
                reward_sum += report.reward;

                let (next_ch, next_est) = draw(&mut ch_rng, &mut err_rng);
                let next_o1 = observation(&next_est, 1);
                let next_o2 = observation(&next_est, 2);
                let next_state: Vec<f64> =
                    next_o1.iter().chain(next_o2.iter()).copied().collect();
                self.buffer.push(Transition {
                    state,
                    action1: a1,
                    action2: a2,
                    order_relax: relaxed,
                    order_executed: report.order,
                    reward: report.reward,
                    next_state,
                    true_channel: ch.clone(),
                });
                ch = next_ch;
                est = next_est;

                if self.buffer.len() >= cfg.batch_size {
                    let batch = self.buffer.sample_indices(cfg.batch_size, &mut replay_rng);
                    let losses = self.critic_update(&batch);
                    let (norms, order_norm) = self.actor_update(&batch);
                    self.soft_update_targets();
                    for i in 0..2 {
                        critic_loss_sum[i] += losses[i];
                        actor_norm_sum[i] += norms[i];
                    }
                    order_norm_sum += order_norm;
                    updates += 1;
                }
            }
            let scale = |v: f64| if updates > 0 { v / updates as f64 } else { 0.0 };
            rows.push(TraceRow {
                episode,
                mean_reward: reward_sum / cfg.steps_per_episode as f64,
                critic_loss: [scale(critic_loss_sum[0]), scale(critic_loss_sum[1])],
                actor_grad_norm: [scale(actor_norm_sum[0]), scale(actor_norm_sum[1])],
                order_grad_norm: scale(order_norm_sum),
            });
            hook(episode, self);
        }
        rows
    }

    pub fn train(&mut self) -> Vec<TraceRow> {
        self.train_with(|_, _| {})
    }

    /// Assemble batch matrices from stored transitions.
    fn gather_batch(&self, batch: &[usize]) -> BatchView {
        let b = batch.len();
        let a1_dim = self.agents[0].layout.dim();
        let a2_dim = self.agents[1].layout.dim();
        let mut states = Array2::zeros((b, self.s_dim));
        let mut next_states = Array2::zeros((b, self.s_dim));
        let mut a1 = Array2::zeros((b, a1_dim));
        let mut a2 = Array2::zeros((b, a2_dim));
        let mut rewards = Vec::with_capacity(b);
        let mut order_relax = Array2::zeros((b, self.order_extra()));
        for (row, &idx) in batch.iter().enumerate() {
            let t = self.buffer.get(idx);
            for (c, v) in t.state.iter().enumerate() {
                states[(row, c)] = *v;
            }
            for (c, v) in t.next_state.iter().enumerate() {
                next_states[(row, c)] = *v;
            }
            for (c, v) in t.action1.iter().enumerate() {
                a1[(row, c)] = *v;
            }
            for (c, v) in t.action2.iter().enumerate() {
                a2[(row, c)] = *v;
            }
            if let Some(r) = t.order_relax {
                order_relax[(row, 0)] = r[0];
                order_relax[(row, 1)] = r[1];
            }
            rewards.push(t.reward);
        }
        BatchView {
            states,
            next_states,
            a1,
            a2,
            rewards,
            order_relax,
        }
    }

    /// Batched squashed actions of one agent from (online or target) heads.
    fn policy_actions_batch(
        &self,
        agent_idx: usize,
        obs: &Array2<f64>,
        use_target: bool,
    ) -> Array2<f64> {
        let agent = &self.agents[agent_idx];
        let b = obs.nrows();
        let mut pre = Array2::zeros((b, agent.layout.dim()));
        let mut col = 0usize;
        if let Some(power) = &agent.power {
            let net = if use_target { &power.target } else { &power.net };
            let (y, _) = net.forward_batch(obs);
            pre.slice_mut(s![.., col..col + y.ncols()]).assign(&y);
            col += y.ncols();
        }
        let net = if use_target { &agent.precoder.target } else { &agent.precoder.net };
        let (y, _) = net.forward_batch(obs);
        pre.slice_mut(s![.., col..col + y.ncols()]).assign(&y);
        // Squash row by row.
        let mut out = Array2::zeros(pre.dim());
        for r in 0..b {
            let row: Vec<f64> = pre.row(r).to_vec();
            let squashed = agent.layout.squash(&row);
            for (c, v) in squashed.iter().enumerate() {
                out[(r, c)] = *v;
            }
        }
        out
    }

    fn obs_slices(&self, states: &Array2<f64>) -> (Array2<f64>, Array2<f64>) {
        let d1 = self.agents[0].obs_dim;
        (
            states.slice(s![.., ..d1]).to_owned(),
            states.slice(s![.., d1..]).to_owned(),
        )
    }

    fn critic_input(
        &self,
        states: &Array2<f64>,
        a1: &Array2<f64>,
        a2: &Array2<f64>,
        order: &Array2<f64>,
    ) -> Array2<f64> {
        let b = states.nrows();
        let total = states.ncols() + a1.ncols() + a2.ncols() + order.ncols();
        let mut x = Array2::zeros((b, total));
        let mut col = 0;
        for part in [states, a1, a2, order] {
            if part.ncols() == 0 {
                continue;
            }
            x.slice_mut(s![.., col..col + part.ncols()]).assign(part);
            col += part.ncols();
        }
        x
    }

    /// TD update of both critics on one minibatch; returns the MSE losses.
    pub fn critic_update(&mut self, batch: &[usize]) -> [f64; 2] {
        let view = self.gather_batch(batch);
        let b = batch.len();
        let (next_o1, next_o2) = self.obs_slices(&view.next_states);
        let next_a1 = self.policy_actions_batch(0, &next_o1, true);
        let next_a2 = self.policy_actions_batch(1, &next_o2, true);
        let next_order = if let Some(head) = &self.order_head {
            let (pre, _) = head.target.forward_batch(&view.next_states);
            pre.mapv(|v| 1.0 / (1.0 + (-v).exp()))
        } else {
            Array2::zeros((b, 0))
        };
        let next_x = self.critic_input(&view.next_states, &next_a1, &next_a2, &next_order);
        let x = self.critic_input(&view.states, &view.a1, &view.a2, &view.order_relax);
        let gamma = self.cfg.gamma;
        let mut losses = [0.0f64; 2];
        for (agent, loss_slot) in self.agents.iter_mut().zip(&mut losses) {
            let (next_q, _) = agent.critic.target.forward_batch(&next_x);
            let (q, cache) = agent.critic.net.forward_batch(&x);
            let mut d_out = Array2::zeros((b, 1));
            let mut loss = 0.0;
            for r in 0..b {
                let y = view.rewards[r] + gamma * next_q[(r, 0)];
                let diff = q[(r, 0)] - y;
                loss += diff * diff;
                d_out[(r, 0)] = 2.0 * diff / b as f64;
            }
            *loss_slot = loss / b as f64;
            let (grads, _) = agent.critic.net.backward_batch(&cache, &d_out);
            adam_step(&mut agent.critic.net, &grads, &mut agent.critic.adam);
        }
        losses
    }

    /// Deterministic policy-gradient step for both agents (and the shared
    /// order head). Returns the per-agent actor gradient norms and the order
    /// head's norm.
    pub fn actor_update(&mut self, batch: &[usize]) -> ([f64; 2], f64) {
        let view = self.gather_batch(batch);
        let b = batch.len();
        let (o1, o2) = self.obs_slices(&view.states);
        let obs = [o1, o2];
        let mut norms = [0.0f64; 2];
        for i in 0..2 {
            let agent = &self.agents[i];
            let layout = agent.layout;
            // Recompute this agent's action from its current policy.
            let mut caches = Vec::new();
            let mut pre = Array2::zeros((b, layout.dim()));
            let mut col = 0usize;
            let mut head_spans = Vec::new();
            if let Some(power) = &agent.power {
                let (y, cache) = power.net.forward_batch(&obs[i]);
                pre.slice_mut(s![.., col..col + y.ncols()]).assign(&y);
                head_spans.push((col, col + y.ncols()));
                caches.push(cache);
                col += y.ncols();
            }
            let (y, cache) = agent.precoder.net.forward_batch(&obs[i]);
            pre.slice_mut(s![.., col..col + y.ncols()]).assign(&y);
            head_spans.push((col, col + y.ncols()));
            caches.push(cache);

            let mut own_action = Array2::zeros(pre.dim());
            for r in 0..b {
                let row: Vec<f64> = pre.row(r).to_vec();
                for (c, v) in layout.squash(&row).iter().enumerate() {
                    own_action[(r, c)] = *v;
                }
            }
            let x = if i == 0 {
                self.critic_input(&view.states, &own_action, &view.a2, &view.order_relax)
            } else {
                self.critic_input(&view.states, &view.a1, &own_action, &view.order_relax)
            };
            let (_, critic_cache) = agent.critic.net.forward_batch(&x);
            // Ascend the mean Q: minimize -mean(Q).
            let d_out = Array2::from_elem((b, 1), -1.0 / b as f64);
            let (_, d_input) = agent.critic.net.backward_batch(&critic_cache, &d_out);
            // Columns of this agent's action inside the critic input.
            let a_start = self.s_dim + if i == 0 { 0 } else { view.a1.ncols() };
            let mut d_pre = d_input
                .slice(s![.., a_start..a_start + layout.dim()])
                .to_owned();
            // Chain through the squash.
            for r in 0..b {
                let row: Vec<f64> = own_action.row(r).to_vec();
                let deriv = layout.squash_derivative_from_action(&row);
                for c in 0..layout.dim() {
                    d_pre[(r, c)] *= deriv[c];
                }
            }
            // Backpropagate each head on its slice and take an Adam step.
            let agent = &mut self.agents[i];
            let mut norm_sq = 0.0;
            let mut cache_iter = caches.into_iter();
            let mut span_iter = head_spans.into_iter();
            if let Some(power) = agent.power.as_mut() {
                let cache = cache_iter.next().expect("power cache");
                let (lo, hi) = span_iter.next().expect("power span");
                let d_head = d_pre.slice(s![.., lo..hi]).to_owned();
                let (grads, _) = power.net.backward_batch(&cache, &d_head);
                norm_sq += grads.l2_norm().powi(2);
                adam_step(&mut power.net, &grads, &mut power.adam);
            }
            let cache = cache_iter.next().expect("precoder cache");
            let (lo, hi) = span_iter.next().expect("precoder span");
            let d_head = d_pre.slice(s![.., lo..hi]).to_owned();
            let (grads, _) = agent.precoder.net.backward_batch(&cache, &d_head);
            norm_sq += grads.l2_norm().powi(2);
            adam_step(&mut agent.precoder.net, &grads, &mut agent.precoder.adam);
            norms[i] = norm_sq.sqrt();
        }

        // The shared order head ascends agent 1's critic.
        let mut order_norm = 0.0;
        let order_step = self.order_head.as_ref().map(|head| {
            let (pre, cache) = head.net.forward_batch(&view.states);
            let relaxed = pre.mapv(|v| 1.0 / (1.0 + (-v).exp()));
            let x = self.critic_input(&view.states, &view.a1, &view.a2, &relaxed);
            let critic = &self.agents[0].critic;
            let (_, critic_cache) = critic.net.forward_batch(&x);
            let d_out = Array2::from_elem((b, 1), -1.0 / b as f64);
            let (_, d_input) = critic.net.backward_batch(&critic_cache, &d_out);
            let start = self.s_dim + view.a1.ncols() + view.a2.ncols();
            let mut d_pre = d_input.slice(s![.., start..start + 2]).to_owned();
            ndarray::Zip::from(&mut d_pre)
                .and(&relaxed)
                .for_each(|d, &a| *d *= a * (1.0 - a));
            let (grads, _) = head.net.backward_batch(&cache, &d_pre);
            grads
        });
        if let (Some(grads), Some(head)) = (order_step, self.order_head.as_mut()) {
            order_norm = grads.l2_norm();
            adam_step(&mut head.net, &grads, &mut head.adam);
        }
        (norms, order_norm)
    }

    /// Blend every target network toward its online copy.
    pub fn soft_update_targets(&mut self) {
        let tau = self.cfg.tau;
        for agent in &mut self.agents {
            soft_update(&mut agent.precoder.target, &agent.precoder.net, tau);
            if let Some(power) = &mut agent.power {
                soft_update(&mut power.target, &power.net, tau);
            }
            soft_update(&mut agent.critic.target, &agent.critic.net, tau);
        }
        if let Some(head) = &mut self.order_head {
            soft_update(&mut head.target, &head.net, tau);
        }
    }

    /// Greedy decisions for one estimated-channel draw (no exploration).
    pub fn act(&self, est: &EstimatedChannels) -> (Vec<f64>, Vec<f64>, OrderChoice) {
        let o1 = observation(est, 1);
        let o2 = observation(est, 2);
        let a1 = self.agents[0].select_action::<ChaCha12Rng>(&o1, None);
        let a2 = self.agents[1].select_action::<ChaCha12Rng>(&o2, None);
        let state: Vec<f64> = o1.into_iter().chain(o2).collect();
        let (order, _) = self.resolve_order(&state, None);
        (a1, a2, order)
    }

    /// Deterministic evaluation on fresh draws: exploration off, per-run
    /// means, with an optional per-draw observer for paired comparisons.
    pub fn evaluate_with(
        &self,
        n_runs: usize,
        n_steps: usize,
        csit: CsitErrorMode,
        mut on_draw: impl FnMut(&ChannelRealization, &RateReport),
    ) -> EvalSummary {
        let mut per_run_reward = Vec::with_capacity(n_runs);
        let mut per_run_sum = Vec::with_capacity(n_runs);
        let mut r1_total = 0.0;
        let mut r2_total = 0.0;
        for run in 0..n_runs {
            let mut ch_rng = self.seeds.stream_indexed("eval.channel", &[run as u64]);
            let mut err_rng = self.seeds.stream_indexed("eval.error", &[run as u64]);
            let mut reward_acc = 0.0;
            let mut sum_acc = 0.0;
            for _ in 0..n_steps {
                let ch = sample_channel(self.cfg.antennas, self.cfg.snr_db, &mut ch_rng);
                let est = apply_estimation_error(&ch, csit, &mut err_rng);
                let (a1, a2, order) = self.act(&est);
                let report = self
                    .env_step(&ch, &a1, &a2, order)
                    .expect("evaluation step failed");
                reward_acc += report.reward;
                sum_acc += report.sum_rate();
                r1_total += report.r1;
                r2_total += report.r2;
                on_draw(&ch, &report);
            }
            per_run_reward.push(reward_acc / n_steps as f64);
            per_run_sum.push(sum_acc / n_steps as f64);
        }
        let (mean_reward, std_reward) = mean_std(&per_run_reward);
        let (mean_sum_rate, std_sum_rate) = mean_std(&per_run_sum);
        let total = (n_runs * n_steps) as f64;
        EvalSummary {
            per_run_reward,
            per_run_sum_rate: per_run_sum,
            mean_reward,
            std_reward,
            mean_sum_rate,
            std_sum_rate,
            mean_r1: r1_total / total,
            mean_r2: r2_total / total,
            n_runs,
            n_steps,
        }
    }

    pub fn evaluate(&self, n_runs: usize, n_steps: usize, csit: CsitErrorMode) -> EvalSummary {
        self.evaluate_with(n_runs, n_steps, csit, |_, _| {})
    }

    /// Mean reward of the executed (possibly learned) order against the
    /// per-draw exhaustive maximum over orders for the same precoders.
    pub fn order_efficiency(&self, n_runs: usize, n_steps: usize) -> (f64, f64) {
        let mut executed = 0.0;
        let mut best = 0.0;
        for run in 0..n_runs {
            let mut ch_rng = self.seeds.stream_indexed("eval.channel", &[run as u64]);
            let mut err_rng = self.seeds.stream_indexed("eval.error", &[run as u64]);
            for _ in 0..n_steps {
                let ch = sample_channel(self.cfg.antennas, self.cfg.snr_db, &mut ch_rng);
                let est = apply_estimation_error(&ch, self.cfg.csit, &mut err_rng);
                let (a1, a2, order) = self.act(&est);
                let report = self.env_step(&ch, &a1, &a2, order).expect("step");
                let oracle = self
                    .env_step(&ch, &a1, &a2, OrderChoice::Exhaustive)
                    .expect("step");
                executed += report.reward;
                best += oracle.reward;
            }
        }
        let n = (n_runs * n_steps) as f64;
        (executed / n, best / n)
    }

    /// Save every network of both agents (and the order head) under `dir`.
    pub fn save_checkpoints(&self, dir: &std::path::Path) -> Result<(), crate::mlp::MlpError> {
        for (i, agent) in self.agents.iter().enumerate() {
            let idx = i + 1;
            agent
                .precoder
                .net
                .save(&dir.join(format!("agent{idx}_precoder.ckpt")))?;
            if let Some(power) = &agent.power {
                power.net.save(&dir.join(format!("agent{idx}_power.ckpt")))?;
            }
            agent
                .critic
                .net
                .save(&dir.join(format!("agent{idx}_critic.ckpt")))?;
        }
        if let Some(head) = &self.order_head {
            head.net.save(&dir.join("order_head.ckpt"))?;
        }
        Ok(())
    }

    /// Load actor networks saved by [`save_checkpoints`] into a fresh system.
    pub fn load_checkpoints(&mut self, dir: &std::path::Path) -> Result<(), crate::mlp::MlpError> {
        for (i, agent) in self.agents.iter_mut().enumerate() {
            let idx = i + 1;
            agent.precoder.net =
                crate::mlp::Mlp::load(&dir.join(format!("agent{idx}_precoder.ckpt")))?;
            agent.precoder.target = agent.precoder.net.clone();
            if let Some(power) = &mut agent.power {
                power.net = crate::mlp::Mlp::load(&dir.join(format!("agent{idx}_power.ckpt")))?;
                power.target = power.net.clone();
            }
            agent.critic.net =
                crate::mlp::Mlp::load(&dir.join(format!("agent{idx}_critic.ckpt")))?;
            agent.critic.target = agent.critic.net.clone();
        }
        if let Some(head) = &mut self.order_head {
            head.net = crate::mlp::Mlp::load(&dir.join("order_head.ckpt"))?;
            head.target = head.net.clone();
        }
        Ok(())
    }
}

struct BatchView {
    states: Array2<f64>,
    next_states: Array2<f64>,
    a1: Array2<f64>,
    a2: Array2<f64>,
    rewards: Vec<f64>,
    order_relax: Array2<f64>,
}
