//! Reinforcement learning with amplitude-encoded policies.
//!
//! Every state carries a vector of action amplitudes `C_a` over an `n`-qubit
//! action register. An action is chosen by sampling `|C_a|^2`, as a
//! measurement of the register would. After each transition the state value
//! gets a TD(0) update and the chosen amplitude is scaled by
//! `exp(lambda (r + V(s')))`, after which the state's amplitudes are
//! renormalized.
//!
//! Sampling does not collapse the stored amplitudes; the same policy keeps
//! being reinforced across steps and episodes.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::gridworld::{Action, GridMap, RewardScheme, StateIndex};
use crate::planner::ValueTable;
use crate::statevector::{sample_index, Amplitude, NORM_TOLERANCE};

/// Reinforcement exponents are clamped to `[-EXPONENT_CLAMP, EXPONENT_CLAMP]`.
pub const EXPONENT_CLAMP: f64 = 50.0;

/// Qubits needed to encode the state set (`m`) and action set (`n`).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QubitBudget {
    pub state_qubits: usize,
    pub action_qubits: usize,
}

fn ceil_log2(count: usize) -> usize {
    (count.next_power_of_two().trailing_zeros() as usize).max(1)
}

/// Minimal `m`, `n` with `N_s <= 2^m` and `N_a <= 2^n`; for counts of at
/// least 2 this also gives `2^m <= 2 N_s` and `2^n <= 2 N_a`.
pub fn qubit_budget(num_states: usize, num_actions: usize) -> QubitBudget {
    QubitBudget {
        state_qubits: ceil_log2(num_states),
        action_qubits: ceil_log2(num_actions),
    }
}

/// Per-state action amplitudes, padded to `2^n` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyAmplitudes {
    num_actions: usize,
    width: usize,
    amplitudes: Vec<Amplitude>,
}

impl PolicyAmplitudes {
    /// Uniform policy: every real action has amplitude `1/sqrt(N_a)`,
    /// padded actions zero.
    pub fn init_uniform(num_states: usize, num_actions: usize) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(invalid("policy needs at least one state and one action"));
        }
        let width = 1usize << ceil_log2(num_actions);
        let a = libm::sqrt(1.0 / num_actions as f64);
        let row: Vec<Amplitude> = (0..width)
            .map(|i| Amplitude::new(if i < num_actions { a } else { 0.0 }, 0.0))
            .collect();
        let amplitudes = row.iter().copied().cycle().take(width * num_states).collect();
        Ok(Self {
            num_actions,
            width,
            amplitudes,
        })
    }

    pub fn num_states(&self) -> usize {
        self.amplitudes.len() / self.width
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    /// Register width `2^n`, including padding.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn amplitudes(&self, state: usize) -> &[Amplitude] {
        &self.amplitudes[state * self.width..(state + 1) * self.width]
    }

    fn amplitudes_mut(&mut self, state: usize) -> &mut [Amplitude] {
        &mut self.amplitudes[state * self.width..(state + 1) * self.width]
    }

    /// `|C_a|^2` for every entry of the state's register.
    pub fn probabilities(&self, state: usize) -> Vec<f64> {
        self.amplitudes(state).iter().map(|a| a.norm_sqr()).collect()
    }

    /// Highest-probability action, ties to the lowest index.
    pub fn greedy_action(&self, state: usize) -> usize {
        let probs = self.amplitudes(state)[..self.num_actions].iter().map(|a| a.norm_sqr());
        let mut best = (0, f64::NEG_INFINITY);
        for (a, p) in probs.enumerate() {
            if p > best.1 {
                best = (a, p);
            }
        }
        best.0
    }

    pub fn sample<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        let mut probs = [0.0; 64];
        let row = self.amplitudes(state);
        if row.len() <= probs.len() {
            for (p, a) in probs.iter_mut().zip(row) {
                *p = a.norm_sqr();
            }
            sample_index(&probs[..row.len()], rng)
        } else {
            sample_index(&self.probabilities(state), rng)
        }
    }

    /// Scales `C_action` by `exp(exponent)` (exponent clamped) and
    /// renormalizes the state's amplitudes.
    pub fn reinforce(&mut self, state: usize, action: usize, exponent: f64) {
        let num_actions = self.num_actions;
        assert!(action < num_actions, "action {action} is padding");
        let factor = libm::exp(exponent.clamp(-EXPONENT_CLAMP, EXPONENT_CLAMP));
        let row = self.amplitudes_mut(state);
        row[action] *= factor;
        let norm = libm::sqrt(row.iter().map(|a| a.norm_sqr()).sum::<f64>());
        if norm > 0.0 && norm.is_finite() {
            for a in row.iter_mut() {
                *a /= norm;
            }
        }
        // a probability that underflowed to zero is never recoverable, so keep
        // every real action strictly positive
        let min = libm::sqrt(f64::MIN_POSITIVE);
        let mut repaired = false;
        for a in row[..num_actions].iter_mut() {
            if a.norm_sqr() < f64::MIN_POSITIVE {
                *a = Amplitude::new(min, 0.0);
                repaired = true;
            }
        }
        if repaired {
            let norm = libm::sqrt(row.iter().map(|a| a.norm_sqr()).sum::<f64>());
            for a in row.iter_mut() {
                *a /= norm;
            }
        }
    }

    /// Largest deviation of any state's `sum |C_a|^2` from 1.
    pub fn max_norm_error(&self) -> f64 {
        self.amplitudes
            .chunks(self.width)
            .map(|row| (row.iter().map(|a| a.norm_sqr()).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// True when every state is normalized within tolerance and every padded
    /// entry is exactly zero.
    pub fn is_valid(&self) -> bool {
        self.max_norm_error() <= NORM_TOLERANCE
            && self
                .amplitudes
                .chunks(self.width)
                .all(|row| row[self.num_actions..].iter().all(|a| a.re == 0.0 && a.im == 0.0))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QrlConfig {
    /// TD stepsize.
    pub alpha: f64,
    pub gamma: f64,
    /// Reinforcement gain of the amplitude update.
    pub lambda: f64,
    /// Convergence threshold on `|dV(s)|`.
    pub epsilon: f64,
    pub max_steps: usize,
    pub max_episodes: usize,
    pub step_reward: f64,
    pub goal_reward: f64,
    pub seed: u64,
}

impl Default for QrlConfig {
    fn default() -> Self {
        Self {
            alpha: 0.05,
            gamma: 0.99,
            lambda: 0.05,
            epsilon: 1e-3,
            max_steps: 2000,
            max_episodes: 20_000,
            step_reward: -1.0,
            goal_reward: 100.0,
            seed: 0,
        }
    }
}

impl QrlConfig {
    pub fn validate(&self) -> Result<()> {
        let check = |ok: bool, msg: &str| if ok { Ok(()) } else { Err(invalid(msg)) };
        check(self.alpha > 0.0 && self.alpha < 1.0, "alpha must lie in (0, 1)")?;
        check(self.gamma > 0.0 && self.gamma <= 1.0, "gamma must lie in (0, 1]")?;
        check(self.lambda > 0.0 && self.lambda.is_finite(), "lambda must be positive")?;
        check(self.epsilon > 0.0, "epsilon must be positive")?;
        check(self.max_steps > 0, "max_steps must be positive")?;
        check(self.max_episodes > 0, "max_episodes must be positive")?;
        check(self.step_reward.is_finite() && self.goal_reward.is_finite(), "rewards must be finite")?;
        Ok(())
    }

    pub fn rewards(&self) -> RewardScheme {
        RewardScheme {
            step_reward: self.step_reward,
            goal_reward: self.goal_reward,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QrlAgent {
    values: ValueTable,
    policy: PolicyAmplitudes,
    config: QrlConfig,
    episode_count: usize,
}

impl QrlAgent {
    /// Fresh agent: `V = 0` and uniform action amplitudes.
    pub fn new(config: QrlConfig, num_states: usize, num_actions: usize) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            values: ValueTable::zeros(num_states),
            policy: PolicyAmplitudes::init_uniform(num_states, num_actions)?,
            config,
            episode_count: 0,
        })
    }

    pub fn values(&self) -> &ValueTable {
        &self.values
    }

    pub fn policy(&self) -> &PolicyAmplitudes {
        &self.policy
    }

    pub fn config(&self) -> &QrlConfig {
        &self.config
    }

    pub fn episode_count(&self) -> usize {
        self.episode_count
    }

    pub fn policy_mut(&mut self) -> &mut PolicyAmplitudes {
        &mut self.policy
    }

    /// Observes the state's action register: samples `a` with probability
    /// `|C_a|^2` without altering the stored amplitudes.
    pub fn select_action<R: Rng + ?Sized>(&self, state: usize, rng: &mut R) -> usize {
        self.policy.sample(state, rng)
    }

    fn next_value(&self, next: Option<usize>) -> f64 {
        next.map_or(0.0, |s| self.values.get(s))
    }

    /// `V(s) <- V(s) + alpha (r + gamma V(s') - V(s))`, with `V(terminal) = 0`.
    /// Returns the applied change.
    pub fn td_update(&mut self, state: usize, reward: f64, next: Option<usize>) -> f64 {
        let v = self.values.get(state);
        let target = reward + self.config.gamma * self.next_value(next);
        let delta = self.config.alpha * (target - v);
        self.values.set(state, v + delta);
        delta
    }

    /// `C_a <- exp(lambda (r + V(s'))) C_a`, then renormalize the state.
    pub fn amplitude_update(&mut self, state: usize, action: usize, reward: f64, next: Option<usize>) {
        let exponent = self.config.lambda * (reward + self.next_value(next));
        self.policy.reinforce(state, action, exponent);
    }
}

/// A gridworld with its state indexing and reward scheme.
#[derive(Clone, Debug)]
pub struct GridTask {
    map: GridMap,
    index: StateIndex,
    rewards: RewardScheme,
}

impl GridTask {
    pub fn new(map: GridMap, rewards: RewardScheme) -> Self {
        let index = StateIndex::new(&map);
        Self { map, index, rewards }
    }

    pub fn map(&self) -> &GridMap {
        &self.map
    }

    pub fn index(&self) -> &StateIndex {
        &self.index
    }

    pub fn num_states(&self) -> usize {
        self.index.len()
    }

    pub fn start_state(&self) -> usize {
        self.index.index_of(self.map.start()).expect("start is a free cell")
    }

    pub fn goal_state(&self) -> usize {
        self.index.index_of(self.map.goal()).expect("goal is a free cell")
    }

    /// Builds an agent sized for this task.
    pub fn agent(&self, config: QrlConfig) -> Result<QrlAgent> {
        QrlAgent::new(config, self.num_states(), Action::ALL.len())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    /// 1-based episode number.
    pub episode: usize,
    pub steps: usize,
    pub total_reward: f64,
    /// Largest `|dV(s)|` applied during the episode.
    pub max_abs_delta_v: f64,
    pub reached_goal: bool,
    /// Every state visited in the episode had its last `|dV(s)|` at or
    /// below epsilon, and the episode reached the goal.
    pub converged: bool,
}

/// Runs one episode from the start cell until the goal or `max_steps`.
pub fn run_episode<R: Rng + ?Sized>(agent: &mut QrlAgent, task: &GridTask, rng: &mut R) -> EpisodeRecord {
    let mut last_delta: Vec<Option<f64>> = vec![None; task.num_states()];
    let rewards = task.rewards;
    let mut state = task.start_state();
    let mut steps = 0;
    let mut total_reward = 0.0;
    let mut max_abs_delta_v: f64 = 0.0;
    let mut reached_goal = state == task.goal_state();

    while !reached_goal && steps < agent.config.max_steps {
        let action = agent.select_action(state, rng);
        let cell = task.index.cell(state);
        let t = task
            .map
            .step(cell, Action::ALL[action], &rewards)
            .expect("agent only occupies free, non-goal cells");
        let next_state = task.index.index_of(t.next).expect("step stays on free cells");
        let next = (!t.done).then_some(next_state);

        let delta = agent.td_update(state, t.reward, next);
        agent.amplitude_update(state, action, t.reward, next);

        last_delta[state] = Some(delta.abs());
        max_abs_delta_v = max_abs_delta_v.max(delta.abs());
        total_reward += t.reward;
        steps += 1;
        state = next_state;
        reached_goal = t.done;
    }

    agent.episode_count += 1;
    let eps = agent.config.epsilon;
    let converged = reached_goal && last_delta.iter().flatten().all(|&d| d <= eps);
    EpisodeRecord {
        episode: agent.episode_count,
        steps,
        total_reward,
        max_abs_delta_v,
        reached_goal,
        converged,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainingLog {
    pub seed: u64,
    pub episodes: Vec<EpisodeRecord>,
    /// The stopping criterion fired before `max_episodes`.
    pub converged: bool,
}

/// Trains until an episode meets the convergence criterion or
/// `max_episodes` have run. Randomness comes from `config.seed`.
pub fn train(agent: &mut QrlAgent, task: &GridTask) -> TrainingLog {
    let mut rng = ChaCha8Rng::seed_from_u64(agent.config.seed);
    let mut episodes = Vec::new();
    let mut converged = false;
    while episodes.len() < agent.config.max_episodes {
        let record = run_episode(agent, task, &mut rng);
        converged = record.converged;
        episodes.push(record);
        if converged {
            break;
        }
    }
    TrainingLog {
        seed: agent.config.seed,
        episodes,
        converged,
    }
}

/// Length of the path obtained by always taking the highest-probability
/// action from the start. `None` if the goal is not reached within
/// `4 * N_s` moves.
pub fn greedy_path_length(agent: &QrlAgent, task: &GridTask) -> Option<usize> {
    let cap = 4 * task.num_states();
    let goal = task.map.goal();
    let mut cell = task.map.start();
    for steps in 0..=cap {
        if cell == goal {
            return Some(steps);
        }
        let state = task.index.index_of(cell)?;
        cell = task.map.move_from(cell, Action::ALL[agent.policy.greedy_action(state)]);
    }
    None
}

/// Partial sums of a stepsize schedule, used to judge the Robbins-Monro
/// conditions `sum a_k = inf` and `sum a_k^2 < inf` from a finite horizon.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScheduleReport {
    pub horizon: u64,
    /// `sum_{k<=horizon} a_k`.
    pub sum_diverges_evidence: f64,
    /// `sum_{k<=horizon} a_k^2`.
    pub sum_squares: f64,
    /// Share of `sum a_k` contributed by the last 90% of the horizon.
    pub sum_tail_share: f64,
    /// Share of `sum a_k^2` contributed by the last 90% of the horizon.
    pub squares_tail_share: f64,
}

/// Minimum tail share for the plain sum to count as still growing.
pub const DIVERGENCE_TAIL_SHARE: f64 = 0.1;
/// Maximum tail share for the sum of squares to count as settled.
pub const CONVERGENCE_TAIL_SHARE: f64 = 0.01;

impl ScheduleReport {
    pub fn sum_diverges(&self) -> bool {
        self.sum_tail_share >= DIVERGENCE_TAIL_SHARE
    }

    pub fn squares_converge(&self) -> bool {
        self.squares_tail_share <= CONVERGENCE_TAIL_SHARE
    }

    pub fn satisfies_conditions(&self) -> bool {
        self.sum_diverges() && self.squares_converge()
    }
}

/// Evaluates `stepsize(k)` for `k = 1..=horizon`. Growth over the last 90%
/// of the horizon (from `horizon / 10` onward) separates sums that keep
/// growing from sums that have settled.
pub fn validate_schedule<F: Fn(u64) -> f64>(stepsize: F, horizon: u64) -> Result<ScheduleReport> {
    if horizon < 10 {
        return Err(invalid("horizon must be at least 10"));
    }
    let split = horizon / 10;
    let (mut sum, mut squares) = (0.0, 0.0);
    let (mut head_sum, mut head_squares) = (0.0, 0.0);
    for k in 1..=horizon {
        let a = stepsize(k);
        if a <= 0.0 || !a.is_finite() {
            return Err(invalid(alloc::format!("stepsize at k = {k} is not positive: {a}")));
        }
        sum += a;
        squares += a * a;
        if k == split {
            head_sum = sum;
            head_squares = squares;
        }
    }
    Ok(ScheduleReport {
        horizon,
        sum_diverges_evidence: sum,
        sum_squares: squares,
        sum_tail_share: (sum - head_sum) / sum,
        squares_tail_share: (squares - head_squares) / squares,
    })
}
