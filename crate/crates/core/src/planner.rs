//! Tabular stochastic-shortest-path planning.
//!
//! Costs are minimized and the backup is undiscounted:
//! `V(i) = min_u sum_j p(i,u,j) (g(i,u,j) + V(j))`. Absorbing states have a
//! zero-cost self-loop under every action.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::{invalid, Error, Result};
use crate::grover::PredicateOracle;

/// Row-sum tolerance for transition probabilities.
pub const PROBABILITY_TOLERANCE: f64 = 1e-9;

/// Grover attempts before falling back to the classical argmin.
pub const GROVER_RETRIES: usize = 3;

#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    /// Dense `[i][u][j]` layout.
    transitions: Vec<f64>,
    costs: Vec<f64>,
    absorbing: Vec<bool>,
}

impl TabularMdp {
    /// Builds a validated MDP. `transitions` and `costs` are dense
    /// `num_states * num_actions * num_states` arrays indexed `[i][u][j]`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transitions: Vec<f64>,
        costs: Vec<f64>,
        absorbing: &[usize],
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::Model("need at least one state and one action".into()));
        }
        let len = num_states * num_actions * num_states;
        if transitions.len() != len || costs.len() != len {
            return Err(Error::Model(alloc::format!(
                "expected {len} transition and cost entries, got {} and {}",
                transitions.len(),
                costs.len()
            )));
        }
        let mut flags = vec![false; num_states];
        for &s in absorbing {
            if s >= num_states {
                return Err(Error::Model(alloc::format!("absorbing state {s} out of range")));
            }
            flags[s] = true;
        }
        let mdp = Self {
            num_states,
            num_actions,
            transitions,
            costs,
            absorbing: flags,
        };
        mdp.validate()?;
        Ok(mdp)
    }

    fn validate(&self) -> Result<()> {
        for i in 0..self.num_states {
            for u in 0..self.num_actions {
                let mut total = 0.0;
                for j in 0..self.num_states {
                    let p = self.p(i, u, j);
                    let g = self.g(i, u, j);
                    if !p.is_finite() || p < 0.0 {
                        return Err(Error::Model(alloc::format!("p({i},{u},{j}) = {p} is not a probability")));
                    }
                    if !g.is_finite() {
                        return Err(Error::Model(alloc::format!("g({i},{u},{j}) is not finite")));
                    }
                    total += p;
                }
                if (total - 1.0).abs() > PROBABILITY_TOLERANCE {
                    return Err(Error::Model(alloc::format!(
                        "transition row ({i},{u}) sums to {total}"
                    )));
                }
                if self.absorbing[i] && (self.p(i, u, i) != 1.0 || self.g(i, u, i) != 0.0) {
                    return Err(Error::Model(alloc::format!(
                        "absorbing state {i} must self-loop at zero cost under action {u}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    #[inline]
    fn index(&self, i: usize, u: usize, j: usize) -> usize {
        (i * self.num_actions + u) * self.num_states + j
    }

    /// Transition probability `p(i, u, j)`.
    #[inline]
    pub fn p(&self, i: usize, u: usize, j: usize) -> f64 {
        self.transitions[self.index(i, u, j)]
    }

    /// Transition cost `g(i, u, j)`.
    #[inline]
    pub fn g(&self, i: usize, u: usize, j: usize) -> f64 {
        self.costs[self.index(i, u, j)]
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.absorbing[state]
    }

    pub fn absorbing_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.absorbing.iter().enumerate().filter(|(_, &a)| a).map(|(i, _)| i)
    }

    /// States from which no absorbing state is reachable under any policy.
    pub fn states_without_exit(&self) -> Vec<usize> {
        // reverse BFS from the absorbing set over positive-probability edges
        let mut predecessors = vec![Vec::new(); self.num_states];
        for i in 0..self.num_states {
            for u in 0..self.num_actions {
                for (j, preds) in predecessors.iter_mut().enumerate() {
                    if self.p(i, u, j) > 0.0 {
                        preds.push(i);
                    }
                }
            }
        }
        let mut reaches = self.absorbing.clone();
        let mut queue: VecDeque<usize> = self.absorbing_states().collect();
        while let Some(j) = queue.pop_front() {
            for &i in &predecessors[j] {
                if !reaches[i] {
                    reaches[i] = true;
                    queue.push_back(i);
                }
            }
        }
        (0..self.num_states).filter(|&i| !reaches[i]).collect()
    }
}

/// State values `V(i)` in cost units.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueTable(Vec<f64>);

impl ValueTable {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("value table entries must be finite"));
        }
        Ok(Self(values))
    }

    pub fn zeros(len: usize) -> Self {
        Self(vec![0.0; len])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, state: usize) -> f64 {
        self.0[state]
    }

    pub(crate) fn set(&mut self, state: usize, value: f64) {
        self.0[state] = value;
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Backup {
    pub q_values: Vec<f64>,
    /// Lowest-index minimizer of `q_values`.
    pub best_action: usize,
    pub best_value: f64,
}

/// One Bellman backup at `state`: expected cost-plus-value of each action.
pub fn bellman_backup(mdp: &TabularMdp, state: usize, values: &ValueTable) -> Result<Backup> {
    if state >= mdp.num_states {
        return Err(invalid(alloc::format!("state {state} out of range")));
    }
    if values.len() != mdp.num_states {
        return Err(invalid(alloc::format!(
            "value table has {} entries, MDP has {} states",
            values.len(),
            mdp.num_states
        )));
    }
    let q_values: Vec<f64> = (0..mdp.num_actions)
        .map(|u| {
            (0..mdp.num_states)
                .map(|j| mdp.p(state, u, j) * (mdp.g(state, u, j) + values.get(j)))
                .sum()
        })
        .collect();
    let (best_action, best_value) = argmin(&q_values);
    Ok(Backup {
        q_values,
        best_action,
        best_value,
    })
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (u, &q) in values.iter().enumerate().skip(1) {
        if q < best.1 {
            best = (u, q);
        }
    }
    best
}

/// Synchronous value iteration from `V = 0` until the largest per-state
/// change is at most `tolerance`.
pub fn value_iteration(mdp: &TabularMdp, tolerance: f64, max_sweeps: usize) -> Result<ValueTable> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(invalid("tolerance must be positive"));
    }
    if mdp.absorbing_states().next().is_none() {
        return Err(Error::Model("MDP has no absorbing state".into()));
    }
    let stuck = mdp.states_without_exit();
    if !stuck.is_empty() {
        return Err(Error::Model(alloc::format!(
            "no absorbing state is reachable from states {stuck:?}"
        )));
    }

    let mut values = ValueTable::zeros(mdp.num_states);
    let mut residual = f64::INFINITY;
    for _ in 0..max_sweeps {
        let mut next = Vec::with_capacity(mdp.num_states);
        residual = 0.0;
        for i in 0..mdp.num_states {
            let v = bellman_backup(mdp, i, &values)?.best_value;
            residual = f64::max(residual, (v - values.get(i)).abs());
            next.push(v);
        }
        values = ValueTable(next);
        if residual <= tolerance {
            return Ok(values);
        }
    }
    Err(Error::Divergence {
        sweeps: max_sweeps,
        residual,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActionChoice {
    pub action: usize,
    /// Oracle applications summed over every Grover attempt.
    pub oracle_queries: u64,
    /// Grover attempts made (0 when the action set is trivial).
    pub attempts: usize,
    /// Oracle queries of the first attempt alone.
    pub first_attempt_queries: u64,
    pub first_attempt_succeeded: bool,
    /// Set when every attempt failed and the classical argmin was returned.
    pub fell_back: bool,
}

/// Smallest `n` with `2^n >= num_actions` (at least 1).
pub fn action_qubits(num_actions: usize) -> usize {
    let n = num_actions.next_power_of_two().trailing_zeros() as usize;
    n.max(1)
}

/// Selects the greedy action at `state` by Grover search over an action
/// register.
///
/// The marked element is the lowest-index argmin of the Bellman backup,
/// which is unique by construction. Indices at or above `num_actions` are
/// padding and never marked. A failed measurement is retried up to
/// [`GROVER_RETRIES`] times before falling back to the classical argmin.
pub fn grover_select_action<R: Rng + ?Sized>(
    mdp: &TabularMdp,
    state: usize,
    values: &ValueTable,
    rng: &mut R,
) -> Result<ActionChoice> {
    let backup = bellman_backup(mdp, state, values)?;
    let target = backup.best_action;
    if mdp.num_actions == 1 {
        return Ok(ActionChoice {
            action: 0,
            oracle_queries: 0,
            attempts: 0,
            first_attempt_queries: 0,
            first_attempt_succeeded: true,
            fell_back: false,
        });
    }
    let n = action_qubits(mdp.num_actions);
    let oracle = PredicateOracle::new(n, move |u| u == target)?;

    let mut choice = ActionChoice {
        action: target,
        oracle_queries: 0,
        attempts: 0,
        first_attempt_queries: 0,
        first_attempt_succeeded: false,
        fell_back: true,
    };
    for attempt in 0..GROVER_RETRIES {
        let report = oracle.search(rng)?;
        choice.oracle_queries += report.oracle_queries;
        choice.attempts += 1;
        if attempt == 0 {
            choice.first_attempt_queries = report.oracle_queries;
        }
        // padded indices are never marked, so `succeeded` already excludes them
        if report.measured_outcome < mdp.num_actions && report.succeeded {
            choice.action = report.measured_outcome;
            choice.first_attempt_succeeded = attempt == 0;
            choice.fell_back = false;
            return Ok(choice);
        }
    }
    Ok(choice)
}

/// One column of the classical-vs-quantum complexity comparison.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexityRow {
    pub num_actions: f64,
    /// `N_s * N_a` action evaluations.
    pub classical: f64,
    /// `N_s * sqrt(N_a)` oracle queries.
    pub quantum: f64,
}

impl ComplexityRow {
    pub fn render(&self) -> [String; 3] {
        [
            format_sig2(self.num_actions),
            format_sig2(self.classical),
            format_sig2(self.quantum),
        ]
    }
}

pub fn complexity_table(num_states: u64, action_counts: &[u64]) -> Vec<ComplexityRow> {
    action_counts
        .iter()
        .map(|&na| {
            let na = na as f64;
            let ns = num_states as f64;
            ComplexityRow {
                num_actions: na,
                classical: ns * na,
                quantum: ns * libm::sqrt(na),
            }
        })
        .collect()
}

/// Renders a positive number at two significant figures in the form
/// `10^e` (mantissa 1.0) or `m.m×10^e`.
pub fn format_sig2(value: f64) -> String {
    if value <= 0.0 || !value.is_finite() {
        return alloc::format!("{value}");
    }
    let mut exponent = libm::floor(libm::log10(value)) as i32;
    let mut tenths = libm::round(value / libm::pow(10.0, exponent as f64) * 10.0) as i64;
    // 9.96 rounds up to 10.0
    if tenths >= 100 {
        tenths /= 10;
        exponent += 1;
    }
    if tenths < 10 {
        tenths *= 10;
        exponent -= 1;
    }
    if tenths == 10 {
        alloc::format!("10^{exponent}")
    } else {
        alloc::format!("{}.{}×10^{exponent}", tenths / 10, tenths % 10)
    }
}
