//! Subcommand implementations. Each writes human-readable text to `out`
//! and, where applicable, CSV to a file.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use qrobot_core::grover::{self, GroverProblem};
use qrobot_core::planner::{self, complexity_table, value_iteration, ComplexityRow, TabularMdp};
use qrobot_core::qrl::{self, GridTask, QrlConfig, TrainingLog};
use qrobot_core::gridworld::GridMap;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};

/// Path length the reference map is expected to have.
pub const EXPECTED_PATH_LENGTH: usize = 25;

/// Action counts of the complexity comparison, at `10^4` states.
pub const TABLE1_STATES: u64 = 10_000;
pub const TABLE1_ACTIONS: [u64; 7] = [
    100,
    1_000,
    10_000,
    100_000,
    1_000_000,
    10_000_000,
    100_000_000,
];

pub const RUN_LOG_HEADER: [&str; 5] = ["seed", "episode", "steps", "total_reward", "max_abs_delta_v"];
pub const SWEEP_HEADER: [&str; 7] = [
    "alpha",
    "seed",
    "episode",
    "steps",
    "total_reward",
    "max_abs_delta_v",
    "status",
];

fn csv_writer(path: &Path) -> Result<csv::Writer<File>> {
    let file = File::create(path).map_err(|e| HarnessError::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroverSummary {
    pub theta: f64,
    pub iterations: u64,
    pub predicted_success: f64,
    pub trials: usize,
    pub successes: usize,
}

impl GroverSummary {
    pub fn empirical_success(&self) -> f64 {
        if self.trials == 0 {
            0.0
        } else {
            self.successes as f64 / self.trials as f64
        }
    }
}

pub fn cmd_grover(
    qubits: usize,
    target: usize,
    trials: usize,
    seed: u64,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<GroverSummary> {
    if trials == 0 {
        return Err(HarnessError::Usage("--trials must be at least 1".into()));
    }
    let problem = GroverProblem::new(qubits, target)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut writer = csv_out.map(csv_writer).transpose()?;
    if let Some(w) = writer.as_mut() {
        w.write_record(["trial", "oracle_queries", "measured_outcome", "succeeded"])?;
    }
    let mut summary = GroverSummary {
        theta: problem.theta(),
        iterations: grover::optimal_iterations(qubits as u32),
        predicted_success: 0.0,
        trials,
        successes: 0,
    };
    let mut last_outcome = 0;
    for trial in 0..trials {
        let report = grover::search(&problem, &mut rng)?;
        summary.predicted_success = report.predicted_success;
        summary.successes += usize::from(report.succeeded);
        last_outcome = report.measured_outcome;
        if let Some(w) = writer.as_mut() {
            w.write_record([
                trial.to_string(),
                report.oracle_queries.to_string(),
                report.measured_outcome.to_string(),
                report.succeeded.to_string(),
            ])?;
        }
    }
    if let Some(mut w) = writer {
        w.flush().map_err(|e| HarnessError::io(csv_out.unwrap_or(Path::new("")), e))?;
    }
    writeln!(out, "qubits            {qubits}")?;
    writeln!(out, "target            {target}")?;
    writeln!(out, "theta             {}", summary.theta)?;
    writeln!(out, "iterations j      {}", summary.iterations)?;
    writeln!(out, "predicted success {:.6}", summary.predicted_success)?;
    writeln!(out, "last outcome      {last_outcome}")?;
    writeln!(
        out,
        "empirical success {:.3} ({}/{})",
        summary.empirical_success(),
        summary.successes,
        trials
    )?;
    Ok(summary)
}

/// Analytic failure probability at `int(pi/4θ)` iterations.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FailureBound {
    pub qubits: u32,
    pub iterations: u64,
    pub failure: f64,
    /// `1/N` with `N = 2^n`.
    pub bound: f64,
}

impl FailureBound {
    pub fn holds(&self) -> bool {
        self.failure <= self.bound
    }
}

pub fn failure_bounds(qubits: impl IntoIterator<Item = u32>) -> Vec<FailureBound> {
    qubits
        .into_iter()
        .map(|n| {
            let j = grover::optimal_iterations(n);
            let a = grover::predicted_amplitude(n, j);
            FailureBound {
                qubits: n,
                iterations: j,
                failure: 1.0 - a * a,
                bound: 1.0 / (1u64 << n) as f64,
            }
        })
        .collect()
}

/// Plain-text report of [`failure_bounds`]. The `1/2^N` column shows how
/// far the literal doubly-exponential reading would be from the analytic
/// failure.
pub fn render_failure_report(rows: &[FailureBound]) -> String {
    let mut s = String::from("n\tj\tfailure\t1/N\t1/2^N\tfailure<=1/N\n");
    for r in rows {
        let literal = (-((1u64 << r.qubits) as f64)).exp2();
        s.push_str(&format!(
            "{}\t{}\t{:.3e}\t{:.3e}\t{:.3e}\t{}\n",
            r.qubits,
            r.iterations,
            r.failure,
            r.bound,
            literal,
            if r.holds() { "yes" } else { "no" }
        ));
    }
    s
}

pub fn table1_rows() -> Vec<ComplexityRow> {
    complexity_table(TABLE1_STATES, &TABLE1_ACTIONS)
}

pub fn cmd_table1(out: &mut dyn Write) -> Result<()> {
    let rows = table1_rows();
    let rendered: Vec<[String; 3]> = rows.iter().map(ComplexityRow::render).collect();
    let labels = [
        "Number of actions",
        "Complexity in traditional robot",
        "Complexity in quantum robot",
    ];
    for (k, label) in labels.iter().enumerate() {
        let cells: Vec<&str> = rendered.iter().map(|r| r[k].as_str()).collect();
        writeln!(out, "{label}\t{}", cells.join("\t"))?;
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlanRow {
    pub state: usize,
    pub value: f64,
    pub classical_action: usize,
    pub grover_action: usize,
    pub oracle_queries: u64,
    pub fell_back: bool,
}

pub const PLAN_MAX_SWEEPS: usize = 100_000;

pub fn plan(mdp: &TabularMdp, tolerance: f64, seed: u64) -> Result<Vec<PlanRow>> {
    if tolerance.is_nan() || tolerance <= 0.0 {
        return Err(HarnessError::Usage("--tol must be positive".into()));
    }
    let values = value_iteration(mdp, tolerance, PLAN_MAX_SWEEPS)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(mdp.num_states());
    for state in 0..mdp.num_states() {
        let backup = planner::bellman_backup(mdp, state, &values)?;
        let choice = planner::grover_select_action(mdp, state, &values, &mut rng)?;
        rows.push(PlanRow {
            state,
            value: values.get(state),
            classical_action: backup.best_action,
            grover_action: choice.action,
            oracle_queries: choice.oracle_queries,
            fell_back: choice.fell_back,
        });
    }
    Ok(rows)
}

pub fn cmd_plan(
    mdp_path: &Path,
    tolerance: f64,
    seed: u64,
    csv_out: Option<&Path>,
    out: &mut dyn Write,
) -> Result<Vec<PlanRow>> {
    let mdp = crate::mdp_file::load_mdp(mdp_path)?;
    let rows = plan(&mdp, tolerance, seed)?;
    writeln!(out, "state\tvalue\tclassical\tgrover\tqueries")?;
    for r in &rows {
        let mark = if r.fell_back { " (fallback)" } else { "" };
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}{mark}",
            r.state, r.value, r.classical_action, r.grover_action, r.oracle_queries
        )?;
    }
    if let Some(path) = csv_out {
        let mut w = csv_writer(path)?;
        w.write_record(["state", "value", "classical_action", "grover_action", "oracle_queries", "fell_back"])?;
        for r in &rows {
            w.write_record([
                r.state.to_string(),
                r.value.to_string(),
                r.classical_action.to_string(),
                r.grover_action.to_string(),
                r.oracle_queries.to_string(),
                r.fell_back.to_string(),
            ])?;
        }
        w.flush().map_err(|e| HarnessError::io(path, e))?;
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MapCheck {
    pub width: usize,
    pub height: usize,
    pub num_states: usize,
    pub bfs_distance: usize,
    pub expected: usize,
}

impl MapCheck {
    pub fn passed(&self) -> bool {
        self.bfs_distance == self.expected
    }
}

pub fn map_check(map: &GridMap, expected: usize) -> MapCheck {
    MapCheck {
        width: map.width(),
        height: map.height(),
        num_states: map.enumerate_states().len(),
        bfs_distance: map.shortest_path_bfs(),
        expected,
    }
}

pub fn cmd_map_check(map: &GridMap, expected: usize, out: &mut dyn Write) -> Result<MapCheck> {
    let check = map_check(map, expected);
    writeln!(out, "dimensions {}x{}", check.width, check.height)?;
    writeln!(out, "start {} goal {}", map.start(), map.goal())?;
    writeln!(out, "free cells {}", check.num_states)?;
    writeln!(out, "bfs distance {}", check.bfs_distance)?;
    writeln!(
        out,
        "expected {}: {}",
        check.expected,
        if check.passed() { "PASS" } else { "FAIL" }
    )?;
    Ok(check)
}

/// Outcome of one training run.
#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub config: QrlConfig,
    pub log: TrainingLog,
    pub greedy_path: Option<usize>,
    pub optimal_path: usize,
}

impl RunOutcome {
    /// The greedy policy follows a shortest path.
    pub fn reached_optimum(&self) -> bool {
        self.greedy_path == Some(self.optimal_path)
    }

    pub fn status(&self) -> &'static str {
        if self.reached_optimum() {
            "converged"
        } else {
            "no-converge"
        }
    }

    pub fn summary_line(&self) -> String {
        let greedy = self
            .greedy_path
            .map_or_else(|| "none".to_string(), |p| p.to_string());
        format!(
            "alpha={} seed={} episodes={} greedy_path={} bfs={} status={}",
            self.config.alpha,
            self.config.seed,
            self.log.episodes.len(),
            greedy,
            self.optimal_path,
            self.status()
        )
    }
}

pub fn run_training(config: QrlConfig, map: &GridMap) -> Result<RunOutcome> {
    config.validate()?;
    let task = GridTask::new(map.clone(), config.rewards());
    let mut agent = task.agent(config)?;
    let log = qrl::train(&mut agent, &task);
    Ok(RunOutcome {
        config,
        greedy_path: qrl::greedy_path_length(&agent, &task),
        optimal_path: map.shortest_path_bfs(),
        log,
    })
}

fn episode_fields(seed: u64, e: &qrl::EpisodeRecord) -> [String; 5] {
    [
        seed.to_string(),
        e.episode.to_string(),
        e.steps.to_string(),
        e.total_reward.to_string(),
        e.max_abs_delta_v.to_string(),
    ]
}

pub fn write_run_log<W: Write>(outcome: &RunOutcome, sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(RUN_LOG_HEADER)?;
    for e in &outcome.log.episodes {
        w.write_record(episode_fields(outcome.log.seed, e))?;
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_train(
    config_path: &Path,
    seed: Option<u64>,
    csv_out: &Path,
    out: &mut dyn Write,
) -> Result<RunOutcome> {
    let mut exp = crate::config::load_experiment(config_path)?;
    if let Some(seed) = seed {
        exp.config.seed = seed;
    }
    let outcome = run_training(exp.config, &exp.map)?;
    let file = File::create(csv_out).map_err(|e| HarnessError::io(csv_out, e))?;
    write_run_log(&outcome, file)?;
    writeln!(out, "{}", outcome.summary_line())?;
    Ok(outcome)
}

/// Trains one agent per `(alpha, seed)` pair in parallel. Results come back
/// in `(alpha, seed)` order whatever the completion order.
pub fn sweep(base: QrlConfig, map: &GridMap, alphas: &[f64], seeds: &[u64]) -> Result<Vec<RunOutcome>> {
    if alphas.is_empty() {
        return Err(HarnessError::Usage("alpha list is empty".into()));
    }
    if seeds.is_empty() {
        return Err(HarnessError::Usage("seed list is empty".into()));
    }
    let jobs: Vec<QrlConfig> = alphas
        .iter()
        .flat_map(|&alpha| seeds.iter().map(move |&seed| QrlConfig { alpha, seed, ..base }))
        .collect();
    for job in &jobs {
        job.validate()?;
    }
    jobs.into_par_iter().map(|cfg| run_training(cfg, map)).collect()
}

pub fn write_sweep<W: Write>(outcomes: &[RunOutcome], sink: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(sink);
    w.write_record(SWEEP_HEADER)?;
    for o in outcomes {
        let alpha = o.config.alpha.to_string();
        for e in &o.log.episodes {
            let [seed, episode, steps, total_reward, delta] = episode_fields(o.log.seed, e);
            w.write_record([
                alpha.as_str(),
                &seed,
                &episode,
                &steps,
                &total_reward,
                &delta,
                o.status(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn cmd_sweep(
    config_path: &Path,
    alphas: &[f64],
    seeds: &[u64],
    csv_out: &Path,
    out: &mut dyn Write,
) -> Result<Vec<RunOutcome>> {
    let exp = crate::config::load_experiment(config_path)?;
    let outcomes = sweep(exp.config, &exp.map, alphas, seeds)?;
    let file = File::create(csv_out).map_err(|e| HarnessError::io(csv_out, e))?;
    write_sweep(&outcomes, file)?;
    for o in &outcomes {
        writeln!(out, "{}", o.summary_line())?;
    }
    Ok(outcomes)
}
