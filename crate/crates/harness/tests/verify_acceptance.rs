//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use qrobot_core::gridworld::{parse_map, Cell, DEFAULT_MAP};
use qrobot_core::grover::{grover_iterate, optimal_iterations};
use qrobot_core::planner::{action_qubits, grover_select_action, value_iteration, TabularMdp};
use qrobot_core::qrl::{validate_schedule, PolicyAmplitudes, QrlAgent, QrlConfig};
use qrobot_core::statevector::QuantumRegister;
use qrobot_harness::commands::{self, EXPECTED_PATH_LENGTH};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion<'a> = (&'a str, Duration, Box<dyn Fn() -> Verdict + 'a>);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

fn theta(n: u32) -> f64 {
    (1.0 / (n as f64).exp2()).sqrt().asin()
}

fn grover_closed_form() -> Verdict {
    let mut worst = 0.0f64;
    for n in 1..=12u32 {
        let dim = 1usize << n;
        let k = (dim - 1) / 3;
        let th = theta(n);
        let mut reg = QuantumRegister::uniform(n as usize).unwrap();
        for j in 0..=2 * optimal_iterations(n) {
            if j > 0 {
                grover_iterate(&mut reg, k).unwrap();
            }
            let simulated = reg.amplitude(k).unwrap().norm_sqr().sqrt();
            let expected = ((2 * j + 1) as f64 * th).sin().abs();
            worst = worst.max((simulated - expected).abs());
        }
    }
    verdict(worst <= 1e-9, format!("max |error| {worst:.2e} over n=1..12"))
}

fn certainty_case() -> Verdict {
    let mut reg = QuantumRegister::uniform(2).unwrap();
    grover_iterate(&mut reg, 3).unwrap();
    let p = reg.amplitude(3).unwrap().norm_sqr();
    let summary = commands::cmd_grover(2, 3, 1000, 7, None, &mut std::io::sink()).unwrap();
    verdict(
        (p - 1.0).abs() <= 1e-12 && summary.successes == 1000,
        format!("p={p:.15}, {}/1000 trials succeeded", summary.successes),
    )
}

fn failure_bound(report_dir: &Path) -> Verdict {
    let rows = commands::failure_bounds(2..=16);
    let report = commands::render_failure_report(&rows);
    let path = report_dir.join("failure_bounds.txt");
    std::fs::write(&path, &report).unwrap();
    let violations = rows.iter().filter(|r| !r.holds()).count();
    verdict(
        violations == 0 && rows.len() == 15,
        format!("{violations} violations for n=2..16; report at {}", path.display()),
    )
}

fn table1() -> Verdict {
    let expected_classical = ["10^6", "10^7", "10^8", "10^9", "10^10", "10^11", "10^12"];
    let expected_quantum = ["10^5", "3.2×10^5", "10^6", "3.2×10^6", "10^7", "3.2×10^7", "10^8"];
    let mut text = Vec::new();
    commands::cmd_table1(&mut text).unwrap();
    let text = String::from_utf8(text).unwrap();
    let lines: Vec<Vec<&str>> = text.lines().map(|l| l.split('\t').skip(1).collect()).collect();
    let mut matched = 0;
    if lines.len() == 3 && lines.iter().all(|l| l.len() == 7) {
        for c in 0..7 {
            matched += usize::from(lines[1][c] == expected_classical[c]);
            matched += usize::from(lines[2][c] == expected_quantum[c]);
        }
    }
    verdict(matched == 14, format!("{matched}/14 values match"))
}

fn random_mdp(rng: &mut ChaCha8Rng) -> TabularMdp {
    let ns = rng.gen_range(2..=8);
    let na = rng.gen_range(1..=8);
    let mut p = vec![0.0; ns * na * ns];
    let mut g = vec![0.0; ns * na * ns];
    for i in 0..ns {
        for u in 0..na {
            let base = (i * na + u) * ns;
            if i == 0 {
                p[base] = 1.0;
                continue;
            }
            let mut w: Vec<f64> = (0..ns).map(|_| rng.gen::<f64>()).collect();
            w[0] += 0.1;
            let total: f64 = w.iter().sum();
            for j in 0..ns {
                p[base + j] = w[j] / total;
                g[base + j] = rng.gen_range(0.1..10.0);
            }
        }
    }
    TabularMdp::new(ns, na, p, g, &[0]).unwrap()
}

fn classical_argmin(mdp: &TabularMdp, state: usize, v: &[f64]) -> usize {
    let q = |u: usize| -> f64 {
        (0..mdp.num_states())
            .map(|j| mdp.p(state, u, j) * (mdp.g(state, u, j) + v[j]))
            .sum()
    };
    let mut best = 0;
    for u in 1..mdp.num_actions() {
        if q(u) < q(best) {
            best = u;
        }
    }
    best
}

fn planner_equivalence() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut decisions, mut agree) = (0usize, 0usize);
    let (mut first_queries, mut expected_queries, mut first_successes) = (0u64, 0u64, 0u64);
    for _ in 0..200 {
        let mdp = random_mdp(&mut rng);
        let values = value_iteration(&mdp, 1e-12, 1_000_000).unwrap();
        for s in 1..mdp.num_states() {
            let choice = grover_select_action(&mdp, s, &values, &mut rng).unwrap();
            decisions += 1;
            agree += usize::from(choice.action == classical_argmin(&mdp, s, values.values()));
            if choice.first_attempt_succeeded && mdp.num_actions() > 1 {
                first_successes += 1;
                first_queries += choice.first_attempt_queries;
                expected_queries += optimal_iterations(action_qubits(mdp.num_actions()) as u32);
            }
        }
    }
    verdict(
        agree == decisions && first_queries == expected_queries,
        format!(
            "{agree}/{decisions} agree; mean first-attempt queries {:.4} vs optimal_iterations {:.4}",
            first_queries as f64 / first_successes as f64,
            expected_queries as f64 / first_successes as f64
        ),
    )
}

fn environment_oracle() -> Verdict {
    let map = match parse_map(DEFAULT_MAP) {
        Ok(m) => m,
        Err(e) => return verdict(false, format!("default map does not parse: {e}")),
    };
    let check = commands::map_check(&map, EXPECTED_PATH_LENGTH);
    let endpoints = map.start() == Cell::new(4, 4) && map.goal() == Cell::new(8, 8);
    verdict(
        endpoints && check.passed(),
        format!(
            "S={} G={} bfs={} expected {}",
            map.start(),
            map.goal(),
            check.bfs_distance,
            check.expected
        ),
    )
}

fn qrl_convergence() -> Verdict {
    let map = parse_map(DEFAULT_MAP).unwrap();
    let seeds: Vec<u64> = (0..10).collect();
    let alphas = [0.02, 0.05, 0.20];
    let outcomes = commands::sweep(QrlConfig::default(), &map, &alphas, &seeds).unwrap();
    let counts: Vec<usize> = outcomes
        .chunks(seeds.len())
        .map(|runs| runs.iter().filter(|r| r.reached_optimum()).count())
        .collect();
    let optimum = outcomes[0].optimal_path;
    verdict(
        counts[0] >= 8 && counts[1] >= 8 && counts[2] <= 2,
        format!(
            "optimal greedy path ({optimum}) reached: alpha=0.02 {}/10, alpha=0.05 {}/10 (need >=8), alpha=0.20 {}/10 (need <=2)",
            counts[0], counts[1], counts[2]
        ),
    )
}

fn normalization_and_sampling() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut worst_norm = 0.0f64;
    for (ns, na) in [(1, 2), (5, 3), (7, 4), (3, 5)] {
        let mut policy = PolicyAmplitudes::init_uniform(ns, na).unwrap();
        for _ in 0..10_000 {
            let s = rng.gen_range(0..ns);
            let a = rng.gen_range(0..na);
            policy.reinforce(s, a, rng.gen_range(-60.0..60.0));
            worst_norm = worst_norm.max(policy.max_norm_error());
        }
    }

    let draws = 100_000;
    let config = QrlConfig::default();
    let mut agent = QrlAgent::new(config, 1, 4).unwrap();
    agent.policy_mut().reinforce(0, 2, 0.4);
    agent.policy_mut().reinforce(0, 1, -0.3);
    let probs = agent.policy().probabilities(0);
    let mut counts = [0usize; 4];
    for _ in 0..draws {
        counts[agent.select_action(0, &mut rng)] += 1;
    }
    let select_dev = (0..4)
        .map(|a| (counts[a] as f64 / draws as f64 - probs[a]).abs())
        .fold(0.0, f64::max);

    let amps: Vec<Complex64> = [0.1, 0.5, -0.3, 0.2, 0.4, 0.1, -0.6, 0.25]
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .collect();
    let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let reg = QuantumRegister::from_amplitudes(amps.iter().map(|a| a / norm).collect()).unwrap();
    let probs = reg.probabilities();
    let mut counts = [0usize; 8];
    for _ in 0..draws {
        counts[reg.clone().measure_all(&mut rng)] += 1;
    }
    let measure_dev = (0..8)
        .map(|i| (counts[i] as f64 / draws as f64 - probs[i]).abs())
        .fold(0.0, f64::max);

    verdict(
        worst_norm <= 1e-10 && select_dev <= 0.01 && measure_dev <= 0.01,
        format!(
            "norm error {worst_norm:.1e}, select_action dev {select_dev:.4}, measure_all dev {measure_dev:.4}"
        ),
    )
}

fn schedule_classifier() -> Verdict {
    let horizon = 1_000_000;
    let harmonic = validate_schedule(|k| 1.0 / k as f64, horizon).unwrap();
    let basel = validate_schedule(|k| 1.0 / (k as f64 * k as f64), horizon).unwrap();
    let constant = validate_schedule(|_| 0.1, horizon).unwrap();
    let pass = harmonic.satisfies_conditions()
        && harmonic.sum_squares < PI * PI / 6.0
        && !basel.satisfies_conditions()
        && !constant.satisfies_conditions();
    verdict(
        pass,
        format!(
            "1/k accepted={} (sum sq {:.4}), 1/k^2 accepted={}, constant accepted={}",
            harmonic.satisfies_conditions(),
            harmonic.sum_squares,
            basel.satisfies_conditions(),
            constant.satisfies_conditions()
        ),
    )
}

fn run_cli(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_qrobot"))
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn determinism(dir: &Path) -> Verdict {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/default.json");
    let config = config.to_str().unwrap();
    let mdp = dir.join("mdp.json");
    std::fs::write(
        &mdp,
        r#"{"num_states":3,"num_actions":3,"absorbing":[2],
            "transitions":[[[0,1,0],[0.5,0,0.5],[0,0,1]],[[0,0,1],[1,0,0],[0,0.5,0.5]],[[0,0,1],[0,0,1],[0,0,1]]],
            "costs":[[[1,1,1],[3,3,3],[8,8,8]],[[2,2,2],[1,1,1],[1,1,1]],[[0,0,0],[0,0,0],[0,0,0]]]}"#,
    )
    .unwrap();
    let mdp = mdp.to_str().unwrap();
    let jobs: Vec<(&str, Vec<&str>)> = vec![
        ("grover", vec!["grover", "--qubits", "5", "--target", "9", "--trials", "500", "--seed", "3"]),
        ("plan", vec!["plan", "--mdp", mdp, "--seed", "4"]),
        ("train", vec!["train", "--config", config, "--seed", "5"]),
        ("sweep", vec!["sweep", "--config", config, "--alphas", "0.05,0.2", "--seeds", "1,2,3"]),
    ];
    let mut identical = Vec::new();
    let mut differing = Vec::new();
    for (name, args) in jobs {
        let outputs: Vec<Vec<u8>> = (0..2)
            .map(|run| {
                let path = dir.join(format!("{name}-{run}.csv"));
                let mut full = args.clone();
                let path_str = path.to_str().unwrap().to_owned();
                full.extend(["--out", path_str.as_str()]);
                assert!(run_cli(&full), "{name} failed");
                std::fs::read(&path).unwrap()
            })
            .collect();
        if outputs[0] == outputs[1] && !outputs[0].is_empty() {
            identical.push(name);
        } else {
            differing.push(name);
        }
    }
    verdict(
        differing.is_empty(),
        format!("identical: {identical:?}; differing: {differing:?}"),
    )
}

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let report_dir = Path::new(env!("CARGO_TARGET_TMPDIR"));
    let criteria: Vec<Criterion> = vec![
        ("Grover closed-form equivalence", Duration::from_secs(5), Box::new(grover_closed_form)),
        ("certainty case n=2", Duration::from_secs(1), Box::new(certainty_case)),
        ("failure bound n=2..16", Duration::from_secs(1), Box::new(|| failure_bound(report_dir))),
        ("complexity table", Duration::from_secs(1), Box::new(table1)),
        ("planner oracle equivalence", Duration::from_secs(30), Box::new(planner_equivalence)),
        ("environment oracle", Duration::from_secs(1), Box::new(environment_oracle)),
        ("QRL convergence", Duration::from_secs(300), Box::new(qrl_convergence)),
        ("normalization and sampling", Duration::from_secs(30), Box::new(normalization_and_sampling)),
        ("stepsize schedule classifier", Duration::from_secs(1), Box::new(schedule_classifier)),
        ("determinism", Duration::from_secs(60), Box::new(|| determinism(dir.path()))),
    ];
    let mut failures = 0;
    for (i, (name, budget, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let v = check();
        let elapsed = start.elapsed();
        let pass = v.pass && elapsed <= *budget;
        failures += usize::from(!pass);
        println!(
            "criterion {:>2} {} {name}: {} [{:.2}s, budget {}s]",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
