//! Grover amplitude amplification over a dense register.
//!
//! One Grover iteration is `U_G = U_s U_k`: the phase oracle `U_k` negates
//! the marked amplitude, then the diffusion `U_s = 2|s><s| - I` inverts every
//! amplitude about the mean. After `j` iterations from the uniform state the
//! marked amplitude is `sin((2j + 1) theta)` with `sin^2 theta = 1 / 2^n`.

use core::f64::consts::PI;

use rand::Rng;

use crate::error::{invalid, Result};
use crate::statevector::{check_qubits, Amplitude, QuantumRegister};

/// Inversion about the mean: `a_i -> 2<a> - a_i`.
pub fn diffusion(register: &mut QuantumRegister) {
    let amps = register.amplitudes_mut();
    let n = amps.len() as f64;
    let mean = amps.iter().fold(Amplitude::new(0.0, 0.0), |acc, a| acc + a) / n;
    for a in amps.iter_mut() {
        *a = mean * 2.0 - *a;
    }
}

/// Negates the amplitude of `marked_index`.
pub fn phase_flip(register: &mut QuantumRegister, marked_index: usize) -> Result<()> {
    let dim = register.dim();
    let amp = register
        .amplitudes_mut()
        .get_mut(marked_index)
        .ok_or_else(|| invalid(alloc::format!("marked index {marked_index} out of range 0..{dim}")))?;
    *amp = -*amp;
    Ok(())
}

/// Negates every amplitude whose index satisfies `predicate`.
pub fn phase_flip_where<P: Fn(usize) -> bool>(register: &mut QuantumRegister, predicate: P) {
    for (i, a) in register.amplitudes_mut().iter_mut().enumerate() {
        if predicate(i) {
            *a = -*a;
        }
    }
}

/// One Grover iteration: phase flip on `marked_index`, then diffusion.
pub fn grover_iterate(register: &mut QuantumRegister, marked_index: usize) -> Result<()> {
    phase_flip(register, marked_index)?;
    diffusion(register);
    Ok(())
}

/// Rotation angle `theta = arcsin(sqrt(1 / 2^n))`.
pub fn rotation_angle(num_qubits: u32) -> f64 {
    libm::asin(libm::sqrt(libm::exp2(-(num_qubits as f64))))
}

/// Marked amplitude after `iterations` Grover iterations from the uniform
/// state: `sin((2j + 1) theta)`.
pub fn predicted_amplitude(num_qubits: u32, iterations: u64) -> f64 {
    libm::sin((2 * iterations + 1) as f64 * rotation_angle(num_qubits))
}

/// `int(pi / (4 theta))`, truncated toward zero.
///
/// Quotients within 1e-9 below an integer are treated as that integer, so
/// `n = 1` (where the exact quotient is 1) is not truncated to 0 by rounding.
pub fn optimal_iterations(num_qubits: u32) -> u64 {
    let ratio = PI / (4.0 * rotation_angle(num_qubits));
    libm::floor(ratio + 1e-9) as u64
}

/// A single-target search instance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroverProblem {
    num_qubits: usize,
    marked_index: usize,
    theta: f64,
}

impl GroverProblem {
    pub fn new(num_qubits: usize, marked_index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        if marked_index >= 1usize << num_qubits {
            return Err(invalid(alloc::format!(
                "marked index {marked_index} out of range for {num_qubits} qubits"
            )));
        }
        Ok(Self {
            num_qubits,
            marked_index,
            theta: rotation_angle(num_qubits as u32),
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn marked_index(&self) -> usize {
        self.marked_index
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroverReport {
    pub iterations_run: u64,
    pub oracle_queries: u64,
    /// Square of the closed-form marked amplitude at `iterations_run`.
    pub predicted_success: f64,
    pub measured_outcome: usize,
    pub succeeded: bool,
}

/// Runs `optimal_iterations(n)` Grover iterations from the uniform state and
/// measures once.
pub fn search<R: Rng + ?Sized>(problem: &GroverProblem, rng: &mut R) -> Result<GroverReport> {
    let k = problem.marked_index;
    let oracle = PredicateOracle::new_unchecked(problem.num_qubits, move |x| x == k);
    oracle.search(rng)
}

/// Phase oracle that marks the basis states satisfying a predicate.
///
/// The closed-form amplitude only holds for exactly one marked state. The
/// constructor verifies this by enumeration in debug builds and trusts the
/// caller in release builds.
pub struct PredicateOracle<P> {
    num_qubits: usize,
    predicate: P,
}

impl<P: Fn(usize) -> bool> PredicateOracle<P> {
    pub fn new(num_qubits: usize, predicate: P) -> Result<Self> {
        check_qubits(num_qubits)?;
        if cfg!(debug_assertions) {
            let marked = (0..1usize << num_qubits).filter(|&x| predicate(x)).count();
            if marked != 1 {
                return Err(invalid(alloc::format!(
                    "predicate marks {marked} states, exactly one is required"
                )));
            }
        }
        Ok(Self {
            num_qubits,
            predicate,
        })
    }

    fn new_unchecked(num_qubits: usize, predicate: P) -> Self {
        Self {
            num_qubits,
            predicate,
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Applies the oracle `iterations` times interleaved with diffusion.
    pub fn amplify(&self, register: &mut QuantumRegister, iterations: u64) {
        for _ in 0..iterations {
            phase_flip_where(register, &self.predicate);
            diffusion(register);
        }
    }

    pub fn search<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<GroverReport> {
        let mut register = QuantumRegister::uniform(self.num_qubits)?;
        let n = self.num_qubits as u32;
        let iterations = optimal_iterations(n);
        self.amplify(&mut register, iterations);
        let measured_outcome = register.measure_all(rng);
        let amplitude = predicted_amplitude(n, iterations);
        Ok(GroverReport {
            iterations_run: iterations,
            oracle_queries: iterations,
            predicted_success: amplitude * amplitude,
            measured_outcome,
            succeeded: (self.predicate)(measured_outcome),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn reg(values: &[f64]) -> QuantumRegister {
        QuantumRegister::from_amplitudes(values.iter().map(|&v| Amplitude::new(v, 0.0)).collect())
            .unwrap()
    }

    fn assert_real(reg: &QuantumRegister, expected: &[f64]) {
        for (a, &e) in reg.amplitudes().iter().zip(expected) {
            assert_abs_diff_eq!(a.re, e, epsilon = 1e-12);
            assert_abs_diff_eq!(a.im, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn diffusion_examples() {
        let mut r = reg(&[1.0, 0.0, 0.0, 0.0]);
        diffusion(&mut r);
        assert_real(&r, &[-0.5, 0.5, 0.5, 0.5]);

        let mut r = QuantumRegister::uniform(3).unwrap();
        let before = r.clone();
        diffusion(&mut r);
        for (a, b) in r.amplitudes().iter().zip(before.amplitudes()) {
            assert_abs_diff_eq!((a - b).norm_sqr(), 0.0, epsilon = 1e-12);
        }

        let mut r = reg(&[0.5, 0.5, 0.5, -0.5]);
        diffusion(&mut r);
        assert_real(&r, &[0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn phase_flip_examples() {
        let mut r = QuantumRegister::uniform(2).unwrap();
        phase_flip(&mut r, 3).unwrap();
        assert_real(&r, &[0.5, 0.5, 0.5, -0.5]);

        let mut r = reg(&[0.0, 1.0]);
        phase_flip(&mut r, 0).unwrap();
        assert_real(&r, &[0.0, 1.0]);

        let mut r = reg(&[1.0, 0.0, 0.0, 0.0]);
        phase_flip(&mut r, 0).unwrap();
        assert_real(&r, &[-1.0, 0.0, 0.0, 0.0]);

        assert!(matches!(phase_flip(&mut r, 4), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn grover_iterate_examples() {
        let mut r = QuantumRegister::uniform(2).unwrap();
        grover_iterate(&mut r, 3).unwrap();
        assert_real(&r, &[0.0, 0.0, 0.0, 1.0]);

        for k in 0..8 {
            let mut r = QuantumRegister::uniform(3).unwrap();
            grover_iterate(&mut r, k).unwrap();
            assert_abs_diff_eq!(r.amplitudes()[k].re, 0.883_883_476_483_184_3, epsilon = 1e-12);
        }

        let r = QuantumRegister::uniform(5).unwrap();
        assert_abs_diff_eq!(r.amplitudes()[17].re, 1.0 / 32f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn predicted_amplitude_examples() {
        assert_abs_diff_eq!(predicted_amplitude(2, 1), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(predicted_amplitude(3, 2), 0.972_271_824_131_502_9, epsilon = 1e-12);
        for n in 1..=12 {
            assert_abs_diff_eq!(
                predicted_amplitude(n, 0),
                1.0 / libm::sqrt(libm::exp2(n as f64)),
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn optimal_iteration_examples() {
        assert_eq!(optimal_iterations(1), 1);
        assert_eq!(optimal_iterations(2), 1);
        assert_eq!(optimal_iterations(3), 2);
        assert_eq!(optimal_iterations(4), 3);
        assert_eq!(optimal_iterations(10), 25);
    }

    #[test]
    fn search_certainty_and_half_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..4 {
            let report = search(&GroverProblem::new(2, k).unwrap(), &mut rng).unwrap();
            assert!(report.succeeded);
            assert_eq!(report.measured_outcome, k);
            assert_eq!(report.oracle_queries, 1);
            assert_abs_diff_eq!(report.predicted_success, 1.0, epsilon = 1e-12);
        }

        let report = search(&GroverProblem::new(1, 0).unwrap(), &mut rng).unwrap();
        assert_eq!(report.iterations_run, 1);
        assert_abs_diff_eq!(report.predicted_success, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn search_n3_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let problem = GroverProblem::new(3, 5).unwrap();
        let trials = 10_000;
        let mut hits = 0;
        for _ in 0..trials {
            let report = search(&problem, &mut rng).unwrap();
            assert_abs_diff_eq!(report.predicted_success, 0.945_312_5, epsilon = 1e-12);
            hits += report.succeeded as usize;
        }
        let empirical = hits as f64 / trials as f64;
        assert!((empirical - 0.945_312_5).abs() <= 0.01, "empirical {empirical}");
    }

    #[test]
    fn problem_validation() {
        assert!(GroverProblem::new(3, 8).is_err());
        assert!(matches!(GroverProblem::new(25, 0), Err(Error::Capacity { .. })));
        let p = GroverProblem::new(2, 1).unwrap();
        assert_abs_diff_eq!(p.theta(), PI / 6.0, epsilon = 1e-15);
    }

    #[test]
    fn predicate_oracle_rejects_multiple_marks() {
        if cfg!(debug_assertions) {
            assert!(PredicateOracle::new(3, |x| x < 2).is_err());
            assert!(PredicateOracle::new(3, |_| false).is_err());
        }
        assert!(PredicateOracle::new(3, |x| x == 6).is_ok());
    }
}
