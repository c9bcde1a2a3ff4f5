//! Dense n-qubit register simulation.
//!
//! Basis index `x` encodes qubits most-significant-first: for a register
//! `|q0 q1 ... q(n-1)>` the index is `q0 * 2^(n-1) + ... + q(n-1)`. When a
//! register is split into an input part of `n` qubits followed by an output
//! part of `k` qubits, the joint index of `|x, y>` is `x * 2^k + y`.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{invalid, Error, Result};

/// Complex amplitude of one basis state.
pub type Amplitude = Complex64;

/// Largest register the simulator will allocate (2^20 amplitudes).
pub const MAX_QUBITS: usize = 20;

/// Tolerance for the unit-norm invariant.
pub const NORM_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumRegister {
    num_qubits: usize,
    amplitudes: Vec<Amplitude>,
}

pub(crate) fn check_qubits(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 || num_qubits > MAX_QUBITS {
        return Err(Error::Capacity {
            requested: num_qubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

impl QuantumRegister {
    /// Computational basis state `|basis_index>` on `num_qubits` qubits.
    pub fn basis(num_qubits: usize, basis_index: usize) -> Result<Self> {
        check_qubits(num_qubits)?;
        let dim = 1usize << num_qubits;
        if basis_index >= dim {
            return Err(invalid(alloc::format!(
                "basis index {basis_index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amplitudes = vec![Amplitude::new(0.0, 0.0); dim];
        amplitudes[basis_index] = Amplitude::new(1.0, 0.0);
        Ok(Self {
            num_qubits,
            amplitudes,
        })
    }

    /// Equal-weight superposition, prepared as `H^n |0...0>`.
    pub fn uniform(num_qubits: usize) -> Result<Self> {
        let mut reg = Self::basis(num_qubits, 0)?;
        reg.hadamard_all();
        Ok(reg)
    }

    /// Wraps an explicit amplitude vector. The length must be a power of two
    /// (at least 2), every component finite, and the vector normalized.
    pub fn from_amplitudes(amplitudes: Vec<Amplitude>) -> Result<Self> {
        let dim = amplitudes.len();
        if dim < 2 || !dim.is_power_of_two() {
            return Err(invalid(alloc::format!(
                "amplitude vector length {dim} is not a power of two >= 2"
            )));
        }
        let num_qubits = dim.trailing_zeros() as usize;
        check_qubits(num_qubits)?;
        if amplitudes.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(invalid("amplitudes must be finite"));
        }
        let reg = Self {
            num_qubits,
            amplitudes,
        };
        let norm = reg.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(invalid(alloc::format!(
                "amplitudes are not normalized (sum of squared moduli {norm})"
            )));
        }
        Ok(reg)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of basis states, `2^num_qubits`.
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Amplitude] {
        &self.amplitudes
    }

    pub fn amplitude(&self, index: usize) -> Option<Amplitude> {
        self.amplitudes.get(index).copied()
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Amplitude] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Occurrence probability `|C_x|^2` of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a Hadamard gate to every qubit (fast Walsh-Hadamard transform).
    pub fn hadamard_all(&mut self) {
        let scale = core::f64::consts::FRAC_1_SQRT_2;
        let dim = self.amplitudes.len();
        let mut half = 1;
        while half < dim {
            for block in (0..dim).step_by(2 * half) {
                for i in block..block + half {
                    let a = self.amplitudes[i];
                    let b = self.amplitudes[i + half];
                    self.amplitudes[i] = (a + b) * scale;
                    self.amplitudes[i + half] = (a - b) * scale;
                }
            }
            half *= 2;
        }
    }

    /// Evaluates `f` on every input basis state at once:
    /// `|x, y> -> |x, y XOR f(x)>`, where the first `input_qubits` qubits hold
    /// `x` and the remaining ones hold `y`.
    ///
    /// Starting from `sum C_x |x, 0>` this yields `sum C_x |x, f(x)>`.
    pub fn apply_function_oracle<F>(&mut self, input_qubits: usize, f: F) -> Result<()>
    where
        F: Fn(usize) -> usize,
    {
        if input_qubits == 0 || input_qubits >= self.num_qubits {
            return Err(invalid(alloc::format!(
                "cannot split a {}-qubit register into {input_qubits} input qubits and a non-empty output",
                self.num_qubits
            )));
        }
        let output_qubits = self.num_qubits - input_qubits;
        let output_dim = 1usize << output_qubits;
        let input_dim = 1usize << input_qubits;

        let images: Vec<usize> = (0..input_dim).map(&f).collect();
        if let Some((x, fx)) = images.iter().enumerate().find(|(_, &fx)| fx >= output_dim) {
            return Err(invalid(alloc::format!(
                "f({x}) = {fx} does not fit in {output_qubits} output qubits"
            )));
        }

        let mut next = vec![Amplitude::new(0.0, 0.0); self.amplitudes.len()];
        for (x, &fx) in images.iter().enumerate() {
            let base = x << output_qubits;
            for y in 0..output_dim {
                next[base | (y ^ fx)] = self.amplitudes[base | y];
            }
        }
        self.amplitudes = next;
        Ok(())
    }

    /// Samples a basis outcome with probability `|C_x|^2` and collapses the
    /// register onto it.
    pub fn measure_all<R: Rng + ?Sized>(&mut self, rng: &mut R) -> usize {
        let outcome = self.sample(rng);
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            *a = if i == outcome {
                Amplitude::new(1.0, 0.0)
            } else {
                Amplitude::new(0.0, 0.0)
            };
        }
        outcome
    }

    /// Draws an outcome without disturbing the register.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        sample_index(&self.probabilities(), rng)
    }
}

/// Draws index `i` with probability `weights[i] / sum(weights)`.
///
/// Zero-weight indices are never returned. Panics if every weight is zero.
pub fn sample_index<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    assert!(total > 0.0, "cannot sample from an all-zero distribution");
    let target = rng.gen::<f64>() * total;
    let mut cumulative = 0.0;
    let mut last_positive = 0;
    for (i, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            cumulative += w;
            last_positive = i;
            if target < cumulative {
                return i;
            }
        }
    }
    // rounding left `target` just past the final partial sum
    last_positive
}
