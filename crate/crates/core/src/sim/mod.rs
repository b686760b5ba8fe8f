//! Execution engines: an exact statevector simulator used as a correctness
//! oracle, and a Pauli-frame engine for Monte Carlo under gate, measurement
//! and idle noise.
//!
//! Noise model, shared by both engines:
//!
//! * every gate (including `prep_zero`, identity and classically controlled
//!   Paulis) fails with probability `gamma`; each qubit it acts on then
//!   receives an independent uniform draw from `{I, X, Y, Z}`, after the gate;
//! * a measurement fails with probability `gamma`, replacing the reported bit
//!   by a uniform random bit while the state follows the true outcome;
//! * at each time step every qubit not acted on receives a uniform draw from
//!   `{I, X, Y, Z}` with probability `epsilon`.

mod frame;
mod statevector;

pub use frame::{
    run_pauli_frame, sample_outcomes_frame, FrameOptions, FrameProgram, FrameStats, PauliFrame,
};
pub use statevector::{
    run_statevector, run_statevector_noisy, sample_faults, sample_outcomes_statevector,
    FaultSchedule, StateVector, MAX_STATEVECTOR_QUBITS,
};

pub use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::pauli::Pauli;

/// Failure probabilities of the noise model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseParams {
    /// Gate or measurement failure probability.
    pub gamma: f64,
    /// Per-time-step failure probability of an idle qubit.
    pub epsilon: f64,
}

impl NoiseParams {
    pub fn new(gamma: f64, epsilon: f64) -> Result<Self> {
        for (name, v) in [("gamma", gamma), ("epsilon", epsilon)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidParameter(format!("{name} = {v} is not in [0, 1]")));
            }
        }
        Ok(Self { gamma, epsilon })
    }

    /// `epsilon = gamma / (10 n)`.
    pub fn with_default_epsilon(gamma: f64, n: usize) -> Result<Self> {
        Self::new(gamma, gamma / (10.0 * n as f64))
    }

    pub fn noiseless() -> Self {
        Self {
            gamma: 0.0,
            epsilon: 0.0,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.gamma == 0.0 && self.epsilon == 0.0
    }
}

/// Deterministic random stream identified by `(seed, stream)`.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        Self { seed, stream, rng }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dest: &mut [u8]) {
        self.rng.fill_bytes(dest)
    }

    fn try_fill_bytes(&mut self, dest: &mut [u8]) -> std::result::Result<(), rand::Error> {
        self.rng.try_fill_bytes(dest)
    }
}

/// Uniform draw from `{I, X, Y, Z}`.
#[inline]
pub(crate) fn uniform_pauli<R: Rng + ?Sized>(rng: &mut R) -> Pauli {
    Pauli::from_index(rng.next_u32() & 3)
}

/// Number of failures before the next success of a Bernoulli(p) sequence,
/// `u64::MAX` when `p = 0`.
#[inline]
pub(crate) fn geometric_gap<R: Rng + ?Sized>(rng: &mut R, p: f64) -> u64 {
    if p <= 0.0 {
        return u64::MAX;
    }
    if p >= 1.0 {
        return 0;
    }
    // 1 - U lies in (0, 1].
    let u: f64 = 1.0 - rng.gen::<f64>();
    let g = (u.ln() / (1.0 - p).ln()).floor();
    if g >= u64::MAX as f64 {
        u64::MAX
    } else {
        g as u64
    }
}
