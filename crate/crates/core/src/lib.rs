//! Fault-tolerant quantum error correction by prepared-ancilla syndrome extraction.
//!
//! The crate is organised bottom-up:
//!
//! * [`gf2`]: bit-packed linear algebra over GF(2).
//! * [`pauli`] and [`codes`]: Pauli operators, stabilizer and CSS codes, decoder tables.
//! * [`circuit`]: the circuit representation and synthesis of recovery networks,
//!   encoders, ancilla preparation and verification.
//! * [`sim`]: an exact statevector engine and a Pauli-frame Monte Carlo engine.
//! * [`protocol`]: verified ancilla preparation, repeated syndrome extraction,
//!   majority decoding and failure-rate estimation.
//! * [`analysis`]: closed-form failure model and threshold curves.

pub mod analysis;
pub mod circuit;
pub mod codes;
pub mod error;
pub mod gf2;
pub mod pauli;
pub mod protocol;
pub mod sim;

pub use error::{Error, Result};
pub use gf2::{BitMatrix, BitVector};
pub use pauli::{Pauli, PauliOperator, SignedPauli};
