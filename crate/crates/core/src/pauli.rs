//! Pauli operators on n qubits.
//!
//! [`PauliOperator`] ignores phases and is the error/correction type used by
//! codes and decoders. [`SignedPauli`] keeps the phase as `i^phase · X^x Z^z`
//! and supports exact Clifford conjugation; it is used for stabilizer-state
//! synthesis and eigenvalue bookkeeping.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::BitVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    pub const NONTRIVIAL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    #[inline]
    pub fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    #[inline]
    pub fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    /// Uniform index 0..4 to Pauli, in the order I, X, Y, Z.
    #[inline]
    pub fn from_index(i: u32) -> Self {
        Pauli::ALL[(i & 3) as usize]
    }

    pub fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Pauli operator up to phase, stored as X and Z masks.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PauliOperator {
    x: BitVector,
    z: BitVector,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        Self {
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    pub fn from_masks(x: BitVector, z: BitVector) -> Result<Self> {
        if x.len() != z.len() {
            return Err(Error::Dimension(format!(
                "x mask has {} qubits, z mask has {}",
                x.len(),
                z.len()
            )));
        }
        Ok(Self { x, z })
    }

    pub fn single(n: usize, qubit: usize, p: Pauli) -> Self {
        let mut op = Self::identity(n);
        op.set(qubit, p);
        op
    }

    /// Pure X-type operator `X^mask`.
    pub fn x_type(mask: BitVector) -> Self {
        let n = mask.len();
        Self {
            x: mask,
            z: BitVector::zeros(n),
        }
    }

    /// Pure Z-type operator `Z^mask`.
    pub fn z_type(mask: BitVector) -> Self {
        let n = mask.len();
        Self {
            x: BitVector::zeros(n),
            z: mask,
        }
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn x_mask(&self) -> &BitVector {
        &self.x
    }

    #[inline]
    pub fn z_mask(&self) -> &BitVector {
        &self.z
    }

    #[inline]
    pub fn get(&self, q: usize) -> Pauli {
        Pauli::from_bits(self.x.get(q), self.z.get(q))
    }

    pub fn set(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        self.x.set(q, x);
        self.z.set(q, z);
    }

    /// Multiplies in a single-qubit Pauli on `q` (phase dropped).
    pub fn apply(&mut self, q: usize, p: Pauli) {
        let (x, z) = p.bits();
        if x {
            self.x.flip(q);
        }
        if z {
            self.z.flip(q);
        }
    }

    pub fn weight(&self) -> usize {
        self.x.or(&self.z).weight()
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    /// Product up to phase.
    pub fn compose(&self, other: &PauliOperator) -> PauliOperator {
        PauliOperator {
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
        }
    }

    pub fn compose_assign(&mut self, other: &PauliOperator) {
        self.x.xor_assign(&other.x);
        self.z.xor_assign(&other.z);
    }

    /// Symplectic product: true when the operators anticommute.
    pub fn anticommutes_with(&self, other: &PauliOperator) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    pub fn commutes_with(&self, other: &PauliOperator) -> bool {
        !self.anticommutes_with(other)
    }

    /// Symplectic vector `(x | z)` of length 2n.
    pub fn to_symplectic(&self) -> BitVector {
        self.x.concat(&self.z)
    }

    pub fn from_symplectic(v: &BitVector) -> Result<Self> {
        if v.len() % 2 != 0 {
            return Err(Error::Dimension(format!(
                "symplectic vector has odd length {}",
                v.len()
            )));
        }
        let n = v.len() / 2;
        Ok(Self {
            x: v.slice(0, n),
            z: v.slice(n, 2 * n),
        })
    }

    /// Restriction to qubits `start..end`.
    pub fn slice(&self, start: usize, end: usize) -> PauliOperator {
        PauliOperator {
            x: self.x.slice(start, end),
            z: self.z.slice(start, end),
        }
    }

    /// Ordering used to break decoder ties: X masks compared as printed
    /// bit strings, then Z masks.
    pub fn lex_cmp(&self, other: &PauliOperator) -> Ordering {
        fn cmp_bits(a: &BitVector, b: &BitVector) -> Ordering {
            a.iter().cmp(b.iter())
        }
        cmp_bits(&self.x, &other.x).then_with(|| cmp_bits(&self.z, &other.z))
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_qubits()).filter(move |&q| self.x.get(q) || self.z.get(q))
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in 0..self.num_qubits() {
            write!(f, "{}", self.get(q).symbol())?;
        }
        Ok(())
    }
}

impl fmt::Debug for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PauliOperator({self})")
    }
}

impl FromStr for PauliOperator {
    type Err = Error;

    /// Parses strings such as `XIZZY`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut op = PauliOperator::identity(s.chars().count());
        for (q, c) in s.chars().enumerate() {
            let p = match c.to_ascii_uppercase() {
                'I' | '_' | '.' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => {
                    return Err(Error::Parse {
                        line: 0,
                        message: format!("unexpected Pauli symbol {other:?}"),
                    })
                }
            };
            op.set(q, p);
        }
        Ok(op)
    }
}

/// Pauli operator with phase: `i^phase · X^x · Z^z` (X applied after Z).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SignedPauli {
    phase: u8,
    x: BitVector,
    z: BitVector,
}

impl SignedPauli {
    pub fn identity(n: usize) -> Self {
        Self {
            phase: 0,
            x: BitVector::zeros(n),
            z: BitVector::zeros(n),
        }
    }

    /// The Hermitian operator with +1 sign whose support matches `p`
    /// (so a `Y` position is `+Y`, not `XZ`).
    pub fn hermitian(p: &PauliOperator) -> Self {
        let y = p.x_mask().and(p.z_mask()).weight();
        Self {
            phase: (y % 4) as u8,
            x: p.x_mask().clone(),
            z: p.z_mask().clone(),
        }
    }

    pub fn negate(&mut self) {
        self.phase = (self.phase + 2) % 4;
    }

    pub fn negated(mut self) -> Self {
        self.negate();
        self
    }

    #[inline]
    pub fn num_qubits(&self) -> usize {
        self.x.len()
    }

    pub fn x_mask(&self) -> &BitVector {
        &self.x
    }

    pub fn z_mask(&self) -> &BitVector {
        &self.z
    }

    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn unsigned(&self) -> PauliOperator {
        PauliOperator {
            x: self.x.clone(),
            z: self.z.clone(),
        }
    }

    /// Phase relative to the Hermitian representative: 0 for `+P`, 2 for `-P`,
    /// odd values when the operator is not Hermitian.
    pub fn sign_phase(&self) -> u8 {
        let y = self.x.and(&self.z).weight() as u8;
        (self.phase + 4 - y % 4) % 4
    }

    /// True for `-P` where `P` is the Hermitian representative.
    pub fn is_negative(&self) -> bool {
        self.sign_phase() == 2
    }

    pub fn is_hermitian(&self) -> bool {
        self.sign_phase() % 2 == 0
    }

    /// Returns `self · other`.
    pub fn mul(&self, other: &SignedPauli) -> SignedPauli {
        let swap = self.z.dot(&other.x) as u8;
        SignedPauli {
            phase: (self.phase + other.phase + 2 * swap) % 4,
            x: self.x.xor(&other.x),
            z: self.z.xor(&other.z),
        }
    }

    pub fn anticommutes_with(&self, other: &SignedPauli) -> bool {
        self.x.dot(&other.z) ^ self.z.dot(&other.x)
    }

    #[inline]
    fn xz(&self, q: usize) -> (u8, u8) {
        (self.x.get(q) as u8, self.z.get(q) as u8)
    }

    pub fn conj_h(&mut self, q: usize) {
        let (x, z) = self.xz(q);
        self.phase = (self.phase + 2 * (x & z)) % 4;
        self.x.set(q, z == 1);
        self.z.set(q, x == 1);
    }

    pub fn conj_s(&mut self, q: usize) {
        let (x, _) = self.xz(q);
        self.phase = (self.phase + x) % 4;
        if x == 1 {
            self.z.flip(q);
        }
    }

    pub fn conj_sdg(&mut self, q: usize) {
        let (x, _) = self.xz(q);
        self.phase = (self.phase + 3 * x) % 4;
        if x == 1 {
            self.z.flip(q);
        }
    }

    /// Conjugation by a single-qubit Pauli gate flips the sign of anticommuting factors.
    pub fn conj_pauli(&mut self, q: usize, p: Pauli) {
        let (x, z) = self.xz(q);
        let (px, pz) = p.bits();
        let anti = (x & pz as u8) ^ (z & px as u8);
        self.phase = (self.phase + 2 * anti) % 4;
    }

    pub fn conj_cnot(&mut self, control: usize, target: usize) {
        if self.x.get(control) {
            self.x.flip(target);
        }
        if self.z.get(target) {
            self.z.flip(control);
        }
    }

    pub fn conj_cz(&mut self, a: usize, b: usize) {
        let xa = self.x.get(a);
        let xb = self.x.get(b);
        if xa && xb {
            self.phase = (self.phase + 2) % 4;
        }
        if xb {
            self.z.flip(a);
        }
        if xa {
            self.z.flip(b);
        }
    }

    /// Embeds into a larger register, placing qubit `i` at `map[i]`.
    pub fn embed(&self, width: usize, map: &[usize]) -> SignedPauli {
        let mut out = SignedPauli::identity(width);
        out.phase = self.phase;
        for q in 0..self.num_qubits() {
            out.x.set(map[q], self.x.get(q));
            out.z.set(map[q], self.z.get(q));
        }
        out
    }

    /// Restriction to the qubits listed in `qubits`; the phase is kept.
    pub fn restrict(&self, qubits: &[usize]) -> SignedPauli {
        let mut out = SignedPauli::identity(qubits.len());
        out.phase = self.phase;
        for (i, &q) in qubits.iter().enumerate() {
            out.x.set(i, self.x.get(q));
            out.z.set(i, self.z.get(q));
        }
        out
    }
}

impl fmt::Display for SignedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = match self.sign_phase() {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        f.write_str(sign)?;
        write!(f, "{}", self.unsigned())
    }
}
