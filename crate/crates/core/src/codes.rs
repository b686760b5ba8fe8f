//! Stabilizer and CSS codes, syndromes, and minimum-weight decoder tables.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};
use crate::pauli::{Pauli, PauliOperator};

/// Largest code handled by the packed fast paths (decoder tables, distance search).
pub const MAX_PACKED_QUBITS: usize = 64;

/// Largest code for which `distance_bruteforce` runs.
pub const MAX_BRUTEFORCE_QUBITS: usize = 12;

/// Classical binary linear code given by its parity-check matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalCode {
    n: usize,
    k: usize,
    parity_check: BitMatrix,
}

impl ClassicalCode {
    /// Dependent parity-check rows are allowed; `k = n - rank(parity_check)`.
    pub fn new(parity_check: BitMatrix) -> Self {
        let n = parity_check.num_cols();
        let k = n - parity_check.rank();
        Self { n, k, parity_check }
    }

    /// The [7,4,3] Hamming code.
    pub fn hamming7() -> Self {
        Self::new(BitMatrix::from_strs(&["1110100", "0111010", "0011101"]).expect("static matrix"))
    }

    /// The [23,12,7] binary Golay code, cyclic with generator
    /// g(x) = 1 + x^2 + x^4 + x^5 + x^6 + x^10 + x^11.
    pub fn golay23() -> Self {
        const G: [usize; 7] = [0, 2, 4, 5, 6, 10, 11];
        let mut gen = BitMatrix::zeros(12, 23);
        for shift in 0..12 {
            for &d in &G {
                gen.set(shift, shift + d, true);
            }
        }
        Self::new(gen.nullspace_basis())
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "hamming7" => Ok(Self::hamming7()),
            "golay23" => Ok(Self::golay23()),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    /// Rows of the generator matrix, one per codeword basis vector.
    pub fn generator(&self) -> BitMatrix {
        self.parity_check.nullspace_basis()
    }

    /// Minimum nonzero codeword weight by enumerating all 2^k codewords.
    pub fn min_distance(&self) -> Result<usize> {
        if self.k > 24 {
            return Err(Error::TooLarge(format!("2^{} codewords", self.k)));
        }
        let g = self.generator();
        let mut best = usize::MAX;
        for mask in 1u64..(1u64 << self.k) {
            let mut word = BitVector::zeros(self.n);
            for i in 0..self.k {
                if mask >> i & 1 == 1 {
                    word.xor_assign(g.row(i));
                }
            }
            best = best.min(word.weight());
        }
        Ok(best)
    }
}

/// Supports of the X-type and Z-type generators of a CSS code.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CssChecks {
    /// Row `i` is the support of X-type generator `i`; these detect Z errors.
    pub x_checks: BitMatrix,
    /// Row `i` is the support of Z-type generator `i`; these detect X errors.
    pub z_checks: BitMatrix,
    /// Index of each X-type generator in the full generator list.
    pub x_rows: Vec<usize>,
    /// Index of each Z-type generator in the full generator list.
    pub z_rows: Vec<usize>,
}

/// Syndrome: one bit per stabilizer generator.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Syndrome(pub BitVector);

impl Syndrome {
    pub fn bits(&self) -> &BitVector {
        &self.0
    }

    pub fn is_trivial(&self) -> bool {
        self.0.is_zero()
    }
}

impl fmt::Display for Syndrome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// An [[n,k,d]] stabilizer code with generator matrix (hx | hz).
#[derive(Clone, Debug)]
pub struct StabilizerCode {
    n: usize,
    k: usize,
    d: usize,
    hx: BitMatrix,
    hz: BitMatrix,
    logical_x: Vec<PauliOperator>,
    logical_z: Vec<PauliOperator>,
    css: Option<CssChecks>,
    name: Option<String>,
}

impl PartialEq for StabilizerCode {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.k == other.k
            && self.d == other.d
            && self.hx == other.hx
            && self.hz == other.hz
    }
}

impl StabilizerCode {
    /// Validates commutation, derives `k` and logical operators, and computes
    /// the distance by brute force when `distance` is `None`.
    pub fn new(hx: BitMatrix, hz: BitMatrix, distance: Option<usize>) -> Result<Self> {
        if hx.num_rows() != hz.num_rows() || hx.num_cols() != hz.num_cols() {
            return Err(Error::Dimension(format!(
                "hx is {}x{} but hz is {}x{}",
                hx.num_rows(),
                hx.num_cols(),
                hz.num_rows(),
                hz.num_cols()
            )));
        }
        let n = hx.num_cols();
        let gens: Vec<PauliOperator> = (0..hx.num_rows())
            .map(|i| PauliOperator::from_masks(hx.row(i).clone(), hz.row(i).clone()))
            .collect::<Result<_>>()?;
        for i in 0..gens.len() {
            for j in i + 1..gens.len() {
                if gens[i].anticommutes_with(&gens[j]) {
                    return Err(Error::InvalidCode(format!(
                        "generators {i} and {j} do not commute"
                    )));
                }
            }
        }
        let full = hx.hstack(&hz)?;
        let rank = full.rank();
        if rank > n {
            return Err(Error::InvalidCode(format!("rank {rank} exceeds n = {n}")));
        }
        let k = n - rank;
        if k == 0 {
            return Err(Error::InvalidCode("code encodes no logical qubits".into()));
        }
        let (logical_x, logical_z) = logical_operators(&gens, n, k)?;
        let css = detect_css(&hx, &hz);
        let mut code = Self {
            n,
            k,
            d: 0,
            hx,
            hz,
            logical_x,
            logical_z,
            css,
            name: None,
        };
        code.d = match distance {
            Some(d) => {
                if d == 0 {
                    return Err(Error::InvalidCode("distance must be positive".into()));
                }
                d
            }
            None => code.distance_bruteforce()?,
        };
        Ok(code)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    /// The [[5,1,3]] code with the stabiliser printed row by row as `hx | hz`.
    pub fn five_qubit() -> Self {
        let hx = BitMatrix::from_strs(&["11000", "01100", "00110", "00011"]).expect("static");
        let hz = BitMatrix::from_strs(&["00101", "10010", "01001", "10100"]).expect("static");
        Self::new(hx, hz, Some(3))
            .expect("five qubit code is valid")
            .with_name("five_qubit")
    }

    /// [[7,1,3]] code built from the Hamming code.
    pub fn steane7() -> Self {
        css_from_classical(&ClassicalCode::hamming7(), Some(3))
            .expect("Hamming code is self-orthogonal")
            .with_name("steane7")
    }

    /// [[23,1,7]] code built from the Golay code.
    pub fn golay23() -> Self {
        css_from_classical(&ClassicalCode::golay23(), Some(7))
            .expect("Golay code is self-orthogonal")
            .with_name("golay23")
    }

    pub const REGISTRY: [&'static str; 3] = ["five_qubit", "steane7", "golay23"];

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "five_qubit" => Ok(Self::five_qubit()),
            "steane7" => Ok(Self::steane7()),
            "golay23" => Ok(Self::golay23()),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }

    pub fn name(&self) -> Option<&str> {
        self.name.as_deref()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of correctable errors, floor((d-1)/2).
    pub fn t(&self) -> usize {
        (self.d - 1) / 2
    }

    pub fn hx(&self) -> &BitMatrix {
        &self.hx
    }

    pub fn hz(&self) -> &BitMatrix {
        &self.hz
    }

    pub fn num_generators(&self) -> usize {
        self.hx.num_rows()
    }

    pub fn generator(&self, i: usize) -> PauliOperator {
        PauliOperator::from_masks(self.hx.row(i).clone(), self.hz.row(i).clone())
            .expect("rows have equal length")
    }

    pub fn generators(&self) -> Vec<PauliOperator> {
        (0..self.num_generators()).map(|i| self.generator(i)).collect()
    }

    pub fn logical_x(&self) -> &[PauliOperator] {
        &self.logical_x
    }

    pub fn logical_z(&self) -> &[PauliOperator] {
        &self.logical_z
    }

    pub fn css(&self) -> Option<&CssChecks> {
        self.css.as_ref()
    }

    pub fn is_css(&self) -> bool {
        self.css.is_some()
    }

    /// `[[n,k,d]]`.
    pub fn label(&self) -> String {
        format!("[[{},{},{}]]", self.n, self.k, self.d)
    }

    /// Bit `i` is set when `e` anticommutes with generator `i`.
    pub fn commutation_syndrome(&self, e: &PauliOperator) -> Result<Syndrome> {
        if e.num_qubits() != self.n {
            return Err(Error::Dimension(format!(
                "error acts on {} qubits, code has {}",
                e.num_qubits(),
                self.n
            )));
        }
        let mut s = BitVector::zeros(self.num_generators());
        for i in 0..self.num_generators() {
            if self.hx.row(i).dot(e.z_mask()) ^ self.hz.row(i).dot(e.x_mask()) {
                s.set(i, true);
            }
        }
        Ok(Syndrome(s))
    }

    /// Element of the stabilizer group, up to phase.
    pub fn is_stabilizer(&self, e: &PauliOperator) -> bool {
        self.commutation_syndrome(e).is_ok_and(|s| s.is_trivial()) && !self.flips_logical(e)
    }

    /// Commutes with every generator but acts nontrivially on the code space.
    pub fn is_logical_error(&self, e: &PauliOperator) -> bool {
        self.commutation_syndrome(e).is_ok_and(|s| s.is_trivial()) && self.flips_logical(e)
    }

    fn flips_logical(&self, e: &PauliOperator) -> bool {
        self.logical_x
            .iter()
            .chain(&self.logical_z)
            .any(|l| l.anticommutes_with(e))
    }

    /// Minimal weight of a logical operator, by enumeration over Paulis of
    /// increasing weight.
    pub fn distance_bruteforce(&self) -> Result<usize> {
        if self.n > MAX_BRUTEFORCE_QUBITS {
            return Err(Error::TooLarge(format!(
                "distance search limited to {MAX_BRUTEFORCE_QUBITS} qubits, code has {}",
                self.n
            )));
        }
        let packed = PackedCode::new(self);
        for w in 1..=self.n {
            let mut found = false;
            for_each_pauli_of_weight(self.n, w, |x, z| {
                if packed.syndrome(x, z) == 0 && packed.flips_logical(x, z) {
                    found = true;
                    return false;
                }
                true
            });
            if found {
                return Ok(w);
            }
        }
        Err(Error::InvalidCode("no logical operator found".into()))
    }
}

/// Builds the CSS code whose X- and Z-type checks are both the rows of the
/// classical parity-check matrix. X-type generators come first.
pub fn css_from_classical(c: &ClassicalCode, distance: Option<usize>) -> Result<StabilizerCode> {
    let h = c.parity_check();
    if !h.is_self_orthogonal() {
        return Err(Error::NotSelfOrthogonal(
            "two parity checks (or one check with itself) overlap on an odd number of positions"
                .into(),
        ));
    }
    if 2 * c.k() < c.n() {
        return Err(Error::InvalidCode(format!(
            "2*k_c - n = {} is negative",
            2 * c.k() as isize - c.n() as isize
        )));
    }
    // Drop dependent checks so the generator count is exactly n - k, keeping
    // the surviving rows as given.
    let mut indep = BitMatrix::zeros(0, h.num_cols());
    for row in h.rows() {
        if !indep.row_space_contains(row) {
            indep.push_row(row.clone());
        }
    }
    let zeros = BitMatrix::zeros(indep.num_rows(), indep.num_cols());
    let hx = indep.vstack(&zeros)?;
    let hz = zeros.vstack(&indep)?;
    StabilizerCode::new(hx, hz, distance)
}

fn detect_css(hx: &BitMatrix, hz: &BitMatrix) -> Option<CssChecks> {
    let n = hx.num_cols();
    let mut x_rows = Vec::new();
    let mut z_rows = Vec::new();
    for i in 0..hx.num_rows() {
        match (hx.row(i).is_zero(), hz.row(i).is_zero()) {
            (false, true) => x_rows.push(i),
            (true, false) => z_rows.push(i),
            _ => return None,
        }
    }
    let x_checks =
        BitMatrix::from_rows(n, x_rows.iter().map(|&i| hx.row(i).clone()).collect()).ok()?;
    let z_checks =
        BitMatrix::from_rows(n, z_rows.iter().map(|&i| hz.row(i).clone()).collect()).ok()?;
    Some(CssChecks {
        x_checks,
        z_checks,
        x_rows,
        z_rows,
    })
}

/// Symplectic Gram-Schmidt over the normalizer. Z-type candidates are tried
/// first so CSS codes get Z-type logical Z operators.
fn logical_operators(
    gens: &[PauliOperator],
    n: usize,
    k: usize,
) -> Result<(Vec<PauliOperator>, Vec<PauliOperator>)> {
    // v = (vx | vz) commutes with g iff gx·vz + gz·vx = 0, i.e. (gz | gx)·v = 0.
    let mut constraint = BitMatrix::zeros(0, 2 * n);
    for g in gens {
        constraint.push_row(g.z_mask().concat(g.x_mask()));
    }
    let basis = constraint.nullspace_basis();
    let mut cands: Vec<PauliOperator> = basis
        .rows()
        .iter()
        .map(PauliOperator::from_symplectic)
        .collect::<Result<_>>()?;
    cands.sort_by_key(|p| !p.x_mask().is_zero());

    let mut xs = Vec::new();
    let mut zs = Vec::new();
    let mut queue: std::collections::VecDeque<PauliOperator> = cands.into();
    while let Some(u) = queue.pop_front() {
        let Some(j) = queue.iter().position(|w| w.anticommutes_with(&u)) else {
            continue;
        };
        let v = queue.remove(j).expect("index from position");
        for w in queue.iter_mut() {
            let anti_v = w.anticommutes_with(&v);
            let anti_u = w.anticommutes_with(&u);
            if anti_v {
                w.compose_assign(&u);
            }
            if anti_u {
                w.compose_assign(&v);
            }
        }
        zs.push(u);
        xs.push(v);
    }
    if xs.len() != k {
        return Err(Error::InvalidCode(format!(
            "found {} logical pairs, expected {k}",
            xs.len()
        )));
    }
    Ok((xs, zs))
}

/// Calls `f(x, z)` for every Pauli of exactly weight `w` on `n <= 64` qubits,
/// as packed masks; stops early when `f` returns false.
pub(crate) fn for_each_pauli_of_weight(n: usize, w: usize, mut f: impl FnMut(u64, u64) -> bool) {
    fn rec(
        n: usize,
        start: usize,
        left: usize,
        x: u64,
        z: u64,
        f: &mut dyn FnMut(u64, u64) -> bool,
    ) -> bool {
        if left == 0 {
            return f(x, z);
        }
        for q in start..=n - left {
            let bit = 1u64 << q;
            for (px, pz) in [(bit, 0), (bit, bit), (0, bit)] {
                if !rec(n, q + 1, left - 1, x | px, z | pz, f) {
                    return false;
                }
            }
        }
        true
    }
    if w > n {
        return;
    }
    rec(n, 0, w, 0, 0, &mut f);
}

/// Generators and logicals packed into machine words for inner loops.
#[derive(Clone, Debug)]
pub(crate) struct PackedCode {
    gens: Vec<(u64, u64)>,
    logicals: Vec<(u64, u64)>,
}

fn pack(v: &BitVector) -> u64 {
    v.to_u64()
}

impl PackedCode {
    pub(crate) fn new(code: &StabilizerCode) -> Self {
        assert!(code.n() <= MAX_PACKED_QUBITS);
        let gens = (0..code.num_generators())
            .map(|i| (pack(code.hx().row(i)), pack(code.hz().row(i))))
            .collect();
        let logicals = code
            .logical_x()
            .iter()
            .chain(code.logical_z())
            .map(|l| (pack(l.x_mask()), pack(l.z_mask())))
            .collect();
        Self { gens, logicals }
    }

    #[inline]
    pub(crate) fn syndrome(&self, x: u64, z: u64) -> u64 {
        let mut s = 0u64;
        for (i, &(gx, gz)) in self.gens.iter().enumerate() {
            s |= ((((gx & z) ^ (gz & x)).count_ones() & 1) as u64) << i;
        }
        s
    }

    #[inline]
    pub(crate) fn flips_logical(&self, x: u64, z: u64) -> bool {
        self.logicals
            .iter()
            .any(|&(lx, lz)| ((lx & z) ^ (lz & x)).count_ones() & 1 == 1)
    }
}

/// Minimum-weight coset-leader table from syndromes to corrections.
#[derive(Clone, Debug)]
pub struct DecoderTable {
    n: usize,
    num_checks: usize,
    entries: HashMap<u64, (u64, u64)>,
}

impl DecoderTable {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    fn key(&self, s: &BitVector) -> u64 {
        assert_eq!(s.len(), self.num_checks, "syndrome length mismatch");
        s.to_u64()
    }

    fn unpack(&self, (x, z): (u64, u64)) -> PauliOperator {
        PauliOperator::from_masks(BitVector::from_u64(self.n, x), BitVector::from_u64(self.n, z))
            .expect("equal lengths")
    }

    pub fn lookup(&self, s: &Syndrome) -> Option<PauliOperator> {
        self.entries.get(&self.key(&s.0)).map(|&e| self.unpack(e))
    }

    /// Table correction, or the identity for a syndrome outside the table.
    pub fn decode(&self, s: &Syndrome) -> PauliOperator {
        self.lookup(s)
            .unwrap_or_else(|| PauliOperator::identity(self.n))
    }

    /// Overrides one entry. Used for negative controls.
    pub fn set_entry(&mut self, s: &Syndrome, correction: &PauliOperator) {
        let key = self.key(&s.0);
        self.entries
            .insert(key, (correction.x_mask().to_u64(), correction.z_mask().to_u64()));
    }

    pub fn iter(&self) -> impl Iterator<Item = (Syndrome, PauliOperator)> + '_ {
        let mut keys: Vec<u64> = self.entries.keys().copied().collect();
        keys.sort_unstable();
        keys.into_iter().map(move |k| {
            (
                Syndrome(BitVector::from_u64(self.num_checks, k)),
                self.unpack(self.entries[&k]),
            )
        })
    }
}

/// Enumeration budget for decoder tables; beyond it the weight cutoff drops to t.
const TABLE_ENUMERATION_BUDGET: u128 = 4_000_000;

fn paulis_up_to_weight(n: usize, w: usize) -> u128 {
    let mut total = 0u128;
    let mut binom = 1u128;
    for i in 0..=w.min(n) {
        if i > 0 {
            binom = binom * (n - i + 1) as u128 / i as u128;
        }
        total += binom * 3u128.pow(i as u32);
    }
    total
}

/// Enumerates Paulis by increasing weight (up to t+1, or t when that would be
/// too many) and keeps, for every syndrome reached, a minimum-weight Pauli,
/// ties broken by [`PauliOperator::lex_cmp`]. Rejects codes where two
/// inequivalent errors of weight at most t share a syndrome.
pub fn build_decoder_table(code: &StabilizerCode) -> Result<DecoderTable> {
    let n = code.n();
    if n > MAX_PACKED_QUBITS || code.num_generators() > 64 {
        return Err(Error::TooLarge(format!(
            "decoder tables support at most {MAX_PACKED_QUBITS} qubits"
        )));
    }
    let t = code.t();
    let cutoff = if paulis_up_to_weight(n, t + 1) <= TABLE_ENUMERATION_BUDGET {
        t + 1
    } else {
        t
    };
    let packed = PackedCode::new(code);
    let full = if code.num_generators() >= 64 {
        u64::MAX
    } else {
        1u64 << code.num_generators()
    };
    let mut entries: HashMap<u64, (usize, u64, u64)> = HashMap::new();
    let mut failure = None;
    let lex_less = |(ax, az): (u64, u64), (bx, bz): (u64, u64)| -> bool {
        // Lowest qubit index is the leftmost printed character.
        fn cmp(a: u64, b: u64) -> std::cmp::Ordering {
            let d = a ^ b;
            if d == 0 {
                return std::cmp::Ordering::Equal;
            }
            if a >> d.trailing_zeros() & 1 == 0 {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        }
        cmp(ax, bx).then(cmp(az, bz)) == std::cmp::Ordering::Less
    };
    for w in 0..=cutoff {
        let mut visit = |x: u64, z: u64| -> bool {
            let s = packed.syndrome(x, z);
            match entries.get_mut(&s) {
                None => {
                    entries.insert(s, (w, x, z));
                }
                Some(entry) => {
                    let (w0, x0, z0) = *entry;
                    if w <= t && w0 <= t && packed.flips_logical(x ^ x0, z ^ z0) {
                        failure = Some((x0, z0, x, z));
                        return false;
                    }
                    if w == w0 && lex_less((x, z), (x0, z0)) {
                        *entry = (w, x, z);
                    }
                }
            }
            true
        };
        if w == 0 {
            visit(0, 0);
        } else {
            for_each_pauli_of_weight(n, w, &mut visit);
        }
        if let Some((x0, z0, x, z)) = failure {
            let show = |x: u64, z: u64| {
                PauliOperator::from_masks(BitVector::from_u64(n, x), BitVector::from_u64(n, z))
                    .expect("equal lengths")
                    .to_string()
            };
            return Err(Error::NotCorrectable {
                t,
                detail: format!(
                    "{} and {} share a syndrome but differ by a logical operator",
                    show(x0, z0),
                    show(x, z)
                ),
            });
        }
        if entries.len() as u64 == full && w >= t {
            break;
        }
    }
    Ok(DecoderTable {
        n,
        num_checks: code.num_generators(),
        entries: entries.into_iter().map(|(s, (_, x, z))| (s, (x, z))).collect(),
    })
}

/// Minimum-weight syndrome decoder for a classical parity-check matrix.
#[derive(Clone, Debug)]
pub struct ClassicalDecoder {
    n: usize,
    checks: BitMatrix,
    entries: HashMap<u64, u64>,
}

impl ClassicalDecoder {
    /// Enumerates error patterns by increasing weight until every syndrome in
    /// the column space has a leader (or the weight reaches `n`).
    pub fn new(checks: &BitMatrix) -> Result<Self> {
        let n = checks.num_cols();
        if n > MAX_PACKED_QUBITS || checks.num_rows() > 63 {
            return Err(Error::TooLarge("classical decoder limited to 64 bits".into()));
        }
        let rows: Vec<u64> = checks.rows().iter().map(|r| r.to_u64()).collect();
        let syndrome = |e: u64| -> u64 {
            rows.iter()
                .enumerate()
                .fold(0u64, |s, (i, &r)| s | ((((r & e).count_ones() & 1) as u64) << i))
        };
        let reachable = 1u64 << checks.rank();
        let mut entries = HashMap::new();
        entries.insert(0u64, 0u64);
        let mut w = 0;
        while (entries.len() as u64) < reachable && w < n {
            w += 1;
            let mut stack = vec![(0usize, 0u64, 0usize)];
            while let Some((start, e, depth)) = stack.pop() {
                if depth == w {
                    entries.entry(syndrome(e)).or_insert(e);
                    continue;
                }
                for q in (start..n).rev() {
                    if n - q >= w - depth {
                        stack.push((q + 1, e | 1u64 << q, depth + 1));
                    }
                }
            }
        }
        Ok(Self {
            n,
            checks: checks.clone(),
            entries,
        })
    }

    pub fn checks(&self) -> &BitMatrix {
        &self.checks
    }

    /// Minimum-weight error pattern for `syndrome` (zero if unreachable).
    pub fn decode(&self, syndrome: &BitVector) -> BitVector {
        let e = self.entries.get(&syndrome.to_u64()).copied().unwrap_or(0);
        BitVector::from_u64(self.n, e)
    }
}

/// Parses the code file format: `xxxxx|zzzzz` rows, `#` comments, and an
/// optional `# distance = d` directive. Without the directive the distance is
/// computed by brute force.
pub fn parse_code_file(text: &str) -> Result<StabilizerCode> {
    let mut xs = Vec::new();
    let mut zs = Vec::new();
    let mut lines = Vec::new();
    let mut distance = None;
    let mut width = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("distance") {
                let value = rest.trim().trim_start_matches([':', '=']).trim();
                distance = Some(value.parse::<usize>().map_err(|_| Error::Parse {
                    line: lineno,
                    message: format!("bad distance directive {comment:?}"),
                })?);
            }
            continue;
        }
        let parts: Vec<&str> = line.split('|').collect();
        if parts.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: "expected exactly one '|' separating the X and Z halves".into(),
            });
        }
        let x: BitVector = parts[0].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid X half {:?}", parts[0]),
        })?;
        let z: BitVector = parts[1].trim().parse().map_err(|_| Error::Parse {
            line: lineno,
            message: format!("invalid Z half {:?}", parts[1]),
        })?;
        if x.len() != z.len() {
            return Err(Error::Parse {
                line: lineno,
                message: format!("X half has {} bits, Z half has {}", x.len(), z.len()),
            });
        }
        match width {
            None => width = Some(x.len()),
            Some(w) if w != x.len() => {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("row has {} qubits, previous rows have {w}", x.len()),
                })
            }
            _ => {}
        }
        let row = PauliOperator::from_masks(x.clone(), z.clone())?;
        for (prev, &prev_line) in xs.iter().zip(&zs).zip(&lines) {
            let (px, pz): (&BitVector, &BitVector) = prev;
            let p = PauliOperator::from_masks(px.clone(), pz.clone())?;
            if p.anticommutes_with(&row) {
                return Err(Error::Parse {
                    line: lineno,
                    message: format!("generator does not commute with the one on line {prev_line}"),
                });
            }
        }
        xs.push(x);
        zs.push(z);
        lines.push(lineno);
    }
    let n = width.ok_or_else(|| Error::Parse {
        line: 0,
        message: "no generator rows".into(),
    })?;
    let hx = BitMatrix::from_rows(n, xs)?;
    let hz = BitMatrix::from_rows(n, zs)?;
    if hx.hstack(&hz)?.rank() != hx.num_rows() {
        return Err(Error::Parse {
            line: 0,
            message: "generators are linearly dependent".into(),
        });
    }
    StabilizerCode::new(hx, hz, distance)
}

/// Writes the code file format; `parse_code_file` inverts it.
pub fn emit_code_file(code: &StabilizerCode) -> String {
    let mut out = String::new();
    match code.name() {
        Some(name) => out.push_str(&format!("# {} {}\n", code.label(), name)),
        None => out.push_str(&format!("# {}\n", code.label())),
    }
    out.push_str(&format!("# distance = {}\n", code.d()));
    for i in 0..code.num_generators() {
        out.push_str(&format!("{}|{}\n", code.hx().row(i), code.hz().row(i)));
    }
    out
}

/// All Paulis of weight at most `w` on `n` qubits, identity first.
pub fn paulis_up_to(n: usize, w: usize) -> Vec<PauliOperator> {
    let mut out = vec![PauliOperator::identity(n)];
    fn rec(n: usize, start: usize, left: usize, cur: &mut PauliOperator, out: &mut Vec<PauliOperator>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for q in start..n {
            for p in Pauli::NONTRIVIAL {
                cur.set(q, p);
                rec(n, q + 1, left - 1, cur, out);
            }
            cur.set(q, Pauli::I);
        }
    }
    for weight in 1..=w.min(n) {
        let mut cur = PauliOperator::identity(n);
        rec(n, 0, weight, &mut cur, &mut out);
    }
    out
}
