//! Sparse state-vector simulation of the distributed register layout
//! `(n-t) + 2^t*m + 2^t*m` and the unitaries acting on it: the Hadamard
//! layer on the first register, the per-node XOR oracles, the sorting
//! unitary, the two phase reflections, and their compositions.
//!
//! Amplitudes live in a vector sorted by basis key. Operators are applied at
//! register granularity; all of them are either basis-state permutations,
//! diagonal phases, or the Walsh-Hadamard transform on the first register,
//! so the support never needs the dense `2^(n-t+2^(t+1)m)` vector.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;
use rand::Rng;

use crate::gf2::{self, BitVector, Gf2Basis};
use crate::instance::{HspInstance, NodeOracle};

/// Entries with squared-norm contribution below this are dropped.
pub const PRUNE_EPS: f64 = 1e-12;

/// Tolerance for normalization checks.
pub const NORM_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Register widths of the simulated circuit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    u_bits: u32,
    slot_count: u32,
    slot_bits: u32,
}

impl RegisterLayout {
    /// Layout for a first register of `u_bits` qubits, `slot_count` value
    /// slots of `slot_bits` qubits each, and a sorted register of the same
    /// total width as the slot block.
    pub fn new(u_bits: u32, slot_count: u32, slot_bits: u32) -> Self {
        assert!(
            (1..=12).contains(&u_bits),
            "u register limited to 12 qubits"
        );
        assert!(
            slot_count.is_power_of_two() && slot_count <= 8,
            "slot count must be a power of two up to 8"
        );
        assert!(slot_bits >= 1 && slot_count * slot_bits <= 64);
        Self {
            u_bits,
            slot_count,
            slot_bits,
        }
    }

    pub fn for_instance(inst: &HspInstance) -> Self {
        let p = inst.params();
        Self::new(p.n - p.t, p.node_count(), p.m)
    }

    pub fn u_bits(&self) -> u32 {
        self.u_bits
    }

    pub fn slot_count(&self) -> u32 {
        self.slot_count
    }

    pub fn slot_bits(&self) -> u32 {
        self.slot_bits
    }

    pub fn sorted_bits(&self) -> u32 {
        self.slot_count * self.slot_bits
    }

    pub fn total_qubits(&self) -> u32 {
        self.u_bits + 2 * self.sorted_bits()
    }

    /// Slot `i` sits at offset `i * slot_bits` from the left of the block.
    fn slot_shift(&self, i: u32) -> u32 {
        (self.slot_count - 1 - i) * self.slot_bits
    }

    pub fn slot_value(&self, slots: u64, i: u32) -> u64 {
        (slots >> self.slot_shift(i)) & ((1u64 << self.slot_bits) - 1)
    }

    /// The ascending-sorted concatenation of the current slot values.
    pub fn sorted_signature_of_slots(&self, slots: u64) -> u64 {
        let mut values = [0u64; 8];
        let count = self.slot_count as usize;
        for (i, v) in values[..count].iter_mut().enumerate() {
            *v = self.slot_value(slots, i as u32);
        }
        values[..count].sort_unstable();
        values[..count]
            .iter()
            .fold(0u64, |acc, v| (acc << self.slot_bits) | v)
    }
}

/// One computational basis state of the register layout.
///
/// The slot block and the sorted register are packed into one word each;
/// derived ordering groups equal `(slots, sorted)` pairs together, which the
/// Hadamard pass exploits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BasisKey {
    pub slots: u64,
    pub sorted: u64,
    pub u: BitVector,
}

/// Sparse map from basis keys to complex amplitudes.
///
/// All public operations are unitary, so a normalized input stays normalized
/// to within [`NORM_TOL`]; entries below [`PRUNE_EPS`] are pruned. States may
/// also hold sub-normalized projections, which the operations treat linearly.
#[derive(Clone, Debug)]
pub struct QuantumState {
    layout: RegisterLayout,
    amps: Vec<(BasisKey, Complex64)>,
}

impl QuantumState {
    /// `|0...0>`: a single all-zero key with amplitude one.
    pub fn zero_state(layout: RegisterLayout) -> Self {
        let key = BasisKey {
            slots: 0,
            sorted: 0,
            u: BitVector::zero(layout.u_bits),
        };
        Self {
            layout,
            amps: vec![(key, Complex64::new(1.0, 0.0))],
        }
    }

    /// Build a state from arbitrary entries (they are summed per key).
    pub fn from_entries(layout: RegisterLayout, entries: Vec<(BasisKey, Complex64)>) -> Self {
        let mut state = Self {
            layout,
            amps: entries,
        };
        state.normalize_rep();
        state
    }

    pub fn layout(&self) -> RegisterLayout {
        self.layout
    }

    pub fn amplitudes(&self) -> &[(BasisKey, Complex64)] {
        &self.amps
    }

    pub fn num_keys(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitude(&self, key: &BasisKey) -> Complex64 {
        match self.amps.binary_search_by(|e| e.0.cmp(key)) {
            Ok(i) => self.amps[i].1,
            Err(_) => ZERO,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|(_, a)| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Sort by key, merge duplicates, drop pruned entries.
    fn normalize_rep(&mut self) {
        self.amps.sort_unstable_by_key(|e| e.0);
        let mut out: Vec<(BasisKey, Complex64)> = Vec::with_capacity(self.amps.len());
        for (key, amp) in self.amps.drain(..) {
            match out.last_mut() {
                Some((last, acc)) if *last == key => *acc += amp,
                _ => out.push((key, amp)),
            }
        }
        out.retain(|(_, a)| a.norm() >= PRUNE_EPS);
        self.amps = out;
    }

    /// Hadamard layer on the first register: each entry `(u, rest)` with
    /// amplitude `a` contributes `(-1)^(u.z) a / sqrt(2^(n-t))` to `(z, rest)`.
    /// Self-inverse.
    pub fn hadamard_u(&mut self) {
        let n = 1usize << self.layout.u_bits;
        let scale = 1.0 / (n as f64).sqrt();
        let mut out = Vec::with_capacity(self.amps.len());
        let mut scratch = vec![ZERO; n];
        let mut i = 0;
        while i < self.amps.len() {
            let (slots, sorted) = (self.amps[i].0.slots, self.amps[i].0.sorted);
            let mut j = i;
            while j < self.amps.len()
                && self.amps[j].0.slots == slots
                && self.amps[j].0.sorted == sorted
            {
                scratch[self.amps[j].0.u.bits() as usize] = self.amps[j].1;
                j += 1;
            }
            walsh_hadamard(&mut scratch);
            for (z, slot) in scratch.iter_mut().enumerate() {
                let amp = *slot * scale;
                *slot = ZERO;
                if amp.norm() >= PRUNE_EPS {
                    let key = BasisKey {
                        slots,
                        sorted,
                        u: BitVector::new(self.layout.u_bits, z as u32),
                    };
                    out.push((key, amp));
                }
            }
            i = j;
        }
        // Groups were visited in ascending (slots, sorted) order and emitted
        // in ascending u order, so `out` is already sorted.
        self.amps = out;
    }

    /// XOR `f_w(u)` into node `w`'s slot; a basis-state permutation and an
    /// involution. Counts one quantum query against the node.
    pub fn apply_node_oracle(&mut self, node: &NodeOracle<'_>) {
        node.count_quantum_query();
        let shift = self.layout.slot_shift(node.w().bits());
        for (key, _) in self.amps.iter_mut() {
            key.slots ^= node.eval(key.u.bits()) << shift;
        }
        self.amps.sort_unstable_by_key(|e| e.0);
    }

    /// XOR the ascending-sorted concatenation of the slot values into the
    /// sorted register. Self-inverse.
    pub fn apply_usort(&mut self) {
        for (key, _) in self.amps.iter_mut() {
            key.sorted ^= self.layout.sorted_signature_of_slots(key.slots);
        }
        self.amps.sort_unstable_by_key(|e| e.0);
    }

    /// The state-preparation unitary: Hadamard layer, all oracles ascending
    /// (node `0^t` first), the sorting unitary, all oracles descending, and
    /// the Hadamard layer again. Costs two quantum queries per node.
    pub fn apply_a(&mut self, nodes: &[NodeOracle<'_>]) {
        self.check_nodes(nodes);
        self.hadamard_u();
        for node in nodes {
            self.apply_node_oracle(node);
        }
        self.apply_usort();
        for node in nodes.iter().rev() {
            self.apply_node_oracle(node);
        }
        self.hadamard_u();
    }

    /// Adjoint of [`QuantumState::apply_a`]: the reversed layer sequence with
    /// each self-inverse constituent; the palindromic layer order makes it
    /// coincide with the forward sequence. Costs two quantum queries per node.
    pub fn apply_a_dagger(&mut self, nodes: &[NodeOracle<'_>]) {
        self.check_nodes(nodes);
        self.hadamard_u();
        for node in nodes {
            self.apply_node_oracle(node);
        }
        self.apply_usort();
        for node in nodes.iter().rev() {
            self.apply_node_oracle(node);
        }
        self.hadamard_u();
    }

    fn check_nodes(&self, nodes: &[NodeOracle<'_>]) {
        assert_eq!(nodes.len() as u32, self.layout.slot_count, "node count");
        debug_assert!(nodes
            .iter()
            .enumerate()
            .all(|(i, node)| node.w().bits() as usize == i));
    }

    /// Multiply the amplitude of the all-zero basis state by `e^(i*phi)`.
    pub fn apply_r0(&mut self, phi: f64) {
        let key = BasisKey {
            slots: 0,
            sorted: 0,
            u: BitVector::zero(self.layout.u_bits),
        };
        if let Ok(i) = self.amps.binary_search_by(|e| e.0.cmp(&key)) {
            self.amps[i].1 *= Complex64::cis(phi);
        }
    }

    /// Multiply by `e^(i*varphi)` on every key whose first register lies
    /// outside the span of `y`; keys inside the span are untouched.
    pub fn apply_ra(&mut self, varphi: f64, y: &Gf2Basis) {
        assert_eq!(y.ambient_width(), self.layout.u_bits, "reflection width");
        let rows = y.rref();
        let phase = Complex64::cis(varphi);
        for (key, amp) in self.amps.iter_mut() {
            if !gf2::reduce(key.u, &rows).is_zero() {
                *amp *= phase;
            }
        }
    }

    /// The amplitude-amplification operator: the span reflection, the adjoint
    /// preparation, the zero-state phase, the preparation, and a global minus
    /// sign. Costs four quantum queries per node.
    pub fn apply_q(&mut self, phi: f64, varphi: f64, y: &Gf2Basis, nodes: &[NodeOracle<'_>]) {
        self.apply_ra(varphi, y);
        self.apply_a_dagger(nodes);
        self.apply_r0(phi);
        self.apply_a(nodes);
        for (_, amp) in self.amps.iter_mut() {
            *amp = -*amp;
        }
    }

    /// Marginal distribution of the first register.
    ///
    /// For a normalized state the probabilities sum to one within
    /// [`NORM_TOL`].
    pub fn first_register_distribution(&self) -> BTreeMap<BitVector, f64> {
        let mut dist = BTreeMap::new();
        for (key, amp) in &self.amps {
            *dist.entry(key.u).or_insert(0.0) += amp.norm_sqr();
        }
        dist
    }

    /// Sample the first register. Deterministic given the RNG state: the
    /// cumulative walk visits outcomes in ascending order.
    pub fn measure_first_register<R: Rng + ?Sized>(&self, rng: &mut R) -> BitVector {
        let dist = self.first_register_distribution();
        assert!(!dist.is_empty(), "measuring an empty state");
        let total: f64 = dist.values().sum();
        let target = rng.random::<f64>() * total;
        let mut acc = 0.0;
        let mut best = (BitVector::zero(self.layout.u_bits), -1.0);
        for (u, p) in &dist {
            acc += p;
            if acc > target {
                return *u;
            }
            if *p > best.1 {
                best = (*u, *p);
            }
        }
        // Rounding pushed the walk past every entry; fall back to the mode.
        best.0
    }

    /// One line per key, `u|slot0,slot1,...|sorted : re,im`, ordered by
    /// `(u, slots, sorted)`.
    pub fn dump(&self) -> String {
        let mut entries: Vec<&(BasisKey, Complex64)> = self.amps.iter().collect();
        entries.sort_unstable_by_key(|(k, _)| (k.u, k.slots, k.sorted));
        let mut out = String::new();
        for (key, amp) in entries {
            write!(out, "{}|", key.u).unwrap();
            for i in 0..self.layout.slot_count {
                if i > 0 {
                    out.push(',');
                }
                write!(
                    out,
                    "{:0width$b}",
                    self.layout.slot_value(key.slots, i),
                    width = self.layout.slot_bits as usize
                )
                .unwrap();
            }
            writeln!(
                out,
                "|{:0width$b} : {:.12e},{:.12e}",
                key.sorted,
                amp.re,
                amp.im,
                width = self.layout.sorted_bits() as usize
            )
            .unwrap();
        }
        out
    }
}

/// In-place unnormalized Walsh-Hadamard transform.
fn walsh_hadamard(buf: &mut [Complex64]) {
    let mut h = 1;
    while h < buf.len() {
        for chunk in buf.chunks_mut(2 * h) {
            let (lo, hi) = chunk.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let sum = *a + *b;
                let diff = *a - *b;
                *a = sum;
                *b = diff;
            }
        }
        h *= 2;
    }
}
