//! Problem instances: generation of a function with a planted hidden
//! subgroup, evaluation, the per-node subfunction oracles, and the classical
//! brute-force reference solver.
//!
//! The function is stored as a dense table of `2^n` words. Desk-scale guards
//! (`n - t <= 12`, `2^t * m <= 64`, at most 8 nodes) keep every register
//! value in one machine word and every enumeration cheap.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{self, BitVector, Gf2Basis};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("guard violated: {0}")]
    Guard(String),
    #[error("cannot parse instance: {0}")]
    Parse(String),
}

/// Parameters of a generated instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Total input bits.
    pub n: u32,
    /// Node-index bits; the network has `2^t` nodes.
    pub t: u32,
    /// Output bits.
    pub m: u32,
    /// Planted rank of the hidden subgroup.
    pub k: u32,
    /// RNG seed for generation.
    pub seed: u64,
}

impl ProblemParams {
    pub fn validate(&self) -> Result<(), InstanceError> {
        let &ProblemParams { n, t, m, k, .. } = self;
        if t < 1 || t >= n {
            return Err(InstanceError::Guard(format!(
                "1 <= t < n violated: t = {t}, n = {n}"
            )));
        }
        if t > 3 {
            return Err(InstanceError::Guard(format!(
                "t <= 3 violated: at most 8 nodes are supported, got t = {t}"
            )));
        }
        if k > n {
            return Err(InstanceError::Guard(format!(
                "k <= n violated: k = {k}, n = {n}"
            )));
        }
        if m < 1 {
            return Err(InstanceError::Guard("m >= 1 violated".into()));
        }
        if m < n - k {
            return Err(InstanceError::Infeasible(format!(
                "m >= n-k violated: need 2^(n-k) = {} distinct values but the codomain \
                 holds only 2^m = {}",
                1u64 << (n - k),
                1u64 << m
            )));
        }
        if n - t > 12 {
            return Err(InstanceError::Guard(format!(
                "n-t <= 12 violated: n-t = {}",
                n - t
            )));
        }
        if (1u64 << t) * m as u64 > 64 {
            return Err(InstanceError::Guard(format!(
                "2^t * m <= 64 violated: {}",
                (1u64 << t) * m as u64
            )));
        }
        Ok(())
    }

    /// Number of nodes `2^t`.
    pub fn node_count(&self) -> u32 {
        1 << self.t
    }
}

/// A generalized-Simon function with its planted hidden subgroup and the
/// derived left/right projections.
///
/// Immutable after construction; safe to share read-only across threads.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HspInstance {
    params: ProblemParams,
    s_basis: Gf2Basis,
    f_table: Vec<u64>,
    sl_basis: Gf2Basis,
    sr_basis: Gf2Basis,
}

/// First `count` entries of a seeded Fisher-Yates shuffle of `0..2^m`,
/// computed lazily so large codomains never materialize.
fn sample_distinct_words(rng: &mut ChaCha12Rng, m: u32, count: usize) -> Vec<u64> {
    let total = 1u64 << m;
    debug_assert!(count as u64 <= total);
    let mut moved: HashMap<u64, u64> = HashMap::new();
    let mut out = Vec::with_capacity(count);
    for i in 0..count as u64 {
        let j = rng.random_range(i..total);
        let vi = moved.get(&i).copied().unwrap_or(i);
        let vj = moved.get(&j).copied().unwrap_or(j);
        out.push(vj);
        moved.insert(j, vi);
    }
    out
}

/// RREF basis of the projections of `basis` onto a coordinate window.
fn projected_basis(
    basis: &Gf2Basis,
    project: impl Fn(BitVector) -> BitVector,
    width: u32,
) -> Gf2Basis {
    let mut out = Gf2Basis::empty(width);
    for v in basis.vectors() {
        out.extend_if_independent(project(*v));
    }
    Gf2Basis::from_vectors(width, out.rref()).expect("rref rows are independent")
}

impl HspInstance {
    /// Generate an instance: a uniformly random rank-`k` basis is planted and
    /// every coset of its span receives a distinct `m`-bit value.
    pub fn generate(params: ProblemParams) -> Result<Self, InstanceError> {
        params.validate()?;
        let mut rng = ChaCha12Rng::seed_from_u64(params.seed);
        let ProblemParams { n, k, m, .. } = params;

        let mut s_basis = Gf2Basis::empty(n);
        while s_basis.rank() < k as usize {
            let candidate = BitVector::new(n, rng.random_range(0..1u32 << n));
            s_basis.extend_if_independent(candidate);
        }

        let coset_count = 1usize << (n - k);
        let values = sample_distinct_words(&mut rng, m, coset_count);

        // Cosets are indexed by first appearance of their canonical (RREF
        // reduced) representative when scanning inputs in increasing order.
        let rows = s_basis.rref();
        let mut coset_index: HashMap<u32, usize> = HashMap::new();
        let mut f_table = Vec::with_capacity(1usize << n);
        for x in 0..1u32 << n {
            let rep = gf2::reduce(BitVector::new(n, x), &rows).bits();
            let next = coset_index.len();
            let idx = *coset_index.entry(rep).or_insert(next);
            f_table.push(values[idx]);
        }
        debug_assert_eq!(coset_index.len(), coset_count);

        Ok(Self::assemble(params, s_basis, f_table))
    }

    fn assemble(params: ProblemParams, s_basis: Gf2Basis, f_table: Vec<u64>) -> Self {
        let ProblemParams { n, t, .. } = params;
        let sl_basis = projected_basis(&s_basis, |v| v.left(n - t), n - t);
        let sr_basis = projected_basis(&s_basis, |v| v.right(t), t);
        Self {
            params,
            s_basis,
            f_table,
            sl_basis,
            sr_basis,
        }
    }

    pub fn params(&self) -> &ProblemParams {
        &self.params
    }

    /// Basis of the planted hidden subgroup.
    pub fn s_basis(&self) -> &Gf2Basis {
        &self.s_basis
    }

    /// Basis of the left projection of the hidden subgroup (width `n - t`).
    pub fn sl_basis(&self) -> &Gf2Basis {
        &self.sl_basis
    }

    /// Basis of the right projection (width `t`); diagnostics only.
    pub fn sr_basis(&self) -> &Gf2Basis {
        &self.sr_basis
    }

    /// Rank of the left projection.
    pub fn k_l(&self) -> u32 {
        self.sl_basis.rank() as u32
    }

    /// Evaluate the function; a plain table lookup.
    pub fn f_eval(&self, x: BitVector) -> u64 {
        assert_eq!(x.width(), self.params.n);
        self.f_table[x.bits() as usize]
    }

    pub fn f_table(&self) -> &[u64] {
        &self.f_table
    }

    /// The multiset of all per-node values at `u`, sorted ascending.
    pub fn multiset_g(&self, u: BitVector) -> Vec<u64> {
        let t = self.params.t;
        let mut values: Vec<u64> = (0..self.params.node_count())
            .map(|w| self.f_eval(u.concat(BitVector::new(t, w))))
            .collect();
        values.sort_unstable();
        values
    }

    /// Nodes whose subfunction takes the value `z` at `u`.
    pub fn matching_nodes(&self, u: BitVector, z: u64) -> Vec<BitVector> {
        let t = self.params.t;
        (0..self.params.node_count())
            .map(|w| BitVector::new(t, w))
            .filter(|w| self.f_eval(u.concat(*w)) == z)
            .collect()
    }

    /// Concatenation of all per-node values at `u` in ascending lexicographic
    /// order, packed into one `2^t * m` bit word (duplicates kept).
    pub fn sorted_signature(&self, u: BitVector) -> u64 {
        let m = self.params.m;
        self.multiset_g(u)
            .into_iter()
            .fold(0u64, |acc, v| (acc << m) | v)
    }

    /// Ground-truth oracle: scan all inputs for `{ s : f(0) = f(s) }`.
    pub fn brute_force_solve(&self) -> BTreeSet<BitVector> {
        let n = self.params.n;
        assert!(n <= 12, "brute force limited to n <= 12");
        let f0 = self.f_table[0];
        (0..1u32 << n)
            .map(|x| BitVector::new(n, x))
            .filter(|x| self.f_table[x.bits() as usize] == f0)
            .collect()
    }

    /// One oracle per node, ordered by node index.
    pub fn node_oracles(&self) -> Vec<NodeOracle<'_>> {
        (0..self.params.node_count())
            .map(|w| NodeOracle {
                w: BitVector::new(self.params.t, w),
                instance: self,
                quantum_queries: AtomicU64::new(0),
                classical_queries: AtomicU64::new(0),
            })
            .collect()
    }

    pub fn to_json_string(&self) -> String {
        let hex_width = (self.params.m as usize).div_ceil(4);
        let file = InstanceFile {
            n: self.params.n,
            t: self.params.t,
            m: self.params.m,
            k: self.params.k,
            seed: self.params.seed,
            s_basis: self
                .s_basis
                .vectors()
                .iter()
                .map(|v| v.to_string())
                .collect(),
            f_table: self
                .f_table
                .iter()
                .map(|v| format!("{v:0hex_width$x}"))
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("instance serialization cannot fail")
    }

    /// Parse an instance file. Derived bases are recomputed from `s_basis`;
    /// the table is taken verbatim so that corrupted files can be loaded and
    /// then rejected by explicit verification.
    pub fn from_json_str(s: &str) -> Result<Self, InstanceError> {
        let file: InstanceFile =
            serde_json::from_str(s).map_err(|e| InstanceError::Parse(e.to_string()))?;
        let params = ProblemParams {
            n: file.n,
            t: file.t,
            m: file.m,
            k: file.k,
            seed: file.seed,
        };
        params.validate()?;
        let mut vectors = Vec::with_capacity(file.s_basis.len());
        for s in &file.s_basis {
            let v: BitVector = s
                .parse()
                .map_err(|e: gf2::Gf2Error| InstanceError::Parse(e.to_string()))?;
            if v.width() != params.n {
                return Err(InstanceError::Parse(format!(
                    "basis vector {s:?} has width {} but n = {}",
                    v.width(),
                    params.n
                )));
            }
            vectors.push(v);
        }
        let s_basis = Gf2Basis::from_vectors(params.n, vectors)
            .map_err(|e| InstanceError::Parse(e.to_string()))?;
        if s_basis.rank() != params.k as usize {
            return Err(InstanceError::Parse(format!(
                "s_basis has rank {} but k = {}",
                s_basis.rank(),
                params.k
            )));
        }
        if file.f_table.len() != 1usize << params.n {
            return Err(InstanceError::Parse(format!(
                "f_table has {} entries, expected {}",
                file.f_table.len(),
                1usize << params.n
            )));
        }
        let mut f_table = Vec::with_capacity(file.f_table.len());
        for word in &file.f_table {
            let v = u64::from_str_radix(word, 16)
                .map_err(|e| InstanceError::Parse(format!("bad table word {word:?}: {e}")))?;
            if v >= 1u64 << params.m {
                return Err(InstanceError::Parse(format!(
                    "table word {word:?} does not fit in {} bits",
                    params.m
                )));
            }
            f_table.push(v);
        }
        Ok(Self::assemble(params, s_basis, f_table))
    }
}

/// The on-disk instance schema.
#[derive(Serialize, Deserialize)]
struct InstanceFile {
    n: u32,
    t: u32,
    m: u32,
    k: u32,
    seed: u64,
    s_basis: Vec<String>,
    f_table: Vec<String>,
}

/// Public dimensions a solver is allowed to see.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleDims {
    pub n: u32,
    pub t: u32,
    pub m: u32,
}

/// One node's query interface to its subfunction `f_w(u) = f(uw)`.
///
/// The planted subgroup is not reachable through this type; solvers see only
/// the dimensions and the oracle itself. Counters are atomic so a single run
/// may share nodes across its own bookkeeping without extra locking.
#[derive(Debug)]
pub struct NodeOracle<'a> {
    w: BitVector,
    instance: &'a HspInstance,
    quantum_queries: AtomicU64,
    classical_queries: AtomicU64,
}

impl<'a> NodeOracle<'a> {
    /// Node index as a `t`-bit string.
    pub fn w(&self) -> BitVector {
        self.w
    }

    pub fn dims(&self) -> OracleDims {
        let p = self.instance.params();
        OracleDims {
            n: p.n,
            t: p.t,
            m: p.m,
        }
    }

    /// Classical query of `f_w(u)`; increments this node's classical counter.
    pub fn query(&self, u: BitVector) -> u64 {
        self.classical_queries.fetch_add(1, Ordering::Relaxed);
        self.eval(u.bits())
    }

    /// Raw subfunction value, used inside a single quantum query where one
    /// application touches every basis state.
    pub(crate) fn eval(&self, u_bits: u32) -> u64 {
        let p = self.instance.params();
        let x = (u_bits << p.t) | self.w.bits();
        self.instance.f_table[x as usize]
    }

    pub(crate) fn count_quantum_query(&self) {
        self.quantum_queries.fetch_add(1, Ordering::Relaxed);
    }

    pub fn quantum_queries(&self) -> u64 {
        self.quantum_queries.load(Ordering::Relaxed)
    }

    pub fn classical_queries(&self) -> u64 {
        self.classical_queries.load(Ordering::Relaxed)
    }
}
