//! The solving pipelines over the node oracles: the plain sampling round,
//! the exact amplitude-amplified round, the exact reconstruction of the left
//! projection and of the full hidden subgroup, and the non-exact variant
//! together with a search for instances that expose its failure.
//!
//! Solvers see the oracle dimensions and the oracles themselves, never the
//! planted subgroup; everything else is reconstructed from measurements and
//! classical queries.

use std::collections::BTreeSet;

use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::engine::{QuantumState, RegisterLayout};
use crate::gf2::{BitVector, Gf2Basis};
use crate::instance::{HspInstance, NodeOracle, OracleDims, ProblemParams};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error(
        "degenerate phase case: n-t-r-d_l = {x} for n={n}, t={t}, r={r}, d_l={d_l} \
         (must be >= 1)"
    )]
    DegeneratePhases {
        n: u32,
        t: u32,
        r: u32,
        d_l: u32,
        x: i64,
    },
    #[error("promise violation: {0}")]
    PromiseViolation(String),
    #[error("internal invariant violated: {0}")]
    InternalInvariant(String),
}

/// The two rotation angles of one amplified round, together with the inputs
/// they were derived from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PhasePair {
    /// Angle of the zero-state reflection.
    pub phi: f64,
    /// Angle of the span reflection.
    pub varphi: f64,
    /// Number of independent measurements collected so far (`|Y| - 1`).
    pub r: u32,
    /// Assumed rank of the left projection.
    pub d_l: u32,
}

/// Closed-form angles that cancel the in-span component when the assumed
/// rank matches the true one:
/// `phi = 2*atan(sqrt(2^x / (3*2^x - 4)))` and
/// `varphi = acos((2^(x-1) - 1) / (2^x - 1))` with `x = n-t-r-d_l`.
pub fn compute_phases(n: u32, t: u32, r: u32, d_l: u32) -> Result<PhasePair, SolverError> {
    let x = n as i64 - t as i64 - r as i64 - d_l as i64;
    if x < 1 {
        return Err(SolverError::DegeneratePhases { n, t, r, d_l, x });
    }
    let p = (x as f64).exp2();
    let phi = 2.0 * (p / (3.0 * p - 4.0)).sqrt().atan();
    let varphi = ((p / 2.0 - 1.0) / (p - 1.0)).acos();
    Ok(PhasePair {
        phi,
        varphi,
        r,
        d_l,
    })
}

fn dims_of(nodes: &[NodeOracle<'_>]) -> OracleDims {
    assert!(!nodes.is_empty());
    let dims = nodes[0].dims();
    assert_eq!(nodes.len() as u32, 1 << dims.t, "incomplete node set");
    dims
}

fn layout_of(dims: OracleDims) -> RegisterLayout {
    RegisterLayout::new(dims.n - dims.t, 1 << dims.t, dims.m)
}

/// One sampling round: prepare the uniform-support state, measure the first
/// register, and extend `y` if the outcome is independent. Costs two quantum
/// queries per node.
pub fn dsl_round<R: Rng + ?Sized>(
    nodes: &[NodeOracle<'_>],
    y: &mut Gf2Basis,
    rng: &mut R,
) -> BitVector {
    let dims = dims_of(nodes);
    let mut state = QuantumState::zero_state(layout_of(dims));
    state.apply_a(nodes);
    let z = state.measure_first_register(rng);
    y.extend_if_independent(z);
    z
}

/// Result of one amplitude-amplified round.
#[derive(Clone, Debug)]
pub struct QaaOutcome {
    pub z: BitVector,
    /// First-register probability mass left inside the span of `y` after the
    /// amplification operator, before measuring.
    pub bad_probability: f64,
    pub phases: PhasePair,
}

/// One amplified round: prepare the state, apply the amplification operator
/// with the closed-form angles for the assumed rank `d_l`, and measure.
/// Costs six quantum queries per node.
pub fn qaa_round<R: Rng + ?Sized>(
    nodes: &[NodeOracle<'_>],
    y: &Gf2Basis,
    d_l: u32,
    rng: &mut R,
) -> Result<QaaOutcome, SolverError> {
    let dims = dims_of(nodes);
    let phases = compute_phases(dims.n, dims.t, y.rank() as u32, d_l)?;
    let mut state = QuantumState::zero_state(layout_of(dims));
    state.apply_a(nodes);
    state.apply_q(phases.phi, phases.varphi, y, nodes);
    let rows = y.rref();
    let bad_probability = state
        .first_register_distribution()
        .iter()
        .filter(|(u, _)| crate::gf2::reduce(**u, &rows).is_zero())
        .fold(0.0, |acc, (_, p)| acc + p);
    let z = state.measure_first_register(rng);
    Ok(QaaOutcome {
        z,
        bad_probability,
        phases,
    })
}

/// Which branch an iteration took after measuring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// The outcome was independent and joined the measurement set.
    ExtendedY,
    /// The outcome was already in the span; the assumed rank went up.
    IncrementedDl,
}

/// One iteration of the exact loop, recorded with the values it ran under.
#[derive(Clone, Debug, Serialize)]
pub struct IterationRecord {
    /// Assumed rank during the round.
    pub d_l: u32,
    /// Size of the measurement set counting the implicit zero vector.
    pub y_size: u32,
    /// Measured first-register outcome.
    pub z: BitVector,
    pub branch: Branch,
    /// In-span probability mass after the amplification operator.
    pub bad_probability: f64,
}

/// Query counters of one node at the end of a run.
#[derive(Clone, Debug, Serialize)]
pub struct NodeCounters {
    pub w: BitVector,
    pub quantum: u64,
    pub classical: u64,
}

/// Full record of a solver run.
#[derive(Clone, Debug, Serialize)]
pub struct SolverTrace {
    pub iterations: Vec<IterationRecord>,
    pub node_counters: Vec<NodeCounters>,
    /// Reconstructed basis of the left projection.
    pub recovered_sl_basis: Vec<BitVector>,
    /// Reconstructed hidden subgroup, sorted; absent if the run stopped at
    /// the left projection.
    pub recovered_s: Option<Vec<BitVector>>,
    /// Largest in-span mass over the iterations executed at the final
    /// assumed rank.
    pub max_bad_probability: f64,
}

impl SolverTrace {
    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization cannot fail")
    }

    fn snapshot_counters(nodes: &[NodeOracle<'_>]) -> Vec<NodeCounters> {
        nodes
            .iter()
            .map(|node| NodeCounters {
                w: node.w(),
                quantum: node.quantum_queries(),
                classical: node.classical_queries(),
            })
            .collect()
    }
}

/// Outcome of the exact left-projection search.
#[derive(Clone, Debug)]
pub struct EdslOutcome {
    pub sl_basis: Gf2Basis,
    pub trace: SolverTrace,
}

/// Exact reconstruction of the left projection: repeat amplified rounds,
/// growing either the measurement set or the assumed rank, until the set
/// has maximal size for the assumed rank; the answer is the orthogonal
/// complement of the span of the measurements.
pub fn edsl<R: Rng + ?Sized>(
    nodes: &[NodeOracle<'_>],
    rng: &mut R,
) -> Result<EdslOutcome, SolverError> {
    let dims = dims_of(nodes);
    let nt = dims.n - dims.t;
    let mut y = Gf2Basis::empty(nt);
    let mut d_l = 0u32;
    let mut iterations: Vec<IterationRecord> = Vec::new();

    // Termination is checked before each round, which also guarantees the
    // phase formulas stay away from their degenerate case.
    while y.rank() as u32 + 1 != nt + 1 - d_l {
        if iterations.len() as u32 > nt {
            return Err(SolverError::InternalInvariant(format!(
                "no termination after {} iterations (n-t = {nt})",
                iterations.len()
            )));
        }
        let round = qaa_round(nodes, &y, d_l, rng)?;
        let y_size = y.rank() as u32 + 1;
        let branch = if y.in_span(round.z) {
            Branch::IncrementedDl
        } else {
            Branch::ExtendedY
        };
        iterations.push(IterationRecord {
            d_l,
            y_size,
            z: round.z,
            branch,
            bad_probability: round.bad_probability,
        });
        match branch {
            Branch::IncrementedDl => d_l += 1,
            Branch::ExtendedY => {
                y.extend_if_independent(round.z);
            }
        }
    }

    let sl_basis = y.perp();
    let max_bad_probability = iterations
        .iter()
        .filter(|it| it.d_l == d_l)
        .map(|it| it.bad_probability)
        .fold(0.0, f64::max);
    let trace = SolverTrace {
        iterations,
        node_counters: SolverTrace::snapshot_counters(nodes),
        recovered_sl_basis: sl_basis.vectors().to_vec(),
        recovered_s: None,
        max_bad_probability,
    };
    Ok(EdslOutcome { sl_basis, trace })
}

/// The classical table from querying every node once at `u = 0`: entry `w`
/// holds `f(0^(n-t) w)`.
fn zero_row_table(nodes: &[NodeOracle<'_>]) -> Vec<u64> {
    let dims = dims_of(nodes);
    let zero_u = BitVector::zero(dims.n - dims.t);
    nodes.iter().map(|node| node.query(zero_u)).collect()
}

/// Exact assembly of the hidden subgroup from a basis of its left
/// projection: one classical query per node plus one per basis element, then
/// table lookups only.
pub fn eds(
    nodes: &[NodeOracle<'_>],
    sl_basis: &Gf2Basis,
) -> Result<BTreeSet<BitVector>, SolverError> {
    let dims = dims_of(nodes);
    let t = dims.t;
    assert_eq!(sl_basis.ambient_width(), dims.n - t);
    let table0 = zero_row_table(nodes);

    // Partner right parts: v_i with f(0 v_i) = f(e_i 0), looked up in the
    // zero-row table. A missing partner breaks the promise.
    let node0 = &nodes[0];
    let mut partners: Vec<BitVector> = Vec::with_capacity(sl_basis.rank());
    for e in sl_basis.vectors() {
        let target = node0.query(*e);
        let v = table0
            .iter()
            .position(|&val| val == target)
            .ok_or_else(|| {
                SolverError::PromiseViolation(format!("no right part v with f(0v) = f({e}0)"))
            })?;
        partners.push(BitVector::new(t, v as u32));
    }

    let mut s = BTreeSet::new();
    for j in 0..1u32 << sl_basis.rank() {
        let mut left = BitVector::zero(dims.n - t);
        let mut v_combo = BitVector::zero(t);
        for (i, (e, v)) in sl_basis.vectors().iter().zip(&partners).enumerate() {
            if j >> i & 1 == 1 {
                left = left.xor(*e);
                v_combo = v_combo.xor(*v);
            }
        }
        let target = table0[v_combo.bits() as usize];
        for (w, &val) in table0.iter().enumerate() {
            if val == target {
                s.insert(left.concat(BitVector::new(t, w as u32)));
            }
        }
    }
    Ok(s)
}

/// Outcome of the non-exact assembly.
#[derive(Clone, Debug)]
pub struct DsOutcome {
    pub s_prime: BTreeSet<BitVector>,
    /// Basis vectors of the input that turned out to lie in the true left
    /// projection, with their partner right parts.
    pub matched: Vec<(BitVector, BitVector)>,
    pub k_hat_l: u32,
}

/// Non-exact assembly driven by a candidate basis that may span more than
/// the true left projection. Basis vectors without a partner right part are
/// skipped, which is exactly what makes the output a (possibly proper)
/// subset of the hidden subgroup.
pub fn ds(nodes: &[NodeOracle<'_>], sl_prime_basis: &Gf2Basis) -> DsOutcome {
    let dims = dims_of(nodes);
    let t = dims.t;
    assert_eq!(sl_prime_basis.ambient_width(), dims.n - t);
    let table0 = zero_row_table(nodes);

    let node0 = &nodes[0];
    let mut matched: Vec<(BitVector, BitVector)> = Vec::new();
    for e in sl_prime_basis.vectors() {
        let target = node0.query(*e);
        if let Some(v) = table0.iter().position(|&val| val == target) {
            matched.push((*e, BitVector::new(t, v as u32)));
        }
    }

    let mut s_prime = BTreeSet::new();
    for j in 0..1u32 << matched.len() {
        let mut left = BitVector::zero(dims.n - t);
        let mut v_combo = BitVector::zero(t);
        for (i, (e, v)) in matched.iter().enumerate() {
            if j >> i & 1 == 1 {
                left = left.xor(*e);
                v_combo = v_combo.xor(*v);
            }
        }
        let target = table0[v_combo.bits() as usize];
        for (w, &val) in table0.iter().enumerate() {
            if val == target {
                s_prime.insert(left.concat(BitVector::new(t, w as u32)));
            }
        }
    }
    DsOutcome {
        k_hat_l: matched.len() as u32,
        s_prime,
        matched,
    }
}

/// The exact pipeline: reconstruct the left projection, then the full
/// subgroup, and return both with the combined trace.
pub fn solve_exact<R: Rng + ?Sized>(
    nodes: &[NodeOracle<'_>],
    rng: &mut R,
) -> Result<(BTreeSet<BitVector>, SolverTrace), SolverError> {
    let EdslOutcome {
        sl_basis,
        mut trace,
    } = edsl(nodes, rng)?;
    let s = eds(nodes, &sl_basis)?;
    trace.recovered_s = Some(s.iter().copied().collect());
    trace.node_counters = SolverTrace::snapshot_counters(nodes);
    Ok((s, trace))
}

/// A concrete demonstration that the non-exact assembly can miss part of the
/// hidden subgroup.
#[derive(Clone, Debug)]
pub struct DsWitness {
    pub params: ProblemParams,
    /// The candidate basis handed to the non-exact assembly.
    pub sl_prime_basis: Gf2Basis,
    pub s_prime: BTreeSet<BitVector>,
    pub s: BTreeSet<BitVector>,
    /// Elements of the hidden subgroup the assembly missed.
    pub missing: Vec<BitVector>,
}

/// Search small instances for a candidate left-projection basis on which the
/// non-exact assembly returns a proper subset of the hidden subgroup.
///
/// Candidates are the orthogonal complements of subspaces of the measurement
/// support, i.e. exactly the inputs an under-sampled run can produce. The
/// scan is deterministic; the first witness found is returned.
pub fn find_ds_witness(
    ns: impl IntoIterator<Item = u32>,
    ts: &[u32],
    seeds_per_combo: u64,
) -> Option<DsWitness> {
    for n in ns {
        for &t in ts {
            if t >= n {
                continue;
            }
            for k in 1..=n {
                let m = (n - k).max(1);
                for seed in 0..seeds_per_combo {
                    let params = ProblemParams { n, t, m, k, seed };
                    if params.validate().is_err() {
                        continue;
                    }
                    let inst = HspInstance::generate(params).expect("validated params");
                    if inst.k_l() == 0 {
                        continue;
                    }
                    if let Some(witness) = ds_witness_for(&inst) {
                        return Some(witness);
                    }
                }
            }
        }
    }
    None
}

fn ds_witness_for(inst: &HspInstance) -> Option<DsWitness> {
    let s = inst.brute_force_solve();
    let support = inst.sl_basis().perp();
    // Every subset of the support basis is a measurement set an under-run
    // sampling loop could have stopped at.
    for mask in 0..1u32 << support.rank() {
        let subset: Vec<BitVector> = support
            .vectors()
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, v)| *v)
            .collect();
        let y = Gf2Basis::from_vectors(support.ambient_width(), subset)
            .expect("subset of a basis is independent");
        let candidate = y.perp();
        let nodes = inst.node_oracles();
        let outcome = ds(&nodes, &candidate);
        debug_assert!(
            outcome.s_prime.is_subset(&s),
            "non-exact assembly escaped the hidden subgroup"
        );
        if outcome.s_prime != s {
            let missing = s.difference(&outcome.s_prime).copied().collect();
            return Some(DsWitness {
                params: *inst.params(),
                sl_prime_basis: candidate,
                s_prime: outcome.s_prime,
                s,
                missing,
            });
        }
    }
    None
}
