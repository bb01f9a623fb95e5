//! Simulation and exact solving of the generalized Simon problem in a
//! distributed-oracle setting.
//!
//! The crate is organized bottom-up:
//!
//! - [`gf2`] — GF(2) vectors, bases, spans, ranks, orthogonal complements.
//! - [`instance`] — instance generation with a planted hidden subgroup,
//!   per-node subfunction oracles, and the brute-force reference solver.
//! - [`engine`] — sparse state-vector simulation of the distributed circuit:
//!   Hadamard layer, node oracles, the sorting unitary, phase reflections,
//!   and measurement.
//! - [`solver`] — the sampling round, exact amplitude amplification, the
//!   exact subgroup reconstruction, and the non-exact variant with its
//!   failure-witness search.

pub mod engine;
pub mod gf2;
pub mod instance;
pub mod solver;

pub use engine::{BasisKey, QuantumState, RegisterLayout};
pub use gf2::{BitVector, Gf2Basis};
pub use instance::{HspInstance, InstanceError, NodeOracle, ProblemParams};
pub use solver::{PhasePair, SolverError, SolverTrace};
