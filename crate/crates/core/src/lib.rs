//! Solvers for cooperative data exchange.
//!
//! A group of clients each hold some of `n` packets and broadcast linear
//! combinations over a shared error-free channel until every client can
//! decode everything. This crate computes bounds on the number of
//! broadcasts, runs several constructive coding schemes, finds exact optima
//! for small instances, and drives randomized experiments.

pub mod bounds;
pub mod error;
pub mod field;
pub mod harness;
pub mod instance;
pub mod linalg;
pub mod oracle;
pub mod schemes;

pub use bounds::{bounds_report, ie_guarantee, lower_bound, upper_bound_leader, BoundsReport};
pub use error::{Error, Result};
pub use field::{smallest_prime_geq, FieldElem, FieldSpec, Op};
pub use instance::{Instance, NormalizedInstance, Stats, Violation};
pub use linalg::{find_avoiding_vector, solve_packets, CodingVector, Subspace};
pub use oracle::{feasible, optimal_tau, CodingMatrix, OracleResult, DEFAULT_BUDGET};
pub use schemes::{
    random_average_exact, random_average_mc, random_schedule, random_tau, run_ie, run_leader,
    simulate_payloads, verify_schedule, Schedule, SchemeKind, Transmission, VerifyReport,
    EXACT_ENUMERATION_CAP,
};
