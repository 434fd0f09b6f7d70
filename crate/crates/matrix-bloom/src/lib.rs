//! Bloom filters over 2-tuples, laid out as bit matrices. Inserting
//! `(x1, x2)` sets the intersections of `k1` hashed rows and `k2` hashed
//! columns; a query reads the same grid back and answers positive only if
//! every bit is set. All pairs sharing a first component share rows (and
//! likewise for columns), which is what the batched queries and the
//! repeating-component layouts exploit.
//!
//! The pieces:
//!
//! - [`MatrixBloomFilter`] with [`plan_generic`]: square-optimal sizing for
//!   tuple sets whose components do not repeat, and [`theoretical_fpr`] for
//!   the closed-form rate.
//! - [`mam_plan_from_ratio`] and [`plan_max_adaptive`]: per-axis optima for
//!   fully repeating components. The false positive target `(1/2)^{k1+k2}`
//!   holds at any fill level; the load factor tops out near 1/4.
//! - [`jm_plan`] and [`JMatrixFilter`]: `j` partitioned squares when one
//!   axis is much larger than the other, at minimum total storage.
//! - [`batch_query`] and [`double_side_query`]: one fixed component hashed
//!   once for a whole batch, and order-invariant two-sided lookups.
//! - [`Vbf`] and [`GeneralMultisetIndex`]: which of many sets contain an
//!   element, as per-set filters or as one (set id, element) matrix.
//! - [`ChainedHashTable`] and [`DoubleHashTable`]: exact baselines whose
//!   probe counts the filters are measured against.
//! - [`datasets`]: pair generators, lookup workloads, and the docword
//!   bag-of-words corpus format.
//! - [`experiments`]: the seeded experiment runner behind the `mbf` binary,
//!   emitting a fixed CSV schema.
//!
//! Everything is deterministic under a caller-supplied seed: filters with
//! the same seed match bit for bit, snapshots round-trip exactly, and an
//! experiment rerun reproduces its CSV except for wall-clock columns.
//! Hashing is H3-style per-bit universal hashing keyed off a splitmix
//! stream; integer items are encoded big-endian via
//! [`hash::canonical_int`].

pub mod acceptance;
pub mod baselines;
pub mod batch;
pub mod bitmatrix;
pub mod datasets;
pub mod error;
pub mod experiments;
pub mod filter;
pub mod hash;
pub mod multiset;
pub mod variants;

pub use acceptance::{run_all, CriterionResult};
pub use baselines::{ChainedHashTable, DoubleHashTable};
pub use batch::{
    batch_query, double_side_query, BatchRequest, BatchResult, BatchSide, BatchTarget, QueryOrder,
};
pub use bitmatrix::BitMatrix;
pub use datasets::{
    gen_full_repeating, gen_no_repeating, load_pairs, mix_lookup_set, parse_docword, save_pairs,
    DocwordData, LookupSet, TuplePair,
};
pub use error::{Error, Result};
pub use experiments::{
    csv_string, default_output_name, parse_csv, recompute_theory, run, write_csv, ExperimentKind,
    ExperimentSpec, ResultRow,
};
pub use filter::{
    plan_generic, theoretical_fpr, CounterSnapshot, InstrumentationCounters, MatrixBloomFilter,
    MatrixBloomParams, StandardBloomFilter,
};
pub use hash::{PartitionHash, UniversalHashFamily};
pub use multiset::{standard_fpr_exact, GeneralMultisetIndex, Vbf};
pub use variants::{
    jm_plan, jm_plan_from_exponent, jm_theoretical_fpr, mam_load_factor_expectation,
    mam_plan_from_ratio, plan_max_adaptive, JMatrixFilter, JMatrixPlan, MaxAdaptivePlan,
};
