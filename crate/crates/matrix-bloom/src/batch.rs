//! Batched 2-tuple queries with fixed-side hash reuse, and double-side
//! queries whose verdict does not depend on evaluation order.
//!
//! A batch fixes one tuple component and varies the other. The fixed
//! component's hash family runs exactly once for the whole batch, so a batch
//! of `t` items against a `(k1, k2)` filter costs `k1 + t*k2` invocations
//! (fixed-first) instead of `t*(k1 + k2)`; per-item hash work is then
//! `O(max(k1, k2))`. Verdicts are identical to running each tuple through a
//! single query, and bit probing short-circuits per item as usual.

use crate::error::{Error, Result};
use crate::filter::MatrixBloomFilter;
use crate::variants::JMatrixFilter;

/// Which tuple component stays fixed across a batch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchSide {
    /// `fixed` is a first component; `varying` are second components.
    FixedFirst,
    /// `fixed` is a second component; `varying` are first components.
    FixedSecond,
}

/// Hash evaluation order of a [`double_side_query`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryOrder {
    FirstThenSecond,
    SecondThenFirst,
}

/// One fixed component paired with an ordered sequence of varying ones.
#[derive(Debug, Clone)]
pub struct BatchRequest<'a, V: AsRef<[u8]>> {
    pub side: BatchSide,
    pub fixed: &'a [u8],
    pub varying: &'a [V],
}

/// Verdicts plus the hash work the batch consumed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchResult {
    /// Order-aligned with the request's `varying` sequence.
    pub verdicts: Vec<bool>,
    /// `(row, column)` hash-family invocations for the whole batch. Exact:
    /// component hashing is eager, so the counts depend only on the batch
    /// shape, never on verdicts.
    pub hash_invocations: (u64, u64),
}

/// A fixed component's hashing output, reused across a batch.
#[doc(hidden)]
#[derive(Debug)]
pub struct PreparedSide {
    square: Option<u64>,
    indices: Vec<u64>,
}

mod sealed {
    pub trait Sealed {}
    impl Sealed for crate::filter::MatrixBloomFilter {}
    impl Sealed for crate::variants::JMatrixFilter {}
}

/// Filters that accept batched and double-side tuple queries.
///
/// Implemented by [`MatrixBloomFilter`] and [`JMatrixFilter`]; the methods
/// are internal plumbing for [`batch_query`] and [`double_side_query`].
pub trait BatchTarget: sealed::Sealed {
    #[doc(hidden)]
    fn axis_counts(&self) -> (u32, u32);
    #[doc(hidden)]
    fn prepare(&self, side: BatchSide, fixed: &[u8]) -> PreparedSide;
    #[doc(hidden)]
    fn probe_prepared(&self, side: BatchSide, prepared: &PreparedSide, item: &[u8]) -> bool;
}

impl BatchTarget for MatrixBloomFilter {
    fn axis_counts(&self) -> (u32, u32) {
        (self.params().k1, self.params().k2)
    }

    fn prepare(&self, side: BatchSide, fixed: &[u8]) -> PreparedSide {
        let indices = match side {
            BatchSide::FixedFirst => self.row_indices(fixed),
            BatchSide::FixedSecond => self.col_indices(fixed),
        };
        PreparedSide { square: None, indices }
    }

    fn probe_prepared(&self, side: BatchSide, prepared: &PreparedSide, item: &[u8]) -> bool {
        match side {
            BatchSide::FixedFirst => {
                let cols = self.col_indices(item);
                self.probe(&prepared.indices, &cols)
            }
            BatchSide::FixedSecond => {
                let rows = self.row_indices(item);
                self.probe(&rows, &prepared.indices)
            }
        }
    }
}

impl BatchTarget for JMatrixFilter {
    fn axis_counts(&self) -> (u32, u32) {
        (self.plan().k, self.plan().k)
    }

    fn prepare(&self, side: BatchSide, fixed: &[u8]) -> PreparedSide {
        match side {
            // Fixing x1 pins the square, so partition runs once per batch.
            BatchSide::FixedFirst => PreparedSide {
                square: Some(self.partition_of(fixed)),
                indices: self.row_indices(fixed),
            },
            BatchSide::FixedSecond => {
                PreparedSide { square: None, indices: self.col_indices(fixed) }
            }
        }
    }

    fn probe_prepared(&self, side: BatchSide, prepared: &PreparedSide, item: &[u8]) -> bool {
        match side {
            BatchSide::FixedFirst => {
                let cols = self.col_indices(item);
                let square = prepared.square.expect("fixed-first preparation records the square");
                self.probe_square(square, &prepared.indices, &cols)
            }
            BatchSide::FixedSecond => {
                let square = self.partition_of(item);
                let rows = self.row_indices(item);
                self.probe_square(square, &rows, &prepared.indices)
            }
        }
    }
}

/// Runs a batch of partial-existence tests sharing one fixed component.
///
/// Each verdict equals the corresponding single-query verdict. The fixed
/// side is hashed once for the entire batch, the varying side once per item.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `varying` is empty.
pub fn batch_query<F, V>(filter: &F, request: &BatchRequest<'_, V>) -> Result<BatchResult>
where
    F: BatchTarget,
    V: AsRef<[u8]>,
{
    if request.varying.is_empty() {
        return Err(Error::InvalidParameter("batch varying sequence must be non-empty".into()));
    }
    let prepared = filter.prepare(request.side, request.fixed);
    let verdicts = request
        .varying
        .iter()
        .map(|item| filter.probe_prepared(request.side, &prepared, item.as_ref()))
        .collect();
    let (k1, k2) = filter.axis_counts();
    let t = request.varying.len() as u64;
    let hash_invocations = match request.side {
        BatchSide::FixedFirst => (u64::from(k1), u64::from(k2) * t),
        BatchSide::FixedSecond => (u64::from(k1) * t, u64::from(k2)),
    };
    Ok(BatchResult { verdicts, hash_invocations })
}

/// Queries `(x1, x2)` evaluating component hashes in the requested order.
///
/// The verdict is identical for both orders; the order only changes which
/// component's hash invocations are counted first, which matters solely to
/// concurrent counter observers.
pub fn double_side_query<F: BatchTarget>(
    filter: &F,
    x1: &[u8],
    x2: &[u8],
    order: QueryOrder,
) -> bool {
    match order {
        QueryOrder::FirstThenSecond => {
            let prepared = filter.prepare(BatchSide::FixedFirst, x1);
            filter.probe_prepared(BatchSide::FixedFirst, &prepared, x2)
        }
        QueryOrder::SecondThenFirst => {
            let prepared = filter.prepare(BatchSide::FixedSecond, x2);
            filter.probe_prepared(BatchSide::FixedSecond, &prepared, x1)
        }
    }
}
