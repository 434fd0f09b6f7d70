//! Multi-set membership: a vBF baseline (one standard filter per set) and a
//! general index backed by a single matrix filter over (set id, element)
//! tuples.
//!
//! Both structures answer "which sets might hold this element" with possible
//! false inclusions and no false exclusions. The vBF must query all `v`
//! per-set filters; the matrix index answers through one batch query whose
//! element hashing is shared across candidates. Enumeration-style questions
//! require explicit candidate lists in both designs: Bloom structures cannot
//! enumerate their contents.

use std::f64::consts::LN_2;

use crate::batch::{batch_query, BatchRequest, BatchSide};
use crate::error::{Error, Result};
use crate::filter::{MatrixBloomFilter, MatrixBloomParams, StandardBloomFilter};
use crate::hash::{canonical_int, splitmix_at};

/// Exact false-positive probability of a standard Bloom filter of `m` bits
/// whose inserts and queries each draw `k` independent uniform indices, after
/// `n` distinct insertions.
///
/// Averages over the number of distinct indices in the query draw
/// (Stirling-number weights) and applies inclusion-exclusion over the
/// `k*n` insert draws, so it stays correct at small `m` where the usual
/// `(1 - e^{-kn/m})^k` estimate is visibly biased.
pub fn standard_fpr_exact(m: u32, k: u32, n: u64) -> f64 {
    assert!(m >= 1 && k >= 1, "degenerate geometry");
    let m_f = f64::from(m);
    let k_us = k as usize;
    // stirling[d] = S2(k, d): ways to split k draws into d nonempty groups.
    let mut stirling = vec![0f64; k_us + 1];
    stirling[0] = 1.0;
    for _ in 0..k_us {
        for d in (1..=k_us).rev() {
            stirling[d] = stirling[d - 1] + d as f64 * stirling[d];
        }
        stirling[0] = 0.0;
    }
    let kn = f64::from(k) * n as f64;
    let mut total = 0.0;
    for d in 1..=k_us.min(m as usize) {
        // P(query draw has exactly d distinct indices).
        let mut weight = stirling[d];
        for j in 0..d {
            weight *= (m_f - j as f64) / m_f;
        }
        for _ in d..k_us {
            weight /= m_f;
        }
        // P(d specific distinct bits are all set) by inclusion-exclusion.
        let mut p_set = 0.0;
        let mut binom = 1.0;
        for i in 0..=d {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            p_set += sign * binom * (1.0 - i as f64 / m_f).powf(kn);
            binom = binom * ((d - i) as f64) / ((i + 1) as f64);
        }
        total += weight * p_set;
    }
    total
}

/// One standard Bloom filter per set; set ids are dense indices `[0, v)`.
#[derive(Debug)]
pub struct Vbf {
    filters: Vec<StandardBloomFilter>,
}

impl Vbf {
    /// Sizes each per-set filter at its own optimum `m_i = ceil(k*n_i/ln2)`
    /// for the expected per-set cardinalities, with a shared `k`. Sub-filter
    /// seeds derive from `seed`, so the filters hash independently.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when `expected` is empty, `k` is zero, or
    /// any expected cardinality is zero.
    pub fn new(expected: &[u64], k: u32, seed: u64) -> Result<Self> {
        if expected.is_empty() {
            return Err(Error::InvalidParameter("vBF needs at least one set".into()));
        }
        if k == 0 {
            return Err(Error::InvalidParameter("k must be >= 1".into()));
        }
        let filters = expected
            .iter()
            .enumerate()
            .map(|(i, &n_i)| {
                if n_i == 0 {
                    return Err(Error::InvalidParameter(format!(
                        "set {i} has an expected cardinality of 0"
                    )));
                }
                let m = (f64::from(k) * n_i as f64 / LN_2).ceil() as u32;
                StandardBloomFilter::new(m, k, n_i, splitmix_at(seed, i as u64))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { filters })
    }

    /// Wraps caller-built filters, e.g. filters sharing one hash family for
    /// bit-level comparisons against the matrix layout.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when `filters` is empty.
    pub fn with_filters(filters: Vec<StandardBloomFilter>) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::InvalidParameter("vBF needs at least one set".into()));
        }
        Ok(Self { filters })
    }

    pub fn set_count(&self) -> usize {
        self.filters.len()
    }

    pub fn filters(&self) -> &[StandardBloomFilter] {
        &self.filters
    }

    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when `set_id >= v`; [`Error::Frozen`]
    /// after a freeze.
    pub fn insert(&mut self, set_id: usize, element: &[u8]) -> Result<()> {
        let v = self.filters.len();
        let filter = self.filters.get_mut(set_id).ok_or_else(|| {
            Error::InvalidParameter(format!("set id {set_id} out of range (v = {v})"))
        })?;
        filter.insert(element)
    }

    /// Every set whose filter reports positive; never misses a true set.
    /// Costs one query in each of the `v` filters.
    pub fn which_sets(&self, element: &[u8]) -> Vec<usize> {
        self.filters.iter().enumerate().filter(|(_, f)| f.query(element)).map(|(i, _)| i).collect()
    }

    pub fn freeze(&mut self) {
        for f in &mut self.filters {
            f.freeze();
        }
    }
}

/// One matrix filter over `(set id, element)` tuples answering both
/// membership directions through batch queries.
///
/// Unlike the vBF, sizing follows the actual number of memberships rather
/// than per-set worst cases, which is what makes it economical when set
/// usage is sparse.
#[derive(Debug)]
pub struct GeneralMultisetIndex {
    filter: MatrixBloomFilter,
}

impl GeneralMultisetIndex {
    pub fn new(params: MatrixBloomParams, seed: u64) -> Result<Self> {
        Ok(Self { filter: MatrixBloomFilter::new(params, seed)? })
    }

    pub fn with_filter(filter: MatrixBloomFilter) -> Self {
        Self { filter }
    }

    pub fn filter(&self) -> &MatrixBloomFilter {
        &self.filter
    }

    pub fn freeze(&mut self) {
        self.filter.freeze();
    }

    /// Records that `element` belongs to `set_id`.
    ///
    /// # Errors
    ///
    /// [`Error::Frozen`] after a freeze.
    pub fn insert(&mut self, set_id: u64, element: &[u8]) -> Result<()> {
        self.filter.insert(&canonical_int(set_id), element)
    }

    /// Candidate sets that might hold `element`: one batch query with the
    /// element fixed and the set ids varying. Superset of the true answer
    /// restricted to `candidates`.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when `candidates` is empty.
    pub fn which_sets(&self, element: &[u8], candidates: &[u64]) -> Result<Vec<u64>> {
        let ids: Vec<[u8; 8]> = candidates.iter().map(|&s| canonical_int(s)).collect();
        let result = batch_query(
            &self.filter,
            &BatchRequest { side: BatchSide::FixedSecond, fixed: element, varying: &ids },
        )?;
        Ok(candidates
            .iter()
            .zip(result.verdicts)
            .filter(|(_, verdict)| *verdict)
            .map(|(&s, _)| s)
            .collect())
    }

    /// Candidate elements that might belong to `set_id`: one batch query
    /// with the set id fixed. Superset of the true members among
    /// `candidates`.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when `candidates` is empty.
    pub fn members_of_set<'a, V: AsRef<[u8]>>(
        &self,
        set_id: u64,
        candidates: &'a [V],
    ) -> Result<Vec<&'a [u8]>> {
        let fixed = canonical_int(set_id);
        let result = batch_query(
            &self.filter,
            &BatchRequest { side: BatchSide::FixedFirst, fixed: &fixed, varying: candidates },
        )?;
        Ok(candidates
            .iter()
            .zip(result.verdicts)
            .filter(|(_, verdict)| *verdict)
            .map(|(c, _)| c.as_ref())
            .collect())
    }
}
