//! Exact-membership baselines: a chained hash table over `(key, value)`
//! pairs and a double table that also stores every pair commuted.
//!
//! These exist for comparison-count measurements against the filters, not as
//! general-purpose containers. Queries are exact (no false positives or
//! negatives), chains preserve insertion order, and every chain-node
//! inspection increments a bucket-comparison counter; probing an empty
//! bucket costs one comparison.

use crate::error::{Error, Result};
use crate::filter::InstrumentationCounters;
use crate::hash::mix64;

/// Multiplicative hashing constant (Knuth's 64-bit golden-ratio multiplier).
const MULTIPLIER: u64 = 0x9E3779B97F4A7C15;

/// Buckets a key: fold little-endian 8-byte words (last word zero-padded)
/// through multiplicative hashing, avalanche, and reduce mod the bucket
/// count. The avalanche step is load-bearing: the fold leaves key entropy in
/// the accumulator's top bits, and `2^48*v % buckets` reaches only
/// `buckets/gcd(2^48, buckets)` residues, so big-endian integer keys would
/// collapse onto a fraction of the chains at round bucket counts.
fn bucket_of(key: &[u8], buckets: u64) -> u64 {
    let mut acc = key.len() as u64;
    for chunk in key.chunks(8) {
        let mut word = [0u8; 8];
        word[..chunk.len()].copy_from_slice(chunk);
        acc = (acc ^ u64::from_le_bytes(word)).wrapping_mul(MULTIPLIER);
    }
    mix64(acc) % buckets
}

/// Chained hash table storing `(key, value)` pairs, bucketed by key.
///
/// The conventional sizing sets the bucket count to the number of distinct
/// keys, so chain length tracks values-per-key.
#[derive(Debug)]
pub struct ChainedHashTable {
    buckets: Vec<Vec<(Vec<u8>, Vec<u8>)>>,
    pairs: u64,
    metrics: InstrumentationCounters,
}

impl ChainedHashTable {
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when `buckets` is zero.
    pub fn new(buckets: usize) -> Result<Self> {
        if buckets == 0 {
            return Err(Error::InvalidParameter("bucket count must be >= 1".into()));
        }
        Ok(Self {
            buckets: vec![Vec::new(); buckets],
            pairs: 0,
            metrics: InstrumentationCounters::default(),
        })
    }

    pub fn bucket_count(&self) -> usize {
        self.buckets.len()
    }

    /// Stored pair-node count.
    pub fn len(&self) -> u64 {
        self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs == 0
    }

    pub fn metrics(&self) -> &InstrumentationCounters {
        &self.metrics
    }

    /// Longest chain, for diagnosing skew.
    pub fn max_chain_length(&self) -> usize {
        self.buckets.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// Inserts a pair unless it is already present; returns whether it was
    /// appended. The duplicate scan inspects chain nodes and counts each as
    /// one comparison.
    pub fn insert(&mut self, key: &[u8], value: &[u8]) -> bool {
        let ix = bucket_of(key, self.buckets.len() as u64) as usize;
        let chain = &mut self.buckets[ix];
        for (k, v) in chain.iter() {
            self.metrics.add_bucket_comparisons(1);
            if k == key && v == value {
                return false;
            }
        }
        chain.push((key.to_vec(), value.to_vec()));
        self.pairs += 1;
        true
    }

    /// Exact membership test. Costs one comparison per inspected chain node;
    /// an empty bucket costs one comparison.
    pub fn query(&self, key: &[u8], value: &[u8]) -> bool {
        let ix = bucket_of(key, self.buckets.len() as u64) as usize;
        let chain = &self.buckets[ix];
        if chain.is_empty() {
            self.metrics.add_bucket_comparisons(1);
            return false;
        }
        for (k, v) in chain {
            self.metrics.add_bucket_comparisons(1);
            if k == key && v == value {
                return true;
            }
        }
        false
    }
}

/// Two chained tables holding the same pair set, the second commuted, so
/// lookups are cheap from either side at double the node storage.
#[derive(Debug)]
pub struct DoubleHashTable {
    forward: ChainedHashTable,
    backward: ChainedHashTable,
}

impl DoubleHashTable {
    /// `forward_buckets` conventionally equals the distinct key count and
    /// `backward_buckets` the distinct value count.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidParameter`] when either bucket count is zero.
    pub fn new(forward_buckets: usize, backward_buckets: usize) -> Result<Self> {
        Ok(Self {
            forward: ChainedHashTable::new(forward_buckets)?,
            backward: ChainedHashTable::new(backward_buckets)?,
        })
    }

    /// Inserts `(key, value)` forward and `(value, key)` backward.
    pub fn insert(&mut self, key: &[u8], value: &[u8]) -> bool {
        let appended = self.forward.insert(key, value);
        let mirrored = self.backward.insert(value, key);
        debug_assert_eq!(appended, mirrored, "tables disagree on prior membership");
        appended
    }

    pub fn query_by_key(&self, key: &[u8], value: &[u8]) -> bool {
        self.forward.query(key, value)
    }

    pub fn query_by_value(&self, value: &[u8], key: &[u8]) -> bool {
        self.backward.query(value, key)
    }

    pub fn forward(&self) -> &ChainedHashTable {
        &self.forward
    }

    pub fn backward(&self) -> &ChainedHashTable {
        &self.backward
    }

    /// Total stored nodes across both directions (twice the pair count).
    pub fn stored_nodes(&self) -> u64 {
        self.forward.len() + self.backward.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::{canonical_int, splitmix_at};
    use proptest::prelude::*;
    use std::collections::HashSet;

    #[test]
    fn zero_buckets_are_rejected() {
        assert!(matches!(ChainedHashTable::new(0), Err(Error::InvalidParameter(_))));
        assert!(matches!(DoubleHashTable::new(4, 0), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn insert_then_query_finds_the_pair() {
        let mut t = ChainedHashTable::new(8).unwrap();
        assert!(t.insert(b"key", b"value"));
        assert!(t.query(b"key", b"value"));
        assert!(t.metrics().snapshot().bucket_comparisons >= 1);
    }

    #[test]
    fn colliding_keys_are_both_retrievable() {
        // Every key lands in the single bucket, the worst-case collision.
        let mut t = ChainedHashTable::new(1).unwrap();
        t.insert(b"red", &canonical_int(1));
        t.insert(b"blue", &canonical_int(2));
        assert!(t.query(b"red", &canonical_int(1)));
        assert!(t.query(b"blue", &canonical_int(2)));
        assert!(!t.query(b"red", &canonical_int(2)));
    }

    #[test]
    fn duplicate_insert_leaves_size_unchanged() {
        let mut t = ChainedHashTable::new(4).unwrap();
        assert!(t.insert(b"k", b"v"));
        assert!(!t.insert(b"k", b"v"));
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn empty_bucket_miss_costs_one_comparison() {
        let t = ChainedHashTable::new(16).unwrap();
        assert!(!t.query(b"absent", b"pair"));
        assert_eq!(t.metrics().snapshot().bucket_comparisons, 1);
    }

    #[test]
    fn full_chain_miss_costs_chain_length() {
        let mut t = ChainedHashTable::new(1).unwrap();
        for i in 0..5u64 {
            t.insert(&canonical_int(i), &canonical_int(i));
        }
        t.metrics().reset();
        assert!(!t.query(&canonical_int(99), &canonical_int(99)));
        assert_eq!(t.metrics().snapshot().bucket_comparisons, 5);
    }

    #[test]
    fn comparisons_match_a_shadow_count() {
        let mut t = ChainedHashTable::new(7).unwrap();
        let mut shadow: Vec<Vec<(Vec<u8>, Vec<u8>)>> = vec![Vec::new(); 7];
        let mut expected = 0u64;
        for i in 0..200u64 {
            let key = canonical_int(splitmix_at(1, i % 40));
            let value = canonical_int(splitmix_at(2, i % 60));
            let ix = bucket_of(&key, 7) as usize;
            let chain = &mut shadow[ix];
            let mut hit = None;
            for (pos, (k, v)) in chain.iter().enumerate() {
                if k[..] == key && v[..] == value {
                    hit = Some(pos);
                    break;
                }
            }
            expected += hit.map_or(chain.len(), |pos| pos + 1) as u64;
            if hit.is_none() {
                chain.push((key.to_vec(), value.to_vec()));
            }
            t.insert(&key, &value);
        }
        for i in 0..500u64 {
            let key = canonical_int(splitmix_at(3, i % 70));
            let value = canonical_int(splitmix_at(4, i % 50));
            let ix = bucket_of(&key, 7) as usize;
            let chain = &shadow[ix];
            let mut hit = None;
            for (pos, (k, v)) in chain.iter().enumerate() {
                if k[..] == key && v[..] == value {
                    hit = Some(pos);
                    break;
                }
            }
            expected +=
                if chain.is_empty() { 1 } else { hit.map_or(chain.len(), |p| p + 1) as u64 };
            t.query(&key, &value);
        }
        assert_eq!(t.metrics().snapshot().bucket_comparisons, expected);
    }

    #[test]
    fn member_query_cost_grows_with_values_per_key() {
        // Bucket count fixed at the key count; only the chain length varies.
        let keys = 32u64;
        let mut averages = Vec::new();
        for values_per_key in [1u64, 4, 10] {
            let mut t = ChainedHashTable::new(keys as usize).unwrap();
            for key in 0..keys {
                for v in 0..values_per_key {
                    t.insert(&canonical_int(splitmix_at(5, key)), &canonical_int(v));
                }
            }
            t.metrics().reset();
            let mut queries = 0u64;
            for key in 0..keys {
                for v in 0..values_per_key {
                    assert!(t.query(&canonical_int(splitmix_at(5, key)), &canonical_int(v)));
                    queries += 1;
                }
            }
            averages.push(t.metrics().snapshot().bucket_comparisons as f64 / queries as f64);
        }
        assert!(averages[0] < averages[1] && averages[1] < averages[2], "{averages:?}");
    }

    #[test]
    fn double_table_mirrors_and_doubles_storage() {
        let mut t = DoubleHashTable::new(8, 8).unwrap();
        t.insert(b"A", &canonical_int(3));
        assert!(t.query_by_key(b"A", &canonical_int(3)));
        assert!(t.query_by_value(&canonical_int(3), b"A"));
        assert!(!t.query_by_key(b"A", &canonical_int(4)));
        assert!(!t.query_by_value(&canonical_int(4), b"A"));
        t.insert(b"B", &canonical_int(3));
        assert_eq!(t.stored_nodes(), 2 * (t.forward().len()));
        assert_eq!(t.forward().len(), 2);
    }

    #[test]
    fn value_direction_costs_more_when_values_repeat() {
        // 64 distinct keys share 8 distinct values, so backward chains are
        // eight times longer than forward ones.
        let (n_keys, n_values) = (64u64, 8u64);
        let mut t = DoubleHashTable::new(n_keys as usize, n_values as usize).unwrap();
        for key in 0..n_keys {
            t.insert(&canonical_int(splitmix_at(6, key)), &canonical_int(key % n_values));
        }
        t.forward().metrics().reset();
        t.backward().metrics().reset();
        for key in 0..n_keys {
            let k = canonical_int(splitmix_at(6, key));
            let v = canonical_int(key % n_values);
            assert!(t.query_by_key(&k, &v));
            assert!(t.query_by_value(&v, &k));
        }
        let forward = t.forward().metrics().snapshot().bucket_comparisons;
        let backward = t.backward().metrics().snapshot().bucket_comparisons;
        assert!(backward > forward, "backward {backward} <= forward {forward}");
    }

    proptest! {
        #[test]
        fn queries_are_exact(
            inserts in proptest::collection::vec((0u64..30, 0u64..30), 0..60),
            probes in proptest::collection::vec((0u64..30, 0u64..30), 0..60),
            buckets in 1usize..20,
        ) {
            let mut t = ChainedHashTable::new(buckets).unwrap();
            let mut truth = HashSet::new();
            for (k, v) in &inserts {
                t.insert(&canonical_int(*k), &canonical_int(*v));
                truth.insert((*k, *v));
            }
            prop_assert_eq!(t.len(), truth.len() as u64);
            for (k, v) in inserts.iter().chain(&probes) {
                prop_assert_eq!(
                    t.query(&canonical_int(*k), &canonical_int(*v)),
                    truth.contains(&(*k, *v))
                );
            }
        }
    }
}
