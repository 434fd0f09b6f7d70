//! The same key/value workload on three structures, with per-query probe
//! costs read off the instrumentation counters. The hash tables answer
//! exactly; the filter trades a false positive rate for flat probe cost and
//! a fraction of the memory.

use matrix_bloom::hash::{canonical_int, splitmix_at};
use matrix_bloom::{plan_generic, ChainedHashTable, DoubleHashTable, MatrixBloomFilter};

fn main() -> matrix_bloom::Result<()> {
    let keys = 2_000u64;
    let per_key = 4u64;
    let n = keys * per_key;
    let pairs: Vec<([u8; 8], [u8; 8])> = (0..keys)
        .flat_map(|k| {
            (0..per_key).map(move |s| (canonical_int(k), canonical_int(splitmix_at(k, s))))
        })
        .collect();

    let mut chained = ChainedHashTable::new(keys as usize)?;
    let mut double = DoubleHashTable::new(keys as usize, n as usize)?;
    let mut filter = MatrixBloomFilter::new(plan_generic(n, 4, None)?, 31)?;
    for (k, v) in &pairs {
        chained.insert(k, v);
        double.insert(k, v);
        filter.insert(k, v)?;
    }

    // Half members, half misses.
    let queries: Vec<([u8; 8], [u8; 8])> = (0..10_000u64)
        .map(|i| {
            if i % 2 == 0 {
                pairs[(splitmix_at(97, i) % n) as usize]
            } else {
                (canonical_int(keys + i), canonical_int(splitmix_at(98, i)))
            }
        })
        .collect();

    let c0 = chained.metrics().snapshot();
    let hits_c = queries.iter().filter(|(k, v)| chained.query(k, v)).count();
    let c1 = chained.metrics().snapshot();

    let f0 = filter.metrics().snapshot();
    let hits_f = queries.iter().filter(|(k, v)| filter.query(k, v)).count();
    let f1 = filter.metrics().snapshot();

    let q = queries.len() as f64;
    println!("{} pairs, {} queries (half members)", n, queries.len());
    println!(
        "chained table:  {hits_c} positive, {:.2} key comparisons per query, max chain {}",
        (c1.bucket_comparisons - c0.bucket_comparisons) as f64 / q,
        chained.max_chain_length()
    );
    println!(
        "matrix filter:  {hits_f} positive, {:.2} bit probes per query (grid is k1*k2 = {})",
        (f1.bit_comparisons - f0.bit_comparisons) as f64 / q,
        filter.params().k_total()
    );

    // The double table adds a value-keyed index: reverse lookups stop being
    // full scans, at the price of storing every node twice.
    let v = pairs[123].1;
    let k = pairs[123].0;
    println!(
        "double table:   reverse lookup works ({}), {} stored nodes vs {} in the chained table",
        double.query_by_value(&v, &k),
        double.stored_nodes(),
        chained.len()
    );
    println!(
        "filter footprint: {} bits vs {} exact entries",
        filter.params().bits(),
        chained.len()
    );
    Ok(())
}
