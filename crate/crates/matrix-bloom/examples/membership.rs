//! Plan a square filter for a 2-tuple set, measure its false positive rate
//! against the closed form, and round-trip a snapshot.

use matrix_bloom::datasets::{gen_no_repeating, mix_lookup_set};
use matrix_bloom::{plan_generic, theoretical_fpr, MatrixBloomFilter};

fn main() -> matrix_bloom::Result<()> {
    let n = 20_000;
    let params = plan_generic(n, 8, None)?;
    println!(
        "planned {}x{} bits ({} total), k = ({}, {}), theory {:.4e}",
        params.m1,
        params.m2,
        params.bits(),
        params.k1,
        params.k2,
        theoretical_fpr(&params, n)
    );

    let pairs = gen_no_repeating(n, 7)?;
    let mut filter = MatrixBloomFilter::new(params.clone(), 7)?;
    for p in &pairs {
        filter.insert(&p.x1, &p.x2)?;
    }
    filter.freeze();
    assert!(pairs.iter().all(|p| filter.query(&p.x1, &p.x2)), "members never miss");

    let lookups = mix_lookup_set(&pairs, 11, 0.0, 200_000)?;
    let fresh = &lookups.section_two;
    let hits = fresh.iter().filter(|p| filter.query(&p.x1, &p.x2)).count();
    println!(
        "fresh pairs: {hits} of {} answered positive, measured {:.4e}",
        fresh.len(),
        hits as f64 / fresh.len() as f64
    );

    let bytes = filter.to_snapshot_bytes();
    let restored = MatrixBloomFilter::from_snapshot_bytes(&bytes)?;
    let agree = fresh.iter().all(|p| filter.query(&p.x1, &p.x2) == restored.query(&p.x1, &p.x2));
    println!("snapshot: {} bytes, restored filter agrees on every lookup: {agree}", bytes.len());
    Ok(())
}
