//! Maximum adaptive sizing for fully repeating components: each axis gets
//! its own optimum, the false positive target is (1/2)^k_sum regardless of
//! how full the matrix is, and the load factor follows a known curve.

use matrix_bloom::datasets::{gen_full_repeating, mix_lookup_set};
use matrix_bloom::{mam_load_factor_expectation, mam_plan_from_ratio, MatrixBloomFilter};

fn main() -> matrix_bloom::Result<()> {
    let (n1, n2) = (128, 256);
    let plan = mam_plan_from_ratio(n1, n2, 0.5, 6)?;
    print!("{}", plan.to_text());
    if let Some(w) = &plan.warning {
        println!("warning: {w}");
    }

    // gen_full_repeating emits pairs first-component-major, so a prefix of
    // the stream is exactly the "fraction of rows inserted" fill model the
    // expectation curve describes.
    let pairs = gen_full_repeating(n1, n2, 3)?;
    let mut filter = MatrixBloomFilter::new(plan.params().clone(), 3)?;
    println!("\n fill   load factor   expected");
    for (i, p) in pairs.iter().enumerate() {
        filter.insert(&p.x1, &p.x2)?;
        let done = i + 1;
        if done % (pairs.len() / 5) == 0 {
            let fill = done as f64 / pairs.len() as f64;
            println!(
                " {:>4.0}%   {:.4}        {:.4}",
                fill * 100.0,
                filter.load_factor(),
                mam_load_factor_expectation(fill)
            );
        }
    }

    let lookups = mix_lookup_set(&pairs, 5, 0.0, 100_000)?;
    let fresh = &lookups.section_two;
    let hits = fresh.iter().filter(|p| filter.query(&p.x1, &p.x2)).count();
    println!(
        "\nfull matrix: measured fpr {:.4} vs (1/2)^6 = {:.4}",
        hits as f64 / fresh.len() as f64,
        plan.fpr_theory
    );
    Ok(())
}
