//! Partitioned squares for a wide first axis: pick a target (1/2)-exponent,
//! let the planner choose the square side and per-axis hash count, and
//! check the realized rate.

use matrix_bloom::datasets::{gen_no_repeating, mix_lookup_set};
use matrix_bloom::{jm_plan_from_exponent, JMatrixFilter};

fn main() -> matrix_bloom::Result<()> {
    let (n1, n2) = (262_144, 65_536);
    let plan = jm_plan_from_exponent(n1, n2, 8.0)?;
    print!("{}", plan.to_text());
    println!("total bits {}", plan.total_bits());

    let pairs = gen_no_repeating(n1, 13)?;
    let mut filter = JMatrixFilter::new(&plan, 13)?;
    for p in &pairs {
        filter.insert(&p.x1, &p.x2)?;
    }
    filter.freeze();
    assert!(pairs.iter().all(|p| filter.query(&p.x1, &p.x2)));

    let loads = filter.square_loads();
    let lo = loads.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = loads.iter().cloned().fold(0.0, f64::max);
    println!("per-square load factors: min {lo:.4}, max {hi:.4} over {} squares", loads.len());

    let lookups = mix_lookup_set(&pairs, 17, 0.0, 200_000)?;
    let fresh = &lookups.section_two;
    let hits = fresh.iter().filter(|p| filter.query(&p.x1, &p.x2)).count();
    println!(
        "measured fpr {:.4e} vs (1/2)^{:.3} = {:.4e}",
        hits as f64 / fresh.len() as f64,
        plan.exponent,
        plan.fpr_theory
    );
    Ok(())
}
