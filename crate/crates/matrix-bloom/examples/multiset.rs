//! Which sets contain this element: a vector of per-set filters next to a
//! single matrix indexed by (set id, element). Both answer with one-sided
//! error, so the reported sets are always a superset of the truth.

use matrix_bloom::hash::{canonical_int, splitmix_at};
use matrix_bloom::{standard_fpr_exact, GeneralMultisetIndex, MatrixBloomParams, Vbf};

fn main() -> matrix_bloom::Result<()> {
    // Twelve sets of varying size over a shared element universe.
    let sizes: Vec<u64> = (0..12u64).map(|i| 3 + i % 5).collect();
    let total: u64 = sizes.iter().sum();
    let members: Vec<(usize, u64)> = sizes
        .iter()
        .enumerate()
        .flat_map(|(sid, &len)| (0..len).map(move |j| (sid, splitmix_at(900 + sid as u64, j))))
        .collect();

    let mut vbf = Vbf::new(&sizes, 3, 77)?;
    let mut gmi = GeneralMultisetIndex::new(MatrixBloomParams::new(36, 36, 1, 1, total)?, 77)?;
    for &(sid, elem) in &members {
        vbf.insert(sid, &canonical_int(elem))?;
        gmi.insert(sid as u64, &canonical_int(elem))?;
    }

    let candidates: Vec<u64> = (0..sizes.len() as u64).collect();
    let (sid, elem) = members[20];
    let true_sets: Vec<usize> =
        members.iter().filter(|(_, e)| *e == elem).map(|(s, _)| *s).collect();
    let v = vbf.which_sets(&canonical_int(elem));
    let g = gmi.which_sets(&canonical_int(elem), &candidates)?;
    println!("element from set {sid}: truth {true_sets:?}");
    println!("  per-set filters report {v:?}");
    println!("  matrix index reports   {g:?}");
    assert!(true_sets.iter().all(|s| v.contains(s) && g.contains(&(*s as u64))));

    // A fresh element should usually land in no set; count stray verdicts.
    let probes = 2_000u64;
    let mut v_hits = 0u64;
    let mut g_hits = 0u64;
    for i in 0..probes {
        let fresh = canonical_int(splitmix_at(31_337, i));
        v_hits += vbf.which_sets(&fresh).len() as u64;
        g_hits += gmi.which_sets(&fresh, &candidates)?.len() as u64;
    }
    let cells = probes * sizes.len() as u64;
    println!("\nfresh elements, {probes} probes across {} sets:", sizes.len());
    println!(
        "  per-set filters: {v_hits} stray memberships ({:.4} per set-test, exact form for the median set {:.4})",
        v_hits as f64 / cells as f64,
        standard_fpr_exact(vbf.filters()[5].m(), 3, sizes[5])
    );
    println!(
        "  matrix index:    {g_hits} stray memberships ({:.4} per set-test)",
        g_hits as f64 / cells as f64
    );

    // Reverse question: which of these candidate elements are in set 4?
    let pool: Vec<[u8; 8]> = members.iter().map(|&(_, e)| canonical_int(e)).collect();
    let found = gmi.members_of_set(4, &pool)?;
    let truth = sizes[4] as usize;
    println!(
        "\nmembers_of_set(4) returned {} of {} candidates (true count {truth})",
        found.len(),
        pool.len()
    );
    Ok(())
}
