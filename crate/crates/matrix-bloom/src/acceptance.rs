//! The library's acceptance gate: twelve numbered checks with frozen seeds
//! and stated tolerances, runnable both as the `acceptance` integration
//! test and through `mbf verify`.
//!
//! Each check returns a [`CriterionResult`] whose [`line`] renders the
//! one-line verdict. Checks are deterministic: workloads derive from fixed
//! seeds, so a verdict never flips between runs on the same build.
//!
//! [`line`]: CriterionResult::line

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use crate::batch::{batch_query, double_side_query, BatchRequest, BatchSide, QueryOrder};
use crate::datasets::{gen_full_repeating, gen_no_repeating, mix_lookup_set, parse_docword};
use crate::error::Result;
use crate::experiments::{self, ExperimentKind, ExperimentSpec};
use crate::filter::{plan_generic, MatrixBloomFilter, MatrixBloomParams, StandardBloomFilter};
use crate::hash::{canonical_int, splitmix_at};
use crate::multiset::{standard_fpr_exact, GeneralMultisetIndex, Vbf};
use crate::variants::{jm_plan, mam_plan_from_ratio, plan_max_adaptive, JMatrixFilter};

/// Outcome of one acceptance criterion.
#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u32,
    pub name: &'static str,
    pub passed: bool,
    /// Set when required inputs are absent; `passed` is true so a skip
    /// never fails a gate, and `detail` says what was missing.
    pub skipped: bool,
    pub detail: String,
}

impl CriterionResult {
    fn outcome(id: u32, name: &'static str, passed: bool, detail: String) -> Self {
        CriterionResult { id, name, passed, skipped: false, detail }
    }

    fn skip(id: u32, name: &'static str, detail: String) -> Self {
        CriterionResult { id, name, passed: true, skipped: true, detail }
    }

    /// One-line verdict: `criterion NN name verdict (detail)`.
    pub fn line(&self) -> String {
        let verdict = if self.skipped {
            "skip"
        } else if self.passed {
            "pass"
        } else {
            "FAIL"
        };
        format!("criterion {:02} {} {} ({})", self.id, self.name, verdict, self.detail)
    }
}

fn mean_and_se(samples: &[f64]) -> (f64, f64) {
    let r = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / r;
    let var = samples.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Criterion 1: member queries never miss, across all three filter kinds,
/// for 10^4 inserted tuples each. Zero tolerance.
pub fn criterion_01_no_false_negatives() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC01;

    let pairs = gen_no_repeating(10_000, splitmix_at(SEED, 1))?;
    let mut generic = MatrixBloomFilter::new(plan_generic(10_000, 4, None)?, splitmix_at(SEED, 2))?;
    for p in &pairs {
        generic.insert(&p.x1, &p.x2)?;
    }
    let generic_misses = pairs.iter().filter(|p| !generic.query(&p.x1, &p.x2)).count();

    let mam_plan = mam_plan_from_ratio(100, 100, 1.0, 6)?;
    let mam_pairs = gen_full_repeating(100, 100, splitmix_at(SEED, 3))?;
    let mut mam = MatrixBloomFilter::new(mam_plan.base.clone(), splitmix_at(SEED, 4))?;
    for p in &mam_pairs {
        mam.insert(&p.x1, &p.x2)?;
    }
    let mam_misses = mam_pairs.iter().filter(|p| !mam.query(&p.x1, &p.x2)).count();

    let jm_pairs = gen_no_repeating(10_000, splitmix_at(SEED, 5))?;
    let mut jm = JMatrixFilter::new(&jm_plan(10_000, 1_000, 3)?, splitmix_at(SEED, 6))?;
    for p in &jm_pairs {
        jm.insert(&p.x1, &p.x2)?;
    }
    let jm_misses = jm_pairs.iter().filter(|p| !jm.query(&p.x1, &p.x2)).count();

    let passed = generic_misses == 0 && mam_misses == 0 && jm_misses == 0;
    Ok(CriterionResult::outcome(
        1,
        "no-false-negatives",
        passed,
        format!(
            "member misses: generic {generic_misses}/10000, max-adaptive {mam_misses}/10000, \
             j-matrix {jm_misses}/10000"
        ),
    ))
}

/// Criterion 2: square matrix at its textbook optimum (m1=m2=116,
/// k1=k2=3, n=1024) measured against (1/2)^9 with a 3-binomial-SE band
/// over 10^6 pooled negative queries.
pub fn criterion_02_square_optimum() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC02;
    const REPS: u64 = 8;
    const PER_REP: u64 = 125_000;
    let theory = 0.5f64.powi(9);

    let mut hits = 0u64;
    for rep in 0..REPS {
        let params = MatrixBloomParams::new(116, 116, 3, 3, 1024)?;
        let mut filter = MatrixBloomFilter::new(params, splitmix_at(SEED, 10 + rep))?;
        let pairs = gen_no_repeating(1024, splitmix_at(SEED, 100 + rep))?;
        for p in &pairs {
            filter.insert(&p.x1, &p.x2)?;
        }
        let lookup = mix_lookup_set(&pairs, splitmix_at(SEED, 200 + rep), 0.0, PER_REP)?;
        hits += lookup.section_two.iter().filter(|p| filter.query(&p.x1, &p.x2)).count() as u64;
    }
    let total = REPS * PER_REP;
    let p_hat = hits as f64 / total as f64;
    let se = (theory * (1.0 - theory) / total as f64).sqrt();
    let (lo, hi) = (theory - 3.0 * se, theory + 3.0 * se);
    let passed = p_hat >= lo && p_hat <= hi;
    let mut detail = format!(
        "measured {p_hat:.6} over {total} negative queries, 3-SE band [{lo:.6}, {hi:.6}] \
         around {theory:.6}"
    );
    if !passed {
        detail.push_str(
            "; the excess is structural at this square size: two same-axis index draws \
             collide with probability ~k(k-1)/m per axis and shrink the 3x3 probe grid \
             to 6 bits, multiplying that query's false-positive odds by ~8; at m=116 \
             this lifts the expected rate ~40% above the independence form",
        );
    }
    Ok(CriterionResult::outcome(2, "square-optimum-fpr", passed, detail))
}

/// Criterion 3: matrix filter and standard filter agree at equal bit and
/// hash budgets, within 3 pooled SEs, for k in {4, 8, 9, 16}.
pub fn criterion_03_degradation_equivalence() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC03;
    const N: u64 = 32_768;

    let mut details = Vec::new();
    let mut passed = true;
    for (slot, k) in [4u32, 8, 9, 16].into_iter().enumerate() {
        let tag = slot as u64;
        // 2^-16 needs more draws for a stable count than 2^-4.
        let queries: u64 = if k == 16 { 1_000_000 } else { 100_000 };
        let plan = plan_generic(N, k, None)?;
        let mut matrix = MatrixBloomFilter::new(plan.clone(), splitmix_at(SEED, 10 + tag))?;
        let mut standard =
            StandardBloomFilter::new(plan.bits() as u32, k, N, splitmix_at(SEED, 20 + tag))?;
        let pairs = gen_no_repeating(N, splitmix_at(SEED, 30 + tag))?;
        for p in &pairs {
            matrix.insert(&p.x1, &p.x2)?;
            let mut item = p.x1.clone();
            item.extend_from_slice(&p.x2);
            standard.insert(&item)?;
        }
        let lookup = mix_lookup_set(&pairs, splitmix_at(SEED, 40 + tag), 0.0, queries)?;
        let mut matrix_hits = 0u64;
        let mut standard_hits = 0u64;
        for p in &lookup.section_two {
            if matrix.query(&p.x1, &p.x2) {
                matrix_hits += 1;
            }
            let mut item = p.x1.clone();
            item.extend_from_slice(&p.x2);
            if standard.query(&item) {
                standard_hits += 1;
            }
        }
        let q = queries as f64;
        let p_m = matrix_hits as f64 / q;
        let p_s = standard_hits as f64 / q;
        let pooled = (p_m * (1.0 - p_m) / q + p_s * (1.0 - p_s) / q).sqrt();
        let diff = (p_m - p_s).abs();
        let ok = diff <= 3.0 * pooled;
        passed &= ok;
        details.push(format!(
            "k={k} ({},{}) diff {:.2e} vs 3se {:.2e}",
            plan.k1,
            plan.k2,
            diff,
            3.0 * pooled
        ));
    }
    Ok(CriterionResult::outcome(3, "degradation-equivalence", passed, details.join("; ")))
}

/// Criterion 4: maximum adaptive matrix hits (1/2)^{k1+k2} over the full
/// ratio and hash-budget grid, judged against 3 between-replicate SEs.
pub fn criterion_04_max_adaptive_fpr() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC04;
    const REPS: usize = 32;
    const QUERIES: u64 = 4_000;

    let mut worst: (f64, String) = (0.0, String::new());
    let mut passed = true;
    for (ri, ratio) in [1.0f64, 0.5, 0.25].into_iter().enumerate() {
        for (ki, k_sum) in [4u32, 6, 8].into_iter().enumerate() {
            let cell = (ri * 8 + ki) as u64;
            let plan = mam_plan_from_ratio(256, 512, ratio, k_sum)?;
            let mut rates = Vec::with_capacity(REPS);
            for rep in 0..REPS {
                let tag = cell * 64 + rep as u64;
                let mut filter =
                    MatrixBloomFilter::new(plan.base.clone(), splitmix_at(SEED, 1_000 + tag))?;
                let pairs = gen_full_repeating(256, 512, splitmix_at(SEED, 5_000 + tag))?;
                for p in &pairs {
                    filter.insert(&p.x1, &p.x2)?;
                }
                let lookup = mix_lookup_set(&pairs, splitmix_at(SEED, 9_000 + tag), 0.0, QUERIES)?;
                let hits = lookup.section_two.iter().filter(|p| filter.query(&p.x1, &p.x2)).count();
                rates.push(hits as f64 / QUERIES as f64);
            }
            let (mean, se) = mean_and_se(&rates);
            let z = (mean - plan.fpr_theory).abs() / se;
            if z > worst.0 {
                worst = (
                    z,
                    format!(
                        "worst |z|={z:.2} at ratio {ratio}, k1+k2={k_sum} \
                         (mean {mean:.5} vs theory {:.5})",
                        plan.fpr_theory
                    ),
                );
            }
            passed &= z <= 3.0;
        }
    }
    Ok(CriterionResult::outcome(
        4,
        "max-adaptive-fpr",
        passed,
        format!("9 cells x {REPS} replicates; {}", worst.1),
    ))
}

/// Criterion 5: maximum adaptive load factor lands in [0.23, 0.27] at full
/// load and [0.055, 0.075] at 20% fill, for all three side ratios.
pub fn criterion_05_load_factor() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC05;
    let total = 256 * 512;

    let mut details = Vec::new();
    let mut passed = true;
    for (ri, ratio) in [1.0f64, 0.5, 0.25].into_iter().enumerate() {
        let plan = mam_plan_from_ratio(256, 512, ratio, 6)?;
        let mut filter =
            MatrixBloomFilter::new(plan.base.clone(), splitmix_at(SEED, 10 + ri as u64))?;
        let pairs = gen_full_repeating(256, 512, splitmix_at(SEED, 20 + ri as u64))?;
        let twenty = total / 5;
        for p in &pairs[..twenty] {
            filter.insert(&p.x1, &p.x2)?;
        }
        let lf20 = filter.load_factor();
        for p in &pairs[twenty..] {
            filter.insert(&p.x1, &p.x2)?;
        }
        let lf100 = filter.load_factor();
        let ok = (0.055..=0.075).contains(&lf20) && (0.23..=0.27).contains(&lf100);
        passed &= ok;
        details.push(format!("ratio {ratio}: 20% -> {lf20:.4}, 100% -> {lf100:.4}"));
    }
    Ok(CriterionResult::outcome(5, "load-factor", passed, details.join("; ")))
}

/// Criterion 6: j-matrix false-positive rate matches its per-square design
/// exponent within 3 SEs and a standard filter of j*m^2 bits within 3
/// pooled SEs, for j in {2, 10}.
pub fn criterion_06_jmatrix_equivalence() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC06;
    const N2: u64 = 65_536;
    const QUERIES: u64 = 100_000;

    let mut details = Vec::new();
    let mut passed = true;
    for (slot, j) in [2u64, 10].into_iter().enumerate() {
        let tag = slot as u64;
        let n1 = j * N2;
        let plan = jm_plan(n1, N2, 3)?;
        let mut jm = JMatrixFilter::new(&plan, splitmix_at(SEED, 10 + tag))?;
        // Equal storage: j*m^2 bits; equal per-query hash work: k^2 draws.
        let std_bits = j * plan.m as u64 * plan.m as u64;
        let k_std = plan.k * plan.k;
        let mut standard =
            StandardBloomFilter::new(std_bits as u32, k_std, n1, splitmix_at(SEED, 20 + tag))?;
        let pairs = gen_no_repeating(n1, splitmix_at(SEED, 30 + tag))?;
        for p in &pairs {
            jm.insert(&p.x1, &p.x2)?;
            let mut item = p.x1.clone();
            item.extend_from_slice(&p.x2);
            standard.insert(&item)?;
        }
        let lookup = mix_lookup_set(&pairs, splitmix_at(SEED, 40 + tag), 0.0, QUERIES)?;
        let mut jm_hits = 0u64;
        let mut std_hits = 0u64;
        for p in &lookup.section_two {
            if jm.query(&p.x1, &p.x2) {
                jm_hits += 1;
            }
            let mut item = p.x1.clone();
            item.extend_from_slice(&p.x2);
            if standard.query(&item) {
                std_hits += 1;
            }
        }
        let q = QUERIES as f64;
        let p_jm = jm_hits as f64 / q;
        let p_std = std_hits as f64 / q;
        let theory = plan.fpr_theory;
        let se_theory = (theory * (1.0 - theory) / q).sqrt();
        let ok_theory = (p_jm - theory).abs() <= 3.0 * se_theory;
        let pooled = (p_jm * (1.0 - p_jm) / q + p_std * (1.0 - p_std) / q).sqrt();
        let ok_std = (p_jm - p_std).abs() <= 3.0 * pooled;
        passed &= ok_theory && ok_std;
        details.push(format!(
            "j={j}: jm {p_jm:.6} vs theory {theory:.6} ({}), vs standard {p_std:.6} ({})",
            if ok_theory { "ok" } else { "out of band" },
            if ok_std { "ok" } else { "out of band" },
        ));
    }
    Ok(CriterionResult::outcome(6, "jmatrix-equivalence", passed, details.join("; ")))
}

/// Criterion 7: every planned maximum adaptive matrix satisfies the
/// storage bound m1*m2 <= m0^2/(4*n1*n2) with 2% slack, over a 100-point
/// random parameter sweep.
pub fn criterion_07_storage_bound() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC07;

    let mut violations = 0u32;
    let mut max_ratio = 0.0f64;
    for point in 0..100u64 {
        // Log-spread cardinalities up to 10^6 and sides up to ~5*10^5.
        let draw = |lane: u64, span: f64| -> f64 {
            let u = splitmix_at(SEED, point * 8 + lane) as f64 / u64::MAX as f64;
            (10.0f64).powf(u * span)
        };
        let n1 = draw(0, 6.0) as u64 + 1;
        let n2 = draw(1, 6.0) as u64 + 1;
        let m1 = (draw(2, 5.7) as u32).max(1);
        let m2 = (draw(3, 5.7) as u32).max(1);
        let plan = plan_max_adaptive(n1, n2, m1, m2)?;
        let cells = plan.base.m1 as f64 * plan.base.m2 as f64;
        let ratio = cells / plan.storage_bound;
        max_ratio = max_ratio.max(ratio);
        if cells > plan.storage_bound * 1.02 {
            violations += 1;
        }
    }
    Ok(CriterionResult::outcome(
        7,
        "storage-bound",
        violations == 0,
        format!("100 random plans, {violations} violations, max cells/bound = {max_ratio:.4}"),
    ))
}

/// Criterion 8: a fixed-key batch of 10 items at k1=k2=4 spends exactly 4
/// row and 40 column hash invocations, and batch verdicts equal
/// single-query verdicts over 10^3 random batches.
pub fn criterion_08_batch_contract() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC08;

    let params = MatrixBloomParams::new(512, 512, 4, 4, 1_000)?;
    let mut filter = MatrixBloomFilter::new(params, splitmix_at(SEED, 1))?;
    let pairs = gen_no_repeating(1_000, splitmix_at(SEED, 2))?;
    for p in &pairs {
        filter.insert(&p.x1, &p.x2)?;
    }

    // Counter contract on one batch: half members, half fresh.
    let varying: Vec<Vec<u8>> = (0..10)
        .map(|i| {
            if i % 2 == 0 {
                pairs[i].x2.clone()
            } else {
                canonical_int(splitmix_at(SEED, 50 + i as u64)).to_vec()
            }
        })
        .collect();
    let before = filter.metrics().snapshot();
    let request =
        BatchRequest { side: BatchSide::FixedFirst, fixed: &pairs[0].x1, varying: &varying };
    let result = batch_query(&filter, &request)?;
    let after = filter.metrics().snapshot();
    let row_delta = after.row_hash_invocations - before.row_hash_invocations;
    let col_delta = after.col_hash_invocations - before.col_hash_invocations;
    let counters_ok = (row_delta, col_delta) == (4, 40) && result.hash_invocations == (4, 40);

    // Verdict equivalence across 10^3 random batches on both sides.
    let mut mismatches = 0u64;
    for b in 0..1_000u64 {
        let side = if splitmix_at(SEED, 300 + b) % 2 == 0 {
            BatchSide::FixedFirst
        } else {
            BatchSide::FixedSecond
        };
        let fixed_pair = &pairs[(splitmix_at(SEED, 1_300 + b) % 1_000) as usize];
        let fixed: &[u8] =
            if side == BatchSide::FixedFirst { &fixed_pair.x1 } else { &fixed_pair.x2 };
        let t = 1 + (splitmix_at(SEED, 2_300 + b) % 12) as usize;
        let varying: Vec<Vec<u8>> = (0..t)
            .map(|i| {
                let draw = splitmix_at(SEED, 3_300 + b * 16 + i as u64);
                if draw % 2 == 0 {
                    let member = &pairs[(draw % 1_000) as usize];
                    if side == BatchSide::FixedFirst {
                        member.x2.clone()
                    } else {
                        member.x1.clone()
                    }
                } else {
                    canonical_int(draw).to_vec()
                }
            })
            .collect();
        let request = BatchRequest { side, fixed, varying: &varying };
        let batch = batch_query(&filter, &request)?;
        for (item, verdict) in varying.iter().zip(&batch.verdicts) {
            let single = match side {
                BatchSide::FixedFirst => filter.query(fixed, item),
                BatchSide::FixedSecond => filter.query(item, fixed),
            };
            if single != *verdict {
                mismatches += 1;
            }
        }
    }
    let passed = counters_ok && mismatches == 0;
    Ok(CriterionResult::outcome(
        8,
        "batch-hash-reuse",
        passed,
        format!(
            "batch of 10 at k=(4,4) spent ({row_delta}, {col_delta}) hash invocations \
             (want (4, 40)); {mismatches} verdict mismatches over 1000 random batches"
        ),
    ))
}

/// Criterion 9: double-side queries return identical verdicts in both hash
/// orders, for 10^4 tuples spread over 20 random filters. Exact.
pub fn criterion_09_double_side_invariance() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC09;

    let mut disagreements = 0u64;
    for f in 0..20u64 {
        let m1 = 16 + (splitmix_at(SEED, 10 + f) % 497) as u32;
        let m2 = 16 + (splitmix_at(SEED, 30 + f) % 497) as u32;
        let k1 = 1 + (splitmix_at(SEED, 50 + f) % 6) as u32;
        let k2 = 1 + (splitmix_at(SEED, 70 + f) % 6) as u32;
        let n = 200 + splitmix_at(SEED, 90 + f) % 1_801;
        let params = MatrixBloomParams::new(m1, m2, k1, k2, n)?;
        let mut filter = MatrixBloomFilter::new(params, splitmix_at(SEED, 110 + f))?;
        let pairs = gen_no_repeating(n, splitmix_at(SEED, 130 + f))?;
        for p in &pairs {
            filter.insert(&p.x1, &p.x2)?;
        }
        for t in 0..500u64 {
            let draw = splitmix_at(SEED, 1_000 + f * 500 + t);
            let (x1, x2) = if draw % 2 == 0 {
                let p = &pairs[(draw % n) as usize];
                (p.x1.clone(), p.x2.clone())
            } else {
                (
                    canonical_int(splitmix_at(draw, 1)).to_vec(),
                    canonical_int(splitmix_at(draw, 2)).to_vec(),
                )
            };
            let a = double_side_query(&filter, &x1, &x2, QueryOrder::FirstThenSecond);
            let b = double_side_query(&filter, &x1, &x2, QueryOrder::SecondThenFirst);
            if a != b {
                disagreements += 1;
            }
        }
    }
    Ok(CriterionResult::outcome(
        9,
        "double-side-invariance",
        disagreements == 0,
        format!("{disagreements} order disagreements over 10000 tuples on 20 random filters"),
    ))
}

/// Criterion 10: qualitative baseline trends. (a) matrix per-query bit
/// comparisons stay bounded by k1*k2 at every member proportion; (b)
/// chained-table comparisons strictly increase with values per key; (c)
/// with n1 > n2, the backward table direction costs at least the forward.
pub fn criterion_10_baseline_trends() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC0A;

    // (a) proportion sweep at a fixed dataset shape.
    let mut spec = ExperimentSpec::new(ExperimentKind::BatchCompare, SEED, 4_000);
    spec.params.insert("n1".into(), "50".into());
    spec.params.insert("multiplier".into(), "4".into());
    spec.params.insert("proportion".into(), "0,0.25,0.5,0.75,1".into());
    let rows = experiments::run(&spec)?;
    let bound_ok = rows
        .iter()
        .filter(|r| r.structure == "matrix")
        .all(|r| r.empirical.unwrap_or(f64::MAX) <= 4.0 + 1e-9);

    // (b) values-per-key sweep at a fixed proportion.
    let mut spec = ExperimentSpec::new(ExperimentKind::BatchCompare, SEED + 1, 4_000);
    spec.params.insert("n1".into(), "50".into());
    spec.params.insert("multiplier".into(), "1,2,3,4,5,6,7,8,9,10".into());
    spec.params.insert("proportion".into(), "0.5".into());
    let rows = experiments::run(&spec)?;
    let chain_costs: Vec<f64> =
        rows.iter().filter(|r| r.structure == "hashmap").map(|r| r.empirical.unwrap()).collect();
    let monotone_ok = chain_costs.len() == 10 && chain_costs.windows(2).all(|w| w[1] > w[0]);

    // (c) direction asymmetry on full-repeating data with n1 > n2.
    let mut spec = ExperimentSpec::new(ExperimentKind::DoubleSide, SEED + 2, 100_000);
    spec.params.insert("n1".into(), "64".into());
    spec.params.insert("n2".into(), "8".into());
    let rows = experiments::run(&spec)?;
    let cost = |name: &str| -> f64 {
        rows.iter().find(|r| r.structure == name).and_then(|r| r.empirical).unwrap_or(f64::NAN)
    };
    let forward = cost("double-hashmap-forward");
    let backward = cost("double-hashmap-backward");
    let direction_ok = backward >= forward;

    let passed = bound_ok && monotone_ok && direction_ok;
    Ok(CriterionResult::outcome(
        10,
        "baseline-trends",
        passed,
        format!(
            "matrix probe bound {}; chain costs strictly increasing over multipliers 1-10 {} \
             ({:.2} -> {:.2}); backward {backward:.2} >= forward {forward:.2} {}",
            if bound_ok { "held" } else { "violated" },
            if monotone_ok { "held" } else { "violated" },
            chain_costs.first().copied().unwrap_or(f64::NAN),
            chain_costs.last().copied().unwrap_or(f64::NAN),
            if direction_ok { "held" } else { "violated" },
        ),
    ))
}

/// Criterion 11: docword ingestion. The crafted minimal file always runs;
/// the corpus cardinality pins run only when the fetched files are present
/// under `data_dir`, otherwise the criterion reports a clean skip.
pub fn criterion_11_docword_ingestion(data_dir: &Path) -> Result<CriterionResult> {
    let crafted = "1\n1\n1\n1 1 1\n";
    let parsed = parse_docword(crafted.as_bytes())?;
    let crafted_ok = parsed.pairs.len() == 1;
    if !crafted_ok {
        return Ok(CriterionResult::outcome(
            11,
            "docword-ingestion",
            false,
            format!("crafted minimal file parsed to {} pairs, want 1", parsed.pairs.len()),
        ));
    }

    let corpora: [(&str, u64, u64); 2] =
        [("docword.kos.txt", 353_160, 3_430), ("docword.nips.txt", 746_316, 1_500)];
    let mut details = vec!["crafted minimal file -> 1 pair".to_string()];
    let mut missing = Vec::new();
    let mut passed = true;
    for (name, want_pairs, want_docs) in corpora {
        let plain = data_dir.join(name);
        let gz = data_dir.join(format!("{name}.gz"));
        let text = if plain.is_file() {
            std::fs::read_to_string(&plain)?
        } else if gz.is_file() {
            let mut out = String::new();
            flate2::read::GzDecoder::new(std::fs::File::open(&gz)?).read_to_string(&mut out)?;
            out
        } else {
            missing.push(name);
            continue;
        };
        let data = parse_docword(text.as_bytes())?;
        let ok = data.pairs.len() as u64 == want_pairs && data.distinct_docs == want_docs;
        passed &= ok;
        details.push(format!(
            "{name}: {} pairs (want {want_pairs}), {} docs (want {want_docs})",
            data.pairs.len(),
            data.distinct_docs
        ));
    }
    if !missing.is_empty() && passed {
        return Ok(CriterionResult::skip(
            11,
            "docword-ingestion",
            format!(
                "{}; corpus files absent ({}); fetch with `mbf fetch-data <kos|nips> --out {}`",
                details.join("; "),
                missing.join(", "),
                data_dir.display()
            ),
        ));
    }
    Ok(CriterionResult::outcome(11, "docword-ingestion", passed, details.join("; ")))
}

/// Criterion 12: multi-set structures never drop a true membership on a
/// 16-set x 64-element universe, and false-inclusion rates sit within 3
/// between-replicate SEs of their closed forms.
pub fn criterion_12_multiset_equivalence() -> Result<CriterionResult> {
    const SEED: u64 = 0xAC0C;
    const SETS: u64 = 16;
    const ELEMENTS: u64 = 64;
    const PER_SET: u64 = ELEMENTS / SETS;
    const REPS: usize = 24;
    const PROBES: u64 = 250;

    // Frozen closed forms for the two structures at this geometry.
    let vbf_theory = standard_fpr_exact(18, 3, PER_SET);
    assert!((vbf_theory - 0.1284141298916696).abs() < 1e-12);
    let q4 = (1.0 - 1.0 / 36.0f64).powi(4);
    let gmi_theory = 1.0 - q4 * (1.0 - (1.0 - q4) / 36.0).powi(15);
    assert!((gmi_theory - 0.14542594575168577).abs() < 1e-12);

    let candidates: Vec<u64> = (0..SETS).collect();
    let mut vbf_rates = Vec::with_capacity(REPS);
    let mut gmi_rates = Vec::with_capacity(REPS);
    let mut truth_violations = 0u64;
    for rep in 0..REPS {
        let tag = rep as u64;
        let mut vbf = Vbf::new(&vec![PER_SET; SETS as usize], 3, splitmix_at(SEED, 10 + tag))?;
        let gmi_params = MatrixBloomParams::new(36, 36, 1, 1, ELEMENTS)?;
        let mut gmi = GeneralMultisetIndex::new(gmi_params, splitmix_at(SEED, 50 + tag))?;

        let mut members = HashSet::new();
        let element_seed = splitmix_at(SEED, 100 + tag);
        let mut inserted = Vec::new();
        let mut draw = 0u64;
        for i in 0..ELEMENTS {
            let mut id = splitmix_at(element_seed, draw);
            while !members.insert(id) {
                draw += 1;
                id = splitmix_at(element_seed, draw);
            }
            draw += 1;
            let set_id = i % SETS;
            let encoded = canonical_int(id);
            vbf.insert(set_id as usize, &encoded)?;
            gmi.insert(set_id, &encoded)?;
            inserted.push((set_id, encoded));
        }

        // Superset of truth, exact: every stored membership is reported.
        for (set_id, encoded) in &inserted {
            if !vbf.which_sets(encoded).contains(&(*set_id as usize)) {
                truth_violations += 1;
            }
            if !gmi.which_sets(encoded, &candidates)?.contains(set_id) {
                truth_violations += 1;
            }
        }

        // Fresh probes: every reported set is a false inclusion.
        let probe_seed = splitmix_at(SEED, 200 + tag);
        let mut vbf_hits = 0u64;
        let mut gmi_hits = 0u64;
        let mut drawn = 0u64;
        let mut done = 0u64;
        while done < PROBES {
            let id = splitmix_at(probe_seed, drawn);
            drawn += 1;
            if members.contains(&id) {
                continue;
            }
            done += 1;
            let encoded = canonical_int(id);
            vbf_hits += vbf.which_sets(&encoded).len() as u64;
            gmi_hits += gmi.which_sets(&encoded, &candidates)?.len() as u64;
        }
        let checks = (PROBES * SETS) as f64;
        vbf_rates.push(vbf_hits as f64 / checks);
        gmi_rates.push(gmi_hits as f64 / checks);
    }

    let (vbf_mean, vbf_se) = mean_and_se(&vbf_rates);
    let (gmi_mean, gmi_se) = mean_and_se(&gmi_rates);
    let vbf_z = (vbf_mean - vbf_theory).abs() / vbf_se;
    let gmi_z = (gmi_mean - gmi_theory).abs() / gmi_se;
    let passed = truth_violations == 0 && vbf_z <= 3.0 && gmi_z <= 3.0;
    Ok(CriterionResult::outcome(
        12,
        "multiset-equivalence",
        passed,
        format!(
            "{truth_violations} dropped memberships; vbf {vbf_mean:.4} vs {vbf_theory:.4} \
             (|z|={vbf_z:.2}); gmi {gmi_mean:.4} vs {gmi_theory:.4} (|z|={gmi_z:.2}) \
             over {REPS} replicates"
        ),
    ))
}

/// Runs all twelve criteria in order. `data_dir` is where fetched corpora
/// live for the ingestion check.
pub fn run_all(data_dir: &Path) -> Result<Vec<CriterionResult>> {
    Ok(vec![
        criterion_01_no_false_negatives()?,
        criterion_02_square_optimum()?,
        criterion_03_degradation_equivalence()?,
        criterion_04_max_adaptive_fpr()?,
        criterion_05_load_factor()?,
        criterion_06_jmatrix_equivalence()?,
        criterion_07_storage_bound()?,
        criterion_08_batch_contract()?,
        criterion_09_double_side_invariance()?,
        criterion_10_baseline_trends()?,
        criterion_11_docword_ingestion(data_dir)?,
        criterion_12_multiset_equivalence()?,
    ])
}
