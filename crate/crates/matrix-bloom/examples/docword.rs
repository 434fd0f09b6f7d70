//! Ingest a docword bag-of-words file (header of three counts, then
//! "docID wordID count" lines) and answer membership for (document, word)
//! pairs. Pass a path to a real corpus, for example one fetched with
//! `mbf fetch-data kos --out data`, or run with no argument to use a tiny
//! embedded one.

use std::fs::File;

use matrix_bloom::datasets::{mix_lookup_set, parse_docword};
use matrix_bloom::{plan_generic, MatrixBloomFilter, TuplePair};

const MINI: &str = "3\n5\n7\n\
1 1 2\n1 3 1\n2 2 5\n2 3 1\n2 5 2\n3 1 1\n3 4 4\n";

fn main() -> matrix_bloom::Result<()> {
    let data = match std::env::args().nth(1) {
        Some(path) if path.ends_with(".gz") => {
            parse_docword(flate2::read::GzDecoder::new(File::open(&path)?))?
        }
        Some(path) => parse_docword(File::open(&path)?)?,
        None => parse_docword(MINI.as_bytes())?,
    };
    println!(
        "header: {} docs, {} words, {} entries; parsed {} pairs ({} docs, {} words seen)",
        data.header.0,
        data.header.1,
        data.header.2,
        data.pairs.len(),
        data.distinct_docs,
        data.distinct_words
    );
    for w in &data.warnings {
        println!("warning: {w}");
    }

    let n = data.pairs.len() as u64;
    let mut filter = MatrixBloomFilter::new(plan_generic(n, 8, None)?, 2)?;
    for p in &data.pairs {
        filter.insert(&p.x1, &p.x2)?;
    }
    filter.freeze();
    println!(
        "filter: {}x{} bits ({:.1} KiB) for {n} pairs",
        filter.params().m1,
        filter.params().m2,
        filter.params().bits() as f64 / 8192.0
    );

    let probe = |d: u64, w: u64| {
        let p = TuplePair::scalars(d, w);
        filter.query(&p.x1, &p.x2)
    };
    println!("doc 1 contains word 1: {}", probe(1, 1));
    println!("doc 3 contains word 2: {}", probe(3, 2));

    if n >= 1_000 {
        let lookups = mix_lookup_set(&data.pairs, 41, 0.0, 100_000)?;
        let fresh = &lookups.section_two;
        let hits = fresh.iter().filter(|p| filter.query(&p.x1, &p.x2)).count();
        println!(
            "fresh-pair false positive rate: {:.4e} over {} queries",
            hits as f64 / fresh.len() as f64,
            fresh.len()
        );
    }
    Ok(())
}
