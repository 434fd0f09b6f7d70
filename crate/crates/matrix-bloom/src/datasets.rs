//! Dataset generation, persistence, and docword ingestion.
//!
//! Generated datasets are pair sequences over random 64-bit scalars in
//! canonical encoding: `full-repeating` emits the complete cross product of
//! two scalar axes, `no-repeating` a bijection. The docword parser ingests
//! the UCI Bag-of-Words text format. Lookup sets split a query workload into
//! a member section and a verified non-member section.
//!
//! All generation is deterministic in the seed, byte for byte.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Read, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hash::canonical_int;

/// One 2-tuple; components are canonically encoded bytes, so pair equality
/// is byte equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TuplePair {
    pub x1: Vec<u8>,
    pub x2: Vec<u8>,
}

impl TuplePair {
    pub fn scalars(x1: u64, x2: u64) -> Self {
        Self { x1: canonical_int(x1).to_vec(), x2: canonical_int(x2).to_vec() }
    }
}

/// A query workload: `section_one` are known members, `section_two` are
/// verified non-members, mixed at `proportion` of members.
#[derive(Debug, Clone)]
pub struct LookupSet {
    pub section_one: Vec<TuplePair>,
    pub section_two: Vec<TuplePair>,
    pub proportion: f64,
}

impl LookupSet {
    pub fn len(&self) -> usize {
        self.section_one.len() + self.section_two.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Parsed docword content: pairs plus the header and measured cardinalities.
#[derive(Debug, Clone)]
pub struct DocwordData {
    pub pairs: Vec<TuplePair>,
    /// Header triple `(docs, words, nnz)` as stated by the file.
    pub header: (u64, u64, u64),
    pub distinct_docs: u64,
    pub distinct_words: u64,
    /// Non-fatal inconsistencies, e.g. an NNZ header that disagrees with the
    /// actual line count.
    pub warnings: Vec<String>,
}

fn distinct_scalars(rng: &mut ChaCha8Rng, count: u64) -> Vec<u64> {
    let mut seen = HashSet::with_capacity(count as usize);
    let mut out = Vec::with_capacity(count as usize);
    while out.len() < count as usize {
        let v = rng.gen::<u64>();
        if seen.insert(v) {
            out.push(v);
        }
    }
    out
}

/// Full cross product of `n1` random first components and `n2` random second
/// components; every component repeats maximally.
///
/// Pairs are emitted first-component-major: a prefix of the output covers
/// whole first-component rows, which is the fill model the load-factor
/// experiments use.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when an axis is empty or `n1*n2` overflows.
pub fn gen_full_repeating(n1: u64, n2: u64, seed: u64) -> Result<Vec<TuplePair>> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidParameter("axis cardinalities must be >= 1".into()));
    }
    let total = n1
        .checked_mul(n2)
        .and_then(|t| usize::try_from(t).ok())
        .ok_or_else(|| Error::InvalidParameter("n1*n2 does not fit in memory".into()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis_one = distinct_scalars(&mut rng, n1);
    let axis_two = distinct_scalars(&mut rng, n2);
    let mut pairs = Vec::with_capacity(total);
    for &a in &axis_one {
        for &b in &axis_two {
            pairs.push(TuplePair::scalars(a, b));
        }
    }
    Ok(pairs)
}

/// `n` pairs forming a bijection: all first components distinct, all second
/// components distinct.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `n` is zero.
pub fn gen_no_repeating(n: u64, seed: u64) -> Result<Vec<TuplePair>> {
    if n == 0 {
        return Err(Error::InvalidParameter("pair count must be >= 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let axis_one = distinct_scalars(&mut rng, n);
    let axis_two = distinct_scalars(&mut rng, n);
    Ok(axis_one.into_iter().zip(axis_two).map(|(a, b)| TuplePair::scalars(a, b)).collect())
}

fn parse_count(line: &str, number: usize, what: &str) -> Result<u64> {
    line.trim().parse::<u64>().map_err(|_| Error::Parse {
        line: number,
        msg: format!("expected {what} count, found {line:?}"),
    })
}

/// Parses the UCI Bag-of-Words docword format: three header lines (document
/// count, vocabulary size, NNZ), then one `docID wordID count` triple per
/// line. The count field is validated but ignored; each line yields one
/// `(docID, wordID)` pair in canonical encoding.
///
/// # Errors
///
/// [`Error::Parse`] with a 1-based line number on any malformed header or
/// data line. An NNZ header that disagrees with the actual data-line count
/// is reported as a warning, not an error.
pub fn parse_docword<R: Read>(reader: R) -> Result<DocwordData> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let mut next_line = |what: &str| -> Result<(usize, String)> {
        for (ix, line) in lines.by_ref() {
            let line = line?;
            if !line.trim().is_empty() {
                return Ok((ix + 1, line));
            }
        }
        Err(Error::Parse { line: 0, msg: format!("missing {what} line") })
    };

    let (n, line) = next_line("document-count header")?;
    let docs = parse_count(&line, n, "document")?;
    let (n, line) = next_line("vocabulary-size header")?;
    let words = parse_count(&line, n, "vocabulary")?;
    let (n, line) = next_line("nnz header")?;
    let nnz = parse_count(&line, n, "nnz")?;

    let mut pairs = Vec::with_capacity(usize::try_from(nnz).unwrap_or(0));
    let mut doc_ids = HashSet::new();
    let mut word_ids = HashSet::new();
    for (ix, line) in lines {
        let line = line?;
        let number = ix + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        let mut field = |what: &str| -> Result<u64> {
            fields
                .next()
                .ok_or_else(|| Error::Parse { line: number, msg: format!("missing {what} field") })?
                .parse::<u64>()
                .map_err(|_| Error::Parse { line: number, msg: format!("bad {what} field") })
        };
        let doc = field("docID")?;
        let word = field("wordID")?;
        field("count")?;
        if fields.next().is_some() {
            return Err(Error::Parse { line: number, msg: "more than three fields".into() });
        }
        doc_ids.insert(doc);
        word_ids.insert(word);
        pairs.push(TuplePair::scalars(doc, word));
    }

    let mut warnings = Vec::new();
    if pairs.len() as u64 != nnz {
        warnings.push(format!("header claims {nnz} entries, file holds {}", pairs.len()));
    }
    Ok(DocwordData {
        pairs,
        header: (docs, words, nnz),
        distinct_docs: doc_ids.len() as u64,
        distinct_words: word_ids.len() as u64,
        warnings,
    })
}

/// Builds a lookup workload of `size` queries: a member section sampled
/// uniformly from `members` and a non-member section of fresh scalar pairs,
/// each rejection-checked against the exact member set.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when `proportion` is outside `[0, 1]`, `size`
/// is zero, or `members` is empty while `proportion > 0`.
pub fn mix_lookup_set(
    members: &[TuplePair],
    universe_seed: u64,
    proportion: f64,
    size: u64,
) -> Result<LookupSet> {
    if !(0.0..=1.0).contains(&proportion) {
        return Err(Error::InvalidParameter(format!("proportion {proportion} outside [0, 1]")));
    }
    if size == 0 {
        return Err(Error::InvalidParameter("lookup-set size must be >= 1".into()));
    }
    let one_count = (proportion * size as f64).round() as u64;
    if one_count > 0 && members.is_empty() {
        return Err(Error::InvalidParameter(
            "member section requested but the member set is empty".into(),
        ));
    }
    let member_set: HashSet<&TuplePair> = members.iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(universe_seed);
    let section_one: Vec<TuplePair> =
        (0..one_count).map(|_| members[rng.gen_range(0..members.len())].clone()).collect();
    let mut section_two = Vec::with_capacity((size - one_count) as usize);
    while (section_two.len() as u64) < size - one_count {
        let candidate = TuplePair::scalars(rng.gen(), rng.gen());
        if !member_set.contains(&candidate) {
            section_two.push(candidate);
        }
    }
    Ok(LookupSet { section_one, section_two, proportion })
}

fn scalar_of(bytes: &[u8], what: &str) -> Result<u64> {
    let arr: [u8; 8] = bytes
        .try_into()
        .map_err(|_| Error::InvalidParameter(format!("{what} is not a canonical 8-byte scalar")))?;
    Ok(u64::from_be_bytes(arr))
}

/// Persists scalar pairs as text: a `# generator=<name> seed=<seed>` header,
/// then one `x1<TAB>x2` decimal line per pair.
///
/// # Errors
///
/// [`Error::InvalidParameter`] when a component is not a canonical 8-byte
/// scalar; I/O errors from the writer.
pub fn save_pairs<W: Write>(
    mut writer: W,
    pairs: &[TuplePair],
    generator: &str,
    seed: u64,
) -> Result<()> {
    writeln!(writer, "# generator={generator} seed={seed}")?;
    for pair in pairs {
        let a = scalar_of(&pair.x1, "first component")?;
        let b = scalar_of(&pair.x2, "second component")?;
        writeln!(writer, "{a}\t{b}")?;
    }
    Ok(())
}

/// Loads pairs saved by [`save_pairs`]; returns the pairs and the header
/// line (without the leading `#`).
///
/// # Errors
///
/// [`Error::Parse`] with a line number on a missing header or malformed
/// line.
pub fn load_pairs<R: Read>(reader: R) -> Result<(Vec<TuplePair>, String)> {
    let mut lines = BufReader::new(reader).lines().enumerate();
    let header = match lines.next() {
        Some((_, Ok(line))) if line.starts_with('#') => line[1..].trim().to_string(),
        Some((_, Ok(_))) => {
            return Err(Error::Parse { line: 1, msg: "missing `#` header line".into() })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(Error::Parse { line: 1, msg: "empty file".into() }),
    };
    let mut pairs = Vec::new();
    for (ix, line) in lines {
        let line = line?;
        let number = ix + 1;
        if line.trim().is_empty() {
            continue;
        }
        let (a, b) = line.split_once('\t').ok_or_else(|| Error::Parse {
            line: number,
            msg: "expected two tab-separated fields".into(),
        })?;
        let a = a
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Parse { line: number, msg: "bad first component".into() })?;
        let b = b
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::Parse { line: number, msg: "bad second component".into() })?;
        pairs.push(TuplePair::scalars(a, b));
    }
    Ok((pairs, header))
}
