//! Seeded universal hashing over byte strings.
//!
//! A family of `count` functions maps items into `[0, range)`. Each function
//! treats the item as a vector of bits (bytes in order, least-significant
//! bit first within a byte, so a 64-bit little-endian word contributes its
//! bits 0..63 in order; a zero-padded tail contributes nothing). Every set
//! bit selects one random 64-bit coefficient from a per-function stream, the
//! selected coefficients are XORed together, and the accumulator is reduced
//! modulo `range`. XOR-combining one random word per set bit is a random
//! linear map over GF(2), so any two distinct items collide with probability
//! about 1/range regardless of how `range` factors.
//!
//! Coefficients are lazily indexed outputs of SplitMix64 (Steele et al.),
//! chosen because its counter form gives O(1) access to any position of the
//! stream and identical values on every platform: the coefficient for bit
//! `b` of function `i` is `mix64(s_i + GAMMA*(b+1))`, where the stream seed
//! `s_i = mix64(seed + GAMMA*(i+1))` is the `i`-th output of SplitMix64
//! seeded with the family seed. The same derivation is easy to reproduce in
//! other languages, which keeps serialized filters portable. For speed, the
//! coefficients covering the first bytes of the input are folded into
//! byte-indexed lookup tables at construction; longer inputs fall back to
//! walking coefficients bit by bit, with identical results.

use crate::error::{Error, Result};

/// SplitMix64 increment (the "golden gamma").
pub const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// Input bytes covered by the precomputed lookup tables.
const EAGER_BYTES: usize = 16;

/// SplitMix64 output mix.
#[inline]
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// The `index`-th output (0-based) of SplitMix64 seeded with `seed`.
#[inline]
pub fn splitmix_at(seed: u64, index: u64) -> u64 {
    mix64(seed.wrapping_add(GAMMA.wrapping_mul(index.wrapping_add(1))))
}

/// A seeded family of `count` hash functions onto `[0, range)`.
///
/// Immutable after construction; identical `(count, range, seed)` triples
/// produce bit-identical functions across runs and platforms.
#[derive(Debug, Clone)]
pub struct UniversalHashFamily {
    count: usize,
    range: u64,
    seed: u64,
    /// Per-function SplitMix64 stream seeds; see the module docs for how
    /// bit coefficients are drawn from each stream.
    streams: Vec<u64>,
    /// `count * EAGER_BYTES` byte tables of 256 precombined coefficients.
    tables: Vec<u64>,
}

impl UniversalHashFamily {
    /// Builds a family of `count >= 1` functions onto `range >= 2`.
    pub fn new(count: usize, range: u64, seed: u64) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("hash family needs count >= 1".into()));
        }
        if range < 2 {
            return Err(Error::InvalidParameter(format!(
                "hash family needs range >= 2, got {range}"
            )));
        }
        Ok(Self::build(count, range, seed))
    }

    /// Internal constructor that also accepts `range == 1` (every index is 0).
    /// Single-row and single-class geometries need this degenerate form.
    pub(crate) fn new_any_range(count: usize, range: u64, seed: u64) -> Result<Self> {
        if count == 0 || range == 0 {
            return Err(Error::InvalidParameter(
                "hash family needs count >= 1 and range >= 1".into(),
            ));
        }
        Ok(Self::build(count, range, seed))
    }

    fn build(count: usize, range: u64, seed: u64) -> Self {
        let streams: Vec<u64> = (0..count as u64).map(|i| splitmix_at(seed, i)).collect();
        let mut tables = vec![0u64; count * EAGER_BYTES * 256];
        for (func, &stream) in streams.iter().enumerate() {
            for byte_pos in 0..EAGER_BYTES {
                let base = (func * EAGER_BYTES + byte_pos) * 256;
                for v in 1usize..256 {
                    let low = v.trailing_zeros() as u64;
                    tables[base + v] = tables[base + (v & (v - 1))]
                        ^ splitmix_at(stream, byte_pos as u64 * 8 + low);
                }
            }
        }
        Self { count, range, seed, streams, tables }
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn range(&self) -> u64 {
        self.range
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Coefficient XORed in when input bit `bit` is set, for function `func`.
    #[inline]
    pub fn coefficient(&self, func: usize, bit: u64) -> u64 {
        splitmix_at(self.streams[func], bit)
    }

    /// Index of `item` under function `func`, or an error when `func` is out
    /// of bounds. An empty item hashes like an all-zero item, to 0.
    pub fn hash_index(&self, func: usize, item: &[u8]) -> Result<u64> {
        if func >= self.count {
            return Err(Error::InvalidParameter(format!(
                "function index {func} out of bounds for family of {}",
                self.count
            )));
        }
        Ok(self.index_of(func, item))
    }

    #[inline]
    pub(crate) fn index_of(&self, func: usize, item: &[u8]) -> u64 {
        let mut acc = 0u64;
        let table = &self.tables[func * EAGER_BYTES * 256..(func + 1) * EAGER_BYTES * 256];
        for (byte_pos, &byte) in item.iter().enumerate().take(EAGER_BYTES) {
            acc ^= table[byte_pos * 256 + byte as usize];
        }
        if item.len() > EAGER_BYTES {
            let stream = self.streams[func];
            for (byte_pos, &byte) in item.iter().enumerate().skip(EAGER_BYTES) {
                let mut rest = byte;
                while rest != 0 {
                    let bit = rest.trailing_zeros() as u64;
                    acc ^= splitmix_at(stream, byte_pos as u64 * 8 + bit);
                    rest &= rest - 1;
                }
            }
        }
        acc % self.range
    }

    /// All `count` indices of `item`, in function order.
    pub fn indices(&self, item: &[u8]) -> Vec<u64> {
        (0..self.count).map(|i| self.index_of(i, item)).collect()
    }
}

/// A seeded map from items to one of `j` classes.
///
/// Stable across runs; `j == 1` sends everything to class 0.
#[derive(Debug, Clone)]
pub struct PartitionHash {
    classes: u64,
    family: UniversalHashFamily,
}

impl PartitionHash {
    pub fn new(classes: u64, seed: u64) -> Result<Self> {
        if classes == 0 {
            return Err(Error::InvalidParameter("partition needs j >= 1".into()));
        }
        Ok(Self { classes, family: UniversalHashFamily::new_any_range(1, classes, seed)? })
    }

    pub fn classes(&self) -> u64 {
        self.classes
    }

    pub fn seed(&self) -> u64 {
        self.family.seed()
    }

    #[inline]
    pub fn partition(&self, item: &[u8]) -> u64 {
        self.family.index_of(0, item)
    }
}

/// Canonical byte form of an unsigned integer: fixed 8 bytes, big-endian.
#[inline]
pub fn canonical_int(v: u64) -> [u8; 8] {
    v.to_be_bytes()
}

/// Canonical byte form of text: 8-byte big-endian length prefix, then UTF-8.
pub fn canonical_text(s: &str) -> Vec<u8> {
    let bytes = s.as_bytes();
    let mut out = Vec::with_capacity(8 + bytes.len());
    out.extend_from_slice(&(bytes.len() as u64).to_be_bytes());
    out.extend_from_slice(bytes);
    out
}
