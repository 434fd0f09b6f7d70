//! Dense 2D bit array with set/test, a cached popcount, and a binary
//! snapshot format.
//!
//! Bits are stored row-major in packed 64-bit words. Writes only ever flip
//! bits from 0 to 1, so the structure is insert-only and the `ones` count is
//! maintained incrementally. Allocation is guarded by a byte budget
//! (default 256 MiB) so an oversized geometry fails fast instead of thrashing.
//!
//! Snapshot layout, fixed and endian-stable:
//!
//! ```text
//! offset  size  field
//! 0       4     magic "MBF1"
//! 4       4     rows, u32 big-endian
//! 8       4     cols, u32 big-endian
//! 12      4     reserved, zero
//! 16      -     bits, row-major, 8 per byte, most-significant bit first,
//!               zero-padded to a byte boundary
//! ```
//!
//! The ones count is deliberately not serialized; it is recomputed on load.

use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Default allocation budget: 256 MiB.
pub const DEFAULT_BUDGET_BYTES: u64 = 256 * 1024 * 1024;

const MAGIC: [u8; 4] = *b"MBF1";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: u32,
    cols: u32,
    words: Vec<u64>,
    ones: u64,
}

impl BitMatrix {
    /// All-zero matrix within the default budget.
    pub fn new(rows: u32, cols: u32) -> Result<Self> {
        Self::with_budget(rows, cols, DEFAULT_BUDGET_BYTES)
    }

    /// All-zero matrix within an explicit byte budget.
    pub fn with_budget(rows: u32, cols: u32, budget_bytes: u64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidParameter(format!(
                "matrix dimensions must be positive, got {rows}x{cols}"
            )));
        }
        let bits = rows as u128 * cols as u128;
        let words = bits.div_ceil(64);
        if words * 8 > budget_bytes as u128 {
            return Err(Error::Capacity { needed_bits: bits, budget_bytes });
        }
        Ok(Self { rows, cols, words: vec![0u64; words as usize], ones: 0 })
    }

    pub fn rows(&self) -> u32 {
        self.rows
    }

    pub fn cols(&self) -> u32 {
        self.cols
    }

    pub fn bit_count(&self) -> u64 {
        self.rows as u64 * self.cols as u64
    }

    /// Number of set bits; kept in step with every mutation.
    pub fn ones(&self) -> u64 {
        self.ones
    }

    /// Fraction of bits set, in [0, 1].
    pub fn load_factor(&self) -> f64 {
        self.ones as f64 / self.bit_count() as f64
    }

    #[inline]
    fn index(&self, row: u32, col: u32) -> Result<u64> {
        if row >= self.rows || col >= self.cols {
            return Err(Error::InvalidParameter(format!(
                "bit ({row},{col}) out of range for {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(row as u64 * self.cols as u64 + col as u64)
    }

    /// Sets a bit; returns whether it changed (false if already set).
    pub fn set(&mut self, row: u32, col: u32) -> Result<bool> {
        let ix = self.index(row, col)?;
        let word = &mut self.words[(ix / 64) as usize];
        let mask = 1u64 << (ix % 64);
        let changed = *word & mask == 0;
        *word |= mask;
        self.ones += changed as u64;
        Ok(changed)
    }

    pub fn test(&self, row: u32, col: u32) -> Result<bool> {
        let ix = self.index(row, col)?;
        Ok(self.words[(ix / 64) as usize] & (1 << (ix % 64)) != 0)
    }

    /// Serializes the documented snapshot layout.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(&MAGIC)?;
        w.write_all(&self.rows.to_be_bytes())?;
        w.write_all(&self.cols.to_be_bytes())?;
        w.write_all(&[0u8; 4])?;
        let bits = self.bit_count();
        let mut buf = vec![0u8; (bits as usize).div_ceil(8)];
        for ix in 0..bits {
            if self.words[(ix / 64) as usize] & (1 << (ix % 64)) != 0 {
                buf[(ix / 8) as usize] |= 0x80 >> (ix % 8);
            }
        }
        w.write_all(&buf)?;
        Ok(())
    }

    /// Reads a snapshot, recomputing the ones count and validating padding.
    pub fn read_snapshot<R: Read>(mut r: R) -> Result<Self> {
        let mut header = [0u8; 16];
        r.read_exact(&mut header).map_err(|e| Error::Snapshot(format!("short header: {e}")))?;
        if header[..4] != MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let rows = u32::from_be_bytes(header[4..8].try_into().unwrap());
        let cols = u32::from_be_bytes(header[8..12].try_into().unwrap());
        let mut out = Self::new(rows, cols).map_err(|e| Error::Snapshot(e.to_string()))?;
        let bits = out.bit_count();
        let mut buf = vec![0u8; (bits as usize).div_ceil(8)];
        r.read_exact(&mut buf).map_err(|e| Error::Snapshot(format!("short body: {e}")))?;
        for (byte_ix, &byte) in buf.iter().enumerate() {
            if byte == 0 {
                continue;
            }
            for bit in 0..8u64 {
                if byte & (0x80 >> bit) != 0 {
                    let ix = byte_ix as u64 * 8 + bit;
                    if ix >= bits {
                        return Err(Error::Snapshot("nonzero padding bits".into()));
                    }
                    out.words[(ix / 64) as usize] |= 1 << (ix % 64);
                }
            }
        }
        out.ones = out.words.iter().map(|w| w.count_ones() as u64).sum();
        Ok(out)
    }

    pub fn to_snapshot_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_snapshot(&mut buf).expect("vec write cannot fail");
        buf
    }

    pub fn from_snapshot_bytes(bytes: &[u8]) -> Result<Self> {
        Self::read_snapshot(bytes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn starts_empty() {
        let m = BitMatrix::new(116, 116).unwrap();
        assert_eq!(m.bit_count(), 13_456);
        assert_eq!(m.ones(), 0);
        assert_eq!(m.load_factor(), 0.0);
        assert!(!m.test(115, 115).unwrap());
    }

    #[test]
    fn set_reports_change_once() {
        let mut m = BitMatrix::new(4, 4).unwrap();
        assert!(m.set(2, 3).unwrap());
        assert!(!m.set(2, 3).unwrap());
        assert_eq!(m.ones(), 1);
        assert!(m.test(2, 3).unwrap());
        assert!(!m.test(3, 2).unwrap());
    }

    #[test]
    fn rejects_zero_dimension_and_out_of_range() {
        assert!(matches!(BitMatrix::new(0, 5), Err(Error::InvalidParameter(_))));
        assert!(matches!(BitMatrix::new(5, 0), Err(Error::InvalidParameter(_))));
        let mut m = BitMatrix::new(3, 3).unwrap();
        assert!(matches!(m.set(3, 0), Err(Error::InvalidParameter(_))));
        assert!(matches!(m.test(0, 3), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn enforces_budget() {
        // 10^12 bits is far beyond the default 256 MiB.
        assert!(matches!(BitMatrix::new(1_000_000, 1_000_000), Err(Error::Capacity { .. })));
        assert!(BitMatrix::with_budget(64, 64, 512).is_ok());
        assert!(matches!(BitMatrix::with_budget(64, 65, 512), Err(Error::Capacity { .. })));
    }

    #[test]
    fn snapshot_golden_bytes() {
        let mut m = BitMatrix::new(2, 3).unwrap();
        m.set(0, 0).unwrap();
        m.set(1, 2).unwrap(); // row-major bit 5
        let bytes = m.to_snapshot_bytes();
        assert_eq!(
            bytes,
            vec![
                b'M',
                b'B',
                b'F',
                b'1', // magic
                0,
                0,
                0,
                2, // rows
                0,
                0,
                0,
                3, // cols
                0,
                0,
                0,
                0,           // reserved
                0b1000_0100, // bits 0 and 5, MSB first
            ]
        );
        let back = BitMatrix::from_snapshot_bytes(&bytes).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.ones(), 2);
    }

    #[test]
    fn snapshot_rejects_corruption() {
        let m = BitMatrix::new(2, 3).unwrap();
        let mut bytes = m.to_snapshot_bytes();
        bytes[0] = b'X';
        assert!(matches!(BitMatrix::from_snapshot_bytes(&bytes), Err(Error::Snapshot(_))));
        let mut padded = m.to_snapshot_bytes();
        *padded.last_mut().unwrap() = 0x01; // padding bit beyond 6 valid bits
        assert!(matches!(BitMatrix::from_snapshot_bytes(&padded), Err(Error::Snapshot(_))));
        assert!(matches!(BitMatrix::from_snapshot_bytes(&bytes[..10]), Err(Error::Snapshot(_))));
    }

    proptest! {
        // The cached count must equal a fresh popcount after any set sequence,
        // and the load factor must never decrease.
        #[test]
        fn ones_matches_popcount(ops in proptest::collection::vec((0u32..40, 0u32..23), 0..200)) {
            let mut m = BitMatrix::new(40, 23).unwrap();
            let mut last_load = 0.0f64;
            for (r, c) in ops {
                m.set(r, c).unwrap();
                let load = m.load_factor();
                prop_assert!(load >= last_load);
                last_load = load;
            }
            let popcount: u64 = m.words.iter().map(|w| w.count_ones() as u64).sum();
            prop_assert_eq!(m.ones(), popcount);
        }

        #[test]
        fn snapshot_roundtrip(ops in proptest::collection::vec((0u32..19, 0u32..31), 0..120)) {
            let mut m = BitMatrix::new(19, 31).unwrap();
            for (r, c) in ops {
                m.set(r, c).unwrap();
            }
            let back = BitMatrix::from_snapshot_bytes(&m.to_snapshot_bytes()).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
