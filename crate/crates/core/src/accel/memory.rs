//! 8 KB data memory: 1024 words of 64 bits behind two ports.

use crate::error::{Error, Result};

pub const DATA_WORDS: usize = 1024;
pub const WORD_BYTES: usize = 8;
pub const DATA_BYTES: usize = DATA_WORDS * WORD_BYTES;
/// Accesses the memory accepts per cycle.
pub const PORTS: u8 = 2;

/// Word-addressed memory. Bytes map to words little-endian.
#[derive(Clone, PartialEq, Eq)]
pub struct DataMemory {
    words: Vec<u64>,
    touched: Vec<bool>,
}

impl std::fmt::Debug for DataMemory {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "DataMemory({} words touched)", self.touched_words())
    }
}

impl Default for DataMemory {
    fn default() -> Self {
        Self::new()
    }
}

impl DataMemory {
    pub fn new() -> Self {
        Self {
            words: vec![0; DATA_WORDS],
            touched: vec![false; DATA_WORDS],
        }
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Distinct words ever read or written.
    pub fn touched_words(&self) -> usize {
        self.touched.iter().filter(|&&t| t).count()
    }

    pub fn touched_bytes(&self) -> usize {
        self.touched_words() * WORD_BYTES
    }

    pub(crate) fn check_range(&self, pc: usize, addr: usize, words: usize) -> Result<()> {
        if addr + words > DATA_WORDS {
            return Err(Error::AddressOutOfRange {
                pc,
                start: addr,
                end: addr + words,
            });
        }
        Ok(())
    }

    pub(crate) fn read(&mut self, addr: usize) -> u64 {
        self.touched[addr] = true;
        self.words[addr]
    }

    pub(crate) fn write(&mut self, addr: usize, value: u64) {
        self.touched[addr] = true;
        self.words[addr] = value;
    }

    /// Host-side load through the serial interface. `bytes` must be a whole
    /// number of words.
    pub fn load_bytes(&mut self, addr: usize, bytes: &[u8]) -> Result<()> {
        if !bytes.len().is_multiple_of(WORD_BYTES) {
            return Err(Error::BadLength {
                what: "memory image",
                expected: bytes.len().next_multiple_of(WORD_BYTES),
                actual: bytes.len(),
            });
        }
        self.check_range(usize::MAX, addr, bytes.len() / WORD_BYTES)?;
        for (i, chunk) in bytes.chunks_exact(WORD_BYTES).enumerate() {
            self.write(addr + i, u64::from_le_bytes(chunk.try_into().expect("8 bytes")));
        }
        Ok(())
    }

    /// Host-side read-back that does not count as an access.
    pub fn dump_bytes(&self, addr: usize, words: usize) -> Result<Vec<u8>> {
        self.check_range(usize::MAX, addr, words)?;
        Ok(self.words[addr..addr + words]
            .iter()
            .flat_map(|w| w.to_le_bytes())
            .collect())
    }
}

/// Per-cycle port bookkeeping. Accesses must arrive in non-decreasing cycle
/// order and at most [`PORTS`] per cycle.
#[derive(Debug, Clone, Default)]
pub struct PortTracker {
    cycle: u64,
    used: u8,
    max_used: u8,
}

impl PortTracker {
    pub fn access(&mut self, pc: usize, cycle: u64) -> Result<()> {
        if cycle < self.cycle {
            return Err(Error::PortConflict { pc, cycle });
        }
        if cycle > self.cycle {
            self.cycle = cycle;
            self.used = 0;
        }
        self.used += 1;
        if self.used > PORTS {
            return Err(Error::PortConflict { pc, cycle });
        }
        self.max_used = self.max_used.max(self.used);
        Ok(())
    }

    /// Largest number of accesses seen in one cycle.
    pub fn max_per_cycle(&self) -> u8 {
        self.max_used
    }
}
