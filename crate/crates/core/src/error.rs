use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("bit width {0} is outside 1..=16")]
    InvalidWidth(u32),
    #[error("rounding requires from_bits > to_bits (got {from} -> {to})")]
    RoundingWidths { from: u32, to: u32 },
    #[error("operand widths differ: {0} vs {1}")]
    WidthMismatch(u32, u32),
    #[error("{what} should be {expected} bytes long, not {actual}")]
    BadLength {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("unsupported packing width {0}")]
    UnsupportedPacking(u32),
    #[error("vector ranks differ: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("matrix of rank {matrix} cannot multiply a vector of rank {vector}")]
    ShapeMismatch { matrix: usize, vector: usize },
    #[error("output width {0} exceeds the 13 bits the Toom-Cook engine keeps exact")]
    OutputTooWide(u32),
    #[error("invalid opcode {0}")]
    InvalidOpcode(u8),
    #[error("field value {value} does not fit in {bits} bits")]
    FieldOverflow { value: u32, bits: u32 },
    #[error("instruction word {0:#x} is wider than 24 bits")]
    WordTooWide(u32),
    #[error("instruction {pc}: address range {start}..{end} exceeds data memory")]
    AddressOutOfRange { pc: usize, start: usize, end: usize },
    #[error("instruction {pc}: more than two data-memory accesses in cycle {cycle}")]
    PortConflict { pc: usize, cycle: u64 },
    #[error("instruction {pc}: {reason}")]
    BadOperand { pc: usize, reason: String },
    #[error("invalid multiplier configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
