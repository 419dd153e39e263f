//! Instruction-level model of the co-processor: a 24-bit ISA, an 8 KB
//! dual-port data memory, an array of point multipliers with local memory,
//! and cycle and byte accounting.

pub mod config;
pub mod exec;
pub mod isa;
pub mod memory;
pub mod programs;
pub mod report;

pub use config::{CostTable, MultiplierConfig};
pub use exec::{run_program, Machine};
pub use isa::{decode_instr, encode_instr, format_program, parse_program, Instruction, Opcode};
pub use memory::{DataMemory, DATA_BYTES, DATA_WORDS};
pub use programs::{footprint_report, model_kem, KemOp, Layout, Simulator};
pub use report::{CycleReport, Footprint, Phase};
