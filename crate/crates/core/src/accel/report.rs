//! Cycle and footprint reports, as key/value text or JSON.

use std::fmt::Write as _;

use serde::Serialize;

/// Phases cycles are attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Sample,
    MatrixGen,
    Evaluate,
    PointMul,
    Interpolate,
    Recombine,
    Hash,
    Pack,
}

impl Phase {
    pub const ALL: [Phase; 8] = [
        Phase::Sample,
        Phase::MatrixGen,
        Phase::Evaluate,
        Phase::PointMul,
        Phase::Interpolate,
        Phase::Recombine,
        Phase::Hash,
        Phase::Pack,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Phase::Sample => "sample",
            Phase::MatrixGen => "matrix_gen",
            Phase::Evaluate => "evaluate",
            Phase::PointMul => "point_mul",
            Phase::Interpolate => "interpolate",
            Phase::Recombine => "recombine",
            Phase::Hash => "hash",
            Phase::Pack => "pack",
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PhaseCycles {
    pub sample: u64,
    pub matrix_gen: u64,
    pub evaluate: u64,
    pub point_mul: u64,
    pub interpolate: u64,
    pub recombine: u64,
    pub hash: u64,
    pub pack: u64,
}

impl PhaseCycles {
    pub fn get(&self, phase: Phase) -> u64 {
        match phase {
            Phase::Sample => self.sample,
            Phase::MatrixGen => self.matrix_gen,
            Phase::Evaluate => self.evaluate,
            Phase::PointMul => self.point_mul,
            Phase::Interpolate => self.interpolate,
            Phase::Recombine => self.recombine,
            Phase::Hash => self.hash,
            Phase::Pack => self.pack,
        }
    }

    pub fn add(&mut self, phase: Phase, cycles: u64) {
        let slot = match phase {
            Phase::Sample => &mut self.sample,
            Phase::MatrixGen => &mut self.matrix_gen,
            Phase::Evaluate => &mut self.evaluate,
            Phase::PointMul => &mut self.point_mul,
            Phase::Interpolate => &mut self.interpolate,
            Phase::Recombine => &mut self.recombine,
            Phase::Hash => &mut self.hash,
            Phase::Pack => &mut self.pack,
        };
        *slot += cycles;
    }

    pub fn sum(&self) -> u64 {
        Phase::ALL.iter().map(|&p| self.get(p)).sum()
    }
}

/// Default clock for derived times.
pub const DEFAULT_CLOCK_MHZ: f64 = 160.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CycleReport {
    pub label: String,
    pub phases: PhaseCycles,
    pub total_cycles: u64,
    pub instructions: u64,
    pub peak_data_mem_bytes: usize,
    pub peak_local_mem_bytes: usize,
    pub clock_mhz: f64,
    pub time_us: f64,
}

impl Default for CycleReport {
    fn default() -> Self {
        Self {
            label: String::new(),
            phases: PhaseCycles::default(),
            total_cycles: 0,
            instructions: 0,
            peak_data_mem_bytes: 0,
            peak_local_mem_bytes: 0,
            clock_mhz: DEFAULT_CLOCK_MHZ,
            time_us: 0.0,
        }
    }
}

impl CycleReport {
    pub(crate) fn charge(&mut self, phase: Phase, cycles: u64) {
        self.phases.add(phase, cycles);
        self.total_cycles += cycles;
        self.time_us = self.total_cycles as f64 / self.clock_mhz;
    }

    /// Re-derives the time at another clock.
    pub fn with_clock(mut self, clock_mhz: f64) -> Self {
        self.clock_mhz = clock_mhz;
        self.time_us = self.total_cycles as f64 / clock_mhz;
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// One `key = value` line per metric.
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        if !self.label.is_empty() {
            writeln!(out, "label = {}", self.label).unwrap();
        }
        for phase in Phase::ALL {
            writeln!(out, "cycles.{} = {}", phase.key(), self.phases.get(phase)).unwrap();
        }
        writeln!(out, "total_cycles = {}", self.total_cycles).unwrap();
        writeln!(out, "instructions = {}", self.instructions).unwrap();
        writeln!(out, "peak_data_mem_bytes = {}", self.peak_data_mem_bytes).unwrap();
        writeln!(out, "peak_local_mem_bytes = {}", self.peak_local_mem_bytes).unwrap();
        writeln!(out, "clock_mhz = {}", self.clock_mhz).unwrap();
        writeln!(out, "time_us = {:.3}", self.time_us).unwrap();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FootprintItem {
    pub name: String,
    pub bytes: usize,
}

/// Static byte accounting of the modeled storage.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Footprint {
    /// Data-memory regions used by the KEM programs.
    pub data_regions: Vec<FootprintItem>,
    pub data_bytes: usize,
    pub num_point_units: usize,
    pub local_bytes_per_unit: usize,
    pub local_bytes: usize,
    /// Data memory plus point-unit local memory.
    pub total_bytes: usize,
    /// Longest canned program at 3 bytes per instruction.
    pub program_bytes: usize,
    pub total_with_program_bytes: usize,
    /// Coefficients stored per point product.
    pub point_product_coeffs: usize,
    /// Coefficients a non-negacyclic split would need per point product.
    pub unreduced_point_product_coeffs: usize,
}

impl Footprint {
    pub fn to_kv_text(&self) -> String {
        let mut out = String::new();
        for item in &self.data_regions {
            writeln!(out, "data.{} = {}", item.name, item.bytes).unwrap();
        }
        writeln!(out, "data_bytes = {}", self.data_bytes).unwrap();
        writeln!(out, "num_point_units = {}", self.num_point_units).unwrap();
        writeln!(out, "local_bytes_per_unit = {}", self.local_bytes_per_unit).unwrap();
        writeln!(out, "local_bytes = {}", self.local_bytes).unwrap();
        writeln!(out, "total_bytes = {}", self.total_bytes).unwrap();
        writeln!(out, "program_bytes = {}", self.program_bytes).unwrap();
        writeln!(out, "total_with_program_bytes = {}", self.total_with_program_bytes).unwrap();
        writeln!(out, "point_product_coeffs = {}", self.point_product_coeffs).unwrap();
        writeln!(
            out,
            "unreduced_point_product_coeffs = {}",
            self.unreduced_point_product_coeffs
        )
        .unwrap();
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}
