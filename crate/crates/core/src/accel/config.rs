use serde::Serialize;

use crate::error::{Error, Result};
use crate::toomcook::{PART_LEN, POINTS, POINT_MUL_MACS};

/// Bytes of one 64 x 16-bit operand or accumulator in a point unit.
pub const WIDE_POLY_BYTES: usize = PART_LEN * 2;
/// Bytes of one 64 x 8-bit small operand.
pub const NARROW_POLY_BYTES: usize = PART_LEN;

/// Shape of the point-multiplier array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MultiplierConfig {
    /// Parallel point multipliers, 1 through 7.
    pub num_point_units: usize,
    /// Multiply-accumulate units inside each point multiplier.
    pub macs_per_unit: usize,
    /// Keep the evaluated small operands of a whole vector in the units so a
    /// matrix-vector product evaluates each of them once instead of once per
    /// row.
    pub cache_secret_eval: bool,
}

impl Default for MultiplierConfig {
    fn default() -> Self {
        Self {
            num_point_units: POINTS,
            macs_per_unit: 4,
            cache_secret_eval: false,
        }
    }
}

impl MultiplierConfig {
    pub fn new(num_point_units: usize, macs_per_unit: usize) -> Result<Self> {
        let cfg = Self {
            num_point_units,
            macs_per_unit,
            ..Self::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=POINTS).contains(&self.num_point_units) {
            return Err(Error::InvalidConfig(format!(
                "num_point_units must be in 1..=7, got {}",
                self.num_point_units
            )));
        }
        if self.macs_per_unit == 0 {
            return Err(Error::InvalidConfig("macs_per_unit must be at least 1".into()));
        }
        Ok(())
    }

    /// Evaluation points each unit serves in turn.
    pub fn points_per_unit(&self) -> usize {
        POINTS.div_ceil(self.num_point_units)
    }

    /// Small-operand slots per evaluation point.
    pub fn secret_banks(&self, l: usize) -> usize {
        if self.cache_secret_eval {
            l
        } else {
            1
        }
    }

    /// Local memory of one unit: for every point it serves, the wide operand
    /// A, the accumulator C and the narrow operand(s) B.
    pub fn local_mem_bytes_per_unit(&self, l: usize) -> usize {
        self.points_per_unit()
            * (2 * WIDE_POLY_BYTES + NARROW_POLY_BYTES * self.secret_banks(l))
    }

    pub fn local_mem_bytes(&self, l: usize) -> usize {
        self.num_point_units * self.local_mem_bytes_per_unit(l)
    }

    /// Cycles for one pointwise step (all seven products).
    pub fn point_mul_cycles(&self) -> u64 {
        self.points_per_unit() as u64 * (POINT_MUL_MACS as u64).div_ceil(self.macs_per_unit as u64)
    }
}

/// Cycle costs of the model, kept in one place so they can be recalibrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CostTable {
    /// One 64-coefficient add, subtract, shift or constant multiply: four
    /// 16-bit lanes of the 64-bit datapath.
    pub vector_op: u64,
    /// One Keccak-f[1600] permutation.
    pub permutation: u64,
    /// Recombining the seven interpolated parts into 256 coefficients and
    /// rounding them, four lanes wide.
    pub recombine: u64,
    /// Unpacking one 64-bit word of XOF output into coefficients.
    pub unpack_word: u64,
}

impl Default for CostTable {
    fn default() -> Self {
        Self {
            vector_op: 16,
            permutation: 24,
            recombine: 64,
            unpack_word: 1,
        }
    }
}

/// Keccak rates in bytes.
pub const SHAKE128_RATE: usize = 168;
pub const SHA3_256_RATE: usize = 136;
pub const SHA3_512_RATE: usize = 72;

/// Permutations to absorb `len` message bytes and pad.
pub fn absorb_permutations(len: usize, rate: usize) -> u64 {
    (len / rate + 1) as u64
}

/// Permutations to squeeze `len` bytes (the first block comes from the
/// absorb permutation).
pub fn squeeze_permutations(len: usize, rate: usize) -> u64 {
    len.div_ceil(rate).saturating_sub(1) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_local_memory_is_320_bytes() {
        let cfg = MultiplierConfig::default();
        assert_eq!(cfg.local_mem_bytes_per_unit(3), 64 * 2 + 64 * 2 + 64);
        assert_eq!(cfg.local_mem_bytes(3), 7 * 320);
    }

    #[test]
    fn point_mul_cost() {
        assert_eq!(MultiplierConfig::default().point_mul_cycles(), 1024);
        let one = MultiplierConfig::new(1, 4).unwrap();
        assert_eq!(one.point_mul_cycles(), 7 * 1024);
        let four = MultiplierConfig::new(4, 4).unwrap();
        assert_eq!(four.point_mul_cycles(), 2 * 1024);
        assert_eq!(MultiplierConfig::new(7, 1).unwrap().point_mul_cycles(), 4096);
    }

    #[test]
    fn invalid_configs() {
        assert!(MultiplierConfig::new(0, 4).is_err());
        assert!(MultiplierConfig::new(8, 4).is_err());
        assert!(MultiplierConfig::new(7, 0).is_err());
    }

    #[test]
    fn keccak_block_counts() {
        assert_eq!(absorb_permutations(32, SHA3_256_RATE), 1);
        assert_eq!(absorb_permutations(136, SHA3_256_RATE), 2);
        assert_eq!(squeeze_permutations(168, SHAKE128_RATE), 0);
        assert_eq!(squeeze_permutations(169, SHAKE128_RATE), 1);
    }
}
