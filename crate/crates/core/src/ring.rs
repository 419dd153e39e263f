//! Fixed-width modular arithmetic over `Z / 2^k`.
//!
//! Every coefficient in the crate is a `u16` holding a canonical residue in
//! `[0, 2^k)`. Small signed values (binomial secrets) are stored as their
//! two's-complement residue, so negation is complement-and-increment within
//! the width.

use crate::error::{Error, Result};

/// Widest word the multiplier works with.
pub const WORD_BITS: u32 = 16;

/// Mask selecting the low `width` bits.
#[inline]
pub const fn mask(width: u32) -> u16 {
    if width >= 16 {
        u16::MAX
    } else {
        (1u16 << width) - 1
    }
}

pub(crate) fn check_width(width: u32) -> Result<u32> {
    if (1..=WORD_BITS).contains(&width) {
        Ok(width)
    } else {
        Err(Error::InvalidWidth(width))
    }
}

#[inline]
pub fn add_mod(a: u16, b: u16, width: u32) -> u16 {
    a.wrapping_add(b) & mask(width)
}

#[inline]
pub fn sub_mod(a: u16, b: u16, width: u32) -> u16 {
    a.wrapping_sub(b) & mask(width)
}

#[inline]
pub fn neg_mod(a: u16, width: u32) -> u16 {
    0u16.wrapping_sub(a) & mask(width)
}

#[inline]
pub fn mul_mod(a: u16, b: u16, width: u32) -> u16 {
    a.wrapping_mul(b) & mask(width)
}

/// Sign-extends the low `width` bits of `x` to a full 16-bit word.
#[inline]
pub fn sign_extend(x: u16, width: u32) -> u16 {
    let shift = WORD_BITS - width;
    (((x << shift) as i16) >> shift) as u16
}

/// LWR rounding: `((x + addend) mod 2^from_bits) >> (from_bits - to_bits)`.
///
/// With `addend = 2^(from - to - 1)` this is round-to-nearest of `x * 2^to / 2^from`.
pub fn round_shift(x: u16, from_bits: u32, to_bits: u32, addend: u16) -> Result<u16> {
    check_width(from_bits)?;
    if to_bits == 0 || from_bits <= to_bits {
        return Err(Error::RoundingWidths {
            from: from_bits,
            to: to_bits,
        });
    }
    Ok(add_mod(x, addend, from_bits) >> (from_bits - to_bits))
}

/// A residue tagged with its modulus width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModWord {
    value: u16,
    width: u8,
}

// Fallible arithmetic (widths must match), so the operator traits do not fit.
#[allow(clippy::should_implement_trait)]
impl ModWord {
    /// Reduces `value` into `[0, 2^width)`.
    pub fn new(value: u16, width: u32) -> Result<Self> {
        check_width(width)?;
        Ok(Self {
            value: value & mask(width),
            width: width as u8,
        })
    }

    /// Two's-complement residue of a small signed integer.
    pub fn from_signed(value: i16, width: u32) -> Result<Self> {
        Self::new(value as u16, width)
    }

    pub fn value(self) -> u16 {
        self.value
    }

    pub fn width(self) -> u32 {
        self.width as u32
    }

    /// The residue interpreted in `[-2^(width-1), 2^(width-1))`.
    pub fn signed(self) -> i16 {
        sign_extend(self.value, self.width()) as i16
    }

    fn same_width(self, other: Self) -> Result<u32> {
        if self.width != other.width {
            return Err(Error::WidthMismatch(self.width(), other.width()));
        }
        Ok(self.width())
    }

    pub fn add(self, other: Self) -> Result<Self> {
        let w = self.same_width(other)?;
        Ok(Self {
            value: add_mod(self.value, other.value, w),
            width: self.width,
        })
    }

    pub fn mul(self, other: Self) -> Result<Self> {
        let w = self.same_width(other)?;
        Ok(Self {
            value: mul_mod(self.value, other.value, w),
            width: self.width,
        })
    }

    pub fn neg(self) -> Self {
        Self {
            value: neg_mod(self.value, self.width()),
            width: self.width,
        }
    }

    pub fn round(self, to_bits: u32, addend: u16) -> Result<Self> {
        let value = round_shift(self.value, self.width(), to_bits, addend)?;
        Self::new(value, to_bits)
    }
}
