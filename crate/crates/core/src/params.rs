//! The three Saber parameter sets.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::Error;
use crate::poly::packed_len;

/// Bytes in a seed, hash-derived key, or shared secret.
pub const SEED_BYTES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ParamSet {
    LightSaber,
    Saber,
    FireSaber,
}

/// Module rank, moduli exponents and binomial parameter of one Saber variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct SaberParams {
    pub name: ParamSet,
    /// Module rank.
    pub l: usize,
    /// `q = 2^eq`.
    pub eq: u32,
    /// `p = 2^ep`.
    pub ep: u32,
    /// `T = 2^et`.
    pub et: u32,
    /// Binomial parameter; secrets lie in `[-mu/2, mu/2]`.
    pub mu: u32,
}

impl SaberParams {
    pub const LIGHTSABER: Self = Self::new(ParamSet::LightSaber, 2, 3, 10);
    pub const SABER: Self = Self::new(ParamSet::Saber, 3, 4, 8);
    pub const FIRESABER: Self = Self::new(ParamSet::FireSaber, 4, 6, 6);
    pub const ALL: [Self; 3] = [Self::LIGHTSABER, Self::SABER, Self::FIRESABER];

    const fn new(name: ParamSet, l: usize, et: u32, mu: u32) -> Self {
        Self {
            name,
            l,
            eq: 13,
            ep: 10,
            et,
            mu,
        }
    }

    /// Rounding constant for `q -> p` and for the message term.
    pub const fn h1(&self) -> u16 {
        1 << (self.eq - self.ep - 1)
    }

    /// Rounding constant used in decryption.
    pub const fn h2(&self) -> u16 {
        (1 << (self.ep - 2)) - (1 << (self.ep - self.et - 1)) + (1 << (self.eq - self.ep - 1))
    }

    /// Packed `b` vector (`l` polynomials at `ep` bits).
    pub const fn polyvec_p_bytes(&self) -> usize {
        self.l * packed_len(self.ep)
    }

    /// Packed secret vector (`l` polynomials at `eq` bits).
    pub const fn polyvec_q_bytes(&self) -> usize {
        self.l * packed_len(self.eq)
    }

    /// Packed `c_m` polynomial.
    pub const fn cm_bytes(&self) -> usize {
        packed_len(self.et)
    }

    pub const fn public_key_bytes(&self) -> usize {
        SEED_BYTES + self.polyvec_p_bytes()
    }

    pub const fn secret_key_bytes(&self) -> usize {
        self.polyvec_q_bytes() + self.public_key_bytes() + 2 * SEED_BYTES
    }

    pub const fn ciphertext_bytes(&self) -> usize {
        self.polyvec_p_bytes() + self.cm_bytes()
    }

    /// XOF bytes consumed by matrix generation.
    pub const fn matrix_bytes(&self) -> usize {
        self.l * self.l * packed_len(self.eq)
    }

    /// XOF bytes consumed by secret sampling.
    pub const fn secret_bytes(&self) -> usize {
        self.l * 256 * self.mu as usize / 8
    }
}

impl Default for SaberParams {
    fn default() -> Self {
        Self::SABER
    }
}

impl fmt::Display for ParamSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ParamSet::LightSaber => "LightSaber",
            ParamSet::Saber => "Saber",
            ParamSet::FireSaber => "FireSaber",
        })
    }
}

impl fmt::Display for SaberParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.name.fmt(f)
    }
}

impl FromStr for SaberParams {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "lightsaber" | "light" => Ok(Self::LIGHTSABER),
            "saber" => Ok(Self::SABER),
            "firesaber" | "fire" => Ok(Self::FIRESABER),
            _ => Err(Error::Parse {
                line: 0,
                reason: format!("unknown parameter set {s:?}"),
            }),
        }
    }
}
