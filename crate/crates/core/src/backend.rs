//! Interchangeable polynomial multipliers.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::poly::{PolyMatrix, PolyVec, Poly256, N};
use crate::toomcook::{self, POINTS, POINT_MUL_MACS};

/// Which multiplier the KEM uses. Both produce identical results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Backend {
    /// Quadratic reference product.
    Schoolbook,
    /// Striding Toom-Cook-4 with lazy interpolation.
    #[default]
    ToomCook,
}

impl Backend {
    pub fn inner_product(self, a: &PolyVec, b: &PolyVec, out_width: u32) -> Result<Poly256> {
        match self {
            Backend::ToomCook => toomcook::inner_product(a, b, out_width),
            Backend::Schoolbook => {
                if a.rank() != b.rank() {
                    return Err(Error::RankMismatch(a.rank(), b.rank()));
                }
                let mut acc = Poly256::zero(out_width)?;
                for (ai, bi) in a.iter().zip(b.iter()) {
                    acc = acc.add(&ai.mul_schoolbook(bi, out_width)?)?;
                }
                Ok(acc)
            }
        }
    }

    pub fn matrix_vector_mul(
        self,
        m: &PolyMatrix,
        s: &PolyVec,
        transpose: bool,
        out_width: u32,
    ) -> Result<PolyVec> {
        match self {
            Backend::ToomCook => toomcook::matrix_vector_mul(m, s, transpose, out_width),
            Backend::Schoolbook => {
                if m.rank() != s.rank() {
                    return Err(Error::ShapeMismatch {
                        matrix: m.rank(),
                        vector: s.rank(),
                    });
                }
                (0..m.rank())
                    .map(|i| self.inner_product(&m.line(i, transpose), s, out_width))
                    .collect()
            }
        }
    }

    /// Coefficient multiplications spent on one inner product of rank `l`.
    pub fn coefficient_multiplies(self, l: usize) -> u64 {
        let per_product = match self {
            Backend::Schoolbook => (N * N) as u64,
            Backend::ToomCook => POINTS as u64 * POINT_MUL_MACS as u64,
        };
        per_product * l as u64
    }

    pub fn name(self) -> &'static str {
        match self {
            Backend::Schoolbook => "schoolbook",
            Backend::ToomCook => "toomcook",
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Backend {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "schoolbook" => Ok(Backend::Schoolbook),
            "toomcook" | "toom-cook" => Ok(Backend::ToomCook),
            _ => Err(Error::Parse {
                line: 0,
                reason: format!("unknown backend {s:?}"),
            }),
        }
    }
}
