//! Polynomials of `Z_{2^k}[x] / (x^256 + 1)`, the negacyclic schoolbook
//! reference product, and little-endian bit packing.

use std::ops::Index;

use crate::error::{Error, Result};
use crate::ring::{self, mask};

/// Ring degree.
pub const N: usize = 256;

/// Bit widths accepted by [`pack`] and [`unpack`].
pub const PACK_WIDTHS: [u32; 7] = [1, 3, 4, 6, 10, 13, 16];

/// A degree-<256 polynomial whose coefficients are residues mod `2^width`.
#[derive(Clone, PartialEq, Eq)]
pub struct Poly256 {
    coeffs: [u16; N],
    width: u8,
}

impl std::fmt::Debug for Poly256 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Poly256")
            .field("width", &self.width)
            .field("coeffs", &&self.coeffs[..8])
            .finish_non_exhaustive()
    }
}

impl Poly256 {
    pub fn zero(width: u32) -> Result<Self> {
        ring::check_width(width)?;
        Ok(Self {
            coeffs: [0; N],
            width: width as u8,
        })
    }

    /// Builds a polynomial, reducing every coefficient into range.
    pub fn from_coeffs(mut coeffs: [u16; N], width: u32) -> Result<Self> {
        ring::check_width(width)?;
        let m = mask(width);
        coeffs.iter_mut().for_each(|c| *c &= m);
        Ok(Self {
            coeffs,
            width: width as u8,
        })
    }

    /// Two's-complement embedding of small signed coefficients.
    pub fn from_signed(values: &[i16; N], width: u32) -> Result<Self> {
        Self::from_coeffs(values.map(|v| v as u16), width)
    }

    /// `x^k` (negated when `k >= 256`, reduced mod `x^256 + 1`).
    pub fn monomial(k: usize, width: u32) -> Result<Self> {
        let mut p = Self::zero(width)?;
        let sign_flip = (k / N) % 2 == 1;
        p.coeffs[k % N] = if sign_flip { mask(width) } else { 1 };
        Ok(p)
    }

    pub fn one(width: u32) -> Result<Self> {
        Self::monomial(0, width)
    }

    pub fn coeffs(&self) -> &[u16; N] {
        &self.coeffs
    }

    pub fn width(&self) -> u32 {
        self.width as u32
    }

    /// Coefficients read as signed values in `[-2^(w-1), 2^(w-1))`.
    pub fn signed_coeffs(&self) -> [i16; N] {
        self.coeffs
            .map(|c| ring::sign_extend(c, self.width()) as i16)
    }

    /// Re-reads the residues at a narrower or wider modulus. Widening
    /// zero-extends; use [`Poly256::sign_extend_to`] for signed values.
    pub fn reduce_to(&self, width: u32) -> Result<Self> {
        Self::from_coeffs(self.coeffs, width)
    }

    pub fn sign_extend_to(&self, width: u32) -> Result<Self> {
        let w = self.width();
        Self::from_coeffs(self.coeffs.map(|c| ring::sign_extend(c, w)), width)
    }

    fn same_width(&self, other: &Self) -> Result<u32> {
        if self.width != other.width {
            return Err(Error::WidthMismatch(self.width(), other.width()));
        }
        Ok(self.width())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let w = self.same_width(other)?;
        let mut out = self.clone();
        for (c, &o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c = ring::add_mod(*c, o, w);
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        let w = self.same_width(other)?;
        let mut out = self.clone();
        for (c, &o) in out.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *c = ring::sub_mod(*c, o, w);
        }
        Ok(out)
    }

    /// Adds `value` to every coefficient.
    pub fn add_constant(&self, value: u16) -> Self {
        let w = self.width();
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c = ring::add_mod(*c, value, w));
        out
    }

    /// Multiplies every coefficient by `2^shift`.
    pub fn shl(&self, shift: u32) -> Self {
        let w = self.width();
        let mut out = self.clone();
        out.coeffs
            .iter_mut()
            .for_each(|c| *c = ((*c as u32) << shift) as u16 & mask(w));
        out
    }

    /// Reference negacyclic product at the given output width.
    pub fn mul_schoolbook(&self, other: &Self, width: u32) -> Result<Self> {
        let c = schoolbook_negacyclic(&self.coeffs, &other.coeffs, width)?;
        let mut coeffs = [0u16; N];
        coeffs.copy_from_slice(&c);
        Self::from_coeffs(coeffs, width)
    }
}

impl Index<usize> for Poly256 {
    type Output = u16;

    fn index(&self, i: usize) -> &u16 {
        &self.coeffs[i]
    }
}

/// `c = a * b mod (x^n + 1, 2^width)` by the quadratic definition.
///
/// This is the semantics every faster multiplier in the crate is tested
/// against.
pub fn schoolbook_negacyclic(a: &[u16], b: &[u16], width: u32) -> Result<Vec<u16>> {
    ring::check_width(width)?;
    if a.len() != b.len() {
        return Err(Error::RankMismatch(a.len(), b.len()));
    }
    let n = a.len();
    let mut c = vec![0u16; n];
    for (i, &ai) in a.iter().enumerate() {
        for (j, &bj) in b.iter().enumerate() {
            let prod = ai.wrapping_mul(bj);
            let k = i + j;
            if k < n {
                c[k] = c[k].wrapping_add(prod);
            } else {
                c[k - n] = c[k - n].wrapping_sub(prod);
            }
        }
    }
    let m = mask(width);
    c.iter_mut().for_each(|x| *x &= m);
    Ok(c)
}

/// Coefficient-wise [`ring::round_shift`].
pub fn poly_round(a: &Poly256, from_bits: u32, to_bits: u32, addend: u16) -> Result<Poly256> {
    let mut coeffs = [0u16; N];
    for (dst, &c) in coeffs.iter_mut().zip(a.coeffs.iter()) {
        *dst = ring::round_shift(c & mask(from_bits), from_bits, to_bits, addend)?;
    }
    Poly256::from_coeffs(coeffs, to_bits)
}

/// Number of bytes a packed polynomial occupies.
pub const fn packed_len(bits: u32) -> usize {
    N * bits as usize / 8
}

fn check_pack_width(bits: u32) -> Result<()> {
    if PACK_WIDTHS.contains(&bits) {
        Ok(())
    } else {
        Err(Error::UnsupportedPacking(bits))
    }
}

/// Little-endian bit packing: coefficient 0 lands in the low bits of byte 0.
/// Coefficients are truncated to `bits`.
pub fn pack(a: &Poly256, bits: u32) -> Result<Vec<u8>> {
    check_pack_width(bits)?;
    let mut out = Vec::with_capacity(packed_len(bits));
    let m = mask(bits) as u32;
    let mut acc = 0u32;
    let mut filled = 0u32;
    for &c in a.coeffs.iter() {
        acc |= (c as u32 & m) << filled;
        filled += bits;
        while filled >= 8 {
            out.push(acc as u8);
            acc >>= 8;
            filled -= 8;
        }
    }
    debug_assert_eq!(filled, 0);
    Ok(out)
}

/// Inverse of [`pack`]; the result has width `bits`.
pub fn unpack(bytes: &[u8], bits: u32) -> Result<Poly256> {
    check_pack_width(bits)?;
    if bytes.len() != packed_len(bits) {
        return Err(Error::BadLength {
            what: "packed polynomial",
            expected: packed_len(bits),
            actual: bytes.len(),
        });
    }
    let m = mask(bits) as u32;
    let mut coeffs = [0u16; N];
    let mut acc = 0u32;
    let mut filled = 0u32;
    let mut src = bytes.iter();
    for c in coeffs.iter_mut() {
        while filled < bits {
            acc |= (*src.next().expect("length checked") as u32) << filled;
            filled += 8;
        }
        *c = (acc & m) as u16;
        acc >>= bits;
        filled -= bits;
    }
    Poly256::from_coeffs(coeffs, bits)
}

/// A vector of `l` polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyVec(Vec<Poly256>);

impl PolyVec {
    pub fn new(entries: Vec<Poly256>) -> Self {
        Self(entries)
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[Poly256] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Poly256> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Poly256> {
        self.0
    }

    pub fn pack(&self, bits: u32) -> Result<Vec<u8>> {
        let mut out = Vec::with_capacity(self.rank() * packed_len(bits));
        for p in &self.0 {
            out.extend(pack(p, bits)?);
        }
        Ok(out)
    }

    pub fn unpack(bytes: &[u8], rank: usize, bits: u32) -> Result<Self> {
        check_pack_width(bits)?;
        let len = packed_len(bits);
        if bytes.len() != rank * len {
            return Err(Error::BadLength {
                what: "packed polynomial vector",
                expected: rank * len,
                actual: bytes.len(),
            });
        }
        bytes
            .chunks_exact(len)
            .map(|chunk| unpack(chunk, bits))
            .collect::<Result<Vec<_>>>()
            .map(Self)
    }
}

impl Index<usize> for PolyVec {
    type Output = Poly256;

    fn index(&self, i: usize) -> &Poly256 {
        &self.0[i]
    }
}

impl FromIterator<Poly256> for PolyVec {
    fn from_iter<I: IntoIterator<Item = Poly256>>(iter: I) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// Row-major `rank x rank` matrix of polynomials.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PolyMatrix {
    rank: usize,
    entries: Vec<Poly256>,
}

impl PolyMatrix {
    pub fn new(rank: usize, entries: Vec<Poly256>) -> Result<Self> {
        if entries.len() != rank * rank {
            return Err(Error::ShapeMismatch {
                matrix: rank,
                vector: entries.len(),
            });
        }
        Ok(Self { rank, entries })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn get(&self, row: usize, col: usize) -> &Poly256 {
        &self.entries[row * self.rank + col]
    }

    /// Row `i` of the matrix, or column `i` when `transpose` is set.
    pub fn line(&self, i: usize, transpose: bool) -> PolyVec {
        (0..self.rank)
            .map(|j| {
                if transpose {
                    self.get(j, i).clone()
                } else {
                    self.get(i, j).clone()
                }
            })
            .collect()
    }
}
