//! Seed expansion: SHAKE-128 for the public matrix and the secrets, SHA3 for
//! the transform hashes, and the centered binomial sampler.

use sha3::digest::{Digest, ExtendableOutput, Update, XofReader};
use sha3::{Sha3_256, Sha3_512, Shake128};

use crate::error::{Error, Result};
use crate::params::{SaberParams, SEED_BYTES};
use crate::poly::{packed_len, unpack, PolyMatrix, PolyVec, Poly256, N};

/// 32-byte seed.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Seed(pub [u8; SEED_BYTES]);

impl std::fmt::Debug for Seed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("Seed(..)")
    }
}

impl Seed {
    pub fn from_slice(bytes: &[u8]) -> Result<Self> {
        let arr = bytes.try_into().map_err(|_| Error::BadLength {
            what: "seed",
            expected: SEED_BYTES,
            actual: bytes.len(),
        })?;
        Ok(Self(arr))
    }

    pub fn as_bytes(&self) -> &[u8; SEED_BYTES] {
        &self.0
    }
}

/// SHAKE-128 of `seed || domain_sep`, squeezed to `out_len` bytes.
pub fn xof_expand(seed: &[u8], domain_sep: &[u8], out_len: usize) -> Vec<u8> {
    let mut xof = Shake128::default();
    xof.update(seed);
    xof.update(domain_sep);
    let mut out = vec![0u8; out_len];
    xof.finalize_xof().read(&mut out);
    out
}

/// SHA3-512.
pub fn hash_g(bytes: &[u8]) -> [u8; 64] {
    Sha3_512::digest(bytes).into()
}

/// SHA3-256.
pub fn hash_h(bytes: &[u8]) -> [u8; 32] {
    Sha3_256::digest(bytes).into()
}

/// Public matrix: the XOF stream unpacked 13 bits at a time, row-major.
pub fn gen_matrix(seed: &Seed, params: &SaberParams) -> PolyMatrix {
    let stream = xof_expand(&seed.0, &[], params.matrix_bytes());
    let entries = stream
        .chunks_exact(packed_len(params.eq))
        .map(|chunk| unpack(chunk, params.eq).expect("chunk length is exact"))
        .collect();
    PolyMatrix::new(params.l, entries).expect("l*l entries")
}

/// Centered binomial sample: coefficient `i` is `popcount(lo) - popcount(hi)`
/// of the `i`-th `mu`-bit group of `buf` (little-endian bit order), where
/// `lo` and `hi` are its two `mu/2`-bit halves. The result is a width-16
/// two's-complement polynomial.
pub fn cbd_sample(buf: &[u8], mu: u32) -> Result<Poly256> {
    if mu == 0 || mu % 2 == 1 || mu > 16 {
        return Err(Error::InvalidConfig(format!("binomial parameter {mu}")));
    }
    let expected = N * mu as usize / 8;
    if buf.len() != expected {
        return Err(Error::BadLength {
            what: "binomial sampler input",
            expected,
            actual: buf.len(),
        });
    }
    let half = mu / 2;
    let half_mask = (1u32 << half) - 1;
    let mut coeffs = [0i16; N];
    let mut acc = 0u64;
    let mut filled = 0u32;
    let mut bytes = buf.iter();
    for c in coeffs.iter_mut() {
        while filled < mu {
            acc |= u64::from(*bytes.next().expect("length checked")) << filled;
            filled += 8;
        }
        let lo = (acc as u32 & half_mask).count_ones() as i16;
        let hi = ((acc >> half) as u32 & half_mask).count_ones() as i16;
        *c = lo - hi;
        acc >>= mu;
        filled -= mu;
    }
    Poly256::from_signed(&coeffs, 16)
}

/// Secret vector: `l` binomial polynomials from one XOF stream, polynomial 0
/// first.
pub fn gen_secret(seed: &Seed, params: &SaberParams) -> PolyVec {
    let stream = xof_expand(&seed.0, &[], params.secret_bytes());
    stream
        .chunks_exact(params.secret_bytes() / params.l)
        .map(|chunk| cbd_sample(chunk, params.mu).expect("chunk length is exact"))
        .collect()
}
