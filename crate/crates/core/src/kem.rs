//! Saber public-key encryption and the CCA-secure KEM built on it.
//!
//! Byte formats:
//!
//! * public key: `seed_A (32) || pack_10(b)`
//! * secret key: `pack_13(s) || public key || H(public key) || z (32)`
//! * ciphertext: `pack_10(b') || pack_eT(c_m)`
//!
//! All randomness enters as explicit [`Seed`]s.

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::params::{SaberParams, SEED_BYTES};
use crate::poly::{pack, poly_round, unpack, PolyVec, Poly256};
use crate::sampler::{gen_matrix, gen_secret, hash_g, hash_h, Seed};

macro_rules! byte_newtype {
    ($name:ident, $what:literal, $len:ident) => {
        #[derive(Clone, PartialEq, Eq)]
        pub struct $name(Vec<u8>);

        impl $name {
            pub fn from_bytes(params: &SaberParams, bytes: &[u8]) -> Result<Self> {
                check_len($what, params.$len(), bytes)?;
                Ok(Self(bytes.to_vec()))
            }

            pub fn as_bytes(&self) -> &[u8] {
                &self.0
            }

            pub fn into_bytes(self) -> Vec<u8> {
                self.0
            }
        }

        impl std::fmt::Debug for $name {
            fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
                write!(f, concat!(stringify!($name), "({} bytes)"), self.0.len())
            }
        }
    };
}

byte_newtype!(PublicKey, "public key", public_key_bytes);
byte_newtype!(SecretKey, "secret key", secret_key_bytes);
byte_newtype!(Ciphertext, "ciphertext", ciphertext_bytes);

/// 32-byte shared secret.
#[derive(Clone, Copy, PartialEq, Eq)]
pub struct SharedSecret(pub [u8; 32]);

impl std::fmt::Debug for SharedSecret {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SharedSecret(..)")
    }
}

impl SharedSecret {
    pub fn as_bytes(&self) -> &[u8; 32] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyPair {
    pub public_key: PublicKey,
    pub secret_key: SecretKey,
}

/// Randomness consumed by key generation.
#[derive(Debug, Clone, Copy)]
pub struct KeygenSeeds {
    pub seed_a: Seed,
    pub seed_s: Seed,
    /// Implicit-rejection key.
    pub z: Seed,
}

fn check_len(what: &'static str, expected: usize, bytes: &[u8]) -> Result<()> {
    if bytes.len() != expected {
        return Err(Error::BadLength {
            what,
            expected,
            actual: bytes.len(),
        });
    }
    Ok(())
}

/// A Saber instance: a parameter set and a multiplier backend.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Saber {
    params: SaberParams,
    backend: Backend,
}

impl Saber {
    pub fn new(params: SaberParams) -> Self {
        Self {
            params,
            backend: Backend::default(),
        }
    }

    pub fn with_backend(self, backend: Backend) -> Self {
        Self { backend, ..self }
    }

    pub fn params(&self) -> &SaberParams {
        &self.params
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// CPA key generation: `b = round(A^T s + h)`. Returns the public key
    /// bytes and the secret vector.
    pub fn pke_keygen(&self, seed_a: &Seed, seed_s: &Seed) -> Result<(Vec<u8>, PolyVec)> {
        let p = &self.params;
        let a = gen_matrix(seed_a, p);
        let s = gen_secret(seed_s, p);
        let b = self.round_vector(&self.backend.matrix_vector_mul(&a, &s, true, p.eq)?)?;
        let mut pk = seed_a.0.to_vec();
        pk.extend(b.pack(p.ep)?);
        Ok((pk, s))
    }

    fn round_vector(&self, v: &PolyVec) -> Result<PolyVec> {
        let p = &self.params;
        v.iter()
            .map(|x| poly_round(x, p.eq, p.ep, p.h1()))
            .collect()
    }

    pub fn pke_encrypt(&self, pk: &[u8], message: &[u8; 32], seed_r: &Seed) -> Result<Vec<u8>> {
        let p = &self.params;
        check_len("public key", p.public_key_bytes(), pk)?;
        let seed_a = Seed::from_slice(&pk[..SEED_BYTES])?;
        let b = PolyVec::unpack(&pk[SEED_BYTES..], p.l, p.ep)?;

        let a = gen_matrix(&seed_a, p);
        let sp = gen_secret(seed_r, p);
        let bp = self.round_vector(&self.backend.matrix_vector_mul(&a, &sp, false, p.eq)?)?;

        let vp = self.backend.inner_product(&b, &sp, p.ep)?;
        let m = message_poly(message).reduce_to(p.ep)?.shl(p.ep - 1);
        let cm = poly_round(&vp.sub(&m)?, p.ep, p.et, p.h1())?;

        let mut ct = bp.pack(p.ep)?;
        ct.extend(pack(&cm, p.et)?);
        Ok(ct)
    }

    pub fn pke_decrypt(&self, s: &PolyVec, ct: &[u8]) -> Result<[u8; 32]> {
        let p = &self.params;
        check_len("ciphertext", p.ciphertext_bytes(), ct)?;
        if s.rank() != p.l {
            return Err(Error::RankMismatch(s.rank(), p.l));
        }
        let (bp_bytes, cm_bytes) = ct.split_at(p.polyvec_p_bytes());
        let bp = PolyVec::unpack(bp_bytes, p.l, p.ep)?;
        let cm = unpack(cm_bytes, p.et)?.reduce_to(p.ep)?.shl(p.ep - p.et);

        let v = self.backend.inner_product(&bp, s, p.ep)?;
        let m = poly_round(&v.sub(&cm)?, p.ep, 1, p.h2())?;
        let mut out = [0u8; 32];
        out.copy_from_slice(&pack(&m, 1)?);
        Ok(out)
    }

    pub fn keygen(&self, seeds: &KeygenSeeds) -> Result<KeyPair> {
        let p = &self.params;
        let (pk, s) = self.pke_keygen(&seeds.seed_a, &seeds.seed_s)?;
        let mut sk = s.pack(p.eq)?;
        sk.extend_from_slice(&pk);
        sk.extend_from_slice(&hash_h(&pk));
        sk.extend_from_slice(&seeds.z.0);
        Ok(KeyPair {
            public_key: PublicKey(pk),
            secret_key: SecretKey(sk),
        })
    }

    pub fn encaps(&self, pk: &PublicKey, seed: &Seed) -> Result<(Ciphertext, SharedSecret)> {
        let pk = pk.as_bytes();
        let m = hash_h(&seed.0);
        let (k_hat, r) = derive_key_and_coins(&hash_h(pk), &m);
        let ct = self.pke_encrypt(pk, &m, &r)?;
        let ss = shared_secret(&k_hat, &ct);
        Ok((Ciphertext(ct), ss))
    }

    /// Decapsulation with implicit rejection: a ciphertext that does not
    /// re-encrypt identically yields `H(z || ct)` instead of an error.
    pub fn decaps(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<SharedSecret> {
        let p = &self.params;
        let sk = sk.as_bytes();
        let (s_bytes, rest) = sk.split_at(p.polyvec_q_bytes());
        let (pk, rest) = rest.split_at(p.public_key_bytes());
        let (hpk, z) = rest.split_at(SEED_BYTES);

        let s = PolyVec::unpack(s_bytes, p.l, p.eq)?;
        let m = self.pke_decrypt(&s, ct.as_bytes())?;
        let (k_hat, r) = derive_key_and_coins(hpk.try_into().expect("32 bytes"), &m);
        let ct2 = self.pke_encrypt(pk, &m, &r)?;

        let diff = ct
            .as_bytes()
            .iter()
            .zip(&ct2)
            .fold(0u8, |acc, (a, b)| acc | (a ^ b));
        // 0xFF when the ciphertexts differ
        let reject = 0u8.wrapping_sub(((diff as u16 + 0xFF) >> 8) as u8);
        let mut key = [0u8; 32];
        for ((k, &good), &bad) in key.iter_mut().zip(&k_hat).zip(z) {
            *k = (good & !reject) | (bad & reject);
        }
        Ok(shared_secret(&key, ct.as_bytes()))
    }
}

/// `(K, r) = G(H(pk) || m)`.
pub(crate) fn derive_key_and_coins(hpk: &[u8; 32], m: &[u8; 32]) -> ([u8; 32], Seed) {
    let mut buf = [0u8; 64];
    buf[..32].copy_from_slice(hpk);
    buf[32..].copy_from_slice(m);
    let kr = hash_g(&buf);
    let mut k = [0u8; 32];
    k.copy_from_slice(&kr[..32]);
    (k, Seed::from_slice(&kr[32..]).expect("32 bytes"))
}

fn shared_secret(key: &[u8; 32], ct: &[u8]) -> SharedSecret {
    let mut buf = Vec::with_capacity(32 + ct.len());
    buf.extend_from_slice(key);
    buf.extend_from_slice(ct);
    SharedSecret(hash_h(&buf))
}

/// The message polynomial for a 32-byte message: one bit per coefficient.
pub fn message_poly(message: &[u8; 32]) -> Poly256 {
    unpack(message, 1).expect("32 bytes")
}
