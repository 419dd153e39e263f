//! Saber key encapsulation on a striding Toom-Cook-4 multiplier with lazy
//! interpolation, plus an instruction-level model of a co-processor that
//! runs it.
//!
//! ```
//! use saber_accel::{KeygenSeeds, Saber, SaberParams, Seed};
//!
//! let saber = Saber::new(SaberParams::SABER);
//! let seeds = KeygenSeeds { seed_a: Seed([1; 32]), seed_s: Seed([2; 32]), z: Seed([3; 32]) };
//! let keys = saber.keygen(&seeds)?;
//! let (ct, ss) = saber.encaps(&keys.public_key, &Seed([4; 32]))?;
//! assert_eq!(saber.decaps(&keys.secret_key, &ct)?, ss);
//! # Ok::<(), saber_accel::Error>(())
//! ```

pub mod accel;
pub mod backend;
pub mod error;
pub mod kem;
pub mod params;
pub mod poly;
pub mod ring;
pub mod sampler;
pub mod toomcook;

pub use backend::Backend;
pub use error::{Error, Result};
pub use kem::{Ciphertext, KeyPair, KeygenSeeds, PublicKey, Saber, SecretKey, SharedSecret};
pub use params::{ParamSet, SaberParams};
pub use sampler::Seed;

// The guide's code blocks run as doctests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/ring.md")]
    mod ring {}
    #[doc = include_str!("../../../book/src/striding.md")]
    mod striding {}
    #[doc = include_str!("../../../book/src/lazy.md")]
    mod lazy {}
    #[doc = include_str!("../../../book/src/kem.md")]
    mod kem {}
    #[doc = include_str!("../../../book/src/accelerator.md")]
    mod accelerator {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
