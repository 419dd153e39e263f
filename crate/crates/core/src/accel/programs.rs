//! Canned micro-programs for the KEM and the host-side driver around them.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::kem::{Ciphertext, KeyPair, KeygenSeeds, PublicKey, SecretKey, SharedSecret};
use crate::params::SaberParams;
use crate::sampler::Seed;
use crate::toomcook::PART_LEN;

use super::config::MultiplierConfig;
use super::exec::{hash_fn, load_fmt, recombine_mode, store_fmt, Machine};
use super::isa::{Instruction, Opcode};
use super::memory::{DataMemory, WORD_BYTES};
use super::report::{CycleReport, Footprint, FootprintItem};

const SEED_WORDS: usize = 4;
const SECRET_POLY_WORDS: usize = 32;

/// Word addresses of the KEM data regions. The secret key regions are
/// contiguous and in key order, so a secret key loads with one transfer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub l: usize,
    /// `pack_13(s)`.
    pub sk_s: usize,
    /// Public key; its first four words are the matrix seed.
    pub pk: usize,
    pub hpk: usize,
    pub z: usize,
    /// `G` output: the pre-key followed by the encryption coins. Must sit
    /// right after `z` for the rejection select.
    pub kr: usize,
    pub m: usize,
    pub seed_s: usize,
    /// Encapsulation randomness.
    pub rseed: usize,
    /// Secret vector, one signed byte per coefficient.
    pub sp: usize,
    pub ct: usize,
    pub ss: usize,
    pub end: usize,
}

impl Layout {
    pub fn new(p: &SaberParams) -> Self {
        let l = p.l;
        let sk_s = 0;
        let pk = sk_s + p.polyvec_q_bytes() / WORD_BYTES;
        let hpk = pk + p.public_key_bytes() / WORD_BYTES;
        let z = hpk + SEED_WORDS;
        let kr = z + SEED_WORDS;
        let m = kr + 2 * SEED_WORDS;
        let seed_s = m + SEED_WORDS;
        let rseed = seed_s + SEED_WORDS;
        let sp = rseed + SEED_WORDS;
        let ct = sp + SECRET_POLY_WORDS * l;
        let ss = ct + p.ciphertext_bytes() / WORD_BYTES;
        let end = ss + SEED_WORDS;
        Self { l, sk_s, pk, hpk, z, kr, m, seed_s, rseed, sp, ct, ss, end }
    }

    pub fn words(&self) -> usize {
        self.end
    }

    pub fn bytes(&self) -> usize {
        self.end * WORD_BYTES
    }

    /// `(name, first word, word count)` of every region.
    pub fn regions(&self) -> Vec<(&'static str, usize, usize)> {
        vec![
            ("sk_s", self.sk_s, self.pk - self.sk_s),
            ("pk", self.pk, self.hpk - self.pk),
            ("hpk", self.hpk, SEED_WORDS),
            ("z", self.z, SEED_WORDS),
            ("kr", self.kr, 2 * SEED_WORDS),
            ("m", self.m, SEED_WORDS),
            ("seed_s", self.seed_s, SEED_WORDS),
            ("rseed", self.rseed, SEED_WORDS),
            ("sp", self.sp, self.ct - self.sp),
            ("ct", self.ct, self.ss - self.ct),
            ("ss", self.ss, SEED_WORDS),
        ]
    }
}

/// Instruction list builder. Offsets come from [`Layout`] and always fit.
#[derive(Default)]
struct Asm(Vec<Instruction>);

impl Asm {
    fn op(&mut self, opcode: Opcode, a: usize, b: usize) -> &mut Self {
        let ins = Instruction::new(opcode, a as u16, b as u16).expect("offset fits 10 bits");
        self.0.push(ins);
        self
    }

    fn absorb(&mut self, addr: usize, words: usize) -> &mut Self {
        self.op(Opcode::HashStep, addr, hash_fn::step(hash_fn::ABSORB, words as u16) as usize)
    }

    fn finalize(&mut self, func: u16, dst: usize) -> &mut Self {
        self.op(Opcode::HashStep, dst, hash_fn::step(func, 0) as usize)
    }

    /// `A s` (or `A^T s`) with each row rounded to 10 bits and stored at
    /// `dst`. With secret caching every `s_j` is evaluated once into bank
    /// `j`; otherwise it is reloaded and re-evaluated per matrix entry.
    fn matvec(&mut self, lay: &Layout, cached: bool, transpose: bool, dst: usize, store_flags: u16) {
        let l = lay.l;
        if cached {
            for j in 0..l {
                self.op(Opcode::LoadOperand, lay.sp + SECRET_POLY_WORDS * j, load_fmt::SECRET_BYTES as usize)
                    .op(Opcode::Eval, 1, j);
            }
        }
        for i in 0..l {
            for j in 0..l {
                let entry = if transpose { j * l + i } else { i * l + j };
                self.op(Opcode::GenMatrixStep, lay.pk, entry).op(Opcode::Eval, 0, 0);
                let bank = if cached {
                    j
                } else {
                    self.op(Opcode::LoadOperand, lay.sp + SECRET_POLY_WORDS * j, load_fmt::SECRET_BYTES as usize)
                        .op(Opcode::Eval, 1, 0);
                    0
                };
                self.op(Opcode::PointMul, (j == 0) as usize, bank);
            }
            self.op(Opcode::Interpolate, 0, 0)
                .op(Opcode::RecombineRound, 0, recombine_mode::ROUND_P as usize)
                .op(Opcode::StoreResult, dst + 40 * i, (store_fmt::P | store_flags) as usize);
        }
    }

    /// Inner product of the 10-bit vector at `public` with the secret at
    /// `secret` (in `secret_fmt`), finished by `RECOMBINE_ROUND aux, mode`.
    /// `banked` reuses secret evaluations already sitting in banks `0..l`.
    #[allow(clippy::too_many_arguments)]
    fn inner(&mut self, lay: &Layout, public: usize, secret: usize, secret_fmt: u16, banked: bool, aux: usize, mode: u16) {
        let stride = if secret_fmt == load_fmt::SECRET_13 { 52 } else { SECRET_POLY_WORDS };
        for j in 0..lay.l {
            self.op(Opcode::LoadOperand, public + 40 * j, load_fmt::PUBLIC_10 as usize)
                .op(Opcode::Eval, 0, 0);
            let bank = if banked {
                j
            } else {
                self.op(Opcode::LoadOperand, secret + stride * j, secret_fmt as usize)
                    .op(Opcode::Eval, 1, 0);
                0
            };
            self.op(Opcode::PointMul, (j == 0) as usize, bank);
        }
        self.op(Opcode::Interpolate, 0, 0).op(Opcode::RecombineRound, aux, mode as usize);
    }

    fn halt(mut self) -> Vec<Instruction> {
        self.op(Opcode::Halt, 0, 0);
        self.0
    }
}

/// Expects `seed_A` in the first words of `pk`, `seed_s` at `seed_s` and
/// `z` at `z`. Leaves the secret key at `sk_s..kr` and the public key at
/// `pk`.
pub fn keygen_program(p: &SaberParams, cfg: &MultiplierConfig) -> Vec<Instruction> {
    let lay = Layout::new(p);
    let mut asm = Asm::default();
    asm.op(Opcode::SampleSecret, lay.seed_s, lay.sp)
        .op(Opcode::Pack, lay.sp, lay.sk_s);
    asm.matvec(&lay, cfg.cache_secret_eval, true, lay.pk + SEED_WORDS, 0);
    asm.absorb(lay.pk, lay.hpk - lay.pk).finalize(hash_fn::FINAL_H, lay.hpk);
    asm.halt()
}

/// Expects the public key at `pk` and the randomness at `rseed`. Leaves the
/// ciphertext at `ct` and the shared secret at `ss`.
pub fn encaps_program(p: &SaberParams, cfg: &MultiplierConfig) -> Vec<Instruction> {
    let lay = Layout::new(p);
    let cached = cfg.cache_secret_eval;
    let mut asm = Asm::default();
    asm.absorb(lay.rseed, SEED_WORDS).finalize(hash_fn::FINAL_H, lay.m);
    asm.absorb(lay.pk, lay.hpk - lay.pk).finalize(hash_fn::FINAL_H, lay.hpk);
    asm.absorb(lay.hpk, SEED_WORDS)
        .absorb(lay.m, SEED_WORDS)
        .finalize(hash_fn::FINAL_G, lay.kr);
    encrypt_tail(&mut asm, &lay, p, cached, 0);
    asm.absorb(lay.kr, SEED_WORDS)
        .absorb(lay.ct, lay.ss - lay.ct)
        .finalize(hash_fn::FINAL_H, lay.ss);
    asm.halt()
}

/// Samples `s'` from the coins, computes `b'` and `c_m` and stores (or
/// compares) them at `ct`.
fn encrypt_tail(asm: &mut Asm, lay: &Layout, p: &SaberParams, cached: bool, flags: u16) {
    asm.op(Opcode::SampleSecret, lay.kr + SEED_WORDS, lay.sp);
    asm.matvec(lay, cached, false, lay.ct, flags);
    asm.inner(lay, lay.pk + SEED_WORDS, lay.sp, load_fmt::SECRET_BYTES, cached, lay.m, recombine_mode::ENCODE_MSG);
    asm.op(Opcode::StoreResult, lay.ct + 40 * p.l, (store_fmt::T | flags) as usize);
}

/// Expects the secret key at `sk_s` and the ciphertext at `ct`. Decrypts,
/// re-encrypts in compare mode and hashes either the pre-key or `z` with
/// the ciphertext into `ss`.
pub fn decaps_program(p: &SaberParams, cfg: &MultiplierConfig) -> Vec<Instruction> {
    let lay = Layout::new(p);
    let mut asm = Asm::default();
    asm.inner(&lay, lay.ct, lay.sk_s, load_fmt::SECRET_13, false, lay.ct + 40 * p.l, recombine_mode::DECODE_MSG);
    asm.op(Opcode::StoreResult, lay.m, store_fmt::MSG as usize);
    asm.absorb(lay.hpk, SEED_WORDS)
        .absorb(lay.m, SEED_WORDS)
        .finalize(hash_fn::FINAL_G, lay.kr);
    encrypt_tail(&mut asm, &lay, p, cfg.cache_secret_eval, store_fmt::COMPARE);
    asm.op(
        Opcode::HashStep,
        lay.kr,
        hash_fn::step(hash_fn::SELECT_ABSORB, SEED_WORDS as u16) as usize,
    );
    asm.absorb(lay.ct, lay.ss - lay.ct).finalize(hash_fn::FINAL_H, lay.ss);
    asm.halt()
}

/// `sum_j a_j * s_j` at 13 bits: `a` packed 13-bit at `public`, `s` as
/// signed bytes at `secret`, result packed 13-bit at `dst`.
pub fn inner_product_program(l: usize, public: usize, secret: usize, dst: usize) -> Vec<Instruction> {
    let mut asm = Asm::default();
    for j in 0..l {
        asm.op(Opcode::LoadOperand, public + 52 * j, load_fmt::PUBLIC_13 as usize)
            .op(Opcode::Eval, 0, 0)
            .op(Opcode::LoadOperand, secret + SECRET_POLY_WORDS * j, load_fmt::SECRET_BYTES as usize)
            .op(Opcode::Eval, 1, 0)
            .op(Opcode::PointMul, (j == 0) as usize, 0);
    }
    asm.op(Opcode::Interpolate, 0, 0)
        .op(Opcode::RecombineRound, 0, recombine_mode::Q as usize)
        .op(Opcode::StoreResult, dst, store_fmt::Q as usize);
    asm.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KemOp {
    Keygen,
    Encaps,
    Decaps,
}

impl KemOp {
    pub const ALL: [KemOp; 3] = [KemOp::Keygen, KemOp::Encaps, KemOp::Decaps];

    pub fn name(self) -> &'static str {
        match self {
            KemOp::Keygen => "keygen",
            KemOp::Encaps => "encaps",
            KemOp::Decaps => "decaps",
        }
    }

    pub fn program(self, p: &SaberParams, cfg: &MultiplierConfig) -> Vec<Instruction> {
        match self {
            KemOp::Keygen => keygen_program(p, cfg),
            KemOp::Encaps => encaps_program(p, cfg),
            KemOp::Decaps => decaps_program(p, cfg),
        }
    }
}

impl fmt::Display for KemOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KemOp {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        KemOp::ALL
            .into_iter()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse {
                line: 0,
                reason: format!("unknown operation {s:?}"),
            })
    }
}

/// Runs the KEM on the modeled co-processor. The host moves inputs into
/// data memory, starts the program and reads the outputs back.
#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    params: SaberParams,
    cfg: MultiplierConfig,
    layout: Layout,
}

impl Simulator {
    pub fn new(params: SaberParams, cfg: MultiplierConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            params,
            cfg,
            layout: Layout::new(&params),
        })
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    fn run(&self, op: KemOp, mem: DataMemory) -> Result<(DataMemory, CycleReport)> {
        let mut machine = Machine::new(self.params, self.cfg, mem)?;
        machine.run(&op.program(&self.params, &self.cfg))?;
        let (mem, report) = machine.into_parts();
        Ok((mem, report.with_label(format!("{} {op}", self.params.name))))
    }

    fn words(bytes: usize) -> usize {
        bytes / WORD_BYTES
    }

    pub fn keygen(&self, seeds: &KeygenSeeds) -> Result<(KeyPair, CycleReport)> {
        let (p, lay) = (&self.params, &self.layout);
        let mut mem = DataMemory::new();
        mem.load_bytes(lay.pk, &seeds.seed_a.0)?;
        mem.load_bytes(lay.seed_s, &seeds.seed_s.0)?;
        mem.load_bytes(lay.z, &seeds.z.0)?;
        let (mem, report) = self.run(KemOp::Keygen, mem)?;
        let pk = mem.dump_bytes(lay.pk, Self::words(p.public_key_bytes()))?;
        let sk = mem.dump_bytes(lay.sk_s, Self::words(p.secret_key_bytes()))?;
        let kp = KeyPair {
            public_key: PublicKey::from_bytes(p, &pk)?,
            secret_key: SecretKey::from_bytes(p, &sk)?,
        };
        Ok((kp, report))
    }

    pub fn encaps(&self, pk: &PublicKey, seed: &Seed) -> Result<(Ciphertext, SharedSecret, CycleReport)> {
        let (p, lay) = (&self.params, &self.layout);
        let pk = PublicKey::from_bytes(p, pk.as_bytes())?;
        let mut mem = DataMemory::new();
        mem.load_bytes(lay.pk, pk.as_bytes())?;
        mem.load_bytes(lay.rseed, &seed.0)?;
        let (mem, report) = self.run(KemOp::Encaps, mem)?;
        let ct = mem.dump_bytes(lay.ct, Self::words(p.ciphertext_bytes()))?;
        let ss = read_secret(&mem, lay.ss)?;
        Ok((Ciphertext::from_bytes(p, &ct)?, ss, report))
    }

    pub fn decaps(&self, sk: &SecretKey, ct: &Ciphertext) -> Result<(SharedSecret, CycleReport)> {
        let (p, lay) = (&self.params, &self.layout);
        let sk = SecretKey::from_bytes(p, sk.as_bytes())?;
        let ct = Ciphertext::from_bytes(p, ct.as_bytes())?;
        let mut mem = DataMemory::new();
        mem.load_bytes(lay.sk_s, sk.as_bytes())?;
        mem.load_bytes(lay.ct, ct.as_bytes())?;
        let (mem, report) = self.run(KemOp::Decaps, mem)?;
        Ok((read_secret(&mem, lay.ss)?, report))
    }
}

fn read_secret(mem: &DataMemory, addr: usize) -> Result<SharedSecret> {
    let bytes = mem.dump_bytes(addr, SEED_WORDS)?;
    Ok(SharedSecret(bytes.try_into().expect("32 bytes")))
}

/// Cycle report of one KEM operation on fixed inputs. Decapsulation runs on
/// a valid ciphertext; its cost does not depend on the outcome.
pub fn model_kem(op: KemOp, params: &SaberParams, cfg: &MultiplierConfig) -> Result<CycleReport> {
    let sim = Simulator::new(*params, *cfg)?;
    let seeds = KeygenSeeds {
        seed_a: Seed([0x5A; 32]),
        seed_s: Seed([0xA5; 32]),
        z: Seed([0x3C; 32]),
    };
    let (kp, keygen) = sim.keygen(&seeds)?;
    if op == KemOp::Keygen {
        return Ok(keygen);
    }
    let (ct, _, encaps) = sim.encaps(&kp.public_key, &Seed([0xC3; 32]))?;
    if op == KemOp::Encaps {
        return Ok(encaps);
    }
    Ok(sim.decaps(&kp.secret_key, &ct)?.1)
}

/// Static byte accounting of data memory, point-unit local memory and
/// program storage.
pub fn footprint_report(params: &SaberParams, cfg: &MultiplierConfig) -> Result<Footprint> {
    cfg.validate()?;
    let lay = Layout::new(params);
    let data_regions = lay
        .regions()
        .into_iter()
        .map(|(name, _, words)| FootprintItem {
            name: name.to_string(),
            bytes: words * WORD_BYTES,
        })
        .collect::<Vec<_>>();
    let data_bytes = data_regions.iter().map(|r| r.bytes).sum();
    let local_bytes_per_unit = cfg.local_mem_bytes_per_unit(params.l);
    let local_bytes = cfg.local_mem_bytes(params.l);
    let program_bytes = KemOp::ALL
        .iter()
        .map(|op| op.program(params, cfg).len() * 3)
        .max()
        .unwrap_or(0);
    let total_bytes = data_bytes + local_bytes;
    Ok(Footprint {
        data_regions,
        data_bytes,
        num_point_units: cfg.num_point_units,
        local_bytes_per_unit,
        local_bytes,
        total_bytes,
        program_bytes,
        total_with_program_bytes: total_bytes + program_bytes,
        point_product_coeffs: PART_LEN,
        unreduced_point_product_coeffs: 2 * PART_LEN - 1,
    })
}
