//! Instruction-level executor.
//!
//! Arithmetic is delegated to the library (`toomcook`, `sampler`, `poly`),
//! so results are bit-identical to the software path. Every data-memory
//! word moved costs half a cycle: transfers are issued two per cycle and
//! checked against the port tracker.

use crate::error::{Error, Result};
use crate::params::SaberParams;
use crate::poly::{pack, packed_len, poly_round, unpack, PolyMatrix, PolyVec, Poly256, N};
use crate::sampler::{gen_matrix, gen_secret, hash_g, hash_h, Seed};
use crate::toomcook::{
    evaluate_public, evaluate_secret, strided_recombine, tc4_interpolate, EvalVec7, Poly64,
    EVAL_VECTOR_OPS, INTERP_VECTOR_OPS, POINTS,
};

use super::config::{
    absorb_permutations, squeeze_permutations, CostTable, MultiplierConfig, SHA3_256_RATE,
    SHA3_512_RATE, SHAKE128_RATE,
};
use super::isa::{Instruction, Opcode};
use super::memory::{DataMemory, PortTracker, WORD_BYTES};
use super::report::{CycleReport, Phase};

/// `LOAD_OPERAND` formats (second offset).
pub mod load_fmt {
    /// 13-bit packed polynomial into the public operand register.
    pub const PUBLIC_13: u16 = 0;
    /// 10-bit packed polynomial into the public operand register.
    pub const PUBLIC_10: u16 = 1;
    /// One signed byte per coefficient into the secret operand register.
    pub const SECRET_BYTES: u16 = 2;
    /// 13-bit packed secret, sign-extended, into the secret operand register.
    pub const SECRET_13: u16 = 3;
}

/// `STORE_RESULT` formats (low bits of the second offset).
pub mod store_fmt {
    /// 10-bit result.
    pub const P: u16 = 0;
    /// `eT`-bit result.
    pub const T: u16 = 1;
    /// 1-bit result.
    pub const MSG: u16 = 2;
    /// 13-bit result.
    pub const Q: u16 = 3;
    /// Compare against memory instead of writing; a mismatch sets the
    /// reject flag.
    pub const COMPARE: u16 = 0x200;
}

/// `RECOMBINE_ROUND` modes (second offset).
pub mod recombine_mode {
    /// Recombine to 13 bits.
    pub const Q: u16 = 0;
    /// Recombine to 13 bits and round to 10 bits.
    pub const ROUND_P: u16 = 1;
    /// Recombine to 10 bits, subtract the message read from the first
    /// offset shifted to the top bit, round to `eT` bits.
    pub const ENCODE_MSG: u16 = 2;
    /// Recombine to 10 bits, subtract the `eT`-bit value read from the first
    /// offset shifted up to 10 bits, round to 1 bit.
    pub const DECODE_MSG: u16 = 3;
}

/// `HASH_STEP` functions (bits 8..10 of the second offset; the low byte is
/// a length in words).
pub mod hash_fn {
    pub const ABSORB: u16 = 0;
    /// SHA3-256 of everything absorbed, written as 4 words.
    pub const FINAL_H: u16 = 1;
    /// SHA3-512 of everything absorbed, written as 8 words.
    pub const FINAL_G: u16 = 2;
    /// Absorbs from the first offset when the reject flag is clear and from
    /// `offset - len` otherwise. Both are read.
    pub const SELECT_ABSORB: u16 = 3;

    pub const fn step(func: u16, len_words: u16) -> u16 {
        func << 8 | len_words
    }
}

/// Co-processor state for one run.
pub struct Machine {
    params: SaberParams,
    cfg: MultiplierConfig,
    costs: CostTable,
    mem: DataMemory,
    ports: PortTracker,
    report: CycleReport,
    pc: usize,
    opa: Option<Poly256>,
    opb: Option<Poly256>,
    eval_a: Option<EvalVec7>,
    banks: Vec<Option<EvalVec7>>,
    acc: EvalVec7,
    interp: Option<[Poly64; POINTS]>,
    res: Option<Poly256>,
    matrix: Option<(Seed, PolyMatrix)>,
    absorbed: Vec<u8>,
    reject: bool,
}

impl Machine {
    pub fn new(params: SaberParams, cfg: MultiplierConfig, mem: DataMemory) -> Result<Self> {
        cfg.validate()?;
        let report = CycleReport {
            peak_local_mem_bytes: cfg.local_mem_bytes(params.l),
            ..CycleReport::default()
        };
        Ok(Self {
            params,
            cfg,
            costs: CostTable::default(),
            mem,
            ports: PortTracker::default(),
            report,
            pc: 0,
            opa: None,
            opb: None,
            eval_a: None,
            banks: vec![None; cfg.secret_banks(params.l)],
            acc: EvalVec7::default(),
            interp: None,
            res: None,
            matrix: None,
            absorbed: Vec::new(),
            reject: false,
        })
    }

    pub fn with_costs(mut self, costs: CostTable) -> Self {
        self.costs = costs;
        self
    }

    pub fn memory(&self) -> &DataMemory {
        &self.mem
    }

    /// Set when a compare-mode store saw a difference.
    pub fn reject_flag(&self) -> bool {
        self.reject
    }

    /// Runs until the end of `prog` or a `HALT`.
    pub fn run(&mut self, prog: &[Instruction]) -> Result<()> {
        for (pc, ins) in prog.iter().enumerate() {
            self.pc = pc;
            self.report.instructions += 1;
            if ins.opcode == Opcode::Halt {
                break;
            }
            self.step(ins)?;
        }
        self.report.peak_data_mem_bytes = self.mem.touched_bytes();
        Ok(())
    }

    pub fn into_parts(self) -> (DataMemory, CycleReport) {
        (self.mem, self.report)
    }

    fn bad(&self, reason: impl Into<String>) -> Error {
        Error::BadOperand {
            pc: self.pc,
            reason: reason.into(),
        }
    }

    fn charge(&mut self, phase: Phase, cycles: u64) {
        self.report.charge(phase, cycles);
    }

    fn read(&mut self, phase: Phase, addr: usize, words: usize) -> Result<Vec<u8>> {
        self.mem.check_range(self.pc, addr, words)?;
        let start = self.report.total_cycles;
        let mut out = Vec::with_capacity(words * WORD_BYTES);
        for k in 0..words {
            self.ports.access(self.pc, start + (k / 2) as u64)?;
            out.extend(self.mem.read(addr + k).to_le_bytes());
        }
        self.charge(phase, words.div_ceil(2) as u64);
        Ok(out)
    }

    fn write(&mut self, phase: Phase, addr: usize, bytes: &[u8]) -> Result<()> {
        let words = bytes.len().div_ceil(WORD_BYTES);
        self.mem.check_range(self.pc, addr, words)?;
        let start = self.report.total_cycles;
        for (k, chunk) in bytes.chunks(WORD_BYTES).enumerate() {
            self.ports.access(self.pc, start + (k / 2) as u64)?;
            let mut word = [0u8; WORD_BYTES];
            word[..chunk.len()].copy_from_slice(chunk);
            self.mem.write(addr + k, u64::from_le_bytes(word));
        }
        self.charge(phase, words.div_ceil(2) as u64);
        Ok(())
    }

    fn permutations(&mut self, phase: Phase, count: u64) {
        self.charge(phase, count * self.costs.permutation);
    }

    fn step(&mut self, ins: &Instruction) -> Result<()> {
        let (a, b) = (ins.off_a as usize, ins.off_b);
        match ins.opcode {
            Opcode::LoadOperand => self.load(a, b),
            Opcode::StoreResult => self.store(a, b),
            Opcode::GenMatrixStep => self.gen_matrix_step(a, b as usize),
            Opcode::SampleSecret => self.sample_secret(a, b as usize),
            Opcode::Eval => self.eval(ins.off_a, b as usize),
            Opcode::PointMul => self.point_mul(ins.off_a, b as usize),
            Opcode::Interpolate => {
                self.interp = Some(tc4_interpolate(&self.acc));
                self.charge(
                    Phase::Interpolate,
                    INTERP_VECTOR_OPS as u64 * self.costs.vector_op,
                );
                Ok(())
            }
            Opcode::RecombineRound => self.recombine(a, b),
            Opcode::HashStep => self.hash_step(a, b),
            Opcode::Pack => self.pack_secret(a, b as usize),
            Opcode::Halt => Ok(()),
        }
    }

    fn load(&mut self, addr: usize, fmt: u16) -> Result<()> {
        let p = self.params;
        match fmt {
            load_fmt::PUBLIC_13 | load_fmt::PUBLIC_10 => {
                let bits = if fmt == load_fmt::PUBLIC_13 { p.eq } else { p.ep };
                let bytes = self.read(Phase::Evaluate, addr, packed_len(bits) / WORD_BYTES)?;
                self.opa = Some(unpack(&bytes, bits)?);
            }
            load_fmt::SECRET_BYTES => {
                let bytes = self.read(Phase::Evaluate, addr, N / WORD_BYTES)?;
                self.opb = Some(poly_from_signed_bytes(&bytes)?);
            }
            load_fmt::SECRET_13 => {
                let bytes = self.read(Phase::Evaluate, addr, packed_len(p.eq) / WORD_BYTES)?;
                self.opb = Some(unpack(&bytes, p.eq)?);
            }
            _ => return Err(self.bad(format!("unknown load format {fmt}"))),
        }
        Ok(())
    }

    fn store(&mut self, addr: usize, arg: u16) -> Result<()> {
        let p = self.params;
        let compare = arg & store_fmt::COMPARE != 0;
        let fmt = arg & !store_fmt::COMPARE;
        let bits = match fmt {
            store_fmt::P => p.ep,
            store_fmt::T => p.et,
            store_fmt::MSG => 1,
            store_fmt::Q => p.eq,
            _ => return Err(self.bad(format!("unknown store format {fmt}"))),
        };
        let res = self.res.take().ok_or_else(|| self.bad("no result to store"))?;
        if res.width() != bits {
            return Err(self.bad(format!(
                "result is {} bits, store format wants {bits}",
                res.width()
            )));
        }
        let bytes = pack(&res, bits)?;
        if compare {
            let old = self.read(Phase::Pack, addr, bytes.len() / WORD_BYTES)?;
            let diff = old.iter().zip(&bytes).fold(0u8, |acc, (x, y)| acc | (x ^ y));
            self.reject |= diff != 0;
        } else {
            self.write(Phase::Pack, addr, &bytes)?;
        }
        Ok(())
    }

    fn read_seed(&mut self, phase: Phase, addr: usize) -> Result<Seed> {
        let bytes = self.read(phase, addr, 4)?;
        Seed::from_slice(&bytes)
    }

    fn gen_matrix_step(&mut self, seed_addr: usize, index: usize) -> Result<()> {
        let p = self.params;
        if index >= p.l * p.l {
            return Err(self.bad(format!("matrix entry {index} out of range")));
        }
        let seed = self.read_seed(Phase::MatrixGen, seed_addr)?;
        // The functional result is cached; the cost of squeezing and
        // unpacking the entry is charged every time.
        if self.matrix.as_ref().map(|(s, _)| s) != Some(&seed) {
            self.matrix = Some((seed, gen_matrix(&seed, &p)));
        }
        let m = &self.matrix.as_ref().expect("just set").1;
        self.opa = Some(m.get(index / p.l, index % p.l).clone());
        let entry_bytes = packed_len(p.eq);
        self.permutations(
            Phase::MatrixGen,
            entry_bytes.div_ceil(SHAKE128_RATE) as u64,
        );
        self.charge(
            Phase::MatrixGen,
            (entry_bytes / WORD_BYTES) as u64 * self.costs.unpack_word,
        );
        Ok(())
    }

    fn sample_secret(&mut self, seed_addr: usize, dst: usize) -> Result<()> {
        let p = self.params;
        let seed = self.read_seed(Phase::Sample, seed_addr)?;
        let s = gen_secret(&seed, &p);
        let perms = absorb_permutations(seed.0.len(), SHAKE128_RATE)
            + squeeze_permutations(p.secret_bytes(), SHAKE128_RATE);
        self.permutations(Phase::Sample, perms);
        let bytes = secret_to_bytes(&s).ok_or_else(|| self.bad("secret exceeds a byte"))?;
        self.write(Phase::Sample, dst, &bytes)
    }

    fn eval(&mut self, which: u16, bank: usize) -> Result<()> {
        match which {
            0 => {
                let a = self.opa.as_ref().ok_or_else(|| self.bad("public operand empty"))?;
                self.eval_a = Some(evaluate_public(a));
            }
            1 => {
                if bank >= self.banks.len() {
                    return Err(self.bad(format!("secret bank {bank} not configured")));
                }
                let b = self.opb.as_ref().ok_or_else(|| self.bad("secret operand empty"))?;
                let e = evaluate_secret(b);
                if !e.points.iter().all(Poly64::fits_i8) {
                    return Err(self.bad("evaluated secret exceeds the 8-bit operand memory"));
                }
                self.banks[bank] = Some(e);
            }
            _ => return Err(self.bad(format!("EVAL selector {which}"))),
        }
        self.charge(Phase::Evaluate, EVAL_VECTOR_OPS as u64 * self.costs.vector_op);
        Ok(())
    }

    fn point_mul(&mut self, flags: u16, bank: usize) -> Result<()> {
        let ea = self.eval_a.ok_or_else(|| self.bad("public operand not evaluated"))?;
        let eb = self
            .banks
            .get(bank)
            .copied()
            .flatten()
            .ok_or_else(|| self.bad(format!("secret bank {bank} empty")))?;
        if flags & 1 != 0 {
            self.acc = EvalVec7::default();
        }
        self.acc.accumulate_products(&ea, &eb);
        self.charge(Phase::PointMul, self.cfg.point_mul_cycles());
        Ok(())
    }

    fn recombine(&mut self, aux: usize, mode: u16) -> Result<()> {
        let p = self.params;
        let parts = self.interp.ok_or_else(|| self.bad("nothing interpolated"))?;
        self.charge(Phase::Recombine, self.costs.recombine);
        let res = match mode {
            recombine_mode::Q => strided_recombine(&parts, p.eq)?,
            recombine_mode::ROUND_P => {
                poly_round(&strided_recombine(&parts, p.eq)?, p.eq, p.ep, p.h1())?
            }
            recombine_mode::ENCODE_MSG => {
                let m_bytes = self.read(Phase::Recombine, aux, packed_len(1) / WORD_BYTES)?;
                let m = unpack(&m_bytes, 1)?.reduce_to(p.ep)?.shl(p.ep - 1);
                let v = strided_recombine(&parts, p.ep)?;
                poly_round(&v.sub(&m)?, p.ep, p.et, p.h1())?
            }
            recombine_mode::DECODE_MSG => {
                let c_bytes = self.read(Phase::Recombine, aux, packed_len(p.et) / WORD_BYTES)?;
                let cm = unpack(&c_bytes, p.et)?.reduce_to(p.ep)?.shl(p.ep - p.et);
                let v = strided_recombine(&parts, p.ep)?;
                poly_round(&v.sub(&cm)?, p.ep, 1, p.h2())?
            }
            _ => return Err(self.bad(format!("recombine mode {mode}"))),
        };
        self.res = Some(res);
        Ok(())
    }

    fn hash_step(&mut self, addr: usize, arg: u16) -> Result<()> {
        let func = arg >> 8;
        let len = (arg & 0xFF) as usize;
        match func {
            hash_fn::ABSORB => {
                let bytes = self.read(Phase::Hash, addr, len)?;
                self.absorbed.extend(bytes);
            }
            hash_fn::SELECT_ABSORB => {
                let alt = addr
                    .checked_sub(len)
                    .ok_or_else(|| self.bad("select-absorb alternative below address 0"))?;
                let good = self.read(Phase::Hash, addr, len)?;
                let bad = self.read(Phase::Hash, alt, len)?;
                let sel = 0u8.wrapping_sub(self.reject as u8);
                self.absorbed
                    .extend(good.iter().zip(&bad).map(|(&g, &b)| (g & !sel) | (b & sel)));
            }
            hash_fn::FINAL_H | hash_fn::FINAL_G => {
                let msg = std::mem::take(&mut self.absorbed);
                let (digest, rate) = if func == hash_fn::FINAL_H {
                    (hash_h(&msg).to_vec(), SHA3_256_RATE)
                } else {
                    (hash_g(&msg).to_vec(), SHA3_512_RATE)
                };
                self.permutations(Phase::Hash, absorb_permutations(msg.len(), rate));
                self.write(Phase::Hash, addr, &digest)?;
            }
            _ => unreachable!("10-bit offset leaves two function bits"),
        }
        Ok(())
    }

    fn pack_secret(&mut self, src: usize, dst: usize) -> Result<()> {
        let p = self.params;
        let bytes = self.read(Phase::Pack, src, p.l * N / WORD_BYTES)?;
        let s: PolyVec = bytes
            .chunks_exact(N)
            .map(poly_from_signed_bytes)
            .collect::<Result<_>>()?;
        let packed = s.pack(p.eq)?;
        self.write(Phase::Pack, dst, &packed)
    }
}

fn poly_from_signed_bytes(bytes: &[u8]) -> Result<Poly256> {
    let mut vals = [0i16; N];
    for (v, &b) in vals.iter_mut().zip(bytes) {
        *v = b as i8 as i16;
    }
    Poly256::from_signed(&vals, 16)
}

fn secret_to_bytes(s: &PolyVec) -> Option<Vec<u8>> {
    s.iter()
        .flat_map(|p| p.signed_coeffs())
        .map(|c| i8::try_from(c).ok().map(|v| v as u8))
        .collect()
}

/// Runs `prog` on a fresh machine over `mem`.
pub fn run_program(
    prog: &[Instruction],
    mem: DataMemory,
    params: &SaberParams,
    cfg: &MultiplierConfig,
) -> Result<(DataMemory, CycleReport)> {
    let mut m = Machine::new(*params, *cfg, mem)?;
    m.run(prog)?;
    Ok(m.into_parts())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::accel::isa::parse_program;

    fn saber() -> SaberParams {
        SaberParams::SABER
    }

    #[test]
    fn empty_program_costs_nothing() {
        let mut mem = DataMemory::new();
        mem.load_bytes(0, &[7u8; 64]).unwrap();
        let (out, rep) = run_program(&[], mem.clone(), &saber(), &MultiplierConfig::default()).unwrap();
        assert_eq!(out, mem);
        assert_eq!(rep.total_cycles, 0);
        assert_eq!(rep.phases.sum(), 0);
    }

    #[test]
    fn halt_stops_execution() {
        let prog = parse_program("HALT\nINTERPOLATE\n").unwrap();
        let (_, rep) = run_program(&prog, DataMemory::new(), &saber(), &MultiplierConfig::default()).unwrap();
        assert_eq!(rep.total_cycles, 0);
        assert_eq!(rep.instructions, 1);
    }

    #[test]
    fn point_mul_phase_cost() {
        let prog = parse_program(
            "GEN_MATRIX_STEP 0, 0\nEVAL 0, 0\nSAMPLE_SECRET 0, 8\nLOAD_OPERAND 8, 2\nEVAL 1, 0\nPOINT_MUL 1, 0\n",
        )
        .unwrap();
        for (units, expect) in [(7, 1024), (4, 2048), (1, 7168)] {
            let cfg = MultiplierConfig::new(units, 4).unwrap();
            let (_, rep) = run_program(&prog, DataMemory::new(), &saber(), &cfg).unwrap();
            assert_eq!(rep.phases.point_mul, expect);
            assert_eq!(rep.total_cycles, rep.phases.sum());
        }
    }

    #[test]
    fn operand_errors() {
        let cfg = MultiplierConfig::default();
        for text in [
            "EVAL 0, 0",
            "EVAL 2, 0",
            "POINT_MUL 1, 0",
            "RECOMBINE_ROUND 0, 0",
            "STORE_RESULT 0, 0",
            "LOAD_OPERAND 0, 9",
            "GEN_MATRIX_STEP 0, 9",
            "INTERPOLATE\nRECOMBINE_ROUND 0, 7",
            "HASH_STEP 0, 0x302",
        ] {
            let prog = parse_program(text).unwrap();
            let err = run_program(&prog, DataMemory::new(), &saber(), &cfg).unwrap_err();
            assert!(matches!(err, Error::BadOperand { .. }), "{text}: {err:?}");
        }
        // secret bank 1 exists only when secrets are cached
        let prog = parse_program("SAMPLE_SECRET 0, 8\nLOAD_OPERAND 8, 2\nEVAL 1, 1").unwrap();
        assert!(run_program(&prog, DataMemory::new(), &saber(), &cfg).is_err());
        let cached = MultiplierConfig {
            cache_secret_eval: true,
            ..cfg
        };
        assert!(run_program(&prog, DataMemory::new(), &saber(), &cached).is_ok());
    }

    #[test]
    fn store_width_must_match() {
        let prog = parse_program(
            "GEN_MATRIX_STEP 0, 0\nEVAL 0, 0\nSAMPLE_SECRET 0, 8\nLOAD_OPERAND 8, 2\nEVAL 1, 0\n\
             POINT_MUL 1, 0\nINTERPOLATE\nRECOMBINE_ROUND 0, 0\nSTORE_RESULT 200, 0\n",
        )
        .unwrap();
        let err = run_program(&prog, DataMemory::new(), &saber(), &MultiplierConfig::default())
            .unwrap_err();
        assert!(matches!(err, Error::BadOperand { pc: 8, .. }));
    }

    #[test]
    fn out_of_range_address() {
        let prog = parse_program("LOAD_OPERAND 1000, 0").unwrap();
        let err = run_program(&prog, DataMemory::new(), &saber(), &MultiplierConfig::default())
            .unwrap_err();
        assert_eq!(err, Error::AddressOutOfRange { pc: 0, start: 1000, end: 1052 });
    }

    #[test]
    fn hash_matches_library() {
        let mut mem = DataMemory::new();
        let msg: Vec<u8> = (0..80).collect();
        mem.load_bytes(0, &msg).unwrap();
        let prog = parse_program("HASH_STEP 0, 10\nHASH_STEP 100, 0x100\nHASH_STEP 0, 10\nHASH_STEP 110, 0x200").unwrap();
        let (out, rep) = run_program(&prog, mem, &saber(), &MultiplierConfig::default()).unwrap();
        assert_eq!(out.dump_bytes(100, 4).unwrap(), hash_h(&msg));
        assert_eq!(out.dump_bytes(110, 8).unwrap(), hash_g(&msg));
        // two 5-cycle reads, one permutation each, 2 + 4 cycles of writes
        assert_eq!(rep.phases.hash, 5 + 24 + 2 + 5 + 48 + 4);
    }
}
