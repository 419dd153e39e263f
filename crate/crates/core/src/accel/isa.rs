//! 24-bit instruction words: `[23:20]` opcode, `[19:10]` first offset,
//! `[9:0]` second offset.

use std::fmt;

use crate::error::{Error, Result};

pub const OFFSET_BITS: u32 = 10;
pub const OPCODE_BITS: u32 = 4;
pub const MAX_OFFSET: u16 = (1 << OFFSET_BITS) - 1;

/// The eleven operations of the co-processor model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Opcode {
    LoadOperand = 0,
    StoreResult = 1,
    GenMatrixStep = 2,
    SampleSecret = 3,
    Eval = 4,
    PointMul = 5,
    Interpolate = 6,
    RecombineRound = 7,
    HashStep = 8,
    Pack = 9,
    Halt = 10,
}

impl Opcode {
    pub const ALL: [Opcode; 11] = [
        Opcode::LoadOperand,
        Opcode::StoreResult,
        Opcode::GenMatrixStep,
        Opcode::SampleSecret,
        Opcode::Eval,
        Opcode::PointMul,
        Opcode::Interpolate,
        Opcode::RecombineRound,
        Opcode::HashStep,
        Opcode::Pack,
        Opcode::Halt,
    ];

    pub fn from_code(code: u8) -> Result<Self> {
        Self::ALL
            .get(code as usize)
            .copied()
            .ok_or(Error::InvalidOpcode(code))
    }

    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn mnemonic(self) -> &'static str {
        match self {
            Opcode::LoadOperand => "LOAD_OPERAND",
            Opcode::StoreResult => "STORE_RESULT",
            Opcode::GenMatrixStep => "GEN_MATRIX_STEP",
            Opcode::SampleSecret => "SAMPLE_SECRET",
            Opcode::Eval => "EVAL",
            Opcode::PointMul => "POINT_MUL",
            Opcode::Interpolate => "INTERPOLATE",
            Opcode::RecombineRound => "RECOMBINE_ROUND",
            Opcode::HashStep => "HASH_STEP",
            Opcode::Pack => "PACK",
            Opcode::Halt => "HALT",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|op| op.mnemonic().eq_ignore_ascii_case(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Instruction {
    pub opcode: Opcode,
    pub off_a: u16,
    pub off_b: u16,
}

impl Instruction {
    pub fn new(opcode: Opcode, off_a: u16, off_b: u16) -> Result<Self> {
        for v in [off_a, off_b] {
            if v > MAX_OFFSET {
                return Err(Error::FieldOverflow {
                    value: v as u32,
                    bits: OFFSET_BITS,
                });
            }
        }
        Ok(Self {
            opcode,
            off_a,
            off_b,
        })
    }

    pub fn encode(&self) -> u32 {
        encode_instr(self)
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}, {}", self.opcode.mnemonic(), self.off_a, self.off_b)
    }
}

pub fn encode_instr(i: &Instruction) -> u32 {
    (u32::from(i.opcode.code()) << 20)
        | (u32::from(i.off_a & MAX_OFFSET) << OFFSET_BITS)
        | u32::from(i.off_b & MAX_OFFSET)
}

pub fn decode_instr(word: u32) -> Result<Instruction> {
    if word >> 24 != 0 {
        return Err(Error::WordTooWide(word));
    }
    let opcode = Opcode::from_code((word >> 20) as u8)?;
    Ok(Instruction {
        opcode,
        off_a: ((word >> OFFSET_BITS) as u16) & MAX_OFFSET,
        off_b: (word as u16) & MAX_OFFSET,
    })
}

fn parse_offset(tok: &str, line: usize) -> Result<u16> {
    let parsed = match tok.strip_prefix("0x").or_else(|| tok.strip_prefix("0X")) {
        Some(hex) => u16::from_str_radix(hex, 16),
        None => tok.parse::<u16>(),
    };
    let v = parsed.map_err(|_| Error::Parse {
        line,
        reason: format!("bad offset {tok:?}"),
    })?;
    if v > MAX_OFFSET {
        return Err(Error::Parse {
            line,
            reason: format!("offset {v} exceeds {MAX_OFFSET}"),
        });
    }
    Ok(v)
}

/// Parses assembly text: one `MNEMONIC off_a, off_b` per line, offsets in
/// decimal or `0x` hex. Missing offsets default to 0. `#` and `;` start
/// comments.
pub fn parse_program(text: &str) -> Result<Vec<Instruction>> {
    let mut prog = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let code = raw.split(['#', ';']).next().unwrap_or("").trim();
        if code.is_empty() {
            continue;
        }
        let mut toks = code
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty());
        let mnemonic = toks.next().expect("non-empty line");
        let opcode = Opcode::from_mnemonic(mnemonic).ok_or_else(|| Error::Parse {
            line,
            reason: format!("unknown mnemonic {mnemonic:?}"),
        })?;
        let offs = toks
            .map(|t| parse_offset(t, line))
            .collect::<Result<Vec<_>>>()?;
        if offs.len() > 2 {
            return Err(Error::Parse {
                line,
                reason: "more than two operands".into(),
            });
        }
        let get = |i: usize| offs.get(i).copied().unwrap_or(0);
        prog.push(Instruction::new(opcode, get(0), get(1))?);
    }
    Ok(prog)
}

pub fn format_program(prog: &[Instruction]) -> String {
    prog.iter().map(|i| format!("{i}\n")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encode_examples() {
        let zero = Instruction::new(Opcode::LoadOperand, 0, 0).unwrap();
        assert_eq!(zero.encode(), 0x000000);
        let i = Instruction::new(Opcode::SampleSecret, 0x155, 0x2AA).unwrap();
        // 0011 | 01_0101_0101 | 10_1010_1010
        assert_eq!(i.encode(), 0x3556AA);
        assert_eq!(decode_instr(0x3556AA).unwrap(), i);
    }

    #[test]
    fn decode_rejects_bad_words() {
        assert_eq!(decode_instr(0xB00000), Err(Error::InvalidOpcode(11)));
        assert_eq!(decode_instr(0xF00000), Err(Error::InvalidOpcode(15)));
        assert_eq!(decode_instr(0x1000000), Err(Error::WordTooWide(0x1000000)));
        assert!(Instruction::new(Opcode::Eval, 1024, 0).is_err());
    }

    #[test]
    fn assembly_round_trip() {
        let text = "# demo\nGEN_MATRIX_STEP 0x10, 3\n  eval 1 0 ; secret side\n\nHALT\n";
        let prog = parse_program(text).unwrap();
        assert_eq!(prog.len(), 3);
        assert_eq!(prog[0], Instruction::new(Opcode::GenMatrixStep, 16, 3).unwrap());
        assert_eq!(prog[2].opcode, Opcode::Halt);
        assert_eq!(parse_program(&format_program(&prog)).unwrap(), prog);
    }

    #[test]
    fn assembly_errors_carry_line_numbers() {
        let err = parse_program("HALT\nFROB 1, 2\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
        let err = parse_program("EVAL 2000, 0").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
        let err = parse_program("EVAL 1, 2, 3").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
