//! Known-answer records.
//!
//! A KAT file is a sequence of records separated by one blank line. Each
//! record holds `count`, `seed`, `pk`, `sk`, `ct` and `ss` as `field = value`
//! lines; `count` is decimal, everything else lowercase hex.
//!
//! Record `i` is derived from the 32-byte master seed as
//! `SHAKE128(master || le64(i))` squeezed to 128 bytes, split into
//! `seed_A | seed_s | z | encapsulation randomness`.

use std::fmt::Write as _;

use saber_accel::sampler::xof_expand;
use saber_accel::{KeygenSeeds, Saber, SaberParams, Seed};

pub const RECORD_SEED_BYTES: usize = 128;
pub const FIELDS: [&str; 6] = ["count", "seed", "pk", "sk", "ct", "ss"];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KatRecord {
    pub count: u64,
    pub seed: Vec<u8>,
    pub pk: Vec<u8>,
    pub sk: Vec<u8>,
    pub ct: Vec<u8>,
    pub ss: Vec<u8>,
}

impl KatRecord {
    pub fn generate(params: SaberParams, master: &[u8; 32], count: u64) -> saber_accel::Result<Self> {
        let seed = xof_expand(master, &count.to_le_bytes(), RECORD_SEED_BYTES);
        let part = |i: usize| Seed::from_slice(&seed[32 * i..32 * (i + 1)]);
        let seeds = KeygenSeeds {
            seed_a: part(0)?,
            seed_s: part(1)?,
            z: part(2)?,
        };
        let saber = Saber::new(params);
        let kp = saber.keygen(&seeds)?;
        let (ct, ss) = saber.encaps(&kp.public_key, &part(3)?)?;
        Ok(Self {
            count,
            seed,
            pk: kp.public_key.into_bytes(),
            sk: kp.secret_key.into_bytes(),
            ct: ct.into_bytes(),
            ss: ss.0.to_vec(),
        })
    }

    fn field(&self, name: &str) -> Option<&[u8]> {
        match name {
            "seed" => Some(&self.seed),
            "pk" => Some(&self.pk),
            "sk" => Some(&self.sk),
            "ct" => Some(&self.ct),
            "ss" => Some(&self.ss),
            _ => None,
        }
    }

    fn expected_len(params: &SaberParams, name: &str) -> usize {
        match name {
            "seed" => RECORD_SEED_BYTES,
            "pk" => params.public_key_bytes(),
            "sk" => params.secret_key_bytes(),
            "ct" => params.ciphertext_bytes(),
            _ => 32,
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("count = {}\n", self.count);
        for name in &FIELDS[1..] {
            writeln!(out, "{name} = {}", hex::encode(self.field(name).unwrap())).unwrap();
        }
        out
    }
}

pub fn format_records(records: &[KatRecord]) -> String {
    records
        .iter()
        .map(KatRecord::to_text)
        .collect::<Vec<_>>()
        .join("\n")
}

/// A parsed record and the line each field came from.
#[derive(Debug, Clone)]
pub struct ParsedRecord {
    pub record: KatRecord,
    pub lines: [usize; 6],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub reason: String,
}

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

impl std::error::Error for ParseError {}

/// Parses a KAT file, checking every hex field against the lengths of
/// `params`.
pub fn parse_records(text: &str, params: &SaberParams) -> Result<Vec<ParsedRecord>, ParseError> {
    let mut out = Vec::new();
    let mut pending: Vec<(usize, &str, &str)> = Vec::new();
    let lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    for (line, raw) in lines.chain(std::iter::once((0, ""))) {
        let trimmed = raw.trim();
        if trimmed.starts_with('#') {
            continue;
        }
        if trimmed.is_empty() {
            if !pending.is_empty() {
                out.push(build_record(&pending, params)?);
                pending.clear();
            }
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| ParseError {
            line,
            reason: "expected `field = value`".into(),
        })?;
        pending.push((line, key.trim(), value.trim()));
    }
    Ok(out)
}

fn build_record(fields: &[(usize, &str, &str)], params: &SaberParams) -> Result<ParsedRecord, ParseError> {
    let first_line = fields[0].0;
    let mut lines = [0usize; 6];
    let mut values: [Option<&str>; 6] = [None; 6];
    for &(line, key, value) in fields {
        let idx = FIELDS.iter().position(|f| *f == key).ok_or_else(|| ParseError {
            line,
            reason: format!("unknown field {key:?}"),
        })?;
        if values[idx].is_some() {
            return Err(ParseError {
                line,
                reason: format!("duplicate field {key:?}"),
            });
        }
        values[idx] = Some(value);
        lines[idx] = line;
    }
    if let Some(missing) = FIELDS.iter().zip(&values).find(|(_, v)| v.is_none()) {
        return Err(ParseError {
            line: first_line,
            reason: format!("record is missing field {:?}", missing.0),
        });
    }
    let count = values[0].unwrap().parse::<u64>().map_err(|_| ParseError {
        line: lines[0],
        reason: "count is not a decimal integer".into(),
    })?;
    let mut bytes: Vec<Vec<u8>> = Vec::with_capacity(5);
    for i in 1..FIELDS.len() {
        let decoded = hex::decode(values[i].unwrap()).map_err(|e| ParseError {
            line: lines[i],
            reason: format!("{}: {e}", FIELDS[i]),
        })?;
        let expected = KatRecord::expected_len(params, FIELDS[i]);
        if decoded.len() != expected {
            return Err(ParseError {
                line: lines[i],
                reason: format!("{} is {} bytes, {} expects {expected}", FIELDS[i], decoded.len(), params.name),
            });
        }
        bytes.push(decoded);
    }
    let mut it = bytes.into_iter();
    let mut next = || it.next().unwrap();
    Ok(ParsedRecord {
        record: KatRecord {
            count,
            seed: next(),
            pk: next(),
            sk: next(),
            ct: next(),
            ss: next(),
        },
        lines,
    })
}

/// First difference between a parsed record and its regeneration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mismatch {
    pub record: usize,
    pub field: &'static str,
    pub line: usize,
}

impl std::fmt::Display for Mismatch {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "record {} (line {}): field `{}` does not match", self.record, self.line, self.field)
    }
}

pub fn compare(index: usize, parsed: &ParsedRecord, expected: &KatRecord) -> Option<Mismatch> {
    let got = &parsed.record;
    let mismatch = |i: usize| Mismatch {
        record: index,
        field: FIELDS[i],
        line: parsed.lines[i],
    };
    if got.count != expected.count {
        return Some(mismatch(0));
    }
    (1..FIELDS.len())
        .find(|&i| got.field(FIELDS[i]) != expected.field(FIELDS[i]))
        .map(mismatch)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MASTER: [u8; 32] = [7; 32];

    #[test]
    fn records_round_trip_through_text() {
        let p = SaberParams::LIGHTSABER;
        let recs: Vec<_> = (0..3).map(|i| KatRecord::generate(p, &MASTER, i).unwrap()).collect();
        let text = format_records(&recs);
        assert_eq!(text.matches("\n\n").count(), 2);
        let parsed = parse_records(&text, &p).unwrap();
        assert_eq!(parsed.len(), 3);
        for (i, pr) in parsed.iter().enumerate() {
            assert_eq!(pr.record, recs[i]);
            assert_eq!(compare(i, pr, &recs[i]), None);
        }
        assert_eq!(parsed[1].lines[0], 8);
        assert!(parse_records("", &p).unwrap().is_empty());
    }

    #[test]
    fn record_seed_is_reproducible() {
        let rec = KatRecord::generate(SaberParams::SABER, &MASTER, 5).unwrap();
        assert_eq!(rec.seed, xof_expand(&MASTER, &5u64.to_le_bytes(), 128));
        assert_ne!(rec, KatRecord::generate(SaberParams::SABER, &MASTER, 6).unwrap());
    }

    #[test]
    fn parse_errors_name_lines() {
        let p = SaberParams::LIGHTSABER;
        let text = KatRecord::generate(p, &MASTER, 0).unwrap().to_text();
        let bad = text.replacen("ct = ", "ct = zz", 1);
        assert_eq!(parse_records(&bad, &p).unwrap_err().line, 5);
        let short = text.replacen("ss = ", "ss = 00", 1);
        assert_eq!(parse_records(&short, &p).unwrap_err().line, 6);
        let junk = format!("{text}\nhello\n");
        assert_eq!(parse_records(&junk, &p).unwrap_err().line, 8);
        let missing: String = text.lines().filter(|l| !l.starts_with("sk")).map(|l| format!("{l}\n")).collect();
        assert!(parse_records(&missing, &p).unwrap_err().reason.contains("sk"));
    }

    #[test]
    fn mismatch_names_field_and_line() {
        let p = SaberParams::LIGHTSABER;
        let rec = KatRecord::generate(p, &MASTER, 0).unwrap();
        let mut parsed = parse_records(&rec.to_text(), &p).unwrap().remove(0);
        parsed.record.ct[3] ^= 1;
        let m = compare(0, &parsed, &rec).unwrap();
        assert_eq!((m.field, m.line), ("ct", 5));
    }
}
