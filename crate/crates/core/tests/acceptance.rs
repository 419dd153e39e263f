//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::binomial;

use saber_accel::accel::{
    decode_instr, encode_instr, footprint_report, model_kem, Instruction, KemOp, MultiplierConfig,
    Opcode,
};
use saber_accel::poly::{pack, schoolbook_negacyclic, unpack, PolyVec, Poly256, N, PACK_WIDTHS};
use saber_accel::sampler::cbd_sample;
use saber_accel::toomcook::{self, EvalVec7, Poly64, PART_LEN};
use saber_accel::{Backend, KeygenSeeds, Saber, SaberParams, Seed};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_public(rng: &mut StdRng) -> Poly256 {
    let mut c = [0u16; N];
    c.iter_mut().for_each(|x| *x = rng.gen_range(0..1 << 13));
    Poly256::from_coeffs(c, 13).unwrap()
}

fn random_secret(rng: &mut StdRng, bound: i16) -> Poly256 {
    let mut c = [0i16; N];
    c.iter_mut().for_each(|x| *x = rng.gen_range(-bound..=bound));
    Poly256::from_signed(&c, 16).unwrap()
}

fn seed(rng: &mut StdRng) -> Seed {
    Seed(rng.gen())
}

fn toom_matches_schoolbook(a: &Poly256, s: &Poly256) -> bool {
    let fast = toomcook::multiply(a, s, 13).unwrap();
    let slow = schoolbook_negacyclic(a.coeffs(), s.coeffs(), 13).unwrap();
    fast.coeffs()[..] == slow[..]
}

fn engine_oracle() -> Outcome {
    let mut rng = StdRng::seed_from_u64(1);
    let mut pairs = Vec::new();
    for _ in 0..1000 {
        pairs.push((random_public(&mut rng), random_secret(&mut rng, 5)));
    }
    let zero = Poly256::zero(13).unwrap();
    let max = Poly256::from_coeffs([0x1FFF; N], 13).unwrap();
    let mut alternating = [0i16; N];
    alternating.iter_mut().enumerate().for_each(|(i, c)| *c = if i % 2 == 0 { 5 } else { -5 });
    let alternating = Poly256::from_signed(&alternating, 16).unwrap();
    let extreme = Poly256::from_signed(&[-5; N], 16).unwrap();
    let mut corners = vec![
        (zero.clone(), extreme.clone()),
        (max.clone(), zero.clone().reduce_to(16).unwrap()),
        (max.clone(), extreme.clone()),
        (max.clone(), alternating.clone()),
        (random_public(&mut rng), alternating.clone()),
    ];
    for k in [0, 1, 3, 4, 63, 64, 127, 128, 255] {
        corners.push((max.clone(), Poly256::monomial(k, 16).unwrap()));
        corners.push((Poly256::monomial(k, 13).unwrap(), extreme.clone()));
        corners.push((Poly256::monomial(k, 13).unwrap(), Poly256::monomial(255 - k, 16).unwrap()));
    }
    let total = pairs.len() + corners.len();
    for (i, (a, s)) in pairs.iter().chain(&corners).enumerate() {
        ensure(toom_matches_schoolbook(a, s), || format!("pair {i} differs"))?;
    }
    Ok(format!("{total} pairs (incl. {} corner cases) equal schoolbook", corners.len()))
}

fn kem_correctness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let trials = 1000;
    for p in SaberParams::ALL {
        let saber = Saber::new(p);
        for t in 0..trials {
            let seeds = KeygenSeeds { seed_a: seed(&mut rng), seed_s: seed(&mut rng), z: seed(&mut rng) };
            let kp = saber.keygen(&seeds).map_err(|e| e.to_string())?;
            let (ct, ss) = saber.encaps(&kp.public_key, &seed(&mut rng)).map_err(|e| e.to_string())?;
            let ss2 = saber.decaps(&kp.secret_key, &ct).map_err(|e| e.to_string())?;
            ensure(ss == ss2, || format!("{} trial {t}: shared secrets differ", p.name))?;
        }
    }
    Ok(format!("{trials} trials per parameter set, 0 failures"))
}

fn backend_compat() -> Outcome {
    let mut rng = StdRng::seed_from_u64(3);
    let trials = 100;
    for p in SaberParams::ALL {
        let toom = Saber::new(p).with_backend(Backend::ToomCook);
        let school = Saber::new(p).with_backend(Backend::Schoolbook);
        for t in 0..trials {
            let seeds = KeygenSeeds { seed_a: seed(&mut rng), seed_s: seed(&mut rng), z: seed(&mut rng) };
            let r = seed(&mut rng);
            let kp1 = toom.keygen(&seeds).unwrap();
            let kp2 = school.keygen(&seeds).unwrap();
            ensure(kp1 == kp2, || format!("{} trial {t}: keys differ", p.name))?;
            let e1 = toom.encaps(&kp1.public_key, &r).unwrap();
            let e2 = school.encaps(&kp2.public_key, &r).unwrap();
            ensure(e1 == e2, || format!("{} trial {t}: ciphertexts differ", p.name))?;
            let d1 = toom.decaps(&kp1.secret_key, &e1.0).unwrap();
            let d2 = school.decaps(&kp2.secret_key, &e2.0).unwrap();
            ensure(d1 == d2 && d1 == e1.1, || format!("{} trial {t}: shared secrets differ", p.name))?;
        }
    }
    Ok(format!("{trials} trials per parameter set, pk/sk/ct/ss byte-identical"))
}

fn lazy_interpolation() -> Outcome {
    let mut rng = StdRng::seed_from_u64(4);
    let trials = 200;
    for l in [2usize, 3, 4] {
        for t in 0..trials {
            let a: PolyVec = (0..l).map(|_| random_public(&mut rng)).collect();
            let s: PolyVec = (0..l).map(|_| random_secret(&mut rng, 5)).collect();
            let lazy = toomcook::inner_product(&a, &s, 13).unwrap();
            let mut eager = Poly256::zero(13).unwrap();
            for (ai, si) in a.iter().zip(s.iter()) {
                eager = eager.add(&toomcook::multiply(ai, si, 13).unwrap()).unwrap();
            }
            ensure(lazy == eager, || format!("l={l} trial {t}: lazy and eager differ"))?;
        }
    }
    Ok(format!("{trials} trials each for l = 2, 3, 4"))
}

fn storage_structure() -> Outcome {
    ensure(std::mem::size_of::<Poly64>() == PART_LEN * 2 && PART_LEN == 64, || {
        "point product is not 64 x 16 bits".into()
    })?;
    ensure(EvalVec7::default().points.iter().all(|p| p.coeffs.len() == 64), || {
        "accumulator point is not 64 coefficients".into()
    })?;
    let a = toomcook::strided_split(&Poly256::from_coeffs([0x1FFF; N], 13).unwrap());
    let prod = toomcook::point_mul(&a[0], &a[1]);
    ensure(prod.coeffs.len() == 64, || "point_mul output is not 64 coefficients".into())?;
    let cfg = MultiplierConfig::default();
    let mut worst = 0;
    for p in SaberParams::ALL {
        let f = footprint_report(&p, &cfg).map_err(|e| e.to_string())?;
        ensure(f.local_bytes_per_unit == 320, || format!("{}: {} B per unit", p.name, f.local_bytes_per_unit))?;
        ensure(f.point_product_coeffs * 2 == f.unreduced_point_product_coeffs + 1, || {
            "point product is not half of the unreduced size".into()
        })?;
        ensure(f.total_with_program_bytes <= 10240, || {
            format!("{}: footprint {} B exceeds 10240", p.name, f.total_with_program_bytes)
        })?;
        worst = worst.max(f.total_with_program_bytes);
    }
    Ok(format!("64 of 127 coefficients per point product, 320 B per unit, largest footprint {worst} B"))
}

fn parallelism_ratio() -> Outcome {
    let one = MultiplierConfig::new(1, 4).unwrap();
    let seven = MultiplierConfig::new(7, 4).unwrap();
    for p in SaberParams::ALL {
        for op in KemOp::ALL {
            let slow = model_kem(op, &p, &one).unwrap().phases.point_mul;
            let fast = model_kem(op, &p, &seven).unwrap().phases.point_mul;
            ensure(fast > 0 && slow == 7 * fast, || format!("{} {op}: {slow} vs {fast}", p.name))?;
        }
    }
    Ok("point-mul phase ratio exactly 7 for every parameter set and operation".into())
}

fn latency_ordering() -> Outcome {
    let cfg = MultiplierConfig::default();
    let p = SaberParams::SABER;
    let reports: Vec<_> = KemOp::ALL.iter().map(|&op| model_kem(op, &p, &cfg).unwrap()).collect();
    let summary = reports
        .iter()
        .zip(KemOp::ALL)
        .map(|(r, op)| format!("{op} {} cycles ({:.1} us @ {} MHz)", r.total_cycles, r.time_us, r.clock_mhz))
        .collect::<Vec<_>>()
        .join(", ");
    ensure(
        reports[0].total_cycles < reports[1].total_cycles && reports[1].total_cycles < reports[2].total_cycles,
        || format!("ordering violated: {summary}"),
    )?;
    Ok(summary)
}

fn isa_codec() -> Outcome {
    let mut rng = StdRng::seed_from_u64(8);
    for op in Opcode::ALL {
        for _ in 0..1000 {
            let i = Instruction::new(op, rng.gen_range(0..1024), rng.gen_range(0..1024)).unwrap();
            let w = encode_instr(&i);
            ensure(w < 1 << 24, || format!("{i} encodes to {w:#x}"))?;
            ensure(decode_instr(w) == Ok(i), || format!("{i} does not round-trip"))?;
        }
    }
    for code in 11u32..16 {
        let w = code << 20 | rng.gen_range(0..1 << 20);
        ensure(decode_instr(w).is_err(), || format!("opcode {code} accepted"))?;
    }
    Ok("11 opcodes x 1000 offset pairs round-trip; opcodes 11..15 rejected".into())
}

fn sampler_statistics() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let mut worst_p = 1.0f64;
    for mu in [6u32, 8, 10] {
        let half = (mu / 2) as i32;
        let polys = 100_000usize.div_ceil(N);
        let mut hist = vec![0u64; mu as usize + 1];
        for _ in 0..polys {
            let mut buf = vec![0u8; N * mu as usize / 8];
            rng.fill(&mut buf[..]);
            let poly = cbd_sample(&buf, mu).unwrap();
            for c in poly.signed_coeffs() {
                let c = c as i32;
                ensure(c.abs() <= half, || format!("mu={mu}: coefficient {c} out of range"))?;
                hist[(c + half) as usize] += 1;
            }
        }
        let n = (polys * N) as f64;
        let stat: f64 = hist
            .iter()
            .enumerate()
            .map(|(k, &obs)| {
                let expected = n * binomial(mu as u64, k as u64) / 2f64.powi(mu as i32);
                (obs as f64 - expected).powi(2) / expected
            })
            .sum();
        let p = 1.0 - ChiSquared::new(mu as f64).unwrap().cdf(stat);
        ensure(p > 0.001, || format!("mu={mu}: chi-square {stat:.2}, p = {p:.2e}"))?;
        worst_p = worst_p.min(p);
    }
    Ok(format!(">= 10^5 coefficients per mu in {{6, 8, 10}}, smallest p = {worst_p:.3}"))
}

fn serialization() -> Outcome {
    let mut rng = StdRng::seed_from_u64(10);
    for bits in PACK_WIDTHS {
        for t in 0..1000 {
            let mut c = [0u16; N];
            c.iter_mut().for_each(|x| *x = (rng.gen::<u32>() & ((1 << bits) - 1)) as u16);
            let poly = Poly256::from_coeffs(c, bits).unwrap();
            let bytes = pack(&poly, bits).unwrap();
            ensure(bytes.len() == N * bits as usize / 8, || format!("width {bits}: {} bytes", bytes.len()))?;
            ensure(unpack(&bytes, bits).unwrap() == poly, || format!("width {bits} trial {t} differs"))?;
        }
    }
    Ok(format!("1000 polynomials for each width in {PACK_WIDTHS:?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("engine-oracle equivalence", engine_oracle),
        ("KEM correctness", kem_correctness),
        ("backend plug-compatibility", backend_compat),
        ("lazy-interpolation equivalence", lazy_interpolation),
        ("storage structure", storage_structure),
        ("parallelism ratio", parallelism_ratio),
        ("latency ordering", latency_ordering),
        ("ISA codec", isa_codec),
        ("sampler statistics", sampler_statistics),
        ("serialization", serialization),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
