//! `saber-accel`: key exchange on files, KAT generation and verification,
//! multiplier benchmarks and accelerator-model reports.
//!
//! Exit codes: 0 success, 1 verification or correctness mismatch, 2 usage
//! or IO error.

mod kat;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use saber_accel::accel::{
    footprint_report, model_kem, parse_program, run_program, CycleReport, DataMemory, Footprint,
    KemOp, MultiplierConfig, DATA_BYTES,
};
use saber_accel::poly::PolyVec;
use saber_accel::sampler::{gen_matrix, gen_secret, xof_expand};
use saber_accel::{
    Backend, Ciphertext, KeygenSeeds, PublicKey, Saber, SaberParams, SecretKey, Seed,
};

use kat::{compare, format_records, parse_records, KatRecord};

#[derive(Parser)]
#[command(name = "saber-accel", version, about = "Saber KEM with a striding Toom-Cook multiplier")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a key pair into raw binary files.
    Keygen(KeygenArgs),
    /// Encapsulate against a public key file.
    Encaps(EncapsArgs),
    /// Decapsulate a ciphertext file with a secret key file.
    Decaps(DecapsArgs),
    /// Generate or verify known-answer records.
    Kat(KatArgs),
    /// Time inner products on one multiplier backend.
    Bench(BenchArgs),
    /// Cycle report of a KEM operation on the accelerator model.
    Simulate(SimulateArgs),
    /// Byte accounting of the accelerator's storage.
    Footprint(FootprintArgs),
    /// Print the canned micro-program of a KEM operation as assembly.
    Program(ProgramArgs),
    /// Run an assembly micro-program on the accelerator model.
    Run(RunArgs),
}

#[derive(Args)]
struct ParamsArg {
    /// Parameter set: lightsaber, saber or firesaber.
    #[arg(long, default_value = "saber")]
    params: SaberParams,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct Randomness {
    /// File holding the seed bytes.
    #[arg(long)]
    seed_file: Option<PathBuf>,
    /// Draw the seed from the operating system.
    #[arg(long)]
    os_random: bool,
}

#[derive(Args)]
struct KeygenArgs {
    #[command(flatten)]
    params: ParamsArg,
    /// 64-byte seed file: seed_A followed by seed_s. The implicit-rejection
    /// value z is SHAKE128(seed file || "z") truncated to 32 bytes.
    #[command(flatten)]
    randomness: Randomness,
    #[arg(long)]
    out_pk: PathBuf,
    #[arg(long)]
    out_sk: PathBuf,
}

#[derive(Args)]
struct EncapsArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long)]
    pk: PathBuf,
    /// 32-byte seed file for the encapsulation randomness.
    #[command(flatten)]
    randomness: Randomness,
    #[arg(long)]
    out_ct: PathBuf,
    #[arg(long)]
    out_ss: PathBuf,
    /// Also print the shared secret as hex.
    #[arg(long)]
    print_ss: bool,
}

#[derive(Args)]
struct DecapsArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long)]
    sk: PathBuf,
    #[arg(long)]
    ct: PathBuf,
    #[arg(long)]
    out_ss: Option<PathBuf>,
    /// Print the shared secret as hex.
    #[arg(long)]
    print_ss: bool,
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct KatMode {
    /// Write records to this file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the records in this file.
    #[arg(long)]
    verify: Option<PathBuf>,
}

#[derive(Args)]
struct KatArgs {
    #[command(flatten)]
    params: ParamsArg,
    /// Records to generate; when verifying, the number the file must hold.
    #[arg(long)]
    count: Option<u64>,
    /// 32-byte master seed in hex.
    #[arg(long)]
    seed: String,
    #[command(flatten)]
    mode: KatMode,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    params: ParamsArg,
    #[arg(long, default_value = "toomcook")]
    backend: Backend,
    #[arg(long, default_value_t = 100)]
    iters: u64,
    /// Report coefficient multiplications per inner product instead of timing.
    #[arg(long)]
    op_count: bool,
    /// Seed for the operand pool.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, Default, ValueEnum)]
enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Args)]
struct ModelArgs {
    #[command(flatten)]
    params: ParamsArg,
    /// Parallel point multipliers (1-7).
    #[arg(long, default_value_t = 7)]
    units: usize,
    /// MAC units per point multiplier.
    #[arg(long, default_value_t = 4)]
    macs: usize,
    /// Keep every evaluated secret polynomial in the units.
    #[arg(long)]
    cache_secret_eval: bool,
}

impl ModelArgs {
    fn config(&self) -> Result<MultiplierConfig, Failure> {
        let mut cfg = MultiplierConfig::new(self.units, self.macs)?;
        cfg.cache_secret_eval = self.cache_secret_eval;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, default_value = "keygen")]
    op: KemOp,
    #[command(flatten)]
    model: ModelArgs,
    /// Clock used for the derived time, in MHz.
    #[arg(long, default_value_t = 160.0)]
    clock: f64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    /// Also write the report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct FootprintArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

#[derive(Args)]
struct ProgramArgs {
    #[arg(long)]
    op: KemOp,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct RunArgs {
    /// Assembly text, one instruction per line.
    #[arg(long)]
    program: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Initial memory image (at most 8192 bytes, loaded at word 0).
    #[arg(long)]
    mem_in: Option<PathBuf>,
    /// Write the final 8192-byte memory image here.
    #[arg(long)]
    mem_out: Option<PathBuf>,
    #[arg(long, default_value_t = 160.0)]
    clock: f64,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
}

enum Failure {
    /// Verification or correctness mismatch.
    Mismatch(String),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

impl From<saber_accel::Error> for Failure {
    fn from(e: saber_accel::Error) -> Self {
        Failure::Usage(e.into())
    }
}

type CmdResult = Result<(), Failure>;

fn read_file(path: &Path) -> anyhow::Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write_file(path: &Path, bytes: &[u8]) -> anyhow::Result<()> {
    fs::write(path, bytes).with_context(|| format!("cannot write {}", path.display()))
}

fn seed_bytes(r: &Randomness, len: usize) -> anyhow::Result<Vec<u8>> {
    let bytes = match &r.seed_file {
        Some(path) => read_file(path)?,
        None => {
            let mut buf = vec![0u8; len];
            getrandom::getrandom(&mut buf).map_err(|e| anyhow!("OS randomness: {e}"))?;
            buf
        }
    };
    if bytes.len() != len {
        return Err(anyhow!("seed must be exactly {len} bytes, got {}", bytes.len()));
    }
    Ok(bytes)
}

fn keygen(args: KeygenArgs) -> CmdResult {
    let params = args.params.params;
    let seed = seed_bytes(&args.randomness, 64)?;
    let z = xof_expand(&seed, b"z", 32);
    let seeds = KeygenSeeds {
        seed_a: Seed::from_slice(&seed[..32])?,
        seed_s: Seed::from_slice(&seed[32..])?,
        z: Seed::from_slice(&z)?,
    };
    let kp = Saber::new(params).keygen(&seeds)?;
    write_file(&args.out_pk, kp.public_key.as_bytes())?;
    write_file(&args.out_sk, kp.secret_key.as_bytes())?;
    println!("params = {}", params.name);
    println!("pk_bytes = {}", kp.public_key.as_bytes().len());
    println!("sk_bytes = {}", kp.secret_key.as_bytes().len());
    Ok(())
}

fn encaps(args: EncapsArgs) -> CmdResult {
    let params = args.params.params;
    let pk = PublicKey::from_bytes(&params, &read_file(&args.pk)?)?;
    let seed = Seed::from_slice(&seed_bytes(&args.randomness, 32)?)?;
    let (ct, ss) = Saber::new(params).encaps(&pk, &seed)?;
    write_file(&args.out_ct, ct.as_bytes())?;
    write_file(&args.out_ss, &ss.0)?;
    println!("ct_bytes = {}", ct.as_bytes().len());
    if args.print_ss {
        println!("ss = {}", hex::encode(ss.0));
    }
    Ok(())
}

fn decaps(args: DecapsArgs) -> CmdResult {
    let params = args.params.params;
    if args.out_ss.is_none() && !args.print_ss {
        return Err(anyhow!("nothing to do: give --out-ss and/or --print-ss").into());
    }
    let sk = SecretKey::from_bytes(&params, &read_file(&args.sk)?)?;
    let ct = Ciphertext::from_bytes(&params, &read_file(&args.ct)?)?;
    let ss = Saber::new(params).decaps(&sk, &ct)?;
    if let Some(path) = &args.out_ss {
        write_file(path, &ss.0)?;
    }
    if args.print_ss {
        println!("ss = {}", hex::encode(ss.0));
    }
    Ok(())
}

fn kat(args: KatArgs) -> CmdResult {
    let params = args.params.params;
    let master: [u8; 32] = hex::decode(args.seed.trim())
        .ok()
        .and_then(|b| b.try_into().ok())
        .ok_or_else(|| anyhow!("--seed must be 64 hex digits"))?;
    if let Some(path) = &args.mode.out {
        let count = args.count.unwrap_or(10);
        let records = (0..count)
            .map(|i| KatRecord::generate(params, &master, i))
            .collect::<saber_accel::Result<Vec<_>>>()?;
        write_file(path, format_records(&records).as_bytes())?;
        println!("wrote {count} {} records to {}", params.name, path.display());
        return Ok(());
    }
    let path = args.mode.verify.as_ref().expect("clap group");
    let text = String::from_utf8(read_file(path)?)
        .map_err(|_| anyhow!("{} is not UTF-8 text", path.display()))?;
    let parsed = parse_records(&text, &params).map_err(|e| anyhow!("{}: {e}", path.display()))?;
    if let Some(count) = args.count {
        if parsed.len() as u64 != count {
            return Err(Failure::Mismatch(format!(
                "expected {count} records, file holds {}",
                parsed.len()
            )));
        }
    }
    for (i, pr) in parsed.iter().enumerate() {
        let expected = KatRecord::generate(params, &master, i as u64)?;
        if let Some(m) = compare(i, pr, &expected) {
            return Err(Failure::Mismatch(m.to_string()));
        }
    }
    println!("verified {} {} records", parsed.len(), params.name);
    Ok(())
}

fn bench(args: BenchArgs) -> CmdResult {
    let params = args.params.params;
    if args.op_count {
        for backend in [Backend::Schoolbook, Backend::ToomCook] {
            println!(
                "multiplies.{backend} = {}",
                backend.coefficient_multiplies(params.l)
            );
        }
        return Ok(());
    }
    // Realistic operands: matrix rows and binomial secrets from seeded XOFs.
    let pool: Vec<(PolyVec, PolyVec)> = (0..8u64)
        .map(|i| {
            let s = xof_expand(&args.seed.to_le_bytes(), &i.to_le_bytes(), 64);
            let a = gen_matrix(&Seed::from_slice(&s[..32]).unwrap(), &params).line(0, false);
            let b = gen_secret(&Seed::from_slice(&s[32..]).unwrap(), &params);
            (a, b)
        })
        .collect();
    for (i, (a, b)) in pool.iter().enumerate() {
        let x = Backend::Schoolbook.inner_product(a, b, params.eq)?;
        let y = Backend::ToomCook.inner_product(a, b, params.eq)?;
        if x != y {
            return Err(Failure::Mismatch(format!(
                "backends disagree on pre-check operand {i}; refusing to benchmark"
            )));
        }
    }
    let start = Instant::now();
    for i in 0..args.iters {
        let (a, b) = &pool[i as usize % pool.len()];
        std::hint::black_box(args.backend.inner_product(a, b, params.eq)?);
    }
    let secs = start.elapsed().as_secs_f64();
    let rate = if args.iters == 0 { 0.0 } else { args.iters as f64 / secs };
    println!("params = {}", params.name);
    println!("backend = {}", args.backend);
    println!("precheck = ok ({} operand pairs)", pool.len());
    println!("iters = {}", args.iters);
    println!("elapsed_s = {secs:.6}");
    println!("inner_products_per_s = {rate:.1}");
    println!(
        "multiplies_per_inner_product = {}",
        args.backend.coefficient_multiplies(params.l)
    );
    Ok(())
}

fn render(report: &CycleReport, footprint: &Footprint, format: Format) -> String {
    match format {
        Format::Text => format!(
            "{}memory_bytes = {}\nmemory_with_program_bytes = {}\n",
            report.to_kv_text(),
            footprint.total_bytes,
            footprint.total_with_program_bytes
        ),
        Format::Json => {
            let v = serde_json::json!({ "report": report, "footprint": footprint });
            serde_json::to_string_pretty(&v).expect("plain data") + "\n"
        }
    }
}

fn simulate(args: SimulateArgs) -> CmdResult {
    let params = args.model.params.params;
    let cfg = args.model.config()?;
    if !(args.clock.is_finite() && args.clock > 0.0) {
        return Err(anyhow!("--clock must be a positive number of MHz").into());
    }
    let report = model_kem(args.op, &params, &cfg)?.with_clock(args.clock);
    let footprint = footprint_report(&params, &cfg)?;
    let text = render(&report, &footprint, args.format);
    print!("{text}");
    if let Some(path) = &args.out {
        write_file(path, text.as_bytes())?;
    }
    Ok(())
}

fn footprint(args: FootprintArgs) -> CmdResult {
    let params = args.model.params.params;
    let f = footprint_report(&params, &args.model.config()?)?;
    match args.format {
        Format::Text => print!("{}", f.to_kv_text()),
        Format::Json => println!("{}", f.to_json()),
    }
    Ok(())
}

fn program(args: ProgramArgs) -> CmdResult {
    let params = args.model.params.params;
    let prog = args.op.program(&params, &args.model.config()?);
    println!("# {} {} ({} instructions)", params.name, args.op, prog.len());
    print!("{}", saber_accel::accel::format_program(&prog));
    Ok(())
}

fn run(args: RunArgs) -> CmdResult {
    let params = args.model.params.params;
    let cfg = args.model.config()?;
    let text = String::from_utf8(read_file(&args.program)?)
        .map_err(|_| anyhow!("{} is not UTF-8 text", args.program.display()))?;
    let prog = parse_program(&text).with_context(|| args.program.display().to_string())?;
    let mut mem = DataMemory::new();
    if let Some(path) = &args.mem_in {
        let mut image = read_file(path)?;
        if image.len() > DATA_BYTES {
            return Err(anyhow!("memory image is {} bytes, limit is {DATA_BYTES}", image.len()).into());
        }
        image.resize(image.len().next_multiple_of(8), 0);
        mem.load_bytes(0, &image)?;
    }
    let (mem, report) = run_program(&prog, mem, &params, &cfg)?;
    let report = report.with_clock(args.clock);
    match args.format {
        Format::Text => print!("{}", report.to_kv_text()),
        Format::Json => println!("{}", report.to_json()),
    }
    if let Some(path) = &args.mem_out {
        write_file(path, &mem.dump_bytes(0, DATA_BYTES / 8)?)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Keygen(a) => keygen(a),
        Command::Encaps(a) => encaps(a),
        Command::Decaps(a) => decaps(a),
        Command::Kat(a) => kat(a),
        Command::Bench(a) => bench(a),
        Command::Simulate(a) => simulate(a),
        Command::Footprint(a) => footprint(a),
        Command::Program(a) => program(a),
        Command::Run(a) => run(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            eprintln!("mismatch: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
