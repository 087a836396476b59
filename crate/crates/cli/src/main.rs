use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use triquad_core::harness::{
    verify_pair, write_csv, write_json, DEFAULT_PRECISION_BITS, MAX_PRECISION_BITS,
};
use triquad_core::classnumber::{SubfieldH2, DEFAULT_QUAD_BOUND};
use triquad_core::theorems::classify_pair;
use triquad_core::unit_lattice::CharacterScreen;
use triquad_core::{scan_pairs, Error, PairUnits, PrimePair, Status, VerificationRecord, VerifyConfig};

const EXIT_USAGE: u8 = 1;

#[derive(Parser)]
#[command(name = "triquad", version, about = "Units and 2-class numbers of Q(√2, √p, √q)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Args)]
struct Options {
    /// Working precision of the interval independence check.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION_BITS,
          value_parser = clap::value_parser!(u64).range(64..=MAX_PRECISION_BITS))]
    precision_bits: u64,
    /// Largest radicand whose class number is computed.
    #[arg(long, global = true, default_value_t = DEFAULT_QUAD_BOUND)]
    quad_bound: u64,
    /// Worker threads for `scan` (0 picks the number of CPUs).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Record wall time per pair.
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Args, Clone, Copy)]
struct PairArgs {
    /// Prime with p ≡ 1 (mod 8).
    p: u64,
    /// Prime with q ≡ 7 (mod 8).
    q: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Theorem case, square classes and resolved bits.
    Classify(PairArgs),
    /// Fundamental system of units.
    Units(PairArgs),
    /// 2-class numbers of the quadratic subfields and of K.
    H2(PairArgs),
    /// Run every cross-check for one pair.
    Verify(PairArgs),
    /// Verify all pairs with p ≤ P and q ≤ Q.
    Scan {
        #[arg(long = "pmax")]
        p_max: u64,
        #[arg(long = "qmax")]
        q_max: u64,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(e) => {
            eprintln!("triquad: {e}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}

fn config(opts: &Options) -> VerifyConfig {
    VerifyConfig {
        precision_bits: opts.precision_bits,
        quad_bound: opts.quad_bound,
        timings: opts.timings,
    }
}

fn open_output(opts: &Options) -> io::Result<Box<dyn Write>> {
    Ok(match &opts.out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn pair(args: PairArgs) -> Result<PrimePair, Error> {
    PrimePair::new(args.p, args.q)
}

fn run(cli: Cli) -> Result<Status, Box<dyn std::error::Error>> {
    let opts = &cli.opts;
    let config = config(opts);
    config.validate()?;
    match cli.command {
        Command::Classify(args) => {
            let pair = pair(args)?;
            let units = PairUnits::new(pair)?;
            let tag = classify_pair(&units, &CharacterScreen::new(pair))?;
            let mut out = open_output(opts)?;
            match opts.format {
                Format::Json => write_json(&mut out, &tag)?,
                _ => {
                    writeln!(out, "pair      ({}, {})", pair.p, pair.q)?;
                    writeln!(out, "case      {}", tag.theorem)?;
                    writeln!(out, "(p/q)     {}", tag.legendre_pq)?;
                    writeln!(out, "N(ε2p)    {}", tag.norm_eps2p)?;
                    writeln!(out, "x+1 class {}", tag.x_class.label())?;
                    writeln!(out, "v+1 class {}", tag.v_class.label())?;
                    if let Some(u) = tag.u {
                        writeln!(out, "u         {u}")?;
                    }
                    for r in &tag.resolutions {
                        writeln!(out, "{:<9} {}  ({})", r.name, r.bit, r.core)?;
                    }
                }
            }
            out.flush()?;
            Ok(Status::Verified)
        }
        Command::Units(args) => {
            let rec = verify_pair(pair(args)?, &config);
            let mut out = open_output(opts)?;
            match opts.format {
                Format::Json => write_json(&mut out, &rec.generators)?,
                _ => {
                    for g in &rec.generators {
                        writeln!(out, "{}  {}", g.fingerprint, g.word)?;
                    }
                }
            }
            out.flush()?;
            Ok(rec.status)
        }
        Command::H2(args) => {
            let pair = pair(args)?;
            let rec = verify_pair(pair, &config);
            let mut out = open_output(opts)?;
            match (opts.format, &rec.class_numbers) {
                (Format::Json, Some(cn)) => write_json(&mut out, cn)?,
                (Format::Json, None) => write_json(&mut out, &rec.h2)?,
                _ => {
                    let h2 = SubfieldH2::compute(pair, config.quad_bound)?;
                    for m in 1..8 {
                        writeln!(out, "h2(Q(√{})) = {}", pair.radicand(m), h2.get(m))?;
                    }
                    if let Some(cn) = &rec.class_numbers {
                        writeln!(out, "m = {}", cn.m)?;
                        writeln!(out, "h2(K) = {} (Kuroda), {} (theorem)", cn.h2k_kuroda, cn.h2k_theorem)?;
                    }
                }
            }
            out.flush()?;
            Ok(rec.status)
        }
        Command::Verify(args) => {
            let rec = verify_pair(pair(args)?, &config);
            let mut out = open_output(opts)?;
            match opts.format {
                Format::Json => write_json(&mut out, &rec)?,
                Format::Csv => write_csv(&mut out, std::slice::from_ref(&rec))?,
                Format::Text => write_record_text(&mut out, &rec)?,
            }
            out.flush()?;
            Ok(rec.status)
        }
        Command::Scan { p_max, q_max } => {
            let report = scan_pairs(p_max, q_max, &config, opts.jobs)?;
            let mut out = open_output(opts)?;
            match opts.format {
                Format::Json => write_json(&mut out, &report)?,
                Format::Csv => write_csv(&mut out, &report.records)?,
                Format::Text => {
                    for rec in &report.records {
                        let case = rec.case.as_ref().map_or("-".into(), |t| t.theorem.to_string());
                        writeln!(
                            out,
                            "({:>5}, {:>5})  {:<4} m={:<2} h2(K)={:<4} {}",
                            rec.pair.p,
                            rec.pair.q,
                            case,
                            rec.m.map_or("-".into(), |m| m.to_string()),
                            rec.h2.get("K").map_or("-".into(), |h| h.to_string()),
                            rec.status.label()
                        )?;
                    }
                    let s = &report.summary;
                    writeln!(out, "\n{} pairs", s.pairs)?;
                    for (case, n) in &s.by_case {
                        writeln!(out, "  {case:<4} {n}")?;
                    }
                    for (status, n) in &s.by_status {
                        writeln!(out, "  {status:<20} {n}")?;
                    }
                    write!(out, "\n{}", s.matrix_table())?;
                }
            }
            out.flush()?;
            Ok(worst(report.records.iter().map(|r| r.status)))
        }
    }
}

/// Mismatches outrank precision failures, which outrank resource guards.
fn worst(statuses: impl Iterator<Item = Status>) -> Status {
    statuses
        .max_by_key(|s| match s {
            Status::Verified => 0,
            Status::ResourceGuard => 1,
            Status::PrecisionExhausted => 2,
            Status::TheoremMismatch => 3,
        })
        .unwrap_or(Status::Verified)
}

fn write_record_text(out: &mut dyn Write, rec: &VerificationRecord) -> io::Result<()> {
    writeln!(out, "pair    ({}, {})", rec.pair.p, rec.pair.q)?;
    if let Some(tag) = &rec.case {
        writeln!(out, "case    {}", tag.theorem)?;
    }
    if let Some(m) = rec.m {
        writeln!(out, "m       {m}")?;
    }
    for g in &rec.generators {
        writeln!(out, "unit    {}  {}", g.fingerprint, g.word)?;
    }
    for (d, h) in &rec.h2 {
        writeln!(out, "h2({d}) = {h}")?;
    }
    for c in &rec.checks {
        let mark = match (c.passed, c.required) {
            (true, _) => "ok  ",
            (false, true) => "FAIL",
            (false, false) => "note",
        };
        if c.detail.is_empty() {
            writeln!(out, "{mark} {}", c.name)?;
        } else {
            writeln!(out, "{mark} {}: {}", c.name, c.detail)?;
        }
    }
    let held = rec.tables.iter().filter(|t| t.holds).count();
    writeln!(out, "tables  {held}/{} entries hold", rec.tables.len())?;
    if let Some(e) = &rec.error {
        writeln!(out, "error   {e}")?;
    }
    if let Some(ms) = rec.wall_time_ms {
        writeln!(out, "time    {ms} ms")?;
    }
    writeln!(out, "status  {}", rec.status.label())
}
