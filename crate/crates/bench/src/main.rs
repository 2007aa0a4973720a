use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{ArgGroup, Parser, ValueEnum};
use osd_core::codes::{default_order, load_generator};
use osd_core::simbench::{parse_snr_grid, run_campaign, to_csv, to_json, CampaignConfig, DecoderKind, OutputFormat};
use osd_core::CodeSpec;

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Decoder {
    OriginalOsd,
    StandardOsd,
    Adaptive,
    MlOracle,
}

impl From<Decoder> for DecoderKind {
    fn from(d: Decoder) -> Self {
        match d {
            Decoder::OriginalOsd => DecoderKind::OriginalOsd,
            Decoder::StandardOsd => DecoderKind::StandardOsd,
            Decoder::Adaptive => DecoderKind::Adaptive,
            Decoder::MlOracle => DecoderKind::MlOracle,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

/// Monte-Carlo BLER and complexity benchmark for OSD decoders over BPSK/AWGN.
#[derive(Debug, Parser)]
#[command(name = "decode-bench", version)]
#[command(group(ArgGroup::new("source").required(true).args(["code", "code_file"])))]
struct Args {
    /// Bundled code name (see --list-codes).
    #[arg(long)]
    code: Option<String>,
    /// Generator matrix file: header "n k [d]" followed by k rows of 0/1.
    #[arg(long, value_name = "PATH")]
    code_file: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "adaptive")]
    decoder: Decoder,
    /// Reprocessing order; defaults to the order derived from the minimum distance.
    #[arg(long)]
    order: Option<usize>,
    #[arg(long, default_value_t = 0.05)]
    lambda: f64,
    #[arg(long, default_value_t = 0.95)]
    tau: f64,
    /// SNR grid in dB: start:step:stop or a comma-separated list.
    #[arg(long, default_value = "2.5:0.5:8.5")]
    snr: String,
    #[arg(long, default_value_t = 500)]
    target_errors: u64,
    #[arg(long, default_value_t = 20_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, env = "DECODE_BENCH_WORKERS", default_value_t = 1)]
    workers: usize,
    /// Output file; results go to standard output when absent.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

fn load_code(args: &Args) -> Result<CodeSpec> {
    match (&args.code, &args.code_file) {
        (Some(name), _) => CodeSpec::bundled(name).with_context(|| {
            let names: Vec<&str> = CodeSpec::bundled_names().collect();
            format!("available codes: {}", names.join(", "))
        }),
        (None, Some(path)) => Ok(load_generator(path)?),
        (None, None) => unreachable!("clap enforces a code source"),
    }
}

fn run(args: Args) -> Result<()> {
    let code = load_code(&args)?;
    let order = args.order.unwrap_or_else(|| default_order(&code));
    let format = match args.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    let mut cfg = CampaignConfig::new(code, args.decoder.into(), order, parse_snr_grid(&args.snr)?);
    cfg.lambda = args.lambda;
    cfg.tau = args.tau;
    cfg.target_errors = args.target_errors;
    cfg.max_frames = args.max_frames;
    cfg.master_seed = args.seed;
    cfg.workers = args.workers;
    cfg.output = args.out.clone().map(|p| (p, format));
    eprintln!(
        "{} (n = {}, k = {}, d = {}), decoder {}, order {}",
        cfg.code.name, cfg.code.n, cfg.code.k, cfg.code.d_h, cfg.decoder, order
    );
    let results = run_campaign(&cfg)?;
    if args.out.is_none() {
        match format {
            OutputFormat::Csv => print!("{}", to_csv(&results)),
            OutputFormat::Json => println!("{}", to_json(&results)),
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
