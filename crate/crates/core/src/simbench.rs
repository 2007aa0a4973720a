//! Monte-Carlo campaigns.
//!
//! Every frame draws its information word and noise from its own stream
//! (see [`frame_rng`]), frames are decoded in parallel chunks and the
//! records are folded in frame order, so a campaign's counters depend only
//! on the configuration and the master seed, never on the worker count.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{frame_rng, modulate, transmit, NoiseModel};
use crate::codes::CodeSpec;
use crate::decoder::{adaptive_decode, ml_oracle, standard_osd};
use crate::gf2::BitVec;
use crate::reliability::{ConditionParams, DEFAULT_LAMBDA, DEFAULT_TAU};
use crate::{Error, Result};

const CHUNK_FRAMES: u64 = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DecoderKind {
    /// Standard path with discarding and early stop disabled.
    OriginalOsd,
    StandardOsd,
    Adaptive,
    MlOracle,
}

impl DecoderKind {
    pub const ALL: [DecoderKind; 4] = [Self::OriginalOsd, Self::StandardOsd, Self::Adaptive, Self::MlOracle];

    pub fn name(self) -> &'static str {
        match self {
            Self::OriginalOsd => "original-osd",
            Self::StandardOsd => "standard-osd",
            Self::Adaptive => "adaptive",
            Self::MlOracle => "ml-oracle",
        }
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown decoder `{s}`")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            _ => Err(Error::Config(format!("unknown output format `{s}`"))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub code: CodeSpec,
    pub decoder: DecoderKind,
    pub order: usize,
    pub lambda: f64,
    pub tau: f64,
    pub snr_grid_db: Vec<f64>,
    pub target_errors: u64,
    pub max_frames: u64,
    pub master_seed: u64,
    pub workers: usize,
    pub output: Option<(PathBuf, OutputFormat)>,
}

impl CampaignConfig {
    /// Configuration with the usual defaults: λ = 0.05, τ = 0.95, 500 target
    /// errors, a single worker and no output file.
    pub fn new(code: CodeSpec, decoder: DecoderKind, order: usize, snr_grid_db: Vec<f64>) -> Self {
        Self {
            code,
            decoder,
            order,
            lambda: DEFAULT_LAMBDA,
            tau: DEFAULT_TAU,
            snr_grid_db,
            target_errors: 500,
            max_frames: 20_000_000,
            master_seed: 0,
            workers: 1,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.snr_grid_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if let Some(bad) = self.snr_grid_db.iter().find(|s| !s.is_finite()) {
            return Err(Error::Config(format!("SNR value {bad} is not finite")));
        }
        if self.target_errors == 0 {
            return Err(Error::Config("target errors must be at least 1".into()));
        }
        if self.max_frames < self.target_errors {
            return Err(Error::Config(format!(
                "max frames ({}) is below target errors ({})",
                self.max_frames, self.target_errors
            )));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.order > self.code.k {
            return Err(Error::OrderTooLarge { order: self.order, k: self.code.k });
        }
        ConditionParams::new(self.order, self.lambda, self.tau, 0.0, 1.0)?;
        if self.decoder == DecoderKind::MlOracle && self.code.k > crate::codes::MAX_EXHAUSTIVE_K {
            return Err(Error::TooManyCodewords { k: self.code.k, limit: crate::codes::MAX_EXHAUSTIVE_K });
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnrPointResult {
    pub snr_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub avg_teps: f64,
    pub ge_skip_rate: f64,
    pub condition1_rate: f64,
    pub condition2_rate: f64,
    pub avg_decode_time_ns: f64,
    pub censored: bool,
}

impl SnrPointResult {
    /// Equality of everything except the timing column.
    pub fn same_counts(&self, other: &Self) -> bool {
        self.snr_db.to_bits() == other.snr_db.to_bits()
            && self.frames == other.frames
            && self.block_errors == other.block_errors
            && self.bler.to_bits() == other.bler.to_bits()
            && self.avg_teps.to_bits() == other.avg_teps.to_bits()
            && self.ge_skip_rate.to_bits() == other.ge_skip_rate.to_bits()
            && self.condition1_rate.to_bits() == other.condition1_rate.to_bits()
            && self.condition2_rate.to_bits() == other.condition2_rate.to_bits()
            && self.censored == other.censored
    }
}

/// What one decoded frame contributes to the point statistics.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FrameRecord {
    pub block_error: bool,
    pub teps: u64,
    pub ge_skipped: bool,
    pub condition1: bool,
    pub condition2: bool,
    pub time_ns: u64,
}

/// Information word and soft output of one frame.
pub fn simulate_frame(code: &CodeSpec, noise: NoiseModel, master_seed: u64, frame_index: u64) -> (BitVec, crate::SoftWord) {
    let mut rng = frame_rng(master_seed, frame_index);
    let info = BitVec::from_bits((0..code.k).map(|_| rng.random::<bool>()));
    let c = code.encode(&info).expect("information length matches the code");
    let sw = transmit(&modulate(&c), noise, &mut rng);
    (c, sw)
}

fn decode_frame(cfg: &CampaignConfig, noise: NoiseModel, params: &ConditionParams, frame_index: u64) -> FrameRecord {
    let (c, sw) = simulate_frame(&cfg.code, noise, cfg.master_seed, frame_index);
    let start = Instant::now();
    let (decoded, teps, ge_skipped, c1, c2) = match cfg.decoder {
        DecoderKind::OriginalOsd | DecoderKind::StandardOsd => {
            let out = standard_osd(&sw, &cfg.code, params, None);
            (out.codeword, out.teps_reencoded, false, false, false)
        }
        DecoderKind::Adaptive => {
            let out = adaptive_decode(&sw, &cfg.code, params);
            (out.codeword, out.teps_reencoded, !out.ge_performed, out.condition1_fired, out.condition2_fired)
        }
        DecoderKind::MlOracle => {
            let c = ml_oracle(&sw, &cfg.code).expect("validated code dimension");
            (c, 1u64 << cfg.code.k, true, false, false)
        }
    };
    let time_ns = start.elapsed().as_nanos().min(u64::MAX as u128) as u64;
    FrameRecord {
        block_error: decoded != c,
        teps,
        ge_skipped,
        condition1: c1,
        condition2: c2,
        time_ns,
    }
}

/// Decoder thresholds used by a campaign at one noise level.
pub fn point_params(cfg: &CampaignConfig, noise: NoiseModel) -> Result<ConditionParams> {
    match cfg.decoder {
        DecoderKind::OriginalOsd | DecoderKind::MlOracle => Ok(ConditionParams::exhaustive(cfg.order, noise)),
        DecoderKind::StandardOsd | DecoderKind::Adaptive => {
            ConditionParams::for_channel(cfg.order, cfg.lambda, cfg.tau, noise, cfg.code.k)
        }
    }
}

#[derive(Default)]
struct Totals {
    frames: u64,
    errors: u64,
    teps: u128,
    ge_skipped: u64,
    condition1: u64,
    condition2: u64,
    time_ns: u128,
}

impl Totals {
    fn add(&mut self, r: &FrameRecord) {
        self.frames += 1;
        self.errors += r.block_error as u64;
        self.teps += r.teps as u128;
        self.ge_skipped += r.ge_skipped as u64;
        self.condition1 += r.condition1 as u64;
        self.condition2 += r.condition2 as u64;
        self.time_ns += r.time_ns as u128;
    }
}

fn build_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))
}

/// Simulates frames at one SNR until `target_errors` block errors or
/// `max_frames` frames, whichever comes first.
pub fn run_point(cfg: &CampaignConfig, snr_db: f64) -> Result<SnrPointResult> {
    cfg.validate()?;
    let pool = build_pool(cfg.workers)?;
    run_point_in(cfg, snr_db, &pool)
}

fn run_point_in(cfg: &CampaignConfig, snr_db: f64, pool: &rayon::ThreadPool) -> Result<SnrPointResult> {
    let noise = NoiseModel::from_snr_db(snr_db);
    let params = point_params(cfg, noise)?;
    let batch_chunks = (cfg.workers as u64) * 4;
    let mut totals = Totals::default();
    let mut next = 0u64;

    'outer: while next < cfg.max_frames {
        let ranges: Vec<(u64, u64)> = (0..batch_chunks)
            .map(|i| next + i * CHUNK_FRAMES)
            .take_while(|&s| s < cfg.max_frames)
            .map(|s| (s, (s + CHUNK_FRAMES).min(cfg.max_frames)))
            .collect();
        next = ranges.last().map_or(next, |r| r.1);
        let records: Vec<Vec<FrameRecord>> = pool.install(|| {
            ranges
                .par_iter()
                .map(|&(lo, hi)| (lo..hi).map(|f| decode_frame(cfg, noise, &params, f)).collect())
                .collect()
        });
        for r in records.iter().flatten() {
            totals.add(r);
            if totals.errors >= cfg.target_errors {
                break 'outer;
            }
        }
    }

    let frames = totals.frames as f64;
    Ok(SnrPointResult {
        snr_db,
        frames: totals.frames,
        block_errors: totals.errors,
        bler: totals.errors as f64 / frames,
        avg_teps: totals.teps as f64 / frames,
        ge_skip_rate: totals.ge_skipped as f64 / frames,
        condition1_rate: totals.condition1 as f64 / frames,
        condition2_rate: totals.condition2 as f64 / frames,
        avg_decode_time_ns: totals.time_ns as f64 / frames,
        censored: totals.errors < cfg.target_errors,
    })
}

/// Runs every grid point in order, reporting progress on standard error, and
/// writes the configured output file.
pub fn run_campaign(cfg: &CampaignConfig) -> Result<Vec<SnrPointResult>> {
    cfg.validate()?;
    let pool = build_pool(cfg.workers)?;
    let mut results = Vec::with_capacity(cfg.snr_grid_db.len());
    for &snr in &cfg.snr_grid_db {
        let started = Instant::now();
        let r = run_point_in(cfg, snr, &pool)?;
        eprintln!(
            "[{}] {} dB: {} frames, {} errors, BLER {:.4e}, avg TEPs {:.4}{} ({:.1} s)",
            cfg.decoder,
            snr,
            r.frames,
            r.block_errors,
            r.bler,
            r.avg_teps,
            if r.censored { ", censored" } else { "" },
            started.elapsed().as_secs_f64()
        );
        results.push(r);
    }
    if let Some((path, format)) = &cfg.output {
        emit_results(&results, *format, path)?;
    }
    Ok(results)
}

pub const CSV_HEADER: &str =
    "snr_db,frames,block_errors,bler,avg_teps,ge_skip_rate,condition1_rate,condition2_rate,avg_decode_time_ns,censored";

/// 17 significant digits, which round-trips every `f64`.
fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn to_csv(results: &[SnrPointResult]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in results {
        let row = [
            fmt_float(r.snr_db),
            r.frames.to_string(),
            r.block_errors.to_string(),
            fmt_float(r.bler),
            fmt_float(r.avg_teps),
            fmt_float(r.ge_skip_rate),
            fmt_float(r.condition1_rate),
            fmt_float(r.condition2_rate),
            fmt_float(r.avg_decode_time_ns),
            r.censored.to_string(),
        ];
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<SnrPointResult>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => return Err(Error::Parse { line: 1, msg: "unexpected CSV header".into() }),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: i + 1, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 10 {
            return Err(err(format!("expected 10 fields, found {}", f.len())));
        }
        let float = |s: &str| s.parse::<f64>().map_err(|e| err(format!("`{s}`: {e}")));
        let int = |s: &str| s.parse::<u64>().map_err(|e| err(format!("`{s}`: {e}")));
        out.push(SnrPointResult {
            snr_db: float(f[0])?,
            frames: int(f[1])?,
            block_errors: int(f[2])?,
            bler: float(f[3])?,
            avg_teps: float(f[4])?,
            ge_skip_rate: float(f[5])?,
            condition1_rate: float(f[6])?,
            condition2_rate: float(f[7])?,
            avg_decode_time_ns: float(f[8])?,
            censored: f[9].parse().map_err(|e| err(format!("`{}`: {e}", f[9])))?,
        });
    }
    Ok(out)
}

pub fn to_json(results: &[SnrPointResult]) -> String {
    serde_json::to_string_pretty(results).expect("plain data serializes")
}

pub fn emit_results(results: &[SnrPointResult], format: OutputFormat, path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(Error::Config("no results to write".into()));
    }
    let mut text = match format {
        OutputFormat::Csv => to_csv(results),
        OutputFormat::Json => to_json(results),
    };
    if format == OutputFormat::Json {
        text.push('\n');
    }
    std::fs::write(path, text).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Parses `start:step:stop` (inclusive) or a comma-separated list.
pub fn parse_snr_grid(s: &str) -> Result<Vec<f64>> {
    let bad = |msg: String| Error::Config(format!("SNR grid `{s}`: {msg}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|e| bad(format!("`{t}`: {e}")));
    let parts: Vec<&str> = s.split(':').collect();
    let grid = match parts.as_slice() {
        [start, step, stop] => {
            let (start, step, stop) = (num(start)?, num(step)?, num(stop)?);
            if step.is_nan() || step <= 0.0 || stop < start {
                return Err(bad("need a positive step and start ≤ stop".into()));
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            (0..count)
                .map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9)
                .collect()
        }
        [list] => list.split(',').filter(|t| !t.trim().is_empty()).map(num).collect::<Result<Vec<_>>>()?,
        _ => return Err(bad("expected start:step:stop or a comma-separated list".into())),
    };
    if grid.is_empty() {
        return Err(bad("no points".into()));
    }
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn result(snr: f64) -> SnrPointResult {
        SnrPointResult {
            snr_db: snr,
            frames: 1234,
            block_errors: 7,
            bler: 7.0 / 1234.0,
            avg_teps: 1.0 / 3.0,
            ge_skip_rate: 0.1,
            condition1_rate: 0.25,
            condition2_rate: 2.0f64.sqrt() / 10.0,
            avg_decode_time_ns: 12345.678,
            censored: false,
        }
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_snr_grid("2.5:0.5:4").unwrap(), vec![2.5, 3.0, 3.5, 4.0]);
        assert_eq!(parse_snr_grid("2.5:0.5:8.5").unwrap().len(), 13);
        assert_eq!(parse_snr_grid("1:0.1:1.3").unwrap(), vec![1.0, 1.1, 1.2, 1.3]);
        assert_eq!(parse_snr_grid("2.51,3.01").unwrap(), vec![2.51, 3.01]);
        assert_eq!(parse_snr_grid("5").unwrap(), vec![5.0]);
        assert!(parse_snr_grid("").is_err());
        assert!(parse_snr_grid("3:0:4").is_err());
        assert!(parse_snr_grid("4:1:3").is_err());
        assert!(parse_snr_grid("a,b").is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let csv = to_csv(&[result(2.5)]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        assert!(!lines[1].contains(' '));
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rs = vec![result(2.5), result(3.01), SnrPointResult { censored: true, ..result(8.5) }];
        let back = parse_csv(&to_csv(&rs)).unwrap();
        assert_eq!(back, rs);
    }

    #[test]
    fn json_matches_csv() {
        let rs = vec![result(2.5), result(3.0)];
        let from_json: Vec<SnrPointResult> = serde_json::from_str(&to_json(&rs)).unwrap();
        assert_eq!(from_json, parse_csv(&to_csv(&rs)).unwrap());
        let v: serde_json::Value = serde_json::from_str(&to_json(&rs)).unwrap();
        let keys: Vec<&str> = v[0].as_object().unwrap().keys().map(|k| k.as_str()).collect();
        let mut header: Vec<&str> = CSV_HEADER.split(',').collect();
        header.sort_unstable();
        let mut keys_sorted = keys.clone();
        keys_sorted.sort_unstable();
        assert_eq!(keys_sorted, header);
    }

    #[test]
    fn decoder_names_round_trip() {
        for k in DecoderKind::ALL {
            assert_eq!(k.name().parse::<DecoderKind>().unwrap(), k);
        }
        assert!("osd".parse::<DecoderKind>().is_err());
    }

    #[test]
    fn config_validation() {
        let code = CodeSpec::bundled("ebch-8-4").unwrap();
        let ok = CampaignConfig::new(code.clone(), DecoderKind::Adaptive, 1, vec![3.0]);
        assert!(ok.validate().is_ok());
        assert!(CampaignConfig { snr_grid_db: vec![], ..ok.clone() }.validate().is_err());
        assert!(CampaignConfig { target_errors: 0, ..ok.clone() }.validate().is_err());
        assert!(CampaignConfig { max_frames: 10, target_errors: 11, ..ok.clone() }.validate().is_err());
        assert!(CampaignConfig { workers: 0, ..ok.clone() }.validate().is_err());
        assert!(CampaignConfig { order: 5, ..ok.clone() }.validate().is_err());
        assert!(CampaignConfig { lambda: 0.0, ..ok.clone() }.validate().is_err());
        let big = CodeSpec::bundled("ebch-64-36").unwrap();
        assert!(CampaignConfig::new(big, DecoderKind::MlOracle, 3, vec![3.0]).validate().is_err());
    }

    #[test]
    fn unwritable_path_reports_path() {
        let err = emit_results(&[result(1.0)], OutputFormat::Csv, Path::new("/nonexistent-dir/x.csv")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/x.csv"));
        assert!(emit_results(&[], OutputFormat::Csv, Path::new("/tmp/unused.csv")).is_err());
    }
}
