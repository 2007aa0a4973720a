//! Ordered-statistics decoding (OSD) for short binary linear block codes, with
//! an adaptive controller that skips Gaussian elimination whenever decoding
//! directly on the received hard decisions is likely to succeed.
//!
//! The crate is organized bottom-up:
//!
//! * [`gf2`]: bit-packed GF(2) vectors, matrices and systematic elimination.
//! * [`codes`]: extended BCH construction and the generator-matrix text format.
//! * [`channel`]: BPSK over AWGN and per-frame reproducible noise streams.
//! * [`reliability`]: the probability kernel driving both decoding conditions.
//! * [`decoder`]: standard OSD, the elimination-free decoder, the adaptive
//!   controller and an exhaustive ML reference.
//! * [`simbench`]: Monte-Carlo campaigns and CSV/JSON result emission.

pub mod channel;
pub mod codes;
pub mod decoder;
pub mod gf2;
pub mod reliability;
pub mod simbench;

use std::path::PathBuf;

pub use channel::{NoiseModel, SoftWord};
pub use codes::CodeSpec;
pub use decoder::{adaptive_decode, ml_oracle, non_ge_osd, standard_osd, DecodeOutcome};
pub use gf2::{BitMatrix, BitVec, Permutation};
pub use reliability::{BitErrorProfile, ConditionParams};
pub use simbench::{CampaignConfig, DecoderKind, SnrPointResult};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is rank deficient: no pivot available for row {row}")]
    RankDeficient { row: usize },
    #[error("matrix left block is not the identity")]
    NotSystematic,
    #[error("permutation map is not a bijection")]
    InvalidPermutation,
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid BCH parameters: {0}")]
    InvalidBch(String),
    #[error("unknown code name `{0}`")]
    UnknownCode(String),
    #[error("order {order} exceeds information length {k}")]
    OrderTooLarge { order: usize, k: usize },
    #[error("exhaustive search refused: k = {k} exceeds the limit of {limit}")]
    TooManyCodewords { k: usize, limit: usize },
    #[error("numerical integration did not converge: {0}")]
    Integration(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
