//! Harness library behind the `gspsim` binary: command implementations,
//! grid benchmarking, and deterministic seed derivation.

pub mod bench;
pub mod commands;
pub mod seeds;

use thiserror::Error;

/// Process exit codes of the binary.
pub const EXIT_OK: u8 = 0;
pub const EXIT_USAGE: u8 = 1;
pub const EXIT_VIOLATION: u8 = 2;
pub const EXIT_INEXACT: u8 = 3;

/// A command failure, classified by exit code.
#[derive(Debug, Error)]
pub enum HarnessError {
    /// Unusable input: bad flags, unreadable or unparseable files.
    #[error("{0}")]
    Usage(String),
    /// Feasibility or promise violations reported by the lower layers.
    #[error("{0}")]
    Violation(String),
    /// An exact pipeline failed to reproduce the reference answer.
    #[error("{0}")]
    Exactness(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> u8 {
        match self {
            HarnessError::Usage(_) => EXIT_USAGE,
            HarnessError::Violation(_) => EXIT_VIOLATION,
            HarnessError::Exactness(_) => EXIT_INEXACT,
        }
    }
}

/// A grid axis given as "4", "4,6,8", or "3..8" (inclusive on both ends).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValueList(pub Vec<u32>);

impl ValueList {
    /// Parser entry point for clap.
    pub fn parse(s: &str) -> Result<ValueList, String> {
        let s = s.trim();
        if let Some((lo, hi)) = s.split_once("..") {
            let lo: u32 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad range start {lo:?}"))?;
            let hi: u32 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad range end {hi:?}"))?;
            if lo > hi {
                return Err(format!("empty range {s:?}"));
            }
            return Ok(ValueList((lo..=hi).collect()));
        }
        s.split(',')
            .map(|part| {
                part.trim()
                    .parse::<u32>()
                    .map_err(|_| format!("bad value {part:?}"))
            })
            .collect::<Result<Vec<u32>, String>>()
            .map(ValueList)
    }
}
