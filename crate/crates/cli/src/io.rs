//! Instance loading, output and the CLI error type.

use std::fs;
use std::path::{Path, PathBuf};

use dbsteiner_core::generate::GenError;
use dbsteiner_core::instances::InstanceError;
use dbsteiner_core::verify::Issue;
use dbsteiner_core::{parse_dst, parse_gst, preprocess_gst, DirectedInstance, Error, GroupTreeInstance};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{}: {}", .0.display(), .1)]
    Io(PathBuf, std::io::Error),
    #[error("{}: unrecognized instance header (expected DBDST or DBGST)", .0.display())]
    UnknownFormat(PathBuf),
    #[error("expected a {0} instance")]
    WrongProblem(&'static str),
    #[error("{}: unreadable report: {}", .0.display(), .1)]
    Report(PathBuf, String),
    #[error("bad argument: {0}")]
    Argument(String),
    #[error("verification failed: {0:?}")]
    Verify(Vec<Issue>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => e.exit_code() as u8,
            CliError::Verify(_) => 4,
            CliError::Io(..)
            | CliError::UnknownFormat(_)
            | CliError::WrongProblem(_)
            | CliError::Report(..)
            | CliError::Argument(_) => 5,
        }
    }
}

impl From<GenError> for CliError {
    fn from(e: GenError) -> Self {
        CliError::Core(e.into())
    }
}

impl From<InstanceError> for CliError {
    fn from(e: InstanceError) -> Self {
        CliError::Core(e.into())
    }
}

/// A parsed instance; group instances are already preprocessed.
pub enum Loaded {
    Dst(DirectedInstance),
    Gst(GroupTreeInstance),
}

impl Loaded {
    pub fn into_dst(self) -> Result<DirectedInstance, CliError> {
        match self {
            Loaded::Dst(d) => Ok(d),
            Loaded::Gst(_) => Err(CliError::WrongProblem("DBDST")),
        }
    }

    pub fn into_gst(self) -> Result<GroupTreeInstance, CliError> {
        match self {
            Loaded::Gst(g) => Ok(g),
            Loaded::Dst(_) => Err(CliError::WrongProblem("DBGST")),
        }
    }
}

/// Reads an instance file, telling the two formats apart by their header.
pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    let magic = text
        .lines()
        .map(str::trim)
        .find(|l| !l.is_empty() && !l.starts_with('#'))
        .and_then(|l| l.split_whitespace().next());
    match magic {
        Some("DBDST") => Ok(Loaded::Dst(parse_dst(&text).map_err(Error::from)?)),
        Some("DBGST") => {
            let raw = parse_gst(&text).map_err(Error::from)?;
            Ok(Loaded::Gst(preprocess_gst(&raw, None).map_err(Error::from)?))
        }
        _ => Err(CliError::UnknownFormat(path.to_path_buf())),
    }
}

pub fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Io(p.clone(), e)),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn emit_json<T: Serialize>(out: &Option<PathBuf>, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::Argument(e.to_string()))?;
    text.push('\n');
    emit(out, &text)
}

/// Parses `lo..hi` (both inclusive) or a single value.
pub fn parse_range(s: &str) -> Result<(u64, u64), String> {
    let bad = || format!("expected `lo..hi` or a single integer, got `{s}`");
    let (lo, hi) = match s.split_once("..") {
        Some((a, b)) => (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?),
        None => {
            let v = s.trim().parse().map_err(|_| bad())?;
            (v, v)
        }
    };
    if lo > hi {
        return Err(format!("empty range `{s}`"));
    }
    Ok((lo, hi))
}
