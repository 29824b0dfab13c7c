//! File formats. Every amount on disk is a decimal integer of cents.

pub mod aggregates;
pub mod config;
pub mod constraints;
pub mod journal;
pub mod matrix;

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use aggregates::{
    load_aggregate_csv, parse_aggregate_csv, parse_date, series_from_reports, write_aggregate_csv,
    AggregateRow, AggregateSeries, SignConvention,
};
pub use config::ScenarioConfig;
pub use constraints::{parse_constraints, parse_entry_spec, resolve_participant};
pub use journal::{parse_journal, write_journal};
pub use matrix::{parse_matrix_csv, write_matrix_csv, write_solution_metadata};

pub fn read_to_string(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes every file under `dir` through a temporary name, then renames.
/// Nothing is renamed into place unless all temporary writes succeeded.
pub fn write_all_atomically(dir: &Path, files: &[(String, Vec<u8>)]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut staged = Vec::with_capacity(files.len());
    for (name, bytes) in files {
        let tmp = dir.join(format!(".{name}.tmp"));
        if let Err(e) = fs::write(&tmp, bytes) {
            for (t, _) in &staged {
                let _ = fs::remove_file(t);
            }
            return Err(Error::io(&tmp, e));
        }
        staged.push((tmp, dir.join(name)));
    }
    let mut done = Vec::with_capacity(staged.len());
    for (tmp, target) in staged {
        fs::rename(&tmp, &target).map_err(|e| Error::io(&target, e))?;
        done.push(target);
    }
    Ok(done)
}

pub(crate) fn location(source: &str, line: u64) -> String {
    format!("{source}:{line}")
}
