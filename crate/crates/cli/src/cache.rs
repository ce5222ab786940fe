//! File-backed store of per-prime censuses.
//!
//! Each file holds a header, a SHA-256 checksum of the body's compact JSON and
//! the body itself. Files are written to a temporary name and renamed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use elemsub::orbits::{CensusSnapshot, MergeProbe};
use elemsub::{Family, FieldCtx};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Bumped whenever the coordinate order of any algebra basis changes.
pub const BASIS_ORDER_VERSION: u32 = 1;
pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Error)]
pub enum CacheError {
    #[error("cache file {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("cache file {path} is corrupt: {reason}")]
    Corrupt { path: PathBuf, reason: String },
    #[error("cache file {path} has a mismatched header: {reason} (rerun with --force)")]
    Header { path: PathBuf, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub artifact_version: String,
    pub basis_order_version: u32,
    /// Coefficients of the field modulus, constant term first.
    pub modulus: Vec<u32>,
    pub family: Family,
    pub n: usize,
    pub r: usize,
    pub q: u32,
    pub merge_probe: MergeProbe,
}

impl CacheHeader {
    pub fn new(family: Family, n: usize, r: usize, field: &FieldCtx, probe: &MergeProbe) -> Self {
        CacheHeader {
            artifact_version: ARTIFACT_VERSION.to_string(),
            basis_order_version: BASIS_ORDER_VERSION,
            modulus: field.modulus().to_vec(),
            family,
            n,
            r,
            q: field.q(),
            merge_probe: *probe,
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    header: CacheHeader,
    checksum: String,
    body: Value,
}

pub fn file_name(family: Family, n: usize, r: usize, q: u32) -> String {
    format!("{family}_n{n}_r{r}_q{q}.json")
}

pub fn path_for(dir: &Path, family: Family, n: usize, r: usize, q: u32) -> PathBuf {
    dir.join(file_name(family, n, r, q))
}

fn checksum(body: &Value) -> String {
    let text = serde_json::to_string(body).expect("JSON values serialize");
    hex::encode(Sha256::digest(text.as_bytes()))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CacheError + '_ {
    move |source| CacheError::Io { path: path.to_path_buf(), source }
}

pub fn store(path: &Path, header: &CacheHeader, snap: &CensusSnapshot) -> Result<(), CacheError> {
    let body = serde_json::to_value(snap).map_err(|e| CacheError::Corrupt { path: path.into(), reason: e.to_string() })?;
    let file = CacheFile { header: header.clone(), checksum: checksum(&body), body };
    let mut text = serde_json::to_string_pretty(&file).expect("JSON values serialize");
    text.push('\n');
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    let name = path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(text.as_bytes()).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    fs::rename(&tmp, path).map_err(io_err(path))
}

/// Reads and verifies a cache file. With `expected`, the header must match it.
pub fn load(path: &Path, expected: Option<&CacheHeader>) -> Result<(CacheHeader, CensusSnapshot), CacheError> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let corrupt = |reason: String| CacheError::Corrupt { path: path.to_path_buf(), reason };
    let file: CacheFile = serde_json::from_str(&text).map_err(|e| corrupt(e.to_string()))?;
    let actual = checksum(&file.body);
    if actual != file.checksum {
        return Err(corrupt(format!("checksum mismatch: stored {}, computed {actual}", file.checksum)));
    }
    if let Some(want) = expected {
        if &file.header != want {
            let reason = format!(
                "found {}, expected {}",
                serde_json::to_string(&file.header).unwrap_or_default(),
                serde_json::to_string(want).unwrap_or_default()
            );
            return Err(CacheError::Header { path: path.to_path_buf(), reason });
        }
    } else if file.header.basis_order_version != BASIS_ORDER_VERSION || file.header.artifact_version != ARTIFACT_VERSION {
        return Err(CacheError::Header {
            path: path.to_path_buf(),
            reason: format!(
                "written by version {} with basis order {}",
                file.header.artifact_version, file.header.basis_order_version
            ),
        });
    }
    let snap: CensusSnapshot = serde_json::from_value(file.body).map_err(|e| corrupt(e.to_string()))?;
    let h = &file.header;
    if (snap.family, snap.n, snap.r) != (h.family, h.n, h.r) || snap.p != h.q {
        return Err(corrupt("body does not match header".into()));
    }
    Ok((file.header, snap))
}

/// Cache files in `dir` following the naming scheme, sorted by name.
pub fn list(dir: &Path) -> Result<Vec<PathBuf>, CacheError> {
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CacheError::Io { path: dir.into(), source: e }),
    };
    let mut out = Vec::new();
    for entry in entries {
        let entry = entry.map_err(io_err(dir))?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if !name.starts_with('.') && name.ends_with(".json") && name.contains("_n") && name.contains("_q") {
            out.push(entry.path());
        }
    }
    out.sort();
    Ok(out)
}
