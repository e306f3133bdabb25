//! File emission: provenance stamping and atomic writes.
//!
//! Every emitted file carries the toolkit version and a SHA-256 digest of the
//! scenario it came from. Files are written to a temporary sibling and renamed
//! into place, so an interrupted run never leaves a partial output.

use std::io;
use std::path::Path;

use sha2::{Digest, Sha256};

pub fn scenario_digest(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// Comment line stamped at the top of CSV outputs.
pub fn csv_provenance_line(digest: &str) -> String {
    format!("# sfg-toolkit {} scenario_sha256={digest}\n", sfg_core::VERSION)
}

/// Write `bytes` to `path` atomically (temp file + rename).
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension(format!(
        "{}.tmp-{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    let result = std::fs::write(&tmp, bytes).and_then(|()| std::fs::rename(&tmp, path));
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result
}
