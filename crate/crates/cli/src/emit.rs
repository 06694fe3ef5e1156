//! Deterministic text output: fixed-precision numbers and delivery of
//! payloads to standard output or files.
//!
//! Identical runs must produce identical bytes, so every number is printed
//! through [`fmt9`] (9 significant digits, scientific notation, `.` decimal
//! separator, no locale) and all text uses `\n` line endings.

use std::path::{Path, PathBuf};

use crate::errors::CliError;

/// Environment variable naming the directory relative output paths land in.
pub const OUT_DIR_VAR: &str = "RELAYKEY_OUT_DIR";

/// Format with exactly 9 significant digits, byte-stable across runs.
pub fn fmt9(v: f64) -> String {
    if v.is_nan() {
        return "NaN".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        // Covers negative zero so equal values never print differently.
        return "0.00000000e0".into();
    }
    format!("{v:.8e}")
}

/// `fmt9` for optional quantities; absent ones print as `NA`.
pub fn fmt9_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => fmt9(x),
        None => "NA".into(),
    }
}

/// Where an output path actually points: relative paths are joined to
/// the directory named by `RELAYKEY_OUT_DIR` when that variable is set.
pub fn resolve_path(p: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(d) if p.is_relative() => PathBuf::from(d).join(p),
        _ => p.to_path_buf(),
    }
}

/// Write the payload to the resolved path, or to standard output when no
/// path was requested.
pub fn deliver(out: Option<&Path>, payload: &str) -> Result<(), CliError> {
    match out {
        None => {
            print!("{payload}");
            Ok(())
        }
        Some(p) => {
            let full = resolve_path(p);
            std::fs::write(&full, payload)
                .map_err(|e| CliError::Compute(format!("cannot write `{}`: {e}", full.display())))
        }
    }
}
