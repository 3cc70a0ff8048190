// SPDX-License-Identifier: Apache-2.0

use std::io::Write;
use std::path::{Path, PathBuf};

use crate::args::Format;
use crate::error::CliError;

/// Writes `contents` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

/// Routes results to files under `--out`, or to stdout without it.
pub struct Emitter {
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Emitter {
    /// Emits `<stem>.json` and `<stem>.txt` per the format. The text table is
    /// echoed to stdout even when files are written.
    pub fn emit(&self, stem: &str, json: &str, text: &str) -> Result<(), CliError> {
        let mut stdout = std::io::stdout().lock();
        match &self.out {
            Some(dir) => {
                if self.format.json() {
                    write_atomic(&dir.join(format!("{stem}.json")), json.as_bytes())?;
                }
                if self.format.text() {
                    write_atomic(&dir.join(format!("{stem}.txt")), text.as_bytes())?;
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            None => {
                if self.format.json() {
                    let _ = stdout.write_all(json.as_bytes());
                }
                if self.format.text() {
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
        }
        Ok(())
    }
}
