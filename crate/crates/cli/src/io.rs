//! File helpers: reading inputs, atomic writes, the config directory.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use spinqa::{Error, Result};

/// Environment variable naming the directory with default config files
/// (`device.json`, `qmc.json`, `timing.json`).
pub const CONFIG_DIR_VAR: &str = "SPINQA_CONFIG_DIR";

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))
}

/// Writes through a temporary file in the same directory and renames it
/// into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    std::fs::create_dir_all(&dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

/// `name` from the config directory, if the variable is set and the file
/// exists.
pub fn config_file<T: DeserializeOwned>(name: &str) -> Result<Option<T>> {
    let Some(dir) = std::env::var_os(CONFIG_DIR_VAR) else {
        return Ok(None);
    };
    let path = Path::new(&dir).join(name);
    if !path.exists() {
        return Ok(None);
    }
    load_json(&path).map(Some)
}

pub fn load_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read_text(path)?).map_err(|e| Error::Parse {
        line: e.line(),
        message: format!("{}: {e}", path.display()),
    })
}
