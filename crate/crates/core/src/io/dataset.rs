use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};

/// Sorted names of the subdirectories of `root`.
pub fn list_sequences(root: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(root).map_err(|e| Error::io(root, e))? {
        let entry = entry.map_err(|e| Error::io(root, e))?;
        if entry.file_type().map_err(|e| Error::io(entry.path(), e))?.is_dir() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MappingFile {
    sequences: BTreeMap<String, String>,
}

/// Ground-truth sequence name to prediction directory name, read from a TOML
/// file with a single `[sequences]` table.
pub fn read_mapping(path: &Path) -> Result<BTreeMap<String, String>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: MappingFile = toml::from_str(&text).map_err(|e| Error::file(path, e.to_string()))?;
    Ok(file.sequences)
}
