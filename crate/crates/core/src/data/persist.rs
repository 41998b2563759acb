//! On-disk model state: a JSON document with a schema version.

use std::path::Path;

use crate::error::{Error, Result};
use crate::models::{ModelState, SCHEMA_VERSION};

/// Writes through a temporary file and renames, so a failed write never
/// leaves a partial state behind.
pub fn save_state(state: &ModelState, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(state).map_err(|e| Error::Internal(format!("serializing state: {e}")))?;
    let tmp = path.with_extension("json.tmp");
    std::fs::write(&tmp, text).map_err(|e| Error::io(&tmp, e))?;
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn load_state(path: impl AsRef<Path>) -> Result<ModelState> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::CorruptState(format!("{}: {e}", path.display())))?;
    let version = value
        .get("schema_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::CorruptState(format!("{}: no schema_version field", path.display())))?;
    if version != SCHEMA_VERSION as u64 {
        return Err(Error::MigrationRequired {
            found: u32::try_from(version).unwrap_or(u32::MAX),
            expected: SCHEMA_VERSION,
        });
    }
    serde_json::from_value(value).map_err(|e| Error::CorruptState(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_empty_state() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("state.json");
        let s = ModelState::new(72);
        save_state(&s, &p).unwrap();
        assert_eq!(load_state(&p).unwrap(), s);
        assert!(!dir.path().join("state.json.tmp").exists());
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("state.json");
        save_state(&ModelState::new(24), &p).unwrap();
        let text = std::fs::read_to_string(&p).unwrap();
        std::fs::write(&p, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_state(&p), Err(Error::CorruptState(_))));
    }

    #[test]
    fn old_version_needs_migration() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("state.json");
        let mut s = ModelState::new(24);
        s.schema_version = 0;
        save_state(&s, &p).unwrap();
        let err = load_state(&p).unwrap_err();
        assert!(matches!(err, Error::MigrationRequired { found: 0, expected: SCHEMA_VERSION }));
        assert!(err.to_string().contains("version 0"), "{err}");
    }
}
