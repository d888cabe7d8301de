//! Location of bundled tracks, configs and checkpoints.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::track::TrackGeometry;

pub const ASSETS_ENV: &str = "FRENET_RACER_ASSETS";

/// Asset root: `$FRENET_RACER_ASSETS` when set, otherwise the repository's
/// `assets/` directory.
pub fn asset_dir() -> PathBuf {
    match std::env::var_os(ASSETS_ENV) {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => Path::new(env!("CARGO_MANIFEST_DIR")).join("../../assets"),
    }
}

/// Resolves a track id (`porto`) or a path to a CSV file.
pub fn track_path(id: &str) -> PathBuf {
    let as_path = Path::new(id);
    if id.ends_with(".csv") || as_path.components().count() > 1 {
        as_path.to_path_buf()
    } else {
        asset_dir().join("tracks").join(format!("{id}.csv"))
    }
}

pub fn load_track(id: &str) -> Result<Arc<TrackGeometry>> {
    let path = track_path(id);
    if !path.exists() {
        return Err(Error::io(
            &path,
            std::io::Error::new(std::io::ErrorKind::NotFound, format!("track `{id}` not found")),
        ));
    }
    Ok(Arc::new(TrackGeometry::load(&path)?))
}

pub fn checkpoint_path(name: &str) -> PathBuf {
    asset_dir().join("checkpoints").join(name)
}

pub fn config_path(name: &str) -> PathBuf {
    asset_dir().join("configs").join(name)
}
