use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex};

use crate::corpus::{load_dataset_auto, DatasetBundle};
use crate::error::{Error, Result};

/// Environment variable naming the dataset root directory.
pub const DATA_DIR_ENV: &str = "HATE_HARNESS_DATA_DIR";

const EXTENSIONS: [&str; 2] = ["csv", "jsonl"];

/// Resolves dataset names to `<root>/<name>.csv` or `<root>/<name>.jsonl`
/// and caches loaded bundles.
#[derive(Debug)]
pub struct DatasetCatalog {
    root: PathBuf,
    cache: Mutex<HashMap<String, Arc<DatasetBundle>>>,
}

impl DatasetCatalog {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        DatasetCatalog {
            root: root.into(),
            cache: Mutex::default(),
        }
    }

    /// Root from `HATE_HARNESS_DATA_DIR`, else `./data`.
    pub fn from_env() -> Self {
        Self::new(
            std::env::var_os(DATA_DIR_ENV).map_or_else(|| PathBuf::from("data"), PathBuf::from),
        )
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path_of(&self, name: &str) -> Result<PathBuf> {
        if name.is_empty() || name.contains(['/', '\\']) || name.starts_with('.') {
            return Err(Error::Config(format!("invalid dataset name `{name}`")));
        }
        EXTENSIONS
            .iter()
            .map(|ext| self.root.join(format!("{name}.{ext}")))
            .find(|p| p.is_file())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown dataset `{name}` under {} (known: {})",
                    self.root.display(),
                    self.names().join(", ")
                ))
            })
    }

    pub fn contains(&self, name: &str) -> bool {
        self.path_of(name).is_ok()
    }

    /// Dataset names available under the root, sorted.
    pub fn names(&self) -> Vec<String> {
        let Ok(entries) = std::fs::read_dir(&self.root) else {
            return Vec::new();
        };
        let mut names: Vec<String> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                p.extension()
                    .and_then(|e| e.to_str())
                    .is_some_and(|e| EXTENSIONS.contains(&e))
            })
            .filter_map(|p| p.file_stem().and_then(|s| s.to_str()).map(str::to_string))
            .collect();
        names.sort();
        names.dedup();
        names
    }

    pub fn load(&self, name: &str) -> Result<Arc<DatasetBundle>> {
        if let Some(b) = self.cache.lock().expect("catalog cache poisoned").get(name) {
            return Ok(Arc::clone(b));
        }
        let bundle = Arc::new(load_dataset_auto(&self.path_of(name)?)?.renamed(name));
        self.cache
            .lock()
            .expect("catalog cache poisoned")
            .insert(name.to_string(), Arc::clone(&bundle));
        Ok(bundle)
    }
}
