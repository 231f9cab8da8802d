use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// Files produced by a command, held in memory until the run is complete.
#[derive(Clone, Debug, Default)]
pub struct Artifacts {
    files: Vec<(String, String)>,
}

impl Artifacts {
    pub fn add(&mut self, rel: impl Into<String>, contents: String) -> String {
        let rel = rel.into();
        self.files.push((rel.clone(), contents));
        rel
    }

    pub fn paths(&self) -> impl Iterator<Item = &str> {
        self.files.iter().map(|(p, _)| p.as_str())
    }

    pub fn get(&self, rel: &str) -> Option<&str> {
        self.files.iter().find(|(p, _)| p == rel).map(|(_, c)| c.as_str())
    }

    pub fn len(&self) -> usize {
        self.files.len()
    }

    pub fn is_empty(&self) -> bool {
        self.files.is_empty()
    }

    /// Writes everything into a staging directory under `dir`, then moves
    /// the files into place. A failure before the move leaves `dir` as it was.
    pub fn commit(&self, dir: &Path) -> CliResult<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let staging = tempfile::Builder::new()
            .prefix(".yawreg-staging-")
            .tempdir_in(dir)
            .map_err(|e| CliError::io(dir, e))?;
        for (rel, contents) in &self.files {
            let path = staging.path().join(rel);
            if let Some(parent) = path.parent() {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        }
        let mut written = Vec::with_capacity(self.files.len());
        for (rel, _) in &self.files {
            let (from, to) = (staging.path().join(rel), dir.join(rel));
            if let Some(parent) = to.parent() {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::rename(&from, &to).map_err(|e| CliError::io(&to, e))?;
            written.push(to);
        }
        Ok(written)
    }
}
