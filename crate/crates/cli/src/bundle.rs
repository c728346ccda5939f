use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::failure::Failure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Artifact {
    pub file: String,
    pub bytes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub command: String,
    pub experiment: String,
    pub complete: bool,
    pub failure: Option<Failure>,
    pub artifacts: Vec<Artifact>,
}

/// Output directory of one command, recording what was written.
#[derive(Debug)]
pub struct Bundle {
    dir: PathBuf,
    command: String,
    experiment: String,
    artifacts: Vec<Artifact>,
}

impl Bundle {
    pub fn create(dir: &Path, command: &str, experiment: &str) -> Result<Self, Failure> {
        fs::create_dir_all(dir).map_err(|e| Failure::io("output", dir, &e))?;
        Ok(Bundle {
            dir: dir.to_path_buf(),
            command: command.into(),
            experiment: experiment.into(),
            artifacts: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn write(&mut self, file: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(file);
        fs::write(&path, contents).map_err(|e| Failure::io("output", &path, &e))?;
        self.artifacts.retain(|a| a.file != file);
        self.artifacts.push(Artifact {
            file: file.into(),
            bytes: contents.len(),
        });
        Ok(())
    }

    pub fn write_json<S: Serialize>(&mut self, file: &str, value: &S) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::numeric("output", e.to_string()))?;
        text.push('\n');
        self.write(file, &text)
    }

    /// Writes `manifest.json`; `failure` marks the bundle incomplete.
    pub fn finish(mut self, failure: Option<Failure>) -> Result<Manifest, Failure> {
        let manifest = Manifest {
            command: self.command.clone(),
            experiment: self.experiment.clone(),
            complete: failure.is_none(),
            failure,
            artifacts: self.artifacts.clone(),
        };
        self.write_json("manifest.json", &manifest)?;
        Ok(manifest)
    }
}
