//! Run manifest written next to every command's outputs.

use std::path::{Path, PathBuf};
use std::time::Instant;

use nvdnp_core::config::hex_digest;
use nvdnp_core::rng;
use serde::Serialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Serialize)]
pub struct OutputFile {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub config_hash: Option<String>,
    pub seed: Option<u64>,
    pub seed_schedule: Option<String>,
    pub threads: usize,
    pub timings: Vec<Timing>,
    pub outputs: Vec<OutputFile>,
    #[serde(skip)]
    out_dir: PathBuf,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

impl RunManifest {
    pub fn new(command: &str, out_dir: &Path) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            config_hash: None,
            seed: None,
            seed_schedule: None,
            threads: rayon::current_num_threads(),
            timings: Vec::new(),
            outputs: Vec::new(),
            out_dir: out_dir.to_path_buf(),
            clock: None,
        }
    }

    pub fn set_config(&mut self, hash: String, seed: u64) {
        self.config_hash = Some(hash);
        self.seed = Some(seed);
        self.seed_schedule = Some(rng::describe(seed));
    }

    /// Start timing `stage`, closing the previous one.
    pub fn stage(&mut self, stage: &str) {
        self.finish_stage();
        self.clock = Some((stage.to_string(), Instant::now()));
    }

    fn finish_stage(&mut self) {
        if let Some((stage, start)) = self.clock.take() {
            self.timings.push(Timing {
                stage,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }

    /// Write `contents` to `name` inside the output directory and record its hash.
    pub fn write(&mut self, name: &str, contents: &[u8]) -> CliResult<PathBuf> {
        let path = self.out_dir.join(name);
        std::fs::write(&path, contents).map_err(|e| CliError::io(&path, e))?;
        self.record(name, contents);
        Ok(path)
    }

    /// Record a file written by someone else.
    pub fn record_file(&mut self, name: &str) -> CliResult<()> {
        let path = self.out_dir.join(name);
        let bytes = std::fs::read(&path).map_err(|e| CliError::io(&path, e))?;
        self.record(name, &bytes);
        Ok(())
    }

    fn record(&mut self, name: &str, contents: &[u8]) {
        self.outputs.push(OutputFile {
            path: name.to_string(),
            sha256: hex_digest(contents),
        });
    }

    /// Write `manifest-<command>.json`.
    pub fn finish(mut self) -> CliResult<PathBuf> {
        self.finish_stage();
        let path = self.out_dir.join(format!("manifest-{}.json", self.command));
        let json = serde_json::to_string_pretty(&self).expect("manifest serializes");
        std::fs::write(&path, json).map_err(|e| CliError::io(&path, e))?;
        Ok(path)
    }
}
