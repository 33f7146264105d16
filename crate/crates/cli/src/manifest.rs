//! Run manifest: config hash, outputs, and the pass/fail record for every
//! threshold a run exercises. Written atomically at the end of the run.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: String,
    pub config_hash: String,
    pub tool_version: String,
    pub wall_time_s: f64,
    pub outputs: Vec<String>,
    pub checks: Vec<CheckResult>,
}

pub struct RunRecorder {
    experiment: String,
    config_hash: String,
    started: Instant,
    out_dir: PathBuf,
    outputs: Vec<String>,
    checks: Vec<CheckResult>,
}

impl RunRecorder {
    pub fn new(experiment: &str, config_json: &str, out_dir: &Path) -> std::io::Result<Self> {
        fs::create_dir_all(out_dir)?;
        Ok(Self {
            experiment: experiment.to_string(),
            config_hash: format!("{:016x}", fnv1a64(config_json.as_bytes())),
            started: Instant::now(),
            out_dir: out_dir.to_path_buf(),
            outputs: Vec::new(),
            checks: Vec::new(),
        })
    }

    pub fn out_dir(&self) -> &Path {
        &self.out_dir
    }

    /// Open an output file and remember it in the manifest.
    pub fn create(&mut self, name: &str) -> std::io::Result<fs::File> {
        let path = self.out_dir.join(name);
        self.outputs.push(name.to_string());
        fs::File::create(path)
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        let detail = detail.into();
        println!("  [{}] {name}: {detail}", if passed { "ok" } else { "FAIL" });
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
        });
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// Write the manifest atomically and report overall status.
    pub fn finish(self) -> std::io::Result<bool> {
        let ok = self.all_passed();
        let manifest = RunManifest {
            experiment: self.experiment,
            config_hash: self.config_hash,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s: self.started.elapsed().as_secs_f64(),
            outputs: self.outputs,
            checks: self.checks,
        };
        let tmp = self.out_dir.join("manifest.json.tmp");
        let final_path = self.out_dir.join("manifest.json");
        fs::write(&tmp, serde_json::to_string_pretty(&manifest)?)?;
        fs::rename(&tmp, &final_path)?;
        Ok(ok)
    }
}

fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325_u64;
    for &b in data {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}
