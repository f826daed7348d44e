use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

pub const TOOL: &str = "fbm-ilt";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const MANIFEST_FILE: &str = "manifest.json";

/// Identity written at the top of every emitted file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Header {
    pub tool: String,
    pub version: String,
    pub config_hash: String,
}

impl Header {
    pub fn new(config_hash: &str) -> Self {
        Self {
            tool: TOOL.into(),
            version: VERSION.into(),
            config_hash: config_hash.into(),
        }
    }

    /// Single-line form used after `#` in CSV files.
    pub fn line(&self) -> String {
        format!("{} {} config={}", self.tool, self.version, self.config_hash)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Path relative to the output directory.
    pub path: String,
    pub bytes: u64,
    pub subcommand: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub started_unix: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub header: Header,
    pub platform: String,
    pub threads: usize,
    pub output_dir: PathBuf,
    /// Whether this run had to create the output directory.
    pub created_output_dir: bool,
    pub timings: BTreeMap<String, Timing>,
    pub outputs: Vec<OutputFile>,
}

pub fn platform_fingerprint() -> String {
    format!(
        "{}-{} ({}) {} bytes/pointer",
        std::env::consts::OS,
        std::env::consts::ARCH,
        std::env::consts::FAMILY,
        std::mem::size_of::<usize>()
    )
}

pub fn unix_now() -> f64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

impl RunManifest {
    /// Loads the manifest in `dir` when it belongs to the same configuration,
    /// otherwise starts a fresh one.
    pub fn open(dir: &Path, header: Header, created_output_dir: bool) -> Self {
        let existing = fs::read(dir.join(MANIFEST_FILE))
            .ok()
            .and_then(|b| serde_json::from_slice::<RunManifest>(&b).ok())
            .filter(|m| m.header == header);
        let mut m = existing.unwrap_or_else(|| RunManifest {
            header,
            platform: String::new(),
            threads: 0,
            output_dir: dir.to_path_buf(),
            created_output_dir,
            timings: BTreeMap::new(),
            outputs: Vec::new(),
        });
        m.platform = platform_fingerprint();
        m.threads = rayon::current_num_threads();
        m.output_dir = dir.to_path_buf();
        m.created_output_dir |= created_output_dir;
        m
    }

    pub fn record(&mut self, subcommand: &str, timing: Timing, files: &[PathBuf]) -> std::io::Result<()> {
        self.timings.insert(subcommand.to_string(), timing);
        for f in files {
            let rel = f
                .strip_prefix(&self.output_dir)
                .unwrap_or(f)
                .to_string_lossy()
                .into_owned();
            let bytes = fs::metadata(f)?.len();
            self.outputs.retain(|o| o.path != rel);
            self.outputs.push(OutputFile {
                path: rel,
                bytes,
                subcommand: subcommand.to_string(),
            });
        }
        self.outputs.sort_by(|a, b| a.path.cmp(&b.path));
        Ok(())
    }

    pub fn write(&self) -> std::io::Result<PathBuf> {
        let path = self.output_dir.join(MANIFEST_FILE);
        let mut text = serde_json::to_string_pretty(self).map_err(std::io::Error::other)?;
        text.push('\n');
        fs::write(&path, text)?;
        Ok(path)
    }
}
