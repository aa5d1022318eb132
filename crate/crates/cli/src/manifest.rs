//! Run manifests and output files.
//!
//! The manifest hash covers the command, its parameters, the toolkit version,
//! the seed and the output file names. Timestamps, the output directory and the
//! thread count are recorded in `manifest.json` but left out of the hash.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub parameters: Value,
    pub version: String,
    pub master_seed: Option<u64>,
    pub outputs: Vec<String>,
    pub manifest_hash: String,
    pub started_at: String,
    pub finished_at: String,
    pub output_dir: String,
    pub jobs: Option<usize>,
}

pub fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

/// Hex SHA-256 of the timestamp-free part of a manifest. `serde_json` keeps
/// object keys sorted, so the serialization is canonical.
pub fn manifest_hash(
    command: &str,
    parameters: &Value,
    master_seed: Option<u64>,
    outputs: &[String],
) -> String {
    let body = json!({
        "command": command,
        "parameters": parameters,
        "version": VERSION,
        "master_seed": master_seed,
        "outputs": outputs,
    });
    format!("{:x}", Sha256::digest(body.to_string().as_bytes()))
}

/// Collects output files for one command invocation and writes them together
/// with `manifest.json`.
pub struct OutputSet {
    dir: PathBuf,
    command: String,
    parameters: Value,
    master_seed: Option<u64>,
    started_at: String,
    jobs: Option<usize>,
    files: Vec<(String, OutputBody)>,
}

enum OutputBody {
    Json(Value),
    Csv { header: String, rows: Vec<String> },
}

impl OutputSet {
    pub fn new(
        dir: &Path,
        command: &str,
        parameters: Value,
        master_seed: Option<u64>,
        jobs: Option<usize>,
    ) -> Self {
        OutputSet {
            dir: dir.to_path_buf(),
            command: command.to_string(),
            parameters,
            master_seed,
            started_at: now(),
            jobs,
            files: Vec::new(),
        }
    }

    pub fn json(&mut self, name: &str, value: Value) {
        self.files.push((name.to_string(), OutputBody::Json(value)));
    }

    pub fn csv(&mut self, name: &str, header: &str, rows: Vec<String>) {
        self.files.push((
            name.to_string(),
            OutputBody::Csv {
                header: header.to_string(),
                rows,
            },
        ));
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes every file, stamping each with the manifest hash, then the
    /// manifest itself.
    pub fn write(self) -> io::Result<RunManifest> {
        fs::create_dir_all(&self.dir)?;
        let mut names: Vec<String> = self.files.iter().map(|f| f.0.clone()).collect();
        names.push("manifest.json".into());
        let hash = manifest_hash(&self.command, &self.parameters, self.master_seed, &names);
        for (name, body) in &self.files {
            let text = match body {
                OutputBody::Json(v) => {
                    let mut v = v.clone();
                    if let Value::Object(map) = &mut v {
                        map.insert("manifest_hash".into(), Value::String(hash.clone()));
                    }
                    serde_json::to_string_pretty(&v)? + "\n"
                }
                OutputBody::Csv { header, rows } => {
                    let mut s = format!("# manifest_hash={hash}\n{header}\n");
                    for r in rows {
                        s.push_str(r);
                        s.push('\n');
                    }
                    s
                }
            };
            fs::write(self.dir.join(name), text)?;
        }
        let manifest = RunManifest {
            command: self.command,
            parameters: self.parameters,
            version: VERSION.into(),
            master_seed: self.master_seed,
            outputs: names,
            manifest_hash: hash,
            started_at: self.started_at,
            finished_at: now(),
            output_dir: self.dir.display().to_string(),
            jobs: self.jobs,
        };
        fs::write(
            self.dir.join("manifest.json"),
            serde_json::to_string_pretty(&manifest)? + "\n",
        )?;
        Ok(manifest)
    }
}
