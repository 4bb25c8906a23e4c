//! Run manifests: the exact arguments, resolved configuration and SHA-256
//! digests of every input and output. Nothing time- or host-dependent is
//! recorded, so identical runs produce identical manifests.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, without `--out-dir`.
    pub argv: Vec<String>,
    pub config: Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub details: BTreeMap<String, Value>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Collects output files and the manifest for one run.
pub struct Run {
    out_dir: PathBuf,
    command: String,
    argv: Vec<String>,
    config: Value,
    inputs: Vec<FileDigest>,
    outputs: Vec<FileDigest>,
    details: BTreeMap<String, Value>,
}

impl Run {
    pub fn new(out_dir: &Path, command: &str, argv: Vec<String>) -> Result<Self> {
        fs::create_dir_all(out_dir).map_err(|e| CliError::file(out_dir, e))?;
        Ok(Self {
            out_dir: out_dir.to_path_buf(),
            command: command.to_string(),
            argv,
            config: Value::Null,
            inputs: Vec::new(),
            outputs: Vec::new(),
            details: BTreeMap::new(),
        })
    }

    pub fn set_config(&mut self, config: impl Serialize) -> Result<()> {
        self.config = serde_json::to_value(config)?;
        Ok(())
    }

    pub fn detail(&mut self, key: &str, value: impl Serialize) -> Result<()> {
        self.details.insert(key.to_string(), serde_json::to_value(value)?);
        Ok(())
    }

    /// Reads an input file, recording its digest.
    pub fn read_input(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).map_err(|e| CliError::file(path, e))?;
        self.inputs.push(FileDigest { path: path.display().to_string(), sha256: sha256_hex(&bytes) });
        Ok(bytes)
    }

    /// Renders an output in memory, then writes and digests it.
    pub fn write_output(
        &mut self,
        name: &str,
        render: impl FnOnce(&mut Vec<u8>) -> ifsq_core::Result<()>,
    ) -> Result<()> {
        let mut bytes = Vec::new();
        render(&mut bytes)?;
        let path = self.out_dir.join(name);
        fs::write(&path, &bytes).map_err(|e| CliError::file(&path, e))?;
        self.outputs.push(FileDigest { path: name.to_string(), sha256: sha256_hex(&bytes) });
        Ok(())
    }

    pub fn finish(self) -> Result<Manifest> {
        let manifest = Manifest {
            tool: "ifsq".to_string(),
            version: ifsq_core::VERSION.to_string(),
            command: self.command,
            argv: self.argv,
            config: self.config,
            inputs: self.inputs,
            outputs: self.outputs,
            details: self.details,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        let path = self.out_dir.join(MANIFEST_FILE);
        fs::write(&path, text).map_err(|e| CliError::file(&path, e))?;
        Ok(manifest)
    }
}

pub fn load(path: &Path) -> Result<Manifest> {
    let text = fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Drops `--out-dir <dir>` and `--out-dir=<dir>` from an argument list.
pub fn strip_out_dir(args: &[String]) -> Vec<String> {
    let mut kept = Vec::with_capacity(args.len());
    let mut skip_next = false;
    for arg in args {
        if skip_next {
            skip_next = false;
        } else if arg == "--out-dir" {
            skip_next = true;
        } else if !arg.starts_with("--out-dir=") {
            kept.push(arg.clone());
        }
    }
    kept
}
