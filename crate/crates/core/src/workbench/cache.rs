//! Stage cache stamps.
//!
//! A stage's key is the SHA-256 of a JSON document holding the stage name,
//! the crate version and random generator id, the stage's config subtree,
//! and the SHA-256 of every input file. After a stage runs, a stamp with the
//! key and the hash of every output file is written to
//! `<out>/.cache/<stage>.json`. A stage is skipped when its stamp has the
//! same key and every recorded output still exists with the recorded hash.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sampling::GENERATOR;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn file_hash(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stamp {
    pub stage: String,
    pub key: String,
    /// Output path relative to the output directory, mapped to its SHA-256.
    pub outputs: BTreeMap<String, String>,
}

fn relative(out_dir: &Path, path: &Path) -> String {
    path.strip_prefix(out_dir).unwrap_or(path).to_string_lossy().replace('\\', "/")
}

pub fn stage_key(out_dir: &Path, stage: &str, config: &serde_json::Value, inputs: &[PathBuf]) -> Result<String> {
    let mut hashed = Vec::with_capacity(inputs.len());
    for p in inputs {
        hashed.push((relative(out_dir, p), file_hash(p)?));
    }
    hashed.sort();
    let doc = serde_json::json!({
        "stage": stage,
        "crate_version": env!("CARGO_PKG_VERSION"),
        "generator": GENERATOR,
        "config": config,
        "inputs": hashed,
    });
    Ok(sha256_hex(doc.to_string().as_bytes()))
}

fn stamp_path(out_dir: &Path, stage: &str) -> PathBuf {
    out_dir.join(".cache").join(format!("{stage}.json"))
}

pub fn is_fresh(out_dir: &Path, stage: &str, key: &str) -> bool {
    let Ok(text) = std::fs::read_to_string(stamp_path(out_dir, stage)) else {
        return false;
    };
    let Ok(stamp) = serde_json::from_str::<Stamp>(&text) else {
        return false;
    };
    stamp.key == key
        && stamp
            .outputs
            .iter()
            .all(|(rel, hash)| file_hash(&out_dir.join(rel)).is_ok_and(|h| &h == hash))
}

pub fn write_stamp(out_dir: &Path, stage: &str, key: &str, outputs: &[PathBuf]) -> Result<()> {
    let mut map = BTreeMap::new();
    for p in outputs {
        map.insert(relative(out_dir, p), file_hash(p)?);
    }
    let stamp = Stamp { stage: stage.to_owned(), key: key.to_owned(), outputs: map };
    let text = serde_json::to_string_pretty(&stamp).expect("stamp serializes");
    crate::fmt::write_file(&stamp_path(out_dir, stage), text.as_bytes())
}
