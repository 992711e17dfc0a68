//! JSON-lines run manifests.
//!
//! Every command writes `<command>_manifest.jsonl` into its output
//! directory: a header line with the effective config and library version,
//! then one line per cell with its seed and runtime counters. Together with
//! the config the manifest is sufficient to re-produce every data file
//! byte-for-byte (wall-clock fields aside).

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde_json::json;

use crate::CliResult;

pub struct ManifestWriter {
    out: BufWriter<File>,
}

impl ManifestWriter {
    pub fn create(dir: &Path, command: &str, config: &BTreeMap<String, String>) -> CliResult<Self> {
        std::fs::create_dir_all(dir)?;
        let path = dir.join(format!("{command}_manifest.jsonl"));
        let mut out = BufWriter::new(File::create(path)?);
        let header = json!({
            "command": command,
            "version": env!("CARGO_PKG_VERSION"),
            "config": config,
        });
        writeln!(out, "{header}")?;
        Ok(ManifestWriter { out })
    }

    pub fn cell(&mut self, record: serde_json::Value) -> CliResult<()> {
        writeln!(self.out, "{record}")?;
        Ok(())
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Milliseconds elapsed since `start`.
pub fn wall_ms(start: std::time::Instant) -> u128 {
    start.elapsed().as_millis()
}
