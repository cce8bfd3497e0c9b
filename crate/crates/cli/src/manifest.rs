//! Run manifests: every output file gets a sibling `<name>.manifest`
//! recording the command, tool version, input and output content hashes and
//! a timestamp, so a result can be traced back to exactly what produced it.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

/// FNV-1a 64-bit content hash; stable across platforms and releases.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

#[derive(Debug, Clone, Default)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<(String, u64)>,
    pub inputs: Vec<(String, u64)>,
    pub outputs: Vec<(String, u64)>,
}

impl RunManifest {
    pub fn new(command: &str) -> Self {
        RunManifest {
            command: command.to_string(),
            ..Default::default()
        }
    }

    pub fn set_config(&mut self, path: &str, contents: &[u8]) {
        self.config = Some((path.to_string(), fnv1a64(contents)));
    }

    pub fn add_input(&mut self, path: &Path, contents: &[u8]) {
        self.inputs
            .push((path.display().to_string(), fnv1a64(contents)));
    }

    pub fn add_output(&mut self, path: &Path, contents: &[u8]) {
        self.outputs
            .push((path.display().to_string(), fnv1a64(contents)));
    }

    /// Renders the manifest text. Only the timestamp line varies between
    /// reruns of an identical command.
    pub fn render(&self) -> String {
        let ts = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let mut s = String::new();
        let _ = writeln!(s, "command: {}", self.command);
        let _ = writeln!(s, "version: {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(s, "timestamp_unix: {ts}");
        match &self.config {
            Some((path, hash)) => {
                let _ = writeln!(s, "config: {path} fnv1a64={hash:016x}");
            }
            None => {
                let _ = writeln!(s, "config: defaults");
            }
        }
        for (path, hash) in &self.inputs {
            let _ = writeln!(s, "input: {path} fnv1a64={hash:016x}");
        }
        for (path, hash) in &self.outputs {
            let _ = writeln!(s, "output: {path} fnv1a64={hash:016x}");
        }
        s
    }
}
