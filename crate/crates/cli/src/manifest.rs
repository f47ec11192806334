//! Run manifest: a flat JSON object echoing every config key, grid checksum,
//! per-run reports, wall clock, and code version. Written atomically, last.

use crate::config::RunConfig;
use serde_json::{Map, Value};
use std::io::Write as _;
use std::path::Path;

pub struct RunManifest {
    entries: Map<String, Value>,
}

impl RunManifest {
    pub fn new(config: &RunConfig, command: &str, grid_checksum: u64) -> Self {
        let mut entries = Map::new();
        for (k, v) in config.entries() {
            entries.insert(format!("config.{k}"), Value::String(v.clone()));
        }
        entries.insert("command".into(), Value::String(command.into()));
        entries.insert(
            "grid_checksum".into(),
            Value::String(format!("{grid_checksum:016x}")),
        );
        entries.insert(
            "code_version".into(),
            Value::String(env!("CARGO_PKG_VERSION").into()),
        );
        Self { entries }
    }

    pub fn record(&mut self, key: &str, value: impl Into<Value>) {
        self.entries.insert(format!("report.{key}"), value.into());
    }

    pub fn record_f64(&mut self, key: &str, value: f64) {
        // NaN is not representable in JSON; encode it explicitly
        let v = if value.is_finite() {
            Value::from(value)
        } else {
            Value::String(format!("{value}"))
        };
        self.entries.insert(format!("report.{key}"), v);
    }

    /// Write `manifest.json` atomically (temp file + rename) with the elapsed
    /// wall clock stamped in.
    pub fn write(mut self, out_dir: &Path, wall_clock_s: f64) -> std::io::Result<()> {
        self.entries
            .insert("wall_clock_s".into(), Value::from(wall_clock_s));
        let text = serde_json::to_string_pretty(&Value::Object(self.entries))?;
        let tmp = out_dir.join("manifest.json.tmp");
        let target = out_dir.join("manifest.json");
        {
            let mut f = std::fs::File::create(&tmp)?;
            f.write_all(text.as_bytes())?;
            f.write_all(b"\n")?;
            f.sync_all()?;
        }
        std::fs::rename(&tmp, &target)
    }
}
