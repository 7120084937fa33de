//! Artifact writers. CSV files start with a `# config:` comment line holding
//! the resolved configuration as JSON; JSON files carry it under "config".

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use emscatter::io::{fmt_c64_pair, fmt_f64};
use emscatter::{CMat3, CVec3, Vec3};
use serde_json::{json, Value};

use crate::CliError;

pub struct Artifacts {
    dir: PathBuf,
    config: Value,
}

impl Artifacts {
    pub fn new(dir: &Path, config: Value) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        Ok(Self { dir: dir.to_path_buf(), config })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn csv(&self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) -> Result<(), CliError> {
        let path = self.path(name);
        let io_err = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
        let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
        writeln!(out, "# config: {}", self.config).map_err(io_err)?;
        writeln!(out, "{header}").map_err(io_err)?;
        for row in rows {
            writeln!(out, "{row}").map_err(io_err)?;
        }
        out.flush().map_err(io_err)?;
        log::info!("wrote {}", path.display());
        Ok(())
    }

    pub fn json(&self, name: &str, mut body: Value) -> Result<(), CliError> {
        let path = self.path(name);
        if let Value::Object(map) = &mut body {
            map.insert("config".into(), self.config.clone());
        }
        let text = serde_json::to_string_pretty(&body).expect("json serializes");
        fs::write(&path, text + "\n").map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        log::info!("wrote {}", path.display());
        Ok(())
    }
}

pub fn real3(v: Vec3) -> String {
    format!("{},{},{}", fmt_f64(v.x), fmt_f64(v.y), fmt_f64(v.z))
}

/// Six columns: re,im for each component.
pub fn complex3(v: CVec3) -> String {
    format!("{},{},{}", fmt_c64_pair(v.x), fmt_c64_pair(v.y), fmt_c64_pair(v.z))
}

pub fn complex3_header(prefix: &str) -> String {
    ["x", "y", "z"].iter().map(|c| format!("{prefix}{c}_re,{prefix}{c}_im")).collect::<Vec<_>>().join(",")
}

pub fn json_c3(v: CVec3) -> Value {
    json!([fmt_c64_pair(v.x), fmt_c64_pair(v.y), fmt_c64_pair(v.z)])
}

pub fn json_m3(m: &CMat3) -> Value {
    Value::Array((0..3).map(|p| Value::Array((0..3).map(|q| json!(fmt_c64_pair(m.get(p, q)))).collect())).collect())
}

pub fn json_f(v: f64) -> Value {
    json!(fmt_f64(v))
}
