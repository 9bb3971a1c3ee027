use std::fmt::Display;
use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::{Experiment, RunError};

pub const MANIFEST_FILE: &str = "manifest.json";
const STAGING_DIR: &str = ".staging";

/// Provenance written at the top of every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub(crate) struct Header {
    pub speclab: &'static str,
    pub speclab_core: &'static str,
    pub experiment: &'static str,
    pub config_sha256: String,
}

impl Header {
    pub(crate) fn new(experiment: Experiment, config_sha256: String) -> Self {
        Header {
            speclab: env!("CARGO_PKG_VERSION"),
            speclab_core: speclab_core::VERSION,
            experiment: experiment.name(),
            config_sha256,
        }
    }

    fn comment(&self) -> String {
        format!(
            "# speclab {} speclab-core {} experiment {} config-sha256 {}\n",
            self.speclab, self.speclab_core, self.experiment, self.config_sha256
        )
    }
}

pub(crate) struct OutputFile {
    pub name: String,
    pub contents: Vec<u8>,
}

/// CSV text with the comment header and a column line.
pub(crate) struct Csv {
    text: String,
    columns: usize,
}

impl Csv {
    pub(crate) fn new(header: &Header, columns: &[&str]) -> Self {
        let mut text = header.comment();
        text.push_str(&columns.join(","));
        text.push('\n');
        Csv {
            text,
            columns: columns.len(),
        }
    }

    /// Appends one row; `None` cells are left empty.
    pub(crate) fn row(&mut self, cells: &[&dyn Cell]) {
        debug_assert_eq!(cells.len(), self.columns, "row width");
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.text.push(',');
            }
            c.write(&mut self.text);
        }
        self.text.push('\n');
    }

    pub(crate) fn finish(self, name: &str) -> OutputFile {
        OutputFile {
            name: name.to_string(),
            contents: self.text.into_bytes(),
        }
    }
}

pub(crate) trait Cell {
    fn write(&self, out: &mut String);
}

impl<T: Display> Cell for T {
    fn write(&self, out: &mut String) {
        use std::fmt::Write;
        write!(out, "{self}").expect("writing to a string");
    }
}

/// An empty CSV cell.
pub(crate) struct Blank;

impl Display for Blank {
    fn fmt(&self, _: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        Ok(())
    }
}

/// Pretty JSON with the header as the first field.
pub(crate) fn json<T: Serialize>(header: &Header, name: &str, body: &T) -> OutputFile {
    #[derive(Serialize)]
    struct Doc<'a, T> {
        header: &'a Header,
        #[serde(flatten)]
        body: &'a T,
    }
    let mut contents =
        serde_json::to_vec_pretty(&Doc { header, body }).expect("summaries serialize");
    contents.push(b'\n');
    OutputFile {
        name: name.to_string(),
        contents,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskSeed {
    pub index: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub name: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Checksum {
    pub file: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Everything needed to rerun an experiment and check its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub speclab_version: String,
    pub speclab_core_version: String,
    pub experiment: String,
    pub config_sha256: String,
    /// TOML snapshot of the configuration as run.
    pub config: String,
    pub jobs: usize,
    pub tasks: Vec<TaskSeed>,
    pub stages: Vec<StageTiming>,
    pub outputs: Vec<Checksum>,
}

/// Writes outputs to a staging directory, records their checksums in the
/// manifest, writes the manifest, and then moves the outputs into `out`.
/// On any failure the staging directory, the manifest and any moved output
/// are removed again.
pub(crate) fn finalize(
    out: &Path,
    files: Vec<OutputFile>,
    manifest: &mut Manifest,
    started: Instant,
) -> Result<(), RunError> {
    fs::create_dir_all(out).map_err(|e| RunError::io(out, e))?;
    let staging = out.join(STAGING_DIR);
    if staging.exists() {
        fs::remove_dir_all(&staging).map_err(|e| RunError::io(&staging, e))?;
    }
    let mut moved = Vec::new();
    let result = stage_and_move(out, &staging, &files, manifest, started, &mut moved);
    if result.is_err() {
        let _ = fs::remove_dir_all(&staging);
        let _ = fs::remove_file(out.join(MANIFEST_FILE));
        for name in moved {
            let _ = fs::remove_file(out.join(name));
        }
        // leave no empty directory behind
        let _ = fs::remove_dir(out);
    }
    result
}

fn stage_and_move(
    out: &Path,
    staging: &Path,
    files: &[OutputFile],
    manifest: &mut Manifest,
    started: Instant,
    moved: &mut Vec<String>,
) -> Result<(), RunError> {
    fs::create_dir(staging).map_err(|e| RunError::io(staging, e))?;
    manifest.outputs.clear();
    for f in files {
        let path = staging.join(&f.name);
        fs::write(&path, &f.contents).map_err(|e| RunError::io(&path, e))?;
        manifest.outputs.push(Checksum {
            file: f.name.clone(),
            sha256: hex::encode(Sha256::digest(&f.contents)),
            bytes: f.contents.len() as u64,
        });
    }
    manifest.stages.push(StageTiming {
        name: "stage outputs".into(),
        seconds: started.elapsed().as_secs_f64(),
    });
    let path = out.join(MANIFEST_FILE);
    let mut text = serde_json::to_vec_pretty(manifest).expect("manifest serializes");
    text.push(b'\n');
    fs::write(&path, text).map_err(|e| RunError::io(&path, e))?;
    for f in files {
        let (from, to) = (staging.join(&f.name), out.join(&f.name));
        fs::rename(&from, &to).map_err(|e| RunError::io(&to, e))?;
        moved.push(f.name.clone());
    }
    fs::remove_dir(staging).map_err(|e| RunError::io(staging, e))?;
    Ok(())
}

/// SHA-256 of a file on disk, hex encoded.
pub fn file_sha256(path: &Path) -> std::io::Result<String> {
    Ok(hex::encode(Sha256::digest(fs::read(path)?)))
}
