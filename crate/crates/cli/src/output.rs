//! Output directory bookkeeping and the run manifest.

use std::fs;
use std::io::Write;
use std::path::{Component, Path, PathBuf};
use std::time::Instant;

use finsler_lab::bench::report::hex;
use finsler_lab::bench::{BenchReport, Table};
use finsler_lab::{Error, Result};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub const MANIFEST: &str = "manifest.toml";

#[derive(Serialize)]
struct FileEntry {
    path: String,
    bytes: u64,
    sha256: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    seed: u64,
    versions: Versions,
    config: toml::Table,
    timings: toml::Table,
    files: Vec<FileEntry>,
}

#[derive(Serialize)]
struct Versions {
    finslab: &'static str,
    format: u32,
}

/// Collects the files one command writes and records them in a single
/// manifest at the end.
pub struct Run {
    pub dir: PathBuf,
    command: String,
    seed: u64,
    files: Vec<PathBuf>,
    timings: Vec<(String, f64)>,
    start: Instant,
}

impl Run {
    pub fn new(dir: PathBuf, command: &str, seed: u64) -> Result<Self> {
        fs::create_dir_all(&dir)?;
        clear_previous(&dir)?;
        Ok(Run {
            dir,
            command: command.to_string(),
            seed,
            files: Vec::new(),
            timings: Vec::new(),
            start: Instant::now(),
        })
    }

    pub fn table(&mut self, file: &str, t: &Table) -> Result<()> {
        let path = self.dir.join(file);
        t.write_csv(&path)?;
        self.files.push(path);
        Ok(())
    }

    pub fn report(&mut self, r: &BenchReport) -> Result<()> {
        let paths = r.write_csv(&self.dir)?;
        self.files.extend(paths);
        self.timings.push((r.name.clone(), r.runtime.as_secs_f64()));
        Ok(())
    }

    pub fn text(&mut self, file: &str, lines: &[String]) -> Result<()> {
        let path = self.dir.join(file);
        let mut f = fs::File::create(&path)?;
        for l in lines {
            writeln!(f, "{l}")?;
        }
        self.files.push(path);
        Ok(())
    }

    /// Writes the manifest with the resolved `config`; returns its path.
    pub fn finish(mut self, config: Vec<(String, String)>) -> Result<PathBuf> {
        self.timings.push(("total".into(), self.start.elapsed().as_secs_f64()));
        let mut files = Vec::with_capacity(self.files.len());
        for p in &self.files {
            let bytes = fs::read(p)?;
            files.push(FileEntry {
                path: relative(&self.dir, p),
                bytes: bytes.len() as u64,
                sha256: hex(&Sha256::digest(&bytes)),
            });
        }
        let m = Manifest {
            command: &self.command,
            seed: self.seed,
            versions: Versions {
                finslab: env!("CARGO_PKG_VERSION"),
                format: 1,
            },
            config: config.into_iter().map(|(k, v)| (k, toml::Value::String(v))).collect(),
            timings: self.timings.into_iter().map(|(k, v)| (k, toml::Value::Float(v))).collect(),
            files,
        };
        let text = toml::to_string(&m).map_err(|e| Error::Parse(e.to_string()))?;
        let path = self.dir.join(MANIFEST);
        fs::write(&path, text)?;
        Ok(path)
    }
}

/// Removes the files a previous manifest in `dir` lists, and the manifest,
/// so a rerun leaves no unreferenced outputs behind.
fn clear_previous(dir: &Path) -> Result<()> {
    let path = dir.join(MANIFEST);
    let Ok(text) = fs::read_to_string(&path) else {
        return Ok(());
    };
    let old: toml::Table = toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    if let Some(toml::Value::Array(files)) = old.get("files") {
        for f in files {
            let Some(name) = f.get("path").and_then(toml::Value::as_str) else {
                continue;
            };
            let p = Path::new(name);
            if p.components().all(|c| matches!(c, Component::Normal(_))) {
                match fs::remove_file(dir.join(p)) {
                    Err(e) if e.kind() != std::io::ErrorKind::NotFound => return Err(e.into()),
                    _ => {}
                }
            }
        }
    }
    fs::remove_file(path)?;
    Ok(())
}

fn relative(dir: &Path, p: &Path) -> String {
    p.strip_prefix(dir).unwrap_or(p).display().to_string()
}
