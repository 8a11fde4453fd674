//! Output directory handling and the per-run manifest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gridshift_core::seed::derive_seed;
use serde::Serialize;

/// One subcommand invocation: owns the output directory, hands out derived
/// seeds and remembers every file written so the manifest can list them.
pub struct Run {
    command: &'static str,
    out: PathBuf,
    master_seed: u64,
    derived: BTreeMap<String, u64>,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct Manifest<'a, P: Serialize> {
    command: &'a str,
    version: &'a str,
    argv: Vec<String>,
    created_at: String,
    master_seed: u64,
    derived_seeds: &'a BTreeMap<String, u64>,
    params: &'a P,
    outputs: &'a [String],
}

impl Run {
    pub fn new(command: &'static str, out: &Path, master_seed: u64) -> Result<Self> {
        std::fs::create_dir_all(out)
            .with_context(|| format!("creating output directory {}", out.display()))?;
        Ok(Self {
            command,
            out: out.to_path_buf(),
            master_seed,
            derived: BTreeMap::new(),
            outputs: Vec::new(),
        })
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    /// `derive_seed(master, label, index)`, recorded under `label[index]`.
    pub fn seed(&mut self, label: &str, index: u64) -> u64 {
        let s = derive_seed(self.master_seed, label, index);
        self.record_seed(format!("{label}[{index}]"), s);
        s
    }

    pub fn record_seed(&mut self, name: String, seed: u64) {
        self.derived.insert(name, seed);
    }

    /// Path of an output file inside the run directory.
    pub fn output(&mut self, name: &str) -> PathBuf {
        if !self.outputs.iter().any(|o| o == name) {
            self.outputs.push(name.to_string());
        }
        self.out.join(name)
    }

    pub fn create(&mut self, name: &str) -> Result<BufWriter<File>> {
        let path = self.output(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok(BufWriter::new(file))
    }

    /// Pretty JSON with a trailing newline. Contains no timestamps, so reruns
    /// with the same seed are byte-identical.
    pub fn write_json<T: Serialize + ?Sized>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let mut w = self.create(name)?;
        serde_json::to_writer_pretty(&mut w, value)?;
        writeln!(w)?;
        w.flush()?;
        Ok(self.out.join(name))
    }

    /// Writes `<command>.manifest.json`. Only the manifest carries a timestamp.
    pub fn finish<P: Serialize>(self, params: &P) -> Result<()> {
        let name = format!("{}.manifest.json", self.command);
        let manifest = Manifest {
            command: self.command,
            version: env!("CARGO_PKG_VERSION"),
            argv: std::env::args().collect(),
            created_at: chrono::Local::now().to_rfc3339(),
            master_seed: self.master_seed,
            derived_seeds: &self.derived,
            params,
            outputs: &self.outputs,
        };
        let path = self.out.join(&name);
        let mut w = BufWriter::new(
            File::create(&path).with_context(|| format!("creating {}", path.display()))?,
        );
        serde_json::to_writer_pretty(&mut w, &manifest)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}
