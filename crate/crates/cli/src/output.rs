//! Output-file helpers shared by the subcommands.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::cli::CliError;

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)?;
    Ok(())
}

pub fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<(), CliError> {
    let f = BufWriter::new(fs::File::create(path)?);
    serde_json::to_writer_pretty(f, value)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    Ok(())
}

pub struct CsvWriter {
    w: BufWriter<fs::File>,
}

impl CsvWriter {
    pub fn create(path: PathBuf, header: &str) -> Result<Self, CliError> {
        let mut w = BufWriter::new(fs::File::create(&path)?);
        writeln!(w, "{header}")?;
        Ok(Self { w })
    }

    pub fn row(&mut self, fields: &[String]) -> Result<(), CliError> {
        writeln!(self.w, "{}", fields.join(","))?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), CliError> {
        self.w.flush()?;
        Ok(())
    }
}

/// Five-number summary for boxplot-ready aggregates.
#[derive(Debug, Clone, serde::Serialize)]
pub struct FiveNum {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl FiveNum {
    pub fn of(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(|a, b| a.total_cmp(b));
        let q = |p: f64| -> f64 {
            let idx = p * (v.len() - 1) as f64;
            let (lo, hi) = (idx.floor() as usize, idx.ceil() as usize);
            v[lo] + (v[hi] - v[lo]) * (idx - lo as f64)
        };
        FiveNum { min: v[0], q25: q(0.25), median: q(0.5), q75: q(0.75), max: *v.last().unwrap() }
    }
}
