use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use kquant::{DiscreteMeasure, MeasureSummary};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::args::{Common, Mode};

/// Failure classes, one per exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Io(_) => 3,
            CliError::Solver(_) => 4,
        }
    }
}

/// Classifies a library error raised while solving.
pub fn solve_error(e: kquant::Error) -> CliError {
    use kquant::Error as E;
    match e {
        E::InvalidExponent(_)
        | E::InvalidLevelCount { .. }
        | E::InvalidTolerance(_)
        | E::InvalidEpsilon(_)
        | E::InvalidInitLevels
        | E::EmptyGrid
        | E::TooManyAtoms { .. }
        | E::InfiniteMeasure
        | E::EmptyFamily
        | E::MixedFamily
        | E::InvalidParameters(_) => CliError::Config(e.to_string()),
        _ => CliError::Solver(e.to_string()),
    }
}

pub fn read_measure(path: &Path, mode: Mode) -> Result<DiscreteMeasure, CliError> {
    let file = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let m = DiscreteMeasure::read_csv(BufReader::new(file))
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(m.with_infinite_complement(mode == Mode::Infinite))
}

/// CSV files of a directory in name order, or the path itself.
pub fn expand_inputs(path: &Path) -> Result<Vec<PathBuf>, CliError> {
    if !path.is_dir() {
        return Ok(vec![path.to_path_buf()]);
    }
    let mut files = Vec::new();
    let entries = std::fs::read_dir(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::Io(e.to_string()))?;
        let p = entry.path();
        if p.is_file() && p.extension().is_some_and(|x| x == "csv") {
            files.push(p);
        }
    }
    files.sort();
    if files.is_empty() {
        return Err(CliError::Io(format!("{}: no .csv files", path.display())));
    }
    Ok(files)
}

#[derive(Debug, Serialize)]
pub struct Summary {
    pub n: usize,
    pub total_mass: f64,
    pub min: f64,
    pub max: f64,
}

impl From<MeasureSummary> for Summary {
    fn from(s: MeasureSummary) -> Self {
        Self {
            n: s.n,
            total_mass: s.total_mass,
            min: s.min,
            max: s.max,
        }
    }
}

/// Summary of several measures taken together.
pub fn joint_summary<'a>(ms: impl IntoIterator<Item = &'a DiscreteMeasure>) -> Summary {
    let mut s = Summary {
        n: 0,
        total_mass: 0.0,
        min: f64::INFINITY,
        max: f64::NEG_INFINITY,
    };
    for m in ms {
        s.n += m.len();
        s.total_mass += m.total_mass();
        s.min = s.min.min(m.min());
        s.max = s.max.max(m.max());
    }
    s
}

/// Assembles the top-level JSON report.
pub fn json_report(config: Value, summary: &Summary, result: Value, audits: Option<Value>, common: &Common) -> String {
    let mut report = json!({
        "config": config,
        "measure_summary": summary,
        "result": result,
    });
    if let Some(a) = audits {
        report["audits"] = a;
    }
    if common.stamp {
        let secs = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        report["metadata"] = json!({ "timestamp": secs });
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    text
}

/// Writes to `path` through a temporary file in the same directory, or to
/// standard output.
pub fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match path {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(io)?;
            out.flush().map_err(io)
        }
        Some(path) => {
            let dir = match path.parent() {
                Some(d) if !d.as_os_str().is_empty() => d,
                _ => Path::new("."),
            };
            let mut tmp =
                tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
            tmp.write_all(text.as_bytes()).map_err(io)?;
            tmp.as_file().sync_all().map_err(io)?;
            tmp.persist(path)
                .map_err(|e| CliError::Io(format!("{}: {}", path.display(), e.error)))?;
            Ok(())
        }
    }
}

/// `x` formatted so that it parses back to the same binary64 value.
pub fn num(x: f64) -> String {
    format!("{x:?}")
}
