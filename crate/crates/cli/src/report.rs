use std::fs::File;
use std::io::{self, Write};
use std::path::Path;
use std::time::Instant;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] skewbound::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
    #[error("cannot write CSV: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(skewbound::Error::NumericFailure(_)) => 1,
            _ => 2,
        }
    }
}

/// One CSV cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Int(usize),
    Float(f64),
    Text(String),
    Empty,
}

impl Field {
    fn render(&self) -> String {
        match self {
            Field::Int(v) => v.to_string(),
            // 17 significant digits round-trip every f64
            Field::Float(v) => format!("{v:.16e}"),
            Field::Text(s) => s.clone(),
            Field::Empty => String::new(),
        }
    }
}

impl From<usize> for Field {
    fn from(v: usize) -> Self {
        Field::Int(v)
    }
}

impl From<f64> for Field {
    fn from(v: f64) -> Self {
        Field::Float(v)
    }
}

impl From<&str> for Field {
    fn from(v: &str) -> Self {
        Field::Text(v.to_string())
    }
}

#[derive(Debug)]
pub struct RunReport {
    pub command: &'static str,
    pub seed: Option<u64>,
    pub parameters: Vec<(&'static str, String)>,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Field>>,
    /// Human-readable result lines for the summary.
    pub notes: Vec<String>,
    pub violations: usize,
    started: Instant,
}

impl RunReport {
    pub fn new(command: &'static str, header: Vec<&'static str>) -> Self {
        RunReport {
            command,
            seed: None,
            parameters: Vec::new(),
            header,
            rows: Vec::new(),
            notes: Vec::new(),
            violations: 0,
            started: Instant::now(),
        }
    }

    pub fn param(&mut self, name: &'static str, value: impl ToString) {
        self.parameters.push((name, value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<Field>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, out: Option<&Path>) -> Result<(), CliError> {
        let sink: Box<dyn Write> = match out {
            Some(path) => Box::new(File::create(path)?),
            None => Box::new(io::stdout().lock()),
        };
        let mut w = csv::Writer::from_writer(sink);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Field::render))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn print_summary(&self) {
        let mut err = io::stderr().lock();
        let params: Vec<String> = self.parameters.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(err, "{} {}", self.command, params.join(" "));
        if let Some(seed) = self.seed {
            let _ = writeln!(err, "  seed: {seed}");
        }
        for note in &self.notes {
            let _ = writeln!(err, "  {note}");
        }
        let _ = writeln!(err, "  violations: {}", self.violations);
        let _ = writeln!(err, "  elapsed: {:.3}s", self.started.elapsed().as_secs_f64());
    }
}
