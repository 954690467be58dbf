use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

use steklov_core::{Error, ErrorKind};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Stage {
    pub name: String,
    pub wall_time_s: f64,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub tool_version: &'static str,
    pub command: String,
    pub params: Value,
    pub seed: Option<u64>,
    pub threads: usize,
    pub stages: Vec<Stage>,
    pub payload: Value,
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Core(Error),
    /// A report was produced but a check in it did not hold.
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Core(e.into())
    }
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Core(e) => match e.kind() {
                ErrorKind::InvalidInput => 2,
                ErrorKind::Numerical => 3,
                ErrorKind::Precondition => 4,
            },
            Failure::Check(_) => 4,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Usage(m) | Failure::Check(m) => m.clone(),
            Failure::Core(e) => e.to_string(),
        }
    }
}

pub type Outcome<T> = std::result::Result<T, Failure>;

pub fn usage<T>(msg: impl Into<String>) -> Outcome<T> {
    Err(Failure::Usage(msg.into()))
}

#[derive(Debug, Default)]
pub struct Timer {
    pub stages: Vec<Stage>,
}

impl Timer {
    pub fn run<T>(&mut self, name: &str, f: impl FnOnce() -> Outcome<T>) -> Outcome<T> {
        let start = Instant::now();
        let out = f();
        self.stages.push(Stage { name: name.to_string(), wall_time_s: start.elapsed().as_secs_f64() });
        out
    }
}

pub fn emit(report: &RunReport, path: Option<&Path>) -> Outcome<()> {
    let text = serde_json::to_string_pretty(report)?;
    match path {
        Some(p) => fs::write(p, text + "\n")?,
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}
