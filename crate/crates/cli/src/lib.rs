//! Batch front end: config ingestion, dispatch to the library and canonical
//! JSON reports.

pub mod config;
mod commands;

use std::collections::BTreeMap;
use std::fmt;
use std::time::Instant;

use serde::Serialize;
use serde_json::Value;

pub use config::{Command, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERDICT_FAIL: i32 = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Numerical,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Config,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: ErrorKind::Numerical,
            message: message.into(),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.kind {
            ErrorKind::Config => EXIT_CONFIG,
            ErrorKind::Numerical => EXIT_NUMERICAL,
        }
    }

    fn context(self, what: &str) -> Self {
        Self {
            message: format!("{what}: {}", self.message),
            ..self
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let label = match self.kind {
            ErrorKind::Config => "configuration error",
            ErrorKind::Numerical => "numerical failure",
        };
        write!(f, "{label}: {}", self.message)
    }
}

impl std::error::Error for CliError {}

impl From<ortholab::Error> for CliError {
    fn from(e: ortholab::Error) -> Self {
        use ortholab::Error as E;
        let kind = match e {
            E::Numerical(_) | E::Divergence(_) | E::Pole(_) | E::DegenerateEmbedding { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Config,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The computation finished but did not certify its result.
    NumericalFailure,
    /// The computation finished and its pass/fail verdict is FAIL.
    VerdictFail,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Ok => EXIT_OK,
            Status::NumericalFailure => EXIT_NUMERICAL,
            Status::VerdictFail => EXIT_VERDICT_FAIL,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Timings {
    pub total_seconds: f64,
    pub stages: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunReport {
    pub artifact: String,
    pub version: String,
    pub command: Command,
    pub seed: u64,
    pub config: RunConfig,
    pub status: Status,
    pub output: Value,
    pub timings: Timings,
}

impl RunReport {
    /// The report as a JSON value; object keys are sorted.
    pub fn to_value(&self) -> Value {
        serde_json::to_value(self).expect("reports serialize")
    }

    /// [`to_value`](Self::to_value) without the wall-clock timings: the part
    /// that must be identical across reruns.
    pub fn payload(&self) -> Value {
        let mut v = self.to_value();
        if let Value::Object(m) = &mut v {
            m.remove("timings");
        }
        v
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("reports serialize");
        s.push('\n');
        s
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }
}

/// What a subcommand hands back to [`run`].
pub(crate) struct Outcome {
    pub output: Value,
    pub status: Status,
}

/// Stage timer shared by the subcommands.
pub(crate) struct Clock {
    stages: BTreeMap<String, f64>,
}

impl Clock {
    fn new() -> Self {
        Self { stages: BTreeMap::new() }
    }

    pub fn time<T>(&mut self, stage: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.stages.insert(stage.into(), start.elapsed().as_secs_f64());
        out
    }
}

/// Validates `config` and dispatches to the selected subcommand. Side files
/// named in `config.output` (CSV, solution grid) are written here; the JSON
/// report is left to the caller.
pub fn run(config: &RunConfig) -> Result<RunReport, CliError> {
    config.validate()?;
    let command = config.command.expect("validated");
    let start = Instant::now();
    let mut clock = Clock::new();
    let outcome = match command {
        Command::Exponents => commands::exponents(config, &mut clock),
        Command::RegionScan => commands::region_scan(config, &mut clock),
        Command::BesovEstimate => commands::besov_estimate(config, &mut clock),
        Command::Solve => commands::solve(config, &mut clock),
        Command::Probe => commands::probe(config, &mut clock),
        Command::Inequalities => commands::inequalities(config, &mut clock),
    }
    .map_err(|e| e.context(command.name()))?;
    Ok(RunReport {
        artifact: "ortholab".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command,
        seed: config.seed,
        config: config.clone(),
        status: outcome.status,
        output: outcome.output,
        timings: Timings {
            total_seconds: start.elapsed().as_secs_f64(),
            stages: clock.stages,
        },
    })
}
