//! Run configuration: a TOML file with one section per module.

use std::path::{Path, PathBuf};

use ortholab::besov::DiffOrder;
use ortholab::exponents::AlphaSchedule;
use ortholab::solver::{Method, DEFAULT_MAX_ITER, DEFAULT_TOL};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Exponents,
    RegionScan,
    BesovEstimate,
    Solve,
    Probe,
    Inequalities,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Exponents => "exponents",
            Command::RegionScan => "region-scan",
            Command::BesovEstimate => "besov-estimate",
            Command::Solve => "solve",
            Command::Probe => "probe",
            Command::Inequalities => "inequalities",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    /// Subcommand to run; the command line takes precedence.
    pub command: Option<Command>,
    pub seed: u64,
    pub profile: ProfileSection,
    pub iteration: IterationSection,
    pub scan: ScanSection,
    pub besov: BesovSection,
    pub problem: ProblemSection,
    pub solver: SolverSection,
    pub probe: ProbeSection,
    pub inequalities: InequalitySection,
    pub output: OutputSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            seed: 7,
            profile: ProfileSection::default(),
            iteration: IterationSection::default(),
            scan: ScanSection::default(),
            besov: BesovSection::default(),
            problem: ProblemSection::default(),
            solver: SolverSection::default(),
            probe: ProbeSection::default(),
            inequalities: InequalitySection::default(),
            output: OutputSection::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProfileSection {
    #[serde(rename = "N")]
    pub n: usize,
    pub ell: usize,
    pub p: f64,
    pub q: f64,
}

impl Default for ProfileSection {
    fn default() -> Self {
        Self {
            n: 2,
            ell: 1,
            p: 2.0,
            q: 4.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IterationSection {
    pub max_iter: usize,
    pub schedule: AlphaSchedule,
}

impl Default for IterationSection {
    fn default() -> Self {
        Self {
            max_iter: 10_000,
            schedule: AlphaSchedule::default(),
        }
    }
}

/// Rectangular `(p, q)` grid for `region-scan`; `p > q` points are read with
/// the roles of the two groups exchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSection {
    #[serde(rename = "N")]
    pub n: usize,
    pub ell: usize,
    pub p_min: f64,
    pub p_max: f64,
    pub p_steps: usize,
    pub q_min: f64,
    pub q_max: f64,
    pub q_steps: usize,
}

impl Default for ScanSection {
    fn default() -> Self {
        Self {
            n: 2,
            ell: 1,
            p_min: 2.0,
            p_max: 10.0,
            p_steps: 9,
            q_min: 2.0,
            q_max: 10.0,
            q_steps: 9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BesovSection {
    pub input: Option<PathBuf>,
    pub axis: usize,
    pub p: f64,
    pub difference: DiffOrder,
    /// When set, the Nikol'skii and Besov seminorms of this order are
    /// reported as well.
    pub order: Option<f64>,
}

impl Default for BesovSection {
    fn default() -> Self {
        Self {
            input: None,
            axis: 0,
            p: 2.0,
            difference: DiffOrder::First,
            order: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SourcePreset {
    Zero,
    Constant {
        value: f64,
    },
    /// `amplitude · sin(πx₁) · Π_{i≥2} cos(πx_i)`.
    SinCos {
        #[serde(default = "default_amplitude")]
        amplitude: f64,
    },
    /// Source for which `Σ x_i²` solves the Euler–Lagrange equation.
    ParaboloidManufactured,
    /// Values read from a grid file living on the mesh.
    Grid {
        path: PathBuf,
    },
}

fn default_amplitude() -> f64 {
    10.0
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryPreset {
    Zero,
    Constant { value: f64 },
    /// `offset + slope · x`.
    Affine { slope: Vec<f64>, offset: f64 },
    /// `Σ x_i²`.
    Paraboloid,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExactSolution {
    Paraboloid,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub nodes: Vec<usize>,
    pub exponents: Vec<f64>,
    pub deltas: Vec<f64>,
    pub eps: f64,
    /// Strictly decreasing; replaces `eps` by a warm-started continuation
    /// ending at the last entry.
    pub eps_schedule: Option<Vec<f64>>,
    pub source: SourcePreset,
    pub boundary: BoundaryPreset,
    /// Known solution to measure the error against.
    pub exact: Option<ExactSolution>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        Self {
            lower: vec![-1.0, -1.0],
            upper: vec![1.0, 1.0],
            nodes: vec![33, 33],
            exponents: vec![2.0, 4.0],
            deltas: vec![0.0, 0.0],
            eps: 1e-3,
            eps_schedule: None,
            source: SourcePreset::Zero,
            boundary: BoundaryPreset::Zero,
            exact: None,
        }
    }
}

impl ProblemSection {
    pub fn dim(&self) -> usize {
        self.exponents.len()
    }

    /// `ε` of the final stage.
    pub fn final_eps(&self) -> f64 {
        self.eps_schedule
            .as_ref()
            .and_then(|s| s.last().copied())
            .unwrap_or(self.eps)
    }

    fn validate(&self) -> Result<(), CliError> {
        let n = self.dim();
        if n == 0 {
            return Err(CliError::config("problem.exponents is empty"));
        }
        for (name, len) in [
            ("lower", self.lower.len()),
            ("upper", self.upper.len()),
            ("nodes", self.nodes.len()),
            ("deltas", self.deltas.len()),
        ] {
            if len != n {
                return Err(CliError::config(format!(
                    "problem.{name} has {len} entries for {n} exponents"
                )));
            }
        }
        if let BoundaryPreset::Affine { slope, .. } = &self.boundary {
            if slope.len() != n {
                return Err(CliError::config(format!(
                    "affine boundary slope has {} entries for {n} axes",
                    slope.len()
                )));
            }
        }
        if let Some(s) = &self.eps_schedule {
            if s.is_empty() {
                return Err(CliError::config("problem.eps_schedule is empty"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
}

impl Default for SolverSection {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            method: Method::Newton,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProbeSection {
    /// Solution grids, coarsest first. When empty the problem is solved on
    /// each of `levels`.
    pub inputs: Vec<PathBuf>,
    /// Nodes per axis of each refinement level.
    pub levels: Vec<usize>,
    pub margin: f64,
}

impl Default for ProbeSection {
    fn default() -> Self {
        Self {
            inputs: Vec::new(),
            levels: vec![33, 65, 129],
            margin: ortholab::probe::DEFAULT_MARGIN,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InequalitySection {
    pub samples: usize,
    pub p_range: (f64, f64),
    pub delta_range: (f64, f64),
    pub eps_values: Vec<f64>,
    pub ab_range: (f64, f64),
}

impl Default for InequalitySection {
    fn default() -> Self {
        let d = ortholab::integrand::FuzzConfig::default();
        Self {
            samples: d.samples,
            p_range: d.p_range,
            delta_range: d.delta_range,
            eps_values: d.eps_values,
            ab_range: d.ab_range,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    /// JSON report path; stdout when unset.
    pub report: Option<PathBuf>,
    /// CSV side file for scans and refinement series.
    pub csv: Option<PathBuf>,
    /// Solution grid written by `solve`.
    pub grid: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configs serialize")
    }

    /// Structural checks that need no computation.
    pub fn validate(&self) -> Result<(), CliError> {
        match self.command {
            None => Err(CliError::config("no subcommand selected")),
            Some(Command::BesovEstimate) if self.besov.input.is_none() => {
                Err(CliError::config("besov-estimate needs besov.input"))
            }
            Some(Command::Solve) => self.problem.validate(),
            Some(Command::Probe) => {
                self.problem.validate()?;
                let count = if self.probe.inputs.is_empty() {
                    self.probe.levels.len()
                } else {
                    self.probe.inputs.len()
                };
                if count < 3 {
                    return Err(CliError::config(format!("probe needs at least 3 levels, got {count}")));
                }
                Ok(())
            }
            Some(Command::RegionScan) if self.scan.p_steps == 0 || self.scan.q_steps == 0 => {
                Err(CliError::config("region scan needs at least one step per axis"))
            }
            _ => Ok(()),
        }
    }
}
