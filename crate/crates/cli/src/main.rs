use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ortholab::besov::DiffOrder;
use ortholab::exponents::AlphaSchedule;
use ortholab::solver::Method;
use ortholab_cli::config::SourcePreset;
use ortholab_cli::{run, CliError, Command, RunConfig};

/// Exponent recursions, difference-quotient seminorms and solvers for
/// widely degenerate orthotropic functionals.
#[derive(Parser)]
#[command(name = "ortholab", version)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileFlags {
    #[arg(long = "N")]
    n: Option<usize>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
}

#[derive(Args)]
struct IterationFlags {
    #[arg(long)]
    max_iter: Option<usize>,
    /// Ratio of the geometric α schedule.
    #[arg(long)]
    alpha_ratio: Option<f64>,
}

#[derive(Args)]
struct ProblemFlags {
    /// Nodes per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    /// Growth exponents per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    exponents: Option<Vec<f64>>,
    /// Degeneracy thresholds per axis, comma separated.
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long)]
    eps: Option<f64>,
    /// Decreasing ε schedule, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps_schedule: Option<Vec<f64>>,
    /// Source grid file, replacing the configured source.
    #[arg(long)]
    source_grid: Option<PathBuf>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    solver_max_iter: Option<usize>,
    #[arg(long, value_parser = parse_method)]
    method: Option<Method>,
}

#[derive(Subcommand)]
enum Sub {
    /// Run the differentiability recursion for one profile.
    Exponents {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        profile: ProfileFlags,
        #[command(flatten)]
        iteration: IterationFlags,
    },
    /// Classify a rectangular (p, q) grid.
    RegionScan {
        #[command(flatten)]
        common: Common,
        #[arg(long = "N")]
        n: Option<usize>,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long)]
        p_min: Option<f64>,
        #[arg(long)]
        p_max: Option<f64>,
        #[arg(long)]
        p_steps: Option<usize>,
        #[arg(long)]
        q_min: Option<f64>,
        #[arg(long)]
        q_max: Option<f64>,
        #[arg(long)]
        q_steps: Option<usize>,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        iteration: IterationFlags,
    },
    /// Difference quotients and fractional order of a sampled field.
    BesovEstimate {
        #[command(flatten)]
        common: Common,
        /// Grid file to analyse.
        input: Option<PathBuf>,
        #[arg(long)]
        axis: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        /// Also report seminorms of this order.
        #[arg(long)]
        order: Option<f64>,
        /// Use second differences.
        #[arg(long)]
        second: bool,
    },
    /// Minimize the discrete energy.
    Solve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        problem: ProblemFlags,
        /// Write the solution grid here.
        #[arg(long)]
        grid: Option<PathBuf>,
    },
    /// Refinement study of solution grids.
    Probe {
        #[command(flatten)]
        common: Common,
        /// Solution grids, coarsest first. Without them the problem is solved
        /// on every level.
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        problem: ProblemFlags,
        /// Nodes per axis of each level, comma separated.
        #[arg(long, value_delimiter = ',')]
        levels: Option<Vec<usize>>,
        #[arg(long)]
        margin: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Seeded fuzz of the pointwise inequalities.
    Inequalities {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    match s {
        "newton" => Ok(Method::Newton),
        "barzilai_borwein" | "bb" => Ok(Method::BarzilaiBorwein),
        _ => Err(format!("unknown method {s:?}; use newton or barzilai_borwein")),
    }
}

fn set<T>(slot: &mut T, flag: Option<T>) {
    if let Some(v) = flag {
        *slot = v;
    }
}

fn apply_iteration(cfg: &mut RunConfig, it: IterationFlags) {
    set(&mut cfg.iteration.max_iter, it.max_iter);
    if let Some(ratio) = it.alpha_ratio {
        cfg.iteration.schedule = AlphaSchedule::Geometric { ratio };
    }
}

fn apply_problem(cfg: &mut RunConfig, pf: ProblemFlags) {
    let pr = &mut cfg.problem;
    set(&mut pr.nodes, pf.nodes);
    set(&mut pr.exponents, pf.exponents);
    set(&mut pr.deltas, pf.deltas);
    if let Some(eps) = pf.eps {
        pr.eps = eps;
        pr.eps_schedule = None;
    }
    if pf.eps_schedule.is_some() {
        pr.eps_schedule = pf.eps_schedule;
    }
    if let Some(path) = pf.source_grid {
        pr.source = SourcePreset::Grid { path };
    }
    set(&mut cfg.solver.tol, pf.tol);
    set(&mut cfg.solver.max_iter, pf.solver_max_iter);
    set(&mut cfg.solver.method, pf.method);
}

/// Loads the config file, if any, and layers the flags on top.
fn build_config(cli: Cli) -> Result<RunConfig, CliError> {
    let (common, command) = match &cli.command {
        Sub::Exponents { common, .. } => (common, Command::Exponents),
        Sub::RegionScan { common, .. } => (common, Command::RegionScan),
        Sub::BesovEstimate { common, .. } => (common, Command::BesovEstimate),
        Sub::Solve { common, .. } => (common, Command::Solve),
        Sub::Probe { common, .. } => (common, Command::Probe),
        Sub::Inequalities { common, .. } => (common, Command::Inequalities),
    };
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    cfg.command = Some(command);
    set(&mut cfg.seed, common.seed);
    if common.out.is_some() {
        cfg.output.report = common.out.clone();
    }
    match cli.command {
        Sub::Exponents { profile, iteration, .. } => {
            set(&mut cfg.profile.n, profile.n);
            set(&mut cfg.profile.ell, profile.ell);
            set(&mut cfg.profile.p, profile.p);
            set(&mut cfg.profile.q, profile.q);
            apply_iteration(&mut cfg, iteration);
        }
        Sub::RegionScan {
            n,
            ell,
            p_min,
            p_max,
            p_steps,
            q_min,
            q_max,
            q_steps,
            csv,
            iteration,
            ..
        } => {
            let sc = &mut cfg.scan;
            set(&mut sc.n, n);
            set(&mut sc.ell, ell);
            set(&mut sc.p_min, p_min);
            set(&mut sc.p_max, p_max);
            set(&mut sc.p_steps, p_steps);
            set(&mut sc.q_min, q_min);
            set(&mut sc.q_max, q_max);
            set(&mut sc.q_steps, q_steps);
            if csv.is_some() {
                cfg.output.csv = csv;
            }
            apply_iteration(&mut cfg, iteration);
        }
        Sub::BesovEstimate {
            input,
            axis,
            p,
            order,
            second,
            ..
        } => {
            let b = &mut cfg.besov;
            if input.is_some() {
                b.input = input;
            }
            set(&mut b.axis, axis);
            set(&mut b.p, p);
            if order.is_some() {
                b.order = order;
            }
            if second {
                b.difference = DiffOrder::Second;
            }
        }
        Sub::Solve { problem, grid, .. } => {
            apply_problem(&mut cfg, problem);
            if grid.is_some() {
                cfg.output.grid = grid;
            }
        }
        Sub::Probe {
            inputs,
            problem,
            levels,
            margin,
            csv,
            ..
        } => {
            apply_problem(&mut cfg, problem);
            if !inputs.is_empty() {
                cfg.probe.inputs = inputs;
            }
            set(&mut cfg.probe.levels, levels);
            set(&mut cfg.probe.margin, margin);
            if csv.is_some() {
                cfg.output.csv = csv;
            }
        }
        Sub::Inequalities { samples, .. } => {
            set(&mut cfg.inequalities.samples, samples);
        }
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = build_config(cli).and_then(|cfg| {
        let report = run(&cfg)?;
        let json = report.to_json();
        match &cfg.output.report {
            Some(path) => std::fs::write(path, json)
                .map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))?,
            None => print!("{json}"),
        }
        Ok(report.exit_code())
    });
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("ortholab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
