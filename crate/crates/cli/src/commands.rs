use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use ortholab::besov::{self, SeminormSpec};
use ortholab::exponents::{self, AnisotropyProfile, LimitValue, Verdict};
use ortholab::grid::GridFunction;
use ortholab::integrand::{self, FuzzConfig, PowerIntegrand};
use ortholab::probe::{self, ProbeOptions};
use ortholab::solver::{self, Ansatz, DiscreteProblem, Mesh, SolveOptions, SolveResult};
use ortholab::Error;
use serde_json::{json, Value};

use crate::config::{BoundaryPreset, ExactSolution, ProblemSection, RunConfig, SourcePreset};
use crate::{CliError, Clock, Outcome, Status};

type Result<T> = std::result::Result<T, CliError>;

fn ok(output: Value) -> Result<Outcome> {
    Ok(Outcome {
        output,
        status: Status::Ok,
    })
}

fn write_side_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::config(format!("cannot write {}: {e}", path.display())))
}

fn verdict_string(v: &Verdict) -> String {
    match v {
        Verdict::FullDifferentiability { k0 } => format!("FullDifferentiability({k0})"),
        Verdict::ConvergesBelowOne { limit, .. } => format!("ConvergesBelowOne({limit})"),
        Verdict::Inconclusive { last_iterate } => format!("Inconclusive({last_iterate})"),
    }
}

pub fn exponents(cfg: &RunConfig, clock: &mut Clock) -> Result<Outcome> {
    let pr = &cfg.profile;
    let profile = AnisotropyProfile::normalized(pr.n, pr.ell, pr.p, pr.q)?;
    let trace = clock.time("iterate", || {
        exponents::iterate_scheme(&profile, &cfg.iteration.schedule, cfg.iteration.max_iter)
    })?;
    let polynomial = match exponents::limit_polynomial(&profile) {
        Ok(poly) => json!({
            "a2": poly.a2,
            "a1": poly.a1,
            "a0": poly.a0,
            "disc": poly.discriminant,
            "roots": poly.roots.map(|(a, b)| vec![a, b]),
        }),
        Err(Error::LinearLimitCase) => Value::Null,
        Err(e) => return Err(e.into()),
    };
    let conditions = exponents::check_conditions(&profile);
    let steps: Vec<Value> = trace
        .steps
        .iter()
        .map(|s| {
            json!({
                "k": s.k,
                "alpha": s.alpha,
                "t": s.t_small,
                "t_vector": s.t.as_slice(),
                "gamma": s.gamma,
                "chi": s.chi,
            })
        })
        .collect();
    ok(json!({
        "profile": profile,
        "tau0": exponents::tau0(&profile),
        "initial_t": exponents::initial_vector(&profile.exponents())?.as_slice(),
        "trace": steps,
        "polynomial": polynomial,
        "closed_form_limit": exponents::closed_form_limit(&profile),
        "verdict": verdict_string(&trace.verdict),
        "verdict_detail": trace.verdict,
        "predicted": trace.predicted(&profile).as_slice(),
        "conditions_ok": conditions.satisfied,
        "conditions": conditions,
    }))
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps).map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64).collect()
}

pub fn region_scan(cfg: &RunConfig, clock: &mut Clock) -> Result<Outcome> {
    let sc = &cfg.scan;
    let mut rows = Vec::new();
    let mut csv = String::from("p,q,conditions_ok,verdict,L\n");
    let mut all_ok = true;
    let mut counts = std::collections::BTreeMap::<String, usize>::new();
    clock.time("scan", || -> Result<()> {
        for p in linspace(sc.p_min, sc.p_max, sc.p_steps) {
            for q in linspace(sc.q_min, sc.q_max, sc.q_steps) {
                let profile = AnisotropyProfile::normalized(sc.n, sc.ell, p, q)?;
                let ok = exponents::check_conditions(&profile).satisfied;
                let trace = exponents::iterate_scheme(&profile, &cfg.iteration.schedule, cfg.iteration.max_iter)?;
                let label = trace.verdict.label();
                let limit = match exponents::closed_form_limit(&profile) {
                    LimitValue::Finite(l) => l,
                    LimitValue::Divergent => f64::INFINITY,
                };
                all_ok &= ok;
                *counts.entry(label.to_string()).or_default() += 1;
                let _ = writeln!(csv, "{p},{q},{ok},{label},{limit}");
                rows.push(json!({
                    "p": p,
                    "q": q,
                    "conditions_ok": ok,
                    "verdict": label,
                    "L": if limit.is_finite() { json!(limit) } else { json!("inf") },
                }));
            }
        }
        Ok(())
    })?;
    if let Some(path) = &cfg.output.csv {
        write_side_file(path, &csv)?;
    }
    ok(json!({
        "N": sc.n,
        "ell": sc.ell,
        "rows": rows,
        "all_conditions_ok": all_ok,
        "verdict_counts": counts,
    }))
}

pub fn besov_estimate(cfg: &RunConfig, clock: &mut Clock) -> Result<Outcome> {
    let b = &cfg.besov;
    let path = b.input.as_ref().expect("validated");
    let psi = GridFunction::read(path).map_err(|e| CliError::from(e).context(&path.display().to_string()))?;
    if b.axis >= psi.ndim() {
        return Err(CliError::config(format!("axis {} of a {}-d field", b.axis, psi.ndim())));
    }
    let lags = besov::dyadic_lags(psi.dims()[b.axis]);
    let h = psi.spacing()[b.axis];
    let (quotients, estimate) = clock.time("estimate", || -> Result<_> {
        let q = besov::lag_norms(&psi, b.axis, b.p, &lags, b.difference)?;
        let e = besov::estimate_order_with(&psi, b.axis, b.p, b.difference)?;
        Ok((q, e))
    })?;
    let seminorms = match b.order {
        Some(t) => {
            let spec = SeminormSpec::dyadic(&psi, b.axis, t, b.p)?;
            json!({
                "order": t,
                "nikolskii": besov::nikolskii_seminorm(&psi, &spec)?,
                "besov": besov::besov_seminorm(&psi, &spec)?,
            })
        }
        None => Value::Null,
    };
    ok(json!({
        "axis": b.axis,
        "p": b.p,
        "difference": b.difference,
        "lags": lags,
        "h": lags.iter().map(|&l| l as f64 * h).collect::<Vec<_>>(),
        "quotients": quotients,
        "order_estimate": estimate,
        "seminorms": seminorms,
    }))
}

fn integrands(pr: &ProblemSection) -> Result<Vec<PowerIntegrand>> {
    pr.exponents
        .iter()
        .zip(&pr.deltas)
        .map(|(&p, &d)| PowerIntegrand::new(p, d).map_err(CliError::from))
        .collect()
}

/// Problem of `pr` on a mesh with `nodes`, at regularization `eps`.
fn build_problem(pr: &ProblemSection, nodes: &[usize], eps: f64) -> Result<DiscreteProblem> {
    let mesh = Mesh::new(pr.lower.clone(), pr.upper.clone(), nodes.to_vec())?;
    let ints = integrands(pr)?;
    let source = match &pr.source {
        SourcePreset::Zero => mesh.constant(0.0)?,
        SourcePreset::Constant { value } => mesh.constant(*value)?,
        SourcePreset::SinCos { amplitude } => mesh.sample(|x| {
            amplitude * (PI * x[0]).sin() * x[1..].iter().map(|&y| (PI * y).cos()).product::<f64>()
        })?,
        SourcePreset::ParaboloidManufactured => {
            let gradient = |x: &[f64]| x.iter().map(|v| 2.0 * v).collect::<Vec<_>>();
            let second = |x: &[f64]| vec![2.0; x.len()];
            solver::manufactured_source(
                &mesh,
                &ints,
                eps,
                &Ansatz::Analytic {
                    gradient: &gradient,
                    second: &second,
                },
            )?
        }
        SourcePreset::Grid { path } => {
            let g = GridFunction::read(path).map_err(|e| CliError::from(e).context(&path.display().to_string()))?;
            if !mesh.matches(&g) {
                return Err(CliError::config(format!(
                    "source grid {} does not live on the {:?} mesh",
                    path.display(),
                    nodes
                )));
            }
            g
        }
    };
    let boundary = match &pr.boundary {
        BoundaryPreset::Zero => mesh.constant(0.0)?,
        BoundaryPreset::Constant { value } => mesh.constant(*value)?,
        BoundaryPreset::Affine { slope, offset } => {
            mesh.sample(|x| offset + x.iter().zip(slope).map(|(a, b)| a * b).sum::<f64>())?
        }
        BoundaryPreset::Paraboloid => mesh.sample(|x| x.iter().map(|v| v * v).sum())?,
    };
    Ok(DiscreteProblem::new(mesh, ints, eps, source, boundary)?)
}

fn solve_options(cfg: &RunConfig) -> SolveOptions {
    SolveOptions {
        tol: cfg.solver.tol,
        max_iter: cfg.solver.max_iter,
        method: cfg.solver.method,
        initial: None,
    }
}

/// Solves the configured problem on `nodes`, through the `ε` schedule when
/// one is given. Returns every stage.
fn solve_stages(cfg: &RunConfig, nodes: &[usize]) -> Result<(Vec<f64>, Vec<SolveResult>)> {
    let pr = &cfg.problem;
    let opts = solve_options(cfg);
    match &pr.eps_schedule {
        Some(schedule) => {
            let report = solver::epsilon_continuation_with(
                |eps| build_problem(pr, nodes, eps).map_err(|e| Error::Config(e.message)),
                schedule,
                &opts,
            )?;
            Ok((report.eps, report.stages))
        }
        None => {
            let problem = build_problem(pr, nodes, pr.eps)?;
            Ok((vec![pr.eps], vec![solver::minimize(&problem, &opts)?]))
        }
    }
}

fn stage_summary(eps: f64, r: &SolveResult) -> Value {
    json!({
        "eps": eps,
        "energy": r.energy,
        "residual_inf": r.residual_inf,
        "iterations": r.iterations,
        "converged": r.converged,
    })
}

fn exact_error(exact: Option<ExactSolution>, u: &GridFunction) -> Result<Option<f64>> {
    match exact {
        Some(ExactSolution::Paraboloid) => {
            let reference = GridFunction::from_fn(u.dims().to_vec(), u.spacing().to_vec(), u.origin().to_vec(), |x| {
                x.iter().map(|v| v * v).sum()
            })?;
            Ok(Some(u.max_abs_diff(&reference)?))
        }
        None => Ok(None),
    }
}

pub fn solve(cfg: &RunConfig, clock: &mut Clock) -> Result<Outcome> {
    let pr = &cfg.problem;
    let (eps, stages) = clock.time("solve", || solve_stages(cfg, &pr.nodes))?;
    let last = stages.last().expect("at least one stage");
    if let Some(path) = &cfg.output.grid {
        last.u.write(path).map_err(|e| CliError::from(e).context("writing the solution grid"))?;
    }
    let status = if last.converged {
        Status::Ok
    } else {
        Status::NumericalFailure
    };
    let output = json!({
        "nodes": pr.nodes,
        "eps": pr.final_eps(),
        "method": last.method,
        "energy": last.energy,
        "residual_inf": last.residual_inf,
        "iterations": last.iterations,
        "total_iterations": stages.iter().map(|s| s.iterations).sum::<usize>(),
        "converged": last.converged,
        "nonunique_risk": last.nonunique_risk,
        "stages": eps.iter().zip(&stages).map(|(&e, s)| stage_summary(e, s)).collect::<Vec<_>>(),
        "max_error": exact_error(pr.exact, &last.u)?,
        "solution_max_abs": last.u.max_abs(),
    });
    Ok(Outcome { output, status })
}

pub fn probe(cfg: &RunConfig, clock: &mut Clock) -> Result<Outcome> {
    let pr = &cfg.problem;
    let ints = integrands(pr)?;
    let mut solves = Vec::new();
    let levels: Vec<GridFunction> = if cfg.probe.inputs.is_empty() {
        let mut levels = Vec::new();
        for &n in &cfg.probe.levels {
            let nodes = vec![n; pr.dim()];
            let (eps, stages) = clock.time(format!("solve_{n}"), || solve_stages(cfg, &nodes))?;
            let last = stages.last().expect("at least one stage");
            if !last.converged {
                return Err(CliError::numerical(format!(
                    "level with {n} nodes per axis did not converge (residual {:e})",
                    last.residual_inf
                )));
            }
            solves.push(json!({
                "nodes": nodes,
                "stages": eps.iter().zip(&stages).map(|(&e, s)| stage_summary(e, s)).collect::<Vec<_>>(),
            }));
            levels.push(stages.into_iter().last().expect("at least one stage").u);
        }
        levels
    } else {
        cfg.probe
            .inputs
            .iter()
            .map(|p| GridFunction::read(p).map_err(|e| CliError::from(e).context(&p.display().to_string())))
            .collect::<Result<_>>()?
    };
    let opts = ProbeOptions {
        margin: cfg.probe.margin,
        schedule: cfg.iteration.schedule.clone(),
        max_iter: cfg.iteration.max_iter,
    };
    let report = clock.time("probe", || probe::regularity_verdict(&levels, &ints, &opts))?;
    if let Some(path) = &cfg.output.csv {
        let mut csv = String::from("level,h,quantity,value\n");
        for (k, level) in report.levels.iter().enumerate() {
            let h = level.spacing.iter().copied().fold(0.0, f64::max);
            for (i, w) in level.w12.iter().enumerate() {
                let _ = writeln!(csv, "{k},{h},w12_v{i},{w}");
            }
            let _ = writeln!(csv, "{k},{h},lipschitz,{}", level.lipschitz);
        }
        write_side_file(path, &csv)?;
    }
    let status = if report.pass { Status::Ok } else { Status::VerdictFail };
    let output = json!({
        "report": report,
        "solves": solves,
    });
    Ok(Outcome { output, status })
}

pub fn inequalities(cfg: &RunConfig, clock: &mut Clock) -> Result<Outcome> {
    let s = &cfg.inequalities;
    let fuzz = FuzzConfig {
        samples: s.samples,
        seed: cfg.seed,
        p_range: s.p_range,
        delta_range: s.delta_range,
        eps_values: s.eps_values.clone(),
        ab_range: s.ab_range,
    };
    let report = clock.time("fuzz", || integrand::fuzz_inequalities(&fuzz))?;
    let status = if report.violations() == 0 {
        Status::Ok
    } else {
        Status::VerdictFail
    };
    Ok(Outcome {
        output: json!({
            "violations": report.violations(),
            "fuzz": report,
        }),
        status,
    })
}
