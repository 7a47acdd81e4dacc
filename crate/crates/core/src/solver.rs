//! Staggered finite-difference discretization of
//!
//! ```text
//! F_ε(u) = Σ_i ∫ g_{i,ε}(u_{x_i}) dx + ∫ f u dx
//! ```
//!
//! on an axis-aligned box with Dirichlet data imposed by pinning boundary
//! nodes. Each `g_{i,ε}(D_i u)` lives on the face between a node and its
//! forward neighbour along axis `i`, so the discrete energy is an exact sum of
//! convex node-coupled terms and its gradient is the discrete divergence form
//! `Σ_i D_iᵀ g'_{i,ε}(D_i u) + f`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{unravel, GridFunction};
use crate::integrand::{Derivative, Integrand, PowerIntegrand};
use crate::linalg::BandedSpd;

pub const DEFAULT_TOL: f64 = 1e-8;
pub const DEFAULT_MAX_ITER: usize = 200_000;

const ARMIJO_C: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

/// Uniform tensor mesh on `[lower, upper]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
}

impl Mesh {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>, nodes: Vec<usize>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() || lower.len() != nodes.len() {
            return Err(Error::Config("mesh bounds and node counts must have equal nonzero length".into()));
        }
        for k in 0..nodes.len() {
            if nodes[k] < 3 {
                return Err(Error::Config(format!("axis {k} needs at least 3 nodes, got {}", nodes[k])));
            }
            if !(lower[k].is_finite() && upper[k].is_finite() && upper[k] > lower[k]) {
                return Err(Error::Config(format!(
                    "axis {k} has an empty extent [{}, {}]",
                    lower[k], upper[k]
                )));
            }
        }
        Ok(Self { lower, upper, nodes })
    }

    /// Same node count on every axis of `[lower, upper]^n`.
    pub fn cube(n: usize, lower: f64, upper: f64, nodes: usize) -> Result<Self> {
        Self::new(vec![lower; n], vec![upper; n], vec![nodes; n])
    }

    pub fn ndim(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[usize] {
        &self.nodes
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn spacing(&self) -> Vec<f64> {
        (0..self.ndim())
            .map(|k| (self.upper[k] - self.lower[k]) / (self.nodes[k] - 1) as f64)
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn sample<F: Fn(&[f64]) -> f64>(&self, f: F) -> Result<GridFunction> {
        GridFunction::from_fn(self.nodes.clone(), self.spacing(), self.lower.clone(), f)
    }

    pub fn constant(&self, c: f64) -> Result<GridFunction> {
        GridFunction::constant(self.nodes.clone(), self.spacing(), self.lower.clone(), c)
    }

    /// Whether `g` lives on this mesh (up to round-off in the geometry).
    pub fn matches(&self, g: &GridFunction) -> bool {
        let h = self.spacing();
        g.dims() == self.nodes.as_slice()
            && (0..self.ndim()).all(|k| {
                (g.spacing()[k] - h[k]).abs() <= 1e-12 * h[k]
                    && (g.origin()[k] - self.lower[k]).abs() <= 1e-12 * (1.0 + self.lower[k].abs())
            })
    }

    pub fn is_boundary(&self, idx: &[usize]) -> bool {
        idx.iter().zip(&self.nodes).any(|(&i, &n)| i == 0 || i + 1 == n)
    }

    /// Boundary flag per flat node index.
    pub fn boundary_mask(&self) -> Vec<bool> {
        (0..self.len()).map(|k| self.is_boundary(&unravel(k, &self.nodes))).collect()
    }
}

/// Discrete Dirichlet problem for the regularized functional.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteProblem {
    mesh: Mesh,
    integrands: Vec<PowerIntegrand>,
    eps: f64,
    source: GridFunction,
    boundary: GridFunction,
}

impl DiscreteProblem {
    /// `boundary` is a field on the mesh; only its boundary nodes are used.
    pub fn new(
        mesh: Mesh,
        integrands: Vec<PowerIntegrand>,
        eps: f64,
        source: GridFunction,
        boundary: GridFunction,
    ) -> Result<Self> {
        if integrands.len() != mesh.ndim() {
            return Err(Error::Config(format!(
                "{} integrands for a {}-d mesh",
                integrands.len(),
                mesh.ndim()
            )));
        }
        if !(eps >= 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("ε = {eps} must be finite and ≥ 0")));
        }
        if !mesh.matches(&source) {
            return Err(Error::ShapeMismatch("source does not live on the mesh".into()));
        }
        if !mesh.matches(&boundary) {
            return Err(Error::ShapeMismatch("boundary trace does not live on the mesh".into()));
        }
        Ok(Self {
            mesh,
            integrands,
            eps,
            source,
            boundary,
        })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn integrands(&self) -> &[PowerIntegrand] {
        &self.integrands
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn source(&self) -> &GridFunction {
        &self.source
    }

    pub fn boundary(&self) -> &GridFunction {
        &self.boundary
    }

    /// Same problem with a different regularization level.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        Self::new(
            self.mesh.clone(),
            self.integrands.clone(),
            eps,
            self.source.clone(),
            self.boundary.clone(),
        )
    }

    /// Strong convexity from `ε > 0`, or a quadratic non-degenerate axis.
    pub fn is_well_posed(&self) -> bool {
        self.eps > 0.0 || self.integrands.iter().any(|g| g.p() == 2.0 && g.delta() == 0.0)
    }

    /// Minimizers may form a continuum: no regularization and a flat zone.
    pub fn nonunique_risk(&self) -> bool {
        self.eps == 0.0 && self.integrands.iter().any(|g| g.delta() > 0.0)
    }

    #[inline]
    fn g(&self, axis: usize, s: f64, d: Derivative) -> f64 {
        let extra = match d {
            Derivative::Value => 0.5 * self.eps * s * s,
            Derivative::First => self.eps * s,
            Derivative::Second => self.eps,
        };
        self.integrands[axis].eval(s, d) + extra
    }

    /// Initial iterate: boundary trace on the boundary, `interior` inside.
    pub fn pinned(&self, interior: &GridFunction) -> Result<GridFunction> {
        if !self.mesh.matches(interior) {
            return Err(Error::ShapeMismatch("initial guess does not live on the mesh".into()));
        }
        let mask = self.mesh.boundary_mask();
        let mut u = interior.clone();
        for (k, v) in u.values_mut().iter_mut().enumerate() {
            if mask[k] {
                *v = self.boundary.values()[k];
            }
        }
        Ok(u)
    }

    fn check(&self, u: &GridFunction) -> Result<()> {
        if self.mesh.matches(u) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "field with dims {:?} does not live on mesh {:?}",
                u.dims(),
                self.mesh.nodes()
            )))
        }
    }

    fn energy_raw(&self, u: &[f64]) -> f64 {
        let dims = self.mesh.nodes();
        let h = self.mesh.spacing();
        let vol: f64 = h.iter().product();
        let strides = crate::grid::strides(dims);
        let mut total = 0.0;
        for axis in 0..dims.len() {
            let s = strides[axis];
            for_each_edge(dims, axis, |k| {
                total += self.g(axis, (u[k + s] - u[k]) / h[axis], Derivative::Value);
            });
        }
        let src: f64 = self.source.values().iter().zip(u).map(|(f, v)| f * v).sum();
        (total + src) * vol
    }

    fn gradient_raw(&self, u: &[f64], mask: &[bool]) -> Vec<f64> {
        let dims = self.mesh.nodes();
        let h = self.mesh.spacing();
        let vol: f64 = h.iter().product();
        let strides = crate::grid::strides(dims);
        let mut grad: Vec<f64> = self.source.values().iter().map(|f| f * vol).collect();
        for axis in 0..dims.len() {
            let s = strides[axis];
            let w = vol / h[axis];
            for_each_edge(dims, axis, |k| {
                let flux = self.g(axis, (u[k + s] - u[k]) / h[axis], Derivative::First) * w;
                grad[k + s] += flux;
                grad[k] -= flux;
            });
        }
        for (g, &b) in grad.iter_mut().zip(mask) {
            if b {
                *g = 0.0;
            }
        }
        grad
    }

    /// Discrete energy `Σ_i Σ_faces g_{i,ε}(D_i u) Πh + Σ_nodes f u Πh`.
    pub fn energy(&self, u: &GridFunction) -> Result<f64> {
        self.check(u)?;
        Ok(self.energy_raw(u.values()))
    }

    /// Gradient of [`energy`](Self::energy) with respect to interior node
    /// values; zero on boundary nodes.
    pub fn el_residual(&self, u: &GridFunction) -> Result<GridFunction> {
        self.check(u)?;
        let g = self.gradient_raw(u.values(), &self.mesh.boundary_mask());
        GridFunction::new(u.dims().to_vec(), u.spacing().to_vec(), u.origin().to_vec(), g)
    }

    /// [`el_residual`](Self::el_residual) divided by the node volume: the
    /// pointwise residual of `Σ_i D_iᵀ g'_{i,ε}(D_i u) + f`.
    pub fn strong_residual(&self, u: &GridFunction) -> Result<GridFunction> {
        let vol = u.cell_volume();
        self.el_residual(u)?.map(|r| r / vol)
    }
}

/// Calls `f(k)` for every flat node `k` whose forward neighbour along `axis`
/// exists.
fn for_each_edge<F: FnMut(usize)>(dims: &[usize], axis: usize, mut f: F) {
    let strides = crate::grid::strides(dims);
    let outer: usize = dims[..axis].iter().product();
    let inner = strides[axis];
    let n = dims[axis];
    for o in 0..outer {
        let base = o * n * inner;
        for i in 0..n - 1 {
            let row = base + i * inner;
            for j in 0..inner {
                f(row + j);
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Damped Newton with a banded Cholesky factorization of the Hessian.
    #[default]
    Newton,
    /// Jacobi-preconditioned Barzilai–Borwein descent.
    BarzilaiBorwein,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub method: Method,
    /// Interior values of the starting iterate; boundary values are replaced
    /// by the trace. Defaults to zero.
    pub initial: Option<GridFunction>,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_TOL,
            max_iter: DEFAULT_MAX_ITER,
            method: Method::Newton,
            initial: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub u: GridFunction,
    pub energy: f64,
    pub residual_inf: f64,
    pub iterations: usize,
    pub converged: bool,
    pub nonunique_risk: bool,
    pub method: Method,
    /// Energy after each accepted iterate, starting with the initial one.
    pub energy_history: Vec<f64>,
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Result of one line search.
enum Step {
    Accepted { u: Vec<f64>, energy: f64, grad: Vec<f64> },
    Stalled,
}

/// Armijo backtracking along `dir` starting at `alpha0`. When the energy
/// change drops below its round-off floor, a step that does not raise the
/// energy by more than round-off and reduces the residual is accepted.
#[allow(clippy::too_many_arguments)]
fn line_search(
    problem: &DiscreteProblem,
    mask: &[bool],
    u: &[f64],
    energy: f64,
    grad: &[f64],
    dir: &[f64],
    alpha0: f64,
    err: &mut Option<Error>,
) -> Step {
    let slope = dot(grad, dir);
    if !(slope < 0.0) {
        return Step::Stalled;
    }
    let floor = 1e-14 * (1.0 + energy.abs());
    let res = inf_norm(grad);
    let mut alpha = alpha0;
    let mut trial = vec![0.0; u.len()];
    for _ in 0..MAX_BACKTRACK {
        for k in 0..u.len() {
            trial[k] = u[k] + alpha * dir[k];
        }
        let e = problem.energy_raw(&trial);
        if !e.is_finite() {
            alpha *= 0.5;
            continue;
        }
        if e <= energy + ARMIJO_C * alpha * slope {
            let g = problem.gradient_raw(&trial, mask);
            return Step::Accepted { u: trial, energy: e, grad: g };
        }
        if (e - energy).abs() <= floor {
            let g = problem.gradient_raw(&trial, mask);
            if inf_norm(&g) < res {
                return Step::Accepted { u: trial, energy: e, grad: g };
            }
        }
        alpha *= 0.5;
    }
    if energy.is_finite() {
        Step::Stalled
    } else {
        *err = Some(Error::Divergence("non-finite energy".into()));
        Step::Stalled
    }
}

/// Minimizes the discrete energy until the residual max-norm is at most
/// `opts.tol` or `opts.max_iter` iterations have been taken.
pub fn minimize(problem: &DiscreteProblem, opts: &SolveOptions) -> Result<SolveResult> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!("tolerance {} must be positive", opts.tol)));
    }
    if !problem.is_well_posed() {
        return Err(Error::Config(
            "need ε > 0 or an axis with p = 2 and δ = 0 for a well-posed discrete problem".into(),
        ));
    }
    let mesh = problem.mesh();
    let mask = mesh.boundary_mask();
    let start = match &opts.initial {
        Some(g) => problem.pinned(g)?,
        None => problem.pinned(&mesh.constant(0.0)?)?,
    };
    let mut u = start.values().to_vec();
    let mut energy = problem.energy_raw(&u);
    if !energy.is_finite() {
        return Err(Error::Divergence("initial energy is not finite".into()));
    }
    let mut grad = problem.gradient_raw(&u, &mask);
    let mut history = vec![energy];
    let mut iterations = 0;
    let mut err = None;

    let interior: Vec<usize> = (0..u.len()).filter(|&k| !mask[k]).collect();
    let mut slot = vec![usize::MAX; u.len()];
    for (i, &k) in interior.iter().enumerate() {
        slot[k] = i;
    }

    // Barzilai–Borwein memory
    let mut prev: Option<(Vec<f64>, Vec<f64>)> = None;

    while inf_norm(&grad) > opts.tol && iterations < opts.max_iter {
        let (dir, alpha0) = match opts.method {
            Method::Newton => (newton_direction(problem, &u, &grad, &interior, &slot)?, 1.0),
            Method::BarzilaiBorwein => {
                let diag = jacobi_diagonal(problem, &u, &mask);
                let dir: Vec<f64> = grad.iter().zip(&diag).map(|(g, d)| -g / d).collect();
                let alpha0 = match &prev {
                    Some((du, dg)) => {
                        let sy = dot(du, dg);
                        let yy: f64 = dg.iter().zip(&diag).map(|(y, d)| y * y / d).sum();
                        if sy > 0.0 && yy > 0.0 {
                            (sy / yy).clamp(1e-6, 1e6)
                        } else {
                            1.0
                        }
                    }
                    None => 1.0,
                };
                (dir, alpha0)
            }
        };
        let mut step = line_search(problem, &mask, &u, energy, &grad, &dir, alpha0, &mut err);
        if matches!(step, Step::Stalled) && opts.method == Method::BarzilaiBorwein && alpha0 != 1.0 {
            // restart from the unit preconditioned step
            step = line_search(problem, &mask, &u, energy, &grad, &dir, 1.0, &mut err);
        }
        if let Some(e) = err.take() {
            return Err(e);
        }
        match step {
            Step::Accepted {
                u: nu,
                energy: ne,
                grad: ng,
            } => {
                let du: Vec<f64> = nu.iter().zip(&u).map(|(a, b)| a - b).collect();
                let dg: Vec<f64> = ng.iter().zip(&grad).map(|(a, b)| a - b).collect();
                prev = Some((du, dg));
                u = nu;
                energy = ne;
                grad = ng;
                history.push(energy);
                iterations += 1;
            }
            Step::Stalled => break,
        }
    }
    let residual_inf = inf_norm(&grad);
    Ok(SolveResult {
        u: GridFunction::new(start.dims().to_vec(), start.spacing().to_vec(), start.origin().to_vec(), u)?,
        energy,
        residual_inf,
        iterations,
        converged: residual_inf <= opts.tol,
        nonunique_risk: problem.nonunique_risk(),
        method: opts.method,
        energy_history: history,
    })
}

fn jacobi_diagonal(problem: &DiscreteProblem, u: &[f64], mask: &[bool]) -> Vec<f64> {
    let dims = problem.mesh().nodes();
    let h = problem.mesh().spacing();
    let vol: f64 = h.iter().product();
    let strides = crate::grid::strides(dims);
    let mut diag = vec![0.0; u.len()];
    for axis in 0..dims.len() {
        let s = strides[axis];
        let w = vol / (h[axis] * h[axis]);
        for_each_edge(dims, axis, |k| {
            let c = problem.g(axis, (u[k + s] - u[k]) / h[axis], Derivative::Second) * w;
            diag[k] += c;
            diag[k + s] += c;
        });
    }
    let floor = diag.iter().fold(0.0f64, |m, d| m.max(*d)) * 1e-12 + f64::MIN_POSITIVE;
    for (d, &b) in diag.iter_mut().zip(mask) {
        *d = if b { 1.0 } else { d.max(floor) };
    }
    diag
}

/// Solves `H d = -g` on interior nodes with the banded Hessian, shifting the
/// diagonal until the factorization succeeds.
fn newton_direction(
    problem: &DiscreteProblem,
    u: &[f64],
    grad: &[f64],
    interior: &[usize],
    slot: &[usize],
) -> Result<Vec<f64>> {
    let dims = problem.mesh().nodes();
    let h = problem.mesh().spacing();
    let vol: f64 = h.iter().product();
    let strides = crate::grid::strides(dims);
    let bw = if dims.len() == 1 {
        1
    } else {
        dims[1..].iter().map(|n| n - 2).product()
    };
    let mut hess = BandedSpd::zeros(interior.len(), bw);
    for axis in 0..dims.len() {
        let s = strides[axis];
        let w = vol / (h[axis] * h[axis]);
        for_each_edge(dims, axis, |k| {
            let c = problem.g(axis, (u[k + s] - u[k]) / h[axis], Derivative::Second) * w;
            let (a, b) = (slot[k], slot[k + s]);
            if a != usize::MAX {
                hess.add(a, a, c);
            }
            if b != usize::MAX {
                hess.add(b, b, c);
            }
            if a != usize::MAX && b != usize::MAX {
                hess.add(b, a, -c);
            }
        });
    }
    let scale = hess.max_diag().max(f64::MIN_POSITIVE);
    let mut shift = 0.0;
    let factor = loop {
        let mut m = hess.clone();
        if shift > 0.0 {
            m.shift_diag(shift);
        }
        match m.cholesky() {
            Ok(f) => break f,
            Err(_) if shift < scale => {
                shift = if shift == 0.0 { 1e-12 * scale } else { shift * 10.0 };
            }
            Err(row) => {
                return Err(Error::Numerical(format!(
                    "Hessian factorization failed at row {row} even with shift {shift:e}"
                )))
            }
        }
    };
    let mut rhs: Vec<f64> = interior.iter().map(|&k| -grad[k]).collect();
    factor.solve(&mut rhs);
    let mut dir = vec![0.0; u.len()];
    for (i, &k) in interior.iter().enumerate() {
        dir[k] = rhs[i];
    }
    Ok(dir)
}

/// Smooth field used to manufacture a source term.
pub enum Ansatz<'a> {
    /// Gradient and diagonal of the Hessian at a point.
    Analytic {
        gradient: &'a dyn Fn(&[f64]) -> Vec<f64>,
        second: &'a dyn Fn(&[f64]) -> Vec<f64>,
    },
    /// Point values only; derivatives by centered differences at a quarter
    /// of the mesh spacing.
    Values(&'a dyn Fn(&[f64]) -> f64),
}

/// `f = Σ_i ∂_i g'_{i,ε}(∂_i u*)` on the mesh nodes, so that `u*` solves the
/// Euler–Lagrange equation.
pub fn manufactured_source(mesh: &Mesh, integrands: &[PowerIntegrand], eps: f64, ansatz: &Ansatz<'_>) -> Result<GridFunction> {
    if integrands.len() != mesh.ndim() {
        return Err(Error::Config("integrand count does not match the mesh dimension".into()));
    }
    let h = mesh.spacing();
    let n = mesh.ndim();
    let d1 = |axis: usize, s: f64| integrands[axis].dg(s) + eps * s;
    let d2 = |axis: usize, s: f64| integrands[axis].d2g(s) + eps;
    let failure = std::cell::RefCell::new(None);
    let f = mesh.sample(|x| {
        let v = match ansatz {
            Ansatz::Analytic { gradient, second } => {
                let g = gradient(x);
                let s = second(x);
                (0..n).map(|i| d2(i, g[i]) * s[i]).sum::<f64>()
            }
            Ansatz::Values(u) => {
                let mut y = x.to_vec();
                let u0 = u(x);
                (0..n)
                    .map(|i| {
                        let eta = 0.25 * h[i];
                        y[i] = x[i] + eta;
                        let up = u(&y);
                        y[i] = x[i] - eta;
                        let dn = u(&y);
                        y[i] = x[i];
                        (d1(i, (up - u0) / eta) - d1(i, (u0 - dn) / eta)) / eta
                    })
                    .sum::<f64>()
            }
        };
        if !v.is_finite() {
            failure.borrow_mut().get_or_insert_with(|| x.to_vec());
        }
        if v.is_finite() {
            v
        } else {
            0.0
        }
    })?;
    if let Some(x) = failure.into_inner() {
        return Err(Error::Numerical(format!(
            "manufactured source is not finite at {x:?}; the ansatz is not smooth enough"
        )));
    }
    Ok(f)
}

/// Warm-started solves along a decreasing `ε` schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct ContinuationReport {
    pub eps: Vec<f64>,
    pub stages: Vec<SolveResult>,
    /// `‖u_{ε_k} - u_{ε_{k+1}}‖_∞` between consecutive stages.
    pub gaps: Vec<f64>,
}

/// Solves `build(ε)` for each `ε` in `schedule`, warm-starting each stage
/// from the previous solution.
pub fn epsilon_continuation_with<F>(mut build: F, schedule: &[f64], opts: &SolveOptions) -> Result<ContinuationReport>
where
    F: FnMut(f64) -> Result<DiscreteProblem>,
{
    if schedule.is_empty() {
        return Err(Error::Config("empty ε schedule".into()));
    }
    if schedule.iter().any(|&e| !(e > 0.0 && e.is_finite())) {
        return Err(Error::Config("ε schedule entries must be positive".into()));
    }
    if schedule.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Config("ε schedule must be strictly decreasing".into()));
    }
    let mut stages: Vec<SolveResult> = Vec::with_capacity(schedule.len());
    let mut gaps = Vec::new();
    for &eps in schedule {
        let problem = build(eps)?;
        let mut stage_opts = opts.clone();
        if let Some(last) = stages.last() {
            stage_opts.initial = Some(last.u.clone());
        }
        let res = minimize(&problem, &stage_opts)?;
        if let Some(last) = stages.last() {
            gaps.push(res.u.max_abs_diff(&last.u)?);
        }
        stages.push(res);
    }
    Ok(ContinuationReport {
        eps: schedule.to_vec(),
        stages,
        gaps,
    })
}

/// [`epsilon_continuation_with`] for a fixed source and boundary trace.
pub fn epsilon_continuation(problem: &DiscreteProblem, schedule: &[f64], opts: &SolveOptions) -> Result<ContinuationReport> {
    epsilon_continuation_with(|eps| problem.with_eps(eps), schedule, opts)
}

/// Manufactured problem `u* = x² + y²` with `p = (2, 4)`, `δ = 0` on
/// `[-1, 1]²`, whose source `2 + 24y² + 4ε` makes `u*` the exact solution of
/// the continuous Euler–Lagrange equation.
pub fn paraboloid_problem(nodes: usize, eps: f64) -> Result<DiscreteProblem> {
    let mesh = Mesh::cube(2, -1.0, 1.0, nodes)?;
    let integrands = vec![PowerIntegrand::new(2.0, 0.0)?, PowerIntegrand::new(4.0, 0.0)?];
    let source = mesh.sample(|x| 2.0 + 24.0 * x[1] * x[1] + 4.0 * eps)?;
    let boundary = mesh.sample(|x| x[0] * x[0] + x[1] * x[1])?;
    DiscreteProblem::new(mesh, integrands, eps, source, boundary)
}
