//! Regularity indicators of discrete minimizers.
//!
//! For a solution `u` the probe builds the staggered difference fields
//! `D_i u`, the transformed fields `𝒱_i = V_i(D_i u)`, their discrete `W^{1,2}`
//! seminorms on an inner box, their Nikol'skii orders along every axis and
//! the inner Lipschitz bound `max_i ‖D_i u‖_∞`. Across a refinement series
//! these numbers should stay bounded; the measured orders are compared
//! against the exponent recursion.

use serde::{Deserialize, Serialize};

use crate::besov::{estimate_order, OrderEstimate};
use crate::error::{Error, Result};
use crate::exponents::{initial_vector, iterate_scheme, AlphaSchedule, AnisotropyProfile};
use crate::grid::GridFunction;
use crate::integrand::PowerIntegrand;

/// Largest accepted ratio between consecutive refinement levels.
pub const STABILITY_RATIO: f64 = 1.1;
/// Predicted orders are capped here before comparison.
pub const ORDER_CAP: f64 = 0.95;
/// Allowed shortfall of a measured order below the capped prediction.
pub const ORDER_SLACK: f64 = 0.1;
pub const DEFAULT_MARGIN: f64 = 0.25;
/// Smallest admissible margin, as a fraction of the half-extent.
pub const MIN_MARGIN: f64 = 0.25;
const MIN_INNER_NODES: usize = 8;

/// Box strictly inside the sampled domain.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InnerDomain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl InnerDomain {
    /// Shrinks `[lower, upper]` about its centre by the factor `1 - margin`,
    /// so each side loses `margin` times the half-extent. The default `1/4`
    /// keeps `[-3/4, 3/4]` of `[-1, 1]`.
    pub fn from_box(lower: &[f64], upper: &[f64], margin: f64) -> Result<Self> {
        if !(MIN_MARGIN..1.0).contains(&margin) {
            return Err(Error::Config(format!(
                "inner margin {margin} outside [{MIN_MARGIN}, 1)"
            )));
        }
        let (lo, hi) = lower
            .iter()
            .zip(upper)
            .map(|(&a, &b)| {
                let m = 0.5 * margin * (b - a);
                (a + m, b - m)
            })
            .unzip();
        Ok(Self { lower: lo, upper: hi })
    }

    /// Inner box of the domain sampled by `u`.
    pub fn of_grid(u: &GridFunction, margin: f64) -> Result<Self> {
        Self::from_box(u.origin(), &u.upper(), margin)
    }

    fn restrict(&self, field: &GridFunction) -> Result<GridFunction> {
        if self.lower.len() != field.ndim() {
            return Err(Error::ShapeMismatch("inner domain rank differs from the field".into()));
        }
        let (lo, hi) = field
            .index_range_within(&self.lower, &self.upper)
            .ok_or_else(|| Error::EmptyDomain("inner domain contains no nodes".into()))?;
        field.subgrid(&lo, &hi)
    }
}

/// `D_i u` on the faces `x + h_i e_i / 2` for every axis.
pub fn difference_fields(u: &GridFunction) -> Result<Vec<GridFunction>> {
    (0..u.ndim())
        .map(|axis| {
            let h = u.spacing()[axis];
            let d = crate::besov::shift_diff(u, axis, 1, crate::besov::DiffOrder::First)?;
            let mut shift = vec![0.0; u.ndim()];
            shift[axis] = 0.5 * h;
            d.map(|v| v / h)?.translated(&shift)
        })
        .collect()
}

/// `𝒱_i = V_i(D_i u)` with the closed-form `V` of each base profile.
pub fn v_fields(u: &GridFunction, integrands: &[PowerIntegrand]) -> Result<Vec<GridFunction>> {
    if integrands.len() != u.ndim() {
        return Err(Error::ShapeMismatch(format!(
            "{} integrands for a {}-d field",
            integrands.len(),
            u.ndim()
        )));
    }
    difference_fields(u)?
        .into_iter()
        .zip(integrands)
        .map(|(d, g)| d.map(|s| g.v_closed(s)))
        .collect()
}

/// Discrete `‖∇ψ‖_{L²}` on the inner box: forward differences with
/// trapezoidal weights across the transverse axes.
pub fn w12_seminorm(field: &GridFunction, inner: &InnerDomain) -> Result<f64> {
    let sub = inner.restrict(field)?;
    if let Some(k) = sub.dims().iter().position(|&n| n < MIN_INNER_NODES) {
        return Err(Error::EmptyDomain(format!(
            "inner box keeps {} nodes on axis {k}, need {MIN_INNER_NODES}",
            sub.dims()[k]
        )));
    }
    let dims = sub.dims();
    let h = sub.spacing();
    let vol = sub.cell_volume();
    let strides = sub.strides();
    let vals = sub.values();
    let mut total = 0.0;
    for axis in 0..dims.len() {
        let s = strides[axis];
        for k in 0..vals.len() {
            let idx = crate::grid::unravel(k, dims);
            if idx[axis] + 1 == dims[axis] {
                continue;
            }
            let w: f64 = (0..dims.len())
                .filter(|&j| j != axis)
                .map(|j| if idx[j] == 0 || idx[j] + 1 == dims[j] { 0.5 } else { 1.0 })
                .product();
            let d = (vals[k + s] - vals[k]) / h[axis];
            total += w * d * d;
        }
    }
    Ok((total * vol).sqrt())
}

/// `max_i max |D_i u|` over faces inside the inner box.
pub fn lipschitz_estimate(u: &GridFunction, inner: &InnerDomain) -> Result<f64> {
    difference_fields(u)?
        .iter()
        .map(|d| inner.restrict(d).map(|s| s.max_abs()))
        .try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOptions {
    pub margin: f64,
    pub schedule: AlphaSchedule,
    pub max_iter: usize,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            margin: DEFAULT_MARGIN,
            schedule: AlphaSchedule::default(),
            max_iter: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub nodes: Vec<usize>,
    pub spacing: Vec<f64>,
    /// `w12_seminorm(𝒱_i)` per axis `i`.
    pub w12: Vec<f64>,
    pub lipschitz: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub stability_ratio: f64,
    pub order_cap: f64,
    pub order_slack: f64,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub exponents: Vec<f64>,
    pub deltas: Vec<f64>,
    pub levels: Vec<LevelReport>,
    /// Consecutive ratios of `w12` per axis `i`.
    pub w12_ratios: Vec<Vec<f64>>,
    pub lipschitz_ratios: Vec<f64>,
    /// `orders[i][j]`: order of `𝒱_i` along axis `j` on the finest level.
    pub orders: Vec<Vec<Option<OrderEstimate>>>,
    /// Orders `p_j / max p` from the first step of the recursion.
    pub predicted_initial: Vec<f64>,
    /// Orders after running the recursion to its verdict.
    pub predicted_final: Vec<f64>,
    pub recursion_verdict: String,
    pub w12_stable: bool,
    pub orders_ok: bool,
    /// Only assessed in two dimensions.
    pub lipschitz_stable: Option<bool>,
    pub pass: bool,
    pub thresholds: Thresholds,
    pub interpretation: String,
}

fn ratios(series: &[f64]) -> Vec<f64> {
    series
        .windows(2)
        .map(|w| match (w[0], w[1]) {
            (a, b) if a > 0.0 => b / a,
            (_, 0.0) => 1.0,
            _ => f64::INFINITY,
        })
        .collect()
}

/// Predicted per-axis orders, initial and final, in mesh axis order.
pub fn predicted_orders(exponents: &[f64], opts: &ProbeOptions) -> Result<(Vec<f64>, Vec<f64>, String)> {
    let mut sorted = exponents.to_vec();
    sorted.sort_by(f64::total_cmp);
    let t0 = initial_vector(&sorted)?;
    let pmax = *sorted.last().expect("nonempty");
    let initial: Vec<f64> = exponents.iter().map(|&p| p / pmax).collect();
    debug_assert!(t0.as_slice().iter().all(|t| *t <= 1.0));
    match AnisotropyProfile::from_exponents(exponents)? {
        Some(profile) => {
            let trace = iterate_scheme(&profile, &opts.schedule, opts.max_iter)?;
            let t = trace.predicted(&profile);
            let small = t.as_slice()[0];
            let fin = exponents
                .iter()
                .map(|&p| if p == profile.p() && !profile.is_isotropic() { small.min(1.0) } else { 1.0 })
                .collect();
            Ok((initial, fin, trace.verdict.label().to_string()))
        }
        None => Ok((initial.clone(), initial, "SingleStep".to_string())),
    }
}

/// Assembles the refinement study for solutions `levels` of one problem on
/// successively finer meshes of the same box.
pub fn regularity_verdict(levels: &[GridFunction], integrands: &[PowerIntegrand], opts: &ProbeOptions) -> Result<ProbeReport> {
    if levels.len() < 3 {
        return Err(Error::Config(format!("need at least 3 refinement levels, got {}", levels.len())));
    }
    let first = &levels[0];
    for (k, u) in levels.iter().enumerate() {
        if u.ndim() != first.ndim() {
            return Err(Error::ShapeMismatch(format!("level {k} has a different dimension")));
        }
        let (up0, up) = (first.upper(), u.upper());
        for a in 0..u.ndim() {
            let ext = up0[a] - first.origin()[a];
            if (u.origin()[a] - first.origin()[a]).abs() > 1e-9 * ext || (up[a] - up0[a]).abs() > 1e-9 * ext {
                return Err(Error::ShapeMismatch(format!("level {k} samples a different box")));
            }
        }
    }
    for (k, w) in levels.windows(2).enumerate() {
        if w[1].len() <= w[0].len() {
            return Err(Error::Config(format!(
                "level {} is not finer than level {k}: {:?} after {:?}",
                k + 1,
                w[1].dims(),
                w[0].dims()
            )));
        }
    }
    let n = first.ndim();
    let exponents: Vec<f64> = integrands.iter().map(crate::integrand::Integrand::p).collect();
    let deltas: Vec<f64> = integrands.iter().map(crate::integrand::Integrand::delta).collect();
    let (predicted_initial, predicted_final, recursion_verdict) = predicted_orders(&exponents, opts)?;

    let mut reports = Vec::with_capacity(levels.len());
    let mut finest_v = Vec::new();
    for u in levels {
        let inner = InnerDomain::of_grid(u, opts.margin)?;
        let v = v_fields(u, integrands)?;
        let w12 = v.iter().map(|f| w12_seminorm(f, &inner)).collect::<Result<Vec<_>>>()?;
        reports.push(LevelReport {
            nodes: u.dims().to_vec(),
            spacing: u.spacing().to_vec(),
            w12,
            lipschitz: lipschitz_estimate(u, &inner)?,
        });
        finest_v = v;
    }
    let w12_ratios: Vec<Vec<f64>> = (0..n)
        .map(|i| ratios(&reports.iter().map(|r| r.w12[i]).collect::<Vec<_>>()))
        .collect();
    let lipschitz_ratios = ratios(&reports.iter().map(|r| r.lipschitz).collect::<Vec<_>>());

    let finest = levels.last().expect("at least three levels");
    let inner = InnerDomain::of_grid(finest, opts.margin)?;
    let orders: Vec<Vec<Option<OrderEstimate>>> = finest_v
        .iter()
        .map(|v| {
            let sub = inner.restrict(v)?;
            Ok((0..n).map(|j| estimate_order(&sub, j, 2.0).ok()).collect())
        })
        .collect::<Result<_>>()?;

    let w12_stable = w12_ratios.iter().flatten().all(|&r| r <= STABILITY_RATIO);
    let orders_ok = orders.iter().all(|row| {
        row.iter().enumerate().all(|(j, est)| match est {
            Some(e) => e.slope >= predicted_final[j].min(ORDER_CAP) - ORDER_SLACK,
            None => false,
        })
    });
    let lipschitz_stable = (n == 2).then(|| lipschitz_ratios.iter().all(|&r| r <= STABILITY_RATIO));
    let pass = w12_stable && orders_ok && lipschitz_stable.unwrap_or(true);
    Ok(ProbeReport {
        exponents,
        deltas,
        levels: reports,
        w12_ratios,
        lipschitz_ratios,
        orders,
        predicted_initial,
        predicted_final,
        recursion_verdict,
        w12_stable,
        orders_ok,
        lipschitz_stable,
        pass,
        thresholds: Thresholds {
            stability_ratio: STABILITY_RATIO,
            order_cap: ORDER_CAP,
            order_slack: ORDER_SLACK,
            margin: opts.margin,
        },
        interpretation: "boundedness of the inner W^{1,2} seminorms of V_i(u_{x_i}) and of the inner Lipschitz \
                         bound under mesh refinement is the falsifiable desk-scale surrogate for the regularity \
                         statements; it does not prove them"
            .to_string(),
    })
}
