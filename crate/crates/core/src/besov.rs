//! Directional difference quotients and anisotropic Nikol'skii / Besov
//! seminorms of sampled fields.
//!
//! For a lag of `m` nodes along axis `i` (physical shift `h = m Δx_i`):
//!
//! ```text
//! [ψ]_n = max_h ‖δ_h ψ‖_{L^p(Ω_h)} / h^t,      δ_h ψ(x)  = ψ(x+h) - ψ(x)
//! [ψ]_b = max_h ‖δ²_h ψ‖_{L^p(Ω_2h)} / h^t,    δ²_h ψ(x) = ψ(x+2h) - 2ψ(x+h) + ψ(x)
//! ```
//!
//! The supremum over all shifts is replaced by a maximum over dyadic lags
//! `1, 2, 4, …` up to a quarter of the axis extent, so the discrete values
//! under-estimate the continuum seminorms.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{lp_norm, GridFunction};

/// Residual (RMS of log misfits) above which the order fit is narrowed.
pub const ORDER_RESIDUAL_THRESHOLD: f64 = 0.02;

/// Slopes at or above this value cannot be told apart from order one.
pub const SATURATION_SLOPE: f64 = 0.95;

/// Reported slopes are clamped to `[0, ORDER_CLAMP]`.
pub const ORDER_CLAMP: f64 = 1.5;

const MIN_ORDER_LAGS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DiffOrder {
    First,
    Second,
}

impl DiffOrder {
    fn factor(self) -> usize {
        match self {
            DiffOrder::First => 1,
            DiffOrder::Second => 2,
        }
    }
}

/// Dyadic node lags `1, 2, 4, …` with `lag ≤ (nodes - 1) / 4`.
pub fn dyadic_lags(nodes: usize) -> Vec<usize> {
    let limit = nodes.saturating_sub(1) / 4;
    std::iter::successors(Some(1usize), |l| Some(l * 2))
        .take_while(|&l| l <= limit)
        .collect()
}

/// `δ_{h e_axis} ψ` or `δ²_{h e_axis} ψ` on the shrunken index box.
pub fn shift_diff(psi: &GridFunction, axis: usize, lag: usize, order: DiffOrder) -> Result<GridFunction> {
    if axis >= psi.ndim() {
        return Err(Error::Config(format!("axis {axis} out of range for a {}-d field", psi.ndim())));
    }
    if lag == 0 {
        return Err(Error::Config("lag must be at least 1".into()));
    }
    let reach = order.factor() * lag;
    let n_axis = psi.dims()[axis];
    if reach >= n_axis {
        return Err(Error::EmptyDomain(format!(
            "shift of {reach} nodes leaves nothing of {n_axis} nodes on axis {axis}"
        )));
    }
    let mut dims = psi.dims().to_vec();
    dims[axis] -= reach;
    let in_strides = psi.strides();
    let step = lag * in_strides[axis];
    let src = psi.values();
    let len: usize = dims.iter().product();
    let mut values = Vec::with_capacity(len);
    let mut idx = vec![0usize; dims.len()];
    let mut base = 0usize;
    for _ in 0..len {
        let v = match order {
            DiffOrder::First => src[base + step] - src[base],
            DiffOrder::Second => src[base + 2 * step] - 2.0 * src[base + step] + src[base],
        };
        values.push(v);
        // odometer over the output box, tracking the input offset
        for k in (0..dims.len()).rev() {
            idx[k] += 1;
            base += in_strides[k];
            if idx[k] < dims[k] {
                break;
            }
            base -= idx[k] * in_strides[k];
            idx[k] = 0;
        }
    }
    GridFunction::new(dims, psi.spacing().to_vec(), psi.origin().to_vec(), values)
}

/// Axis, order, norm exponent and lag set of a localized seminorm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeminormSpec {
    pub axis: usize,
    pub order: f64,
    pub p: f64,
    pub lags: Vec<usize>,
}

impl SeminormSpec {
    /// Dyadic lag set for `psi` along `axis`.
    pub fn dyadic(psi: &GridFunction, axis: usize, order: f64, p: f64) -> Result<Self> {
        if axis >= psi.ndim() {
            return Err(Error::Config(format!("axis {axis} out of range")));
        }
        let spec = Self {
            axis,
            order,
            p,
            lags: dyadic_lags(psi.dims()[axis]),
        };
        spec.validate(psi, DiffOrder::Second)?;
        Ok(spec)
    }

    pub fn validate(&self, psi: &GridFunction, diff: DiffOrder) -> Result<()> {
        if self.axis >= psi.ndim() {
            return Err(Error::Config(format!("axis {} out of range", self.axis)));
        }
        if !(self.order > 0.0 && self.order <= 1.0) {
            return Err(Error::Config(format!("order {} outside (0, 1]", self.order)));
        }
        if !(self.p >= 1.0 && self.p.is_finite()) {
            return Err(Error::Config(format!("norm exponent {} below 1", self.p)));
        }
        if self.lags.is_empty() {
            return Err(Error::EmptyDomain("empty lag set".into()));
        }
        let n = psi.dims()[self.axis];
        if let Some(&bad) = self
            .lags
            .iter()
            .find(|&&l| l == 0 || diff.factor() * l >= n)
        {
            return Err(Error::EmptyDomain(format!(
                "lag {bad} does not fit {n} nodes on axis {}",
                self.axis
            )));
        }
        Ok(())
    }
}

/// `‖δ^{(order)}_{lag} ψ‖_{L^p}` for each lag, unnormalized.
pub fn lag_norms(psi: &GridFunction, axis: usize, p: f64, lags: &[usize], order: DiffOrder) -> Result<Vec<f64>> {
    let vol = psi.cell_volume();
    lags.iter()
        .map(|&lag| {
            let d = shift_diff(psi, axis, lag, order)?;
            Ok(lp_norm(d.values(), p, vol))
        })
        .collect()
}

fn seminorm(psi: &GridFunction, spec: &SeminormSpec, order: DiffOrder) -> Result<f64> {
    spec.validate(psi, order)?;
    let h = psi.spacing()[spec.axis];
    let norms = lag_norms(psi, spec.axis, spec.p, &spec.lags, order)?;
    Ok(spec
        .lags
        .iter()
        .zip(norms)
        .map(|(&lag, n)| n / (lag as f64 * h).powf(spec.order))
        .fold(0.0, f64::max))
}

/// Localized Nikol'skii seminorm (first differences).
pub fn nikolskii_seminorm(psi: &GridFunction, spec: &SeminormSpec) -> Result<f64> {
    seminorm(psi, spec, DiffOrder::First)
}

/// Localized Besov seminorm (second differences).
pub fn besov_seminorm(psi: &GridFunction, spec: &SeminormSpec) -> Result<f64> {
    seminorm(psi, spec, DiffOrder::Second)
}

/// Log–log regression of `‖δ_h ψ‖_p` against `h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderEstimate {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    /// First and last node lag of the fitted window.
    pub lag_range: (usize, usize),
    /// Slope at or above [`SATURATION_SLOPE`], or differences vanished.
    pub saturated: bool,
    /// Some difference quotient was exactly zero; no fit was made.
    pub degenerate: bool,
}

fn least_squares(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, intercept, rms)
}

/// Estimated Nikol'skii order of `psi` along `axis` in `L^p`.
///
/// All dyadic lags are fitted first. When the misfit exceeds
/// [`ORDER_RESIDUAL_THRESHOLD`] the two largest lags are dropped, and if that
/// is still not enough the window of four consecutive lags with the smallest
/// misfit is used: the grid scale pollutes the smallest lags near
/// singularities and the largest lags leave the asymptotic regime.
pub fn estimate_order(psi: &GridFunction, axis: usize, p: f64) -> Result<OrderEstimate> {
    estimate_order_with(psi, axis, p, DiffOrder::First)
}

/// [`estimate_order`] on first or second differences.
pub fn estimate_order_with(psi: &GridFunction, axis: usize, p: f64, diff: DiffOrder) -> Result<OrderEstimate> {
    if axis >= psi.ndim() {
        return Err(Error::Config(format!("axis {axis} out of range")));
    }
    let lags: Vec<usize> = dyadic_lags(psi.dims()[axis])
        .into_iter()
        .filter(|&l| diff.factor() * l < psi.dims()[axis])
        .collect();
    if lags.len() < MIN_ORDER_LAGS {
        return Err(Error::EmptyDomain(format!(
            "order estimation needs {MIN_ORDER_LAGS} dyadic lags, axis {axis} has {}",
            lags.len()
        )));
    }
    let norms = lag_norms(psi, axis, p, &lags, diff)?;
    let h = psi.spacing()[axis];
    if norms.iter().any(|&q| !(q > 0.0)) {
        return Ok(OrderEstimate {
            slope: ORDER_CLAMP,
            intercept: f64::NEG_INFINITY,
            residual: 0.0,
            lag_range: (lags[0], *lags.last().expect("nonempty")),
            saturated: true,
            degenerate: true,
        });
    }
    let lx: Vec<f64> = lags.iter().map(|&l| (l as f64 * h).ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|q| q.ln()).collect();

    let mut window = (0, lags.len());
    let mut fit = least_squares(&lx, &ly);
    if fit.2 > ORDER_RESIDUAL_THRESHOLD && lags.len() - 2 >= MIN_ORDER_LAGS {
        window = (0, lags.len() - 2);
        fit = least_squares(&lx[..window.1], &ly[..window.1]);
    }
    if fit.2 > ORDER_RESIDUAL_THRESHOLD {
        for start in 0..=lags.len() - MIN_ORDER_LAGS {
            let end = start + MIN_ORDER_LAGS;
            let f = least_squares(&lx[start..end], &ly[start..end]);
            if f.2 < fit.2 {
                fit = f;
                window = (start, end);
            }
        }
    }
    let (slope, intercept, residual) = fit;
    let clamped = slope.clamp(0.0, ORDER_CLAMP);
    Ok(OrderEstimate {
        slope: clamped,
        intercept,
        residual,
        lag_range: (lags[window.0], lags[window.1 - 1]),
        saturated: clamped >= SATURATION_SLOPE,
        degenerate: false,
    })
}

/// Both sides of the interpolation inequality between Besov orders `t < s`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks `[ψ]_{b^{t,p}} ≤ s t^{-t/s} (3/(s-t))^{(s-t)/s} [ψ]_{b^{s,p}}^{t/s} ‖ψ‖_p^{(s-t)/s}`
/// on the dyadic lag set.
pub fn interpolation_check(psi: &GridFunction, axis: usize, p: f64, t: f64, s: f64) -> Result<InterpolationCheck> {
    if !(t > 0.0 && t < s && s <= 1.0) {
        return Err(Error::Config(format!("need 0 < t < s <= 1, got t = {t}, s = {s}")));
    }
    let spec_t = SeminormSpec::dyadic(psi, axis, t, p)?;
    let spec_s = SeminormSpec {
        order: s,
        ..spec_t.clone()
    };
    let lhs = besov_seminorm(psi, &spec_t)?;
    let bs = besov_seminorm(psi, &spec_s)?;
    let norm = psi.lp_norm(p);
    let theta = t / s;
    let rhs = s * t.powf(-theta) * (3.0 / (s - t)).powf(1.0 - theta) * bs.powf(theta) * norm.powf(1.0 - theta);
    let holds = lhs <= rhs * (1.0 + 1e-12) + f64::MIN_POSITIVE;
    Ok(InterpolationCheck { holds, lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line(n: usize, a: f64, b: f64, f: impl Fn(f64) -> f64) -> GridFunction {
        let h = (b - a) / (n - 1) as f64;
        GridFunction::from_fn(vec![n], vec![h], vec![a], |x| f(x[0])).unwrap()
    }

    fn random_field(rng: &mut ChaCha8Rng, dims: Vec<usize>) -> GridFunction {
        let len: usize = dims.iter().product();
        let spacing = dims.iter().map(|_| rng.gen_range(0.01..0.2)).collect();
        let origin = dims.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
        let values = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        GridFunction::new(dims, spacing, origin, values).unwrap()
    }

    #[test]
    fn affine_differences() {
        let psi = line(33, 0.0, 2.0, |x| 3.0 * x - 1.0);
        let d1 = shift_diff(&psi, 0, 4, DiffOrder::First).unwrap();
        assert_eq!(d1.dims(), &[29]);
        for v in d1.values() {
            assert_relative_eq!(*v, 3.0 * 4.0 * 0.0625, epsilon = 1e-12);
        }
        let d2 = shift_diff(&psi, 0, 4, DiffOrder::Second).unwrap();
        assert_eq!(d2.dims(), &[25]);
        assert!(d2.max_abs() < 1e-12);
        assert!(matches!(
            shift_diff(&psi, 0, 17, DiffOrder::Second),
            Err(Error::EmptyDomain(_))
        ));
    }

    #[test]
    fn second_difference_is_iterated_first_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let psi = random_field(&mut rng, vec![9, 12]);
        for axis in 0..2 {
            for lag in 1..=3 {
                let d = shift_diff(&psi, axis, lag, DiffOrder::First).unwrap();
                let dd = shift_diff(&d, axis, lag, DiffOrder::First).unwrap();
                let d2 = shift_diff(&psi, axis, lag, DiffOrder::Second).unwrap();
                assert_eq!(dd.dims(), d2.dims());
                assert!(dd.max_abs_diff(&d2).unwrap() <= 1e-15);
            }
        }
    }

    #[test]
    fn leibniz_rule_nodewise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let phi = random_field(&mut rng, vec![7, 10]);
        let psi = GridFunction::new(
            phi.dims().to_vec(),
            phi.spacing().to_vec(),
            phi.origin().to_vec(),
            (0..phi.len()).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        )
        .unwrap();
        let prod = GridFunction::new(
            phi.dims().to_vec(),
            phi.spacing().to_vec(),
            phi.origin().to_vec(),
            phi.values().iter().zip(psi.values()).map(|(a, b)| a * b).collect(),
        )
        .unwrap();
        let (axis, lag) = (1, 2);
        let lhs = shift_diff(&prod, axis, lag, DiffOrder::First).unwrap();
        let dphi = shift_diff(&phi, axis, lag, DiffOrder::First).unwrap();
        let dpsi = shift_diff(&psi, axis, lag, DiffOrder::First).unwrap();
        let stride = phi.strides();
        for (k, idx) in (0..lhs.len()).map(|k| (k, crate::grid::unravel(k, lhs.dims()))) {
            let flat = crate::grid::ravel(&idx, phi.dims());
            let shifted = phi.values()[flat + lag * stride[axis]];
            let rhs = dphi.values()[k] * psi.values()[flat] + shifted * dpsi.values()[k];
            assert!((lhs.values()[k] - rhs).abs() <= 1e-14);
        }
    }

    #[test]
    fn constant_has_zero_seminorms() {
        let psi = line(65, 0.0, 1.0, |_| 4.2);
        let spec = SeminormSpec::dyadic(&psi, 0, 0.5, 2.0).unwrap();
        assert_eq!(nikolskii_seminorm(&psi, &spec).unwrap(), 0.0);
        assert_eq!(besov_seminorm(&psi, &spec).unwrap(), 0.0);
    }

    #[test]
    fn identity_quotients() {
        let psi = line(4097, 0.0, 1.0, |x| x);
        let spec = SeminormSpec::dyadic(&psi, 0, 1.0, 2.0).unwrap();
        let h = psi.spacing()[0];
        let norms = lag_norms(&psi, 0, 2.0, &spec.lags, DiffOrder::First).unwrap();
        for (&lag, n) in spec.lags.iter().zip(&norms) {
            let hh = lag as f64 * h;
            // node-count form of sqrt(1 - h)
            let expected = ((4097 - lag) as f64 * h).sqrt();
            assert_relative_eq!(n / hh, expected, epsilon = 1e-12);
            assert!(n / hh <= 1.0 + 1e-12);
            assert!((n / hh - (1.0 - hh).sqrt()).abs() < 2.0 * h);
        }
        assert_relative_eq!(nikolskii_seminorm(&psi, &spec).unwrap(), 1.0, epsilon = 1e-12);
        assert!(besov_seminorm(&psi, &spec).unwrap() < 1e-9);
    }

    #[test]
    fn homogeneity_and_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let psi = random_field(&mut rng, vec![40, 17]);
        let spec = SeminormSpec::dyadic(&psi, 0, 0.4, 3.0).unwrap();
        let a = -2.5;
        let scaled = psi.map(|v| a * v).unwrap();
        assert_relative_eq!(
            nikolskii_seminorm(&scaled, &spec).unwrap(),
            a.abs() * nikolskii_seminorm(&psi, &spec).unwrap(),
            max_relative = 1e-12
        );
        let moved = psi.translated(&[0.3, -7.0]).unwrap();
        assert_eq!(besov_seminorm(&moved, &spec).unwrap(), besov_seminorm(&psi, &spec).unwrap());
    }

    #[test]
    fn enlarging_lag_set_never_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let psi = random_field(&mut rng, vec![129]);
        let full = SeminormSpec::dyadic(&psi, 0, 0.7, 2.0).unwrap();
        for k in 1..full.lags.len() {
            let part = SeminormSpec {
                lags: full.lags[..k].to_vec(),
                ..full.clone()
            };
            assert!(nikolskii_seminorm(&psi, &part).unwrap() <= nikolskii_seminorm(&psi, &full).unwrap());
            assert!(besov_seminorm(&psi, &part).unwrap() <= besov_seminorm(&psi, &full).unwrap());
        }
    }

    #[test]
    fn besov_bounded_by_twice_nikolskii() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let dims = vec![rng.gen_range(20..80), rng.gen_range(9..30)];
            let psi = random_field(&mut rng, dims);
            for axis in 0..2 {
                let t = rng.gen_range(0.05..1.0);
                let p = rng.gen_range(1.0..5.0);
                let spec = SeminormSpec::dyadic(&psi, axis, t, p).unwrap();
                let b = besov_seminorm(&psi, &spec).unwrap();
                let n = nikolskii_seminorm(&psi, &spec).unwrap();
                assert!(0.5 * b <= n * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn order_of_affine_is_saturated() {
        let psi = line(4096, 0.0, 1.0, |x| 2.0 * x + 1.0);
        let est = estimate_order(&psi, 0, 2.0).unwrap();
        assert!((est.slope - 1.0).abs() < 0.05, "{est:?}");
        assert!(est.saturated);
        let flat = line(4096, 0.0, 1.0, |_| 1.0);
        let est = estimate_order(&flat, 0, 2.0).unwrap();
        assert!(est.degenerate && est.saturated);
    }

    #[test]
    fn order_needs_four_lags() {
        let psi = line(12, 0.0, 1.0, |x| x * x);
        assert!(matches!(estimate_order(&psi, 0, 2.0), Err(Error::EmptyDomain(_))));
    }

    #[test]
    fn interpolation_trivial_and_invalid() {
        let psi = line(257, 0.0, 1.0, |_| 2.0);
        let c = interpolation_check(&psi, 0, 2.0, 0.3, 0.9).unwrap();
        assert!(c.holds && c.lhs == 0.0 && c.rhs == 0.0);
        assert!(interpolation_check(&psi, 0, 2.0, 0.9, 0.3).is_err());
    }

    #[test]
    fn interpolation_smooth_field() {
        let psi = line(513, 0.0, 1.0, |x| (7.0 * x).sin() + 0.3 * (31.0 * x).cos());
        assert!(interpolation_check(&psi, 0, 2.0, 0.3, 0.9).unwrap().holds);
        let cusp = line(1024, -1.0, 1.0, |x| x.abs().powf(0.3));
        assert!(interpolation_check(&cusp, 0, 2.0, 0.5, 0.8).unwrap().holds);
    }
}
