//! Widely degenerate convex profiles
//!
//! ```text
//! g(s)   = (|s| - δ)_+^p / p
//! g_ε(s) = g(s) + ε s² / 2
//! V(s)   = ∫_0^s √g''(τ) dτ
//! ```
//!
//! together with the pointwise inequalities relating `g'` and `V`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::integrate_with_breaks;

/// Absolute tolerance of the quadrature `V`-map.
pub const V_QUADRATURE_TOL: f64 = 1e-10;

/// Grid size used for the supremum in [`lipschitz_check`].
pub const LIPSCHITZ_SUP_POINTS: usize = 1025;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Derivative {
    Value,
    First,
    Second,
}

impl TryFrom<u8> for Derivative {
    type Error = Error;

    fn try_from(k: u8) -> Result<Self> {
        match k {
            0 => Ok(Derivative::Value),
            1 => Ok(Derivative::First),
            2 => Ok(Derivative::Second),
            _ => Err(Error::Config(format!("derivative order {k} not available"))),
        }
    }
}

/// Convex even profile with a degeneracy zone `|s| ≤ δ`.
pub trait Integrand {
    fn p(&self) -> f64;
    fn delta(&self) -> f64;
    fn eps(&self) -> f64;

    fn eval(&self, s: f64, d: Derivative) -> f64;

    fn g(&self, s: f64) -> f64 {
        self.eval(s, Derivative::Value)
    }

    fn dg(&self, s: f64) -> f64 {
        self.eval(s, Derivative::First)
    }

    fn d2g(&self, s: f64) -> f64 {
        self.eval(s, Derivative::Second)
    }

    /// `V(s)`.
    fn v_map(&self, s: f64) -> Result<f64>;

    /// `V(a) - V(b)`.
    fn v_diff(&self, a: f64, b: f64) -> Result<f64> {
        Ok(self.v_map(a)? - self.v_map(b)?)
    }

    /// `V(s)` by adaptive quadrature of `√g''`, regardless of closed forms.
    fn v_quadrature(&self, s: f64) -> Result<f64> {
        v_integral(self, 0.0, s)
    }
}

fn v_integral<I: Integrand + ?Sized>(g: &I, b: f64, a: f64) -> Result<f64> {
    let d = g.delta();
    integrate_with_breaks(&|t| g.d2g(t).sqrt(), b, a, &[-d, 0.0, d], V_QUADRATURE_TOL).map_err(|e| match e {
        Error::Numerical(msg) => Error::Numerical(format!(
            "V-map quadrature for p = {}, δ = {}, ε = {} on [{b}, {a}]: {msg}",
            g.p(),
            g.delta(),
            g.eps()
        )),
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerIntegrand {
    p: f64,
    delta: f64,
}

impl PowerIntegrand {
    pub fn new(p: f64, delta: f64) -> Result<Self> {
        if !(p >= 2.0 && p.is_finite()) {
            return Err(Error::Config(format!("growth exponent p = {p} must be finite and ≥ 2")));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::Config(format!("degeneracy threshold δ = {delta} must be finite and ≥ 0")));
        }
        Ok(Self { p, delta })
    }

    /// `(|s| - δ)_+`.
    pub fn excess(&self, s: f64) -> f64 {
        (s.abs() - self.delta).max(0.0)
    }

    /// Closed-form `V(s) = sign(s) √(p-1) (2/p) (|s|-δ)_+^{p/2}`.
    pub fn v_closed(&self, s: f64) -> f64 {
        s.signum() * (self.p - 1.0).sqrt() * (2.0 / self.p) * self.excess(s).powf(0.5 * self.p)
    }

    /// Tightest `C ≥ 1` with `(|s|-δ)_+^{p-2}/C ≤ g'' ≤ C(|s|^{p-2}+1)`.
    pub fn envelope_constant(&self) -> f64 {
        (self.p - 1.0).max(1.0)
    }

    /// The looser `max(p-1, 1/(p-1)) (1+δ)^{p-2}`, also valid.
    pub fn reference_envelope_constant(&self) -> f64 {
        let p1 = self.p - 1.0;
        p1.max(1.0 / p1) * (1.0 + self.delta).powf(self.p - 2.0)
    }
}

impl Integrand for PowerIntegrand {
    fn p(&self) -> f64 {
        self.p
    }

    fn delta(&self) -> f64 {
        self.delta
    }

    fn eps(&self) -> f64 {
        0.0
    }

    fn eval(&self, s: f64, d: Derivative) -> f64 {
        let x = self.excess(s);
        match d {
            Derivative::Value => x.powf(self.p) / self.p,
            Derivative::First => s.signum() * x.powf(self.p - 1.0),
            Derivative::Second => {
                if self.p == 2.0 {
                    // outside limit at the kink
                    if s.abs() >= self.delta {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    (self.p - 1.0) * x.powf(self.p - 2.0)
                }
            }
        }
    }

    fn v_map(&self, s: f64) -> Result<f64> {
        Ok(self.v_closed(s))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegularizedIntegrand {
    base: PowerIntegrand,
    eps: f64,
}

impl RegularizedIntegrand {
    pub fn new(base: PowerIntegrand, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(Error::Config(format!("regularization ε = {eps} must be positive")));
        }
        Ok(Self { base, eps })
    }

    pub fn base(&self) -> &PowerIntegrand {
        &self.base
    }

    /// Envelope constant of the base profile enlarged by `ε`.
    pub fn envelope_constant(&self) -> f64 {
        self.base.envelope_constant() + self.eps
    }
}

impl Integrand for RegularizedIntegrand {
    fn p(&self) -> f64 {
        self.base.p
    }

    fn delta(&self) -> f64 {
        self.base.delta
    }

    fn eps(&self) -> f64 {
        self.eps
    }

    fn eval(&self, s: f64, d: Derivative) -> f64 {
        let extra = match d {
            Derivative::Value => 0.5 * self.eps * s * s,
            Derivative::First => self.eps * s,
            Derivative::Second => self.eps,
        };
        self.base.eval(s, d) + extra
    }

    fn v_map(&self, s: f64) -> Result<f64> {
        v_integral(self, 0.0, s)
    }

    fn v_diff(&self, a: f64, b: f64) -> Result<f64> {
        v_integral(self, b, a)
    }
}

/// `(g'(a) - g'(b))(a - b) - (V(a) - V(b))²`, nonnegative up to round-off.
pub fn monotone_gap<I: Integrand + ?Sized>(g: &I, a: f64, b: f64) -> Result<f64> {
    let dv = g.v_diff(a, b)?;
    Ok((g.dg(a) - g.dg(b)) * (a - b) - dv * dv)
}

/// Both sides of `|g'(a) - g'(b)| ≤ sup_{[a,b]} √g'' · |V(a) - V(b)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LipschitzCheck {
    pub holds: bool,
    pub lhs: f64,
    pub rhs: f64,
}

/// Checks the composition bound with the supremum taken over
/// [`LIPSCHITZ_SUP_POINTS`] equispaced points plus the endpoints, allowing
/// `1e-12` relative round-off.
pub fn lipschitz_check<I: Integrand + ?Sized>(g: &I, a: f64, b: f64) -> Result<LipschitzCheck> {
    Ok(lipschitz_with(g, a, b, g.v_diff(a, b)?))
}

fn lipschitz_with<I: Integrand + ?Sized>(g: &I, a: f64, b: f64, dv: f64) -> LipschitzCheck {
    let lhs = (g.dg(a) - g.dg(b)).abs();
    let n = LIPSCHITZ_SUP_POINTS - 1;
    let sup = (0..=n)
        .map(|k| b + (a - b) * k as f64 / n as f64)
        .chain([a, b])
        .map(|s| g.d2g(s).sqrt())
        .fold(0.0, f64::max);
    let rhs = sup * dv.abs();
    let holds = lhs <= rhs + 1e-12 * (lhs + rhs) || lhs == 0.0;
    LipschitzCheck { holds, lhs, rhs }
}

/// `(1/C)(|s|-δ)_+^{p-2} ≤ g''(s) ≤ C_ε (|s|^{p-2} + 1)` with `C_ε = C + ε`.
pub fn growth_envelope_check<I: Integrand + ?Sized>(g: &I, s: f64, c: f64) -> Result<bool> {
    if !(c >= 1.0) {
        return Err(Error::Config(format!("envelope constant {c} below 1")));
    }
    let p = g.p();
    let x = (s.abs() - g.delta()).max(0.0);
    let lower = if p == 2.0 {
        if s.abs() >= g.delta() {
            1.0
        } else {
            0.0
        }
    } else {
        x.powf(p - 2.0)
    } / c;
    let upper = (c + g.eps()) * (s.abs().powf(p - 2.0) + 1.0);
    let d2 = g.d2g(s);
    Ok(lower <= d2 * (1.0 + 1e-14) && d2 <= upper * (1.0 + 1e-14))
}

/// Smallest `C̃ ≥ 1` with `g''(s) ≤ C̃ (g''(a) + g''(b) + 1)` for all
/// `a ≤ s ≤ b` on an equispaced grid of `points` nodes over `[-radius, radius]`.
pub fn three_point_constant<I: Integrand + ?Sized>(g: &I, radius: f64, points: usize) -> f64 {
    let n = points.max(2);
    let d2: Vec<f64> = (0..n)
        .map(|k| g.d2g(-radius + 2.0 * radius * k as f64 / (n - 1) as f64))
        .collect();
    // for fixed a < b the worst s is the interior maximum of g''
    let mut worst: f64 = 1.0;
    for i in 0..n {
        let mut run_max = d2[i];
        for j in i..n {
            run_max = run_max.max(d2[j]);
            worst = worst.max(run_max / (d2[i] + d2[j] + 1.0));
        }
    }
    worst
}

/// Round-off scale `(1 + |a| + |b|)^{2p}` of the monotonicity gap.
pub fn gap_scale(a: f64, b: f64, p: f64) -> f64 {
    (1.0 + a.abs() + b.abs()).powf(2.0 * p)
}

/// `(|a|^{p-2}a - |b|^{p-2}b)(a-b) - (p-1)(4/p²) | |a|^{(p-2)/2}a - |b|^{(p-2)/2}b |²`.
pub fn power_monotone_gap(p: f64, a: f64, b: f64) -> f64 {
    let w = |s: f64| s.abs().powf(0.5 * (p - 2.0)) * s;
    let dw = w(a) - w(b);
    (a.abs().powf(p - 2.0) * a - b.abs().powf(p - 2.0) * b) * (a - b) - (p - 1.0) * 4.0 / (p * p) * dw * dw
}

/// Both sides of `||a|^{p-2}a - |b|^{p-2}b| ≤ 2(p-1)/p (|a|^{(p-2)/2} + |b|^{(p-2)/2}) | |a|^{(p-2)/2}a - |b|^{(p-2)/2}b |`.
pub fn power_lipschitz_sides(p: f64, a: f64, b: f64) -> (f64, f64) {
    let h = 0.5 * (p - 2.0);
    let w = |s: f64| s.abs().powf(h) * s;
    let lhs = (a.abs().powf(p - 2.0) * a - b.abs().powf(p - 2.0) * b).abs();
    let rhs = 2.0 * (p - 1.0) / p * (a.abs().powf(h) + b.abs().powf(h)) * (w(a) - w(b)).abs();
    (lhs, rhs)
}

/// Sampling box of [`fuzz_inequalities`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub samples: usize,
    pub seed: u64,
    pub p_range: (f64, f64),
    pub delta_range: (f64, f64),
    pub eps_values: Vec<f64>,
    pub ab_range: (f64, f64),
}

impl Default for FuzzConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 7,
            p_range: (2.0, 8.0),
            delta_range: (0.0, 2.0),
            eps_values: vec![0.0, 1e-3],
            ab_range: (-4.0, 4.0),
        }
    }
}

/// Sample where an inequality failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub check: String,
    pub p: f64,
    pub delta: f64,
    pub eps: f64,
    pub a: f64,
    pub b: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzReport {
    pub samples: usize,
    pub seed: u64,
    pub monotone_violations: usize,
    pub lipschitz_violations: usize,
    pub power_monotone_violations: usize,
    pub power_lipschitz_violations: usize,
    /// Smallest `gap / scale` seen for the monotonicity inequality.
    pub min_scaled_gap: f64,
    /// Largest `lhs / rhs` seen for the composition bound.
    pub max_lipschitz_ratio: f64,
    /// First few failing samples.
    pub examples: Vec<Violation>,
}

impl FuzzReport {
    pub fn violations(&self) -> usize {
        self.monotone_violations + self.lipschitz_violations + self.power_monotone_violations + self.power_lipschitz_violations
    }
}

const MAX_EXAMPLES: usize = 10;

/// Seeded fuzz of the monotonicity and composition inequalities for the
/// model family and of their pure-power specializations.
pub fn fuzz_inequalities(cfg: &FuzzConfig) -> Result<FuzzReport> {
    if cfg.eps_values.is_empty() {
        return Err(Error::Config("no ε values to sample".into()));
    }
    if !(cfg.p_range.0 >= 2.0 && cfg.p_range.0 <= cfg.p_range.1) {
        return Err(Error::Config(format!("invalid p range {:?}", cfg.p_range)));
    }
    if !(cfg.delta_range.0 >= 0.0 && cfg.delta_range.0 <= cfg.delta_range.1) {
        return Err(Error::Config(format!("invalid δ range {:?}", cfg.delta_range)));
    }
    if !(cfg.ab_range.0 < cfg.ab_range.1) {
        return Err(Error::Config(format!("invalid sampling range {:?}", cfg.ab_range)));
    }
    let uniform = |rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)| if lo == hi { lo } else { rng.gen_range(lo..hi) };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut report = FuzzReport {
        samples: cfg.samples,
        seed: cfg.seed,
        monotone_violations: 0,
        lipschitz_violations: 0,
        power_monotone_violations: 0,
        power_lipschitz_violations: 0,
        min_scaled_gap: f64::INFINITY,
        max_lipschitz_ratio: 0.0,
        examples: Vec::new(),
    };
    for _ in 0..cfg.samples {
        let p = uniform(&mut rng, cfg.p_range);
        let delta = uniform(&mut rng, cfg.delta_range);
        let eps = cfg.eps_values[rng.gen_range(0..cfg.eps_values.len())];
        let a = uniform(&mut rng, cfg.ab_range);
        let b = uniform(&mut rng, cfg.ab_range);
        let base = PowerIntegrand::new(p, delta)?;
        let g: Box<dyn Integrand> = if eps > 0.0 {
            Box::new(RegularizedIntegrand::new(base, eps)?)
        } else {
            Box::new(base)
        };
        let record = |report: &mut FuzzReport, check: &str, lhs: f64, rhs: f64| {
            if report.examples.len() < MAX_EXAMPLES {
                report.examples.push(Violation {
                    check: check.into(),
                    p,
                    delta,
                    eps,
                    a,
                    b,
                    lhs,
                    rhs,
                });
            }
        };

        let scale = gap_scale(a, b, p);
        let dv = g.v_diff(a, b)?;
        let gap = (g.dg(a) - g.dg(b)) * (a - b) - dv * dv;
        report.min_scaled_gap = report.min_scaled_gap.min(gap / scale);
        if gap < -1e-12 * scale {
            report.monotone_violations += 1;
            record(&mut report, "monotone", gap, -1e-12 * scale);
        }

        let lip = lipschitz_with(g.as_ref(), a, b, dv);
        if lip.rhs > 0.0 {
            report.max_lipschitz_ratio = report.max_lipschitz_ratio.max(lip.lhs / lip.rhs);
        }
        if !lip.holds {
            report.lipschitz_violations += 1;
            record(&mut report, "lipschitz", lip.lhs, lip.rhs);
        }

        let pgap = power_monotone_gap(p, a, b);
        if pgap < -1e-12 * scale {
            report.power_monotone_violations += 1;
            record(&mut report, "power_monotone", pgap, -1e-12 * scale);
        }
        let (plhs, prhs) = power_lipschitz_sides(p, a, b);
        if plhs > prhs + 1e-12 * (plhs + prhs) {
            report.power_lipschitz_violations += 1;
            record(&mut report, "power_lipschitz", plhs, prhs);
        }
    }
    Ok(report)
}
