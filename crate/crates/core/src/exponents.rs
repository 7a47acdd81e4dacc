//! Exponent arithmetic for two-exponent orthotropic profiles.
//!
//! Everything here is a pure function of a handful of reals. The central
//! object is the recursion on the differentiability order of the small-exponent
//! axes,
//!
//! ```text
//! t_0 = p/q,    t_{k+1} = p/q + α_k b(t_k),    b(t) = p / (ℓ/t + N - 2 - ℓ),
//! ```
//!
//! which either crosses 1 in finitely many steps (full differentiability) or
//! converges to a root of the limit polynomial
//!
//! ```text
//! P(t) = (N-2-ℓ) t² - [(N-2-ℓ) p/q + p - ℓ] t - ℓ p/q.
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance used only to classify `p̄ == N` as critical.
pub const CRITICAL_TOLERANCE: f64 = 1e-12;

/// Successive increments below this count towards convergence.
pub const CONVERGENCE_INCREMENT: f64 = 1e-12;

/// Number of consecutive small increments that declares convergence.
pub const CONVERGENCE_STREAK: usize = 3;

/// Exponent configuration `(N, ℓ, p, q)`: `ℓ` axes with growth `p`, the
/// remaining `N - ℓ` with growth `q ≥ p`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyProfile {
    #[serde(rename = "N")]
    n: usize,
    ell: usize,
    p: f64,
    q: f64,
}

impl AnisotropyProfile {
    pub fn new(n: usize, ell: usize, p: f64, q: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidProfile(format!("N = {n} must be at least 2")));
        }
        if ell < 1 || ell > n - 1 {
            return Err(Error::InvalidProfile(format!(
                "ell = {ell} must lie in 1..={}",
                n - 1
            )));
        }
        if !(p.is_finite() && q.is_finite()) {
            return Err(Error::InvalidProfile("exponents must be finite".into()));
        }
        if p < 2.0 || q < p {
            return Err(Error::InvalidProfile(format!(
                "need 2 <= p <= q, got p = {p}, q = {q}"
            )));
        }
        Ok(Self { n, ell, p, q })
    }

    /// Builds a profile from unordered exponents: if `p > q` the roles of the
    /// two groups are exchanged, so `(N, ℓ, p, q)` becomes `(N, N - ℓ, q, p)`.
    pub fn normalized(n: usize, ell: usize, p: f64, q: f64) -> Result<Self> {
        if p > q && ell < n {
            Self::new(n, n - ell, q, p)
        } else {
            Self::new(n, ell, p, q)
        }
    }

    /// Recognizes a two-valued exponent vector. Returns `None` when more than
    /// two distinct values occur.
    pub fn from_exponents(pvec: &[f64]) -> Result<Option<Self>> {
        validate_exponents(pvec, 2.0)?;
        let n = pvec.len();
        let lo = pvec.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = pvec.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if pvec.iter().any(|&v| v != lo && v != hi) {
            return Ok(None);
        }
        let ell = if lo == hi {
            n - 1
        } else {
            pvec.iter().filter(|&&v| v == lo).count()
        };
        Self::new(n, ell, lo, hi).map(Some)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// `p/q`, the initial order of the small-exponent axes.
    pub fn ratio(&self) -> f64 {
        self.p / self.q
    }

    pub fn is_isotropic(&self) -> bool {
        self.p == self.q
    }

    /// `(p, …, p, q, …, q)` with `ℓ` copies of `p`.
    pub fn exponents(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| if i < self.ell { self.p } else { self.q })
            .collect()
    }
}

/// Per-axis fractional orders `t ∈ (0, 1]^N`, nondecreasing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DifferentiabilityVector(Vec<f64>);

impl DifferentiabilityVector {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::InvalidProfile("empty differentiability vector".into()));
        }
        if let Some(bad) = t.iter().find(|&&v| !(v > 0.0 && v <= 1.0)) {
            return Err(Error::InvalidProfile(format!(
                "differentiability order {bad} outside (0, 1]"
            )));
        }
        if t.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidProfile(
                "differentiability orders must be nondecreasing".into(),
            ));
        }
        Ok(Self(t))
    }

    /// `(t, …, t, 1, …, 1)` with `ell` copies of `t` (capped at 1).
    pub fn two_level(n: usize, ell: usize, t: f64) -> Result<Self> {
        let t = t.min(1.0);
        Self::new((0..n).map(|i| if i < ell { t } else { 1.0 }).collect())
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `γ = Σ 1/t_j`.
    pub fn gamma(&self) -> f64 {
        nikolskii_gamma(self)
    }
}

/// Sobolev-type exponent `p̄*` attached to a harmonic mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum SobolevExponent {
    /// `p̄ < N`: the exponent `N p̄ / (N - p̄)`.
    Subcritical(f64),
    /// `p̄ = N`: every finite exponent is admissible.
    Critical,
    /// `p̄ > N`: embedding into `L^∞`.
    Supercritical,
}

fn validate_exponents(pvec: &[f64], min: f64) -> Result<()> {
    if pvec.is_empty() {
        return Err(Error::InvalidProfile("empty exponent vector".into()));
    }
    if let Some(bad) = pvec.iter().find(|&&v| !(v.is_finite() && v >= min)) {
        return Err(Error::InvalidProfile(format!(
            "exponent {bad} must be finite and at least {min}"
        )));
    }
    Ok(())
}

/// Harmonic mean `p̄` with `1/p̄ = (1/N) Σ 1/p_i`.
pub fn harmonic_mean(pvec: &[f64]) -> Result<f64> {
    validate_exponents(pvec, 1.0)?;
    let n = pvec.len() as f64;
    Ok(n / pvec.iter().map(|p| 1.0 / p).sum::<f64>())
}

pub fn sobolev_exponent(pbar: f64, n: usize) -> SobolevExponent {
    let nf = n as f64;
    if (pbar - nf).abs() <= CRITICAL_TOLERANCE * nf {
        SobolevExponent::Critical
    } else if pbar < nf {
        SobolevExponent::Subcritical(nf * pbar / (nf - pbar))
    } else {
        SobolevExponent::Supercritical
    }
}

pub fn nikolskii_gamma(t: &DifferentiabilityVector) -> f64 {
    t.0.iter().map(|v| 1.0 / v).sum()
}

/// Exclusive supremum `p γ / (γ - p)` of the Lebesgue exponents reached by
/// the anisotropic Nikol'skii embedding.
pub fn nikolskii_embedding_sup(gamma: f64, p: f64) -> Result<f64> {
    if !(gamma > p) || p < 1.0 {
        return Err(Error::DegenerateEmbedding { gamma, p });
    }
    Ok(p * gamma / (gamma - p))
}

/// `τ0 = 1 - p / ((N - 1) q)`, the lower bound for the weights `α_k`.
pub fn tau0(profile: &AnisotropyProfile) -> f64 {
    1.0 - profile.ratio() / (profile.n as f64 - 1.0)
}

/// `b(t) = p / (ℓ/t + N - 2 - ℓ)`.
pub fn b_of_t(profile: &AnisotropyProfile, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidProfile(format!("b(t) needs t > 0, got {t}")));
    }
    let denom = profile.ell as f64 / t + profile.n as f64 - 2.0 - profile.ell as f64;
    if denom == 0.0 {
        return Err(Error::Pole(t));
    }
    Ok(profile.p / denom)
}

/// Initial orders `(p_1/p_N, …, p_{N-1}/p_N, 1)` for a nondecreasing
/// exponent vector.
pub fn initial_vector(pvec: &[f64]) -> Result<DifferentiabilityVector> {
    validate_exponents(pvec, 2.0)?;
    if pvec.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidProfile("exponents must be nondecreasing".into()));
    }
    let top = pvec[pvec.len() - 1];
    let mut t: Vec<f64> = pvec.iter().map(|p| p / top).collect();
    *t.last_mut().expect("nonempty") = 1.0;
    DifferentiabilityVector::new(t)
}

/// `χ = 1 + α · 2 / (γ - 2)`.
pub fn chi_from_gamma(gamma: f64, alpha: f64) -> Result<f64> {
    if !(gamma > 2.0) {
        return Err(Error::DegenerateEmbedding { gamma, p: 2.0 });
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Config(format!("alpha = {alpha} must lie in (0, 1)")));
    }
    Ok(1.0 + alpha * 2.0 / (gamma - 2.0))
}

/// One improvement step: `r_j = min{p_j/p_N + (p_j/2)(χ - 1), 1}`.
pub fn improve(pvec: &[f64], chi: f64) -> Result<DifferentiabilityVector> {
    validate_exponents(pvec, 2.0)?;
    if pvec.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidProfile("exponents must be nondecreasing".into()));
    }
    if !(chi >= 1.0) || !chi.is_finite() {
        return Err(Error::Config(format!("chi = {chi} must be at least 1")));
    }
    let top = pvec[pvec.len() - 1];
    let mut r: Vec<f64> = pvec
        .iter()
        .map(|&p| (p / top + 0.5 * p * (chi - 1.0)).min(1.0))
        .collect();
    *r.last_mut().expect("nonempty") = 1.0;
    DifferentiabilityVector::new(r)
}

/// Weights `α_k`: increasing, inside `(τ0, 1)`, tending to 1. In binary64
/// the geometric schedule becomes constant after about fifty steps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AlphaSchedule {
    /// `α_k = 1 - (1 - τ0) ρ^{k+1}` with `0 < ρ < 1`.
    Geometric { ratio: f64 },
    /// Explicit finite list; the recursion stops as inconclusive once it is
    /// exhausted.
    Explicit { values: Vec<f64> },
}

impl Default for AlphaSchedule {
    fn default() -> Self {
        AlphaSchedule::Geometric { ratio: 0.5 }
    }
}

impl AlphaSchedule {
    pub fn validate(&self, tau0: f64) -> Result<()> {
        match self {
            AlphaSchedule::Geometric { ratio } => {
                if !(*ratio > 0.0 && *ratio < 1.0) {
                    return Err(Error::Config(format!(
                        "geometric schedule ratio {ratio} must lie in (0, 1)"
                    )));
                }
            }
            AlphaSchedule::Explicit { values } => {
                if values.is_empty() {
                    return Err(Error::Config("empty alpha schedule".into()));
                }
                if let Some(a) = values.iter().find(|&&a| !(a > tau0 && a < 1.0)) {
                    return Err(Error::Config(format!(
                        "alpha {a} outside ({tau0}, 1)"
                    )));
                }
                if values.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Config("alpha schedule must be increasing".into()));
                }
            }
        }
        Ok(())
    }

    /// `α_k`, or `None` past the end of an explicit list.
    pub fn alpha(&self, k: usize, tau0: f64) -> Option<f64> {
        match self {
            AlphaSchedule::Geometric { ratio } => {
                // saturates at the largest double below 1 once the geometric
                // term drops under half an ulp
                let a = 1.0 - (1.0 - tau0) * ratio.powi(k.min(i32::MAX as usize - 1) as i32 + 1);
                Some(a.min(1.0 - f64::EPSILON / 2.0))
            }
            AlphaSchedule::Explicit { values } => values.get(k).copied(),
        }
    }
}

/// One row of the recursion: `t_k` with the weight, `γ_k` and `χ_k` that
/// produce `t_{k+1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationStep {
    pub k: usize,
    pub alpha: f64,
    /// Uncapped scalar order of the small-exponent axes.
    pub t_small: f64,
    /// Capped vector `(t_k, …, t_k, 1, …, 1)`.
    pub t: DifferentiabilityVector,
    pub gamma: f64,
    /// `None` when `γ_k = 2` (only for `N = 2` at full differentiability).
    pub chi: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Verdict {
    /// `t_k ≥ 1` reached after `k0` updates.
    FullDifferentiability { k0: usize },
    /// The orders converge to `limit ≤ 1`. `last_iterate` is the raw value of
    /// the recursion when convergence was declared.
    ConvergesBelowOne { limit: f64, last_iterate: f64 },
    /// Neither outcome within the iteration budget.
    Inconclusive { last_iterate: f64 },
}

impl Verdict {
    pub fn is_full(&self) -> bool {
        matches!(self, Verdict::FullDifferentiability { .. })
    }

    pub fn label(&self) -> &'static str {
        match self {
            Verdict::FullDifferentiability { .. } => "FullDifferentiability",
            Verdict::ConvergesBelowOne { .. } => "ConvergesBelowOne",
            Verdict::Inconclusive { .. } => "Inconclusive",
        }
    }

    /// Limit value for reporting: 1 when full, otherwise the limit or the last
    /// iterate.
    pub fn limit(&self) -> Option<f64> {
        match self {
            Verdict::FullDifferentiability { .. } => None,
            Verdict::ConvergesBelowOne { limit, .. } => Some(*limit),
            Verdict::Inconclusive { last_iterate } => Some(*last_iterate),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub steps: Vec<IterationStep>,
    pub verdict: Verdict,
}

impl IterationTrace {
    /// Final predicted orders per axis of the sorted exponent vector.
    pub fn predicted(&self, profile: &AnisotropyProfile) -> DifferentiabilityVector {
        let t = match self.verdict {
            Verdict::FullDifferentiability { .. } => 1.0,
            Verdict::ConvergesBelowOne { limit, .. } => limit,
            Verdict::Inconclusive { last_iterate } => last_iterate,
        };
        DifferentiabilityVector::two_level(profile.n, profile.ell, t)
            .expect("recursion orders are positive")
    }
}

fn make_step(profile: &AnisotropyProfile, k: usize, alpha: f64, t_small: f64) -> IterationStep {
    let capped = t_small.min(1.0);
    let t = DifferentiabilityVector::two_level(profile.n, profile.ell, capped)
        .expect("recursion orders are positive");
    let gamma = profile.ell as f64 / capped + (profile.n - profile.ell) as f64;
    let chi = chi_from_gamma(gamma, alpha).ok();
    IterationStep {
        k,
        alpha,
        t_small,
        t,
        gamma,
        chi,
    }
}

/// Runs the differentiability recursion until an alternative is decided.
///
/// Full differentiability is declared as soon as `p/q + α_k b(t_k) ≥ 1` or
/// `t_k ≥ N - 1`. Convergence is declared after [`CONVERGENCE_STREAK`]
/// consecutive increments below [`CONVERGENCE_INCREMENT`]; the reported limit
/// is then the closed-form root when one exists, since `α_k < 1` makes the
/// raw iterate sit slightly below it.
pub fn iterate_scheme(
    profile: &AnisotropyProfile,
    schedule: &AlphaSchedule,
    max_iter: usize,
) -> Result<IterationTrace> {
    let tau = tau0(profile);
    let r = profile.ratio();
    let n_minus_one = profile.n as f64 - 1.0;

    if profile.is_isotropic() {
        let alpha = schedule.alpha(0, tau).unwrap_or(0.5);
        return Ok(IterationTrace {
            steps: vec![make_step(profile, 0, alpha, 1.0)],
            verdict: Verdict::FullDifferentiability { k0: 0 },
        });
    }
    schedule.validate(tau)?;

    let mut steps = Vec::new();
    let mut t = r;
    let mut streak = 0usize;
    let mut k = 0usize;
    loop {
        let Some(alpha) = schedule.alpha(k, tau) else {
            steps.push(make_step(profile, k, f64::NAN, t));
            return Ok(IterationTrace {
                steps,
                verdict: Verdict::Inconclusive { last_iterate: t },
            });
        };
        steps.push(make_step(profile, k, alpha, t));
        if t >= n_minus_one {
            return Ok(IterationTrace {
                steps,
                verdict: Verdict::FullDifferentiability { k0: k },
            });
        }
        if k >= max_iter {
            return Ok(IterationTrace {
                steps,
                verdict: Verdict::Inconclusive { last_iterate: t },
            });
        }
        let next = r + alpha * b_of_t(profile, t)?;
        if next >= 1.0 {
            let a_next = schedule.alpha(k + 1, tau).unwrap_or(alpha);
            steps.push(make_step(profile, k + 1, a_next, next));
            return Ok(IterationTrace {
                steps,
                verdict: Verdict::FullDifferentiability { k0: k + 1 },
            });
        }
        if next - t < CONVERGENCE_INCREMENT {
            streak += 1;
        } else {
            streak = 0;
        }
        t = next;
        k += 1;
        if streak >= CONVERGENCE_STREAK {
            let a_next = schedule.alpha(k, tau).unwrap_or(alpha);
            steps.push(make_step(profile, k, a_next, t));
            let limit = match closed_form_limit(profile) {
                LimitValue::Finite(l) => l,
                LimitValue::Divergent => t,
            };
            return Ok(IterationTrace {
                steps,
                verdict: Verdict::ConvergesBelowOne {
                    limit,
                    last_iterate: t,
                },
            });
        }
    }
}

/// `P(t) = a2 t² - a1 t - a0` with its real roots, if any.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitPolynomial {
    pub a2: f64,
    pub a1: f64,
    pub a0: f64,
    /// `a1² + 4 a2 a0`.
    pub discriminant: f64,
    /// `(L1, L2)` with `L1 ≤ L2`.
    pub roots: Option<(f64, f64)>,
}

impl LimitPolynomial {
    pub fn eval(&self, t: f64) -> f64 {
        (self.a2 * t - self.a1) * t - self.a0
    }
}

/// Coefficients of the limit polynomial for `ℓ ≠ N - 2`.
pub fn limit_polynomial(profile: &AnisotropyProfile) -> Result<LimitPolynomial> {
    let n = profile.n as f64;
    let ell = profile.ell as f64;
    if profile.ell + 2 == profile.n {
        return Err(Error::LinearLimitCase);
    }
    let r = profile.ratio();
    let m = n - 2.0 - ell;
    let a2 = m;
    let a1 = m * r + profile.p - ell;
    let a0 = r * ell;
    let discriminant = a1 * a1 + 4.0 * a2 * a0;
    let roots = (discriminant >= 0.0).then(|| quadratic_roots(a2, -a1, -a0, discriminant));
    Ok(LimitPolynomial {
        a2,
        a1,
        a0,
        discriminant,
        roots,
    })
}

/// Real roots of `a x² + b x + c` (with `a ≠ 0` and `disc ≥ 0`) using the
/// cancellation-free form, returned in increasing order.
fn quadratic_roots(a: f64, b: f64, c: f64, disc: f64) -> (f64, f64) {
    let sq = disc.sqrt();
    let w = -0.5 * (b + b.signum() * sq);
    let (x1, x2) = if w == 0.0 { (0.0, 0.0) } else { (w / a, c / w) };
    if x1 <= x2 {
        (x1, x2)
    } else {
        (x2, x1)
    }
}

/// Sign test for real roots: `(N-2-ℓ) p/q + (√ℓ - √p)² ≥ 0`.
pub fn real_root_criterion(profile: &AnisotropyProfile) -> f64 {
    let m = profile.n as f64 - 2.0 - profile.ell as f64;
    let d = (profile.ell as f64).sqrt() - profile.p.sqrt();
    m * profile.ratio() + d * d
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum LimitValue {
    Finite(f64),
    Divergent,
}

/// Closed-form limit of the recursion with `α_k ≡ 1`.
pub fn closed_form_limit(profile: &AnisotropyProfile) -> LimitValue {
    let n = profile.n as f64;
    let p = profile.p;
    let r = profile.ratio();
    if profile.ell + 2 == profile.n {
        if p >= n - 2.0 {
            return LimitValue::Divergent;
        }
        return LimitValue::Finite(r * (n - 2.0) / (n - 2.0 - p));
    }
    if profile.ell + 1 == profile.n {
        if p >= n - 1.0 {
            return LimitValue::Divergent;
        }
        // p / q' = p (1 - 1/q)
        let s = n - 1.0 - p * (1.0 - 1.0 / profile.q);
        let disc = s * s - 4.0 * (n - 1.0) * r;
        if disc < 0.0 {
            return LimitValue::Divergent;
        }
        let l1 = smaller_root_monic(s, (n - 1.0) * r, disc);
        if l1 < r {
            return LimitValue::Divergent;
        }
        return LimitValue::Finite(l1);
    }
    let poly = limit_polynomial(profile).expect("ell <= N - 3 here");
    match poly.roots {
        Some((_, l2)) => LimitValue::Finite(l2),
        None => LimitValue::Divergent,
    }
}

/// Smaller root of `t² - s t + c` given `disc = s² - 4c ≥ 0`.
fn smaller_root_monic(s: f64, c: f64, disc: f64) -> f64 {
    let sq = disc.sqrt();
    if s > 0.0 {
        // (s - sq)/2 = 2c / (s + sq)
        2.0 * c / (s + sq)
    } else {
        0.5 * (s - sq)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
struct Inequality {
    /// Positive when satisfied. For strict inequalities zero means violated.
    slack: f64,
    strict: bool,
}

impl Inequality {
    fn less(lhs: f64, rhs: f64) -> Self {
        Self {
            slack: rhs - lhs,
            strict: true,
        }
    }

    fn at_least(lhs: f64, rhs: f64) -> Self {
        Self {
            slack: lhs - rhs,
            strict: false,
        }
    }

    fn holds(&self) -> bool {
        if self.strict {
            self.slack > 0.0
        } else {
            self.slack >= 0.0
        }
    }
}

/// Evaluation of the admissibility conditions on `(N, ℓ, p, q)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub satisfied: bool,
    /// Not satisfied, but some branch fails only through a strict inequality
    /// holding with equality.
    pub boundary: bool,
    /// `max` over branches of the `min` slack of the branch's inequalities.
    pub slack: f64,
    /// Index of the satisfied branch (0-based), if any.
    pub branch: Option<usize>,
}

impl ConditionReport {
    pub fn holds_with_margin(&self, margin: f64) -> bool {
        self.slack >= margin
    }

    pub fn fails_with_margin(&self, margin: f64) -> bool {
        self.slack <= -margin
    }
}

fn condition_branches(profile: &AnisotropyProfile) -> Vec<Vec<Inequality>> {
    let n = profile.n as f64;
    let p = profile.p;
    let q = profile.q;
    // (N-2) p / ((N-2) - p), only meaningful for p < N - 2.
    let linear_bound = if p < n - 2.0 {
        (n - 2.0) * p / ((n - 2.0) - p)
    } else {
        f64::INFINITY
    };
    if profile.ell + 1 == profile.n {
        let split = (n - 2.0) * (n - 2.0) / (n - 1.0);
        let gap = (n - 1.0).sqrt() - p.sqrt();
        let root_bound = if gap > 0.0 {
            p / (gap * gap)
        } else {
            f64::INFINITY
        };
        vec![
            vec![Inequality::at_least(p, n - 1.0)],
            vec![Inequality::less(p, split), Inequality::less(q, linear_bound)],
            vec![
                Inequality::at_least(p, split),
                Inequality::less(p, n - 1.0),
                Inequality::less(q, root_bound),
            ],
        ]
    } else {
        vec![
            vec![Inequality::at_least(p, n - 2.0)],
            vec![Inequality::less(p, n - 2.0), Inequality::less(q, linear_bound)],
        ]
    }
}

/// Admissibility conditions on `(p, q)`: the three-branch disjunction for
/// `ℓ = N - 1` and the two-branch one for `ℓ ≤ N - 2`. Strict inequalities
/// are evaluated strictly; ties are reported as `boundary`.
pub fn check_conditions(profile: &AnisotropyProfile) -> ConditionReport {
    let branches = condition_branches(profile);
    let mut slack = f64::NEG_INFINITY;
    let mut branch = None;
    let mut boundary = false;
    for (idx, ineqs) in branches.iter().enumerate() {
        let s = ineqs
            .iter()
            .map(|i| i.slack)
            .fold(f64::INFINITY, f64::min);
        slack = slack.max(s);
        if ineqs.iter().all(Inequality::holds) {
            branch.get_or_insert(idx);
        } else if ineqs.iter().all(|i| i.slack >= 0.0) {
            boundary = true;
        }
    }
    let satisfied = branch.is_some();
    ConditionReport {
        satisfied,
        boundary: boundary && !satisfied,
        slack,
        branch,
    }
}

/// Whether `f ∈ W^{1,p'}` lands in the Lebesgue class the estimates need:
/// `max p'_i < (p̄')*` for the conjugate vector.
pub fn source_embedding_ok(pvec: &[f64], n: usize) -> Result<bool> {
    validate_exponents(pvec, 1.0)?;
    if pvec.iter().any(|&p| p <= 1.0) {
        return Err(Error::InvalidProfile(
            "conjugate exponent undefined for p = 1".into(),
        ));
    }
    let conj: Vec<f64> = pvec.iter().map(|&p| p / (p - 1.0)).collect();
    let max_conj = conj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let pbar = harmonic_mean(&conj)?;
    Ok(match sobolev_exponent(pbar, n) {
        SobolevExponent::Subcritical(star) => max_conj < star,
        SobolevExponent::Critical | SobolevExponent::Supercritical => true,
    })
}
