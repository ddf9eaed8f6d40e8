//! Problem data: exponents, parameters, the perturbation `f`, and the
//! scalar functions built from them.
//!
//! The right-hand side of the regularized problem is
//!
//! ```text
//! g(t) = lambda * ((t + eps)^(-delta) + t^q + f(t)) + mu
//! ```
//!
//! with `eps = 0` recovering the singular equation. Everything in this module
//! is a pure function of immutable data.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One term `coeff * t^power` of the perturbation `f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, f64)", into = "(f64, f64)")]
pub struct Monomial {
    pub coeff: f64,
    pub power: f64,
}

impl From<(f64, f64)> for Monomial {
    fn from((coeff, power): (f64, f64)) -> Self {
        Monomial { coeff, power }
    }
}

impl From<Monomial> for (f64, f64) {
    fn from(m: Monomial) -> Self {
        (m.coeff, m.power)
    }
}

/// The perturbation `f(t) = sum coeff_i t^power_i` together with the constant
/// `c0` for which `f(t) + c0 t^q >= 0` is claimed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFSpec")]
pub struct FSpec {
    monomials: Vec<Monomial>,
    c0: f64,
}

#[derive(Deserialize)]
struct RawFSpec {
    #[serde(default)]
    monomials: Vec<Monomial>,
    c0: f64,
}

impl TryFrom<RawFSpec> for FSpec {
    type Error = Error;

    fn try_from(raw: RawFSpec) -> Result<Self> {
        FSpec::new(raw.monomials, raw.c0)
    }
}

impl FSpec {
    /// Every power must be positive (so `f(0) = 0`) and `c0` must lie in `(0, 1)`.
    pub fn new(monomials: Vec<Monomial>, c0: f64) -> Result<Self> {
        if !(c0 > 0.0 && c0 < 1.0) {
            return Err(Error::InvalidParameter(format!("c0 = {c0} must lie in (0, 1)")));
        }
        for m in &monomials {
            if !m.coeff.is_finite() || !(m.power > 0.0) || !m.power.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "monomial {} t^{} needs a finite coefficient and a positive power",
                    m.coeff, m.power
                )));
            }
        }
        Ok(FSpec { monomials, c0 })
    }

    /// `f = 0`.
    pub fn zero(c0: f64) -> Result<Self> {
        FSpec::new(Vec::new(), c0)
    }

    pub fn monomials(&self) -> &[Monomial] {
        &self.monomials
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn is_zero(&self) -> bool {
        self.monomials.iter().all(|m| m.coeff == 0.0)
    }

    fn value(&self, t: f64) -> f64 {
        if t == 0.0 {
            return 0.0;
        }
        self.monomials.iter().map(|m| m.coeff * t.powf(m.power)).sum()
    }

    fn derivative(&self, t: f64) -> f64 {
        self.monomials
            .iter()
            .map(|m| m.coeff * m.power * t.powf(m.power - 1.0))
            .sum()
    }
}

/// Evaluates `f(t)`; exactly zero at `t = 0`.
pub fn eval_f(t: f64, f: &FSpec) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("f is defined for t >= 0, got {t}")));
    }
    Ok(f.value(t))
}

/// All scalars of the problem on the ball `B_R` in `R^N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams", into = "RawParams")]
pub struct ProblemParams {
    dim: usize,
    p: f64,
    q: f64,
    delta: f64,
    lambda: f64,
    eps: f64,
    mu: f64,
    radius: f64,
    f: FSpec,
    singular_term: bool,
    window_checked: bool,
}

#[derive(Serialize, Deserialize)]
struct RawParams {
    #[serde(rename = "N")]
    dim: usize,
    p: f64,
    q: f64,
    delta: f64,
    lambda: f64,
    #[serde(default)]
    eps: f64,
    #[serde(default)]
    mu: f64,
    #[serde(rename = "R")]
    radius: f64,
    #[serde(default = "default_f")]
    f: FSpec,
    #[serde(default = "default_true")]
    singular_term: bool,
    #[serde(default)]
    unchecked: bool,
}

fn default_true() -> bool {
    true
}

fn default_f() -> FSpec {
    FSpec { monomials: Vec::new(), c0: 0.5 }
}

impl TryFrom<RawParams> for ProblemParams {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        let params = ProblemParams {
            dim: raw.dim,
            p: raw.p,
            q: raw.q,
            delta: raw.delta,
            lambda: raw.lambda,
            eps: raw.eps,
            mu: raw.mu,
            radius: raw.radius,
            f: raw.f,
            singular_term: raw.singular_term,
            window_checked: !raw.unchecked,
        };
        params.validate()?;
        Ok(params)
    }
}

impl From<ProblemParams> for RawParams {
    fn from(p: ProblemParams) -> Self {
        RawParams {
            dim: p.dim,
            p: p.p,
            q: p.q,
            delta: p.delta,
            lambda: p.lambda,
            eps: p.eps,
            mu: p.mu,
            radius: p.radius,
            f: p.f,
            singular_term: p.singular_term,
            unchecked: !p.window_checked,
        }
    }
}

/// Builder for [`ProblemParams`].
///
/// ```
/// use radial_plap::problem::ProblemParams;
///
/// let params = ProblemParams::builder()
///     .dim(3)
///     .p(2.0)
///     .q(3.0)
///     .delta(0.5)
///     .lambda(0.05)
///     .eps(1e-3)
///     .build()
///     .unwrap();
/// assert_eq!(params.dim(), 3);
/// ```
#[derive(Debug, Clone)]
pub struct ProblemParamsBuilder {
    params: ProblemParams,
}

impl Default for ProblemParamsBuilder {
    fn default() -> Self {
        ProblemParamsBuilder {
            params: ProblemParams {
                dim: 3,
                p: 2.0,
                q: 3.0,
                delta: 0.5,
                lambda: 0.0,
                eps: 0.0,
                mu: 0.0,
                radius: 1.0,
                f: FSpec { monomials: Vec::new(), c0: 0.5 },
                singular_term: true,
                window_checked: true,
            },
        }
    }
}

impl ProblemParamsBuilder {
    pub fn dim(mut self, n: usize) -> Self {
        self.params.dim = n;
        self
    }
    pub fn p(mut self, p: f64) -> Self {
        self.params.p = p;
        self
    }
    pub fn q(mut self, q: f64) -> Self {
        self.params.q = q;
        self
    }
    pub fn delta(mut self, delta: f64) -> Self {
        self.params.delta = delta;
        self
    }
    pub fn lambda(mut self, lambda: f64) -> Self {
        self.params.lambda = lambda;
        self
    }
    pub fn eps(mut self, eps: f64) -> Self {
        self.params.eps = eps;
        self
    }
    pub fn mu(mut self, mu: f64) -> Self {
        self.params.mu = mu;
        self
    }
    pub fn radius(mut self, r: f64) -> Self {
        self.params.radius = r;
        self
    }
    pub fn f(mut self, f: FSpec) -> Self {
        self.params.f = f;
        self
    }
    /// Drops the `(t + eps)^(-delta)` term, leaving the pure power problem.
    pub fn singular_term(mut self, on: bool) -> Self {
        self.params.singular_term = on;
        self
    }

    /// Validates everything including the subcritical exponent window.
    pub fn build(mut self) -> Result<ProblemParams> {
        self.params.window_checked = true;
        self.params.validate()?;
        Ok(self.params)
    }

    /// Validates everything except `1 < p < N` and `p - 1 < q < p* - 1`.
    pub fn build_unchecked(mut self) -> Result<ProblemParams> {
        self.params.window_checked = false;
        self.params.validate()?;
        Ok(self.params)
    }
}

impl ProblemParams {
    pub fn builder() -> ProblemParamsBuilder {
        ProblemParamsBuilder::default()
    }

    /// Constant forcing `-Δ_p u = c` (lambda = 0, mu = c), exponent window unchecked.
    pub fn constant_forcing(c: f64, dim: usize, p: f64, radius: f64) -> Result<ProblemParams> {
        ProblemParams::builder()
            .dim(dim)
            .p(p)
            .q(p)
            .lambda(0.0)
            .mu(c)
            .radius(radius)
            .build_unchecked()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.dim < 1 {
            return bad("N must be at least 1".into());
        }
        if !(self.p > 1.0) || !self.p.is_finite() {
            return bad(format!("p = {} must exceed 1", self.p));
        }
        if !(self.q > 0.0) || !self.q.is_finite() {
            return bad(format!("q = {} must be positive", self.q));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return bad(format!("delta = {} must lie in (0, 1)", self.delta));
        }
        for (name, v) in [("lambda", self.lambda), ("eps", self.eps), ("mu", self.mu)] {
            if !(v >= 0.0) || !v.is_finite() {
                return bad(format!("{name} = {v} must be finite and nonnegative"));
            }
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return bad(format!("R = {} must be positive", self.radius));
        }
        if let Some(m) = self.f.monomials.iter().find(|m| m.power >= self.q) {
            return bad(format!("f power {} must be below q = {}", m.power, self.q));
        }
        if self.window_checked {
            let n = self.dim as f64;
            if self.p >= n {
                return bad(format!(
                    "p = {} must be below N = {} (build_unchecked to override)",
                    self.p, self.dim
                ));
            }
            let upper = self.critical_exponent() - 1.0;
            if !(self.q > self.p - 1.0 && self.q < upper) {
                return bad(format!(
                    "q = {} outside ({}, {}) (build_unchecked to override)",
                    self.q,
                    self.p - 1.0,
                    upper
                ));
            }
        }
        Ok(())
    }

    /// `p* = pN / (N - p)`, infinite when `p >= N`.
    pub fn critical_exponent(&self) -> f64 {
        let n = self.dim as f64;
        if self.p >= n {
            f64::INFINITY
        } else {
            self.p * n / (n - self.p)
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn delta(&self) -> f64 {
        self.delta
    }
    pub fn lambda(&self) -> f64 {
        self.lambda
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn mu(&self) -> f64 {
        self.mu
    }
    pub fn radius(&self) -> f64 {
        self.radius
    }
    pub fn f(&self) -> &FSpec {
        &self.f
    }
    pub fn singular_term(&self) -> bool {
        self.singular_term
    }
    pub fn window_checked(&self) -> bool {
        self.window_checked
    }

    /// True when `g` blows up at `t = 0`.
    pub fn is_singular(&self) -> bool {
        self.eps == 0.0 && self.lambda > 0.0 && self.singular_term
    }

    fn rebuild(mut self, edit: impl FnOnce(&mut ProblemParams)) -> Result<ProblemParams> {
        edit(&mut self);
        self.validate()?;
        Ok(self)
    }

    pub fn with_lambda(&self, lambda: f64) -> Result<ProblemParams> {
        self.clone().rebuild(|p| p.lambda = lambda)
    }
    pub fn with_eps(&self, eps: f64) -> Result<ProblemParams> {
        self.clone().rebuild(|p| p.eps = eps)
    }
    pub fn with_mu(&self, mu: f64) -> Result<ProblemParams> {
        self.clone().rebuild(|p| p.mu = mu)
    }
    pub fn with_radius(&self, radius: f64) -> Result<ProblemParams> {
        self.clone().rebuild(|p| p.radius = radius)
    }
    pub fn with_singular_term(&self, on: bool) -> Result<ProblemParams> {
        self.clone().rebuild(|p| p.singular_term = on)
    }
    pub fn with_f(&self, f: FSpec) -> Result<ProblemParams> {
        self.clone().rebuild(|p| p.f = f)
    }

    /// Problem with the same geometry and exponents, used to carry `(N, p, R)`
    /// for profiles that are not solutions of `g` (eigenfunctions, test data).
    pub fn geometry(dim: usize, p: f64, radius: f64) -> Result<ProblemParams> {
        ProblemParams::builder()
            .dim(dim)
            .p(p)
            .q(p)
            .radius(radius)
            .build_unchecked()
    }
}

/// `g(t) = lambda ((t + eps)^(-delta) + t^q + f(t)) + mu`.
pub fn eval_g(t: f64, params: &ProblemParams) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::Domain(format!("g is defined for t >= 0, got {t}")));
    }
    if t == 0.0 && params.is_singular() {
        return Err(Error::SingularEvaluation);
    }
    Ok(g_unchecked(t, params))
}

/// `g` without the domain checks; callers guarantee `t >= 0` (and `t > 0` in singular mode).
#[inline]
pub(crate) fn g_unchecked(t: f64, params: &ProblemParams) -> f64 {
    if params.lambda == 0.0 {
        return params.mu;
    }
    let singular = if params.singular_term {
        (t + params.eps).powf(-params.delta)
    } else {
        0.0
    };
    params.lambda * (singular + t.powf(params.q) + params.f.value(t)) + params.mu
}

/// Whether `lambda (q t^(q-1) + f'(t)) < lambda delta (t + eps)^(-delta-1)` holds at
/// `samples` equispaced points of `[0, t_max]`, i.e. whether `g` is strictly
/// decreasing there.
pub fn g_decreasing_on(params: &ProblemParams, t_max: f64, samples: usize) -> bool {
    if params.lambda == 0.0 || !params.singular_term || samples < 2 {
        return false;
    }
    (0..samples).all(|i| {
        let t = t_max * i as f64 / (samples - 1) as f64;
        let growth = params.q * t.powf(params.q - 1.0) + params.f.derivative(t);
        let decay = params.delta * (t + params.eps).powf(-params.delta - 1.0);
        growth < decay
    })
}

/// Outcome of checking hypothesis (H) for a monomial sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    /// Every power is positive and strictly below `q`.
    pub structural_ok: bool,
    /// `f(t) + c0 t^q >= 0` at every sampled and refined point.
    pub positivity_ok: bool,
    /// Location and value of the smallest `f(t) + c0 t^q` found.
    pub min_t: f64,
    pub min_value: f64,
    /// Smallest sampled `t` where positivity fails.
    pub witness_t: Option<f64>,
    pub pass: bool,
}

const H_GRID_POINTS: usize = 200;
const H_T_MIN: f64 = 1e-8;
const H_T_MAX: f64 = 1e8;

/// Checks hypothesis (H) for `f` with exponent `q`.
///
/// Samples `f(t) + c0 t^q` on 200 log-spaced points of `[1e-8, 1e8]`, adds the
/// stationary points of every pair of terms, and refines the sampled minimum
/// with a golden-section search. Failures are reported, never raised.
pub fn check_hypothesis_h(f: &FSpec, q: f64) -> HypothesisReport {
    let structural_ok = q > 0.0 && f.monomials.iter().all(|m| m.power > 0.0 && m.power < q);

    let mut terms: Vec<Monomial> = f.monomials.clone();
    terms.push(Monomial { coeff: f.c0, power: q });
    let h = |t: f64| -> f64 { terms.iter().map(|m| m.coeff * t.powf(m.power)).sum() };
    let scale = |t: f64| -> f64 { terms.iter().map(|m| (m.coeff * t.powf(m.power)).abs()).sum() };
    let negative = |t: f64| h(t) < -1e-12 * scale(t);

    let log_lo = H_T_MIN.ln();
    let log_hi = H_T_MAX.ln();
    let mut samples: Vec<f64> = (0..H_GRID_POINTS)
        .map(|i| (log_lo + (log_hi - log_lo) * i as f64 / (H_GRID_POINTS - 1) as f64).exp())
        .collect();

    // a t^s + b t^r is stationary where t^(s-r) = -(b r) / (a s)
    for (i, a) in terms.iter().enumerate() {
        for b in &terms[i + 1..] {
            if a.power == b.power || a.coeff == 0.0 || b.coeff == 0.0 {
                continue;
            }
            let ratio = -(b.coeff * b.power) / (a.coeff * a.power);
            if ratio > 0.0 {
                let t = ratio.powf(1.0 / (a.power - b.power));
                if t.is_finite() && (H_T_MIN..=H_T_MAX).contains(&t) {
                    samples.push(t);
                }
            }
        }
    }
    samples.sort_by(f64::total_cmp);

    let (mut min_t, mut min_value) = samples
        .iter()
        .map(|&t| (t, h(t)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("sample grid is nonempty");

    let idx = samples.iter().position(|&t| t == min_t).unwrap_or(0);
    let lo = samples[idx.saturating_sub(1)];
    let hi = samples[(idx + 1).min(samples.len() - 1)];
    if lo < hi {
        let (t, v) = golden_section_min(|x| h(x.exp()), lo.ln(), hi.ln(), 1e-12);
        if v < min_value {
            min_t = t.exp();
            min_value = v;
        }
    }

    let witness_t = samples.iter().copied().find(|&t| negative(t));
    let positivity_ok = witness_t.is_none() && !negative(min_t);

    HypothesisReport {
        structural_ok,
        positivity_ok,
        min_t,
        min_value,
        witness_t,
        pass: structural_ok && positivity_ok,
    }
}

fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..200 {
        if (b - a).abs() <= tol * (1.0 + a.abs() + b.abs()) {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// The nonexistence constant `k = min_{t>0} (mu + lambda (1 - c0) t^q) / t^(p-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiconeThreshold {
    pub k: f64,
    /// Minimizer, absent when the infimum is approached at `t -> 0` or `t -> inf`.
    pub t_star: Option<f64>,
    /// Minimum over a log-spaced grid on `[1e-8, 1e8]`, for cross-checking.
    pub grid_k: f64,
    /// Set when `lambda (1 - c0) = 0` while `mu > 0`.
    pub degenerate: bool,
}

/// Computes `k` in closed form and on a grid.
///
/// ```
/// use radial_plap::problem::{picone_threshold, FSpec, ProblemParams};
///
/// // lambda (1 - c0) = 1, mu = 2: (2 + t^3) / t is smallest at t = 1
/// let params = ProblemParams::builder()
///     .dim(3).p(2.0).q(3.0).lambda(2.0).mu(2.0)
///     .f(FSpec::zero(0.5).unwrap())
///     .build()
///     .unwrap();
/// let k = picone_threshold(&params).unwrap();
/// assert!((k.k - 3.0).abs() < 1e-12);
/// ```
pub fn picone_threshold(params: &ProblemParams) -> Result<PiconeThreshold> {
    let (p, q, mu) = (params.p, params.q, params.mu);
    if !(q > p - 1.0) {
        return Err(Error::Precondition(format!("need q > p - 1, got q = {q}, p = {p}")));
    }
    if params.lambda == 0.0 && mu == 0.0 {
        return Err(Error::Precondition("need lambda > 0 or mu > 0".into()));
    }
    let l = params.lambda * (1.0 - params.f.c0);
    let phi = |t: f64| (mu + l * t.powf(q)) / t.powf(p - 1.0);

    let n = 4001;
    let grid_k = (0..n)
        .map(|i| phi(10f64.powf(-8.0 + 16.0 * i as f64 / (n - 1) as f64)))
        .fold(f64::INFINITY, f64::min);

    if mu == 0.0 {
        return Ok(PiconeThreshold { k: 0.0, t_star: None, grid_k, degenerate: false });
    }
    if l == 0.0 {
        return Ok(PiconeThreshold { k: 0.0, t_star: None, grid_k, degenerate: true });
    }
    let t_star = ((p - 1.0) * mu / ((q - p + 1.0) * l)).powf(1.0 / q);
    Ok(PiconeThreshold { k: phi(t_star), t_star: Some(t_star), grid_k, degenerate: false })
}
