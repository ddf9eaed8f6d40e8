//! Parameter paths: `ε -> 0` continuation, `λ` sweeps and `μ` probes.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::problem::{picone_threshold, ProblemParams};
use crate::profile::{common_radii, fmt_f64, RadialProfile};
use crate::shooting::{
    bracket_near, bracket_scan, first_eigenpair, solve_bvp, Bracket, DEFAULT_A_MAX, DEFAULT_A_MIN, DEFAULT_SCAN_POINTS,
};
use crate::verify::{check_cone_bound, eps_monotonicity, weak_residual, OrderingReport, DEFAULT_TEST_COUNT};

/// Log-spaced scan of center values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanRange {
    pub a_min: f64,
    pub a_max: f64,
    pub points: usize,
}

impl Default for ScanRange {
    fn default() -> Self {
        ScanRange { a_min: DEFAULT_A_MIN, a_max: DEFAULT_A_MAX, points: DEFAULT_SCAN_POINTS }
    }
}

impl ScanRange {
    pub fn brackets(&self, params: &ProblemParams) -> Result<Vec<Bracket>> {
        bracket_scan(params, self.a_min, self.a_max, self.points)
    }
}

/// Geometric schedule `ε_k = eps0 · factor^k`, `k = 0..steps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EpsSchedule {
    pub eps0: f64,
    pub factor: f64,
    pub steps: usize,
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule { eps0: 0.1, factor: 0.25, steps: 10 }
    }
}

impl EpsSchedule {
    pub fn values(&self) -> Vec<f64> {
        (0..self.steps).map(|k| self.eps0 * self.factor.powi(k as i32)).collect()
    }
}

/// Sup-norm distance over the radii two profiles share.
pub fn sup_distance(a: &RadialProfile, b: &RadialProfile) -> Result<f64> {
    let pairs = common_radii(a, b);
    if pairs.len() < 2 {
        return Err(Error::GridMismatch);
    }
    Ok(pairs.iter().map(|&(i, j)| (a.u()[i] - b.u()[j]).abs()).fold(0.0, f64::max))
}

/// Solutions along a decreasing sequence of `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpsPath {
    pub eps_values: Vec<f64>,
    pub profiles: Vec<RadialProfile>,
    /// Sup-norm distance to the previous profile; `NaN` for the first.
    pub increments: Vec<f64>,
    /// Ordering of each adjacent pair, smaller `ε` first.
    pub ordering: Vec<OrderingReport>,
    /// Set by [`EpsPath::close`] once the path is Cauchy.
    pub limit_profile: Option<RadialProfile>,
    /// Why the path stopped before the end of the schedule.
    pub truncated: Option<String>,
}

impl EpsPath {
    pub fn len(&self) -> usize {
        self.profiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.profiles.is_empty()
    }

    pub fn a_stars(&self) -> Vec<f64> {
        self.profiles.iter().map(RadialProfile::center_value).collect()
    }

    pub fn is_ordered(&self) -> bool {
        self.ordering.iter().all(|o| o.pass)
    }

    /// Runs [`singular_limit`] and stores the limit on success.
    pub fn close(&mut self, tol: Option<f64>) -> Result<SingularLimit> {
        let lim = singular_limit(self, tol)?;
        self.limit_profile = Some(lim.profile.clone());
        Ok(lim)
    }

    /// CSV with header `eps,a_star,sup_norm,cauchy_increment`; the first
    /// increment is left empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps,a_star,sup_norm,cauchy_increment\n");
        for (k, prof) in self.profiles.iter().enumerate() {
            let inc = self.increments[k];
            let inc = if inc.is_nan() { String::new() } else { fmt_f64(inc) };
            let _ = writeln!(
                out,
                "{},{},{},{}",
                fmt_f64(self.eps_values[k]),
                fmt_f64(prof.center_value()),
                fmt_f64(prof.sup_norm()),
                inc
            );
        }
        out
    }
}

fn nearest_bracket(brackets: &[Bracket], target: f64) -> Option<Bracket> {
    brackets.iter().copied().min_by(|x, y| {
        let dx = ((x.lo * x.hi).sqrt() / target).ln().abs();
        let dy = ((y.lo * y.hi).sqrt() / target).ln().abs();
        dx.total_cmp(&dy)
    })
}

/// Bracket next to a previous solution `a_prev`, falling back to a full scan.
fn warm_bracket(params: &ProblemParams, a_prev: f64) -> Result<Option<Bracket>> {
    if let Some(b) = bracket_near(params, a_prev, 1e-3, 12)? {
        return Ok(Some(b));
    }
    Ok(nearest_bracket(&ScanRange::default().brackets(params)?, a_prev))
}

/// Solves the regularized problem along `ε_k = eps0 · factor^k`.
///
/// The first step takes the smallest-`u(0)` solution in the default scan
/// range; later steps search next to the previous `u(0)`. A step without a
/// solution ends the path and is recorded in [`EpsPath::truncated`].
pub fn eps_continuation(params: &ProblemParams, eps0: f64, factor: f64, n: usize) -> Result<EpsPath> {
    if !(eps0 > 0.0) || !(factor > 0.0 && factor < 1.0) || n < 2 {
        return Err(Error::Precondition(format!(
            "need eps0 > 0, factor in (0, 1), n >= 2 (got {eps0}, {factor}, {n})"
        )));
    }
    let schedule = EpsSchedule { eps0, factor, steps: n };
    let mut path = EpsPath {
        eps_values: Vec::new(),
        profiles: Vec::new(),
        increments: Vec::new(),
        ordering: Vec::new(),
        limit_profile: None,
        truncated: None,
    };
    for eps in schedule.values() {
        let p = params.with_eps(eps)?;
        let bracket = match path.profiles.last() {
            None => ScanRange::default().brackets(&p)?.first().copied(),
            Some(prev) => warm_bracket(&p, prev.center_value())?,
        };
        let Some(bracket) = bracket else {
            path.truncated = Some(format!("no bracket at eps = {eps:e}"));
            break;
        };
        let prof = match solve_bvp(&p, bracket) {
            Ok(prof) => prof,
            Err(e) => {
                path.truncated = Some(format!("eps = {eps:e}: {e}"));
                break;
            }
        };
        match path.profiles.last() {
            None => path.increments.push(f64::NAN),
            Some(prev) => {
                path.increments.push(sup_distance(&prof, prev)?);
                path.ordering.push(eps_monotonicity(&prof, prev)?);
            }
        }
        path.eps_values.push(eps);
        path.profiles.push(prof);
    }
    Ok(path)
}

/// The last profile of a Cauchy path, with its cone constant.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularLimit {
    pub profile: RadialProfile,
    pub cone_constant: f64,
    pub increment: f64,
    pub tol: f64,
}

/// Default Cauchy tolerance relative to the sup norm.
pub const CAUCHY_REL_TOL: f64 = 1e-6;

/// Declares the path converged when its last increment is below `tol`
/// (default `1e-6` times the last sup norm).
pub fn singular_limit(path: &EpsPath, tol: Option<f64>) -> Result<SingularLimit> {
    if path.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 profiles, path has {}", path.len())));
    }
    let last = path.profiles.last().expect("nonempty");
    let tol = tol.unwrap_or(CAUCHY_REL_TOL * last.sup_norm());
    let increment = *path.increments.last().expect("nonempty");
    if !(increment < tol) {
        return Err(Error::NotCauchy { tol, increments: path.increments[1..].to_vec() });
    }
    let cone_constant = check_cone_bound(last)?;
    Ok(SingularLimit { profile: last.clone(), cone_constant, increment, tol })
}

/// One solution (or a failed attempt) of a `λ` sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRecord {
    pub lambda: f64,
    /// Branch index; absent when nothing converged.
    pub branch: Option<usize>,
    pub a_star: f64,
    pub sup_norm: f64,
    pub converged: bool,
    pub weak_residual: f64,
}

fn opt_field(x: f64) -> String {
    if x.is_finite() {
        fmt_f64(x)
    } else {
        String::new()
    }
}

/// CSV with header `lambda,branch,a_star,sup_norm,converged,weak_residual`.
pub fn sweep_to_csv(records: &[SweepRecord]) -> String {
    let mut out = String::from("lambda,branch,a_star,sup_norm,converged,weak_residual\n");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            fmt_f64(r.lambda),
            r.branch.map(|b| b.to_string()).unwrap_or_default(),
            opt_field(r.a_star),
            opt_field(r.sup_norm),
            r.converged,
            opt_field(r.weak_residual)
        );
    }
    out
}

fn solve_at(params: &ProblemParams, lambda: f64, scan: &ScanRange) -> Result<Vec<SweepRecord>> {
    let p = params.with_lambda(lambda)?;
    let brackets = scan.brackets(&p)?;
    if brackets.is_empty() {
        return Ok(vec![SweepRecord {
            lambda,
            branch: None,
            a_star: f64::NAN,
            sup_norm: f64::NAN,
            converged: false,
            weak_residual: f64::NAN,
        }]);
    }
    Ok(brackets
        .iter()
        .map(|&b| match solve_bvp(&p, b) {
            Ok(prof) => SweepRecord {
                lambda,
                branch: None,
                a_star: prof.center_value(),
                sup_norm: prof.sup_norm(),
                converged: true,
                weak_residual: weak_residual(&prof, &p, DEFAULT_TEST_COUNT),
            },
            Err(e) => {
                let best = match e {
                    Error::NoConvergence { best_a, .. } => best_a,
                    _ => f64::NAN,
                };
                SweepRecord {
                    lambda,
                    branch: None,
                    a_star: best,
                    sup_norm: best,
                    converged: false,
                    weak_residual: f64::NAN,
                }
            }
        })
        .collect())
}

/// Every solution found for each `λ`, with branches linked across
/// consecutive `λ` values by nearest `u(0)`.
///
/// `lambdas` must be nondecreasing. Points are solved in parallel; the output
/// is in input order and, within one `λ`, by ascending `u(0)`.
pub fn lambda_sweep(params: &ProblemParams, lambdas: &[f64], scan: &ScanRange) -> Result<Vec<SweepRecord>> {
    if lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Precondition("lambda values must be positive".into()));
    }
    if lambdas.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Precondition("lambda values must be ascending".into()));
    }
    let per_lambda: Vec<Vec<SweepRecord>> =
        lambdas.par_iter().map(|&l| solve_at(params, l, scan)).collect::<Result<_>>()?;

    // (branch id, last a*) of branches alive at the previous λ
    let mut alive: Vec<(usize, f64)> = Vec::new();
    let mut next_id = 0;
    let mut out = Vec::new();
    for mut recs in per_lambda {
        recs.sort_by(|x, y| x.a_star.total_cmp(&y.a_star));
        let mut claimed = vec![false; alive.len()];
        let mut now = Vec::new();
        for rec in recs.iter_mut().filter(|r| r.converged) {
            let pick = alive
                .iter()
                .enumerate()
                .filter(|(k, _)| !claimed[*k])
                .min_by(|(_, x), (_, y)| {
                    let dx = (x.1 / rec.a_star).ln().abs();
                    let dy = (y.1 / rec.a_star).ln().abs();
                    dx.total_cmp(&dy).then(x.1.total_cmp(&y.1))
                })
                .map(|(k, _)| k);
            let id = match pick {
                Some(k) => {
                    claimed[k] = true;
                    alive[k].0
                }
                None => {
                    next_id += 1;
                    next_id - 1
                }
            };
            rec.branch = Some(id);
            now.push((id, rec.a_star));
        }
        alive = now;
        out.extend(recs);
    }
    Ok(out)
}

/// Largest `λ` with at least one converged record.
pub fn largest_existing_lambda(records: &[SweepRecord]) -> Option<f64> {
    records.iter().filter(|r| r.converged).map(|r| r.lambda).fold(None, |m, l| Some(m.map_or(l, |m: f64| m.max(l))))
}

/// One `μ` of a probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuRow {
    pub mu: f64,
    pub exists: bool,
    pub k: f64,
    pub lambda1: f64,
    /// `exists` implies `k <= λ1 (1 + 1e-6)`.
    pub consistent: bool,
}

/// CSV with header `mu,exists,k,lambda1`.
pub fn mu_probe_to_csv(rows: &[MuRow]) -> String {
    let mut out = String::from("mu,exists,k,lambda1\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{},{}", fmt_f64(r.mu), r.exists, fmt_f64(r.k), fmt_f64(r.lambda1));
    }
    out
}

/// For each `μ`, whether any solution exists in the scan range, next to the
/// nonexistence constant `k(μ)` and the first eigenvalue of the ball.
pub fn mu_probe(params: &ProblemParams, mus: &[f64], scan: &ScanRange) -> Result<Vec<MuRow>> {
    let lambda1 = first_eigenpair(params.p(), params.dim(), params.radius())?.lambda1;
    mus.par_iter()
        .map(|&mu| {
            let p = params.with_mu(mu)?;
            let exists = scan.brackets(&p)?.into_iter().any(|b| solve_bvp(&p, b).is_ok());
            let k = picone_threshold(&p).map(|t| t.k).unwrap_or(0.0);
            let consistent = !exists || k <= lambda1 * (1.0 + 1e-6);
            Ok(MuRow { mu, exists, k, lambda1, consistent })
        })
        .collect()
}

/// Smallest probed `μ` without a solution.
pub fn smallest_nonexistent_mu(rows: &[MuRow]) -> Option<f64> {
    rows.iter().filter(|r| !r.exists).map(|r| r.mu).fold(None, |m, x| Some(m.map_or(x, |m: f64| m.min(x))))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn existence_params() -> ProblemParams {
        ProblemParams::builder().dim(3).p(2.0).q(3.0).delta(0.5).lambda(0.05).radius(1.0).build().unwrap()
    }

    #[test]
    fn schedule_values() {
        let v = EpsSchedule::default().values();
        assert_eq!(v.len(), 10);
        assert_eq!(v[0], 0.1);
        assert!((v[9] - 0.1 * 0.25f64.powi(9)).abs() < 1e-22);
    }

    #[test]
    fn zero_forcing_gives_empty_path() {
        let params = ProblemParams::builder().lambda(0.0).mu(0.0).build().unwrap();
        let path = eps_continuation(&params, 0.1, 0.25, 4).unwrap();
        assert!(path.is_empty());
        assert!(path.truncated.is_some());
        assert!(singular_limit(&path, None).is_err());
    }

    #[test]
    fn constant_forcing_is_cauchy_at_once() {
        let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
        let path = eps_continuation(&params, 0.1, 0.25, 3).unwrap();
        assert_eq!(path.len(), 3);
        let lim = singular_limit(&path, None).unwrap();
        assert!((lim.profile.center_value() - 1.0).abs() < 1e-9);
        assert!((lim.cone_constant - 1.0).abs() < 1e-6);
    }

    #[test]
    fn short_existence_path_is_ordered() {
        let path = eps_continuation(&existence_params(), 0.1, 0.25, 4).unwrap();
        assert_eq!(path.len(), 4);
        assert!(path.is_ordered());
        let a = path.a_stars();
        assert!(a.windows(2).all(|w| w[1] > w[0]));
        assert!(path.increments[1..].windows(2).all(|w| w[1] < w[0]));
        let csv = path.to_csv();
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn sweep_rejects_descending_and_handles_duplicates() {
        let params = existence_params();
        let scan = ScanRange::default();
        assert!(lambda_sweep(&params, &[0.1, 0.05], &scan).is_err());
        let recs = lambda_sweep(&params, &[0.05, 0.05], &scan).unwrap();
        assert_eq!(recs.len(), 4);
        assert_eq!(recs[0].a_star, recs[2].a_star);
        assert_eq!(recs[1].a_star, recs[3].a_star);
        assert_eq!(recs[0].branch, recs[2].branch);
        assert_ne!(recs[0].branch, recs[1].branch);
        assert_eq!(sweep_to_csv(&[]), "lambda,branch,a_star,sup_norm,converged,weak_residual\n");
    }

    #[test]
    fn sweep_above_existence_range() {
        let recs = lambda_sweep(&existence_params(), &[50.0], &ScanRange::default()).unwrap();
        assert_eq!(recs.len(), 1);
        assert!(!recs[0].converged);
        assert_eq!(largest_existing_lambda(&recs), None);
    }

    #[test]
    fn mu_probe_small_values() {
        let rows = mu_probe(&existence_params().with_eps(1e-3).unwrap(), &[0.0, 1.0], &ScanRange::default()).unwrap();
        assert!(rows[0].exists && rows[0].k == 0.0);
        assert!(rows.iter().all(|r| r.consistent));
        assert!(rows[1].k >= rows[0].k);
    }
}
