//! Dirichlet problem by shooting on the center value, and the first
//! eigenpair of the radial p-Laplacian.
//!
//! The miss of a shot is `u(R) > 0` when the profile stays positive up to `R`
//! and `r_cross - R < 0` when it crosses zero first. Both branches vanish at a
//! solution, so the miss is continuous there and a sign change brackets it.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ProblemParams;
use crate::profile::{fmt_f64, RadialProfile, Termination};
use crate::radial::{integrate_profile, integrate_system, phi_p, IntegratorControl, RadialSystem, StageClamp};

/// Default scan range and resolution for the center value.
pub const DEFAULT_A_MIN: f64 = 1e-3;
pub const DEFAULT_A_MAX: f64 = 1e3;
pub const DEFAULT_SCAN_POINTS: usize = 64;

const MAX_ITERATIONS: usize = 200;

/// One integration from the center and its signed boundary miss.
#[derive(Debug, Clone, PartialEq)]
pub struct ShotResult {
    pub a: f64,
    pub miss: f64,
    pub profile: RadialProfile,
}

impl ShotResult {
    fn from_profile(a: f64, profile: RadialProfile) -> Self {
        let radius = profile.params().radius();
        let miss = miss_of(&profile, radius);
        ShotResult { a, miss, profile }
    }
}

fn miss_of(profile: &RadialProfile, radius: f64) -> f64 {
    match profile.terminated() {
        Termination::ReachedR => *profile.u().last().expect("nonempty"),
        Termination::HitZero { r_cross, .. } => r_cross - radius,
        Termination::Diverged { .. } => f64::INFINITY,
    }
}

fn termination_label(t: Termination) -> &'static str {
    match t {
        Termination::ReachedR => "reached_r",
        Termination::HitZero { reduced_accuracy: false, .. } => "hit_zero",
        Termination::HitZero { reduced_accuracy: true, .. } => "hit_zero_reduced",
        Termination::Diverged { .. } => "diverged",
    }
}

/// Scan diagnostics as CSV `a,miss,terminated`.
pub fn shots_to_csv(shots: &[ShotResult]) -> String {
    let mut out = String::from("a,miss,terminated\n");
    for s in shots {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(s.a),
            fmt_f64(s.miss),
            termination_label(s.profile.terminated())
        );
    }
    out
}

pub fn shoot(a: f64, params: &ProblemParams) -> Result<ShotResult> {
    shoot_with(a, params, &IntegratorControl::default())
}

pub fn shoot_with(a: f64, params: &ProblemParams, ctrl: &IntegratorControl) -> Result<ShotResult> {
    let profile = integrate_profile(a, params, ctrl)?;
    Ok(ShotResult::from_profile(a, profile))
}

/// An interval of center values over which the miss changes sign.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
    pub miss_lo: f64,
    pub miss_hi: f64,
}

/// Shots at `n` log-spaced center values in `[a_min, a_max]`, evaluated in
/// parallel and returned in ascending order of `a`.
pub fn scan(params: &ProblemParams, a_min: f64, a_max: f64, n: usize) -> Result<Vec<ShotResult>> {
    if !(a_min > 0.0 && a_max > a_min) || n < 2 {
        return Err(Error::Precondition(format!(
            "scan needs 0 < a_min < a_max and n >= 2 (got {a_min}, {a_max}, {n})"
        )));
    }
    let (l0, l1) = (a_min.ln(), a_max.ln());
    (0..n)
        .into_par_iter()
        .map(|i| {
            let a = if i + 1 == n { a_max } else { (l0 + (l1 - l0) * i as f64 / (n - 1) as f64).exp() };
            let a = if i == 0 { a_min } else { a };
            shoot(a, params)
        })
        .collect()
}

/// Adjacent scan points with opposite miss signs. Pairs touching a diverged
/// shot are skipped since the miss is not continuous there.
pub fn brackets_of(shots: &[ShotResult]) -> Vec<Bracket> {
    shots
        .windows(2)
        .filter(|w| w[0].miss.is_finite() && w[1].miss.is_finite())
        .filter(|w| (w[0].miss > 0.0) != (w[1].miss > 0.0))
        .map(|w| Bracket { lo: w[0].a, hi: w[1].a, miss_lo: w[0].miss, miss_hi: w[1].miss })
        .collect()
}

/// Every bracket on a log-spaced grid of `n` center values; an empty list
/// means no solution was detected in range.
///
/// ```
/// use radial_plap::problem::ProblemParams;
/// use radial_plap::shooting::bracket_scan;
///
/// // -Δu = 6 in the unit ball of R^3: the only solution has u(0) = 1
/// let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
/// let brackets = bracket_scan(&params, 0.5, 2.0, 16).unwrap();
/// assert_eq!(brackets.len(), 1);
/// assert!(brackets[0].lo < 1.0 && brackets[0].hi > 1.0);
/// ```
pub fn bracket_scan(params: &ProblemParams, a_min: f64, a_max: f64, n: usize) -> Result<Vec<Bracket>> {
    Ok(brackets_of(&scan(params, a_min, a_max, n)?))
}

/// Searches outward from `a_guess` by factors `1 ± step·2^k` for the nearest
/// sign change of the miss. Used for warm starts along parameter paths.
pub fn bracket_near(params: &ProblemParams, a_guess: f64, step: f64, max_expansions: usize) -> Result<Option<Bracket>> {
    let center = shoot(a_guess, params)?;
    let m0 = center.miss;
    if !m0.is_finite() {
        return Ok(None);
    }
    let mut s = step;
    let mut prev_up = (a_guess, m0);
    let mut prev_down = (a_guess, m0);
    for _ in 0..max_expansions {
        let up = a_guess * (1.0 + s);
        let down = a_guess / (1.0 + s);
        let (mu, md) = rayon::join(|| shoot(up, params), || shoot(down, params));
        let (mu, md) = (mu?.miss, md?.miss);
        if md.is_finite() && (md > 0.0) != (prev_down.1 > 0.0) {
            return Ok(Some(Bracket { lo: down, hi: prev_down.0, miss_lo: md, miss_hi: prev_down.1 }));
        }
        if mu.is_finite() && (mu > 0.0) != (prev_up.1 > 0.0) {
            return Ok(Some(Bracket { lo: prev_up.0, hi: up, miss_lo: prev_up.1, miss_hi: mu }));
        }
        prev_up = (up, mu);
        prev_down = (down, md);
        s *= 2.0;
    }
    Ok(None)
}

/// Refines a bracket to a solution of the Dirichlet problem.
///
/// Bisection with an Illinois false-position update once the bracket is
/// narrow. The returned profile is the last undershooting shot, so it reaches
/// `R` with `0 <= u(R) < 1e-10 min(R, a)`.
pub fn solve_bvp(params: &ProblemParams, bracket: Bracket) -> Result<RadialProfile> {
    solve_bvp_with(params, bracket, &IntegratorControl::default())
}

pub fn solve_bvp_with(params: &ProblemParams, bracket: Bracket, ctrl: &IntegratorControl) -> Result<RadialProfile> {
    let radius = params.radius();
    let shot = |a: f64| shoot_with(a, params, ctrl);
    let mut lo = shot(bracket.lo)?;
    let mut hi = shot(bracket.hi)?;
    if !(lo.miss.is_finite() && hi.miss.is_finite()) || (lo.miss > 0.0) == (hi.miss > 0.0) {
        return Err(Error::NoBracket(format!(
            "miss({}) = {}, miss({}) = {}",
            lo.a, lo.miss, hi.a, hi.miss
        )));
    }
    // pos: undershoot (miss > 0), neg: overshoot
    let (mut pos, mut neg) = if lo.miss > 0.0 { (lo, hi) } else {
        std::mem::swap(&mut lo, &mut hi);
        (lo, hi)
    };
    let converged = |s: &ShotResult| s.miss < 1e-10 * radius.min(s.a);
    let (mut wpos, mut wneg) = (1.0, 1.0);
    let mut last_side = 0i8;

    for _ in 0..MAX_ITERATIONS {
        if converged(&pos) {
            return Ok(pos.profile);
        }
        let width = (pos.a - neg.a).abs();
        if width <= 4.0 * f64::EPSILON * pos.a.max(neg.a) {
            break;
        }
        let mid = 0.5 * (pos.a + neg.a);
        let candidate = if width > 1e-3 * pos.a.max(neg.a) {
            mid
        } else {
            let (fp, fn_) = (pos.miss * wpos, neg.miss * wneg);
            let c = pos.a - fp * (neg.a - pos.a) / (fn_ - fp);
            let (a_min, a_max) = (pos.a.min(neg.a), pos.a.max(neg.a));
            if c > a_min && c < a_max { c } else { mid }
        };
        let s = shot(candidate)?;
        if !s.miss.is_finite() {
            return Err(Error::Integration { r: 0.0, reason: format!("diverged shot at a = {candidate}") });
        }
        if s.miss > 0.0 {
            pos = s;
            wpos = 1.0;
            if last_side == 1 {
                wneg *= 0.5;
            }
            last_side = 1;
        } else {
            neg = s;
            wneg = 1.0;
            if last_side == -1 {
                wpos *= 0.5;
            }
            last_side = -1;
        }
    }
    if converged(&pos) {
        return Ok(pos.profile);
    }
    Err(Error::NoConvergence { iterations: MAX_ITERATIONS, best_a: pos.a, best_miss: pos.miss })
}

/// Every solution found in `[a_min, a_max]`, in ascending order of `u(0)`.
pub fn solve_all(params: &ProblemParams, a_min: f64, a_max: f64, n: usize) -> Result<Vec<RadialProfile>> {
    let brackets = bracket_scan(params, a_min, a_max, n)?;
    brackets.into_par_iter().map(|b| solve_bvp(params, b)).collect()
}

/// First Dirichlet eigenvalue of `-Δ_p` on `B_R` and its eigenfunction,
/// normalized by `φ1(0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub lambda1: f64,
    pub phi1: RadialProfile,
}

impl EigenPair {
    /// CSV with header `lambda1,r,phi,dphi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("lambda1,r,phi,dphi\n");
        let l = fmt_f64(self.lambda1);
        let p = &self.phi1;
        for i in 0..p.len() {
            let _ = writeln!(out, "{l},{},{},{}", fmt_f64(p.r()[i]), fmt_f64(p.u()[i]), fmt_f64(p.du()[i]));
        }
        out
    }
}

fn eigen_shot(lambda: f64, params: &ProblemParams, ctrl: &IntegratorControl) -> Result<(f64, RadialProfile)> {
    let p = params.p();
    let forcing = move |u: f64| lambda * phi_p(u, p);
    let sys = RadialSystem {
        dim: params.dim(),
        p,
        forcing: &forcing,
        clamp: StageClamp::None,
        singular: false,
    };
    let prof = integrate_system(1.0, &sys, params, ctrl)?;
    Ok((miss_of(&prof, params.radius()), prof))
}

/// Shoots on `-(r^(N-1) φ_p(φ'))' = Λ r^(N-1) φ_p(φ)`, `φ(0) = 1`, and bisects
/// on `Λ` for the first zero to land on `R`; the first zero moves inward as
/// `Λ` grows.
///
/// ```
/// use radial_plap::shooting::first_eigenpair;
///
/// // in R^3, φ1 = sin(πr)/(πr) and λ1 = π^2 on the unit ball
/// let eig = first_eigenpair(2.0, 3, 1.0).unwrap();
/// let pi2 = std::f64::consts::PI.powi(2);
/// assert!((eig.lambda1 - pi2).abs() < 1e-6 * pi2);
/// ```
pub fn first_eigenpair(p: f64, dim: usize, radius: f64) -> Result<EigenPair> {
    first_eigenpair_with(p, dim, radius, &IntegratorControl::default())
}

pub fn first_eigenpair_with(p: f64, dim: usize, radius: f64, ctrl: &IntegratorControl) -> Result<EigenPair> {
    if !(p > 1.0) || !(radius > 0.0) || dim < 1 {
        return Err(Error::Precondition(format!("need p > 1, R > 0, N >= 1 (got {p}, {radius}, {dim})")));
    }
    let params = ProblemParams::geometry(dim, p, radius)?;
    let miss = |l: f64| eigen_shot(l, &params, ctrl);

    let (mut lo, mut hi) = (1e-3, 1e3);
    let mut m_lo = miss(lo)?.0;
    let mut m_hi = miss(hi)?.0;
    for _ in 0..60 {
        if m_lo > 0.0 {
            break;
        }
        hi = lo;
        m_hi = m_lo;
        lo *= 1e-3;
        m_lo = miss(lo)?.0;
    }
    for _ in 0..60 {
        if m_hi <= 0.0 {
            break;
        }
        lo = hi;
        m_lo = m_hi;
        hi *= 1e3;
        m_hi = miss(hi)?.0;
    }
    if !(m_lo > 0.0 && m_hi <= 0.0) {
        return Err(Error::NoBracket(format!("eigenvalue not bracketed in [{lo}, {hi}]")));
    }

    let mut best = miss(lo)?;
    for _ in 0..MAX_ITERATIONS {
        if hi - lo <= 1e-14 * hi {
            break;
        }
        let mid = (lo * hi).sqrt();
        let (m, prof) = miss(mid)?;
        if m > 0.0 {
            lo = mid;
            best = (m, prof);
        } else {
            hi = mid;
        }
    }
    Ok(EigenPair { lambda1: 0.5 * (lo + hi), phi1: best.1 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn constant(c: f64, n: usize, p: f64) -> ProblemParams {
        ProblemParams::constant_forcing(c, n, p, 1.0).unwrap()
    }

    #[test]
    fn zero_forcing_never_reaches_zero() {
        let params = constant(0.0, 3, 2.0);
        for &a in &[0.01, 1.0, 50.0] {
            assert_eq!(shoot(a, &params).unwrap().miss, a);
        }
        assert!(bracket_scan(&params, 1e-3, 1e3, 16).unwrap().is_empty());
    }

    #[test]
    fn miss_examples() {
        let params = constant(6.0, 3, 2.0);
        assert!(shoot(1.0, &params).unwrap().miss.abs() < 1e-12);
        let m = shoot(2.0, &params).unwrap().miss;
        assert!((m - 1.0).abs() < 1e-12);
        let m = shoot(0.5, &params).unwrap().miss;
        // 0.5 - r^2 vanishes at r = 1/sqrt(2)
        assert!((m - (0.5f64.sqrt() - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn undershoot_miss_matches_oracle_identity() {
        for &(n, p) in &[(3usize, 2.0), (2, 3.0), (5, 1.5)] {
            let params = constant(6.0, n, p);
            let a_star = crate::radial::constant_rhs_exact(6.0, n, p, 1.0, 0.0).0;
            let m = shoot(a_star + 0.25, &params).unwrap().miss;
            assert!((m - 0.25).abs() < 1e-9, "n {n} p {p}: {m}");
        }
    }

    #[test]
    fn solve_constant_forcing() {
        let params = constant(6.0, 3, 2.0);
        let br = bracket_scan(&params, 0.5, 2.0, 16).unwrap();
        assert_eq!(br.len(), 1);
        let prof = solve_bvp(&params, br[0]).unwrap();
        assert_eq!(prof.terminated(), Termination::ReachedR);
        assert!((prof.center_value() - 1.0).abs() < 1e-9);
        assert!(prof.u().last().unwrap().abs() < 1e-10);

        let params = constant(2.0, 2, 3.0);
        let br = bracket_scan(&params, 0.1, 2.0, 16).unwrap();
        let prof = solve_bvp(&params, br[0]).unwrap();
        assert!((prof.center_value() - 2.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn solve_rejects_non_bracket() {
        let params = constant(6.0, 3, 2.0);
        let b = Bracket { lo: 1.5, hi: 2.0, miss_lo: 0.5, miss_hi: 1.0 };
        assert!(matches!(solve_bvp(&params, b), Err(Error::NoBracket(_))));
    }

    #[test]
    fn eigenvalues_in_closed_form() {
        let e1 = first_eigenpair(2.0, 1, 1.0).unwrap();
        assert!((e1.lambda1 / (PI * PI / 4.0) - 1.0).abs() < 1e-6);
        let e3 = first_eigenpair(2.0, 3, 1.0).unwrap();
        assert!((e3.lambda1 / (PI * PI) - 1.0).abs() < 1e-6);
        for (&r, &u) in e3.phi1.r().iter().zip(e3.phi1.u()).skip(1) {
            let exact = (PI * r).sin() / (PI * r);
            assert!((u - exact).abs() < 1e-7, "r {r}");
        }
        assert_eq!(e3.phi1.center_value(), 1.0);
        assert!(e3.phi1.u().last().unwrap().abs() < 1e-9);
        assert!(e3.phi1.du()[1..].iter().all(|&d| d < 0.0));
    }

    #[test]
    fn eigenvalue_radius_scaling() {
        for &p in &[1.5, 2.0, 3.0] {
            let l1 = first_eigenpair(p, 3, 1.0).unwrap().lambda1;
            let l2 = first_eigenpair(p, 3, 2.0).unwrap().lambda1;
            assert!((l2 * 2f64.powf(p) / l1 - 1.0).abs() < 1e-8, "p {p}");
        }
    }

    #[test]
    fn shot_csv_layout() {
        let params = constant(6.0, 3, 2.0);
        let shots = scan(&params, 0.5, 2.0, 3).unwrap();
        let csv = shots_to_csv(&shots);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "a,miss,terminated");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].ends_with(",hit_zero"));
        assert!(lines[3].ends_with(",reached_r"));
    }
}
