use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use super::residual::{weak_residual_for_p, DEFAULT_TEST_COUNT};
use crate::error::{Error, Result};
use crate::problem::{eval_f, ProblemParams};
use crate::profile::{fmt_f64, RadialProfile, Termination};
use crate::radial::{integrate_profile, IntegratorControl};

/// A profile normalized by its sup norm `H` and stretched by `M` with
/// `M^p = H^(p-1-q)`: `v(x) = u(M x) / H`.
#[derive(Debug, Clone, PartialEq)]
pub struct RescaledProfile {
    pub h: f64,
    pub m: f64,
    pub v: RadialProfile,
}

/// Rescales a profile so that `-Δ_p u = λ u^q` becomes `-Δ_p v = λ v^q`.
///
/// ```
/// use radial_plap::problem::ProblemParams;
/// use radial_plap::profile::RadialProfile;
/// use radial_plap::verify::rescale;
///
/// let params = ProblemParams::builder().p(2.0).q(3.0).lambda(1.0).build().unwrap();
/// let u = RadialProfile::from_fn(&params, 64, |r| 16.0 * (1.0 - r * r), |r| -32.0 * r).unwrap();
/// let s = rescale(&u).unwrap();
/// assert_eq!(s.m, 1.0 / 16.0);
/// assert_eq!(s.v.center_value(), 1.0);
/// ```
pub fn rescale(profile: &RadialProfile) -> Result<RescaledProfile> {
    let params = profile.params();
    let (p, q) = (params.p(), params.q());
    let h = profile.center_value();
    if !(h > 0.0) {
        return Err(Error::Precondition("sup norm must be positive".into()));
    }
    let m = h.powf((p - 1.0 - q) / p);
    let x: Vec<f64> = profile.r().iter().map(|r| r / m).collect();
    let v: Vec<f64> = profile.u().iter().map(|u| u / h).collect();
    let dv: Vec<f64> = profile.du().iter().map(|d| d * m / h).collect();
    let limit = ProblemParams::builder()
        .dim(params.dim())
        .p(p)
        .q(q)
        .delta(params.delta())
        .lambda(params.lambda())
        .radius(params.radius() / m)
        .singular_term(false)
        .build_unchecked()?;
    let terminated = match profile.terminated() {
        Termination::ReachedR => Termination::ReachedR,
        Termination::HitZero { r_cross, reduced_accuracy } => {
            Termination::HitZero { r_cross: r_cross / m, reduced_accuracy }
        }
        Termination::Diverged { r } => Termination::Diverged { r: r / m },
    };
    let v = RadialProfile::new(x, v, dv, limit, terminated)?;
    Ok(RescaledProfile { h, m, v })
}

/// One shot from `u(0) = a`. When the profile hits zero before `R` it is
/// integrated again on `[0, 1.015625 r_cross]` so the whole support carries
/// the full uniform grid.
pub fn blowup_shot(a: f64, params: &ProblemParams) -> Result<RadialProfile> {
    let ctrl = IntegratorControl::default();
    let first = integrate_profile(a, params, &ctrl)?;
    match first.terminated() {
        Termination::HitZero { r_cross, .. } if r_cross < params.radius() => {
            let r_end = (r_cross * (1.0 + 1.0 / 64.0)).min(params.radius());
            integrate_profile(a, params, &ctrl.with_r_end(r_end))
        }
        _ => Ok(first),
    }
}

/// [`blowup_shot`] at each center value, in parallel.
pub fn blowup_family(params: &ProblemParams, heights: &[f64]) -> Result<Vec<RadialProfile>> {
    heights.par_iter().map(|&h| blowup_shot(h, params)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RescaleEntry {
    pub h: f64,
    pub m: f64,
    pub v_center: f64,
    pub v_max: f64,
    /// Weak residual against `-Δ_p v = λ v^q` on the shared window.
    pub residual: f64,
    /// Weak residual against `-Δ v = v^q`.
    pub residual_laplace: f64,
    /// `H^(-q) (H v(0) + ε)^(-δ)`
    pub singular_center: f64,
    /// `H^(-q) f(H v(0))`
    pub f_center: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub entries: Vec<RescaleEntry>,
    pub rescaled: Vec<RescaledProfile>,
    /// Common window `[0, x_max]` on which residuals are taken.
    pub x_max: f64,
    pub residuals_decreasing: bool,
}

impl BlowupReport {
    /// CSV with header `H,M,x,v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("H,M,x,v\n");
        for s in &self.rescaled {
            let (h, m) = (fmt_f64(s.h), fmt_f64(s.m));
            for (x, v) in s.v.r().iter().zip(s.v.u()) {
                let _ = writeln!(out, "{h},{m},{},{}", fmt_f64(*x), fmt_f64(*v));
            }
        }
        out
    }
}

/// Rescales a family with increasing sup norms and measures how close each
/// member is to the limit equation `-Δ_p v = λ v^q`.
pub fn blowup_rescale(profiles: &[RadialProfile], params: &ProblemParams) -> Result<BlowupReport> {
    if profiles.len() < 2 {
        return Err(Error::Precondition("blow-up rescaling needs at least two profiles".into()));
    }
    if profiles.windows(2).any(|w| !(w[1].sup_norm() > w[0].sup_norm())) {
        return Err(Error::Precondition("sup norms must increase along the family".into()));
    }
    let rescaled: Vec<RescaledProfile> = profiles.iter().map(rescale).collect::<Result<_>>()?;
    let x_max = rescaled.iter().map(|s| s.v.last_radius()).fold(f64::INFINITY, f64::min);
    let (lambda, q, delta, eps) = (params.lambda(), params.q(), params.delta(), params.eps());
    let entries: Vec<RescaleEntry> = rescaled
        .iter()
        .map(|s| {
            let v = &s.v;
            let p = v.params().p();
            let limit = |t: f64| lambda * t.max(0.0).powf(q);
            let literal = |t: f64| t.max(0.0).powf(q);
            let hq = s.h.powf(-q);
            RescaleEntry {
                h: s.h,
                m: s.m,
                v_center: v.center_value(),
                v_max: v.u().iter().copied().fold(f64::NEG_INFINITY, f64::max),
                residual: weak_residual_for_p(v, p, limit, DEFAULT_TEST_COUNT, x_max),
                residual_laplace: weak_residual_for_p(v, 2.0, literal, DEFAULT_TEST_COUNT, x_max),
                singular_center: hq * (s.h * v.center_value() + eps).powf(-delta),
                f_center: hq * eval_f(s.h * v.center_value(), params.f()).unwrap_or(f64::NAN),
            }
        })
        .collect();
    let residuals_decreasing = entries.windows(2).all(|w| w[1].residual <= w[0].residual);
    Ok(BlowupReport { entries, rescaled, x_max, residuals_decreasing })
}
