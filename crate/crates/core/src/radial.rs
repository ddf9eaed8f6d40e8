//! Radial form of the p-Laplacian and its integration from the center.
//!
//! For radial `u`, `Δ_p u = r^(1-N) (r^(N-1) φ_p(u'))'` with
//! `φ_p(s) = |s|^(p-2) s`. Writing the momentum `w = -r^(N-1) φ_p(u')` turns
//! `-Δ_p u = g(u)` into the first-order system
//!
//! ```text
//! u' = -φ_p^{-1}(w / r^(N-1)),    w' = r^(N-1) g(u),    w(0) = 0,
//! ```
//!
//! which never divides by `φ_p'(u')`, so it stays well posed at `u' = 0` for
//! degenerate (`p > 2`) and singular (`p < 2`) operators alike. The coordinate
//! singularity at `r = 0` is stepped over with a two-term series.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ode::{self, State};
use crate::problem::{g_unchecked, ProblemParams};
use crate::profile::{grid_point, RadialProfile, Termination};
use crate::quadrature::GaussLegendre;

/// `φ_p(s) = |s|^(p-2) s`, with `φ_p(0) = 0`.
#[inline]
pub fn phi_p(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf(p - 2.0) * s
    }
}

/// Inverse of [`phi_p`]: `|s|^((2-p)/(p-1)) s`.
#[inline]
pub fn phi_p_inv(s: f64, p: f64) -> f64 {
    if s == 0.0 {
        0.0
    } else {
        s.abs().powf((2.0 - p) / (p - 1.0)) * s
    }
}

/// Values of the two-term expansion at the start radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesStart {
    pub u: f64,
    pub du: f64,
    /// `w(r0) = G r0^N / N`.
    pub w: f64,
}

/// Expansion of the solution with `u(0) = a` near the center for a forcing
/// whose value at the center is `g_center`:
/// `u ≈ a - (p-1)/p (G/N)^(1/(p-1)) r^(p/(p-1))`, `u' ≈ -(G r / N)^(1/(p-1))`.
pub fn series_start_with(a: f64, g_center: f64, dim: usize, p: f64, r0: f64) -> Result<SeriesStart> {
    if !g_center.is_finite() || g_center < 0.0 {
        return Err(Error::Domain(format!("forcing at the center must be finite and >= 0, got {g_center}")));
    }
    let n = dim as f64;
    let e = 1.0 / (p - 1.0);
    let du = -(g_center * r0 / n).powf(e);
    let u = a - (g_center / n).powf(e) * (p - 1.0) / p * r0.powf(p / (p - 1.0));
    Ok(SeriesStart { u, du, w: g_center * r0.powi(dim as i32) / n })
}

/// [`series_start_with`] using `G = g(a)` from the problem.
pub fn series_start(a: f64, params: &ProblemParams, r0: f64) -> Result<SeriesStart> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("center value must be positive, got {a}")));
    }
    series_start_with(a, g_unchecked(a, params), params.dim(), params.p(), r0)
}

/// Tolerances and output layout for [`integrate_profile`].
#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct IntegratorControl {
    pub rtol: f64,
    pub atol: f64,
    /// Points of the uniform output grid on `[0, r_end]`.
    pub grid_points: usize,
    /// End radius; `R` when absent.
    pub r_end: Option<f64>,
    /// Series start radius as a fraction of `R`.
    pub start_fraction: f64,
    /// Largest relative decrease of `u` per step in singular mode.
    pub singular_drop: f64,
    /// In singular mode, `u` below `singular_floor * a` ends the integration
    /// with an extrapolated crossing.
    pub singular_floor: f64,
    pub u_ceiling: f64,
    pub max_steps: usize,
}

impl Default for IntegratorControl {
    fn default() -> Self {
        IntegratorControl {
            rtol: 1e-8,
            atol: 1e-10,
            grid_points: 2048,
            r_end: None,
            start_fraction: 1e-6,
            singular_drop: 0.05,
            singular_floor: 1e-14,
            u_ceiling: 1e12,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorControl {
    pub fn with_r_end(mut self, r_end: f64) -> Self {
        self.r_end = Some(r_end);
        self
    }
}

/// How the forcing is evaluated when a Runge–Kutta stage visits `u <= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum StageClamp {
    /// Evaluate as is (sign-aware forcings such as `Λ φ_p(u)`).
    None,
    /// Use `max(u, 0)`.
    NonNegative,
    /// Use `max(u, floor)`: the forcing is singular at zero.
    Positive(f64),
}

/// The radial system `-Δ_p u = forcing(u)`.
pub(crate) struct RadialSystem<'a> {
    pub dim: usize,
    pub p: f64,
    pub forcing: &'a (dyn Fn(f64) -> f64 + Sync),
    pub clamp: StageClamp,
    /// Enables the step clamp near `u = 0`.
    pub singular: bool,
}

impl RadialSystem<'_> {
    fn rhs(&self, r: f64, y: &State) -> State {
        let rn = r.powi(self.dim as i32 - 1);
        let u = match self.clamp {
            StageClamp::None => y[0],
            StageClamp::NonNegative => y[0].max(0.0),
            StageClamp::Positive(floor) => y[0].max(floor),
        };
        [-phi_p_inv(y[1] / rn, self.p), rn * (self.forcing)(u)]
    }

    fn du_from_w(&self, r: f64, w: f64) -> f64 {
        -phi_p_inv(w / r.powi(self.dim as i32 - 1), self.p)
    }
}

/// Integrates `-Δ_p u = g(u)` from `u(0) = a`, `u'(0) = 0`.
///
/// Output contains the center, every accepted internal step and every point
/// of the uniform grid, ending at `r_end` or at the first zero of `u`.
///
/// ```
/// use radial_plap::problem::ProblemParams;
/// use radial_plap::radial::{integrate_profile, IntegratorControl};
///
/// // -Δu = 6 in the unit ball of R^3 has the solution 1 - r^2
/// let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
/// let prof = integrate_profile(1.0, &params, &IntegratorControl::default()).unwrap();
/// let (u, du) = prof.interpolant().eval(0.5);
/// assert!((u - 0.75).abs() < 1e-10 && (du + 1.0).abs() < 1e-8);
/// ```
pub fn integrate_profile(a: f64, params: &ProblemParams, ctrl: &IntegratorControl) -> Result<RadialProfile> {
    if !(a > 0.0) {
        return Err(Error::Domain(format!("center value must be positive, got {a}")));
    }
    let forcing = |u: f64| g_unchecked(u, params);
    let singular = params.is_singular();
    let floor = ctrl.singular_floor * a;
    let system = RadialSystem {
        dim: params.dim(),
        p: params.p(),
        forcing: &forcing,
        clamp: if singular { StageClamp::Positive(floor) } else { StageClamp::NonNegative },
        singular,
    };
    integrate_system(a, &system, params, ctrl)
}

pub(crate) fn integrate_system(
    a: f64,
    sys: &RadialSystem<'_>,
    params: &ProblemParams,
    ctrl: &IntegratorControl,
) -> Result<RadialProfile> {
    let radius = params.radius();
    let r_end = ctrl.r_end.unwrap_or(radius);
    let n_grid = ctrl.grid_points.max(2);
    let r0 = ctrl.start_fraction * radius;
    if !(r0 > 0.0 && r0 < grid_point(r_end, 1, n_grid)) {
        return Err(Error::InvalidParameter(format!(
            "start radius {r0} must lie inside the first grid cell"
        )));
    }

    let mut rs = vec![0.0];
    let mut us = vec![a];
    let mut dus = vec![0.0];
    let finish = |rs: Vec<f64>, us: Vec<f64>, dus: Vec<f64>, t: Termination| {
        RadialProfile::new(rs, us, dus, params.clone(), t)
    };

    if a > ctrl.u_ceiling {
        rs.push(r0);
        us.push(a);
        dus.push(0.0);
        return finish(rs, us, dus, Termination::Diverged { r: 0.0 });
    }

    let g0 = (sys.forcing)(a);
    let start = series_start_with(a, g0, sys.dim, sys.p, r0)?;
    let mut r = r0;
    let mut y: State = [start.u, start.w];
    rs.push(r);
    us.push(y[0]);
    dus.push(start.du);

    let f = |x: f64, s: &State| sys.rhs(x, s);
    let mut k = f(r, &y);
    let mut h = r0.max(1e-3 * (r_end / n_grid as f64));
    // w ~ r^N near the center, so it is controlled in relative terms only
    let atol: State = [ctrl.atol, 0.0];
    let floor = ctrl.singular_floor * a;
    let h_min = 1e-15 * r_end;
    let mut steps = 0usize;

    for gi in 1..n_grid {
        let target = grid_point(r_end, gi, n_grid);
        while r < target {
            steps += 1;
            if steps > ctrl.max_steps {
                return Err(Error::Integration { r, reason: "step budget exhausted".into() });
            }

            if sys.singular && y[0] < floor {
                // u is numerically zero; extrapolate the crossing linearly
                let slope = k[0];
                let dist = if slope < 0.0 { y[0] / -slope } else { 0.0 };
                let du = sys.du_from_w(r, y[1]);
                if r + dist >= r_end {
                    for gj in gi..n_grid {
                        let x = grid_point(r_end, gj, n_grid);
                        rs.push(x);
                        us.push((y[0] + slope * (x - r)).max(0.0));
                        dus.push(du);
                    }
                    return finish(rs, us, dus, Termination::ReachedR);
                }
                let rc = r + dist;
                if rc > r {
                    rs.push(rc);
                    us.push(0.0);
                    dus.push(du);
                }
                return finish(rs, us, dus, Termination::HitZero { r_cross: rc, reduced_accuracy: true });
            }

            let mut h_try = h.min(target - r);
            if sys.singular && k[0] < 0.0 {
                h_try = h_try.min(ctrl.singular_drop * y[0] / -k[0]);
            }
            let clipped = h_try < h;
            let st = ode::step(&f, r, &y, &k, h_try, &atol, ctrl.rtol);
            if st.err > 1.0 {
                h = h_try * ode::step_factor(st.err);
                if h < h_min {
                    if sys.singular {
                        // give the floor test a chance on the next pass
                        y[0] = y[0].min(floor * 0.5);
                        continue;
                    }
                    return Err(Error::Integration { r, reason: "step size underflow".into() });
                }
                continue;
            }

            if st.y[0] <= 0.0 {
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if st.interpolate(mid)[0] > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                    if hi - lo < 1e-16 {
                        break;
                    }
                }
                let rc = r + hi * h_try;
                let wc = st.interpolate(hi)[1];
                if rc > r {
                    rs.push(rc);
                    us.push(0.0);
                    dus.push(sys.du_from_w(rc, wc));
                } else {
                    let last = us.len() - 1;
                    us[last] = 0.0;
                }
                return finish(rs, us, dus, Termination::HitZero { r_cross: rc, reduced_accuracy: false });
            }

            let r_new = if h_try == target - r { target } else { r + h_try };
            if !st.y.iter().all(|v| v.is_finite()) || st.y[0] > ctrl.u_ceiling {
                return finish(rs, us, dus, Termination::Diverged { r: r_new });
            }

            r = r_new;
            y = st.y;
            k = st.dy;
            let grow = ode::step_factor(st.err);
            h = if clipped && grow >= 1.0 { h } else { h_try * grow };
            if r < target {
                rs.push(r);
                us.push(y[0]);
                dus.push(k[0]);
            }
        }
        rs.push(target);
        us.push(y[0]);
        dus.push(sys.du_from_w(target, y[1]));
    }
    finish(rs, us, dus, Termination::ReachedR)
}

/// `u` and `u'` of the exact solution of `-Δ_p u = c` in `B_R` with `u(R) = 0`.
pub fn constant_rhs_exact(c: f64, dim: usize, p: f64, radius: f64, r: f64) -> (f64, f64) {
    let n = dim as f64;
    let e = p / (p - 1.0);
    let amp = (c / n).powf(1.0 / (p - 1.0)) * (p - 1.0) / p;
    (amp * (radius.powf(e) - r.powf(e)), -(c * r / n).powf(1.0 / (p - 1.0)))
}

/// Closed-form solution of `-Δ_p u = c`, `u(R) = 0`, sampled on the default
/// uniform grid.
pub fn constant_rhs_oracle(c: f64, params: &ProblemParams) -> Result<RadialProfile> {
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("constant forcing must be nonnegative, got {c}")));
    }
    let (n, p, radius) = (params.dim(), params.p(), params.radius());
    RadialProfile::from_fn(
        params,
        IntegratorControl::default().grid_points,
        |r| constant_rhs_exact(c, n, p, radius, r).0,
        |r| constant_rhs_exact(c, n, p, radius, r).1,
    )
}

/// `max_i |w(r_i) - int_0^{r_i} s^(N-1) g(u(s)) ds| / (1 + |w(r_end)|)`, with
/// `w = -r^(N-1) φ_p(u')` read off the profile and the integral evaluated by
/// composite Gauss quadrature on the Hermite interpolant.
pub fn momentum_defect(profile: &RadialProfile, forcing: impl Fn(f64) -> f64) -> f64 {
    let dim = profile.params().dim() as i32;
    let p = profile.params().p();
    let rule = GaussLegendre::new(6);
    let interp = profile.interpolant();
    let r = profile.r();
    let w = |i: usize| -r[i].powi(dim - 1) * phi_p(profile.du()[i], p);
    let w_end = w(r.len() - 1);
    let mut acc = 0.0;
    let mut worst: f64 = 0.0;
    for i in 0..r.len() - 1 {
        acc += rule.integrate(r[i], r[i + 1], |s| {
            let u = interp.eval_in(i, s).0;
            s.powi(dim - 1) * forcing(u.max(0.0))
        });
        worst = worst.max((w(i + 1) - acc).abs());
    }
    worst / (1.0 + w_end.abs())
}

/// Same as [`momentum_defect`] for the problem's own `g`.
pub fn momentum_defect_g(profile: &RadialProfile) -> f64 {
    let params = profile.params().clone();
    momentum_defect(profile, |u| g_unchecked(u, &params))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn phi_examples() {
        assert_eq!(phi_p(2.0, 2.0), 2.0);
        assert_eq!(phi_p(-3.0, 3.0), -9.0);
        assert_eq!(phi_p_inv(4.0, 3.0), 2.0);
        assert_eq!(phi_p(0.0, 1.5), 0.0);
        assert_eq!(phi_p_inv(0.0, 4.0), 0.0);
    }

    #[test]
    fn series_start_examples() {
        let r0: f64 = 1e-6;
        let s = series_start_with(1.0, 6.0, 3, 2.0, r0).unwrap();
        assert!((s.du + 2.0 * r0).abs() < 1e-20);
        assert!((s.u - (1.0 - r0 * r0)).abs() < 1e-16);

        let s = series_start_with(1.0, 0.0, 3, 2.0, r0).unwrap();
        assert_eq!((s.u, s.du, s.w), (1.0, 0.0, 0.0));

        let s = series_start_with(1.0, 2.0, 2, 3.0, r0).unwrap();
        assert!((s.du + r0.sqrt()).abs() < 1e-18);

        assert!(series_start_with(1.0, -1.0, 2, 3.0, r0).is_err());
    }

    #[test]
    fn zero_forcing_gives_flat_profile() {
        let params = ProblemParams::constant_forcing(0.0, 3, 2.0, 1.0).unwrap();
        let prof = integrate_profile(0.7, &params, &IntegratorControl::default()).unwrap();
        assert_eq!(prof.terminated(), Termination::ReachedR);
        assert!(prof.u().iter().all(|&u| u == 0.7));
        assert!(prof.du().iter().all(|&d| d == 0.0));
    }

    #[test]
    fn constant_forcing_hits_zero_at_one() {
        let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
        let ctrl = IntegratorControl::default().with_r_end(1.5);
        let prof = integrate_profile(1.0, &params, &ctrl).unwrap();
        match prof.terminated() {
            Termination::HitZero { r_cross, reduced_accuracy } => {
                assert!((r_cross - 1.0).abs() < 1e-9);
                assert!(!reduced_accuracy);
            }
            t => panic!("unexpected {t:?}"),
        }
    }

    #[test]
    fn constant_forcing_p3_n2() {
        let params = ProblemParams::constant_forcing(2.0, 2, 3.0, 1.0).unwrap();
        let ctrl = IntegratorControl::default().with_r_end(1.5);
        let prof = integrate_profile(2.0 / 3.0, &params, &ctrl).unwrap();
        match prof.terminated() {
            Termination::HitZero { r_cross, .. } => assert!((r_cross - 1.0).abs() < 1e-8),
            t => panic!("unexpected {t:?}"),
        }
        for (&r, &u) in prof.r().iter().zip(prof.u()) {
            assert!((u - 2.0 / 3.0 * (1.0 - r.powf(1.5))).abs() < 1e-9);
        }
    }

    #[test]
    fn oracle_examples() {
        let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
        let o = constant_rhs_oracle(6.0, &params).unwrap();
        assert_eq!(o.center_value(), 1.0);
        for (&r, &u) in o.r().iter().zip(o.u()) {
            assert!((u - (1.0 - r * r)).abs() < 1e-15);
        }
        let params = ProblemParams::constant_forcing(2.0, 2, 3.0, 1.0).unwrap();
        let o = constant_rhs_oracle(2.0, &params).unwrap();
        assert!((o.center_value() - 2.0 / 3.0).abs() < 1e-15);
        let o = constant_rhs_oracle(0.0, &params).unwrap();
        assert!(o.u().iter().all(|&u| u == 0.0));
    }

    #[test]
    fn momentum_identity_holds_for_regularized_problem() {
        let params = ProblemParams::builder()
            .dim(3)
            .p(2.0)
            .q(3.0)
            .delta(0.5)
            .lambda(0.05)
            .eps(1e-2)
            .build()
            .unwrap();
        let prof = integrate_profile(0.1, &params, &IntegratorControl::default()).unwrap();
        assert!(momentum_defect_g(&prof) < 1e-8, "{}", momentum_defect_g(&prof));
    }

    #[test]
    fn singular_mode_reaches_zero_with_strict_decrease() {
        let params = ProblemParams::builder()
            .dim(3)
            .p(2.0)
            .q(3.0)
            .delta(0.5)
            .lambda(0.05)
            .build()
            .unwrap();
        let ctrl = IntegratorControl::default().with_r_end(3.0);
        let prof = integrate_profile(0.05, &params, &ctrl).unwrap();
        assert!(matches!(prof.terminated(), Termination::HitZero { .. }));
        assert!(prof.du()[1..].iter().all(|&d| d < 0.0));
    }
}
