use serde::Serialize;

use crate::error::{Error, Result};
use crate::profile::{common_radii, RadialProfile, Termination};
use crate::quadrature::{composite, GaussLegendre};

/// Allowed ordering violation relative to the sup norm.
pub const ORDERING_TOL: f64 = 1e-9;

fn require_boundary(profile: &RadialProfile) -> Result<f64> {
    let radius = profile.params().radius();
    let u_end = *profile.u().last().expect("nonempty");
    if profile.terminated() != Termination::ReachedR || profile.last_radius() != radius {
        return Err(Error::Precondition("profile does not reach the boundary".into()));
    }
    if u_end.abs() > 1e-8 * profile.sup_norm().max(f64::MIN_POSITIVE) {
        return Err(Error::Precondition(format!("profile does not vanish at R (u(R) = {u_end})")));
    }
    Ok(radius)
}

/// `min u(r) / (R - r)` over the grid, with `-u'(R)` standing in at `r = R`.
///
/// ```
/// use radial_plap::problem::ProblemParams;
/// use radial_plap::radial::constant_rhs_oracle;
/// use radial_plap::verify::check_cone_bound;
///
/// // 1 - r^2 = (1 - r)(1 + r), smallest ratio at the center
/// let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
/// let c = check_cone_bound(&constant_rhs_oracle(6.0, &params).unwrap()).unwrap();
/// assert!((c - 1.0).abs() < 1e-12);
/// ```
pub fn check_cone_bound(profile: &RadialProfile) -> Result<f64> {
    let radius = require_boundary(profile)?;
    let n = profile.len();
    let mut c = -profile.du()[n - 1];
    for i in 0..n - 1 {
        let gap = radius - profile.r()[i];
        if gap > 0.0 {
            c = c.min(profile.u()[i] / gap);
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HardyReport {
    /// `∫ φ u^(-δ) r^(N-1) dr`
    pub value: f64,
    pub cone_constant: f64,
    /// `sup|φ| C^(-δ) ∫ (R - r)^(-δ) r^(N-1) dr`
    pub bound: f64,
    pub certified: bool,
}

/// `B(1 - δ, N) = (N-1)! / prod_{k<N} (k + 1 - δ)`.
fn beta_one_minus_delta(delta: f64, dim: usize) -> f64 {
    (0..dim).fold(1.0, |acc, k| acc * k.max(1) as f64 / (k as f64 + 1.0 - delta))
}

/// `∫_0^R φ(r) u(r)^(-δ) r^(N-1) dr` with `δ` from the profile's parameters.
///
/// The last eighth of the ball is integrated in the variable
/// `t = (R - r)^(1-δ)`, which turns the `(R - r)^(-δ)` endpoint behaviour into
/// a smooth integrand. Finiteness is certified through the cone bound
/// `u >= C (R - r)`, giving the comparison value in [`HardyReport::bound`].
pub fn hardy_integrability(profile: &RadialProfile, phi: impl Fn(f64) -> f64) -> Result<HardyReport> {
    let cone = check_cone_bound(profile)?;
    if !(cone > 0.0) {
        return Err(Error::NotCertified(cone));
    }
    let params = profile.params();
    let (delta, dim, radius) = (params.delta(), params.dim(), params.radius());
    let wgt = |r: f64| r.powi(dim as i32 - 1);
    let interp = profile.interpolant();
    let split = radius * 7.0 / 8.0;

    let rule = GaussLegendre::new(8);
    let inner = composite(&rule, profile.r(), 0.0, split, &[], |i, r| {
        let u = interp.eval_in(i, r).0;
        phi(r) * u.powf(-delta) * wgt(r)
    });

    // r = R - t^(1/(1-δ)), dr = t^(δ/(1-δ)) dt / (1-δ); the powers of t cancel
    // against (R - r)^(-δ) once u is written as (u / (R - r)) (R - r).
    let e = 1.0 / (1.0 - delta);
    let du_end = -profile.du()[profile.len() - 1];
    let t_max = (radius - split).powf(1.0 - delta);
    let pieces = 64;
    let mut outer = 0.0;
    for k in 0..pieces {
        let (a, b) = (t_max * k as f64 / pieces as f64, t_max * (k + 1) as f64 / pieces as f64);
        outer += rule.integrate(a, b, |t| {
            let gap = t.powf(e);
            let r = radius - gap;
            let ratio = if gap > 1e-12 * radius { interp.eval(r).0 / gap } else { du_end };
            phi(r) * ratio.powf(-delta) * wgt(r) * e
        });
    }

    let value = inner + outer;
    let sup_phi = profile.r().iter().map(|&r| phi(r).abs()).fold(0.0, f64::max);
    let bound = sup_phi * cone.powf(-delta) * radius.powf(dim as f64 - delta) * beta_one_minus_delta(delta, dim);
    let certified = value.is_finite() && value <= bound * (1.0 + 1e-9);
    Ok(HardyReport { value, cone_constant: cone, bound, certified })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotonicityReport {
    pub pass: bool,
    /// First grid index violating `u' < 0` or strict decrease of `u`.
    pub worst_index: Option<usize>,
    pub violations: usize,
}

/// `u'(r_i) < 0` for every `r_i > 0` and `u` strictly decreasing along the
/// grid. Equal neighbours are accepted when the expected drop `|u'| Δr` is
/// below a few ulps of `u`.
pub fn check_radial_monotonicity(profile: &RadialProfile) -> MonotonicityReport {
    let (r, u, du) = (profile.r(), profile.u(), profile.du());
    let mut first = None;
    let mut violations = 0;
    for i in 1..profile.len() {
        let drop_ok = if u[i] < u[i - 1] {
            true
        } else {
            u[i] == u[i - 1] && du[i].abs() * (r[i] - r[i - 1]) < 4.0 * f64::EPSILON * u[i].abs()
        };
        if !(du[i] < 0.0) || !drop_ok {
            violations += 1;
            first.get_or_insert(i);
        }
    }
    MonotonicityReport { pass: violations == 0, worst_index: first, violations }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OrderingReport {
    pub pass: bool,
    /// `min (u_lower - u_higher)` over the shared grid.
    pub worst_gap: f64,
    pub worst_r: f64,
    pub tolerance: f64,
}

/// Checks `u_{ε'} >= u_{ε}` pointwise for `ε' < ε`, up to
/// [`ORDERING_TOL`] times the larger sup norm.
pub fn eps_monotonicity(lower_eps: &RadialProfile, higher_eps: &RadialProfile) -> Result<OrderingReport> {
    let pairs = common_radii(lower_eps, higher_eps);
    if pairs.len() < 2 || lower_eps.last_radius() != higher_eps.last_radius() {
        return Err(Error::GridMismatch);
    }
    let tolerance = ORDERING_TOL * lower_eps.sup_norm().max(higher_eps.sup_norm());
    let (mut worst_gap, mut worst_r) = (f64::INFINITY, 0.0);
    for (i, j) in pairs {
        let gap = lower_eps.u()[i] - higher_eps.u()[j];
        if gap < worst_gap {
            worst_gap = gap;
            worst_r = lower_eps.r()[i];
        }
    }
    Ok(OrderingReport { pass: worst_gap >= -tolerance, worst_gap, worst_r, tolerance })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AprioriReport {
    pub max_sup_norm: f64,
    /// Relative change between the last two sup norms.
    pub last_change: f64,
    pub pass: bool,
}

/// Sup norms over a family at fixed `λ` must stay finite and the last two
/// must agree to `1e-3` relative.
pub fn apriori_bound(profiles: &[RadialProfile]) -> AprioriReport {
    let sups: Vec<f64> = profiles.iter().map(RadialProfile::sup_norm).collect();
    let max_sup_norm = sups.iter().copied().fold(0.0, f64::max);
    let bounded = profiles
        .iter()
        .all(|p| !matches!(p.terminated(), Termination::Diverged { .. }) && p.sup_norm().is_finite());
    let last_change = match sups.len() {
        0 | 1 => 0.0,
        n => (sups[n - 1] - sups[n - 2]).abs() / sups[n - 1].abs().max(f64::MIN_POSITIVE),
    };
    AprioriReport { max_sup_norm, last_change, pass: bounded && last_change < 1e-3 }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::ProblemParams;
    use crate::radial::constant_rhs_oracle;
    use std::f64::consts::PI;

    fn profile(n: usize, delta: f64, u: impl Fn(f64) -> f64, du: impl Fn(f64) -> f64) -> RadialProfile {
        profile_on(2048, n, delta, u, du)
    }

    fn profile_on(
        points: usize,
        n: usize,
        delta: f64,
        u: impl Fn(f64) -> f64,
        du: impl Fn(f64) -> f64,
    ) -> RadialProfile {
        let params = ProblemParams::builder()
            .dim(n)
            .p(2.0)
            .delta(delta)
            .lambda(1.0)
            .radius(1.0)
            .build_unchecked()
            .unwrap();
        RadialProfile::from_fn(&params, points, u, du).unwrap()
    }

    #[test]
    fn cone_examples() {
        let quad = profile(3, 0.5, |r| 1.0 - r * r, |r| -2.0 * r);
        assert!((check_cone_bound(&quad).unwrap() - 1.0).abs() < 1e-12);
        let touching = profile(3, 0.5, |r| (1.0 - r).powi(2), |r| -2.0 * (1.0 - r));
        assert_eq!(check_cone_bound(&touching).unwrap(), 0.0);
        let flat = profile(3, 0.5, |_| 1.0, |_| 0.0);
        assert!(matches!(check_cone_bound(&flat), Err(Error::Precondition(_))));
    }

    #[test]
    fn hardy_closed_forms() {
        // ∫ (1 - r^2)^(-1/2) dr = π/2 and ∫ r^2 (1 - r^2)^(-1/2) dr = π/4
        for (n, exact) in [(1usize, PI / 2.0), (3, PI / 4.0)] {
            let u = profile(n, 0.5, |r| 1.0 - r * r, |r| -2.0 * r);
            let rep = hardy_integrability(&u, |_| 1.0).unwrap();
            assert!((rep.value - exact).abs() < 1e-10, "N {n}: {}", rep.value);
            assert!(rep.certified && rep.value <= rep.bound);
        }
    }

    #[test]
    fn hardy_small_delta_reduces_to_plain_integral() {
        let u = profile(3, 1e-9, |r| 1.0 - r * r, |r| -2.0 * r);
        let rep = hardy_integrability(&u, |_| 1.0).unwrap();
        assert!((rep.value - 1.0 / 3.0).abs() < 1e-8);
    }

    #[test]
    fn hardy_rejects_interior_zero() {
        // 2049 points put r = 0.5 on the grid
        let u = profile_on(2049, 3, 0.5, |r| (1.0 - r * r) * (r - 0.5).powi(2), |r| {
            -2.0 * r * (r - 0.5).powi(2) + 2.0 * (1.0 - r * r) * (r - 0.5)
        });
        assert!(matches!(hardy_integrability(&u, |_| 1.0), Err(Error::NotCertified(_))));
    }

    #[test]
    fn monotonicity_examples() {
        let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
        assert!(check_radial_monotonicity(&constant_rhs_oracle(6.0, &params).unwrap()).pass);
        let flat = profile(3, 0.5, |_| 1.0, |_| 0.0);
        let rep = check_radial_monotonicity(&flat);
        assert!(!rep.pass);
        assert_eq!(rep.worst_index, Some(1));
    }

    #[test]
    fn ordering_antisymmetry() {
        let hi = profile(3, 0.5, |r| 2.0 * (1.0 - r * r), |r| -4.0 * r);
        let lo = profile(3, 0.5, |r| 1.0 - r * r, |r| -2.0 * r);
        assert!(eps_monotonicity(&hi, &lo).unwrap().pass);
        assert!(!eps_monotonicity(&lo, &hi).unwrap().pass);
        let same = eps_monotonicity(&lo, &lo).unwrap();
        assert!(same.pass && same.worst_gap == 0.0);
    }

    #[test]
    fn apriori_examples() {
        let u = profile(3, 0.5, |r| 1.0 - r * r, |r| -2.0 * r);
        assert!(apriori_bound(std::slice::from_ref(&u)).pass);
        let v = profile(3, 0.5, |r| 1e6 * (1.0 - r * r), |r| -2e6 * r);
        let rep = apriori_bound(&[u, v]);
        assert!(!rep.pass);
        assert_eq!(rep.max_sup_norm, 1e6);
    }
}
