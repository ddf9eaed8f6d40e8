use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::{g_unchecked, ProblemParams};
use crate::profile::{common_radii, RadialProfile};
use crate::quadrature::{composite, GaussLegendre};
use crate::radial::phi_p;
use crate::shooting::EigenPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PiconeReport {
    /// `∫ h(u) φ1^p / u^(p-1) r^(N-1) dr`
    pub lhs: f64,
    /// `λ1 ∫ φ1^p r^(N-1) dr`
    pub rhs: f64,
    pub pass: bool,
}

/// Picone inequality for a positive solution `u` of `-Δ_p u = g(u)`, with `g`
/// taken from `params`.
pub fn picone_check(profile: &RadialProfile, eig: &EigenPair, params: &ProblemParams) -> Result<PiconeReport> {
    picone_check_with(profile, eig, |u| g_unchecked(u.max(f64::MIN_POSITIVE), params))
}

/// [`picone_check`] with an arbitrary right-hand side `h(u)`.
pub fn picone_check_with(profile: &RadialProfile, eig: &EigenPair, h: impl Fn(f64) -> f64) -> Result<PiconeReport> {
    let phi = &eig.phi1;
    let end = profile.last_radius();
    if (phi.last_radius() - end).abs() > 1e-12 * end {
        return Err(Error::GridMismatch);
    }
    if profile.u()[..profile.len() - 1].iter().any(|&u| !(u > 0.0)) {
        return Err(Error::Precondition("profile must be positive on [0, R)".into()));
    }
    let p = profile.params().p();
    let dim = profile.params().dim() as i32;
    let rule = GaussLegendre::new(6);
    let (iu, iphi) = (profile.interpolant(), phi.interpolant());
    let lhs = composite(&rule, profile.r(), 0.0, end, phi.r(), |i, r| {
        let u = iu.eval_in(i, r).0;
        let f = iphi.eval(r).0.max(0.0);
        if f == 0.0 {
            return 0.0;
        }
        h(u) * f.powf(p) / u.powf(p - 1.0) * r.powi(dim - 1)
    });
    let rule_phi = GaussLegendre::new(6);
    let rhs = eig.lambda1
        * composite(&rule_phi, phi.r(), 0.0, end, &[], |i, r| {
            iphi.eval_in(i, r).0.max(0.0).powf(p) * r.powi(dim - 1)
        });
    Ok(PiconeReport { lhs, rhs, pass: lhs <= rhs * (1.0 + 1e-6) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonotoneReport {
    /// `∫ (φ_p(w') - φ_p(v'))(w' - v') r^(N-1) dr`
    pub lhs: f64,
    /// `∫ |w' - v'|^p r^(N-1) dr`
    pub power_integral: f64,
    /// `lhs / power_integral`, the empirical constant (meaningful for `p >= 2`).
    pub constant: f64,
    /// Smallest pointwise integrand.
    pub min_integrand: f64,
    pub identical: bool,
    pub pass: bool,
}

/// Monotonicity of `s -> φ_p(s)` integrated over two profiles, by the
/// trapezoid rule on their shared grid points.
///
/// ```
/// use radial_plap::problem::ProblemParams;
/// use radial_plap::profile::RadialProfile;
/// use radial_plap::verify::monotone_operator_check;
///
/// let params = ProblemParams::geometry(3, 3.0, 1.0).unwrap();
/// let w = RadialProfile::from_fn(&params, 256, |r| 1.0 - r * r, |r| -2.0 * r).unwrap();
/// let v = RadialProfile::from_fn(&params, 256, |r| 1.0 - r.powi(4), |r| -4.0 * r.powi(3)).unwrap();
/// let rep = monotone_operator_check(&w, &v, 3.0).unwrap();
/// assert!(rep.pass && rep.lhs > 0.0);
/// assert_eq!(monotone_operator_check(&w, &w, 3.0).unwrap().lhs, 0.0);
/// ```
pub fn monotone_operator_check(w: &RadialProfile, v: &RadialProfile, p: f64) -> Result<MonotoneReport> {
    let pairs = common_radii(w, v);
    if pairs.len() < 2 || w.last_radius() != v.last_radius() {
        return Err(Error::GridMismatch);
    }
    let dim = w.params().dim() as i32;
    let mut lhs = 0.0;
    let mut power_integral = 0.0;
    let mut min_integrand = f64::INFINITY;
    let mut identical = true;
    let mut prev: Option<(f64, f64, f64)> = None;
    for &(i, j) in &pairs {
        let (a, b) = (w.du()[i], v.du()[j]);
        identical &= a == b;
        let r = w.r()[i];
        let wgt = r.powi(dim - 1);
        let f = (phi_p(a, p) - phi_p(b, p)) * (a - b) * wgt;
        let g = (a - b).abs().powf(p) * wgt;
        min_integrand = min_integrand.min(f);
        if let Some((r0, f0, g0)) = prev {
            lhs += 0.5 * (r - r0) * (f + f0);
            power_integral += 0.5 * (r - r0) * (g + g0);
        }
        prev = Some((r, f, g));
    }
    let constant = if power_integral > 0.0 { lhs / power_integral } else { f64::NAN };
    let pass = min_integrand >= 0.0 && lhs >= 0.0 && ((lhs == 0.0) == identical);
    Ok(MonotoneReport { lhs, power_integral, constant, min_integrand, identical, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shooting::first_eigenpair;

    #[test]
    fn picone_equality_and_strict_failure() {
        let eig = first_eigenpair(2.0, 3, 1.0).unwrap();
        let l1 = eig.lambda1;
        let eq = picone_check_with(&eig.phi1, &eig, |u| l1 * u).unwrap();
        assert!(((eq.lhs - eq.rhs) / eq.rhs).abs() < 1e-8);
        assert!(eq.pass);
        let over = picone_check_with(&eig.phi1, &eig, |u| (l1 + 1.0) * u).unwrap();
        assert!(!over.pass);
    }

    #[test]
    fn picone_equality_p3() {
        let eig = first_eigenpair(3.0, 2, 1.0).unwrap();
        let l1 = eig.lambda1;
        let eq = picone_check_with(&eig.phi1, &eig, |u| l1 * phi_p(u, 3.0)).unwrap();
        assert!(((eq.lhs - eq.rhs) / eq.rhs).abs() < 1e-8);
    }

    #[test]
    fn p2_lhs_is_squared_gradient_gap() {
        let params = ProblemParams::geometry(3, 2.0, 1.0).unwrap();
        let w = RadialProfile::from_fn(&params, 512, |r| 1.0 - r * r, |r| -2.0 * r).unwrap();
        let v = RadialProfile::from_fn(&params, 512, |r| (1.0 - r * r).powi(2), |r| -4.0 * r * (1.0 - r * r)).unwrap();
        let rep = monotone_operator_check(&w, &v, 2.0).unwrap();
        assert!((rep.lhs - rep.power_integral).abs() <= 1e-10 * rep.power_integral);
        assert!((rep.constant - 1.0).abs() < 1e-10);
    }
}
