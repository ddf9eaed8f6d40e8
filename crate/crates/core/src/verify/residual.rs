use crate::problem::{g_unchecked, ProblemParams};
use crate::profile::RadialProfile;
use crate::quadrature::{composite, GaussLegendre};
use crate::radial::phi_p;

pub const DEFAULT_TEST_COUNT: usize = 8;

/// `max(0, 1 - ((r - c)/w)^2)^3` and its derivative.
pub fn bump(r: f64, center: f64, width: f64) -> (f64, f64) {
    let s = (r - center) / width;
    if s.abs() >= 1.0 {
        return (0.0, 0.0);
    }
    let b = 1.0 - s * s;
    (b * b * b, -6.0 * s * b * b / width)
}

/// Largest normalized weak residual of `-Δ_p u = g(u)` over radial bump test
/// functions, using the nonlinearity of `params`.
///
/// ```
/// use radial_plap::problem::ProblemParams;
/// use radial_plap::radial::constant_rhs_oracle;
/// use radial_plap::verify::weak_residual;
///
/// let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
/// let exact = constant_rhs_oracle(6.0, &params).unwrap();
/// assert!(weak_residual(&exact, &params, 8) < 1e-8);
/// ```
pub fn weak_residual(profile: &RadialProfile, params: &ProblemParams, test_count: usize) -> f64 {
    weak_residual_with(profile, |u| g_unchecked(u.max(f64::MIN_POSITIVE), params), test_count)
}

/// [`weak_residual`] for an arbitrary forcing `g`, over the profile's own
/// range `[0, last_radius]`.
pub fn weak_residual_with(profile: &RadialProfile, forcing: impl Fn(f64) -> f64, test_count: usize) -> f64 {
    weak_residual_on(profile, forcing, test_count, profile.last_radius())
}

/// Test functions are `test_count` bumps of half-width `L/(n+1)` centered at
/// `L(j+1)/(n+1)`, so together they tile `(0, L)`. For each bump the residual
/// is `|∫ φ_p(u') φ' r^(N-1) - ∫ g(u) φ r^(N-1)| / ∫ |φ'| r^(N-1)`.
pub fn weak_residual_on(
    profile: &RadialProfile,
    forcing: impl Fn(f64) -> f64,
    test_count: usize,
    domain_end: f64,
) -> f64 {
    weak_residual_for_p(profile, profile.params().p(), forcing, test_count, domain_end)
}

/// Same with the operator exponent `p` given explicitly.
pub(crate) fn weak_residual_for_p(
    profile: &RadialProfile,
    p: f64,
    forcing: impl Fn(f64) -> f64,
    test_count: usize,
    domain_end: f64,
) -> f64 {
    let dim = profile.params().dim() as i32;
    let rule = GaussLegendre::new(6);
    let interp = profile.interpolant();
    let end = domain_end.min(profile.last_radius());
    let width = end / (test_count + 1) as f64;
    let mut worst: f64 = 0.0;
    for j in 0..test_count {
        let c = end * (j + 1) as f64 / (test_count + 1) as f64;
        let (lo, hi) = ((c - width).max(0.0), (c + width).min(end));
        let cuts = [lo, c, hi];
        let diff = composite(&rule, profile.r(), lo, hi, &cuts, |i, r| {
            let (u, du) = interp.eval_in(i, r);
            let (phi, dphi) = bump(r, c, width);
            let g = if phi == 0.0 { 0.0 } else { forcing(u) * phi };
            (phi_p(du, p) * dphi - g) * r.powi(dim - 1)
        });
        let norm = composite(&rule, profile.r(), lo, hi, &cuts, |_, r| bump(r, c, width).1.abs() * r.powi(dim - 1));
        if norm > 0.0 {
            worst = worst.max(diff.abs() / norm);
        }
    }
    worst
}
