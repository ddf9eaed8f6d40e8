#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use radial_plap::continuation::{eps_continuation, EpsPath};
use radial_plap::{ProblemParams, RadialProfile};

/// `p = 2, N = 3, R = 1, δ = 0.5, q = 3, f = 0, λ = 0.05`.
pub fn existence_params() -> ProblemParams {
    ProblemParams::builder()
        .dim(3)
        .p(2.0)
        .q(3.0)
        .delta(0.5)
        .lambda(0.05)
        .radius(1.0)
        .build()
        .unwrap()
}

/// `ε_k = 0.1 · 4^(-k)`, `k = 0..9`.
pub fn existence_path() -> EpsPath {
    eps_continuation(&existence_params(), 0.1, 0.25, 10).unwrap()
}

/// Exact solution of `-Δ_p u = c` on `B_R`, written out independently of the
/// library: `u = (c/N)^(1/(p-1)) (p-1)/p (R^(p/(p-1)) - r^(p/(p-1)))`.
pub fn constant_forcing_solution(c: f64, n: usize, p: f64, radius: f64, r: f64) -> f64 {
    let k = (c / n as f64).powf(1.0 / (p - 1.0));
    let e = p / (p - 1.0);
    k * (p - 1.0) / p * (radius.powf(e) - r.powf(e))
}

/// `u(r) = sum_k c_k (1 - r^(2k))` with random positive `c_k`: smooth, radial,
/// zero at `r = 1`.
pub fn random_smooth_profile(rng: &mut ChaCha8Rng, params: &ProblemParams, points: usize) -> RadialProfile {
    let coeffs: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..2.0)).collect();
    let c1 = coeffs.clone();
    RadialProfile::from_fn(
        params,
        points,
        move |r| c1.iter().enumerate().map(|(k, c)| c * (1.0 - r.powi(2 * k as i32 + 2))).sum(),
        move |r| {
            coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| -c * (2 * k + 2) as f64 * r.powi(2 * k as i32 + 1))
                .sum()
        },
    )
    .unwrap()
}

/// `min (a(r) - b(r))` over radii present in both profiles, matched by exact
/// equality of the radius.
pub fn min_gap_on_shared_radii(a: &RadialProfile, b: &RadialProfile) -> (f64, usize) {
    let mut shared = 0;
    let mut gap = f64::INFINITY;
    let mut j = 0;
    for (i, &r) in a.r().iter().enumerate() {
        while j < b.len() && b.r()[j] < r {
            j += 1;
        }
        if j < b.len() && b.r()[j] == r {
            shared += 1;
            gap = gap.min(a.u()[i] - b.u()[j]);
        }
    }
    (gap, shared)
}
