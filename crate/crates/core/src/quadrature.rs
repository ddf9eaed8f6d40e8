//! Gauss–Legendre rules and composite integration over profile intervals.

use std::f64::consts::PI;

/// An `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of `P_n`, found by Newton iteration from the
    /// Chebyshev-like initial guesses.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "need at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `int_a^b f`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Integrates over `[lo, hi]` split at every breakpoint in `knots` (sorted)
/// and at `extra` points, applying the rule on each piece. `f` receives the
/// index of the knot interval containing the piece, which lets callers reuse
/// per-interval interpolants.
pub(crate) fn composite(
    rule: &GaussLegendre,
    knots: &[f64],
    lo: f64,
    hi: f64,
    extra: &[f64],
    mut f: impl FnMut(usize, f64) -> f64,
) -> f64 {
    if !(hi > lo) || knots.len() < 2 {
        return 0.0;
    }
    let first = knots.partition_point(|&v| v <= lo).clamp(1, knots.len() - 1) - 1;
    let mut total = 0.0;
    let mut i = first;
    while i + 1 < knots.len() && knots[i] < hi {
        let a = knots[i].max(lo);
        let b = knots[i + 1].min(hi);
        if b > a {
            let mut cuts: Vec<f64> = extra.iter().copied().filter(|&c| c > a && c < b).collect();
            cuts.sort_by(f64::total_cmp);
            let mut left = a;
            for right in cuts.into_iter().chain(std::iter::once(b)) {
                total += rule.integrate(left, right, |x| f(i, x));
                left = right;
            }
        }
        i += 1;
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        for n in 1..=8 {
            let rule = GaussLegendre::new(n);
            let s: f64 = rule.weights().iter().sum();
            assert!((s - 2.0).abs() < 1e-14);
            let deg = 2 * n - 1;
            let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
            assert!((got - 1.0 / (deg as f64 + 1.0)).abs() < 1e-14, "n {n}");
        }
    }

    #[test]
    fn five_point_nodes() {
        let rule = GaussLegendre::new(5);
        // largest node of P_5: sqrt(5 + 2 sqrt(10/7)) / 3
        let x = (5.0 + 2.0 * (10.0f64 / 7.0).sqrt()).sqrt() / 3.0;
        assert!((rule.nodes()[4] - x).abs() < 1e-15);
        assert!((rule.weights()[2] - 128.0 / 225.0).abs() < 1e-15);
    }

    #[test]
    fn composite_splits_at_cuts() {
        let rule = GaussLegendre::new(3);
        let knots = [0.0, 0.5, 1.0];
        // |x - 0.3| has a kink the cut removes
        let got = composite(&rule, &knots, 0.0, 1.0, &[0.3], |_, x| (x - 0.3f64).abs());
        let exact = 0.5 * 0.09 + 0.5 * 0.49;
        assert!((got - exact).abs() < 1e-15);
        let partial = composite(&rule, &knots, 0.25, 0.75, &[], |_, x| x);
        assert!((partial - 0.25).abs() < 1e-15);
    }
}
