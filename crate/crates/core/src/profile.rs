//! Discretized radial profiles and their CSV form.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::problem::ProblemParams;

/// How an integration from the center ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Termination {
    /// The profile reaches the end radius with `u > 0`.
    ReachedR,
    /// `u` reached zero at `r_cross`. `reduced_accuracy` marks crossings
    /// extrapolated after the singular step clamp gave out.
    HitZero { r_cross: f64, reduced_accuracy: bool },
    /// Non-finite values or the amplitude guard tripped at `r`.
    Diverged { r: f64 },
}

/// A radial function `u(r)` sampled at increasing radii, starting at the center.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    r: Vec<f64>,
    u: Vec<f64>,
    du: Vec<f64>,
    params: ProblemParams,
    terminated: Termination,
}

impl RadialProfile {
    /// Checks `r[0] = 0`, `du[0] = 0`, equal lengths of at least 2 and strictly
    /// increasing radii.
    pub fn new(
        r: Vec<f64>,
        u: Vec<f64>,
        du: Vec<f64>,
        params: ProblemParams,
        terminated: Termination,
    ) -> Result<Self> {
        if r.len() < 2 || r.len() != u.len() || r.len() != du.len() {
            return Err(Error::Precondition(format!(
                "profile arrays need one common length >= 2 (r {}, u {}, du {})",
                r.len(),
                u.len(),
                du.len()
            )));
        }
        if r[0] != 0.0 || du[0] != 0.0 {
            return Err(Error::Precondition("profile must start at r = 0 with du = 0".into()));
        }
        if let Some(i) = r.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::Precondition(format!("radii not increasing at index {}", i + 1)));
        }
        Ok(RadialProfile { r, u, du, params, terminated })
    }

    /// Samples closed-form `u` and `u'` on `points` equispaced radii of `[0, R]`.
    pub fn from_fn(
        params: &ProblemParams,
        points: usize,
        u: impl Fn(f64) -> f64,
        du: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let radius = params.radius();
        let r = uniform_grid(radius, points);
        let uu = r.iter().map(|&x| u(x)).collect();
        let mut dd: Vec<f64> = r.iter().map(|&x| du(x)).collect();
        dd[0] = 0.0;
        RadialProfile::new(r, uu, dd, params.clone(), Termination::ReachedR)
    }

    pub fn r(&self) -> &[f64] {
        &self.r
    }
    pub fn u(&self) -> &[f64] {
        &self.u
    }
    pub fn du(&self) -> &[f64] {
        &self.du
    }
    pub fn len(&self) -> usize {
        self.r.len()
    }
    pub fn is_empty(&self) -> bool {
        self.r.is_empty()
    }
    pub fn center_value(&self) -> f64 {
        self.u[0]
    }
    pub fn params(&self) -> &ProblemParams {
        &self.params
    }
    pub fn terminated(&self) -> Termination {
        self.terminated
    }
    pub fn last_radius(&self) -> f64 {
        *self.r.last().expect("profile is nonempty")
    }

    /// `max |u|` over the samples.
    pub fn sup_norm(&self) -> f64 {
        self.u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Cubic Hermite interpolant built from `(u, u')` at the samples.
    pub fn interpolant(&self) -> Hermite<'_> {
        Hermite { profile: self }
    }

    /// CSV with header `r,u,du`, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.len() * 72);
        out.push_str("r,u,du\n");
        for i in 0..self.len() {
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(self.r[i]),
                fmt_f64(self.u[i]),
                fmt_f64(self.du[i])
            );
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }

    /// Parses the `r,u,du` form. The termination is inferred: a profile whose
    /// last radius equals `R` counts as reaching it.
    pub fn from_csv(text: &str, params: &ProblemParams) -> Result<Self> {
        parse_profile(text.as_bytes(), params)
    }

    pub fn read_csv(path: &Path, params: &ProblemParams) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        parse_profile(std::io::BufReader::new(file), params)
    }
}

fn parse_profile(reader: impl BufRead, params: &ProblemParams) -> Result<RadialProfile> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Csv("empty file".into()))??;
    if header.trim() != "r,u,du" {
        return Err(Error::Csv(format!("expected header `r,u,du`, found `{header}`")));
    }
    let (mut r, mut u, mut du) = (Vec::new(), Vec::new(), Vec::new());
    for (lineno, line) in lines.enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Csv(format!("line {}: expected 3 fields", lineno + 2)));
        }
        let parse = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| Error::Csv(format!("line {}: {e}", lineno + 2)))
        };
        r.push(parse(fields[0])?);
        u.push(parse(fields[1])?);
        du.push(parse(fields[2])?);
    }
    let last = *r.last().ok_or_else(|| Error::Csv("no data rows".into()))?;
    let radius = params.radius();
    let terminated = if (last - radius).abs() <= 1e-12 * radius {
        Termination::ReachedR
    } else {
        Termination::HitZero { r_cross: last, reduced_accuracy: false }
    };
    RadialProfile::new(r, u, du, params.clone(), terminated)
}

/// Fixed-width scientific formatting with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// `points` equispaced radii on `[0, r_end]`, computed so that equal inputs give
/// bitwise equal grids.
pub fn uniform_grid(r_end: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n).map(|i| grid_point(r_end, i, n)).collect()
}

#[inline]
pub(crate) fn grid_point(r_end: f64, i: usize, n: usize) -> f64 {
    if i + 1 == n {
        r_end
    } else {
        r_end * i as f64 / (n - 1) as f64
    }
}

/// Piecewise cubic Hermite interpolation of a profile.
#[derive(Debug, Clone, Copy)]
pub struct Hermite<'a> {
    profile: &'a RadialProfile,
}

impl Hermite<'_> {
    /// `(u(x), u'(x))`; outside the sampled range the end intervals are extended.
    pub fn eval(&self, x: f64) -> (f64, f64) {
        let r = &self.profile.r;
        let i = r.partition_point(|&v| v <= x).clamp(1, r.len() - 1) - 1;
        self.eval_in(i, x)
    }

    /// Evaluates on interval `[r[i], r[i+1]]`.
    pub fn eval_in(&self, i: usize, x: f64) -> (f64, f64) {
        let p = self.profile;
        let (x0, x1) = (p.r[i], p.r[i + 1]);
        let h = x1 - x0;
        let t = (x - x0) / h;
        let (y0, y1, m0, m1) = (p.u[i], p.u[i + 1], p.du[i] * h, p.du[i + 1] * h);
        let t2 = t * t;
        let t3 = t2 * t;
        let u = (2.0 * t3 - 3.0 * t2 + 1.0) * y0
            + (t3 - 2.0 * t2 + t) * m0
            + (-2.0 * t3 + 3.0 * t2) * y1
            + (t3 - t2) * m1;
        let du = ((6.0 * t2 - 6.0 * t) * y0
            + (3.0 * t2 - 4.0 * t + 1.0) * m0
            + (-6.0 * t2 + 6.0 * t) * y1
            + (3.0 * t2 - 2.0 * t) * m1)
            / h;
        (u, du)
    }
}

/// Indices `(i, j)` of radii shared bitwise by both profiles.
pub(crate) fn common_radii(a: &RadialProfile, b: &RadialProfile) -> Vec<(usize, usize)> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.r.len() && j < b.r.len() {
        match a.r[i].total_cmp(&b.r[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push((i, j));
                i += 1;
                j += 1;
            }
        }
    }
    out
}
