use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use radial_plap::continuation::{
    eps_continuation, lambda_sweep, largest_existing_lambda, mu_probe, mu_probe_to_csv, smallest_nonexistent_mu,
    sup_distance, sweep_to_csv, SweepRecord,
};
use radial_plap::profile::RadialProfile;
use radial_plap::shooting::{bracket_near, brackets_of, first_eigenpair, scan, shots_to_csv, solve_bvp};
use radial_plap::verify::{blowup_family, blowup_rescale, verify_solution, RescaleEntry, VerificationReport};
use radial_plap::Error;

use crate::config::RunConfig;
use crate::svg::{Plot, Series};

/// Marks errors that should exit with the configuration status.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_error(msg: impl Into<String>) -> anyhow::Error {
    anyhow::Error::new(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    NoSolution,
    Failed,
}

pub struct Ctx {
    pub cfg: RunConfig,
    pub out: PathBuf,
}

impl Ctx {
    fn write(&self, name: &str, contents: &str) -> Result<()> {
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))
    }

    fn write_report(&self, name: &str, report: &VerificationReport) -> Result<()> {
        self.write(name, &(report.to_json() + "\n"))
    }
}

fn profile_plot(title: &str, profiles: &[(String, &RadialProfile)]) -> String {
    Plot {
        title: title.into(),
        x_label: "r".into(),
        y_label: "u(r)".into(),
        series: profiles
            .iter()
            .map(|(name, p)| Series {
                name: name.clone(),
                points: p.r().iter().copied().zip(p.u().iter().copied()).collect(),
            })
            .collect(),
    }
    .render()
}

fn print_report(report: &VerificationReport) {
    for c in &report.checks {
        println!(
            "  {:<24} {:>14.6e}  (threshold {:.3e})  {}",
            c.name,
            c.measured,
            c.threshold,
            if c.pass { "pass" } else { "FAIL" }
        );
    }
}

fn status_of(report: &VerificationReport) -> Status {
    if report.pass {
        Status::Success
    } else {
        Status::Failed
    }
}

pub fn solve(ctx: &Ctx) -> Result<Status> {
    let params = &ctx.cfg.problem;
    let s = &ctx.cfg.scan;
    let shots = scan(params, s.a_min, s.a_max, s.points)?;
    ctx.write("scan.csv", &shots_to_csv(&shots))?;
    let brackets = brackets_of(&shots);
    let solutions: Vec<RadialProfile> =
        brackets.par_iter().filter_map(|&b| solve_bvp(params, b).ok()).collect();
    let Some(first) = solutions.first() else {
        println!("no solution with u(0) in [{:e}, {:e}]", s.a_min, s.a_max);
        return Ok(Status::NoSolution);
    };
    for (k, sol) in solutions.iter().enumerate() {
        println!("solution {k}: u(0) = {:.16e}", sol.center_value());
    }
    ctx.write("profile.csv", &first.to_csv())?;
    ctx.write("profile.svg", &profile_plot("solution with the smallest u(0)", &[("u".into(), first)]))?;
    let eig = first_eigenpair(params.p(), params.dim(), params.radius())?;
    let report = verify_solution(first, params, Some(&eig));
    ctx.write_report("report.json", &report)?;
    print_report(&report);
    Ok(status_of(&report))
}

pub fn verify(ctx: &Ctx, profile_path: &Path) -> Result<Status> {
    let params = &ctx.cfg.problem;
    let profile = RadialProfile::read_csv(profile_path, params)
        .with_context(|| format!("reading {}", profile_path.display()))?;
    let eig = first_eigenpair(params.p(), params.dim(), params.radius())?;
    let report = verify_solution(&profile, params, Some(&eig));
    ctx.write_report("report.json", &report)?;
    print_report(&report);
    Ok(status_of(&report))
}

pub fn eigen(ctx: &Ctx) -> Result<Status> {
    let p = &ctx.cfg.problem;
    let eig = first_eigenpair(p.p(), p.dim(), p.radius())?;
    ctx.write("eigen.csv", &eig.to_csv())?;
    println!("lambda1 = {:.16e}", eig.lambda1);
    Ok(Status::Success)
}

pub fn continue_path(ctx: &Ctx) -> Result<Status> {
    let params = &ctx.cfg.problem;
    let c = &ctx.cfg.continuation;
    let mut path = eps_continuation(params, c.eps0, c.factor, c.steps)?;
    ctx.write("eps_path.csv", &path.to_csv())?;
    for (k, eps) in path.eps_values.iter().enumerate() {
        println!("eps {:.6e}  u(0) {:.16e}  increment {:.3e}", eps, path.profiles[k].center_value(), path.increments[k]);
    }
    if let Some(why) = &path.truncated {
        println!("path stopped early: {why}");
    }
    if path.is_empty() {
        return Ok(Status::NoSolution);
    }
    let worst = path.ordering.iter().map(|o| o.worst_gap).fold(f64::INFINITY, f64::min);
    println!("ordering: {} (worst gap {:.3e})", if path.is_ordered() { "holds" } else { "VIOLATED" }, worst);

    let singular = params.with_eps(0.0)?;
    let last = path.profiles.last().expect("nonempty").clone();
    if let Ok(Some(b)) = bracket_near(&singular, last.center_value(), 1e-3, 12) {
        if let Ok(direct) = solve_bvp(&singular, b) {
            println!(
                "direct eps = 0 solve: u(0) = {:.16e}, distance to last path profile {:.3e}",
                direct.center_value(),
                sup_distance(&direct, &last)?
            );
        }
    }

    let tol = c.cauchy_tol * last.sup_norm();
    let limit = match path.close(Some(tol)) {
        Ok(lim) => lim,
        Err(e @ Error::NotCauchy { .. }) => {
            println!("{e}");
            return Ok(Status::Failed);
        }
        Err(e) => return Err(e.into()),
    };
    println!("limit: u(0) = {:.16e}, cone constant {:.6e}", limit.profile.center_value(), limit.cone_constant);
    ctx.write("profile.csv", &limit.profile.to_csv())?;
    let named: Vec<(String, &RadialProfile)> =
        path.eps_values.iter().zip(&path.profiles).map(|(e, p)| (format!("eps {e:.2e}"), p)).collect();
    ctx.write("profile.svg", &profile_plot("eps path", &named))?;
    let eig = first_eigenpair(params.p(), params.dim(), params.radius())?;
    let report = verify_solution(&limit.profile, &singular, Some(&eig));
    ctx.write_report("report.json", &report)?;
    print_report(&report);
    Ok(if path.is_ordered() { status_of(&report) } else { Status::Failed })
}

fn bifurcation_plot(records: &[SweepRecord]) -> String {
    let branches = records.iter().filter_map(|r| r.branch).max().map_or(0, |b| b + 1);
    Plot {
        title: "bifurcation diagram".into(),
        x_label: "lambda".into(),
        y_label: "sup norm".into(),
        series: (0..branches)
            .map(|b| Series {
                name: format!("branch {b}"),
                points: records.iter().filter(|r| r.branch == Some(b)).map(|r| (r.lambda, r.sup_norm)).collect(),
            })
            .collect(),
    }
    .render()
}

pub fn sweep(ctx: &Ctx) -> Result<Status> {
    let params = &ctx.cfg.problem;
    let sw = &ctx.cfg.sweep;
    let records = lambda_sweep(params, &sw.lambdas, &ctx.cfg.scan)?;
    ctx.write("bifurcation.csv", &sweep_to_csv(&records))?;
    ctx.write("bifurcation.svg", &bifurcation_plot(&records))?;
    match largest_existing_lambda(&records) {
        Some(l) => println!("largest lambda with a solution: {l}"),
        None => println!("no solution for any lambda"),
    }
    if sw.mus.is_empty() {
        return Ok(Status::Success);
    }
    let rows = mu_probe(params, &sw.mus, &ctx.cfg.scan)?;
    ctx.write("mu_probe.csv", &mu_probe_to_csv(&rows))?;
    for r in &rows {
        println!("mu {:>10.4e}  exists {:<5}  k {:.6e}  lambda1 {:.6e}", r.mu, r.exists, r.k, r.lambda1);
    }
    if let Some(mu) = smallest_nonexistent_mu(&rows) {
        println!("smallest probed mu without a solution: {mu}");
    }
    Ok(if rows.iter().all(|r| r.consistent) { Status::Success } else { Status::Failed })
}

#[derive(Serialize)]
struct BlowupSummary<'a> {
    x_max: f64,
    residuals_decreasing: bool,
    entries: &'a [RescaleEntry],
}

pub fn blowup(ctx: &Ctx) -> Result<Status> {
    let params = &ctx.cfg.problem;
    let hs = &ctx.cfg.blowup.heights;
    if hs.len() < 2 {
        return Err(config_error("blow-up needs at least two heights"));
    }
    if hs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(config_error("blow-up heights must be strictly ascending"));
    }
    let family = blowup_family(params, hs)?;
    let rep = blowup_rescale(&family, params)?;
    ctx.write("rescaled_profiles.csv", &rep.to_csv())?;
    let summary = BlowupSummary { x_max: rep.x_max, residuals_decreasing: rep.residuals_decreasing, entries: &rep.entries };
    ctx.write("blowup.json", &(serde_json::to_string_pretty(&summary)? + "\n"))?;
    for e in &rep.entries {
        println!(
            "H {:>10.4e}  M {:.6e}  v(0) {}  residual {:.3e}  laplace {:.3e}  singular {:.3e}",
            e.h, e.m, e.v_center, e.residual, e.residual_laplace, e.singular_center
        );
    }
    println!("common window [0, {:.6}], residuals decreasing: {}", rep.x_max, rep.residuals_decreasing);
    Ok(Status::Success)
}
