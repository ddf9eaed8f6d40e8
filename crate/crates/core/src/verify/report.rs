use serde::{Deserialize, Serialize};

use super::bounds::{check_cone_bound, check_radial_monotonicity, hardy_integrability};
use super::inequalities::picone_check;
use super::residual::{weak_residual, DEFAULT_TEST_COUNT};
use crate::error::Result;
use crate::problem::{picone_threshold, ProblemParams};
use crate::profile::RadialProfile;
use crate::radial::momentum_defect_g;
use crate::shooting::EigenPair;

/// Weak-residual threshold for converged profiles.
pub const RESIDUAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckEntry {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// Named checks; the report passes when every entry does.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckEntry>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new() -> Self {
        VerificationReport { checks: Vec::new(), pass: true }
    }

    pub fn push(&mut self, name: &str, measured: f64, threshold: f64, pass: bool) {
        self.pass &= pass;
        self.checks.push(CheckEntry { name: name.to_string(), measured, threshold, pass });
    }

    /// `measured <= threshold`
    pub fn push_at_most(&mut self, name: &str, measured: f64, threshold: f64) {
        self.push(name, measured, threshold, measured <= threshold);
    }

    /// `measured > threshold`
    pub fn push_above(&mut self, name: &str, measured: f64, threshold: f64) {
        self.push(name, measured, threshold, measured > threshold);
    }

    pub fn get(&self, name: &str) -> Option<&CheckEntry> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckEntry> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| crate::Error::Io(e.to_string()))
    }
}

/// Full battery for a profile claimed to solve the Dirichlet problem for
/// `params`. The Picone entries need the first eigenpair on the same ball.
pub fn verify_solution(profile: &RadialProfile, params: &ProblemParams, eig: Option<&EigenPair>) -> VerificationReport {
    let mut rep = VerificationReport::new();
    let a = profile.center_value();
    let u_end = profile.u().last().copied().unwrap_or(f64::NAN);
    rep.push_at_most("boundary_value", u_end.abs(), 1e-10 * a.max(1.0));
    rep.push_at_most("weak_residual", weak_residual(profile, params, DEFAULT_TEST_COUNT), RESIDUAL_TOL);
    rep.push_at_most("momentum_defect", momentum_defect_g(profile), 1e-8);

    let mono = check_radial_monotonicity(profile);
    rep.push_at_most("monotonicity_violations", mono.violations as f64, 0.0);
    let peak = profile.u().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    rep.push_at_most("interior_maximum_excess", peak - a, 0.0);

    match check_cone_bound(profile) {
        Ok(c) => rep.push_above("cone_constant", c, 0.0),
        Err(_) => rep.push("cone_constant", f64::NAN, 0.0, false),
    }
    match hardy_integrability(profile, |_| 1.0) {
        Ok(h) => rep.push("hardy_integral", h.value, h.bound, h.certified),
        Err(_) => rep.push("hardy_integral", f64::NAN, f64::NAN, false),
    }

    if let Some(eig) = eig {
        match picone_check(profile, eig, params) {
            Ok(pc) => rep.push_at_most("picone_ratio", pc.lhs / pc.rhs, 1.0 + 1e-6),
            Err(_) => rep.push("picone_ratio", f64::NAN, 1.0 + 1e-6, false),
        }
        if let Ok(k) = picone_threshold(params) {
            rep.push_at_most("picone_threshold", k.k, eig.lambda1 * (1.0 + 1e-6));
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial::constant_rhs_oracle;
    use crate::shooting::first_eigenpair;

    #[test]
    fn oracle_profile_passes_everything() {
        let params = ProblemParams::constant_forcing(6.0, 3, 2.0, 1.0).unwrap();
        let u = constant_rhs_oracle(6.0, &params).unwrap();
        let eig = first_eigenpair(2.0, 3, 1.0).unwrap();
        let rep = verify_solution(&u, &params, Some(&eig));
        assert!(rep.pass, "{}", rep.to_json());
        assert_eq!(rep.checks.len(), 9);
    }

    #[test]
    fn json_round_trip_and_conjunction() {
        let mut rep = VerificationReport::new();
        rep.push_at_most("a", 1.0, 2.0);
        assert!(rep.pass);
        rep.push_above("b", 0.0, 0.0);
        assert!(!rep.pass);
        assert_eq!(rep.failures().count(), 1);
        let back = VerificationReport::from_json(&rep.to_json()).unwrap();
        assert_eq!(back, rep);
        assert!(rep.to_json().contains("\"threshold\""));
    }
}
