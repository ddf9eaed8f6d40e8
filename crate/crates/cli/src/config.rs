use std::path::Path;

use anyhow::{bail, Context, Result};
use radial_plap::continuation::{ScanRange, CAUCHY_REL_TOL};
use radial_plap::ProblemParams;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemParams,
    pub scan: ScanRange,
    pub continuation: ContinuationConfig,
    pub sweep: SweepConfig,
    pub blowup: BlowupConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuationConfig {
    pub eps0: f64,
    pub factor: f64,
    pub steps: usize,
    /// Cauchy tolerance relative to the sup norm of the last profile.
    pub cauchy_tol: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    pub lambdas: Vec<f64>,
    /// When nonempty, `sweep` also writes a μ probe.
    pub mus: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupConfig {
    pub heights: Vec<f64>,
}

impl Default for ContinuationConfig {
    fn default() -> Self {
        ContinuationConfig { eps0: 0.1, factor: 0.25, steps: 10, cauchy_tol: CAUCHY_REL_TOL }
    }
}

impl Default for BlowupConfig {
    fn default() -> Self {
        BlowupConfig { heights: vec![10.0, 100.0, 1000.0] }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            problem: ProblemParams::builder().lambda(0.05).build().expect("default problem is valid"),
            scan: ScanRange::default(),
            continuation: ContinuationConfig::default(),
            sweep: SweepConfig { lambdas: vec![0.01, 0.02, 0.05, 0.1, 0.2], mus: Vec::new() },
            blowup: BlowupConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| anyhow::anyhow!("{e}"))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scan;
        if !(s.a_min > 0.0 && s.a_max > s.a_min) || s.points < 2 {
            bail!("scan needs 0 < a_min < a_max and points >= 2");
        }
        let c = &self.continuation;
        if !(c.eps0 > 0.0) || !(c.factor > 0.0 && c.factor < 1.0) || c.steps < 2 {
            bail!("continuation needs eps0 > 0, factor in (0, 1) and steps >= 2");
        }
        if !(c.cauchy_tol > 0.0) {
            bail!("cauchy_tol must be positive");
        }
        if self.sweep.lambdas.iter().any(|&l| !(l > 0.0)) {
            bail!("sweep lambdas must be positive");
        }
        if self.sweep.lambdas.windows(2).any(|w| w[1] < w[0]) {
            bail!("sweep lambdas must be ascending");
        }
        if self.sweep.mus.iter().any(|&m| !(m >= 0.0)) || self.sweep.mus.windows(2).any(|w| w[1] < w[0]) {
            bail!("sweep mus must be nonnegative and ascending");
        }
        if self.blowup.heights.iter().any(|&h| !(h > 0.0)) {
            bail!("blow-up heights must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::default();
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }

    #[test]
    fn partial_config_fills_defaults() {
        let cfg = RunConfig::parse("[problem]\nN = 2\np = 1.5\nq = 2\ndelta = 0.3\nlambda = 0.1\nR = 2\n").unwrap();
        assert_eq!(cfg.problem.dim(), 2);
        assert_eq!(cfg.continuation, ContinuationConfig::default());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = RunConfig::parse("[problem]\nN = 3\np = \n").unwrap_err();
        assert!(format!("{err:#}").contains("line 3"), "{err:#}");
        assert!(RunConfig::parse("[sweep]\nlambdas = [0.2, 0.1]\n").is_err());
        assert!(RunConfig::parse("[nonsense]\n").is_err());
    }
}
