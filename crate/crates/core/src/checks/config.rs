use serde::Serialize;

use crate::error::{Error, Result};
use crate::functions::TestFunctionKind;

/// A named test function of the suite.
#[derive(Debug, Clone)]
pub struct SuiteFunction {
    pub id: String,
    pub kind: TestFunctionKind,
}

/// A ball center with a provenance label.
#[derive(Debug, Clone, Serialize)]
pub struct BallLocus {
    pub label: String,
    pub center: Vec<f64>,
}

/// Shared configuration of the inequality checks. Every check is
/// deterministic given this value.
#[derive(Debug, Clone)]
pub struct CheckConfig {
    pub spec_name: String,
    pub level: usize,
    pub truncation: usize,
    pub p: f64,
    /// Empty means the default suite for the spec.
    pub suite: Vec<SuiteFunction>,
    /// Cell levels m for simplex/star loci.
    pub coarse_levels: Vec<usize>,
    /// Radius levels j, giving ball radii `beta L^{-j}`.
    pub radius_levels: Vec<usize>,
    /// Cells sampled per coarse level.
    pub cells_per_level: usize,
    pub n_ball_centers: usize,
    /// Random vertex pairs per function in the pointwise checks.
    pub n_pairs: usize,
    pub exponent_tol: f64,
    pub stability_limit: f64,
    /// Limit on max-ratio growth when the pair sample is doubled.
    pub pair_doubling_limit: f64,
    /// Ball enlargement factor; measured as `3 L / beta` when unset.
    pub big_a: Option<f64>,
    pub seed: u64,
    pub max_simplices: usize,
    /// Compute the dense spectrum when the mesh is small enough.
    pub with_spectral: bool,
}

impl CheckConfig {
    pub fn new(spec_name: &str, level: usize, p: f64) -> Self {
        Self {
            spec_name: spec_name.to_string(),
            level,
            truncation: 0,
            p,
            suite: Vec::new(),
            coarse_levels: (1..4).filter(|&m| m < level).collect(),
            radius_levels: (1..4).filter(|&j| j < level).collect(),
            cells_per_level: 3,
            n_ball_centers: 4,
            n_pairs: 1000,
            exponent_tol: 0.15,
            stability_limit: 3.0,
            pair_doubling_limit: 1.5,
            big_a: None,
            seed: 7,
            max_simplices: 16_000,
            with_spectral: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(1.0..=2.0).contains(&self.p) {
            return Err(Error::Usage(format!("exponent {} outside [1, 2]", self.p)));
        }
        if self.level < 2 {
            return Err(Error::Usage("checks need mesh level at least 2".into()));
        }
        if let Some(a) = self.big_a {
            if a <= 1.0 {
                return Err(Error::Usage(format!(
                    "ball enlargement factor {a} must exceed 1"
                )));
            }
        }
        if self.coarse_levels.iter().any(|&m| m == 0 || m >= self.level) {
            return Err(Error::Resolution(format!(
                "coarse levels must lie in 1..{}",
                self.level
            )));
        }
        if self.radius_levels.iter().any(|&j| j == 0 || j >= self.level) {
            return Err(Error::Resolution(format!(
                "radius levels must lie in 1..{}",
                self.level
            )));
        }
        if self.cells_per_level == 0 || self.n_ball_centers == 0 || self.n_pairs == 0 {
            return Err(Error::Usage("sample counts must be positive".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        CheckConfig::new("sg", 5, 2.0).validate().unwrap();
    }

    #[test]
    fn bad_values_rejected() {
        assert!(CheckConfig::new("sg", 5, 2.5).validate().is_err());
        assert!(CheckConfig::new("sg", 1, 2.0).validate().is_err());
        let mut c = CheckConfig::new("sg", 5, 2.0);
        c.big_a = Some(0.5);
        assert!(c.validate().is_err());
        let mut c = CheckConfig::new("sg", 3, 2.0);
        c.radius_levels = vec![3];
        assert!(c.validate().is_err());
    }
}
