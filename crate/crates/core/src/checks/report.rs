use serde::Serialize;

use crate::error::{Error, Result};

/// RHS below this is treated as zero.
const RHS_ZERO: f64 = 1e-12;
/// LHS below this still counts as zero when the RHS vanishes.
const LHS_ZERO: f64 = 1e-9;

/// One evaluated inequality instance.
#[derive(Debug, Clone, Serialize)]
pub struct InstanceRecord {
    pub function: String,
    pub locus: String,
    /// Scale the instance lives at (radius, time, or L^-m); used to group
    /// instances for the stability criterion.
    pub scale: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// Least-squares fit of `log quantity` against `log scale`.
#[derive(Debug, Clone, Serialize)]
pub struct ExponentFit {
    /// (log scale, log quantity) after exclusions.
    pub samples: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
    pub target: f64,
    pub tolerance: f64,
    pub excluded: usize,
    pub pass: bool,
}

/// Fits a power law through `(scale, quantity)` samples. Nonpositive entries
/// are excluded; fewer than 3 surviving samples is an error.
pub fn fit_exponent(samples: &[(f64, f64)], target: f64, tolerance: f64) -> Result<ExponentFit> {
    let logs: Vec<(f64, f64)> = samples
        .iter()
        .filter(|&&(s, q)| s > 0.0 && q > 0.0)
        .map(|&(s, q)| (s.ln(), q.ln()))
        .collect();
    let excluded = samples.len() - logs.len();
    if logs.len() < 3 {
        return Err(Error::Fit(format!(
            "{} usable samples after excluding {excluded}; need at least 3",
            logs.len()
        )));
    }
    let n = logs.len() as f64;
    let sx: f64 = logs.iter().map(|s| s.0).sum();
    let sy: f64 = logs.iter().map(|s| s.1).sum();
    let sxx: f64 = logs.iter().map(|s| s.0 * s.0).sum();
    let sxy: f64 = logs.iter().map(|s| s.0 * s.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    Ok(ExponentFit {
        samples: logs,
        slope,
        intercept,
        target,
        tolerance,
        excluded,
        pass: (slope - target).abs() <= tolerance,
    })
}

/// Outcome of one inequality check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub instances: Vec<InstanceRecord>,
    /// Instances with LHS = RHS = 0, excluded from the statistics.
    pub degenerate_count: usize,
    /// Violations that contradict the inequality outright (RHS = 0 with
    /// LHS > 0, or a failed hard assertion).
    pub hard_failures: Vec<String>,
    pub max_ratio: f64,
    /// Max over scales of the per-scale max ratio, divided by the min.
    pub stability_factor: f64,
    pub stability_limit: f64,
    pub exponent_fit: Option<ExponentFit>,
    pub notes: Vec<String>,
    /// Whether this check asserts an exact inequality rather than measuring
    /// a constant.
    pub hard: bool,
    pub pass: bool,
}

impl CheckReport {
    pub fn new(id: &str, stability_limit: f64) -> Self {
        Self {
            id: id.to_string(),
            instances: Vec::new(),
            degenerate_count: 0,
            hard_failures: Vec::new(),
            max_ratio: 0.0,
            stability_factor: 1.0,
            stability_limit,
            exponent_fit: None,
            notes: Vec::new(),
            hard: false,
            pass: false,
        }
    }

    /// Records one instance. A vanishing RHS makes the instance degenerate
    /// when the LHS vanishes too, and a hard failure otherwise.
    pub fn push(&mut self, function: &str, locus: String, scale: f64, lhs: f64, rhs: f64) {
        if rhs < RHS_ZERO {
            if lhs < LHS_ZERO {
                self.degenerate_count += 1;
            } else {
                self.hard_failures.push(format!(
                    "{function} on {locus}: LHS {lhs:.6e} with vanishing RHS {rhs:.6e}"
                ));
                self.instances.push(InstanceRecord {
                    function: function.to_string(),
                    locus,
                    scale,
                    lhs,
                    rhs,
                    ratio: f64::INFINITY,
                });
            }
            return;
        }
        self.instances.push(InstanceRecord {
            function: function.to_string(),
            locus,
            scale,
            lhs,
            rhs,
            ratio: lhs / rhs,
        });
    }

    /// Computes the max ratio, the cross-scale stability factor, and the
    /// pass flag from the recorded instances.
    pub fn finalize(&mut self) {
        self.max_ratio = self
            .instances
            .iter()
            .map(|i| i.ratio)
            .filter(|r| r.is_finite())
            .fold(0.0, f64::max);

        let mut per_scale: Vec<(u64, f64)> = Vec::new();
        for inst in &self.instances {
            if !inst.ratio.is_finite() || inst.ratio <= 0.0 {
                continue;
            }
            let key = inst.scale.to_bits();
            match per_scale.iter_mut().find(|(k, _)| *k == key) {
                Some(entry) => entry.1 = entry.1.max(inst.ratio),
                None => per_scale.push((key, inst.ratio)),
            }
        }
        if per_scale.len() >= 2 {
            let max = per_scale.iter().map(|e| e.1).fold(0.0_f64, f64::max);
            let min = per_scale
                .iter()
                .map(|e| e.1)
                .fold(f64::INFINITY, f64::min);
            self.stability_factor = max / min;
        } else {
            self.stability_factor = 1.0;
        }

        self.pass = self.hard_failures.is_empty()
            && (self.hard
                || (self.stability_factor <= self.stability_limit
                    && self.exponent_fit.as_ref().map_or(true, |f| f.pass)));
    }
}
