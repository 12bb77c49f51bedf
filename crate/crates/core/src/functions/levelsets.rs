use crate::error::{Error, Result};
use crate::functions::DiscreteFunction;

/// Superlevel indicators `1_{f > t}` with quadrature weights that make the
/// layer-cake identity exact on the mesh.
pub struct LevelSetFamily {
    pub thresholds: Vec<f64>,
    /// Length of the value interval each threshold represents.
    pub weights: Vec<f64>,
    pub indicators: Vec<DiscreteFunction>,
}

/// Midpoint thresholds between consecutive distinct values of `f`, with the
/// interval lengths as weights. On this grid
/// `Σ_i weight_i |1_{E_{t_i}}(x) - 1_{E_{t_i}}(y)| = |f(x) - f(y)|` exactly.
pub fn value_grid(f: &DiscreteFunction) -> (Vec<f64>, Vec<f64>) {
    let mut values = f.values.clone();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut thresholds = Vec::new();
    let mut weights = Vec::new();
    for pair in values.windows(2) {
        thresholds.push(0.5 * (pair[0] + pair[1]));
        weights.push(pair[1] - pair[0]);
    }
    (thresholds, weights)
}

/// Indicator family of `{f > t}`. With `thresholds: None` the exact midpoint
/// grid of [`value_grid`] is used; custom thresholds must be ascending and
/// get midpoint-rule weights.
pub fn level_sets(f: &DiscreteFunction, thresholds: Option<&[f64]>) -> Result<LevelSetFamily> {
    let (thresholds, weights) = match thresholds {
        None => value_grid(f),
        Some(ts) => {
            if ts.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::Usage(
                    "custom thresholds must be strictly ascending".into(),
                ));
            }
            let weights = (0..ts.len())
                .map(|i| {
                    let lo = if i == 0 { ts[0] } else { 0.5 * (ts[i - 1] + ts[i]) };
                    let hi = if i + 1 == ts.len() {
                        ts[i]
                    } else {
                        0.5 * (ts[i] + ts[i + 1])
                    };
                    hi - lo
                })
                .collect();
            (ts.to_vec(), weights)
        }
    };
    let indicators = thresholds
        .iter()
        .map(|&t| f.map(|v| if v > t { 1.0 } else { 0.0 }))
        .collect();
    Ok(LevelSetFamily {
        thresholds,
        weights,
        indicators,
    })
}
