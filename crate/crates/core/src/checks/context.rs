use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checks::{BallLocus, CheckConfig, SuiteFunction};
use crate::error::{Error, Result};
use crate::functions::{make_test_function, DiscreteFunction, TestFunctionKind};
use crate::geometry::{separation_beta, BetaEstimate, FractalSpec, LevelMesh, MeshBudget};
use crate::geometry::build_spec;
use crate::spectral::{spectral_decompose, EnergyForm, SpectralData};

const DENSE_LIMIT: usize = 4_000;

/// Everything the checks share: mesh, separation constant, spectrum (when
/// the mesh is small enough for a dense decomposition) and the materialized
/// test-function suite.
pub struct LabContext {
    pub config: CheckConfig,
    pub spec: Arc<FractalSpec>,
    pub mesh: Arc<LevelMesh>,
    pub beta: BetaEstimate,
    pub spectral: Option<SpectralData>,
    pub suite: Vec<(String, DiscreteFunction)>,
}

impl LabContext {
    pub fn build(config: CheckConfig) -> Result<Self> {
        config.validate()?;
        let spec = Arc::new(build_spec(&config.spec_name)?);
        let budget = MeshBudget {
            max_simplices: config.max_simplices,
        };
        let mesh = Arc::new(LevelMesh::build(
            spec,
            config.level,
            config.truncation,
            &budget,
        )?);
        Self::with_mesh(config, mesh)
    }

    /// Builds on an existing mesh so several contexts (for different p, say)
    /// share its cached neighbor tables. The mesh must match the config.
    pub fn with_mesh(config: CheckConfig, mesh: Arc<LevelMesh>) -> Result<Self> {
        config.validate()?;
        if mesh.spec.name != config.spec_name
            || mesh.level != config.level
            || mesh.truncation != config.truncation
        {
            return Err(Error::Usage(format!(
                "mesh ({}, level {}, truncation {}) does not match the check config",
                mesh.spec.name, mesh.level, mesh.truncation
            )));
        }
        let spec = mesh.spec.clone();
        let beta = separation_beta(&spec, &[1, 2])?;
        let spectral = if config.with_spectral && mesh.n_vertices() <= DENSE_LIMIT {
            Some(spectral_decompose(&EnergyForm::new(mesh.clone()), None)?)
        } else {
            None
        };

        let wanted = if config.suite.is_empty() {
            default_suite(&spec, config.seed, config.p)
        } else {
            config.suite.clone()
        };
        let mut suite = Vec::new();
        for sf in &wanted {
            if matches!(sf.kind, TestFunctionKind::Eigenfunction { .. }) && spectral.is_none() {
                continue;
            }
            let f = make_test_function(&mesh, &sf.kind, spectral.as_ref())?;
            suite.push((sf.id.clone(), f));
        }
        if suite.is_empty() {
            return Err(Error::Usage("empty test-function suite".into()));
        }
        Ok(Self {
            config,
            spec,
            mesh,
            beta,
            spectral,
            suite,
        })
    }

    pub fn big_a(&self) -> f64 {
        self.config.big_a.unwrap_or(self.beta.big_a)
    }

    pub fn is_vicsek(&self) -> bool {
        self.spec.name.starts_with("vicsek")
    }

    pub fn spectral(&self) -> Result<&SpectralData> {
        self.spectral.as_ref().ok_or_else(|| {
            Error::Unsupported(format!(
                "this check needs a dense spectral decomposition; the mesh has {} vertices \
                 (limit {DENSE_LIMIT})",
                self.mesh.n_vertices()
            ))
        })
    }

    /// Ball radius at level j: `beta L^{t-j}`.
    pub fn radius(&self, j: usize) -> f64 {
        let l = self.spec.length_factor;
        self.beta.beta * l.powi(self.mesh.truncation as i32 - j as i32)
    }

    /// Simplex scale at level m: `L^{t-m}`.
    pub fn cell_scale(&self, m: usize) -> f64 {
        self.spec
            .length_factor
            .powi(self.mesh.truncation as i32 - m as i32)
    }

    /// Deterministic sample of level-m cell ids.
    pub fn sampled_cells(&self, m: usize) -> Vec<u32> {
        let n_cells = self.mesh.coarse(m).cells.len() as u32;
        let count = self.config.cells_per_level;
        if count as u32 >= n_cells {
            return (0..n_cells).collect();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ (m as u64).wrapping_mul(0x9e37));
        let mut all: Vec<u32> = (0..n_cells).collect();
        all.shuffle(&mut rng);
        let mut picked: Vec<u32> = all.into_iter().take(count).collect();
        picked.sort_unstable();
        picked
    }

    /// Ball centers: junction vertices first, then random plain vertices.
    pub fn ball_centers(&self) -> Vec<BallLocus> {
        let mesh = &self.mesh;
        let mut junctions: Vec<u32> = (0..mesh.n_vertices() as u32)
            .filter(|&id| mesh.incidence[id as usize].len() > 1)
            .collect();
        let mut plain: Vec<u32> = (0..mesh.n_vertices() as u32)
            .filter(|&id| mesh.incidence[id as usize].len() == 1)
            .collect();
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed ^ 0xba11);
        junctions.shuffle(&mut rng);
        plain.shuffle(&mut rng);
        let half = self.config.n_ball_centers.div_ceil(2);
        let mut out = Vec::new();
        for &id in junctions.iter().take(half) {
            out.push(BallLocus {
                label: format!("junction:{id}"),
                center: mesh.vertex(id).to_vec(),
            });
        }
        for &id in plain.iter().take(self.config.n_ball_centers - out.len()) {
            out.push(BallLocus {
                label: format!("vertex:{id}"),
                center: mesh.vertex(id).to_vec(),
            });
        }
        out
    }

    /// The function used for exponent fits: the first harmonic suite entry,
    /// or the first entry.
    pub fn fit_function(&self) -> &(String, DiscreteFunction) {
        self.suite
            .iter()
            .find(|(id, _)| id.starts_with("harmonic"))
            .unwrap_or(&self.suite[0])
    }

    /// Fit function for a specific target exponent: the sharpness witness
    /// with that id when present, the generic fit function otherwise.
    pub fn fit_function_for(&self, id: &str) -> &(String, DiscreteFunction) {
        self.suite
            .iter()
            .find(|(fid, _)| fid == id)
            .unwrap_or_else(|| self.fit_function())
    }
}

/// Variation estimate, or `None` when no ladder rung resolves on the locus.
pub(crate) fn try_variation(
    f: &DiscreteFunction,
    set: &[u32],
    p: f64,
    kind: crate::functions::VariationKind,
    beta: f64,
    min_k: usize,
) -> Result<Option<f64>> {
    match crate::functions::variation(f, set, p, kind, beta, min_k) {
        Ok(profile) => Ok(Some(profile.estimate)),
        Err(Error::Resolution(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// `(Σ_{ids} |f - mean_ids f|^p w)^{1/p}`.
pub(crate) fn lp_deviation(f: &DiscreteFunction, ids: &[u32], p: f64) -> f64 {
    let mean = f.mean_on(ids);
    ids.iter()
        .map(|&id| {
            (f.values[id as usize] - mean).abs().powf(p) * f.mesh.weights[id as usize]
        })
        .sum::<f64>()
        .powf(1.0 / p)
}

/// `max_{x,y in ids} |f(x) - f(y)|`.
pub(crate) fn oscillation(f: &DiscreteFunction, ids: &[u32]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &id in ids {
        let v = f.values[id as usize];
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if hi >= lo {
        hi - lo
    } else {
        0.0
    }
}

fn default_suite(spec: &FractalSpec, seed: u64, p: f64) -> Vec<SuiteFunction> {
    let mut boundary_values = vec![0.0; spec.boundary_len()];
    boundary_values[0] = 1.0;
    let mut suite = vec![
        SuiteFunction {
            id: "harmonic".into(),
            kind: TestFunctionKind::Harmonic { boundary_values },
        },
        SuiteFunction {
            id: "indicator-c0".into(),
            kind: TestFunctionKind::Indicator {
                m: 1,
                cells: vec![0],
            },
        },
        SuiteFunction {
            id: "random-a".into(),
            kind: TestFunctionKind::RandomCellwise { m: 2, seed },
        },
        SuiteFunction {
            id: "random-b".into(),
            kind: TestFunctionKind::RandomCellwise { m: 2, seed: seed + 1 },
        },
        SuiteFunction {
            id: "eigen-1".into(),
            kind: TestFunctionKind::Eigenfunction { j: 1 },
        },
    ];
    // Sharpness witnesses: distance powers whose modulus of continuity sits
    // exactly at the critical exponent of the estimate under test.
    suite.push(SuiteFunction {
        id: "witness-poincare".into(),
        kind: TestFunctionKind::DistancePower {
            s: spec.alpha(p) * spec.d_w,
        },
    });
    let osc_exponent = (spec.d_w - spec.d_h) * (1.0 - 1.0 / p);
    if osc_exponent > 0.0 {
        suite.push(SuiteFunction {
            id: "witness-morrey".into(),
            kind: TestFunctionKind::DistancePower { s: osc_exponent },
        });
    }
    suite
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_with_defaults() {
        let ctx = LabContext::build(CheckConfig::new("sg", 3, 2.0)).unwrap();
        assert!(ctx.spectral.is_some());
        assert_eq!(ctx.suite.len(), 7);
        assert!(ctx.fit_function_for("witness-poincare").0 == "witness-poincare");
        assert!(ctx.big_a() > 1.0);
        let centers = ctx.ball_centers();
        assert_eq!(centers.len(), ctx.config.n_ball_centers);
        assert!(centers.iter().any(|c| c.label.starts_with("junction")));
    }

    #[test]
    fn sampled_cells_are_deterministic_and_sorted() {
        let ctx = LabContext::build(CheckConfig::new("vicsek", 3, 1.5)).unwrap();
        let a = ctx.sampled_cells(2);
        let b = ctx.sampled_cells(2);
        assert_eq!(a, b);
        assert!(a.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(a.len(), ctx.config.cells_per_level);
    }
}
