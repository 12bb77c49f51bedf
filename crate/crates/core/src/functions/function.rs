use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::LevelMesh;
use crate::spectral::SpectralData;

/// A real-valued function sampled on the vertices of a mesh.
#[derive(Clone)]
pub struct DiscreteFunction {
    pub mesh: Arc<LevelMesh>,
    pub values: Vec<f64>,
}

impl DiscreteFunction {
    pub fn new(mesh: Arc<LevelMesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_vertices() {
            return Err(Error::MeshMismatch(format!(
                "{} values for a mesh with {} vertices",
                values.len(),
                mesh.n_vertices()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("function values must be finite".into()));
        }
        Ok(Self { mesh, values })
    }

    pub fn constant(mesh: Arc<LevelMesh>, c: f64) -> Self {
        let n = mesh.n_vertices();
        Self {
            mesh,
            values: vec![c; n],
        }
    }

    pub fn check_same_mesh(&self, other: &DiscreteFunction) -> Result<()> {
        if self.mesh.same_mesh(&other.mesh) {
            Ok(())
        } else {
            Err(Error::MeshMismatch(
                "operands live on different meshes".into(),
            ))
        }
    }

    /// Weighted mean over the whole mesh.
    pub fn mean(&self) -> f64 {
        let mass: f64 = self.mesh.weights.iter().sum();
        let total: f64 = self
            .values
            .iter()
            .zip(&self.mesh.weights)
            .map(|(v, w)| v * w)
            .sum();
        total / mass
    }

    /// Weighted mean over a vertex subset.
    pub fn mean_on(&self, ids: &[u32]) -> f64 {
        let mut mass = 0.0;
        let mut total = 0.0;
        for &id in ids {
            let w = self.mesh.weights[id as usize];
            mass += w;
            total += self.values[id as usize] * w;
        }
        total / mass
    }

    /// `(Σ |f|^p w)^{1/p}` over the whole mesh.
    pub fn lp_norm(&self, p: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.mesh.weights)
            .map(|(v, w)| v.abs().powf(p) * w)
            .sum::<f64>()
            .powf(1.0 / p)
    }

    /// `(Σ |f|^p w)^{1/p}` over a vertex subset.
    pub fn lp_norm_on(&self, ids: &[u32], p: f64) -> f64 {
        ids.iter()
            .map(|&id| self.values[id as usize].abs().powf(p) * self.mesh.weights[id as usize])
            .sum::<f64>()
            .powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().fold(f64::INFINITY, |m, &v| m.min(v))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    pub fn map(&self, op: impl Fn(f64) -> f64) -> Self {
        Self {
            mesh: self.mesh.clone(),
            values: self.values.iter().map(|&v| op(v)).collect(),
        }
    }

    pub fn zip(&self, other: &DiscreteFunction, op: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.check_same_mesh(other)?;
        Ok(Self {
            mesh: self.mesh.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        })
    }
}

/// Generators for the test-function suite.
#[derive(Debug, Clone)]
pub enum TestFunctionKind {
    /// Energy minimizer with the given essential-boundary values.
    Harmonic { boundary_values: Vec<f64> },
    /// The j-th eigenfunction; needs spectral data.
    Eigenfunction { j: usize },
    /// Indicator of a union of level-m cells (closed: junction vertices
    /// on the cell boundary are included).
    Indicator { m: usize, cells: Vec<u32> },
    /// Independent uniform value per level-m cell; a vertex takes the value
    /// of its lowest-index containing cell.
    RandomCellwise { m: usize, seed: u64 },
    /// The given coordinate axis.
    Coordinate { axis: usize },
    /// Lacunary sum of cellwise sign bumps, amplitude `L^{-m s}` at level m.
    /// Its modulus of continuity is `r^s`, so it witnesses sharpness of
    /// exponent-s smoothness estimates.
    Multiscale { s: f64, seed: u64 },
    /// `d(x, x0)^s` with `x0` the first essential boundary point. Near `x0`
    /// its oscillation at scale r is exactly `r^s`, an exponent witness free
    /// of sampling noise.
    DistancePower { s: f64 },
}

pub fn make_test_function(
    mesh: &Arc<LevelMesh>,
    kind: &TestFunctionKind,
    spectral: Option<&SpectralData>,
) -> Result<DiscreteFunction> {
    match kind {
        TestFunctionKind::Harmonic { boundary_values } => {
            crate::spectral::harmonic_extension(mesh, boundary_values)
        }
        TestFunctionKind::Eigenfunction { j } => {
            let sd = spectral.ok_or_else(|| {
                Error::Usage("eigenfunction test functions need spectral data".into())
            })?;
            sd.eigenfunction(*j)
        }
        TestFunctionKind::Indicator { m, cells } => {
            if *m > mesh.level {
                return Err(Error::Usage(format!(
                    "indicator level {m} above mesh level {}",
                    mesh.level
                )));
            }
            let n_cells = mesh.coarse(*m).cells.len();
            if cells.iter().any(|&c| c as usize >= n_cells) {
                return Err(Error::Usage("indicator cell index out of range".into()));
            }
            let mut values = vec![0.0; mesh.n_vertices()];
            for id in mesh.cell_vertices(*m, cells) {
                values[id as usize] = 1.0;
            }
            DiscreteFunction::new(mesh.clone(), values)
        }
        TestFunctionKind::RandomCellwise { m, seed } => {
            if *m > mesh.level {
                return Err(Error::Usage(format!(
                    "cellwise level {m} above mesh level {}",
                    mesh.level
                )));
            }
            let n_cells = mesh.coarse(*m).cells.len();
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let cell_values: Vec<f64> = (0..n_cells).map(|_| rng.gen::<f64>()).collect();
            let run = mesh.spec.mass_factor.pow((mesh.level - *m) as u32) as u32;
            let values: Vec<f64> = mesh
                .incidence
                .iter()
                .map(|inc| {
                    let lowest = inc.iter().map(|&s| s / run).min().unwrap();
                    cell_values[lowest as usize]
                })
                .collect();
            DiscreteFunction::new(mesh.clone(), values)
        }
        TestFunctionKind::Coordinate { axis } => {
            if *axis >= mesh.dim {
                return Err(Error::Usage(format!(
                    "coordinate axis {axis} out of range for dimension {}",
                    mesh.dim
                )));
            }
            let values: Vec<f64> = (0..mesh.n_vertices())
                .map(|id| mesh.vertex(id as u32)[*axis])
                .collect();
            DiscreteFunction::new(mesh.clone(), values)
        }
        TestFunctionKind::Multiscale { s, seed } => {
            if !(*s > 0.0) {
                return Err(Error::Usage("multiscale exponent must be positive".into()));
            }
            let l = mesh.spec.length_factor;
            let mut values = vec![0.0; mesh.n_vertices()];
            for m in 1..mesh.level {
                let amp = l.powf(-(m as f64) * s);
                let mut rng = ChaCha8Rng::seed_from_u64(
                    seed ^ (m as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15),
                );
                let mut taken = vec![false; mesh.n_vertices()];
                for c in 0..mesh.coarse(m).cells.len() as u32 {
                    let sign = if rng.gen::<bool>() { amp } else { -amp };
                    for id in mesh.cell_vertices(m, &[c]) {
                        if !taken[id as usize] {
                            taken[id as usize] = true;
                            values[id as usize] += sign;
                        }
                    }
                }
            }
            DiscreteFunction::new(mesh.clone(), values)
        }
        TestFunctionKind::DistancePower { s } => {
            if !(*s > 0.0) {
                return Err(Error::Usage("distance-power exponent must be positive".into()));
            }
            let x0 = mesh.coarse(0).cells[0].corner_ids[0];
            let base = mesh.vertex(x0).to_vec();
            let values: Vec<f64> = (0..mesh.n_vertices() as u32)
                .map(|id| crate::geometry::dist(&base, mesh.vertex(id)).powf(*s))
                .collect();
            DiscreteFunction::new(mesh.clone(), values)
        }
    }
}
