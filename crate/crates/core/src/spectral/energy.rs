use std::sync::Arc;

use ndarray::Array2;

use crate::error::Result;
use crate::functions::DiscreteFunction;
use crate::geometry::LevelMesh;

/// The renormalized Dirichlet energy at the mesh level: every intra-cell
/// boundary pair carries its orbit conductance scaled by the resistance
/// factor per level.
pub struct EnergyForm {
    pub mesh: Arc<LevelMesh>,
    /// Conductance per mesh edge (aligned with `mesh.edges`).
    pub conductances: Vec<f64>,
}

impl EnergyForm {
    pub fn new(mesh: Arc<LevelMesh>) -> Self {
        let spec = &mesh.spec;
        let level_gain = spec
            .resistance_factor
            .powi(mesh.level as i32 - mesh.truncation as i32);
        let conductances = mesh
            .edges
            .iter()
            .map(|e| level_gain * spec.conductance_pattern[e.orbit as usize])
            .collect();
        Self { mesh, conductances }
    }

    /// The quadratic form value.
    pub fn energy(&self, f: &DiscreteFunction) -> Result<f64> {
        self.check_mesh(f)?;
        Ok(self.energy_values(&f.values))
    }

    pub fn energy_values(&self, values: &[f64]) -> f64 {
        self.mesh
            .edges
            .iter()
            .zip(&self.conductances)
            .map(|(e, &c)| {
                let d = values[e.u as usize] - values[e.v as usize];
                c * d * d
            })
            .sum()
    }

    fn check_mesh(&self, f: &DiscreteFunction) -> Result<()> {
        if self.mesh.same_mesh(&f.mesh) {
            Ok(())
        } else {
            Err(crate::error::Error::MeshMismatch(
                "function does not live on the form's mesh".into(),
            ))
        }
    }

    /// Stiffness matvec: `out = A f` with `A_uv = -c_uv`, `A_uu = Σ_v c_uv`.
    pub fn apply_stiffness(&self, f: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (e, &c) in self.mesh.edges.iter().zip(&self.conductances) {
            let d = c * (f[e.u as usize] - f[e.v as usize]);
            out[e.u as usize] += d;
            out[e.v as usize] -= d;
        }
    }

    pub fn dense_stiffness(&self) -> Array2<f64> {
        let n = self.mesh.n_vertices();
        let mut a = Array2::zeros((n, n));
        for (e, &c) in self.mesh.edges.iter().zip(&self.conductances) {
            let (u, v) = (e.u as usize, e.v as usize);
            a[[u, u]] += c;
            a[[v, v]] += c;
            a[[u, v]] -= c;
            a[[v, u]] -= c;
        }
        a
    }
}
