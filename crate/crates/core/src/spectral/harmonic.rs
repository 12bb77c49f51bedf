use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functions::DiscreteFunction;
use crate::geometry::LevelMesh;
use crate::spectral::renorm;

/// The energy minimizer with the given essential-boundary values, computed by
/// recursive one-cell extension: the level-1 interior system is solved once
/// and its extension matrix is pushed down cell by cell.
pub fn harmonic_extension(
    mesh: &Arc<LevelMesh>,
    boundary_values: &[f64],
) -> Result<DiscreteFunction> {
    let spec = &mesh.spec;
    let b = spec.boundary_len();
    if boundary_values.len() != b {
        return Err(Error::Usage(format!(
            "{} boundary values for {} essential boundary points",
            boundary_values.len(),
            b
        )));
    }
    if boundary_values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("boundary values must be finite".into()));
    }
    let graph = renorm::level_one_graph(&spec.similitudes, &spec.boundary)?;
    let ext = renorm::harmonic_extension_matrix(&graph, &spec.orbits, &spec.conductance_pattern)?;

    let m = spec.mass_factor;
    let mut values = vec![0.0; mesh.n_vertices()];
    for (bi, &id) in mesh.coarse(0).cells[0].corner_ids.iter().enumerate() {
        values[id as usize] = boundary_values[bi];
    }
    let mut parent_vals = vec![0.0; b];
    for l in 0..mesh.level {
        let parents = &mesh.coarse(l).cells;
        let children = &mesh.coarse(l + 1).cells;
        for (cp, parent) in parents.iter().enumerate() {
            for (bi, &id) in parent.corner_ids.iter().enumerate() {
                parent_vals[bi] = values[id as usize];
            }
            for i in 0..m {
                let child = &children[cp * m + i];
                for (bi, &id) in child.corner_ids.iter().enumerate() {
                    let g = graph.corner_id[i][bi];
                    let mut acc = 0.0;
                    for (bj, &pv) in parent_vals.iter().enumerate() {
                        acc += ext[[g, bj]] * pv;
                    }
                    values[id as usize] = acc;
                }
            }
        }
    }
    DiscreteFunction::new(mesh.clone(), values)
}
