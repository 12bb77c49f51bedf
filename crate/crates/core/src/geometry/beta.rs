use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geometry::{dist, FractalSpec, LevelMesh, MeshBudget};

/// Measured cell-separation constant: disjoint subcells of adjacent level-n
/// cells stay at distance at least `beta * L^{-n}`.
#[derive(Debug, Clone)]
pub struct BetaEstimate {
    pub beta: f64,
    /// (probed level, rescaled minimum distance) per probe.
    pub per_level: Vec<(usize, f64)>,
    /// Ball-to-star covering constant `3 L / beta`.
    pub big_a: f64,
}

/// Estimates the separation constant by exhaustive pairwise subcell distance
/// minimization at each probed level.
pub fn separation_beta(spec: &Arc<FractalSpec>, probe_levels: &[usize]) -> Result<BetaEstimate> {
    if probe_levels.len() < 2 {
        return Err(Error::Usage(
            "need at least two probe levels for the separation estimate".into(),
        ));
    }
    if probe_levels.iter().any(|&n| n < 1) {
        return Err(Error::Usage("probe levels start at 1".into()));
    }
    let budget = MeshBudget::default();
    let m = spec.mass_factor;
    let mut per_level = Vec::new();
    for &n in probe_levels {
        if m.checked_pow(n as u32 + 2)
            .map_or(true, |c| c > budget.max_simplices)
        {
            continue;
        }
        let mesh = LevelMesh::build(spec.clone(), n + 2, 0, &budget)?;
        // Vertex samples of every level-(n+1) subcell.
        let n_sub = m.pow(n as u32 + 1);
        let sub_verts: Vec<Vec<u32>> = (0..n_sub as u32)
            .map(|s| mesh.cell_vertices(n + 1, &[s]))
            .collect();
        let coarse = mesh.coarse(n);
        let mut best = f64::INFINITY;
        for (a, nbrs) in coarse.neighbors.iter().enumerate() {
            for &bcell in nbrs {
                let b = bcell as usize;
                if b <= a {
                    continue;
                }
                for sa in (a * m)..(a * m + m) {
                    for sb in (b * m)..(b * m + m) {
                        let (va, vb) = (&sub_verts[sa], &sub_verts[sb]);
                        if va.iter().any(|id| vb.binary_search(id).is_ok()) {
                            continue;
                        }
                        for &i in va {
                            let p = mesh.vertex(i);
                            for &j in vb {
                                let d = dist(p, mesh.vertex(j));
                                if d < best {
                                    best = d;
                                }
                            }
                        }
                    }
                }
            }
        }
        if best.is_finite() {
            per_level.push((n, spec.length_factor.powi(n as i32) * best));
        }
    }
    if per_level.is_empty() {
        return Err(Error::Budget {
            stage: "separation_beta",
            detail: "every probe level exceeds the mesh budget".into(),
        });
    }
    let beta = per_level
        .iter()
        .map(|&(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    if beta <= 1e-9 {
        return Err(Error::InvalidSpec(format!(
            "degenerate separation: measured constant {beta:.3e}"
        )));
    }
    if beta >= 1.0 {
        return Err(Error::InvalidSpec(format!(
            "separation constant {beta:.6} not below 1"
        )));
    }
    Ok(BetaEstimate {
        beta,
        per_level,
        big_a: 3.0 * spec.length_factor / beta,
    })
}
