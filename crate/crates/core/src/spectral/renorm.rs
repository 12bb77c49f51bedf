use ndarray::{Array1, Array2};
use ndarray_linalg::Solve;

use crate::error::{Error, Result};
use crate::geometry::{dist, PairOrbits, Similitude};

/// Fixed point of the conductance renormalization map.
#[derive(Debug, Clone)]
pub struct BaseHarmonic {
    /// Conductance per boundary-pair orbit, normalized to max 1.
    pub pattern: Vec<f64>,
    /// Resistance scale factor: the level-1 network traces to the level-0
    /// network with conductances divided by this.
    pub rho: f64,
    pub iterations: usize,
    /// Largest deviation of a traced pair conductance from its orbit mean.
    pub orbit_deviation: f64,
}

pub(crate) struct LevelOneGraph {
    /// Laplacian-ready vertex count and cell corner ids: `corner_id[cell][b]`
    /// is the deduplicated vertex carrying cell `cell`'s image of boundary
    /// point `b`.
    pub(crate) corner_id: Vec<Vec<usize>>,
    /// Vertex ids of the boundary points themselves.
    pub(crate) boundary_id: Vec<usize>,
    pub(crate) n_vertices: usize,
}

pub(crate) fn level_one_graph(
    sims: &[Similitude],
    boundary: &[Vec<f64>],
) -> Result<LevelOneGraph> {
    let scale = boundary
        .iter()
        .flat_map(|p| boundary.iter().map(move |q| dist(p, q)))
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let tol = 1e-9 * scale;
    let mut vertices: Vec<Vec<f64>> = Vec::new();
    let mut intern = |p: Vec<f64>| -> usize {
        if let Some(i) = vertices.iter().position(|q| dist(q, &p) <= tol) {
            return i;
        }
        vertices.push(p);
        vertices.len() - 1
    };
    let corner_id: Vec<Vec<usize>> = sims
        .iter()
        .map(|s| boundary.iter().map(|q| intern(s.apply(q))).collect())
        .collect();
    let boundary_id: Vec<usize> = boundary.iter().map(|q| intern(q.clone())).collect();
    let n_vertices = vertices.len();
    for (b, &id) in boundary_id.iter().enumerate() {
        if !corner_id.iter().any(|cell| cell.contains(&id)) {
            return Err(Error::Renormalization(format!(
                "boundary point {b} is not a corner of any level-1 cell"
            )));
        }
    }
    Ok(LevelOneGraph {
        corner_id,
        boundary_id,
        n_vertices,
    })
}

/// Traces the level-1 network built from `pattern` onto the boundary and
/// returns (per-orbit conductances, largest in-orbit deviation).
fn trace_pattern(
    graph: &LevelOneGraph,
    orbits: &PairOrbits,
    pattern: &[f64],
) -> Result<(Vec<f64>, f64)> {
    let nb = orbits.n_points;
    let nv = graph.n_vertices;

    // Reorder: boundary vertices first.
    let mut order = vec![usize::MAX; nv];
    for (slot, &id) in graph.boundary_id.iter().enumerate() {
        order[id] = slot;
    }
    let mut next = nb;
    for slot in order.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }

    let mut lap = Array2::<f64>::zeros((nv, nv));
    for cell in &graph.corner_id {
        for a in 0..nb {
            for b in (a + 1)..nb {
                let c = pattern[orbits.orbit(a, b) as usize];
                let (i, j) = (order[cell[a]], order[cell[b]]);
                lap[[i, i]] += c;
                lap[[j, j]] += c;
                lap[[i, j]] -= c;
                lap[[j, i]] -= c;
            }
        }
    }

    let ni = nv - nb;
    let mut schur = lap.slice(ndarray::s![..nb, ..nb]).to_owned();
    if ni > 0 {
        let l_ii = lap.slice(ndarray::s![nb.., nb..]).to_owned();
        let l_ib = lap.slice(ndarray::s![nb.., ..nb]).to_owned();
        for b in 0..nb {
            let col = l_ib.column(b).to_owned();
            let x: Array1<f64> = l_ii.solve(&col).map_err(|e| {
                Error::Renormalization(format!("interior network solve failed: {e}"))
            })?;
            for a in 0..nb {
                let correction: f64 = l_ib.column(a).dot(&x);
                schur[[a, b]] -= correction;
            }
        }
    }

    let mut sums = vec![0.0_f64; orbits.n_orbits];
    let mut counts = vec![0usize; orbits.n_orbits];
    for a in 0..nb {
        for b in (a + 1)..nb {
            let o = orbits.orbit(a, b) as usize;
            sums[o] += -schur[[a, b]];
            counts[o] += 1;
        }
    }
    let means: Vec<f64> = sums
        .iter()
        .zip(&counts)
        .map(|(s, &c)| s / c as f64)
        .collect();
    let norm = means.iter().fold(0.0_f64, |m, &v| m.max(v.abs())).max(1e-300);
    let mut deviation = 0.0_f64;
    for a in 0..nb {
        for b in (a + 1)..nb {
            let o = orbits.orbit(a, b) as usize;
            deviation = deviation.max((-schur[[a, b]] - means[o]).abs() / norm);
        }
    }
    Ok((means, deviation))
}

/// Harmonic one-cell extension: matrix mapping boundary values to the values
/// on every level-1 graph vertex (boundary rows are the identity).
pub(crate) fn harmonic_extension_matrix(
    graph: &LevelOneGraph,
    orbits: &PairOrbits,
    pattern: &[f64],
) -> Result<Array2<f64>> {
    let nb = orbits.n_points;
    let nv = graph.n_vertices;
    let mut order = vec![usize::MAX; nv];
    for (slot, &id) in graph.boundary_id.iter().enumerate() {
        order[id] = slot;
    }
    let mut next = nb;
    for slot in order.iter_mut() {
        if *slot == usize::MAX {
            *slot = next;
            next += 1;
        }
    }
    let mut lap = Array2::<f64>::zeros((nv, nv));
    for cell in &graph.corner_id {
        for a in 0..nb {
            for b in (a + 1)..nb {
                let c = pattern[orbits.orbit(a, b) as usize];
                let (i, j) = (order[cell[a]], order[cell[b]]);
                lap[[i, i]] += c;
                lap[[j, j]] += c;
                lap[[i, j]] -= c;
                lap[[j, i]] -= c;
            }
        }
    }
    let mut ext = Array2::<f64>::zeros((nv, nb));
    for (b, &id) in graph.boundary_id.iter().enumerate() {
        ext[[id, b]] = 1.0;
    }
    let ni = nv - nb;
    if ni > 0 {
        let l_ii = lap.slice(ndarray::s![nb.., nb..]).to_owned();
        let l_ib = lap.slice(ndarray::s![nb.., ..nb]).to_owned();
        // Map reordered interior slots back to graph vertex ids.
        let mut back = vec![usize::MAX; nv];
        for (id, &slot) in order.iter().enumerate() {
            back[slot] = id;
        }
        for b in 0..nb {
            let rhs = l_ib.column(b).mapv(|v| -v);
            let x: Array1<f64> = l_ii.solve(&rhs).map_err(|e| {
                Error::Renormalization(format!(
                    "singular interior system in harmonic extension: {e}"
                ))
            })?;
            for (slot, &v) in x.iter().enumerate() {
                ext[[back[nb + slot], b]] = v;
            }
        }
    }
    Ok(ext)
}

/// Finds the conductance pattern and resistance factor by power iteration on
/// the trace map over orbit space.
pub fn renormalize_conductances(
    sims: &[Similitude],
    boundary: &[Vec<f64>],
    orbits: &PairOrbits,
) -> Result<BaseHarmonic> {
    let graph = level_one_graph(sims, boundary)?;
    let mut pattern = vec![1.0_f64; orbits.n_orbits];
    let tol = 1e-12;
    for it in 1..=500 {
        let (traced, deviation) = trace_pattern(&graph, orbits, &pattern)?;
        let reference = (0..pattern.len())
            .max_by(|&a, &b| pattern[a].total_cmp(&pattern[b]))
            .unwrap();
        if traced[reference] <= 0.0 {
            return Err(Error::Renormalization(
                "traced network lost its dominant conductance orbit".into(),
            ));
        }
        let rho = pattern[reference] / traced[reference];
        let drift = pattern
            .iter()
            .zip(&traced)
            .map(|(p, t)| (rho * t - p).abs())
            .fold(0.0_f64, f64::max);
        if drift <= tol {
            if deviation > 1e-10 {
                return Err(Error::Renormalization(format!(
                    "traced conductances are not orbit-symmetric (deviation {deviation:.3e})"
                )));
            }
            if rho <= 1.0 {
                return Err(Error::Renormalization(format!(
                    "resistance factor {rho:.6} is not above 1"
                )));
            }
            return Ok(BaseHarmonic {
                pattern,
                rho,
                iterations: it,
                orbit_deviation: deviation,
            });
        }
        let top = traced.iter().fold(0.0_f64, |m, &v| m.max(v));
        pattern = traced.iter().map(|&v| (v / top).max(0.0)).collect();
    }
    Err(Error::Renormalization(
        "conductance fixed point did not converge within 500 iterations".into(),
    ))
}
