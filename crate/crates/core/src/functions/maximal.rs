use crate::error::{Error, Result};
use crate::functions::{variation::vertex_spacing, DiscreteFunction};

/// The fractal maximal function: per vertex, the largest normalized variation
/// over the dyadic radius grid.
pub struct MaximalField {
    pub values: Vec<f64>,
    pub radii: Vec<f64>,
}

/// `g(x) = max_j μ̂(B(x,r_j))^{-1/p} · Var-estimate of f along B(x,r_j)`,
/// with `r_j = beta L^{-j}` for the requested levels; level 0 stands for the
/// global ball of radius diam(K), so the sup sees every pair. The variation
/// estimate per ball is the minimum normalized KS value over scales `k ≥ j`.
pub fn maximal_function(
    f: &DiscreteFunction,
    p: f64,
    radius_levels: &[usize],
    beta: f64,
) -> Result<MaximalField> {
    if !(1.0..=2.0).contains(&p) {
        return Err(Error::Unsupported(format!(
            "maximal-function exponent {p} outside [1, 2]"
        )));
    }
    if !(beta > 0.0) {
        return Err(Error::Usage("separation constant must be positive".into()));
    }
    let mesh = &f.mesh;
    let spec = &mesh.spec;
    if radius_levels.is_empty() {
        return Err(Error::Usage("empty radius grid".into()));
    }
    if radius_levels.iter().any(|&j| j >= mesh.level) {
        return Err(Error::Resolution(format!(
            "radius levels must lie below the mesh level {}",
            mesh.level
        )));
    }
    let scale_len = spec.length_factor.powi(mesh.truncation as i32);
    let one_var = p == 1.0;
    let alpha = spec.alpha(p);
    let radii: Vec<f64> = radius_levels
        .iter()
        .map(|&j| {
            if j == 0 {
                spec.diameter * scale_len
            } else {
                beta * scale_len * spec.length_factor.powi(-(j as i32))
            }
        })
        .collect();

    let spacing = vertex_spacing(mesh);
    let nv = mesh.n_vertices();
    let min_rung = radius_levels.iter().map(|&j| j.max(1)).min().unwrap();

    // One neighbor table per ladder rung, shared by every center (and, via
    // the mesh cache, by later calls on the same mesh): the inner double
    // sums revisit the same balls for every x, so querying the grid per
    // member would repeat the same work thousands of times over.
    let mut rung_r = vec![0.0_f64; mesh.level];
    let mut tables: Vec<Option<std::sync::Arc<crate::geometry::NeighborTable>>> =
        vec![None; mesh.level];
    for k in min_rung..mesh.level {
        let rk = beta * scale_len * spec.length_factor.powi(-(k as i32));
        rung_r[k] = rk;
        tables[k] = Some(mesh.neighbor_table(rk));
    }

    let pw = |d: f64| -> f64 {
        if p == 2.0 {
            d * d
        } else if p == 1.0 {
            d
        } else {
            d.powf(p)
        }
    };
    // Min over resolvable rungs k >= j of the normalized KS double sum
    // restricted to `ball`; `member` is None for the global ball.
    let ball_estimate = |ball: &[u32], member: Option<&[bool]>, j: usize| -> f64 {
        let mut est = f64::INFINITY;
        for k in j.max(1)..mesh.level {
            if rung_r[k] + 1e-12 < spacing {
                continue;
            }
            let table = tables[k].as_ref().unwrap();
            let mut raw = 0.0;
            for &a in ball {
                let fa = f.values[a as usize];
                let mut inner = 0.0;
                for &b in &table.lists[a as usize] {
                    if member.map_or(true, |m| m[b as usize]) {
                        inner += pw((fa - f.values[b as usize]).abs())
                            * mesh.weights[b as usize];
                    }
                }
                let wa = mesh.weights[a as usize];
                raw += if one_var {
                    wa * inner
                } else {
                    wa * inner / table.masses[a as usize]
                };
            }
            let normalized = if one_var {
                rung_r[k].powf(-2.0 * spec.d_h) * raw
            } else {
                rung_r[k].powf(-alpha * spec.d_w) * raw.powf(1.0 / p)
            };
            if normalized < est {
                est = normalized;
            }
        }
        est
    };

    // The level-0 ball is the whole set for every center; compute it once.
    let global = if radius_levels.contains(&0) {
        let all: Vec<u32> = (0..nv as u32).collect();
        let mass: f64 = mesh.weights.iter().sum();
        let est = ball_estimate(&all, None, 0);
        if est.is_finite() {
            mass.powf(-1.0 / p) * est
        } else {
            0.0
        }
    } else {
        0.0
    };

    let mut member = vec![false; nv];
    let mut values = Vec::with_capacity(nv);
    for x in 0..nv as u32 {
        let mut g = global;
        for &j in radius_levels {
            if j == 0 {
                continue;
            }
            // The j-ball around x is exactly the rung-j neighbor list.
            let table_j = tables[j].as_ref().unwrap();
            let ball = &table_j.lists[x as usize];
            for &id in ball {
                member[id as usize] = true;
            }
            let mass = table_j.masses[x as usize];
            let est = ball_estimate(ball, Some(&member), j);
            for &id in ball {
                member[id as usize] = false;
            }
            if !est.is_finite() {
                continue;
            }
            let candidate = mass.powf(-1.0 / p) * est;
            if candidate > g {
                g = candidate;
            }
        }
        values.push(g);
    }
    Ok(MaximalField { values, radii })
}
