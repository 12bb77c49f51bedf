use crate::error::{Error, Result};
use crate::functions::DiscreteFunction;

/// Ball average `f_s(x) = Σ_{y∈B(x,s)} f(y) w(y) / μ̂(B(x,s))`.
pub fn moving_average(f: &DiscreteFunction, s: f64) -> Result<DiscreteFunction> {
    if !(s > 0.0) {
        return Err(Error::Domain("averaging radius must be positive".into()));
    }
    let mesh = &f.mesh;
    let values: Vec<f64> = (0..mesh.n_vertices() as u32)
        .map(|x| {
            let mut mass = 0.0;
            let mut total = 0.0;
            for y in mesh.ball_query(mesh.vertex(x), s) {
                let w = mesh.weights[y as usize];
                mass += w;
                total += f.values[y as usize] * w;
            }
            total / mass
        })
        .collect();
    DiscreteFunction::new(mesh.clone(), values)
}
