use crate::error::{Error, Result};
use crate::functions::DiscreteFunction;
use crate::spectral::{heat_kernel, resolvable_window, SpectralData};

/// Heat-semigroup Besov seminorm:
/// `sup_t t^{-α} (∬ p_t(x,y) |f(x)-f(y)|^p dμ dμ)^{1/p}` over the grid.
pub fn besov_seminorm(
    f: &DiscreteFunction,
    p: f64,
    alpha: f64,
    sd: &SpectralData,
    t_grid: &[f64],
) -> Result<f64> {
    if p < 1.0 {
        return Err(Error::Unsupported(format!("Besov exponent {p} below 1")));
    }
    if !sd.mesh.same_mesh(&f.mesh) {
        return Err(Error::MeshMismatch(
            "function does not live on the spectral mesh".into(),
        ));
    }
    if t_grid.is_empty() {
        return Err(Error::Usage("empty time grid".into()));
    }
    let (lo, hi) = resolvable_window(sd);
    for &t in t_grid {
        if t < lo || t > hi {
            return Err(Error::Resolution(format!(
                "time {t:.3e} outside the resolvable window [{lo:.3e}, {hi:.3e}]"
            )));
        }
    }
    let mesh = &f.mesh;
    let nv = mesh.n_vertices();
    let mut sup = 0.0_f64;
    for &t in t_grid {
        let slice = heat_kernel(sd, t)?;
        let mut total = 0.0;
        for x in 0..nv {
            let fx = f.values[x];
            let wx = mesh.weights[x];
            let mut inner = 0.0;
            for y in 0..nv {
                let kernel = slice.values[[x, y]].max(0.0);
                inner += kernel * (fx - f.values[y]).abs().powf(p) * mesh.weights[y];
            }
            total += wx * inner;
        }
        let value = t.powf(-alpha) * total.powf(1.0 / p);
        if value > sup {
            sup = value;
        }
    }
    Ok(sup)
}
