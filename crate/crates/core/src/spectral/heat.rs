use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::functions::DiscreteFunction;
use crate::spectral::SpectralData;

const DENSE_LIMIT: usize = 4_000;

/// The heat kernel at one time, as a full matrix over mesh vertices.
pub struct HeatKernelSlice {
    pub t: f64,
    pub values: Array2<f64>,
}

fn require_full(sd: &SpectralData, what: &str) -> Result<()> {
    if sd.full {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{what} needs the full spectrum; this decomposition is partial"
        )))
    }
}

pub fn heat_kernel(sd: &SpectralData, t: f64) -> Result<HeatKernelSlice> {
    if t <= 0.0 {
        return Err(Error::Domain("heat kernel time must be positive".into()));
    }
    require_full(sd, "the heat kernel matrix")?;
    let nv = sd.mesh.n_vertices();
    if nv > DENSE_LIMIT {
        return Err(Error::Budget {
            stage: "heat_kernel",
            detail: format!("{nv} vertices exceed the dense limit {DENSE_LIMIT}"),
        });
    }
    let mut damped = sd.eigenfunctions.clone();
    for (j, mut col) in damped.columns_mut().into_iter().enumerate() {
        let factor = (-sd.eigenvalues[j] * t).exp();
        col.mapv_inplace(|v| v * factor);
    }
    let values = damped.dot(&sd.eigenfunctions.t());
    Ok(HeatKernelSlice { t, values })
}

/// One row `p_t(x, ·)` without forming the matrix.
pub fn heat_kernel_row(sd: &SpectralData, t: f64, x: u32) -> Result<Vec<f64>> {
    if t <= 0.0 {
        return Err(Error::Domain("heat kernel time must be positive".into()));
    }
    require_full(sd, "heat kernel rows")?;
    let k = sd.count();
    let mut coeff = Array1::<f64>::zeros(k);
    for j in 0..k {
        coeff[j] = (-sd.eigenvalues[j] * t).exp() * sd.eigenfunctions[[x as usize, j]];
    }
    Ok(sd.eigenfunctions.dot(&coeff).to_vec())
}

pub fn heat_kernel_diag(sd: &SpectralData, t: f64, x: u32) -> Result<f64> {
    if t <= 0.0 {
        return Err(Error::Domain("heat kernel time must be positive".into()));
    }
    require_full(sd, "heat kernel values")?;
    Ok((0..sd.count())
        .map(|j| {
            let phi = sd.eigenfunctions[[x as usize, j]];
            (-sd.eigenvalues[j] * t).exp() * phi * phi
        })
        .sum())
}

/// Applies the heat semigroup: `P_t f = Σ_j e^{-λ_j t} <f, φ_j>_w φ_j`.
pub fn semigroup_apply(sd: &SpectralData, f: &DiscreteFunction, t: f64) -> Result<DiscreteFunction> {
    if t <= 0.0 {
        return Err(Error::Domain("semigroup time must be positive".into()));
    }
    require_full(sd, "the semigroup")?;
    let mut coeff = Array1::from_vec(sd.coefficients(f)?);
    for (j, c) in coeff.iter_mut().enumerate() {
        *c *= (-sd.eigenvalues[j] * t).exp();
    }
    DiscreteFunction::new(sd.mesh.clone(), sd.eigenfunctions.dot(&coeff).to_vec())
}

/// Mesh-resolvable time window `[10 / λ_max, 0.1]`.
pub fn resolvable_window(sd: &SpectralData) -> (f64, f64) {
    (10.0 / sd.lambda_max(), 0.1)
}

/// On-diagonal decay fit and pointwise smoothing ratios over a time grid.
pub struct HeatAsymptotics {
    pub times: Vec<f64>,
    pub diag_values: Vec<f64>,
    /// Fitted slope of `log p_t(x,x)` against `log t`.
    pub slope: f64,
    /// `-d_h / d_w`.
    pub target_slope: f64,
    /// Per time: `sup_{x≠y} |P_t g(x) - P_t g(y)| / (d(x,y)^{d_w-d_h}
    /// t^{-(1-d_h/d_w)} ||g||_∞)`.
    pub weak_be_ratios: Vec<f64>,
    /// Off-diagonal stretched-exponential exponent when fittable; the
    /// expected value is `1/(d_w - 1)`.
    pub stretched_exponent: Option<f64>,
}

pub fn heat_asymptotics(
    sd: &SpectralData,
    t_grid: &[f64],
    x: u32,
    g: &DiscreteFunction,
) -> Result<HeatAsymptotics> {
    require_full(sd, "heat asymptotics")?;
    let (lo, hi) = resolvable_window(sd);
    if t_grid.is_empty() {
        return Err(Error::Usage("empty time grid".into()));
    }
    for &t in t_grid {
        if t < lo || t > hi {
            return Err(Error::Resolution(format!(
                "time {t:.3e} outside the resolvable window [{lo:.3e}, {hi:.3e}]"
            )));
        }
    }
    let mesh = &sd.mesh;
    let spec = &mesh.spec;
    let gap = spec.d_w - spec.d_h;
    let g_sup = g.sup_norm();

    let mut times = t_grid.to_vec();
    times.sort_by(f64::total_cmp);
    let mut diag_values = Vec::with_capacity(times.len());
    let mut weak_be_ratios = Vec::with_capacity(times.len());
    for &t in &times {
        diag_values.push(heat_kernel_diag(sd, t, x)?);

        let u = semigroup_apply(sd, g, t)?;
        let mut sup = 0.0_f64;
        let nv = mesh.n_vertices();
        for a in 0..nv {
            let pa = mesh.vertex(a as u32);
            let va = u.values[a];
            for b in (a + 1)..nv {
                let d = crate::geometry::dist(pa, mesh.vertex(b as u32));
                if d <= 0.0 {
                    continue;
                }
                let r = (va - u.values[b]).abs() / d.powf(gap);
                if r > sup {
                    sup = r;
                }
            }
        }
        let ratio = if sup == 0.0 || g_sup == 0.0 {
            0.0
        } else {
            sup / (t.powf(-(1.0 - spec.d_h / spec.d_w)) * g_sup)
        };
        weak_be_ratios.push(ratio);
    }

    let samples: Vec<(f64, f64)> = times
        .iter()
        .zip(&diag_values)
        .filter(|&(_, &p)| p > 0.0)
        .map(|(&t, &p)| (t.ln(), p.ln()))
        .collect();
    if samples.len() < 3 {
        return Err(Error::Fit(
            "fewer than 3 positive on-diagonal samples".into(),
        ));
    }
    let slope = ols_slope(&samples);

    // Off-diagonal decay against the farthest vertex.
    let y = {
        let px = mesh.vertex(x).to_vec();
        (0..mesh.n_vertices() as u32)
            .max_by(|&a, &b| {
                crate::geometry::dist(&px, mesh.vertex(a))
                    .total_cmp(&crate::geometry::dist(&px, mesh.vertex(b)))
            })
            .unwrap()
    };
    let mut stretched = Vec::new();
    for &t in &times {
        let pxx = heat_kernel_diag(sd, t, x)?;
        let pyy = heat_kernel_diag(sd, t, y)?;
        let pxy: f64 = (0..sd.count())
            .map(|j| {
                (-sd.eigenvalues[j] * t).exp()
                    * sd.eigenfunctions[[x as usize, j]]
                    * sd.eigenfunctions[[y as usize, j]]
            })
            .sum();
        if pxy > 0.0 && pxx > 0.0 && pyy > 0.0 {
            let r = 0.5 * (pxx * pyy).ln() - pxy.ln();
            if r > 0.1 {
                stretched.push((t.ln(), r.ln()));
            }
        }
    }
    let stretched_exponent = (stretched.len() >= 3).then(|| -ols_slope(&stretched));

    Ok(HeatAsymptotics {
        times,
        diag_values,
        slope,
        target_slope: -spec.d_h / spec.d_w,
        weak_be_ratios,
        stretched_exponent,
    })
}

fn ols_slope(samples: &[(f64, f64)]) -> f64 {
    let n = samples.len() as f64;
    let sx: f64 = samples.iter().map(|s| s.0).sum();
    let sy: f64 = samples.iter().map(|s| s.1).sum();
    let sxx: f64 = samples.iter().map(|s| s.0 * s.0).sum();
    let sxy: f64 = samples.iter().map(|s| s.0 * s.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_spec, LevelMesh, MeshBudget};
    use crate::spectral::{spectral_decompose, EnergyForm};
    use approx::assert_abs_diff_eq;
    use std::sync::Arc;

    fn decompose(name: &str, n: usize) -> SpectralData {
        let spec = Arc::new(build_spec(name).unwrap());
        let mesh = Arc::new(LevelMesh::build(spec, n, 0, &MeshBudget::default()).unwrap());
        spectral_decompose(&EnergyForm::new(mesh), None).unwrap()
    }

    #[test]
    fn kernel_is_symmetric_and_conservative() {
        let sd = decompose("sg", 3);
        let t = 20.0 / sd.lambda_max();
        let slice = heat_kernel(&sd, t).unwrap();
        let nv = sd.mesh.n_vertices();
        for a in 0..nv {
            let mut mass = 0.0;
            for b in 0..nv {
                assert_abs_diff_eq!(
                    slice.values[[a, b]],
                    slice.values[[b, a]],
                    epsilon = 1e-10
                );
                mass += slice.values[[a, b]] * sd.mesh.weights[b];
            }
            assert_abs_diff_eq!(mass, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn semigroup_composes() {
        let sd = decompose("sg", 2);
        let t = 15.0 / sd.lambda_max();
        let p1 = heat_kernel(&sd, t).unwrap();
        let p2 = heat_kernel(&sd, 2.0 * t).unwrap();
        let w = ndarray::Array1::from_vec(sd.mesh.weights.clone());
        let weighted = &p1.values * &w.view().insert_axis(ndarray::Axis(0));
        let composed = weighted.dot(&p1.values);
        for (a, b) in composed.iter().zip(p2.values.iter()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-8);
        }
    }

    #[test]
    fn constant_is_invariant_and_limits_to_mean() {
        let sd = decompose("vicsek", 2);
        let c = DiscreteFunction::constant(sd.mesh.clone(), 3.7);
        let pc = semigroup_apply(&sd, &c, 0.05).unwrap();
        for &v in &pc.values {
            assert_abs_diff_eq!(v, 3.7, epsilon = 1e-10);
        }
        let f = crate::functions::make_test_function(
            &sd.mesh,
            &crate::functions::TestFunctionKind::Coordinate { axis: 0 },
            None,
        )
        .unwrap();
        let long = semigroup_apply(&sd, &f, 200.0 / sd.eigenvalues[1]).unwrap();
        for &v in &long.values {
            assert_abs_diff_eq!(v, f.mean(), epsilon = 1e-10);
        }
    }

    #[test]
    fn eigenfunction_decays_at_its_rate() {
        let sd = decompose("sg", 3);
        let phi1 = sd.eigenfunction(1).unwrap();
        let t = 1.0 / sd.eigenvalues[1];
        let pt = semigroup_apply(&sd, &phi1, t).unwrap();
        let norm: f64 = pt
            .values
            .iter()
            .zip(&sd.mesh.weights)
            .map(|(v, w)| v * v * w)
            .sum::<f64>()
            .sqrt();
        assert_abs_diff_eq!(norm, (-1.0_f64).exp(), epsilon = 1e-10);
    }

    #[test]
    fn grid_outside_window_rejected() {
        let sd = decompose("sg", 3);
        let g = DiscreteFunction::constant(sd.mesh.clone(), 1.0);
        assert!(heat_asymptotics(&sd, &[1.0], 0, &g).is_err());
    }
}
