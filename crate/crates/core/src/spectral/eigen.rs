use std::sync::Arc;

use ndarray::{Array1, Array2};
use ndarray_linalg::{Eigh, UPLO};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::functions::DiscreteFunction;
use crate::geometry::LevelMesh;
use crate::spectral::EnergyForm;

const DENSE_LIMIT: usize = 4_000;
const PARTIAL_LIMIT: usize = 200;

/// Eigenpairs of the generator `W^{-1} A`, weight-orthonormal.
pub struct SpectralData {
    pub mesh: Arc<LevelMesh>,
    pub eigenvalues: Vec<f64>,
    /// Column j is eigenfunction j.
    pub eigenfunctions: Array2<f64>,
    /// Whether every eigenpair of the mesh is present.
    pub full: bool,
}

impl SpectralData {
    pub fn count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_max(&self) -> f64 {
        *self.eigenvalues.last().unwrap()
    }

    pub fn eigenfunction(&self, j: usize) -> Result<DiscreteFunction> {
        if j >= self.count() {
            return Err(Error::Usage(format!(
                "eigenfunction {j} of a decomposition with {} pairs",
                self.count()
            )));
        }
        DiscreteFunction::new(self.mesh.clone(), self.eigenfunctions.column(j).to_vec())
    }

    /// Weight-measure inner products of `f` with every eigenfunction.
    pub fn coefficients(&self, f: &DiscreteFunction) -> Result<Vec<f64>> {
        if !self.mesh.same_mesh(&f.mesh) {
            return Err(Error::MeshMismatch(
                "function does not live on the spectral mesh".into(),
            ));
        }
        let weighted: Array1<f64> = f
            .values
            .iter()
            .zip(&self.mesh.weights)
            .map(|(v, w)| v * w)
            .collect();
        Ok(self.eigenfunctions.t().dot(&weighted).to_vec())
    }
}

/// Spectral decomposition of the generator. `count: None` asks for the full
/// spectrum (dense path); `Some(k)` for the k lowest pairs (Lanczos path).
pub fn spectral_decompose(form: &EnergyForm, count: Option<usize>) -> Result<SpectralData> {
    let mesh = &form.mesh;
    let nv = mesh.n_vertices();
    let inv_sqrt_w: Vec<f64> = mesh.weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    match count {
        None => {
            if nv > DENSE_LIMIT {
                return Err(Error::Budget {
                    stage: "spectral_decompose",
                    detail: format!(
                        "{nv} vertices exceed the dense limit {DENSE_LIMIT}; \
                         request a partial spectrum"
                    ),
                });
            }
            let mut s = form.dense_stiffness();
            for i in 0..nv {
                for j in 0..nv {
                    s[[i, j]] *= inv_sqrt_w[i] * inv_sqrt_w[j];
                }
            }
            let (vals, vecs) = s
                .eigh(UPLO::Lower)
                .map_err(|e| Error::Renormalization(format!("dense eigensolve failed: {e}")))?;
            check_residuals(form, &inv_sqrt_w, vals.as_slice().unwrap(), &vecs)?;
            let mut phi = vecs;
            for i in 0..nv {
                for j in 0..nv {
                    phi[[i, j]] *= inv_sqrt_w[i];
                }
            }
            Ok(fix_ground_state(SpectralData {
                mesh: mesh.clone(),
                eigenvalues: vals.to_vec(),
                eigenfunctions: phi,
                full: true,
            }))
        }
        Some(k) => {
            if k == 0 || k > PARTIAL_LIMIT {
                return Err(Error::Usage(format!(
                    "partial spectrum size {k} outside 1..={PARTIAL_LIMIT}"
                )));
            }
            let k = k.min(nv);
            let (vals, vecs) = lanczos_smallest(form, &inv_sqrt_w, k)?;
            check_residuals(form, &inv_sqrt_w, &vals, &vecs)?;
            let mut phi = vecs;
            for i in 0..nv {
                for j in 0..k {
                    phi[[i, j]] *= inv_sqrt_w[i];
                }
            }
            Ok(fix_ground_state(SpectralData {
                mesh: mesh.clone(),
                eigenvalues: vals,
                eigenfunctions: phi,
                full: k == nv,
            }))
        }
    }
}

/// Pins the ground state to the exact constant when its eigenvalue is zero
/// within tolerance, removing sign and rounding noise.
fn fix_ground_state(mut sd: SpectralData) -> SpectralData {
    if sd.eigenvalues[0].abs() <= 1e-8 {
        sd.eigenvalues[0] = 0.0;
        let mass: f64 = sd.mesh.weights.iter().sum();
        let c = 1.0 / mass.sqrt();
        for v in sd.eigenfunctions.column_mut(0) {
            *v = c;
        }
    }
    sd
}

/// Symmetrized matvec `y = W^{-1/2} A W^{-1/2} x`.
fn sym_matvec(form: &EnergyForm, inv_sqrt_w: &[f64], x: &[f64], scratch: &mut [f64], y: &mut [f64]) {
    for i in 0..x.len() {
        scratch[i] = x[i] * inv_sqrt_w[i];
    }
    form.apply_stiffness(scratch, y);
    for i in 0..x.len() {
        y[i] *= inv_sqrt_w[i];
    }
}

fn check_residuals(
    form: &EnergyForm,
    inv_sqrt_w: &[f64],
    vals: &[f64],
    vecs: &Array2<f64>,
) -> Result<()> {
    let nv = form.mesh.n_vertices();
    let lambda_max = vals.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let target = 1e-8 * lambda_max.max(1.0);
    let mut scratch = vec![0.0; nv];
    let mut y = vec![0.0; nv];
    let mut worst = 0.0_f64;
    for (j, &lam) in vals.iter().enumerate() {
        let u = vecs.column(j).to_vec();
        sym_matvec(form, inv_sqrt_w, &u, &mut scratch, &mut y);
        let r2: f64 = y
            .iter()
            .zip(u.iter())
            .map(|(yi, ui)| {
                let r = yi - lam * ui;
                r * r
            })
            .sum();
        worst = worst.max(r2.sqrt());
    }
    if worst > target {
        return Err(Error::EigenConvergence {
            residual: worst,
            target,
        });
    }
    Ok(())
}

/// Lanczos with full reorthogonalization for the k smallest eigenpairs.
fn lanczos_smallest(
    form: &EnergyForm,
    inv_sqrt_w: &[f64],
    k: usize,
) -> Result<(Vec<f64>, Array2<f64>)> {
    let nv = form.mesh.n_vertices();
    let steps = nv.min((8 * k).max(400));
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::with_capacity(steps);

    let mut v: Vec<f64> = (0..nv).map(|_| rng.gen::<f64>() - 0.5).collect();
    normalize(&mut v);
    let mut scratch = vec![0.0; nv];
    let mut w = vec![0.0; nv];
    for step in 0..steps {
        sym_matvec(form, inv_sqrt_w, &v, &mut scratch, &mut w);
        if step > 0 {
            let beta = betas[step - 1];
            let prev = &basis[step - 1];
            for i in 0..nv {
                w[i] -= beta * prev[i];
            }
        }
        let alpha: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        for i in 0..nv {
            w[i] -= alpha * v[i];
        }
        basis.push(std::mem::replace(&mut v, Vec::new()));
        alphas.push(alpha);
        // Two passes of full reorthogonalization.
        for _ in 0..2 {
            for b in &basis {
                let proj: f64 = w.iter().zip(b).map(|(a, c)| a * c).sum();
                for i in 0..nv {
                    w[i] -= proj * b[i];
                }
            }
        }
        let beta = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if step + 1 == steps {
            break;
        }
        if beta < 1e-12 {
            // Invariant subspace found; restart in its complement.
            let mut fresh: Vec<f64> = (0..nv).map(|_| rng.gen::<f64>() - 0.5).collect();
            for b in &basis {
                let proj: f64 = fresh.iter().zip(b).map(|(a, c)| a * c).sum();
                for i in 0..nv {
                    fresh[i] -= proj * b[i];
                }
            }
            let norm = fresh.iter().map(|a| a * a).sum::<f64>().sqrt();
            if norm < 1e-12 {
                break;
            }
            betas.push(0.0);
            v = fresh;
            normalize(&mut v);
        } else {
            betas.push(beta);
            v = w.iter().map(|a| a / beta).collect();
        }
    }

    let m = alphas.len();
    let mut tri = Array2::<f64>::zeros((m, m));
    for i in 0..m {
        tri[[i, i]] = alphas[i];
        if i + 1 < m {
            tri[[i, i + 1]] = betas[i];
            tri[[i + 1, i]] = betas[i];
        }
    }
    let (tvals, tvecs) = tri
        .eigh(UPLO::Lower)
        .map_err(|e| Error::Renormalization(format!("tridiagonal eigensolve failed: {e}")))?;
    let k = k.min(m);
    let mut vals = Vec::with_capacity(k);
    let mut vecs = Array2::<f64>::zeros((nv, k));
    for j in 0..k {
        vals.push(tvals[j]);
        for (s, b) in basis.iter().enumerate() {
            let y = tvecs[[s, j]];
            if y != 0.0 {
                for i in 0..nv {
                    vecs[[i, j]] += y * b[i];
                }
            }
        }
    }
    Ok((vals, vecs))
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    for a in v {
        *a /= n;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{build_spec, MeshBudget};
    use approx::assert_abs_diff_eq;

    fn decompose(name: &str, n: usize) -> SpectralData {
        let spec = Arc::new(build_spec(name).unwrap());
        let mesh = Arc::new(LevelMesh::build(spec, n, 0, &MeshBudget::default()).unwrap());
        spectral_decompose(&EnergyForm::new(mesh), None).unwrap()
    }

    #[test]
    fn ground_state_is_constant() {
        let sd = decompose("sg", 2);
        assert_eq!(sd.count(), sd.mesh.n_vertices());
        assert_abs_diff_eq!(sd.eigenvalues[0], 0.0, epsilon = 1e-10);
        let phi0 = sd.eigenfunction(0).unwrap();
        let spread = phi0.max() - phi0.min();
        assert_abs_diff_eq!(spread, 0.0, epsilon = 1e-10);
        assert!(sd.eigenvalues[1] > 1e-6);
    }

    #[test]
    fn weight_orthonormality() {
        let sd = decompose("vicsek", 2);
        let k = sd.count();
        for i in (0..k).step_by(7) {
            for j in (i..k).step_by(5) {
                let dot: f64 = (0..sd.mesh.n_vertices())
                    .map(|v| {
                        sd.eigenfunctions[[v, i]]
                            * sd.eigenfunctions[[v, j]]
                            * sd.mesh.weights[v]
                    })
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(dot, expect, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn rayleigh_identity_for_first_eigenfunction() {
        let spec = Arc::new(build_spec("sg").unwrap());
        let mesh = Arc::new(LevelMesh::build(spec, 3, 0, &MeshBudget::default()).unwrap());
        let form = EnergyForm::new(mesh);
        let sd = spectral_decompose(&form, None).unwrap();
        let phi1 = sd.eigenfunction(1).unwrap();
        let e = form.energy(&phi1).unwrap();
        assert_abs_diff_eq!(e, sd.eigenvalues[1], epsilon = 1e-8 * sd.eigenvalues[1]);
    }

    #[test]
    fn partial_matches_dense_head() {
        let spec = Arc::new(build_spec("vicsek").unwrap());
        let mesh = Arc::new(LevelMesh::build(spec, 3, 0, &MeshBudget::default()).unwrap());
        let form = EnergyForm::new(mesh);
        let dense = spectral_decompose(&form, None).unwrap();
        let part = spectral_decompose(&form, Some(12)).unwrap();
        for j in 0..12 {
            assert_abs_diff_eq!(
                part.eigenvalues[j],
                dense.eigenvalues[j],
                epsilon = 1e-7 * dense.lambda_max()
            );
        }
        assert!(!part.full);
    }
}
