use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// An L-similitude `x -> U x / L + a` with orthogonal `U`.
#[derive(Debug, Clone)]
pub struct Similitude {
    /// Contraction ratio, `1/L`.
    pub contraction: f64,
    /// Orthogonal linear part.
    pub unitary: Array2<f64>,
    /// Translation.
    pub translation: Array1<f64>,
}

impl Similitude {
    pub fn new(contraction: f64, unitary: Array2<f64>, translation: Array1<f64>) -> Result<Self> {
        let d = translation.len();
        if unitary.shape() != [d, d] {
            return Err(Error::InvalidSpec(format!(
                "unitary part is {:?}, expected {d}x{d}",
                unitary.shape()
            )));
        }
        if !(contraction > 0.0 && contraction < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "contraction ratio {contraction} not in (0,1)"
            )));
        }
        // U^T U = I
        let gram = unitary.t().dot(&unitary);
        for i in 0..d {
            for j in 0..d {
                let expect = if i == j { 1.0 } else { 0.0 };
                if (gram[[i, j]] - expect).abs() > 1e-10 {
                    return Err(Error::InvalidSpec(
                        "linear part of a similitude is not orthogonal".into(),
                    ));
                }
            }
        }
        Ok(Self {
            contraction,
            unitary,
            translation,
        })
    }

    /// Pure homothety toward `center` with ratio `contraction`.
    pub fn homothety(contraction: f64, center: &[f64]) -> Self {
        let d = center.len();
        let unitary = Array2::eye(d);
        // (z - q) c + q  =  c z + (1-c) q
        let translation = Array1::from_iter(center.iter().map(|&q| (1.0 - contraction) * q));
        Self {
            contraction,
            unitary,
            translation,
        }
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = self.translation.to_vec();
        for i in 0..d {
            let mut acc = 0.0;
            for j in 0..d {
                acc += self.unitary[[i, j]] * x[j];
            }
            out[i] += self.contraction * acc;
        }
        out
    }

    /// The unique fixed point, solving `(I - U/L) q = a`.
    pub fn fixed_point(&self) -> Vec<f64> {
        let d = self.dim();
        let mut m = Array2::eye(d);
        m.scaled_add(-self.contraction, &self.unitary);
        // Small dense solve by Gaussian elimination; d is tiny.
        let mut a = m.to_owned();
        let mut b = self.translation.to_vec();
        for col in 0..d {
            let piv = (col..d)
                .max_by(|&i, &j| a[[i, col]].abs().total_cmp(&a[[j, col]].abs()))
                .unwrap();
            if piv != col {
                for j in 0..d {
                    let tmp = a[[col, j]];
                    a[[col, j]] = a[[piv, j]];
                    a[[piv, j]] = tmp;
                }
                b.swap(col, piv);
            }
            let p = a[[col, col]];
            for i in (col + 1)..d {
                let f = a[[i, col]] / p;
                for j in col..d {
                    a[[i, j]] -= f * a[[col, j]];
                }
                b[i] -= f * b[col];
            }
        }
        for i in (0..d).rev() {
            let mut acc = b[i];
            for j in (i + 1)..d {
                acc -= a[[i, j]] * b[j];
            }
            b[i] = acc / a[[i, i]];
        }
        b
    }
}
