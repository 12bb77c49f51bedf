use std::collections::HashMap;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};
use crate::geometry::{dist, symmetry, PairOrbits, Similitude};

/// Raw iterated-function-system input for [`build_spec_from_ifs`].
#[derive(Debug, Clone)]
pub struct IfsData {
    pub contraction: f64,
    pub unitaries: Vec<Array2<f64>>,
    pub translations: Vec<Array1<f64>>,
    /// Expected resistance factor; validated against the computed one.
    pub rho: Option<f64>,
}

/// A validated nested fractal: similitudes, essential boundary, renormalized
/// conductance pattern, and the derived dimensions.
#[derive(Debug, Clone)]
pub struct FractalSpec {
    pub name: String,
    pub dim: usize,
    /// Length scale factor L (every similitude contracts by 1/L).
    pub length_factor: f64,
    /// Number of similitudes M.
    pub mass_factor: usize,
    /// Resistance scale factor, from the conductance fixed point.
    pub resistance_factor: f64,
    pub similitudes: Vec<Similitude>,
    /// Essential boundary points, ordered by the similitude fixing them.
    pub boundary: Vec<Vec<f64>>,
    /// For each boundary point, the index of the similitude that fixes it.
    pub boundary_sim: Vec<usize>,
    /// Symmetry orbits of unordered boundary pairs.
    pub orbits: PairOrbits,
    /// Conductance per orbit, normalized to max 1.
    pub conductance_pattern: Vec<f64>,
    /// Hausdorff dimension log M / log L.
    pub d_h: f64,
    /// Walk dimension log(M rho) / log L.
    pub d_w: f64,
    pub diameter: f64,
    /// Whether the first similitude is a pure contraction fixing the origin,
    /// which blow-up truncations assume.
    pub blowup_ready: bool,
}

impl FractalSpec {
    /// Scaling exponent of the p-variation seminorms,
    /// `(1 - 2/p)(1 - d_h/d_w) + 1/p`.
    pub fn alpha(&self, p: f64) -> f64 {
        (1.0 - 2.0 / p) * (1.0 - self.d_h / self.d_w) + 1.0 / p
    }

    pub fn boundary_len(&self) -> usize {
        self.boundary.len()
    }

    /// Applies the composite map of a word (outermost letter first).
    pub fn apply_word(&self, word: &[u8], x: &[f64]) -> Vec<f64> {
        let mut y = x.to_vec();
        for &letter in word.iter().rev() {
            y = self.similitudes[letter as usize].apply(&y);
        }
        y
    }
}

fn parse_vicsek_order(name: &str) -> Option<usize> {
    if name == "vicsek" {
        return Some(2);
    }
    let n = name.strip_prefix("vicsek-")?.parse::<usize>().ok()?;
    (n >= 2).then_some(n)
}

/// Builds a spec from the registry: "sg", "vicsek", or "vicsek-N" with N >= 2.
pub fn build_spec(name: &str) -> Result<FractalSpec> {
    if name == "sg" {
        let corners = [
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![0.5, 3.0_f64.sqrt() / 2.0],
        ];
        let ifs = IfsData {
            contraction: 0.5,
            unitaries: corners.iter().map(|_| Array2::eye(2)).collect(),
            translations: corners
                .iter()
                .map(|q| Array1::from_iter(q.iter().map(|&v| 0.5 * v)))
                .collect(),
            rho: None,
        };
        return build_spec_from_ifs("sg", &ifs);
    }
    if let Some(order) = parse_vicsek_order(name) {
        if order > 8 {
            return Err(Error::Budget {
                stage: "build_spec",
                detail: format!("vicsek order {order} exceeds the supported maximum 8"),
            });
        }
        // 2^order cube corners (origin first), then the center.
        let mut centers: Vec<Vec<f64>> = (0..1u32 << order)
            .map(|b| (0..order).map(|k| ((b >> k) & 1) as f64).collect())
            .collect();
        centers.push(vec![0.5; order]);
        let ifs = IfsData {
            contraction: 1.0 / 3.0,
            unitaries: centers.iter().map(|_| Array2::eye(order)).collect(),
            translations: centers
                .iter()
                .map(|q| Array1::from_iter(q.iter().map(|&v| 2.0 / 3.0 * v)))
                .collect(),
            rho: None,
        };
        return build_spec_from_ifs(name, &ifs);
    }
    Err(Error::Usage(format!(
        "unknown fractal \"{name}\"; expected \"sg\", \"vicsek\", or \"vicsek-N\""
    )))
}

/// Builds and validates a spec from raw IFS data.
pub fn build_spec_from_ifs(name: &str, ifs: &IfsData) -> Result<FractalSpec> {
    let m = ifs.translations.len();
    if m < 2 {
        return Err(Error::InvalidSpec("need at least two similitudes".into()));
    }
    if ifs.unitaries.len() != m {
        return Err(Error::InvalidSpec(
            "unitary and translation counts differ".into(),
        ));
    }
    let dim = ifs.translations[0].len();
    for (u0, u) in ifs.unitaries.iter().zip(&ifs.unitaries[1..]) {
        let _ = u0;
        let diff = ifs.unitaries[0]
            .iter()
            .zip(u.iter())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        if diff > 1e-12 {
            return Err(Error::InvalidSpec(
                "similitudes do not share a common unitary part".into(),
            ));
        }
    }
    let similitudes: Vec<Similitude> = ifs
        .translations
        .iter()
        .zip(&ifs.unitaries)
        .map(|(a, u)| Similitude::new(ifs.contraction, u.clone(), a.clone()))
        .collect::<Result<_>>()?;

    let length_factor = 1.0 / ifs.contraction;
    let fixed: Vec<Vec<f64>> = similitudes.iter().map(|s| s.fixed_point()).collect();
    let scale = fixed
        .iter()
        .flat_map(|p| fixed.iter().map(move |q| dist(p, q)))
        .fold(0.0_f64, f64::max)
        .max(1.0);
    let tol = 1e-9 * scale;
    for i in 0..m {
        for j in (i + 1)..m {
            if dist(&fixed[i], &fixed[j]) <= tol {
                return Err(Error::InvalidSpec(format!(
                    "similitudes {i} and {j} share a fixed point"
                )));
            }
        }
    }

    // Essential fixed points: q is essential if some pair of distinct maps
    // sends q and another fixed point to the same image.
    let mut boundary = Vec::new();
    let mut boundary_sim = Vec::new();
    for (qi, q) in fixed.iter().enumerate() {
        let essential = (0..m).any(|i| {
            (0..m).any(|j| {
                i != j
                    && fixed
                        .iter()
                        .enumerate()
                        .any(|(yi, y)| {
                            yi != qi
                                && dist(&similitudes[i].apply(q), &similitudes[j].apply(y)) <= tol
                        })
            })
        });
        if essential {
            boundary.push(q.clone());
            boundary_sim.push(qi);
        }
    }
    if boundary.len() < 2 {
        return Err(Error::InvalidSpec(format!(
            "only {} essential fixed point(s); need at least 2",
            boundary.len()
        )));
    }

    let orbits = symmetry::pair_orbits(&boundary)?;
    check_connectivity(&similitudes, &boundary, tol)?;
    check_nesting(&similitudes, &boundary, 1, 2, scale)?;
    if m * m <= 2_000 {
        check_nesting(&similitudes, &boundary, 2, 1, scale)?;
    }

    let base = crate::spectral::renormalize_conductances(&similitudes, &boundary, &orbits)?;
    if let Some(rho) = ifs.rho {
        if (rho - base.rho).abs() > 1e-8 * base.rho {
            return Err(Error::InvalidSpec(format!(
                "declared resistance factor {rho} disagrees with computed {:.12}",
                base.rho
            )));
        }
    }

    let d_h = (m as f64).ln() / length_factor.ln();
    let d_w = (m as f64 * base.rho).ln() / length_factor.ln();
    if d_w <= d_h {
        return Err(Error::InvalidSpec(format!(
            "walk dimension {d_w:.6} not above Hausdorff dimension {d_h:.6}"
        )));
    }

    let blowup_ready = {
        let s = &similitudes[0];
        let eye: Array2<f64> = Array2::eye(dim);
        let u_dev = s
            .unitary
            .iter()
            .zip(eye.iter())
            .map(|(&a, &b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        u_dev <= 1e-12 && fixed[0].iter().all(|&v| v.abs() <= tol)
    };

    let spec = FractalSpec {
        name: name.to_string(),
        dim,
        length_factor,
        mass_factor: m,
        resistance_factor: base.rho,
        similitudes,
        boundary,
        boundary_sim,
        orbits,
        conductance_pattern: base.pattern,
        d_h,
        d_w,
        diameter: 0.0,
        blowup_ready,
    };
    let diameter = estimate_diameter(&spec);
    Ok(FractalSpec { diameter, ..spec })
}

fn check_connectivity(sims: &[Similitude], boundary: &[Vec<f64>], tol: f64) -> Result<()> {
    let m = sims.len();
    let cells: Vec<Vec<Vec<f64>>> = sims
        .iter()
        .map(|s| boundary.iter().map(|q| s.apply(q)).collect())
        .collect();
    let mut parent: Vec<usize> = (0..m).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..m {
        for j in (i + 1)..m {
            let touch = cells[i]
                .iter()
                .any(|p| cells[j].iter().any(|q| dist(p, q) <= tol));
            if touch {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    for i in 1..m {
        if find(&mut parent, i) != find(&mut parent, 0) {
            return Err(Error::InvalidSpec(
                "level-1 cells do not form a connected family".into(),
            ));
        }
    }
    Ok(())
}

/// Samples the nesting axiom at one level: refined vertex clouds of two
/// distinct cells may only meet at shared cell corners.
fn check_nesting(
    sims: &[Similitude],
    boundary: &[Vec<f64>],
    level: usize,
    depth: usize,
    scale: f64,
) -> Result<()> {
    let m = sims.len();
    let dim = boundary[0].len();
    let contraction = sims[0].contraction;
    let tol = 1e-9 * scale * contraction.powi(level as i32);
    let corner_tol = 1e-8 * scale * contraction.powi(level as i32);

    let apply_digits = |mut idx: usize, len: usize, x: &[f64]| -> Vec<f64> {
        let mut letters = vec![0usize; len];
        for slot in letters.iter_mut().rev() {
            *slot = idx % m;
            idx /= m;
        }
        let mut y = x.to_vec();
        for &l in letters.iter().rev() {
            y = sims[l].apply(&y);
        }
        y
    };

    let n_cells = m.pow(level as u32);
    let corners: Vec<Vec<Vec<f64>>> = (0..n_cells)
        .map(|c| {
            boundary
                .iter()
                .map(|q| apply_digits(c, level, q))
                .collect()
        })
        .collect();

    // Bucket refined sample points by quantized coordinates; points of two
    // different cells landing in one bucket are intersection candidates.
    let mut buckets: HashMap<Vec<i64>, Vec<(usize, Vec<f64>)>> = HashMap::new();
    let n_sub = m.pow(depth as u32);
    for c in 0..n_cells {
        for s in 0..n_sub {
            for q in boundary {
                let p = apply_digits(c * n_sub + s, level + depth, q);
                let key: Vec<i64> = (0..dim).map(|k| (p[k] / tol).round() as i64).collect();
                buckets.entry(key).or_default().push((c, p));
            }
        }
    }
    for pts in buckets.values() {
        for (ai, (ca, pa)) in pts.iter().enumerate() {
            for (cb, pb) in &pts[ai + 1..] {
                if ca == cb || dist(pa, pb) > tol {
                    continue;
                }
                let at_corner = |c: usize, p: &[f64]| {
                    corners[c].iter().any(|q| dist(q, p) <= corner_tol)
                };
                if !(at_corner(*ca, pa) && at_corner(*cb, pb)) {
                    return Err(Error::InvalidSpec(format!(
                        "nesting violated: level-{level} cells {ca} and {cb} \
                         meet away from their corners"
                    )));
                }
            }
        }
    }
    Ok(())
}

fn estimate_diameter(spec: &FractalSpec) -> f64 {
    let m = spec.mass_factor;
    let b = spec.boundary.len();
    let mut depth = 1usize;
    while depth < 4 && m.pow(depth as u32 + 1) * b <= 3_000 {
        depth += 1;
    }
    let mut cloud = Vec::new();
    let mut word = vec![0u8; depth];
    loop {
        for q in &spec.boundary {
            cloud.push(spec.apply_word(&word, q));
        }
        let mut k = depth;
        loop {
            if k == 0 {
                let mut best = 0.0_f64;
                for (i, p) in cloud.iter().enumerate() {
                    for q in &cloud[i + 1..] {
                        best = best.max(dist(p, q));
                    }
                }
                return best;
            }
            k -= 1;
            word[k] += 1;
            if (word[k] as usize) < m {
                break;
            }
            word[k] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn sg_registry_values() {
        let s = build_spec("sg").unwrap();
        assert_eq!(s.mass_factor, 3);
        assert_eq!(s.boundary.len(), 3);
        assert_abs_diff_eq!(s.length_factor, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.d_h, 3.0_f64.ln() / 2.0_f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(s.d_w, 5.0_f64.ln() / 2.0_f64.ln(), epsilon = 1e-8);
        assert_abs_diff_eq!(s.resistance_factor, 5.0 / 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.diameter, 1.0, epsilon = 1e-12);
        assert!(s.blowup_ready);
    }

    #[test]
    fn vicsek_registry_values() {
        let s = build_spec("vicsek").unwrap();
        assert_eq!(s.mass_factor, 5);
        // Only the four cube corners are essential; the center is not.
        assert_eq!(s.boundary.len(), 4);
        assert_abs_diff_eq!(s.resistance_factor, 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.d_h, 5.0_f64.ln() / 3.0_f64.ln(), epsilon = 1e-10);
        assert_abs_diff_eq!(s.d_w, 15.0_f64.ln() / 3.0_f64.ln(), epsilon = 1e-8);
        assert_abs_diff_eq!(s.d_w - s.d_h, 1.0, epsilon = 1e-8);
        assert_abs_diff_eq!(s.diameter, 2.0_f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn vicsek_3_registry_values() {
        let s = build_spec("vicsek-3").unwrap();
        assert_eq!(s.mass_factor, 9);
        assert_eq!(s.boundary.len(), 8);
        assert_abs_diff_eq!(s.d_h, 2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(s.d_w, 3.0, epsilon = 1e-8);
    }

    #[test]
    fn alpha_endpoints() {
        let s = build_spec("sg").unwrap();
        assert_abs_diff_eq!(s.alpha(2.0), 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(s.alpha(1.0), s.d_h / s.d_w, epsilon = 1e-12);
    }

    #[test]
    fn word_contracts_exactly() {
        let s = build_spec("sg").unwrap();
        let word = [2u8, 0, 1, 2];
        let a = [0.3, 0.1];
        let b = [0.9, 0.4];
        let d0 = dist(&a, &b);
        let d1 = dist(&s.apply_word(&word, &a), &s.apply_word(&word, &b));
        assert_abs_diff_eq!(d1, d0 / 16.0, epsilon = 1e-14);
    }

    #[test]
    fn unknown_name_rejected() {
        assert!(build_spec("koch").is_err());
        assert!(build_spec("vicsek-1").is_err());
    }

    #[test]
    fn mixed_unitary_parts_rejected() {
        let rot = ndarray::array![[0.0, -1.0], [1.0, 0.0]];
        let ifs = IfsData {
            contraction: 0.5,
            unitaries: vec![Array2::eye(2), rot],
            translations: vec![Array1::zeros(2), ndarray::array![0.5, 0.0]],
            rho: None,
        };
        assert!(build_spec_from_ifs("bad", &ifs).is_err());
    }
}
