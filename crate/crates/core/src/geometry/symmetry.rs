use crate::error::{Error, Result};
use crate::geometry::dist;

/// Orbits of unordered boundary-point pairs under the reflection group of
/// the essential boundary (reflections in the bisecting hyperplanes that
/// permute the boundary, closed under composition).
#[derive(Debug, Clone)]
pub struct PairOrbits {
    pub n_points: usize,
    pub n_orbits: usize,
    /// Orbit id per unordered pair, indexed by [`PairOrbits::pair_index`].
    pub orbit_of: Vec<u32>,
}

impl PairOrbits {
    #[inline]
    pub fn pair_index(&self, i: usize, j: usize) -> usize {
        pair_index(self.n_points, i, j)
    }

    pub fn orbit(&self, i: usize, j: usize) -> u32 {
        self.orbit_of[self.pair_index(i, j)]
    }

    pub fn n_pairs(&self) -> usize {
        self.n_points * (self.n_points - 1) / 2
    }
}

#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

/// Reflection of `z` in the hyperplane bisecting the segment `[x, y]`.
fn reflect(z: &[f64], x: &[f64], y: &[f64]) -> Vec<f64> {
    let d = z.len();
    let mut u: Vec<f64> = (0..d).map(|k| y[k] - x[k]).collect();
    let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
    for v in &mut u {
        *v /= norm;
    }
    let mid: Vec<f64> = (0..d).map(|k| 0.5 * (x[k] + y[k])).collect();
    let proj: f64 = (0..d).map(|k| (z[k] - mid[k]) * u[k]).sum();
    (0..d).map(|k| z[k] - 2.0 * proj * u[k]).collect()
}

/// Permutation of the point set induced by a map, or None if the map does
/// not preserve the set within tolerance.
fn induced_permutation(points: &[Vec<f64>], image: &[Vec<f64>], tol: f64) -> Option<Vec<u8>> {
    let mut perm = vec![u8::MAX; points.len()];
    for (i, img) in image.iter().enumerate() {
        let mut found = None;
        for (j, p) in points.iter().enumerate() {
            if dist(img, p) <= tol {
                found = Some(j);
                break;
            }
        }
        perm[i] = found? as u8;
    }
    let mut seen = vec![false; points.len()];
    for &p in &perm {
        if seen[p as usize] {
            return None;
        }
        seen[p as usize] = true;
    }
    Some(perm)
}

fn compose(a: &[u8], b: &[u8]) -> Vec<u8> {
    // (a . b)(i) = a[b[i]]
    b.iter().map(|&i| a[i as usize]).collect()
}

/// Computes pair orbits for a boundary point set.
pub fn pair_orbits(points: &[Vec<f64>]) -> Result<PairOrbits> {
    let n = points.len();
    if n < 2 {
        return Err(Error::InvalidSpec(
            "need at least two boundary points for pair orbits".into(),
        ));
    }
    let scale = points
        .iter()
        .flat_map(|p| points.iter().map(move |q| dist(p, q)))
        .fold(0.0_f64, f64::max);
    let tol = 1e-9 * scale.max(1.0);

    // Generators: bisector reflections that permute the boundary.
    let mut group: Vec<Vec<u8>> = vec![(0..n as u8).collect()];
    let push = |group: &mut Vec<Vec<u8>>, perm: Vec<u8>| {
        if !group.contains(&perm) {
            group.push(perm);
        }
    };
    for i in 0..n {
        for j in (i + 1)..n {
            let image: Vec<Vec<f64>> = points
                .iter()
                .map(|z| reflect(z, &points[i], &points[j]))
                .collect();
            if let Some(perm) = induced_permutation(points, &image, tol) {
                push(&mut group, perm);
            }
        }
    }
    // Close under composition.
    loop {
        let mut added = false;
        let snapshot = group.clone();
        for a in &snapshot {
            for b in &snapshot {
                let c = compose(a, b);
                if !group.contains(&c) {
                    group.push(c);
                    added = true;
                }
            }
        }
        if !added {
            break;
        }
        if group.len() > 40_320 {
            return Err(Error::InvalidSpec(
                "symmetry group closure did not stabilize".into(),
            ));
        }
    }

    // Union-find over pairs under the group action.
    let n_pairs = n * (n - 1) / 2;
    let mut parent: Vec<usize> = (0..n_pairs).collect();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for g in &group {
        for i in 0..n {
            for j in (i + 1)..n {
                let a = pair_index(n, i, j);
                let b = pair_index(n, g[i] as usize, g[j] as usize);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut orbit_of = vec![u32::MAX; n_pairs];
    let mut next = 0u32;
    for idx in 0..n_pairs {
        let root = find(&mut parent, idx);
        if orbit_of[root] == u32::MAX {
            orbit_of[root] = next;
            next += 1;
        }
        orbit_of[idx] = orbit_of[root];
    }
    Ok(PairOrbits {
        n_points: n,
        n_orbits: next as usize,
        orbit_of,
    })
}
