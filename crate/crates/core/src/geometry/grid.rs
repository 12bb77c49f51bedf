use std::collections::HashMap;

use crate::geometry::dist2;

/// Uniform-grid bucket index for fixed-radius vertex queries.
///
/// Buckets are keyed by a mixed hash of the integer cell coordinates; hash
/// collisions only add candidates, which the distance filter removes.
#[derive(Debug, Clone)]
pub struct SpatialGrid {
    cell_size: f64,
    dim: usize,
    buckets: HashMap<u64, Vec<u32>>,
    n_points: usize,
}

#[inline]
fn mix_key(cell: &[i64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &c in cell {
        h ^= c as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

impl SpatialGrid {
    pub fn build(coords: &[f64], dim: usize, cell_size: f64) -> Self {
        assert!(cell_size > 0.0);
        let n_points = coords.len() / dim;
        let mut buckets: HashMap<u64, Vec<u32>> = HashMap::new();
        let mut cell = vec![0i64; dim];
        for i in 0..n_points {
            let p = &coords[i * dim..(i + 1) * dim];
            for (k, c) in cell.iter_mut().enumerate() {
                *c = (p[k] / cell_size).floor() as i64;
            }
            buckets.entry(mix_key(&cell)).or_default().push(i as u32);
        }
        Self {
            cell_size,
            dim,
            buckets,
            n_points,
        }
    }

    /// Ids of all points with `d(x, p) <= r`, ascending.
    pub fn ball(&self, coords: &[f64], x: &[f64], r: f64) -> Vec<u32> {
        let dim = self.dim;
        let r2 = r * r;
        let mut lo = vec![0i64; dim];
        let mut hi = vec![0i64; dim];
        let mut n_cells: u128 = 1;
        for k in 0..dim {
            lo[k] = ((x[k] - r) / self.cell_size).floor() as i64;
            hi[k] = ((x[k] + r) / self.cell_size).floor() as i64;
            n_cells = n_cells.saturating_mul((hi[k] - lo[k] + 1) as u128);
        }
        let mut out = Vec::new();
        if n_cells > self.n_points as u128 {
            // Cheaper to scan every point.
            for i in 0..self.n_points {
                if dist2(&coords[i * dim..(i + 1) * dim], x) <= r2 {
                    out.push(i as u32);
                }
            }
            return out;
        }
        let mut cell = lo.clone();
        loop {
            if let Some(bucket) = self.buckets.get(&mix_key(&cell)) {
                for &i in bucket {
                    let p = &coords[i as usize * dim..(i as usize + 1) * dim];
                    if dist2(p, x) <= r2 {
                        out.push(i);
                    }
                }
            }
            // Odometer increment over the cell box.
            let mut k = 0;
            loop {
                if k == dim {
                    out.sort_unstable();
                    // Key collisions can route two distinct cells to one
                    // bucket, which is then scanned twice.
                    out.dedup();
                    return out;
                }
                cell[k] += 1;
                if cell[k] <= hi[k] {
                    break;
                }
                cell[k] = lo[k];
                k += 1;
            }
        }
    }
}
