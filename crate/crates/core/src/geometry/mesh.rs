use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use crate::error::{Error, Result};
use crate::geometry::{dist, FractalSpec, SpatialGrid};

/// Address of a cell: letters over `0..M`, outermost first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word(pub Vec<u8>);

impl Word {
    pub fn level(&self) -> usize {
        self.0.len()
    }

    /// The word at lexicographic position `idx` among level-`level` words.
    pub fn from_index(mut idx: usize, m: usize, level: usize) -> Self {
        let mut letters = vec![0u8; level];
        for slot in letters.iter_mut().rev() {
            *slot = (idx % m) as u8;
            idx /= m;
        }
        Word(letters)
    }

    pub fn index(&self, m: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| acc * m + l as usize)
    }
}

/// A level-n cell: its word, corner vertex ids (one per boundary point),
/// measure, and Euclidean diameter.
#[derive(Debug, Clone)]
pub struct Simplex {
    pub word: Word,
    pub vertex_ids: Vec<u32>,
    pub measure: f64,
    pub diameter: f64,
}

/// An intra-cell conductance edge, tagged with its boundary-pair orbit.
#[derive(Debug, Clone, Copy)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub orbit: u32,
}

/// Size guard for mesh construction.
#[derive(Debug, Clone, Copy)]
pub struct MeshBudget {
    pub max_simplices: usize,
}

impl Default for MeshBudget {
    fn default() -> Self {
        Self {
            max_simplices: 16_000,
        }
    }
}

/// A level-m coarsening: each cell covers a contiguous run of fine simplices.
#[derive(Debug, Clone)]
pub struct CoarseCell {
    pub word: Word,
    pub corner_ids: Vec<u32>,
    /// First fine-simplex index of this cell's run of `M^{n-m}` simplices.
    pub simplex_start: u32,
}

#[derive(Debug, Clone)]
pub struct CoarseLevel {
    pub m: usize,
    pub cells: Vec<CoarseCell>,
    /// Cells sharing at least one corner, per cell, ascending.
    pub neighbors: Vec<Vec<u32>>,
}

/// Result of point location at a coarse level. `star`/`double_star` grow from
/// the lowest-index containing cell; the `union_*` variants grow from every
/// cell meeting the point, the convention needed at junction points.
#[derive(Debug, Clone)]
pub struct Locate {
    pub cell: u32,
    pub containing: Vec<u32>,
    pub star: Vec<u32>,
    pub double_star: Vec<u32>,
    pub union_star: Vec<u32>,
    pub union_double_star: Vec<u32>,
}

/// Tolerance-based coordinate interner.
struct Interner {
    dim: usize,
    tol: f64,
    quantum: f64,
    buckets: HashMap<Vec<i64>, Vec<u32>>,
}

enum Interned {
    Existing(u32),
    New,
    Collision(u32, f64),
}

impl Interner {
    fn new(dim: usize, tol: f64) -> Self {
        Self {
            dim,
            tol,
            quantum: 256.0 * tol,
            buckets: HashMap::new(),
        }
    }

    /// Looks for a vertex within `tol` of `p`, scanning all buckets that
    /// could hold one within `100 tol`.
    fn probe(&self, coords: &[f64], p: &[f64]) -> Interned {
        let reach = 100.0 * self.tol;
        let lo: Vec<i64> = (0..self.dim)
            .map(|k| ((p[k] - reach) / self.quantum).floor() as i64)
            .collect();
        let hi: Vec<i64> = (0..self.dim)
            .map(|k| ((p[k] + reach) / self.quantum).floor() as i64)
            .collect();
        let mut best: Option<(u32, f64)> = None;
        let mut key = lo.clone();
        loop {
            if let Some(ids) = self.buckets.get(&key) {
                for &id in ids {
                    let q = &coords[id as usize * self.dim..(id as usize + 1) * self.dim];
                    let d = dist(p, q);
                    if best.map_or(true, |(_, bd)| d < bd) {
                        best = Some((id, d));
                    }
                }
            }
            let mut k = 0;
            loop {
                if k == self.dim {
                    return match best {
                        Some((id, d)) if d <= self.tol => Interned::Existing(id),
                        Some((id, d)) if d <= reach => Interned::Collision(id, d),
                        _ => Interned::New,
                    };
                }
                key[k] += 1;
                if key[k] <= hi[k] {
                    break;
                }
                key[k] = lo[k];
                k += 1;
            }
        }
    }

    fn insert(&mut self, p: &[f64], id: u32) {
        let key: Vec<i64> = (0..self.dim)
            .map(|k| (p[k] / self.quantum).floor() as i64)
            .collect();
        self.buckets.entry(key).or_default().push(id);
    }
}

/// A level-n vertex mesh of the fractal (or of the truncation `L^t K`), with
/// quadrature weights, cell structure, and a spatial index.
pub struct LevelMesh {
    pub spec: Arc<FractalSpec>,
    pub level: usize,
    pub truncation: usize,
    pub dim: usize,
    /// Flat vertex coordinates, `dim` per vertex.
    pub coords: Vec<f64>,
    pub weights: Vec<f64>,
    pub simplices: Vec<Simplex>,
    pub edges: Vec<Edge>,
    /// Simplex ids incident to each vertex, ascending.
    pub incidence: Vec<Vec<u32>>,
    /// Cell diameter at the mesh level.
    pub resolution: f64,
    grid: SpatialGrid,
    coarse: Vec<CoarseLevel>,
    /// Unscaled vertex cloud of K at `cloud_level`, for point location.
    cloud: Vec<f64>,
    cloud_grid: SpatialGrid,
    cloud_level: usize,
    /// Per-radius neighbor tables, built on first use. The variation ladders
    /// revisit the same few radii for every function and locus; rebuilding
    /// the balls through the grid each time dominates the runtime otherwise.
    neighbor_cache: Mutex<HashMap<u64, Arc<NeighborTable>>>,
}

/// All mesh balls of one radius: `lists[x]` is `B(x, r)` as sorted vertex
/// ids, `masses[x]` its total weight.
pub struct NeighborTable {
    pub r: f64,
    pub lists: Vec<Vec<u32>>,
    pub masses: Vec<f64>,
}

impl LevelMesh {
    pub fn build(
        spec: Arc<FractalSpec>,
        level: usize,
        truncation: usize,
        budget: &MeshBudget,
    ) -> Result<Self> {
        let m = spec.mass_factor;
        let b = spec.boundary_len();
        let dim = spec.dim;
        let n_cells = m
            .checked_pow(level as u32)
            .filter(|&c| c <= budget.max_simplices)
            .ok_or_else(|| Error::Budget {
                stage: "build_mesh",
                detail: format!(
                    "level {level} needs {m}^{level} simplices, over the limit {}",
                    budget.max_simplices
                ),
            })?;
        if truncation > 0 && !spec.blowup_ready {
            return Err(Error::Unsupported(
                "truncations need a first similitude that is a pure contraction \
                 fixing the origin"
                    .into(),
            ));
        }

        let scale_len = spec.length_factor.powi(truncation as i32);
        let scale_mass = (m as f64).powi(truncation as i32);
        let step = spec.length_factor.powi(-(level as i32));
        let tol = 1e-9 * step * spec.diameter.max(1.0);
        let mut interner = Interner::new(dim, tol);
        let mut coords: Vec<f64> = Vec::new();
        let mut incidence: Vec<Vec<u32>> = Vec::new();
        let mut simplices = Vec::with_capacity(n_cells);
        let mut edges = Vec::with_capacity(n_cells * b * (b - 1) / 2);
        let cell_measure = scale_mass * (m as f64).powi(-(level as i32));
        let cell_diameter = scale_len * step * spec.diameter;

        for c in 0..n_cells {
            let word = Word::from_index(c, m, level);
            let mut vertex_ids = Vec::with_capacity(b);
            for q in &spec.boundary {
                let mut p = spec.apply_word(&word.0, q);
                for v in &mut p {
                    *v *= scale_len;
                }
                let id = match interner.probe(&coords, &p) {
                    Interned::Existing(id) => id,
                    Interned::New => {
                        let id = coords.len() as u32 / dim as u32;
                        interner.insert(&p, id);
                        coords.extend_from_slice(&p);
                        incidence.push(Vec::new());
                        id
                    }
                    Interned::Collision(other, d) => {
                        return Err(Error::InvalidSpec(format!(
                            "vertex dedup collision at level {level}: cell {c} corner \
                             is {d:.3e} from vertex {other}, between the merge and \
                             separation tolerances"
                        )));
                    }
                };
                if incidence[id as usize].last() != Some(&(c as u32)) {
                    incidence[id as usize].push(c as u32);
                }
                vertex_ids.push(id);
            }
            for a in 0..b {
                for bb in (a + 1)..b {
                    edges.push(Edge {
                        u: vertex_ids[a],
                        v: vertex_ids[bb],
                        orbit: spec.orbits.orbit(a, bb),
                    });
                }
            }
            simplices.push(Simplex {
                word,
                vertex_ids,
                measure: cell_measure,
                diameter: cell_diameter,
            });
        }

        let n_vertices = coords.len() / dim;
        let unit = cell_measure / b as f64;
        let weights: Vec<f64> = incidence.iter().map(|inc| inc.len() as f64 * unit).collect();
        let resolution = cell_diameter;
        let grid = SpatialGrid::build(&coords, dim, resolution.max(f64::MIN_POSITIVE));

        // Coarsenings for every m <= level, with corner ids resolved through
        // the same interner.
        let mut coarse = Vec::with_capacity(level + 1);
        for cm in 0..=level {
            let n_coarse = m.pow(cm as u32);
            let run = m.pow((level - cm) as u32) as u32;
            let mut cells = Vec::with_capacity(n_coarse);
            let mut by_vertex: HashMap<u32, Vec<u32>> = HashMap::new();
            for c in 0..n_coarse {
                let word = Word::from_index(c, m, cm);
                let mut corner_ids = Vec::with_capacity(b);
                for q in &spec.boundary {
                    let mut p = spec.apply_word(&word.0, q);
                    for v in &mut p {
                        *v *= scale_len;
                    }
                    let id = match interner.probe(&coords, &p) {
                        Interned::Existing(id) => id,
                        _ => {
                            return Err(Error::InvalidSpec(format!(
                                "level-{cm} cell corner missing from the level-{level} \
                                 vertex set"
                            )))
                        }
                    };
                    by_vertex.entry(id).or_default().push(c as u32);
                    corner_ids.push(id);
                }
                cells.push(CoarseCell {
                    word,
                    corner_ids,
                    simplex_start: c as u32 * run,
                });
            }
            let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n_coarse];
            for shared in by_vertex.values() {
                for &a in shared {
                    for &bb in shared {
                        if a != bb {
                            neighbors[a as usize].push(bb);
                        }
                    }
                }
            }
            for list in &mut neighbors {
                list.sort_unstable();
                list.dedup();
            }
            coarse.push(CoarseLevel {
                m: cm,
                cells,
                neighbors,
            });
        }

        // Point-location cloud on the unscaled compact fractal.
        let mut cloud_level = 1usize;
        while cloud_level < 6 && m.pow(cloud_level as u32 + 1) * b <= 20_000 {
            cloud_level += 1;
        }
        let n_cloud_cells = m.pow(cloud_level as u32);
        let mut cloud = Vec::with_capacity(n_cloud_cells * b * dim);
        for c in 0..n_cloud_cells {
            let word = Word::from_index(c, m, cloud_level);
            for q in &spec.boundary {
                cloud.extend_from_slice(&spec.apply_word(&word.0, q));
            }
        }
        let cloud_step = spec.length_factor.powi(-(cloud_level as i32)) * spec.diameter;
        let cloud_grid = SpatialGrid::build(&cloud, dim, cloud_step.max(f64::MIN_POSITIVE));

        debug_assert_eq!(weights.len(), n_vertices);
        Ok(Self {
            spec,
            level,
            truncation,
            dim,
            coords,
            weights,
            simplices,
            edges,
            incidence,
            resolution,
            grid,
            coarse,
            cloud,
            cloud_grid,
            cloud_level,
            neighbor_cache: Mutex::new(HashMap::new()),
        })
    }

    /// The neighbor table for radius `r`, cached on the mesh.
    pub fn neighbor_table(&self, r: f64) -> Arc<NeighborTable> {
        let key = r.to_bits();
        if let Some(t) = self.neighbor_cache.lock().unwrap().get(&key) {
            return t.clone();
        }
        let nv = self.n_vertices();
        let lists: Vec<Vec<u32>> = (0..nv as u32)
            .map(|x| self.ball_query(self.vertex(x), r))
            .collect();
        let masses: Vec<f64> = lists
            .iter()
            .map(|b| b.iter().map(|&id| self.weights[id as usize]).sum())
            .collect();
        let table = Arc::new(NeighborTable { r, lists, masses });
        self.neighbor_cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert(table)
            .clone()
    }

    pub fn n_vertices(&self) -> usize {
        self.weights.len()
    }

    pub fn vertex(&self, id: u32) -> &[f64] {
        &self.coords[id as usize * self.dim..(id as usize + 1) * self.dim]
    }

    /// Total mass, `M^t`.
    pub fn total_mass(&self) -> f64 {
        (self.spec.mass_factor as f64).powi(self.truncation as i32)
    }

    pub fn same_mesh(&self, other: &LevelMesh) -> bool {
        self.spec.name == other.spec.name
            && self.level == other.level
            && self.truncation == other.truncation
            && self.n_vertices() == other.n_vertices()
    }

    /// Vertex ids within distance `r` of `x`, ascending.
    pub fn ball_query(&self, x: &[f64], r: f64) -> Vec<u32> {
        self.grid.ball(&self.coords, x, r)
    }

    /// Empirical measure of the ball: sum of vertex weights within `r`.
    pub fn ball_mass(&self, x: &[f64], r: f64) -> f64 {
        self.ball_query(x, r)
            .iter()
            .map(|&id| self.weights[id as usize])
            .sum()
    }

    pub fn coarse(&self, m: usize) -> &CoarseLevel {
        &self.coarse[m]
    }

    /// Sorted vertex ids of a set of coarse cells.
    pub fn cell_vertices(&self, m: usize, cells: &[u32]) -> Vec<u32> {
        let run = self
            .spec
            .mass_factor
            .pow((self.level - m) as u32) as u32;
        let mut out = Vec::new();
        for &c in cells {
            let start = self.coarse[m].cells[c as usize].simplex_start;
            for s in start..start + run {
                out.extend_from_slice(&self.simplices[s as usize].vertex_ids);
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn near_attractor(&self, y: &[f64], tol: f64) -> bool {
        !self.cloud_grid.ball(&self.cloud, y, tol).is_empty()
    }

    /// Locates `x` at coarse level `m`: the containing cell(s), star, and
    /// double star. Junction points use the lowest containing index for
    /// `cell`; the union variants include every meeting cell.
    pub fn locate(&self, x: &[f64], m: usize) -> Result<Locate> {
        if m > self.level {
            return Err(Error::Usage(format!(
                "coarse level {m} above mesh level {}",
                self.level
            )));
        }
        let spec = &self.spec;
        let inv_scale = spec.length_factor.powi(-(self.truncation as i32));
        let y0: Vec<f64> = x.iter().map(|&v| v * inv_scale).collect();
        let member_tol = 1.25
            * spec.diameter
            * spec.length_factor.powi(-(self.cloud_level as i32));
        if !self.near_attractor(&y0, member_tol) {
            return Err(Error::Domain(
                "point is not on the fractal within tolerance".into(),
            ));
        }

        // Descend: a point lies in cell i exactly when its preimage under
        // the i-th similitude lies on the fractal.
        let mut frontier: Vec<(usize, Vec<f64>)> = vec![(0, y0)];
        for _ in 0..m {
            let mut next = Vec::new();
            for (idx, y) in &frontier {
                for (i, sim) in spec.similitudes.iter().enumerate() {
                    // Preimage: U^T (y - a) L.
                    let d = self.dim;
                    let mut shifted = vec![0.0; d];
                    for k in 0..d {
                        shifted[k] = y[k] - sim.translation[k];
                    }
                    let mut pre = vec![0.0; d];
                    for k in 0..d {
                        let mut acc = 0.0;
                        for l in 0..d {
                            acc += sim.unitary[[l, k]] * shifted[l];
                        }
                        pre[k] = acc / sim.contraction;
                    }
                    if self.near_attractor(&pre, member_tol) {
                        next.push((idx * spec.mass_factor + i, pre));
                    }
                }
            }
            if next.is_empty() {
                return Err(Error::Domain(
                    "point location lost the fractal during descent".into(),
                ));
            }
            frontier = next;
        }
        let mut containing: Vec<u32> = frontier.iter().map(|(idx, _)| *idx as u32).collect();
        containing.sort_unstable();
        containing.dedup();

        let level = &self.coarse[m];
        let grow = |seed: &[u32]| -> Vec<u32> {
            let mut out: Vec<u32> = seed.to_vec();
            for &c in seed {
                out.extend_from_slice(&level.neighbors[c as usize]);
            }
            out.sort_unstable();
            out.dedup();
            out
        };
        let cell = containing[0];
        let star = grow(&[cell]);
        let double_star = grow(&star);
        let union_star = grow(&containing);
        let union_double_star = grow(&union_star);
        Ok(Locate {
            cell,
            containing,
            star,
            double_star,
            union_star,
            union_double_star,
        })
    }
}

/// The level-n cells with their measures and corner ids.
pub fn enumerate_simplices(
    spec: &Arc<FractalSpec>,
    n: usize,
    budget: &MeshBudget,
) -> Result<Vec<Simplex>> {
    Ok(LevelMesh::build(spec.clone(), n, 0, budget)?.simplices)
}
