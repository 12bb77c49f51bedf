//! Nested-fractal geometry: similitudes, word addressing, level meshes.

mod beta;
mod grid;
mod mesh;
mod similitude;
mod spec;
pub(crate) mod symmetry;

pub use beta::{separation_beta, BetaEstimate};
pub use grid::SpatialGrid;
pub use mesh::{
    enumerate_simplices, CoarseCell, CoarseLevel, Edge, LevelMesh, Locate, MeshBudget,
    NeighborTable, Simplex, Word,
};
pub use similitude::Similitude;
pub use spec::{build_spec, build_spec_from_ifs, FractalSpec, IfsData};
pub use symmetry::PairOrbits;

/// Squared Euclidean distance between two points given as flat slices.
#[inline]
pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Euclidean distance.
#[inline]
pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}
