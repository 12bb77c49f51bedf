//! Discrete functions on level meshes and the variation machinery built on
//! them: Korevaar-Schoen and kernel-weighted p-variations, Besov seminorms,
//! truncations, level sets, moving averages, and the maximal function.

mod averages;
mod besov;
mod function;
mod levelsets;
mod maximal;
mod truncation;
mod variation;

pub use averages::moving_average;
pub use besov::besov_seminorm;
pub use function::{make_test_function, DiscreteFunction, TestFunctionKind};
pub use levelsets::{level_sets, value_grid, LevelSetFamily};
pub use maximal::{maximal_function, MaximalField};
pub use truncation::truncations;
pub use variation::{variation, variation_raw_sum, VariationKind, VariationProfile};
