//! Dirichlet forms, renormalization, spectra, and heat kernels on level meshes.

mod eigen;
mod energy;
mod harmonic;
mod heat;
mod renorm;

pub use eigen::{spectral_decompose, SpectralData};
pub use energy::EnergyForm;
pub use harmonic::harmonic_extension;
pub use heat::{
    heat_asymptotics, heat_kernel, heat_kernel_diag, heat_kernel_row, resolvable_window,
    semigroup_apply, HeatAsymptotics, HeatKernelSlice,
};
pub use renorm::{renormalize_conductances, BaseHarmonic};
