//! Empirical verification of the functional inequalities: each check
//! evaluates one inequality on a suite of test functions, measures the
//! implied constant, and reports scale stability and exponent fits.

mod config;
mod context;
mod report;

mod adjacent;
mod coarea;
mod heatreg;
mod lusin;
mod morrey;
mod poincare;
mod pseudo;
mod sobolev;
mod truncbound;
mod varcomp;

pub use adjacent::check_adjacent_simplices_l1;
pub use coarea::check_coarea;
pub use config::{BallLocus, CheckConfig, SuiteFunction};
pub use context::LabContext;
pub use heatreg::check_heat_regularity;
pub use lusin::check_lusin_holder;
pub use morrey::{check_morrey, MorreyLocus};
pub use poincare::{check_poincare, PoincareLocus};
pub use pseudo::{check_pseudo_poincare, PseudoMechanism};
pub use report::{fit_exponent, CheckReport, ExponentFit, InstanceRecord};
pub use sobolev::check_sobolev;
pub use truncbound::check_truncation_bound;
pub use varcomp::check_variation_comparison;
