//! Deterministic hydrodynamic reference solvers on the torus.
//!
//! Conventions: SSEP diffusivity is 1/2 (bond rates 1/2 each way), the ABC
//! system has diffusivity 1 (exchange rate 1 each way).

pub mod fd;
pub mod grid;
pub mod spectral;

pub use fd::{solve_abc_hydro, solve_inviscid_burgers, solve_viscous_burgers};
pub use grid::{block_average, empirical_profile, hydro_compare, GridFunction, Norm};
pub use spectral::{long_jump_coefficient, ou_mode_covariance, solve_fractional_heat, solve_heat};
