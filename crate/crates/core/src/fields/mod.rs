//! Fluctuation fields and the estimators built on them.

pub mod bg;
pub mod density;
pub mod energy;
pub mod martingale;
pub mod structure;
pub mod testfn;

pub use bg::{bg_residual, bg_time_integrals, bound_shape, weight_norm_sq};
pub use density::{box_average, current_field, density_field, density_series, Channel, Direction, FieldSeries, MovingFrame};
pub use energy::{energy_estimate_stats, nonlinear_series, quadratic_variation, EnergyStats};
pub use martingale::{martingale_decomposition, Decomposition, MIN_GRID_POINTS};
pub use structure::{structure_function, StructureFunction};
pub use testfn::{discrete_operators, TestFunction};
