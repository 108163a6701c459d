//! Error theory of the hybrid scheme and the roughness estimator.

mod cof;
mod experiment;
mod jfun;
mod mse;

pub use cof::{cof_estimate, subsample, CofResult};
pub use experiment::{
    cof_experiment, empirical_mse_experiment, j_table, write_table, CofExperiment, CofRow, CofScheme, JRow,
    MseExperiment, MseRow, Tabular,
};
pub use jfun::{cell_error, evaluation_point, j_functional, j_summand, j_tilde, rmse_reduction, JQuery, DEFAULT_TERMS};
pub use mse::{analytic_mse, discretized_second_moment, theoretical_mse, MseBreakdown};
