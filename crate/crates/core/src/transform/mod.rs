//! Closed-form transforms: mode sums for linear programs, Gaussian forms for
//! quadratic programs, and analytic volume models.

mod modes;
mod qp;
mod volume;

pub use modes::{lp_mode_sum, lp_partition_function, Mode, ModeSum};
pub use qp::{qp_mode_sum, qp_partition_function, qp_slice_volume, QpTransform};
pub use volume::{volume_model_z, VolumeModel, VolumeTransform};

use serde::Serialize;

/// Moments of the objective at one filter strength.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub beta: f64,
    pub temperature: f64,
    /// ⟨O⟩ of the first objective.
    pub mean_o: f64,
    pub std_o: f64,
    /// Per-objective means; a single entry for scalar problems.
    pub means: Vec<f64>,
    pub covariance: Vec<Vec<f64>>,
}

impl MomentReport {
    pub fn scalar(beta: f64, mean: f64, variance: f64) -> Self {
        let variance = variance.max(0.0);
        Self {
            beta,
            temperature: 1.0 / beta,
            mean_o: mean,
            std_o: variance.sqrt(),
            means: vec![mean],
            covariance: vec![vec![variance]],
        }
    }
}

pub(crate) fn check_beta(beta: f64) -> crate::Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(crate::Error::input(format!("beta must be positive and finite, got {beta}")))
    }
}
