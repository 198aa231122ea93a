use std::f64::consts::PI;

use serde::Serialize;

use super::{check_beta, Mode, ModeSum};
use crate::error::Result;
use crate::model::QuadraticObjective;
use crate::special::ln_gamma;

/// Closed form of the Gaussian integral `∫ e^{-βO(x)} dx` over R^N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QpTransform {
    pub log_z: f64,
    pub o_min: f64,
    pub mean: f64,
    pub variance: f64,
}

fn log_prefactor(q: &QuadraticObjective) -> f64 {
    0.5 * q.dimension() as f64 * (2.0 * PI).ln() - 0.5 * q.log_det()
}

/// `ln Z = (N/2) ln(2π/β) − ½ ln det A − β O_min`, `⟨O⟩ = O_min + N/(2β)`.
pub fn qp_partition_function(q: &QuadraticObjective, beta: f64) -> Result<QpTransform> {
    check_beta(beta)?;
    let n = q.dimension() as f64;
    let o_min = q.min_value();
    Ok(QpTransform {
        log_z: log_prefactor(q) - 0.5 * n * beta.ln() - beta * o_min,
        o_min,
        mean: o_min + 0.5 * n / beta,
        variance: 0.5 * n / (beta * beta),
    })
}

/// `Ω_⊥(O) = (2π)^{N/2} det(A)^{-1/2} (O − O_min)^{N/2−1} / Γ(N/2)`, zero at
/// or below the minimum.
pub fn qp_slice_volume(q: &QuadraticObjective, o: f64) -> f64 {
    let excess = o - q.min_value();
    if excess <= 0.0 {
        return 0.0;
    }
    let half_n = 0.5 * q.dimension() as f64;
    (log_prefactor(q) - ln_gamma(half_n) + (half_n - 1.0) * excess.ln()).exp()
}

/// Single-mode form `e^{-βO_min} C β^{-N/2}`, available when N is even.
pub fn qp_mode_sum(q: &QuadraticObjective) -> Option<ModeSum> {
    let n = q.dimension();
    if n % 2 != 0 {
        return None;
    }
    let mut coeffs = vec![0.0; n / 2];
    coeffs[n / 2 - 1] = log_prefactor(q).exp();
    ModeSum::new(vec![Mode {
        gamma: q.min_value(),
        coeffs,
    }])
    .ok()
}
