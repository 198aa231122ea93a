use serde::{Deserialize, Serialize};

use super::{check_beta, MomentReport};
use crate::error::{Error, Result};
use crate::model::{ConstraintSet, LinearObjective};
use crate::polytope::{slice_volume, SliceVolumeFunction};

/// One term `e^{-βΓ} Σ_k c_k β^{-k}`; `coeffs[0]` multiplies `β^{-1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub gamma: f64,
    pub coeffs: Vec<f64>,
}

/// Closed-form `Z(β) = Σ_η e^{-βΓ_η} Σ_k c_k^η β^{-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModeSum")]
pub struct ModeSum {
    modes: Vec<Mode>,
}

#[derive(Deserialize)]
struct RawModeSum {
    modes: Vec<Mode>,
}

impl TryFrom<RawModeSum> for ModeSum {
    type Error = Error;

    fn try_from(raw: RawModeSum) -> Result<Self> {
        ModeSum::new(raw.modes)
    }
}

struct Terms {
    s0: f64,
    s1: f64,
    s2: f64,
}

impl ModeSum {
    pub fn new(modes: Vec<Mode>) -> Result<Self> {
        if modes.is_empty() {
            return Err(Error::input("mode sum needs at least one mode"));
        }
        if modes.windows(2).any(|w| !(w[0].gamma < w[1].gamma)) {
            return Err(Error::input("mode exponents must be strictly increasing"));
        }
        if modes
            .iter()
            .any(|m| !m.gamma.is_finite() || m.coeffs.iter().any(|c| !c.is_finite()))
        {
            return Err(Error::input("mode parameters must be finite"));
        }
        Ok(Self { modes })
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Σ w_η P_η and its first two β-derivatives, with
    /// `w_η = e^{-β(Γ_η - Γ_1)}` so the leading mode is factored out.
    fn terms(&self, beta: f64) -> Terms {
        let g1 = self.modes[0].gamma;
        let mut t = Terms {
            s0: 0.0,
            s1: 0.0,
            s2: 0.0,
        };
        for m in &self.modes {
            let delta = m.gamma - g1;
            let w = (-beta * delta).exp();
            if w == 0.0 {
                continue;
            }
            let (mut p, mut dp, mut ddp) = (0.0, 0.0, 0.0);
            for (i, c) in m.coeffs.iter().enumerate() {
                let k = (i + 1) as f64;
                let bk = beta.powi(-(i as i32 + 1));
                p += c * bk;
                dp -= k * c * bk / beta;
                ddp += k * (k + 1.0) * c * bk / (beta * beta);
            }
            t.s0 += w * p;
            t.s1 += w * (dp - delta * p);
            t.s2 += w * (ddp - 2.0 * delta * dp + delta * delta * p);
        }
        t
    }

    pub fn eval_z(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        Ok((-beta * self.modes[0].gamma).exp() * self.terms(beta).s0)
    }

    pub fn log_z(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let s = self.terms(beta).s0;
        if s <= 0.0 {
            return Err(Error::input(format!(
                "mode sum is not positive at beta={beta} (cancellation below working precision)"
            )));
        }
        Ok(-beta * self.modes[0].gamma + s.ln())
    }

    /// ⟨O⟩ = −∂ ln Z/∂β.
    pub fn mean_objective(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let t = self.terms(beta);
        Ok(self.modes[0].gamma - t.s1 / t.s0)
    }

    /// Var O = ∂² ln Z/∂β², clamped at zero against rounding.
    pub fn variance(&self, beta: f64) -> Result<f64> {
        check_beta(beta)?;
        let t = self.terms(beta);
        let r = t.s1 / t.s0;
        Ok((t.s2 / t.s0 - r * r).max(0.0))
    }

    pub fn moments(&self, beta: f64) -> Result<MomentReport> {
        Ok(MomentReport::scalar(beta, self.mean_objective(beta)?, self.variance(beta)?))
    }

    /// Every Γ moved by `delta`; Z gains the factor `e^{-βΔ}`.
    pub fn shift(&self, delta: f64) -> Self {
        Self {
            modes: self
                .modes
                .iter()
                .map(|m| Mode {
                    gamma: m.gamma + delta,
                    coeffs: m.coeffs.clone(),
                })
                .collect(),
        }
    }

    /// Mode sum of `β ↦ Z(β/α)/α`: Γ → Γ/α and `c_k → c_k α^{k-1}`.
    pub fn rescale(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::input(format!("rescale factor must be positive, got {alpha}")));
        }
        Ok(Self {
            modes: self
                .modes
                .iter()
                .map(|m| Mode {
                    gamma: m.gamma / alpha,
                    coeffs: m
                        .coeffs
                        .iter()
                        .enumerate()
                        .map(|(i, c)| c * alpha.powi(i as i32))
                        .collect(),
                })
                .collect(),
        })
    }
}

/// `p^{(j)}(x)` for a coefficient list in ascending powers.
fn derivative_at(p: &[f64], j: usize, x: f64) -> f64 {
    let mut acc = 0.0;
    for i in (j..p.len()).rev() {
        let falling: f64 = (0..j).map(|r| (i - r) as f64).product();
        acc = acc * x + p[i] * falling;
    }
    acc
}

/// Mode sum of `∫ Ω_⊥(O) e^{-βO} dO` by repeated integration by parts:
/// the β^{-k} coefficient at Γ_η is the jump of the (k−1)-th derivative of
/// Ω_⊥ across Γ_η.
pub fn lp_partition_function(sv: &SliceVolumeFunction) -> ModeSum {
    let bps = sv.breakpoints();
    let pieces = sv.pieces();
    let order = pieces.iter().map(Vec::len).max().unwrap_or(1);
    // (right, left) (k−1)-th derivatives at every breakpoint
    let sides: Vec<Vec<(f64, f64)>> = bps
        .iter()
        .enumerate()
        .map(|(eta, &g)| {
            (0..order)
                .map(|j| {
                    let right = pieces.get(eta).map_or(0.0, |p| derivative_at(p, j, g));
                    let left = if eta > 0 { derivative_at(&pieces[eta - 1], j, g) } else { 0.0 };
                    (right, left)
                })
                .collect()
        })
        .collect();
    let scale: Vec<f64> = (0..order)
        .map(|j| sides.iter().fold(0.0f64, |m, s| m.max(s[j].0.abs()).max(s[j].1.abs())))
        .collect();
    let modes = bps
        .iter()
        .zip(&sides)
        .map(|(&g, s)| {
            let coeffs = s
                .iter()
                .zip(&scale)
                .map(|(&(right, left), &sc)| {
                    let c = right - left;
                    // jumps that cancel to rounding are continuity, not modes
                    if c.abs() <= 1e-9 * sc {
                        0.0
                    } else {
                        c
                    }
                })
                .collect();
            Mode { gamma: g, coeffs }
        })
        .collect();
    ModeSum { modes }
}

/// Polytope → slice volume → mode sum in one step.
pub fn lp_mode_sum(cs: &ConstraintSet, obj: &LinearObjective) -> Result<ModeSum> {
    Ok(lp_partition_function(&slice_volume(cs, obj)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn section_iv_slices() -> SliceVolumeFunction {
        SliceVolumeFunction::new(
            vec![0.0, 2.0, 4.0, 12.0, 36.0],
            vec![vec![0.0, 2.5], vec![2.0, 1.5], vec![7.0, 0.25], vec![15.0, -5.0 / 12.0]],
        )
        .unwrap()
    }

    // Z(β) = (5/2 − e^{-2β} − (5/4)e^{-4β} − (2/3)e^{-12β} + (5/12)e^{-36β}) / β²
    fn section_iv_closed(beta: f64) -> f64 {
        (2.5 - (-2.0 * beta).exp() - 1.25 * (-4.0 * beta).exp() - (2.0 / 3.0) * (-12.0 * beta).exp()
            + (5.0 / 12.0) * (-36.0 * beta).exp())
            / (beta * beta)
    }

    #[test]
    fn section_iv_modes() {
        let ms = lp_partition_function(&section_iv_slices());
        let expect = [2.5, -1.0, -1.25, -2.0 / 3.0, 5.0 / 12.0];
        for (m, e) in ms.modes().iter().zip(expect) {
            assert_eq!(m.coeffs[0], 0.0);
            assert!((m.coeffs[1] - e).abs() < 1e-14);
        }
        assert!((ms.eval_z(1.0).unwrap() - 2.341766).abs() < 1e-6);
        assert!((ms.eval_z(0.3).unwrap() - section_iv_closed(0.3)).abs() < 1e-13);
    }

    #[test]
    fn slab_modes() {
        let sv = SliceVolumeFunction::new(vec![0.0, 1.0], vec![vec![1.0]]).unwrap();
        let ms = lp_partition_function(&sv);
        assert_eq!(ms.modes()[0].coeffs, vec![1.0]);
        assert_eq!(ms.modes()[1].coeffs, vec![-1.0]);
        let b: f64 = 1e-4;
        assert!((ms.eval_z(b).unwrap() - 1.0).abs() < 1e-4);
    }

    #[test]
    fn single_mode_pi_over_beta() {
        let ms = ModeSum::new(vec![Mode {
            gamma: 0.0,
            coeffs: vec![std::f64::consts::PI],
        }])
        .unwrap();
        assert!((ms.eval_z(2.0).unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!((ms.mean_objective(2.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((ms.variance(2.0).unwrap() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn moments_match_finite_differences() {
        let ms = lp_partition_function(&section_iv_slices());
        for beta in [0.2, 1.0, 3.0] {
            let h = 1e-4 * beta;
            let l = |b: f64| ms.log_z(b).unwrap();
            let fd_mean = -(l(beta + h) - l(beta - h)) / (2.0 * h);
            let fd_var = (l(beta + h) - 2.0 * l(beta) + l(beta - h)) / (h * h);
            let mean = ms.mean_objective(beta).unwrap();
            let var = ms.variance(beta).unwrap();
            assert!(((mean - fd_mean) / mean).abs() < 1e-6, "{mean} {fd_mean}");
            assert!(((var - fd_var) / var).abs() < 1e-4, "{var} {fd_var}");
        }
    }

    #[test]
    fn low_temperature_limit() {
        let ms = lp_partition_function(&section_iv_slices());
        let t = 1e-3;
        let mean = ms.mean_objective(1.0 / t).unwrap();
        assert!((mean - 2.0 * t).abs() < 0.02 * 2.0 * t);
        assert!(ms.mean_objective(1e4).unwrap() < 1e-3);
    }

    #[test]
    fn shift_and_rescale() {
        let ms = lp_partition_function(&section_iv_slices());
        let s = ms.shift(0.0);
        assert_eq!(s, ms);
        let shifted = ms.shift(1.5);
        let b = 0.7;
        assert!(
            (shifted.eval_z(b).unwrap() - (-b * 1.5f64).exp() * ms.eval_z(b).unwrap()).abs() < 1e-14
        );
        assert!((shifted.mean_objective(b).unwrap() - ms.mean_objective(b).unwrap() - 1.5).abs() < 1e-12);
        let r = ms.rescale(2.0).unwrap();
        assert!((r.eval_z(1.0).unwrap() - 0.5 * ms.eval_z(0.5).unwrap()).abs() < 1e-13);
        assert!(ms.rescale(0.0).is_err());
    }

    #[test]
    fn rejects_nonpositive_beta() {
        let ms = lp_partition_function(&section_iv_slices());
        assert!(ms.eval_z(0.0).is_err());
        assert!(ms.mean_objective(-1.0).is_err());
    }

    #[test]
    fn derivative_helper() {
        // p = 1 + 2x + 3x²
        let p = [1.0, 2.0, 3.0];
        assert_eq!(derivative_at(&p, 0, 2.0), 17.0);
        assert_eq!(derivative_at(&p, 1, 2.0), 14.0);
        assert_eq!(derivative_at(&p, 2, 2.0), 6.0);
        assert_eq!(derivative_at(&p, 3, 2.0), 0.0);
    }
}
