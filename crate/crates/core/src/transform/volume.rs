use serde::{Deserialize, Serialize};

use super::check_beta;
use crate::error::{Error, Result};
use crate::special::{ln_gamma, ln_gamma_p, log_sum_exp, logistic};

/// Analytic level-set volume families near minima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum VolumeModel {
    /// `γ (O − O_min)^{N/ν − 1}`.
    PowerLaw { gamma: f64, n_ip: f64, nu: f64, o_min: f64 },
    /// Power law times `1 + ((O − O_min)/T_*)^{ΔN}`.
    Expansion {
        gamma: f64,
        n_ip: f64,
        nu: f64,
        o_min: f64,
        t_star: f64,
        delta_n: f64,
    },
    /// Global and local minimum, each with its own power law.
    TwoMinima {
        gamma_g: f64,
        gamma_l: f64,
        n_g: f64,
        n_l: f64,
        nu: f64,
        o_g: f64,
        o_l: f64,
    },
    /// Power law below `O_*`; above it the value at `O_*` plus a second
    /// power law in `O − O_*`.
    Piecewise {
        gamma_lt: f64,
        gamma_gt: f64,
        n_lt: f64,
        n_gt: f64,
        nu_lt: f64,
        nu_gt: f64,
        o_min: f64,
        o_star: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeTransform {
    pub log_z: f64,
    pub z: f64,
    pub mean: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be positive and finite, got {v}")))
    }
}

fn count(name: &str, v: f64) -> Result<()> {
    if v >= 1.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be >= 1, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::input(format!("{name} must be finite")))
    }
}

impl VolumeModel {
    pub fn validate(&self) -> Result<()> {
        match *self {
            VolumeModel::PowerLaw { gamma, n_ip, nu, o_min } => {
                positive("gamma", gamma)?;
                count("n_ip", n_ip)?;
                positive("nu", nu)?;
                finite("o_min", o_min)
            }
            VolumeModel::Expansion {
                gamma,
                n_ip,
                nu,
                o_min,
                t_star,
                delta_n,
            } => {
                positive("gamma", gamma)?;
                count("n_ip", n_ip)?;
                positive("nu", nu)?;
                finite("o_min", o_min)?;
                positive("t_star", t_star)?;
                positive("delta_n", delta_n)
            }
            VolumeModel::TwoMinima {
                gamma_g,
                gamma_l,
                n_g,
                n_l,
                nu,
                o_g,
                o_l,
            } => {
                positive("gamma_g", gamma_g)?;
                positive("gamma_l", gamma_l)?;
                count("n_g", n_g)?;
                count("n_l", n_l)?;
                positive("nu", nu)?;
                finite("o_g", o_g)?;
                finite("o_l", o_l)?;
                if o_g < o_l {
                    Ok(())
                } else {
                    Err(Error::input("two-minima model requires o_g < o_l"))
                }
            }
            VolumeModel::Piecewise {
                gamma_lt,
                gamma_gt,
                n_lt,
                n_gt,
                nu_lt,
                nu_gt,
                o_min,
                o_star,
            } => {
                positive("gamma_lt", gamma_lt)?;
                positive("gamma_gt", gamma_gt)?;
                count("n_lt", n_lt)?;
                count("n_gt", n_gt)?;
                positive("nu_lt", nu_lt)?;
                positive("nu_gt", nu_gt)?;
                finite("o_min", o_min)?;
                finite("o_star", o_star)?;
                if o_min < o_star {
                    Ok(())
                } else {
                    Err(Error::input("piecewise model requires o_min < o_star"))
                }
            }
        }
    }

    /// Ω_⊥(O) of the model.
    pub fn density(&self, o: f64) -> f64 {
        let power = |g: f64, s: f64, e: f64| if s > 0.0 { g * s.powf(e) } else { 0.0 };
        match *self {
            VolumeModel::PowerLaw { gamma, n_ip, nu, o_min } => power(gamma, o - o_min, n_ip / nu - 1.0),
            VolumeModel::Expansion {
                gamma,
                n_ip,
                nu,
                o_min,
                t_star,
                delta_n,
            } => {
                let s = o - o_min;
                power(gamma, s, n_ip / nu - 1.0) * (1.0 + (s.max(0.0) / t_star).powf(delta_n))
            }
            VolumeModel::TwoMinima {
                gamma_g,
                gamma_l,
                n_g,
                n_l,
                nu,
                o_g,
                o_l,
            } => power(gamma_g, o - o_g, n_g / nu - 1.0) + power(gamma_l, o - o_l, n_l / nu - 1.0),
            VolumeModel::Piecewise {
                gamma_lt,
                gamma_gt,
                n_lt,
                n_gt,
                nu_lt,
                nu_gt,
                o_min,
                o_star,
            } => {
                if o < o_star {
                    power(gamma_lt, o - o_min, n_lt / nu_lt - 1.0)
                } else {
                    gamma_lt * (o_star - o_min).powf(n_lt / nu_lt - 1.0)
                        + power(gamma_gt, o - o_star, n_gt / nu_gt - 1.0)
                }
            }
        }
    }

    pub fn transform(&self, beta: f64) -> Result<VolumeTransform> {
        volume_model_z(self, beta)
    }
}

/// Closed-form `Z(β)` and `⟨O⟩` of a volume model, evaluated in logs.
pub fn volume_model_z(vm: &VolumeModel, beta: f64) -> Result<VolumeTransform> {
    check_beta(beta)?;
    vm.validate()?;
    let lb = beta.ln();
    let (log_z, mean) = match *vm {
        VolumeModel::PowerLaw { gamma, n_ip, nu, o_min } => {
            let a = n_ip / nu;
            (gamma.ln() + ln_gamma(a) - beta * o_min - a * lb, o_min + a / beta)
        }
        VolumeModel::Expansion {
            gamma,
            n_ip,
            nu,
            o_min,
            t_star,
            delta_n,
        } => {
            let a = n_ip / nu;
            let t = 1.0 / beta;
            // x = ln(Γ(a+ΔN)/Γ(a) · (T/T_*)^{ΔN})
            let x = ln_gamma(a + delta_n) - ln_gamma(a) + delta_n * (t.ln() - t_star.ln());
            let softplus = if x > 0.0 { x + (-x).exp().ln_1p() } else { x.exp().ln_1p() };
            (
                gamma.ln() + ln_gamma(a) - beta * o_min + a * t.ln() + softplus,
                o_min + a * t + delta_n * t * logistic(x),
            )
        }
        VolumeModel::TwoMinima {
            gamma_g,
            gamma_l,
            n_g,
            n_l,
            nu,
            o_g,
            o_l,
        } => {
            let (ag, al) = (n_g / nu, n_l / nu);
            let lg = gamma_g.ln() + ln_gamma(ag) - beta * o_g - ag * lb;
            let ll = gamma_l.ln() + ln_gamma(al) - beta * o_l - al * lb;
            let log_z = log_sum_exp(&[lg, ll]);
            let wg = (lg - log_z).exp();
            let wl = (ll - log_z).exp();
            (log_z, wg * (o_g + ag / beta) + wl * (o_l + al / beta))
        }
        VolumeModel::Piecewise {
            gamma_lt,
            gamma_gt,
            n_lt,
            n_gt,
            nu_lt,
            nu_gt,
            o_min,
            o_star,
        } => {
            let a = n_lt / nu_lt;
            let b = n_gt / nu_gt;
            let width = o_star - o_min;
            let ln_c = gamma_lt.ln() + (a - 1.0) * width.ln();
            let x = beta * width;
            let l1 = gamma_lt.ln() - beta * o_min - a * lb + ln_gamma(a) + ln_gamma_p(a, x);
            let l1m = gamma_lt.ln() - beta * o_min - (a + 1.0) * lb + ln_gamma(a + 1.0) + ln_gamma_p(a + 1.0, x);
            let l2 = -beta * o_star + log_sum_exp(&[ln_c - lb, gamma_gt.ln() + ln_gamma(b) - b * lb]);
            let l2m = -beta * o_star
                + log_sum_exp(&[ln_c - 2.0 * lb, gamma_gt.ln() + ln_gamma(b + 1.0) - (b + 1.0) * lb]);
            let log_z = log_sum_exp(&[l1, l2]);
            let w = |l: f64| (l - log_z).exp();
            (log_z, o_min * w(l1) + w(l1m) + o_star * w(l2) + w(l2m))
        }
    };
    Ok(VolumeTransform {
        log_z,
        z: log_z.exp(),
        mean,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate_piecewise, integrate_to_infinity};

    fn quadrature(vm: &VolumeModel, beta: f64, lo: f64, mid: Option<f64>) -> (f64, f64) {
        let z = |f: &dyn Fn(f64) -> f64| match mid {
            Some(m) => {
                integrate_piecewise(f, &[lo, m], 1e-300, 1e-12).value
                    + integrate_to_infinity(f, m, 1e-300, 1e-12).value
            }
            None => integrate_to_infinity(f, lo, 1e-300, 1e-12).value,
        };
        let z0 = z(&|o| vm.density(o) * (-beta * o).exp());
        let z1 = z(&|o| o * vm.density(o) * (-beta * o).exp());
        (z0.ln(), z1 / z0)
    }

    #[test]
    fn power_law_low_temperature_mean() {
        let vm = VolumeModel::PowerLaw {
            gamma: 1.0,
            n_ip: 4.0,
            nu: 2.0,
            o_min: 1.0,
        };
        let t = volume_model_z(&vm, 10.0).unwrap();
        assert!((t.mean - 1.2).abs() < 1e-14);
        let (lz, m) = quadrature(&vm, 10.0, 1.0, None);
        assert!((lz - t.log_z).abs() < 1e-9);
        assert!((m - t.mean).abs() < 1e-9);
    }

    #[test]
    fn expansion_matches_quadrature_and_asymptotes() {
        let vm = VolumeModel::Expansion {
            gamma: 2.0,
            n_ip: 1.0,
            nu: 1.0,
            o_min: 0.5,
            t_star: 1.0,
            delta_n: 2.0,
        };
        for beta in [0.05, 1.0, 20.0] {
            let t = volume_model_z(&vm, beta).unwrap();
            let (lz, m) = quadrature(&vm, beta, 0.5, None);
            assert!((lz - t.log_z).abs() < 1e-8, "beta {beta}: {lz} vs {}", t.log_z);
            assert!(((m - t.mean) / m).abs() < 1e-8);
        }
        let slope = |t1: f64, t2: f64| {
            let m = |t: f64| volume_model_z(&vm, 1.0 / t).unwrap().mean;
            (m(t2) - m(t1)) / (t2 - t1)
        };
        assert!((slope(1e-4, 2e-4) - 1.0).abs() < 1e-3);
        assert!((slope(1e4, 2e4) - 3.0).abs() < 1e-3);
    }

    #[test]
    fn two_minima_matches_quadrature() {
        let vm = VolumeModel::TwoMinima {
            gamma_g: 1.0,
            gamma_l: 3.0,
            n_g: 2.0,
            n_l: 4.0,
            nu: 2.0,
            o_g: 0.0,
            o_l: 1.0,
        };
        for beta in [0.3, 2.0, 15.0] {
            let t = volume_model_z(&vm, beta).unwrap();
            let (lz, m) = quadrature(&vm, beta, 0.0, Some(1.0));
            assert!((lz - t.log_z).abs() < 1e-8);
            assert!((m - t.mean).abs() < 1e-8 * m.abs().max(1.0));
        }
    }

    #[test]
    fn piecewise_matches_quadrature() {
        let vm = VolumeModel::Piecewise {
            gamma_lt: 1.5,
            gamma_gt: 4.0,
            n_lt: 2.0,
            n_gt: 3.0,
            nu_lt: 1.0,
            nu_gt: 1.0,
            o_min: -1.0,
            o_star: 0.5,
        };
        for beta in [0.01, 0.4, 3.0, 50.0] {
            let t = volume_model_z(&vm, beta).unwrap();
            let (lz, m) = quadrature(&vm, beta, -1.0, Some(0.5));
            assert!((lz - t.log_z).abs() < 1e-8, "beta {beta}: {lz} vs {}", t.log_z);
            assert!((m - t.mean).abs() < 1e-8 * m.abs().max(1.0), "beta {beta}: {m} vs {}", t.mean);
        }
    }

    #[test]
    fn piecewise_high_temperature_asymptote() {
        let vm = VolumeModel::Piecewise {
            gamma_lt: 1.0,
            gamma_gt: 1.0,
            n_lt: 1.0,
            n_gt: 2.0,
            nu_lt: 1.0,
            nu_gt: 1.0,
            o_min: 0.0,
            o_star: 1.0,
        };
        let t = 1e4;
        let mean = volume_model_z(&vm, 1.0 / t).unwrap().mean;
        assert!(((mean - (1.0 + 2.0 * t)) / t).abs() < 1e-3);
    }

    #[test]
    fn validation() {
        let bad = VolumeModel::TwoMinima {
            gamma_g: 1.0,
            gamma_l: 1.0,
            n_g: 2.0,
            n_l: 2.0,
            nu: 1.0,
            o_g: 1.0,
            o_l: 0.0,
        };
        assert!(volume_model_z(&bad, 1.0).is_err());
        let bad = VolumeModel::PowerLaw {
            gamma: -1.0,
            n_ip: 2.0,
            nu: 1.0,
            o_min: 0.0,
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn serde_tagged_form() {
        let vm: VolumeModel =
            serde_json::from_str(r#"{"kind":"power_law","gamma":1,"n_ip":4,"nu":2,"o_min":1}"#).unwrap();
        assert!(matches!(vm, VolumeModel::PowerLaw { .. }));
    }
}
