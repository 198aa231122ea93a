//! Small special-function helpers shared by the closed-form engines.
//!
//! Gamma-family functions are delegated to `statrs`; the incomplete gamma
//! there switches between the power series and the Legendre continued
//! fraction at `x = a + 1`.

pub use statrs::function::gamma::{gamma, ln_gamma};

/// Regularized lower incomplete gamma P(a, x).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x.is_infinite() {
        1.0
    } else {
        statrs::function::gamma::gamma_lr(a, x)
    }
}

/// ln P(a, x); for tiny x the leading series term is used so the result
/// stays finite where P underflows.
pub fn ln_gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return f64::NEG_INFINITY;
    }
    let p = gamma_p(a, x);
    if p > 1e-280 {
        p.ln()
    } else {
        // P(a,x) ~ x^a e^{-x} / Γ(a+1) · (1 + x/(a+1) + ...)
        a * x.ln() - x - ln_gamma(a + 1.0) + (x / (a + 1.0)).ln_1p()
    }
}

/// ln Σ exp(t_i), ignoring `-inf` entries.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    let s: f64 = terms.iter().map(|t| (t - max).exp()).sum();
    max + s.ln()
}

/// Logistic function 1/(1+e^{-x}), stable for large |x|.
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// (1 - e^{-x}) / x with the x → 0 limit.
pub fn one_minus_exp_over(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - 0.5 * x
    } else {
        -(-x).exp_m1() / x
    }
}

/// Solid angle of the unit sphere S^{n-1} in R^n.
pub fn sphere_area(n: f64) -> f64 {
    2.0 * std::f64::consts::PI.powf(0.5 * n) / gamma(0.5 * n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lower_gamma_limits() {
        assert_eq!(gamma_p(2.0, 0.0), 0.0);
        assert!((gamma_p(1.0, 1.0) - (1.0 - (-1.0f64).exp())).abs() < 1e-14);
        assert!((gamma_p(3.0, 50.0) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn ln_gamma_p_small_argument() {
        // P(2, x) = 1 - e^{-x}(1+x) ~ x^2/2 for small x
        let x = 1e-200f64;
        let expect = 2.0 * x.ln() - 2f64.ln();
        assert!((ln_gamma_p(2.0, x) - expect).abs() < 1e-10);
    }

    #[test]
    fn lse_handles_neg_inf() {
        let v = log_sum_exp(&[f64::NEG_INFINITY, 0.0, 0.0]);
        assert!((v - 2f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn sphere_area_known_values() {
        assert!((sphere_area(2.0) - 2.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(3.0) - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!((sphere_area(1.0) - 2.0).abs() < 1e-12);
    }
}
