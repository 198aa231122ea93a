//! Design-analysis quantities read off ⟨O⟩(T): in-play degrees of freedom,
//! slope crossovers and the temperature where a second minimum matters.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use crate::error::{Error, Result};
use crate::sampler::{SweepData, SweepRow};
use crate::special::{ln_gamma, logistic};
use crate::transform::VolumeModel;

const MIN_FIT_ROWS: usize = 4;
const BREAKPOINT_CANDIDATES: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DofFit {
    pub o_min_estimate: f64,
    /// N_IP/ν.
    pub slope: f64,
    pub slope_stderr: f64,
    pub t_lo: f64,
    pub t_hi: f64,
    pub residual_rms: f64,
    pub rows: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossoverReport {
    /// False when a single line explains the data (F-test at 0.05).
    pub crossover: bool,
    pub t_star_estimate: f64,
    pub low_slope: f64,
    pub high_slope: f64,
    pub high_intercept: f64,
    /// Knee of the best continuous two-segment fit.
    pub segment_breakpoint: f64,
    pub p_value: f64,
    /// `"two_segment"` or `"crossover_law"`, whichever fits better.
    pub method: String,
}

fn weights(rows: &[&SweepRow]) -> Vec<f64> {
    let all = rows.iter().all(|r| r.stderr.is_some_and(|s| s > 0.0 && s.is_finite()));
    rows.iter()
        .map(|r| if all { r.stderr.map_or(1.0, |s| 1.0 / (s * s)) } else { 1.0 })
        .collect()
}

struct LinearFit {
    coef: DVector<f64>,
    sse: f64,
    cov_unscaled: DMatrix<f64>,
}

fn weighted_lstsq(x: &DMatrix<f64>, y: &[f64], w: &[f64]) -> Option<LinearFit> {
    let (n, k) = x.shape();
    let mut xtwx: DMatrix<f64> = DMatrix::zeros(k, k);
    let mut xtwy: DVector<f64> = DVector::zeros(k);
    for i in 0..n {
        for a in 0..k {
            xtwy[a] += w[i] * x[(i, a)] * y[i];
            for b in 0..k {
                xtwx[(a, b)] += w[i] * x[(i, a)] * x[(i, b)];
            }
        }
    }
    let inv = xtwx.try_inverse()?;
    let coef: DVector<f64> = &inv * xtwy;
    let sse = (0..n)
        .map(|i| {
            let r = y[i] - (0..k).map(|a| x[(i, a)] * coef[a]).sum::<f64>();
            w[i] * r * r
        })
        .sum();
    Some(LinearFit {
        coef,
        sse,
        cov_unscaled: inv,
    })
}

/// Weighted least squares of ⟨O⟩ against T inside `window` (inclusive);
/// the intercept estimates O_min and the slope N_IP/ν.
pub fn fit_inplay_dof(sweep: &SweepData, window: Option<(f64, f64)>) -> Result<DofFit> {
    let (lo, hi) = window.unwrap_or((f64::NEG_INFINITY, f64::INFINITY));
    if lo >= hi {
        return Err(Error::input("fit window must satisfy T_lo < T_hi"));
    }
    let rows: Vec<&SweepRow> = sweep
        .rows
        .iter()
        .filter(|r| r.temperature >= lo && r.temperature <= hi)
        .collect();
    if rows.len() < MIN_FIT_ROWS {
        return Err(Error::InsufficientData {
            found: rows.len(),
            required: MIN_FIT_ROWS,
        });
    }
    let w = weights(&rows);
    let x = DMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { 1.0 } else { rows[i].temperature });
    let y: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let fit = weighted_lstsq(&x, &y, &w).ok_or_else(|| Error::input("degenerate temperature window"))?;
    let n = rows.len();
    let has_errors = rows.iter().all(|r| r.stderr.is_some_and(|s| s > 0.0));
    let scale = if has_errors { 1.0 } else { fit.sse / (n - 2) as f64 };
    let residual_rms = (rows
        .iter()
        .map(|r| (r.mean - fit.coef[0] - fit.coef[1] * r.temperature).powi(2))
        .sum::<f64>()
        / n as f64)
        .sqrt();
    let temps = rows.iter().map(|r| r.temperature);
    Ok(DofFit {
        o_min_estimate: fit.coef[0],
        slope: fit.coef[1],
        slope_stderr: (fit.cov_unscaled[(1, 1)] * scale).sqrt(),
        t_lo: temps.clone().fold(f64::INFINITY, f64::min),
        t_hi: temps.fold(f64::NEG_INFINITY, f64::max),
        residual_rms,
        rows: n,
    })
}

/// `O_min + aT + ΔN·T / (Γ(a)/Γ(a+ΔN)·(T_*/T)^{ΔN} + 1)` with
/// `θ = (O_min, ln a, ln ΔN, ln T_*)`.
fn crossover_law(theta: &[f64; 4], t: f64) -> f64 {
    let a = theta[1].exp();
    let dn = theta[2].exp();
    let x = ln_gamma(a + dn) - ln_gamma(a) + dn * (t.ln() - theta[3]);
    theta[0] + a * t + dn * t * logistic(x)
}

fn law_sse(theta: &[f64; 4], t: &[f64], y: &[f64], w: &[f64]) -> f64 {
    t.iter()
        .zip(y)
        .zip(w)
        .map(|((t, y), w)| w * (y - crossover_law(theta, *t)).powi(2))
        .sum()
}

/// Levenberg-Marquardt on the crossover law from one starting point.
fn fit_law(mut theta: [f64; 4], t: &[f64], y: &[f64], w: &[f64]) -> ([f64; 4], f64) {
    let n = t.len();
    let mut sse = law_sse(&theta, t, y, w);
    let mut lambda = 1e-3;
    for _ in 0..500 {
        let mut jac = DMatrix::zeros(n, 4);
        let mut r = DVector::zeros(n);
        for i in 0..n {
            let sw = w[i].sqrt();
            r[i] = sw * (y[i] - crossover_law(&theta, t[i]));
            for p in 0..4 {
                let h = 1e-6 * (1.0 + theta[p].abs());
                let mut up = theta;
                let mut dn = theta;
                up[p] += h;
                dn[p] -= h;
                jac[(i, p)] = sw * (crossover_law(&up, t[i]) - crossover_law(&dn, t[i])) / (2.0 * h);
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut improved = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for p in 0..4 {
                a[(p, p)] += lambda * jtj[(p, p)].max(1e-12);
            }
            let Some(step) = a.lu().solve(&jtr) else {
                lambda *= 4.0;
                continue;
            };
            let mut cand = theta;
            for p in 0..4 {
                cand[p] += step[p];
            }
            let s = law_sse(&cand, t, y, w);
            if s.is_finite() && s < sse {
                let gain = (sse - s) / sse.max(1e-300);
                theta = cand;
                sse = s;
                lambda = (lambda / 3.0).max(1e-12);
                improved = gain > 1e-15;
                break;
            }
            lambda *= 4.0;
        }
        if !improved {
            break;
        }
    }
    (theta, sse)
}

struct TwoSegment {
    sse: f64,
    breakpoint: f64,
    intercept: f64,
    low_slope: f64,
    high_slope: f64,
}

fn fit_two_segment(t: &[f64], y: &[f64], w: &[f64]) -> Option<TwoSegment> {
    let n = t.len();
    let lo = t[1].ln();
    let hi = t[n - 2].ln();
    let mut best: Option<TwoSegment> = None;
    for i in 0..BREAKPOINT_CANDIDATES {
        let tb = (lo + (hi - lo) * i as f64 / (BREAKPOINT_CANDIDATES - 1) as f64).exp();
        let x = DMatrix::from_fn(n, 3, |r, c| match c {
            0 => 1.0,
            1 => t[r],
            _ => (t[r] - tb).max(0.0),
        });
        let Some(fit) = weighted_lstsq(&x, y, w) else { continue };
        if best.as_ref().is_none_or(|b| fit.sse < b.sse) {
            best = Some(TwoSegment {
                sse: fit.sse,
                breakpoint: tb,
                intercept: fit.coef[0],
                low_slope: fit.coef[1],
                high_slope: fit.coef[1] + fit.coef[2],
            });
        }
    }
    best
}

/// Locate a change of slope in ⟨O⟩(T).
///
/// A continuous two-segment line (breakpoint grid search) gives the knee
/// and the high-T line. The same data are then fitted with the smooth
/// crossover law of a power-law volume with a sub-leading correction; the
/// reported T_* and slopes come from whichever model has lower residual.
/// An F-test of the two-segment fit against one line decides `crossover`.
pub fn detect_crossover(sweep: &SweepData) -> Result<CrossoverReport> {
    let mut rows: Vec<&SweepRow> = sweep.rows.iter().collect();
    rows.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    let n = rows.len();
    if n < 6 {
        return Err(Error::InsufficientData { found: n, required: 6 });
    }
    let t: Vec<f64> = rows.iter().map(|r| r.temperature).collect();
    if t[0] <= 0.0 || t[n - 1] < 10.0 * t[0] {
        return Err(Error::input("sweep must span at least a factor 10 in temperature"));
    }
    let y: Vec<f64> = rows.iter().map(|r| r.mean).collect();
    let w = weights(&rows);

    let line_x = DMatrix::from_fn(n, 2, |i, j| if j == 0 { 1.0 } else { t[i] });
    let line = weighted_lstsq(&line_x, &y, &w).ok_or_else(|| Error::input("degenerate sweep"))?;
    let two = fit_two_segment(&t, &y, &w).ok_or_else(|| Error::input("degenerate sweep"))?;

    let ybar = y.iter().zip(&w).map(|(y, w)| y * w).sum::<f64>() / w.iter().sum::<f64>();
    let sst: f64 = y.iter().zip(&w).map(|(y, w)| w * (y - ybar).powi(2)).sum();

    let law_start = |t_star: f64| -> [f64; 4] {
        [
            two.intercept,
            two.low_slope.max(1e-3).ln(),
            (two.high_slope - two.low_slope).abs().max(1e-3).ln(),
            t_star.ln(),
        ]
    };
    let mut starts = vec![law_start(two.breakpoint)];
    for k in 0..8 {
        let f = k as f64 / 7.0;
        starts.push(law_start((t[0].ln() + f * (t[n - 1].ln() - t[0].ln())).exp()));
    }
    let law = starts
        .into_iter()
        .map(|s| fit_law(s, &t, &y, &w))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one start");

    let best_sse = two.sse.min(law.1);
    let (p_value, crossover) = if line.sse <= 1e-20 * sst.max(1e-300) {
        (1.0, false)
    } else if best_sse <= 1e-300 {
        (0.0, true)
    } else {
        let f = ((line.sse - best_sse) / 2.0) / (best_sse / (n - 4) as f64);
        let dist = FisherSnedecor::new(2.0, (n - 4) as f64).map_err(|e| Error::input(e.to_string()))?;
        let p = if f <= 0.0 { 1.0 } else { 1.0 - dist.cdf(f) };
        (p, p < 0.05)
    };

    let (t_star_estimate, low_slope, high_slope, method) = if law.1 < two.sse {
        let a = law.0[1].exp();
        let dn = law.0[2].exp();
        (law.0[3].exp(), a, a + dn, "crossover_law")
    } else {
        (two.breakpoint, two.low_slope, two.high_slope, "two_segment")
    };
    Ok(CrossoverReport {
        crossover,
        t_star_estimate,
        low_slope,
        high_slope,
        high_intercept: two.intercept + (two.low_slope - two.high_slope) * two.breakpoint,
        segment_breakpoint: two.breakpoint,
        p_value,
        method: method.to_string(),
    })
}

/// Temperature at which the local minimum's mode matches the global one:
/// the root of `e^{-(O_L−O_G)/T} T^{(N_L−N_G)/ν} = γ_G Γ(N_G/ν) / (γ_L Γ(N_L/ν))`.
///
/// For identical γ and N the two sides never meet at finite T; the
/// symmetric answer `O_L − O_G` is returned.
pub fn mode_crossover_temperature(vm: &VolumeModel) -> Result<f64> {
    vm.validate()?;
    let VolumeModel::TwoMinima {
        gamma_g,
        gamma_l,
        n_g,
        n_l,
        nu,
        o_g,
        o_l,
    } = *vm
    else {
        return Err(Error::input("crossover temperature needs a two_minima model"));
    };
    let gap = o_l - o_g;
    let same = |a: f64, b: f64| (a - b).abs() <= 1e-12 * a.abs().max(b.abs());
    if same(n_g, n_l) && same(gamma_g, gamma_l) {
        return Ok(gap);
    }
    let (ag, al) = (n_g / nu, n_l / nu);
    let ln_r = gamma_g.ln() + ln_gamma(ag) - gamma_l.ln() - ln_gamma(al);
    let f = |t: f64| -gap / t + (al - ag) * t.ln() - ln_r;
    let upper = 1e3 * gap;
    let lower = 1e-6 * gap;
    let steps = 4000;
    let grid = |i: usize| (lower.ln() + (upper.ln() - lower.ln()) * i as f64 / steps as f64).exp();
    let mut a = grid(0);
    let mut fa = f(a);
    for i in 1..=steps {
        let b = grid(i);
        let fb = f(b);
        if fa == 0.0 {
            return Ok(a);
        }
        if fa.signum() != fb.signum() {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let fm = f(mid);
                if fm == 0.0 || (hi - lo) <= 1e-15 * mid {
                    return Ok(mid);
                }
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            return Ok(0.5 * (lo + hi));
        }
        a = b;
        fa = fb;
    }
    Err(Error::NoCrossing { upper })
}

/// `Ω_⊥(O) ≈ 2π^{N/2} / (ν Γ(N/2)) · O^{N/ν − 1}` near a minimum at O = 0.
pub fn near_optimal_scaling(n_ip: f64, nu: f64, o: f64) -> Result<f64> {
    if !(n_ip >= 1.0 && n_ip.is_finite()) {
        return Err(Error::input("N_IP must be >= 1"));
    }
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::input("nu must be positive"));
    }
    if !(o > 0.0 && o.is_finite()) {
        return Err(Error::input("O must be positive"));
    }
    let ln = std::f64::consts::LN_2 + 0.5 * n_ip * std::f64::consts::PI.ln() - nu.ln() - ln_gamma(0.5 * n_ip)
        + (n_ip / nu - 1.0) * o.ln();
    Ok(ln.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_to_infinity;
    use crate::transform::volume_model_z;

    fn rows_from(ts: &[f64], mean: impl Fn(f64) -> f64) -> SweepData {
        let mut rows: Vec<SweepRow> = ts
            .iter()
            .map(|&t| SweepRow {
                beta: 1.0 / t,
                temperature: t,
                mean: mean(t),
                stderr: None,
                variance: 0.0,
                covariances: vec![],
            })
            .collect();
        rows.sort_by(|a, b| a.beta.total_cmp(&b.beta));
        SweepData::new(rows).unwrap()
    }

    fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (n - 1) as f64).exp())
            .collect()
    }

    #[test]
    fn equipartition_slope() {
        // A = I₄: ⟨O⟩ = 2T
        let sweep = rows_from(&log_grid(0.01, 10.0, 20), |t| 2.0 * t);
        let fit = fit_inplay_dof(&sweep, None).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert!(fit.o_min_estimate.abs() < 1e-9);
    }

    #[test]
    fn window_and_row_count() {
        let sweep = rows_from(&log_grid(0.01, 10.0, 20), |t| 1.0 + 2.0 * t);
        assert!(matches!(
            fit_inplay_dof(&sweep, Some((0.011, 0.02))),
            Err(Error::InsufficientData { required: 4, .. })
        ));
        let fit = fit_inplay_dof(&sweep, Some((0.05, 1.0))).unwrap();
        assert!(fit.t_lo >= 0.05 && fit.t_hi <= 1.0);
        assert!((fit.slope - 2.0).abs() < 1e-9 && (fit.o_min_estimate - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expansion_crossover() {
        let vm = VolumeModel::Expansion {
            gamma: 1.0,
            n_ip: 1.0,
            nu: 1.0,
            o_min: 0.0,
            t_star: 1.0,
            delta_n: 2.0,
        };
        let sweep = rows_from(&log_grid(0.01, 100.0, 40), |t| volume_model_z(&vm, 1.0 / t).unwrap().mean);
        let r = detect_crossover(&sweep).unwrap();
        assert!(r.crossover);
        assert!((r.low_slope - 1.0).abs() < 0.1);
        assert!((r.high_slope - 3.0).abs() < 0.3);
        assert!((r.t_star_estimate - 1.0).abs() < 0.25);
    }

    #[test]
    fn power_law_has_no_crossover() {
        let vm = VolumeModel::PowerLaw {
            gamma: 1.0,
            n_ip: 4.0,
            nu: 2.0,
            o_min: 1.0,
        };
        let sweep = rows_from(&log_grid(0.01, 100.0, 40), |t| volume_model_z(&vm, 1.0 / t).unwrap().mean);
        assert!(!detect_crossover(&sweep).unwrap().crossover);
    }

    #[test]
    fn narrow_sweep_rejected() {
        let sweep = rows_from(&log_grid(1.0, 5.0, 10), |t| t);
        assert!(detect_crossover(&sweep).is_err());
    }

    fn two_minima(n_g: f64, n_l: f64, gamma_l: f64, gap: f64) -> VolumeModel {
        VolumeModel::TwoMinima {
            gamma_g: 1.0,
            gamma_l,
            n_g,
            n_l,
            nu: 1.0,
            o_g: 0.0,
            o_l: gap,
        }
    }

    #[test]
    fn symmetric_minima() {
        assert_eq!(mode_crossover_temperature(&two_minima(2.0, 2.0, 1.0, 2.0)).unwrap(), 2.0);
    }

    #[test]
    fn vanishing_local_minimum() {
        let r = mode_crossover_temperature(&two_minima(2.0, 2.0, 1e-30, 1.0));
        assert!(matches!(r, Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn extra_local_dof_root() {
        let t = mode_crossover_temperature(&two_minima(1.0, 3.0, 1.0, 1.0)).unwrap();
        // e^{-1/T} T² = Γ(1)/Γ(3)
        assert!(((-1.0 / t).exp() * t * t - 0.5).abs() < 1e-12);
    }

    #[test]
    fn scaling_examples() {
        assert!((near_optimal_scaling(2.0, 2.0, 0.3).unwrap() - std::f64::consts::PI).abs() < 1e-14);
        assert!((near_optimal_scaling(1.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert!((near_optimal_scaling(3.0, 2.0, 4.0).unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(near_optimal_scaling(0.5, 1.0, 1.0).is_err());
        assert!(near_optimal_scaling(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn scaling_transform_identity() {
        // ∫ Ω e^{-βO} dO = γ Γ(N/ν) β^{-N/ν}, γ = 2π^{N/2}/(νΓ(N/2))
        for (n, nu, beta) in [(3.0, 2.0, 1.3), (2.0, 1.0, 0.4), (5.0, 2.0, 2.0)] {
            let q = integrate_to_infinity(|o| near_optimal_scaling(n, nu, o).map_or(0.0, |v| v * (-beta * o).exp()), 0.0, 1e-300, 1e-12);
            let gamma = near_optimal_scaling(n, nu, 1.0).unwrap();
            let exact = gamma * ln_gamma(n / nu).exp() * beta.powf(-n / nu);
            assert!(((q.value - exact) / exact).abs() < 1e-8);
        }
    }
}
