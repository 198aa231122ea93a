//! Geometry of the filtered space: `ds² = dO² + e^{-2βO/(N−1)} |dx_⊥|²`,
//! a hyperbolic metric with flat transverse directions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quadrature::integrate;

const MAX_REFINEMENTS: u32 = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FilteredSpace {
    n: usize,
    beta: f64,
}

impl FilteredSpace {
    /// `beta = 0` is accepted as the unfiltered (Euclidean) limit.
    pub fn new(n: usize, beta: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::input("filtered space needs N >= 2"));
        }
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::input("beta must be finite and nonnegative"));
        }
        Ok(Self { n, beta })
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// `k = β/(N−1)`, the curvature scale of the metric.
    fn k(&self) -> f64 {
        self.beta / (self.n - 1) as f64
    }

    /// `e^{-2kO}`, the transverse metric factor.
    pub fn transverse_factor(&self, o: f64) -> f64 {
        (-2.0 * self.k() * o).exp()
    }
}

pub fn line_element(fs: &FilteredSpace, o: f64, d_o: f64, dx_perp: &[f64]) -> f64 {
    let dx2: f64 = dx_perp.iter().map(|v| v * v).sum();
    if dx2 == 0.0 {
        return d_o * d_o;
    }
    d_o * d_o + fs.transverse_factor(o) * dx2
}

/// `a = ((N−1)/β) e^{βO/(N−1)}`, in which `ds² = ((N−1)/β)² (da² + dx_⊥²)/a²`.
pub fn poincare_coordinate(fs: &FilteredSpace, o: f64) -> Result<f64> {
    if fs.beta == 0.0 {
        return Err(Error::input("the Poincaré coordinate needs beta > 0"));
    }
    let k = fs.k();
    Ok((k * o).exp() / k)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GeodesicSpec {
    pub o1: f64,
    pub o2: f64,
    /// Inclination of the unfiltered straight line, in `[0, π/2)`.
    pub alpha: f64,
    pub direction: Vec<f64>,
}

impl GeodesicSpec {
    pub fn new(o1: f64, o2: f64, alpha: f64, direction: Vec<f64>) -> Result<Self> {
        if !(o2 > o1) || !o1.is_finite() || !o2.is_finite() {
            return Err(Error::input("geodesic needs finite O2 > O1"));
        }
        if !(0.0..std::f64::consts::FRAC_PI_2).contains(&alpha) {
            return Err(Error::input(format!("alpha must lie in [0, pi/2), got {alpha}")));
        }
        let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::input("transverse direction must be a unit vector"));
        }
        Ok(Self { o1, o2, alpha, direction })
    }

    /// Spec with the single transverse direction `ê = (1)`.
    pub fn planar(o1: f64, o2: f64, alpha: f64) -> Result<Self> {
        Self::new(o1, o2, alpha, vec![1.0])
    }
}

/// `(1 − e^{-2kΔ})/k`, equal to `2Δ` at k = 0.
fn q_over_k(k: f64, delta: f64) -> f64 {
    if k == 0.0 {
        2.0 * delta
    } else {
        -(-2.0 * k * delta).exp_m1() / k
    }
}

/// Transverse displacement accumulated between `O1` and `o ∈ [O1, O2]`.
fn displacement_to(fs: &FilteredSpace, g: &GeodesicSpec, o: f64) -> f64 {
    let s = g.alpha.sin();
    if s == 0.0 {
        return 0.0;
    }
    let k = fs.k();
    let d2 = (-2.0 * k * (g.o2 - o)).exp();
    let d1 = (-2.0 * k * (g.o2 - g.o1)).exp();
    let a = (1.0 - s * s * d2).sqrt();
    let a1 = (1.0 - s * s * d1).sqrt();
    // difference of square roots rationalized to avoid cancellation
    (k * g.o2).exp() * s * d2 * q_over_k(k, o - g.o1) / (a + a1)
}

/// `Δx_⊥ = ((N−1)/β)(e^{βO₂/(N−1)}/sin α)(√(1 − e^{-2βΔO/(N−1)} sin²α) − cos α)`,
/// evaluated in a form that is exact at α = 0 and tends to `ΔO tan α` as β → 0.
pub fn geodesic_displacement(fs: &FilteredSpace, g: &GeodesicSpec) -> f64 {
    displacement_to(fs, g, g.o2)
}

/// Displacement vector `Δx_⊥ ê_⊥`.
pub fn geodesic_displacement_vector(fs: &FilteredSpace, g: &GeodesicSpec) -> Vec<f64> {
    let d = geodesic_displacement(fs, g);
    g.direction.iter().map(|e| d * e).collect()
}

/// Conserved transverse momentum `|v_⊥| = sin α e^{-βO₂/(N−1)}`.
pub fn transverse_speed(fs: &FilteredSpace, g: &GeodesicSpec) -> f64 {
    g.alpha.sin() * (-fs.k() * g.o2).exp()
}

/// Points `(O, x_⊥)` of the geodesic starting at `x_⊥ = 0`, at `samples`
/// equally spaced objective values.
pub fn geodesic_path(fs: &FilteredSpace, g: &GeodesicSpec, samples: usize) -> Result<Vec<(f64, Vec<f64>)>> {
    if samples < 2 {
        return Err(Error::input("a path needs at least 2 samples"));
    }
    Ok((0..samples)
        .map(|i| {
            let o = if i + 1 == samples {
                g.o2
            } else {
                g.o1 + (g.o2 - g.o1) * i as f64 / (samples - 1) as f64
            };
            let d = displacement_to(fs, g, o);
            (o, g.direction.iter().map(|e| d * e).collect())
        })
        .collect())
}

/// Length of the segment linear in `(O, x_⊥)` between two points.
fn segment_length(fs: &FilteredSpace, a: &(f64, Vec<f64>), b: &(f64, Vec<f64>)) -> f64 {
    let d_o = b.0 - a.0;
    let dx2: f64 = a.1.iter().zip(&b.1).map(|(p, q)| (q - p).powi(2)).sum();
    if dx2 == 0.0 {
        return d_o.abs();
    }
    let slope2 = dx2 / (d_o * d_o);
    integrate(
        |o| (1.0 + fs.transverse_factor(o) * slope2).sqrt(),
        a.0.min(b.0),
        a.0.max(b.0),
        1e-15,
        1e-12,
    )
    .value
}

fn check_path(path: &[(f64, Vec<f64>)]) -> Result<()> {
    if path.len() < 2 {
        return Err(Error::input("a path needs at least 2 samples"));
    }
    let inc = path.windows(2).all(|w| w[1].0 > w[0].0);
    let dec = path.windows(2).all(|w| w[1].0 < w[0].0);
    if !(inc || dec) {
        return Err(Error::input("path must be strictly monotone in O"));
    }
    let dim = path[0].1.len();
    if path.iter().any(|p| p.1.len() != dim) {
        return Err(Error::input("path samples have inconsistent transverse dimension"));
    }
    Ok(())
}

/// `L = ∫ dO √(1 + e^{-2βO/(N−1)} |dx_⊥/dO|²)` of the piecewise-linear
/// interpolant through the samples.
pub fn path_length(fs: &FilteredSpace, path: &[(f64, Vec<f64>)]) -> Result<f64> {
    check_path(path)?;
    Ok(path.windows(2).map(|w| segment_length(fs, &w[0], &w[1])).sum())
}

/// Length of the curve `O ↦ x_⊥(O)` on `[o1, o2]`, refining the polyline by
/// doubling until successive estimates agree to 1e-8.
pub fn path_length_fn<F>(fs: &FilteredSpace, curve: F, o1: f64, o2: f64) -> Result<f64>
where
    F: Fn(f64) -> Vec<f64>,
{
    if !(o2 > o1) {
        return Err(Error::input("path needs o2 > o1"));
    }
    let sample = |segments: usize| -> Vec<(f64, Vec<f64>)> {
        (0..=segments)
            .map(|i| {
                let o = if i == segments {
                    o2
                } else {
                    o1 + (o2 - o1) * i as f64 / segments as f64
                };
                (o, curve(o))
            })
            .collect()
    };
    let mut segments = 8;
    let mut prev = path_length(fs, &sample(segments))?;
    for _ in 0..MAX_REFINEMENTS {
        segments *= 2;
        let next = path_length(fs, &sample(segments))?;
        if (next - prev).abs() <= 1e-8 * next.abs() {
            return Ok(next);
        }
        prev = next;
    }
    log::warn!("path length not converged after {segments} segments");
    Ok(prev)
}
