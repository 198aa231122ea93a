//! Statistical realization of the filter: Metropolis chains on the density
//! `∝ e^{-Σ β_i O_i(x)} G(x)`, β sweeps, moment estimates with batch-means
//! errors, Landau free-energy histograms and brute-force oracles.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{HalfSpace, Objective, ProblemKind, ProblemSpec, FEAS_TOL};
use crate::polytope::region_vertices;
use crate::quadrature::integrate;
use crate::special::one_minus_exp_over;
use crate::transform::MomentReport;

const BATCHES: usize = 20;
const START_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ChainConfig {
    /// Steps per chain per β, burn-in included.
    pub n_steps: usize,
    pub burn_in: usize,
    /// Per-coordinate proposal widths; empty picks a width from the region,
    /// a single entry is broadcast.
    pub proposal_scale: Vec<f64>,
    pub target_acceptance: f64,
    pub seed: u64,
    pub n_chains: usize,
    pub start: Option<Vec<f64>>,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            n_steps: 20_000,
            burn_in: 4_000,
            proposal_scale: Vec::new(),
            target_acceptance: 0.3,
            seed: 0,
            n_chains: 4,
            start: None,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_steps <= self.burn_in {
            return Err(Error::input("n_steps must exceed burn_in"));
        }
        if self.proposal_scale.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::input("proposal scales must be positive"));
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return Err(Error::input("target_acceptance must lie in (0, 1)"));
        }
        if self.n_chains == 0 {
            return Err(Error::input("n_chains must be >= 1"));
        }
        Ok(())
    }

    fn retained(&self) -> usize {
        self.n_steps - self.burn_in
    }
}

/// Post-burn-in samples of all chains, concatenated in chain order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleBatch {
    pub points: Vec<Vec<f64>>,
    /// One entry per objective for every point.
    pub objective_values: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    pub beta: Vec<f64>,
    pub n_chains: usize,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Moments with batch-means standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleMoments {
    pub report: MomentReport,
    /// Standard error of each objective mean.
    pub mean_stderr: Vec<f64>,
    /// Standard error of each objective variance.
    pub variance_stderr: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub beta: f64,
    pub temperature: f64,
    pub mean: f64,
    pub stderr: Option<f64>,
    pub variance: f64,
    /// Upper-triangle covariances `(i < j)` of multi-objective problems.
    pub covariances: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SweepData {
    pub rows: Vec<SweepRow>,
}

impl SweepData {
    pub fn new(rows: Vec<SweepRow>) -> Result<Self> {
        let asc = rows.windows(2).all(|w| w[0].beta < w[1].beta);
        let desc = rows.windows(2).all(|w| w[0].beta > w[1].beta);
        if !(asc || desc) {
            return Err(Error::input("sweep rows must be strictly monotone in beta"));
        }
        Ok(Self { rows })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnnealResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub final_beta: f64,
}

fn broadcast_betas(beta: &[f64], m: usize) -> Result<Vec<f64>> {
    if beta.iter().any(|b| !(*b >= 0.0 && b.is_finite())) {
        return Err(Error::input("filter strengths must be finite and nonnegative"));
    }
    match beta.len() {
        1 => Ok(vec![beta[0]; m]),
        k if k == m => Ok(beta.to_vec()),
        k => Err(Error::input(format!("{k} filter strengths for {m} objectives"))),
    }
}

/// Axis-aligned bounds of the feasible region when they are finite.
pub(crate) fn bounding_box(p: &ProblemSpec) -> Option<(Vec<f64>, Vec<f64>)> {
    let n = p.dimension();
    let cs = p.constraints();
    let mut lo = vec![f64::NEG_INFINITY; n];
    let mut hi = vec![f64::INFINITY; n];
    if let Some(b) = cs.bounds() {
        lo.clone_from(&b.lower);
        hi.clone_from(&b.upper);
    }
    if !cs.is_empty() {
        if let Ok(verts) = region_vertices(cs, n) {
            for i in 0..n {
                let vmin = verts.iter().map(|v| v[i]).fold(f64::INFINITY, f64::min);
                let vmax = verts.iter().map(|v| v[i]).fold(f64::NEG_INFINITY, f64::max);
                lo[i] = lo[i].max(vmin);
                hi[i] = hi[i].min(vmax);
            }
        }
    }
    if lo.iter().chain(&hi).all(|v| v.is_finite()) {
        Some((lo, hi))
    } else {
        None
    }
}

fn find_start(p: &ProblemSpec, cfg: &ChainConfig, rng: &mut ChaCha8Rng) -> Result<Vec<f64>> {
    let n = p.dimension();
    if let Some(s) = &cfg.start {
        if s.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: s.len(),
            });
        }
        if p.is_feasible(s) {
            return Ok(s.clone());
        }
        log::warn!("supplied start point is infeasible; searching for another");
    }
    let cs = p.constraints();
    if !cs.is_empty() {
        if let Ok(verts) = region_vertices(cs, n) {
            let centroid: Vec<f64> = (0..n)
                .map(|i| verts.iter().map(|v| v[i]).sum::<f64>() / verts.len() as f64)
                .collect();
            if p.is_feasible(&centroid) {
                return Ok(centroid);
            }
        }
    }
    if let Some(q) = p.objective().as_quadratic() {
        if p.is_feasible(q.minimizer()) {
            return Ok(q.minimizer().to_vec());
        }
    }
    let origin = vec![0.0; n];
    if p.is_feasible(&origin) {
        return Ok(origin);
    }
    if let Some((lo, hi)) = bounding_box(p) {
        let centre: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| 0.5 * (l + h)).collect();
        if p.is_feasible(&centre) {
            return Ok(centre);
        }
        for _ in 0..START_ATTEMPTS {
            let x: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| rng.gen_range(*l..=*h)).collect();
            if p.is_feasible(&x) {
                return Ok(x);
            }
        }
    }
    Err(Error::StartFailure {
        attempts: START_ATTEMPTS,
    })
}

fn default_scales(p: &ProblemSpec, beta: &[f64]) -> Vec<f64> {
    let n = p.dimension();
    if let Some((lo, hi)) = bounding_box(p) {
        return lo.iter().zip(&hi).map(|(l, h)| (0.1 * (h - l)).max(1e-12)).collect();
    }
    if let Some(q) = p.objective().as_quadratic() {
        let b = beta[0].max(1e-12);
        return vec![(1.0 / (b * q.eigenvalues()[0])).sqrt().min(1e6); n];
    }
    vec![1.0; n]
}

enum State {
    Continuous(Vec<f64>),
    Discrete(usize),
}

struct Chain<'a> {
    problem: &'a ProblemSpec,
    rng: ChaCha8Rng,
    state: State,
    values: Vec<f64>,
    scales: Vec<f64>,
    log_factor: f64,
    /// Feasible discrete points and their objective values.
    table: Option<(Vec<Vec<f64>>, Vec<Vec<f64>>)>,
}

struct Segment {
    points: Vec<Vec<f64>>,
    values: Vec<Vec<f64>>,
    accepted: usize,
    proposed: usize,
    best: Option<(Vec<f64>, f64)>,
}

fn objective_values(objs: &[Objective], x: &[f64]) -> Vec<f64> {
    objs.iter().map(|o| o.eval(x)).collect()
}

fn energy(beta: &[f64], values: &[f64]) -> f64 {
    beta.iter().zip(values).map(|(b, v)| if *b == 0.0 { 0.0 } else { b * v }).sum()
}

impl<'a> Chain<'a> {
    fn new(p: &'a ProblemSpec, cfg: &ChainConfig, index: usize, beta: &[f64]) -> Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(index as u64);
        let objs = p.objectives();
        if p.kind() == ProblemKind::Discrete {
            let pts: Vec<Vec<f64>> = p
                .discrete_points()
                .unwrap_or_default()
                .iter()
                .filter(|x| p.is_feasible(x))
                .cloned()
                .collect();
            if pts.is_empty() {
                return Err(Error::EmptyRegion);
            }
            let vals: Vec<Vec<f64>> = pts.iter().map(|x| objective_values(objs, x)).collect();
            let i = rng.gen_range(0..pts.len());
            return Ok(Self {
                problem: p,
                rng,
                values: vals[i].clone(),
                state: State::Discrete(i),
                scales: Vec::new(),
                log_factor: 0.0,
                table: Some((pts, vals)),
            });
        }
        let x = find_start(p, cfg, &mut rng)?;
        let n = p.dimension();
        let scales = match cfg.proposal_scale.len() {
            0 => default_scales(p, beta),
            1 => vec![cfg.proposal_scale[0]; n],
            k if k == n => cfg.proposal_scale.clone(),
            k => {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: k,
                })
            }
        };
        Ok(Self {
            problem: p,
            rng,
            values: objective_values(objs, &x),
            state: State::Continuous(x),
            scales,
            log_factor: 0.0,
            table: None,
        })
    }

    fn point(&self) -> Vec<f64> {
        match &self.state {
            State::Continuous(x) => x.clone(),
            State::Discrete(i) => self.table.as_ref().map(|t| t.0[*i].clone()).unwrap_or_default(),
        }
    }

    /// One Metropolis step; returns whether the proposal was accepted.
    fn step(&mut self, beta: &[f64]) -> bool {
        let e_old = energy(beta, &self.values);
        let (candidate, new_values) = match &self.state {
            State::Discrete(i) => {
                let (_, vals) = self.table.as_ref().expect("discrete table");
                let m = vals.len();
                if m == 1 {
                    return true;
                }
                let mut j = self.rng.gen_range(0..m - 1);
                if j >= *i {
                    j += 1;
                }
                (State::Discrete(j), vals[j].clone())
            }
            State::Continuous(x) => {
                let f = self.log_factor.exp();
                let y: Vec<f64> = x
                    .iter()
                    .zip(&self.scales)
                    .map(|(xi, s)| {
                        let z: f64 = self.rng.sample(StandardNormal);
                        xi + f * s * z
                    })
                    .collect();
                if !self.problem.is_feasible(&y) {
                    return false;
                }
                let v = objective_values(self.problem.objectives(), &y);
                (State::Continuous(y), v)
            }
        };
        let de = energy(beta, &new_values) - e_old;
        if !de.is_finite() && !(de == f64::NEG_INFINITY) {
            return false;
        }
        let u: f64 = self.rng.gen();
        if de <= 0.0 || u < (-de).exp() {
            self.state = candidate;
            self.values = new_values;
            true
        } else {
            false
        }
    }

    fn run(&mut self, beta: &[f64], cfg: &ChainConfig, track_best: bool) -> Segment {
        for t in 0..cfg.burn_in {
            let acc = self.step(beta);
            // Robbins-Monro on the log proposal width, burn-in only
            let gain = 1.0 / (1.0 + t as f64 / 10.0).powf(0.6);
            self.log_factor += gain * (f64::from(u8::from(acc)) - cfg.target_acceptance);
            self.log_factor = self.log_factor.clamp(-30.0, 30.0);
        }
        let keep = cfg.retained();
        let mut seg = Segment {
            points: Vec::with_capacity(keep),
            values: Vec::with_capacity(keep),
            accepted: 0,
            proposed: 0,
            best: None,
        };
        for _ in 0..keep {
            if self.step(beta) {
                seg.accepted += 1;
            }
            seg.proposed += 1;
            seg.points.push(self.point());
            seg.values.push(self.values.clone());
            if track_best {
                let v = self.values[0];
                if seg.best.as_ref().is_none_or(|(_, b)| v < *b) {
                    seg.best = Some((self.point(), v));
                }
            }
        }
        seg
    }
}

fn merge_segments(segments: Vec<Segment>, beta: Vec<f64>, n_chains: usize) -> SampleBatch {
    let (mut acc, mut prop) = (0usize, 0usize);
    let mut points = Vec::new();
    let mut values = Vec::new();
    for s in segments {
        acc += s.accepted;
        prop += s.proposed;
        points.extend(s.points);
        values.extend(s.values);
    }
    SampleBatch {
        points,
        objective_values: values,
        acceptance_rate: if prop == 0 { 0.0 } else { acc as f64 / prop as f64 },
        beta,
        n_chains,
    }
}

/// Independent chains at fixed filter strength(s); `beta` has one entry
/// (applied to every objective) or one per objective.
pub fn metropolis_chain(p: &ProblemSpec, beta: &[f64], cfg: &ChainConfig) -> Result<SampleBatch> {
    cfg.validate()?;
    let beta = broadcast_betas(beta, p.objectives().len())?;
    let segments: Vec<Segment> = (0..cfg.n_chains)
        .into_par_iter()
        .map(|c| Chain::new(p, cfg, c, &beta).map(|mut ch| ch.run(&beta, cfg, false)))
        .collect::<Result<_>>()?;
    Ok(merge_segments(segments, beta, cfg.n_chains))
}

fn batch_stderr(series: &[f64]) -> f64 {
    let size = series.len() / BATCHES;
    let means: Vec<f64> = (0..BATCHES)
        .map(|b| series[b * size..(b + 1) * size].iter().sum::<f64>() / size as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / BATCHES as f64;
    let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (BATCHES - 1) as f64;
    (var / BATCHES as f64).sqrt()
}

/// Means, covariance and batch-means standard errors of a batch.
pub fn estimate_moments(b: &SampleBatch) -> Result<SampleMoments> {
    let n = b.objective_values.len();
    if n < BATCHES {
        return Err(Error::InsufficientSamples {
            found: n,
            required: BATCHES,
        });
    }
    let m = b.objective_values[0].len();
    let column = |i: usize| -> Vec<f64> { b.objective_values.iter().map(|v| v[i]).collect() };
    let cols: Vec<Vec<f64>> = (0..m).map(column).collect();
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    let mut cov = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in i..m {
            let s: f64 = cols[i]
                .iter()
                .zip(&cols[j])
                .map(|(a, c)| (a - means[i]) * (c - means[j]))
                .sum::<f64>()
                / (n - 1) as f64;
            cov[i][j] = s;
            cov[j][i] = s;
        }
    }
    let mean_stderr = cols.iter().map(|c| batch_stderr(c)).collect();
    let variance_stderr = cols
        .iter()
        .zip(&means)
        .map(|(c, mu)| {
            let sq: Vec<f64> = c.iter().map(|v| (v - mu).powi(2)).collect();
            batch_stderr(&sq)
        })
        .collect();
    let beta = b.beta.first().copied().unwrap_or(f64::NAN);
    let var0 = cov[0][0];
    Ok(SampleMoments {
        report: MomentReport {
            beta,
            temperature: 1.0 / beta,
            mean_o: means[0],
            std_o: var0.max(0.0).sqrt(),
            means,
            covariance: cov,
        },
        mean_stderr,
        variance_stderr,
    })
}

fn check_schedule(schedule: &[f64]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::input("beta schedule is empty"));
    }
    if schedule.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
        return Err(Error::input("beta schedule entries must be positive"));
    }
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("beta schedule must be strictly ascending"));
    }
    Ok(())
}

/// Per-chain schedule run with warm starts; returns one segment per β.
fn run_schedule(p: &ProblemSpec, schedule: &[f64], cfg: &ChainConfig, track_best: bool) -> Result<Vec<Vec<Segment>>> {
    cfg.validate()?;
    check_schedule(schedule)?;
    let m = p.objectives().len();
    (0..cfg.n_chains)
        .into_par_iter()
        .map(|c| {
            let first = broadcast_betas(&schedule[..1], m)?;
            let mut chain = Chain::new(p, cfg, c, &first)?;
            schedule
                .iter()
                .map(|&b| {
                    let beta = vec![b; m];
                    Ok(chain.run(&beta, cfg, track_best))
                })
                .collect()
        })
        .collect()
}

fn transpose_segments(per_chain: Vec<Vec<Segment>>, steps: usize) -> Vec<Vec<Segment>> {
    let mut per_beta: Vec<Vec<Segment>> = (0..steps).map(|_| Vec::new()).collect();
    for chain in per_chain {
        for (i, seg) in chain.into_iter().enumerate() {
            per_beta[i].push(seg);
        }
    }
    per_beta
}

/// Annealing-protocol sweep: one row per β, chains warm-started from the
/// previous β's final state.
pub fn beta_sweep(p: &ProblemSpec, schedule: &[f64], cfg: &ChainConfig) -> Result<SweepData> {
    let per_chain = run_schedule(p, schedule, cfg, false)?;
    let m = p.objectives().len();
    let mut rows = Vec::with_capacity(schedule.len());
    for (segs, &b) in transpose_segments(per_chain, schedule.len()).into_iter().zip(schedule) {
        let batch = merge_segments(segs, vec![b; m], cfg.n_chains);
        let est = estimate_moments(&batch)?;
        let cov = &est.report.covariance;
        let mut covariances = Vec::new();
        for i in 0..m {
            for j in i + 1..m {
                covariances.push(cov[i][j]);
            }
        }
        rows.push(SweepRow {
            beta: b,
            temperature: 1.0 / b,
            mean: est.report.mean_o,
            stderr: Some(est.mean_stderr[0]),
            variance: cov[0][0],
            covariances,
        });
    }
    SweepData::new(rows)
}

/// Pure simulated annealing: only the best point seen (first objective).
pub fn anneal(p: &ProblemSpec, schedule: &[f64], cfg: &ChainConfig) -> Result<AnnealResult> {
    let per_chain = run_schedule(p, schedule, cfg, true)?;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for seg in per_chain.into_iter().flatten() {
        if let Some((x, v)) = seg.best {
            if best.as_ref().is_none_or(|(_, b)| v < *b) {
                best = Some((x, v));
            }
        }
    }
    let (best_point, best_value) = best.ok_or(Error::InsufficientSamples { found: 0, required: 1 })?;
    Ok(AnnealResult {
        best_point,
        best_value,
        final_beta: *schedule.last().unwrap(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bins {
    /// Equal-width bins spanning the observed range.
    Count(usize),
    /// Explicit ascending edges; samples outside are counted separately.
    Edges(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LandauProfile {
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
    /// βF per bin, minimum 0; `inf` for empty bins.
    pub beta_f: Vec<f64>,
    /// Poisson error of βF, `1/√count`.
    pub errors: Vec<f64>,
    pub outside: usize,
    /// All binned samples fell into a single bin.
    pub degenerate: bool,
}

/// `βF(C_k) = −ln(count_k / (total·width_k))`, shifted so the minimum is 0.
pub fn landau_histogram<C>(b: &SampleBatch, characteristic: C, bins: Bins) -> Result<LandauProfile>
where
    C: Fn(&[f64]) -> f64,
{
    if b.is_empty() {
        return Err(Error::InsufficientSamples { found: 0, required: 1 });
    }
    let values: Vec<f64> = b.points.iter().map(|x| characteristic(x)).collect();
    let edges = match bins {
        Bins::Count(k) => {
            if k < 2 {
                return Err(Error::input("need at least 2 bins"));
            }
            let mut lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let mut hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::input("characteristic is not finite on the samples"));
            }
            if hi <= lo {
                lo -= 0.5;
                hi += 0.5;
            }
            (0..=k).map(|i| lo + (hi - lo) * i as f64 / k as f64).collect::<Vec<_>>()
        }
        Bins::Edges(e) => {
            if e.len() < 3 || e.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::input("bin edges must be strictly ascending with at least 2 bins"));
            }
            e
        }
    };
    let k = edges.len() - 1;
    let mut counts = vec![0usize; k];
    let mut outside = 0usize;
    for v in &values {
        if *v < edges[0] || *v > edges[k] || v.is_nan() {
            outside += 1;
            continue;
        }
        let i = edges[1..k].partition_point(|e| e <= v);
        counts[i] += 1;
    }
    let total: usize = counts.iter().sum();
    let raw: Vec<f64> = counts
        .iter()
        .zip(edges.windows(2))
        .map(|(&c, w)| {
            if c == 0 {
                f64::INFINITY
            } else {
                -(c as f64 / (total as f64 * (w[1] - w[0]))).ln()
            }
        })
        .collect();
    let min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let beta_f = raw.iter().map(|r| if r.is_finite() { r - min } else { *r }).collect();
    let errors = counts
        .iter()
        .map(|&c| if c == 0 { f64::INFINITY } else { 1.0 / (c as f64).sqrt() })
        .collect();
    let degenerate = counts.iter().filter(|&&c| c > 0).count() <= 1;
    if degenerate {
        log::warn!("degenerate histogram: all samples fall in one bin");
    }
    Ok(LandauProfile {
        edges,
        counts,
        beta_f,
        errors,
        outside,
        degenerate,
    })
}

/// Jacobian of `x ↦ (O, x_⊥)`: `|c|` for linear objectives, 1 otherwise.
fn measure_factor(p: &ProblemSpec) -> f64 {
    p.objective().as_linear().map_or(1.0, |l| l.norm())
}

fn integration_box(p: &ProblemSpec, beta: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = p.dimension();
    let mut bx = bounding_box(p);
    if let Some(q) = p.objective().as_quadratic() {
        let radius = 12.0 / (beta * q.eigenvalues()[0]).sqrt();
        let c = q.minimizer();
        let lo: Vec<f64> = (0..n).map(|i| c[i] - radius).collect();
        let hi: Vec<f64> = (0..n).map(|i| c[i] + radius).collect();
        bx = Some(match bx {
            Some((l, h)) => (
                l.iter().zip(&lo).map(|(a, b)| a.max(*b)).collect(),
                h.iter().zip(&hi).map(|(a, b)| a.min(*b)).collect(),
            ),
            None => (lo, hi),
        });
    }
    bx.ok_or_else(|| Error::input("brute-force integration needs a bounded region"))
}

fn combined_energy(p: &ProblemSpec, beta: f64, x: &[f64]) -> f64 {
    beta * p.objectives().iter().map(|o| o.eval(x)).sum::<f64>()
}

fn discrete_z(p: &ProblemSpec, beta: f64) -> f64 {
    p.discrete_points()
        .unwrap_or_default()
        .iter()
        .filter(|x| p.is_feasible(x))
        .map(|x| (-combined_energy(p, beta, x)).exp())
        .sum()
}

/// Midpoint-rule `∫ e^{-βO} G(x) dω` on a `resolution^n` grid over the
/// bounding box (n ≤ 3); exact sums for discrete problems.
///
/// Grid nodes lying on a face (within [`FEAS_TOL`]) get weight ½ per face.
pub fn brute_force_z(p: &ProblemSpec, beta: f64, resolution: usize) -> Result<f64> {
    if p.kind() == ProblemKind::Discrete {
        return Ok(discrete_z(p, beta));
    }
    let n = p.dimension();
    if n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    if resolution == 0 {
        return Err(Error::input("resolution must be positive"));
    }
    let (lo, hi) = integration_box(p, beta)?;
    let h: Vec<f64> = lo.iter().zip(&hi).map(|(l, u)| (u - l) / resolution as f64).collect();
    let cell: f64 = h.iter().product();
    let inner = resolution.pow((n - 1) as u32);
    let faces: Vec<(HalfSpace, f64)> = p
        .constraints()
        .half_spaces()
        .into_iter()
        .map(|hs| {
            let norm = hs.h.iter().map(|v| v * v).sum::<f64>().sqrt();
            (hs, norm)
        })
        .collect();
    // nodes on a face carry half weight per face, so faces through grid
    // nodes do not bias the sum
    let weight = |x: &[f64]| -> f64 {
        let mut w = 1.0;
        for (hs, norm) in &faces {
            let v = hs.value(x) / norm;
            if v > FEAS_TOL {
                return 0.0;
            }
            if v >= -FEAS_TOL {
                w *= 0.5;
            }
        }
        w
    };
    let sum: f64 = (0..resolution)
        .into_par_iter()
        .map(|i0| {
            let mut x = vec![0.0; n];
            x[0] = lo[0] + (i0 as f64 + 0.5) * h[0];
            let mut s = 0.0;
            for r in 0..inner {
                let mut rem = r;
                for d in 1..n {
                    x[d] = lo[d] + ((rem % resolution) as f64 + 0.5) * h[d];
                    rem /= resolution;
                }
                let w = weight(&x);
                if w > 0.0 {
                    s += w * (-combined_energy(p, beta, &x)).exp();
                }
            }
            s
        })
        .collect::<Vec<f64>>()
        .iter()
        .sum();
    Ok(sum * cell * measure_factor(p))
}

/// Nested adaptive Gauss-Kronrod version of [`brute_force_z`] for smooth
/// integrands (n ≤ 3).
pub fn adaptive_z(p: &ProblemSpec, beta: f64, rel_tol: f64) -> Result<f64> {
    if p.kind() == ProblemKind::Discrete {
        return Ok(discrete_z(p, beta));
    }
    let n = p.dimension();
    if n > 3 {
        return Err(Error::UnsupportedDimension(n));
    }
    let (lo, hi) = integration_box(p, beta)?;
    fn nest(p: &ProblemSpec, beta: f64, lo: &[f64], hi: &[f64], x: &mut [f64], d: usize, tol: f64) -> f64 {
        let n = lo.len();
        integrate(
            |t| {
                x[d] = t;
                if d + 1 == n {
                    if p.is_feasible(x) {
                        (-combined_energy(p, beta, x)).exp()
                    } else {
                        0.0
                    }
                } else {
                    let mut inner = x.to_vec();
                    nest(p, beta, lo, hi, &mut inner, d + 1, tol)
                }
            },
            lo[d],
            hi[d],
            1e-300,
            tol,
        )
        .value
    }
    let mut x = vec![0.0; n];
    Ok(nest(p, beta, &lo, &hi, &mut x, 0, rel_tol) * measure_factor(p))
}

/// Band `[O_lo, O_lo+ΔO]` of mean level-set volume `Ω̄`: its exact
/// contribution `Ω̄ e^{-βO_lo}(1−e^{-βΔO})/β` and the effective point `O*`
/// with `ΔO·Ω̄·e^{-βO*}` equal to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BandContribution {
    pub value: f64,
    pub o_star: f64,
}

pub fn band_contribution(o_lo: f64, delta_o: f64, omega_bar: f64, beta: f64) -> Result<BandContribution> {
    if !(delta_o > 0.0) {
        return Err(Error::input("band width must be positive"));
    }
    if !(beta >= 0.0) {
        return Err(Error::input("beta must be nonnegative"));
    }
    let x = beta * delta_o;
    let ratio = one_minus_exp_over(x);
    let value = delta_o * omega_bar * (-beta * o_lo).exp() * ratio;
    let o_star = if x < 1e-8 {
        o_lo + 0.5 * delta_o
    } else {
        o_lo - ratio.ln() / beta
    };
    Ok(BandContribution {
        value,
        o_star: o_star.clamp(o_lo, o_lo + delta_o),
    })
}

/// Relative weight `e^{(O₂−O₁)/T}` of a mode at O₁ against one at O₂.
pub fn mode_ratio(o1: f64, o2: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::input("temperature must be positive"));
    }
    Ok(((o2 - o1) / t).exp())
}
