//! Exact geometry of linear programs: vertices, the objective-aligned frame
//! and the piecewise-polynomial level-set volume Ω_⊥(O).

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ConstraintSet, LinearObjective};

const MERGE_TOL: f64 = 1e-7;
const PIVOT_TOL: f64 = 1e-12;

/// Orthonormal frame whose first axis is `c/|c|`, so that
/// `O = scale·(R x)_1 + shift`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveFrame {
    rotation: DMatrix<f64>,
    shift: f64,
    scale: f64,
}

impl ObjectiveFrame {
    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn shift(&self) -> f64 {
        self.shift
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `x ↦ (O, x_⊥)`.
    pub fn to_frame(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let y = &self.rotation * DVector::from_column_slice(x);
        (self.scale * y[0] + self.shift, y.iter().skip(1).copied().collect())
    }

    pub fn from_frame(&self, o: f64, x_perp: &[f64]) -> Vec<f64> {
        let mut y = Vec::with_capacity(x_perp.len() + 1);
        y.push((o - self.shift) / self.scale);
        y.extend_from_slice(x_perp);
        (self.rotation.transpose() * DVector::from_vec(y)).iter().copied().collect()
    }
}

/// Householder reflection exchanging `e_1` and `c/|c|`.
pub fn build_frame(obj: &LinearObjective) -> ObjectiveFrame {
    let n = obj.dimension();
    let scale = obj.norm();
    let u = DVector::from_column_slice(obj.coefficients()) / scale;
    let mut v = -u.clone();
    v[0] += 1.0;
    let vv = v.norm_squared();
    let rotation = if vv < 1e-24 {
        DMatrix::identity(n, n)
    } else {
        DMatrix::identity(n, n) - (&v * v.transpose()) * (2.0 / vv)
    };
    ObjectiveFrame {
        rotation,
        shift: obj.offset(),
        scale,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Vertex {
    pub point: Vec<f64>,
    pub objective_value: f64,
    /// Indices into [`ConstraintSet::half_spaces`] of the rows tight here.
    pub active_set: Vec<usize>,
}

/// `a_i·y ≤ b_i` with unit normals.
#[derive(Debug, Clone)]
struct HRep {
    dim: usize,
    normals: Vec<DVector<f64>>,
    offsets: Vec<f64>,
}

impl HRep {
    fn from_constraints(cs: &ConstraintSet, dim: usize) -> Self {
        let mut rep = HRep {
            dim,
            normals: Vec::new(),
            offsets: Vec::new(),
        };
        for row in cs.half_spaces() {
            rep.push(DVector::from_vec(row.h), -row.d);
        }
        rep
    }

    fn push(&mut self, a: DVector<f64>, b: f64) {
        let norm = a.norm();
        self.normals.push(a / norm);
        self.offsets.push(b / norm);
    }

    fn tolerance(&self) -> f64 {
        1e-9 * (1.0 + self.offsets.iter().fold(0.0f64, |m, b| m.max(b.abs())))
    }

    fn tight_rows(&self, y: &DVector<f64>, tol: f64) -> BTreeSet<usize> {
        (0..self.normals.len())
            .filter(|&i| (self.normals[i].dot(y) - self.offsets[i]).abs() <= tol)
            .collect()
    }

    fn contains(&self, y: &DVector<f64>, tol: f64) -> bool {
        self.normals
            .iter()
            .zip(&self.offsets)
            .all(|(a, b)| a.dot(y) - b <= tol)
    }

    /// Exhaustive basic-solution enumeration, duplicates merged.
    fn vertices(&self) -> Vec<(DVector<f64>, BTreeSet<usize>)> {
        let n = self.dim;
        let m = self.normals.len();
        let tol = self.tolerance();
        let mut found: Vec<DVector<f64>> = Vec::new();
        for_each_combination(m, n, |subset| {
            let a = DMatrix::from_fn(n, n, |i, j| self.normals[subset[i]][j]);
            let lu = a.full_piv_lu();
            let u = lu.u();
            let diag: Vec<f64> = (0..n).map(|i| u[(i, i)].abs()).collect();
            let max = diag.iter().copied().fold(0.0, f64::max);
            let min = diag.iter().copied().fold(f64::INFINITY, f64::min);
            if max == 0.0 || min < PIVOT_TOL * max {
                return;
            }
            let rhs = DVector::from_fn(n, |i, _| self.offsets[subset[i]]);
            let Some(y) = lu.solve(&rhs) else { return };
            if !self.contains(&y, tol * (1.0 + y.amax())) {
                return;
            }
            let merge = MERGE_TOL * (1.0 + y.amax());
            if !found.iter().any(|v| (v - &y).amax() <= merge) {
                found.push(y);
            }
        });
        found
            .into_iter()
            .map(|v| {
                let tight = self.tight_rows(&v, 1e3 * tol * (1.0 + v.amax()));
                (v, tight)
            })
            .collect()
    }
}

fn for_each_combination(m: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > m {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let mut i = k;
        while i > 0 && idx[i - 1] == m - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// True when the recession cone `{d : a_i·d ≤ 0}` contains a nonzero direction.
fn has_recession_direction(rep: &HRep) -> bool {
    let n = rep.dim;
    let mut cone = HRep {
        dim: n,
        normals: rep.normals.clone(),
        offsets: vec![0.0; rep.normals.len()],
    };
    for i in 0..n {
        let e = DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
        cone.push(e.clone(), 1.0);
        cone.push(-e, 1.0);
    }
    cone.vertices().iter().any(|(v, _)| v.amax() > 1e-6)
}

fn vertices_checked(rep: &HRep) -> Result<Vec<(DVector<f64>, BTreeSet<usize>)>> {
    if has_recession_direction(rep) {
        let n = rep.dim;
        let big = 1e6 * (1.0 + rep.offsets.iter().fold(0.0f64, |m, b| m.max(b.abs())));
        let mut boxed = rep.clone();
        for i in 0..n {
            let e = DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 });
            boxed.push(e.clone(), big);
            boxed.push(-e, big);
        }
        return Err(if boxed.vertices().is_empty() {
            Error::EmptyRegion
        } else {
            Error::Unbounded
        });
    }
    let verts = rep.vertices();
    if verts.is_empty() {
        return Err(Error::EmptyRegion);
    }
    Ok(verts)
}

fn constraint_dimension(cs: &ConstraintSet, obj: &LinearObjective) -> Result<usize> {
    let n = obj.dimension();
    match cs.dimension() {
        Some(d) if d != n => Err(Error::DimensionMismatch { expected: n, found: d }),
        _ => Ok(n),
    }
}

/// Vertices of the bounded region `cs` in R^n, in enumeration order.
pub fn region_vertices(cs: &ConstraintSet, n: usize) -> Result<Vec<Vec<f64>>> {
    if let Some(d) = cs.dimension() {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    let rep = HRep::from_constraints(cs, n);
    Ok(vertices_checked(&rep)?
        .into_iter()
        .map(|(v, _)| v.iter().copied().collect())
        .collect())
}

/// All vertices of the feasible polytope, sorted by objective value.
pub fn enumerate_vertices(cs: &ConstraintSet, obj: &LinearObjective) -> Result<Vec<Vertex>> {
    let n = constraint_dimension(cs, obj)?;
    let rep = HRep::from_constraints(cs, n);
    let mut out: Vec<Vertex> = vertices_checked(&rep)?
        .into_iter()
        .map(|(v, tight)| {
            let point: Vec<f64> = v.iter().copied().collect();
            Vertex {
                objective_value: obj.eval(&point),
                point,
                active_set: tight.into_iter().collect(),
            }
        })
        .collect();
    out.sort_by(|a, b| a.objective_value.total_cmp(&b.objective_value));
    Ok(out)
}

fn affine_rank(points: &[&DVector<f64>]) -> usize {
    if points.len() <= 1 {
        return 0;
    }
    let n = points[0].len();
    let base = points[0];
    let scale = points.iter().fold(1.0f64, |m, p| m.max(p.amax()));
    let diffs = DMatrix::from_fn(points.len() - 1, n, |i, j| points[i + 1][j] - base[j]);
    let sv = diffs.singular_values();
    sv.iter().filter(|&&s| s > 1e-9 * scale).count()
}

/// Distance from `p` to the affine hull of `pts`.
fn distance_to_hull(p: &DVector<f64>, pts: &[&DVector<f64>]) -> f64 {
    let base = pts[0];
    let scale = pts.iter().fold(1.0f64, |m, q| m.max(q.amax()));
    let mut basis: Vec<DVector<f64>> = Vec::new();
    for q in &pts[1..] {
        let mut w = *q - base;
        for b in &basis {
            w -= b * b.dot(&w);
        }
        // second pass keeps Gram-Schmidt orthogonal to working precision
        for b in &basis {
            w -= b * b.dot(&w);
        }
        let norm = w.norm();
        if norm > 1e-9 * scale {
            basis.push(w / norm);
        }
    }
    let mut r = p - base;
    for b in &basis {
        r -= b * b.dot(&r);
    }
    r.norm()
}

/// Volume of the face spanned by `face` (vertex indices) of affine dimension
/// `dim`, by coning every facet from the face centroid.
fn face_volume(verts: &[DVector<f64>], tight: &[BTreeSet<usize>], face: &[usize], dim: usize, rows: usize) -> f64 {
    if dim == 0 {
        return 1.0;
    }
    let n = verts[0].len();
    let centroid = face
        .iter()
        .fold(DVector::zeros(n), |acc: DVector<f64>, &i| acc + &verts[i])
        / face.len() as f64;
    if dim == 1 {
        let p = &verts[face[0]];
        return face.iter().map(|&i| (&verts[i] - p).norm()).fold(0.0, f64::max);
    }
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut total = 0.0;
    for r in 0..rows {
        let sub: Vec<usize> = face.iter().copied().filter(|&i| tight[i].contains(&r)).collect();
        if sub.len() < dim || sub.len() == face.len() || seen.contains(&sub) {
            continue;
        }
        let pts: Vec<&DVector<f64>> = sub.iter().map(|&i| &verts[i]).collect();
        if affine_rank(&pts) != dim - 1 {
            continue;
        }
        let height = distance_to_hull(&centroid, &pts);
        total += height * face_volume(verts, tight, &sub, dim - 1, rows);
        seen.insert(sub);
    }
    total / dim as f64
}

fn hrep_volume(rep: &HRep) -> Result<f64> {
    if rep.dim == 0 {
        return Ok(1.0);
    }
    let verts = vertices_checked(rep)?;
    let pts: Vec<&DVector<f64>> = verts.iter().map(|(v, _)| v).collect();
    let rank = affine_rank(&pts);
    if rank < rep.dim {
        return Ok(0.0);
    }
    let (points, tight): (Vec<_>, Vec<_>) = verts.into_iter().unzip();
    let face: Vec<usize> = (0..points.len()).collect();
    Ok(face_volume(&points, &tight, &face, rep.dim, rep.normals.len()))
}

/// n-volume of the feasible polytope.
pub fn polytope_volume(cs: &ConstraintSet, n: usize) -> Result<f64> {
    if let Some(d) = cs.dimension() {
        if d != n {
            return Err(Error::DimensionMismatch { expected: n, found: d });
        }
    }
    let rep = HRep::from_constraints(cs, n);
    let verts = vertices_checked(&rep)?;
    let pts: Vec<&DVector<f64>> = verts.iter().map(|(v, _)| v).collect();
    let rank = affine_rank(&pts);
    if rank < n {
        return Err(Error::DegenerateRegion { expected: n, found: rank });
    }
    hrep_volume(&rep)
}

/// Piecewise polynomial Ω_⊥(O) = Σ_i a_i^η O^i on `[Γ_η, Γ_{η+1}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceVolumeFunction {
    breakpoints: Vec<f64>,
    pieces: Vec<Vec<f64>>,
}

impl SliceVolumeFunction {
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Vec<f64>>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::input("slice volume needs at least two breakpoints"));
        }
        if pieces.len() + 1 != breakpoints.len() {
            return Err(Error::input(format!(
                "{} breakpoints need {} pieces, got {}",
                breakpoints.len(),
                breakpoints.len() - 1,
                pieces.len()
            )));
        }
        if breakpoints.windows(2).any(|w| !(w[0] < w[1])) || breakpoints.iter().any(|b| !b.is_finite()) {
            return Err(Error::input("breakpoints must be finite and strictly increasing"));
        }
        if pieces.iter().any(|p| p.is_empty() || p.iter().any(|a| !a.is_finite())) {
            return Err(Error::input("piece coefficients must be finite and nonempty"));
        }
        Ok(Self { breakpoints, pieces })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn pieces(&self) -> &[Vec<f64>] {
        &self.pieces
    }

    /// Value of piece `i`'s polynomial at `o` (no range check).
    pub fn eval_piece(&self, i: usize, o: f64) -> f64 {
        self.pieces[i].iter().rev().fold(0.0, |acc, a| acc * o + a)
    }

    /// Ω_⊥(O); zero outside `[Γ_1, Γ_N]`.
    pub fn eval(&self, o: f64) -> f64 {
        let last = self.breakpoints.len() - 1;
        if o < self.breakpoints[0] || o > self.breakpoints[last] {
            return 0.0;
        }
        let i = self.breakpoints[1..last].partition_point(|&b| b <= o);
        self.eval_piece(i, o)
    }

    /// `∫ Ω_⊥ dO` from the polynomial antiderivatives.
    pub fn integral(&self) -> f64 {
        self.pieces
            .iter()
            .zip(self.breakpoints.windows(2))
            .map(|(p, w)| {
                let anti = |x: f64| {
                    p.iter()
                        .enumerate()
                        .rev()
                        .fold(0.0, |acc, (i, a)| acc * x + a / (i + 1) as f64)
                        * x
                };
                anti(w[1]) - anti(w[0])
            })
            .sum()
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Fit the degree-(n−1) polynomial through `f` at Chebyshev nodes of
/// `[lo, hi]`, returned in powers of the global variable.
fn fit_piece(lo: f64, hi: f64, n: usize, mut f: impl FnMut(f64) -> Result<f64>) -> Result<Vec<f64>> {
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let nodes: Vec<f64> = (0..n)
        .map(|j| ((2 * j + 1) as f64 * std::f64::consts::PI / (2 * n) as f64).cos())
        .collect();
    let vander = DMatrix::from_fn(n, n, |i, j| nodes[i].powi(j as i32));
    let mut rhs = DVector::zeros(n);
    for (i, s) in nodes.iter().enumerate() {
        rhs[i] = f(mid + half * s)?;
    }
    let local = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::input("singular interpolation system"))?;
    let mut global = vec![0.0; n];
    for (j, bj) in local.iter().enumerate() {
        let w = bj / half.powi(j as i32);
        for (i, g) in global.iter_mut().enumerate().take(j + 1) {
            *g += w * binomial(j, i) * (-mid).powi((j - i) as i32);
        }
    }
    Ok(global)
}

/// Distinct breakpoints from sorted vertex values, merging near-ties.
fn merge_breakpoints(values: &[f64]) -> Vec<f64> {
    let span = values[values.len() - 1] - values[0];
    let tol = MERGE_TOL * span;
    let mut out: Vec<f64> = vec![values[0]];
    let mut merged = false;
    for &v in &values[1..] {
        let last = *out.last().unwrap();
        if v - last <= tol {
            if v != last {
                merged = true;
            }
        } else {
            out.push(v);
        }
    }
    if merged {
        log::warn!("vertex objective values within {tol:e} merged into one breakpoint (edge nearly parallel to the level sets)");
    }
    out
}

/// Exact (n−1)-volume of the level set `{x feasible : O(x) = o}`.
pub fn slice_measure(cs: &ConstraintSet, frame: &ObjectiveFrame, o: f64) -> Result<f64> {
    let n = frame.rotation.nrows();
    let u = (o - frame.shift) / frame.scale;
    let mut rep = HRep {
        dim: n - 1,
        normals: Vec::new(),
        offsets: Vec::new(),
    };
    for row in cs.half_spaces() {
        let g = &frame.rotation * DVector::from_vec(row.h);
        let rest = g.rows(1, n - 1).into_owned();
        let b = -row.d - g[0] * u;
        if rest.norm() <= 1e-12 * g.norm() {
            if b < -1e-9 * (1.0 + b.abs()) {
                return Ok(0.0);
            }
            continue;
        }
        rep.push(rest, b);
    }
    if rep.dim == 0 {
        return Ok(1.0);
    }
    match hrep_volume(&rep) {
        Ok(v) => Ok(v),
        Err(Error::EmptyRegion) => Ok(0.0),
        Err(e) => Err(e),
    }
}

/// Piecewise-polynomial Ω_⊥(O) of a bounded, full-dimensional polytope.
pub fn slice_volume(cs: &ConstraintSet, obj: &LinearObjective) -> Result<SliceVolumeFunction> {
    let n = obj.dimension();
    let verts = enumerate_vertices(cs, obj)?;
    let pts: Vec<DVector<f64>> = verts.iter().map(|v| DVector::from_column_slice(&v.point)).collect();
    let rank = affine_rank(&pts.iter().collect::<Vec<_>>());
    if rank < n {
        return Err(Error::DegenerateRegion { expected: n, found: rank });
    }
    let values: Vec<f64> = verts.iter().map(|v| v.objective_value).collect();
    let breakpoints = merge_breakpoints(&values);
    let frame = build_frame(obj);
    let mut pieces = Vec::with_capacity(breakpoints.len() - 1);
    for w in breakpoints.windows(2) {
        pieces.push(fit_piece(w[0], w[1], n, |o| slice_measure(cs, &frame, o))?);
    }
    SliceVolumeFunction::new(breakpoints, pieces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BoxBounds, HalfSpace};

    fn hs(h: &[f64], d: f64) -> HalfSpace {
        HalfSpace::new(h.to_vec(), d).unwrap()
    }

    fn section_iv() -> (ConstraintSet, LinearObjective) {
        let cs = ConstraintSet::new(
            vec![
                hs(&[3.0, 6.0], -48.0),
                hs(&[4.0, 2.0], -32.0),
                hs(&[1.0, 1.0], -10.0),
                hs(&[-1.0, 0.0], 0.0),
                hs(&[0.0, -1.0], 0.0),
            ],
            None,
        )
        .unwrap();
        (cs, LinearObjective::new(vec![-4.0, -3.0], 36.0).unwrap())
    }

    fn unit_square() -> ConstraintSet {
        ConstraintSet::new(vec![], Some(BoxBounds::new(vec![0.0; 2], vec![1.0; 2]).unwrap())).unwrap()
    }

    #[test]
    fn combinations_count() {
        let mut count = 0;
        for_each_combination(6, 3, |_| count += 1);
        assert_eq!(count, 20);
        let mut all = Vec::new();
        for_each_combination(3, 3, |s| all.push(s.to_vec()));
        assert_eq!(all, vec![vec![0, 1, 2]]);
        let mut none = 0;
        for_each_combination(2, 3, |_| none += 1);
        assert_eq!(none, 0);
    }

    #[test]
    fn section_iv_vertices() {
        let (cs, obj) = section_iv();
        let v = enumerate_vertices(&cs, &obj).unwrap();
        let vals: Vec<f64> = v.iter().map(|v| v.objective_value).collect();
        let expect = [0.0, 2.0, 4.0, 12.0, 36.0];
        assert_eq!(vals.len(), 5);
        for (a, b) in vals.iter().zip(expect) {
            assert!((a - b).abs() < 1e-10, "{vals:?}");
        }
        assert!(v.iter().all(|v| v.active_set.len() >= 2));
    }

    #[test]
    fn square_has_four_corners() {
        let obj = LinearObjective::new(vec![1.0, 0.0], 0.0).unwrap();
        assert_eq!(enumerate_vertices(&unit_square(), &obj).unwrap().len(), 4);
    }

    #[test]
    fn identity_frame_for_first_axis() {
        let f = build_frame(&LinearObjective::new(vec![1.0, 0.0], 0.0).unwrap());
        assert_eq!(f.rotation(), &DMatrix::identity(2, 2));
    }

    #[test]
    fn frame_first_row_is_normalized_objective() {
        let f = build_frame(&LinearObjective::new(vec![-4.0, -3.0], 36.0).unwrap());
        assert!((f.rotation()[(0, 0)] + 0.8).abs() < 1e-15);
        assert!((f.rotation()[(0, 1)] + 0.6).abs() < 1e-15);
        let rrt = f.rotation() * f.rotation().transpose();
        assert!((rrt - DMatrix::identity(2, 2)).amax() < 1e-12);
        let x = [1.3, -0.4];
        let (o, perp) = f.to_frame(&x);
        assert!((o - (-4.0 * 1.3 + 3.0 * 0.4 + 36.0)).abs() < 1e-12);
        let back = f.from_frame(o, &perp);
        assert!((back[0] - x[0]).abs() < 1e-12 && (back[1] - x[1]).abs() < 1e-12);
    }

    #[test]
    fn empty_and_unbounded_regions() {
        let obj = LinearObjective::new(vec![1.0, 1.0], 0.0).unwrap();
        let half_plane = ConstraintSet::new(vec![hs(&[1.0, 0.0], 0.0)], None).unwrap();
        assert!(matches!(enumerate_vertices(&half_plane, &obj), Err(Error::Unbounded)));
        let quadrant = ConstraintSet::new(vec![hs(&[-1.0, 0.0], 0.0), hs(&[0.0, -1.0], 0.0)], None).unwrap();
        assert!(matches!(enumerate_vertices(&quadrant, &obj), Err(Error::Unbounded)));
        let empty = ConstraintSet::new(
            vec![hs(&[1.0, 0.0], 1.0), hs(&[-1.0, 0.0], 0.0), hs(&[0.0, 1.0], -1.0), hs(&[0.0, -1.0], 0.0)],
            None,
        )
        .unwrap();
        assert!(matches!(enumerate_vertices(&empty, &obj), Err(Error::EmptyRegion)));
    }

    #[test]
    fn degenerate_region_detected() {
        // x1 = x2 segment inside the unit square
        let cs = ConstraintSet::new(
            vec![hs(&[1.0, -1.0], 0.0), hs(&[-1.0, 1.0], 0.0)],
            Some(BoxBounds::new(vec![0.0; 2], vec![1.0; 2]).unwrap()),
        )
        .unwrap();
        let obj = LinearObjective::new(vec![1.0, 0.0], 0.0).unwrap();
        assert!(matches!(slice_volume(&cs, &obj), Err(Error::DegenerateRegion { expected: 2, found: 1 })));
    }

    #[test]
    fn section_iv_slices() {
        let (cs, obj) = section_iv();
        let sv = slice_volume(&cs, &obj).unwrap();
        let expect = [[0.0, 2.5], [2.0, 1.5], [7.0, 0.25], [15.0, -5.0 / 12.0]];
        for (p, e) in sv.pieces().iter().zip(expect) {
            assert!((p[0] - e[0]).abs() < 1e-9 && (p[1] - e[1]).abs() < 1e-9, "{p:?} vs {e:?}");
        }
        // ∫Ω_⊥ dO = |c|·area = 5·42
        assert!((sv.integral() - 210.0).abs() < 1e-8);
        assert!((polytope_volume(&cs, 2).unwrap() - 42.0).abs() < 1e-10);
    }

    #[test]
    fn unit_square_slab() {
        let obj = LinearObjective::new(vec![1.0, 0.0], 0.0).unwrap();
        let sv = slice_volume(&unit_square(), &obj).unwrap();
        assert_eq!(sv.breakpoints(), &[0.0, 1.0]);
        assert!((sv.pieces()[0][0] - 1.0).abs() < 1e-12 && sv.pieces()[0][1].abs() < 1e-12);
    }

    #[test]
    fn eval_outside_range_is_zero() {
        let sv = SliceVolumeFunction::new(vec![0.0, 1.0, 2.0], vec![vec![0.0, 1.0], vec![2.0, -1.0]]).unwrap();
        assert_eq!(sv.eval(-0.1), 0.0);
        assert_eq!(sv.eval(2.1), 0.0);
        assert_eq!(sv.eval(1.0), 1.0);
        assert_eq!(sv.eval(1.5), 0.5);
        assert!((sv.integral() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cube_volume() {
        let cs = ConstraintSet::new(vec![], Some(BoxBounds::new(vec![0.0; 3], vec![1.0, 2.0, 3.0]).unwrap())).unwrap();
        assert!((polytope_volume(&cs, 3).unwrap() - 6.0).abs() < 1e-12);
        let simplex = ConstraintSet::new(
            vec![hs(&[1.0, 1.0, 1.0, 1.0], -1.0)],
            Some(BoxBounds::new(vec![0.0; 4], vec![f64::INFINITY; 4]).unwrap()),
        )
        .unwrap();
        assert!((polytope_volume(&simplex, 4).unwrap() - 1.0 / 24.0).abs() < 1e-12);
    }
}
