//! Optimization problems as the common input of the exact and statistical
//! engines: objectives, inequality constraints and domains.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `hᵀx + d ≤ 0` before a point counts as infeasible.
pub const FEAS_TOL: f64 = 1e-9;

const SYMMETRY_TOL: f64 = 1e-12;

/// `O(x) = cᵀx + d0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearObjective {
    c: Vec<f64>,
    d0: f64,
}

impl LinearObjective {
    pub fn new(c: Vec<f64>, d0: f64) -> Result<Self> {
        if c.is_empty() {
            return Err(Error::input("linear objective needs at least one coefficient"));
        }
        if c.iter().any(|v| !v.is_finite()) || !d0.is_finite() {
            return Err(Error::input("linear objective coefficients must be finite"));
        }
        if c.iter().all(|&v| v == 0.0) {
            return Err(Error::input("linear objective vector is zero"));
        }
        Ok(Self { c, d0 })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn offset(&self) -> f64 {
        self.d0
    }

    pub fn dimension(&self) -> usize {
        self.c.len()
    }

    pub fn norm(&self) -> f64 {
        self.c.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.c.iter().zip(x).map(|(c, x)| c * x).sum::<f64>() + self.d0
    }
}

/// `O(x) = ½xᵀAx − bᵀx` with `A` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticObjective {
    a: DMatrix<f64>,
    b: DVector<f64>,
    eigenvalues: Vec<f64>,
    minimizer: DVector<f64>,
}

impl QuadraticObjective {
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::input("quadratic objective needs dimension >= 1"));
        }
        if a.len() != n || a.iter().any(|row| row.len() != n) {
            return Err(Error::input(format!("quadratic matrix must be {n}x{n}")));
        }
        let m = DMatrix::from_fn(n, n, |i, j| a[i][j]);
        Self::from_matrix(m, DVector::from_vec(b))
    }

    pub fn from_matrix(a: DMatrix<f64>, b: DVector<f64>) -> Result<Self> {
        let n = b.len();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::input(format!("quadratic matrix must be {n}x{n}")));
        }
        if a.iter().chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(Error::input("quadratic objective entries must be finite"));
        }
        let scale = a.amax().max(1.0);
        for i in 0..n {
            for j in 0..i {
                if (a[(i, j)] - a[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::input(format!("quadratic matrix not symmetric at ({i},{j})")));
                }
            }
        }
        let eig = SymmetricEigen::new(a.clone());
        let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        eigenvalues.sort_by(f64::total_cmp);
        if eigenvalues[0] <= 0.0 {
            return Err(Error::input(format!(
                "quadratic matrix is not positive definite (min eigenvalue {})",
                eigenvalues[0]
            )));
        }
        let minimizer = a
            .clone()
            .cholesky()
            .ok_or_else(|| Error::input("quadratic matrix is not positive definite"))?
            .solve(&b);
        Ok(Self {
            a,
            b,
            eigenvalues,
            minimizer,
        })
    }

    pub fn dimension(&self) -> usize {
        self.b.len()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn linear_term(&self) -> &DVector<f64> {
        &self.b
    }

    /// Eigenvalues of `A`, ascending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn log_det(&self) -> f64 {
        self.eigenvalues.iter().map(|l| l.ln()).sum()
    }

    /// `A⁻¹b`.
    pub fn minimizer(&self) -> &[f64] {
        self.minimizer.as_slice()
    }

    /// `−½ bᵀA⁻¹b`.
    pub fn min_value(&self) -> f64 {
        -0.5 * self.b.dot(&self.minimizer)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.dimension();
        let mut quad = 0.0;
        for i in 0..n {
            let row: f64 = (0..n).map(|j| self.a[(i, j)] * x[j]).sum();
            quad += x[i] * row;
        }
        0.5 * quad - self.b.iter().zip(x).map(|(b, x)| b * x).sum::<f64>()
    }
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Objective given only as a callable.
#[derive(Clone)]
pub struct BlackBoxObjective {
    evaluator: Evaluator,
    label: String,
    dimension: usize,
}

impl BlackBoxObjective {
    pub fn new<F>(dimension: usize, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Send + Sync + 'static,
    {
        Self {
            evaluator: Arc::new(f),
            label: label.into(),
            dimension,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }
}

impl fmt::Debug for BlackBoxObjective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlackBoxObjective")
            .field("label", &self.label)
            .field("dimension", &self.dimension)
            .finish()
    }
}

#[derive(Debug, Clone)]
pub enum Objective {
    Linear(LinearObjective),
    Quadratic(QuadraticObjective),
    BlackBox(BlackBoxObjective),
}

impl Objective {
    pub fn dimension(&self) -> usize {
        match self {
            Objective::Linear(o) => o.dimension(),
            Objective::Quadratic(o) => o.dimension(),
            Objective::BlackBox(o) => o.dimension(),
        }
    }

    /// Evaluate without the dimension check; callers guarantee `x.len()`.
    #[inline]
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Objective::Linear(o) => o.eval(x),
            Objective::Quadratic(o) => o.eval(x),
            Objective::BlackBox(o) => o.eval(x),
        }
    }

    pub fn as_linear(&self) -> Option<&LinearObjective> {
        match self {
            Objective::Linear(o) => Some(o),
            _ => None,
        }
    }

    pub fn as_quadratic(&self) -> Option<&QuadraticObjective> {
        match self {
            Objective::Quadratic(o) => Some(o),
            _ => None,
        }
    }
}

impl From<LinearObjective> for Objective {
    fn from(o: LinearObjective) -> Self {
        Objective::Linear(o)
    }
}

impl From<QuadraticObjective> for Objective {
    fn from(o: QuadraticObjective) -> Self {
        Objective::Quadratic(o)
    }
}

impl From<BlackBoxObjective> for Objective {
    fn from(o: BlackBoxObjective) -> Self {
        Objective::BlackBox(o)
    }
}

pub fn evaluate_objective(obj: &Objective, x: &[f64]) -> Result<f64> {
    if x.len() != obj.dimension() {
        return Err(Error::DimensionMismatch {
            expected: obj.dimension(),
            found: x.len(),
        });
    }
    Ok(obj.eval(x))
}

/// Nonnegative weights turning several objectives into `Σ P_i O_i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureVector(Vec<f64>);

impl PressureVector {
    pub fn new(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::input("pressure vector is empty"));
        }
        if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::input("pressures must be finite and nonnegative"));
        }
        if p.iter().all(|&v| v == 0.0) {
            return Err(Error::input("at least one pressure must be positive"));
        }
        Ok(Self(p))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub fn combine_objectives(objs: &[Objective], p: &PressureVector) -> Result<BlackBoxObjective> {
    if objs.len() != p.len() {
        return Err(Error::input(format!(
            "{} objectives but {} pressures",
            objs.len(),
            p.len()
        )));
    }
    let n = objs[0].dimension();
    if let Some(bad) = objs.iter().find(|o| o.dimension() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bad.dimension(),
        });
    }
    let parts: Vec<(f64, Objective)> = p.values().iter().copied().zip(objs.iter().cloned()).collect();
    Ok(BlackBoxObjective::new(n, "weighted sum", move |x| {
        parts.iter().map(|(w, o)| w * o.eval(x)).sum()
    }))
}

/// `hᵀx + d ≤ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfSpace {
    pub h: Vec<f64>,
    pub d: f64,
}

impl HalfSpace {
    pub fn new(h: Vec<f64>, d: f64) -> Result<Self> {
        if h.iter().all(|&v| v == 0.0) {
            return Err(Error::input("constraint normal is zero"));
        }
        if h.iter().any(|v| !v.is_finite()) || !d.is_finite() {
            return Err(Error::input("constraint entries must be finite"));
        }
        Ok(Self { h, d })
    }

    /// `hᵀx + d`; nonpositive when satisfied.
    pub fn value(&self, x: &[f64]) -> f64 {
        self.h.iter().zip(x).map(|(h, x)| h * x).sum::<f64>() + self.d
    }
}

/// Per-coordinate bounds; infinite entries leave a side open.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxBounds {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl BoxBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::input("box lower/upper lengths differ"));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l.is_nan() || u.is_nan() || l > u) {
            return Err(Error::input("box bounds require lower <= upper"));
        }
        Ok(Self { lower, upper })
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn is_finite(&self) -> bool {
        self.lower.iter().chain(&self.upper).all(|v| v.is_finite())
    }

    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(x, (l, u))| *x >= l - tol && *x <= u + tol)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    rows: Vec<HalfSpace>,
    bounds: Option<BoxBounds>,
}

impl ConstraintSet {
    pub fn new(rows: Vec<HalfSpace>, bounds: Option<BoxBounds>) -> Result<Self> {
        let mut dims = rows.iter().map(|r| r.h.len()).chain(bounds.iter().map(|b| b.dimension()));
        if let Some(first) = dims.next() {
            if let Some(other) = dims.find(|&d| d != first) {
                return Err(Error::DimensionMismatch {
                    expected: first,
                    found: other,
                });
            }
        }
        if rows.iter().any(|r| r.h.iter().all(|&v| v == 0.0)) {
            return Err(Error::input("constraint normal is zero"));
        }
        Ok(Self { rows, bounds })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn rows(&self) -> &[HalfSpace] {
        &self.rows
    }

    pub fn bounds(&self) -> Option<&BoxBounds> {
        self.bounds.as_ref()
    }

    pub fn dimension(&self) -> Option<usize> {
        self.rows
            .first()
            .map(|r| r.h.len())
            .or_else(|| self.bounds.as_ref().map(|b| b.dimension()))
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty() && self.bounds.is_none()
    }

    /// All constraints as half-spaces, finite box sides appended after the
    /// explicit rows (lower then upper, per coordinate).
    pub fn half_spaces(&self) -> Vec<HalfSpace> {
        let mut out = self.rows.clone();
        if let Some(b) = &self.bounds {
            let n = b.dimension();
            for i in 0..n {
                if b.lower[i].is_finite() {
                    let mut h = vec![0.0; n];
                    h[i] = -1.0;
                    out.push(HalfSpace { h, d: b.lower[i] });
                }
                if b.upper[i].is_finite() {
                    let mut h = vec![0.0; n];
                    h[i] = 1.0;
                    out.push(HalfSpace { h, d: -b.upper[i] });
                }
            }
        }
        out
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        if let Some(n) = self.dimension() {
            if x.len() != n {
                return false;
            }
        }
        self.rows.iter().all(|r| r.value(x) <= FEAS_TOL)
            && self.bounds.as_ref().is_none_or(|b| b.contains(x, FEAS_TOL))
    }

    /// Copy with every offset `d_j` replaced.
    pub fn with_offsets(&self, offsets: &[f64]) -> Result<Self> {
        if offsets.len() != self.rows.len() {
            return Err(Error::input("offset count differs from row count"));
        }
        let rows = self
            .rows
            .iter()
            .zip(offsets)
            .map(|(r, &d)| HalfSpace { h: r.h.clone(), d })
            .collect();
        Ok(Self {
            rows,
            bounds: self.bounds.clone(),
        })
    }
}

/// Unit step of the constraint set: 1 inside (within [`FEAS_TOL`]), else 0.
pub fn indicator(cs: &ConstraintSet, x: &[f64]) -> u8 {
    u8::from(cs.contains(x))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProblemKind {
    Linear,
    Quadratic,
    Blackbox,
    Discrete,
}

#[derive(Debug, Clone)]
pub struct ProblemSpec {
    objectives: Vec<Objective>,
    constraints: ConstraintSet,
    dimension: usize,
    kind: ProblemKind,
    discrete_points: Option<Vec<Vec<f64>>>,
}

impl ProblemSpec {
    pub fn new(
        objectives: Vec<Objective>,
        constraints: ConstraintSet,
        kind: ProblemKind,
        discrete_points: Option<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let first = objectives
            .first()
            .ok_or_else(|| Error::input("problem needs at least one objective"))?;
        let dimension = first.dimension();
        if dimension == 0 {
            return Err(Error::input("problem dimension must be >= 1"));
        }
        for o in &objectives {
            if o.dimension() != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: o.dimension(),
                });
            }
        }
        if let Some(d) = constraints.dimension() {
            if d != dimension {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: d,
                });
            }
        }
        match kind {
            ProblemKind::Linear if objectives.iter().any(|o| o.as_linear().is_none()) => {
                return Err(Error::input("kind `linear` requires linear objectives"));
            }
            ProblemKind::Quadratic if objectives.iter().any(|o| o.as_quadratic().is_none()) => {
                return Err(Error::input("kind `quadratic` requires quadratic objectives"));
            }
            _ => {}
        }
        if kind == ProblemKind::Discrete {
            let pts = discrete_points
                .as_ref()
                .filter(|p| !p.is_empty())
                .ok_or_else(|| Error::input("kind `discrete` requires a nonempty point list"))?;
            if let Some(bad) = pts.iter().find(|p| p.len() != dimension) {
                return Err(Error::DimensionMismatch {
                    expected: dimension,
                    found: bad.len(),
                });
            }
        }
        Ok(Self {
            objectives,
            constraints,
            dimension,
            kind,
            discrete_points,
        })
    }

    /// Single-objective convenience constructor.
    pub fn single(objective: impl Into<Objective>, constraints: ConstraintSet) -> Result<Self> {
        let objective = objective.into();
        let kind = match objective {
            Objective::Linear(_) => ProblemKind::Linear,
            Objective::Quadratic(_) => ProblemKind::Quadratic,
            Objective::BlackBox(_) => ProblemKind::Blackbox,
        };
        Self::new(vec![objective], constraints, kind, None)
    }

    pub fn objectives(&self) -> &[Objective] {
        &self.objectives
    }

    pub fn objective(&self) -> &Objective {
        &self.objectives[0]
    }

    pub fn constraints(&self) -> &ConstraintSet {
        &self.constraints
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> ProblemKind {
        self.kind
    }

    pub fn discrete_points(&self) -> Option<&[Vec<f64>]> {
        self.discrete_points.as_deref()
    }

    pub fn is_feasible(&self, x: &[f64]) -> bool {
        self.constraints.contains(x)
    }
}
