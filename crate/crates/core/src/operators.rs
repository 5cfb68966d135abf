//! Positive operators on finite grids.
//!
//! An [`Operator`] is a dense non-negative square matrix together with the
//! reading of the underlying space: a quadrature grid for `L^p`, a sample
//! grid for `C(K)`, or a plain sequence space. Constructors cover dense
//! input, discretised integral kernels, finite-rank sums `Σ eⱼ ⊗ αⱼ`, and
//! partition operators.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::SupportSemantics;

/// Entries in `(-CLIP_REL_TOL·max|a_ij|, 0)` are clipped to zero on construction.
pub const CLIP_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("NegativeEntry at ({row},{col}): {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is empty")]
    Empty,
    #[error("non-finite entry at ({row},{col})")]
    NonFinite { row: usize, col: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("invalid space: {0}")]
    InvalidSpace(String),
    #[error("pairing is not a permutation of 0..{0}")]
    InvalidPermutation(usize),
    #[error("negative kernel sample {value} at ({x}, {y})")]
    NegativeKernelSample { x: f64, y: f64, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// How the coordinates of the grid are read.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    /// `L^p` on a quadrature grid; functionals integrate against `weights`.
    LpGrid { p: f64, weights: Vec<f64> },
    /// `C(K)` sampled on a grid of points; functionals are raw dot products.
    CkGrid,
    /// `ℓ^p`.
    Sequence { p: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpaceSemantics {
    pub kind: SpaceKind,
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coords: Option<Vec<f64>>,
}

impl SpaceSemantics {
    pub fn new(kind: SpaceKind, dim: usize, coords: Option<Vec<f64>>) -> Result<Self, OperatorError> {
        let space = Self { kind, dim, coords };
        space.validate()?;
        Ok(space)
    }

    pub fn sequence(p: f64, dim: usize) -> Self {
        Self {
            kind: SpaceKind::Sequence { p },
            dim,
            coords: None,
        }
    }

    /// Midpoint-rule grid with `m` cells on `[a, b]`.
    pub fn lp_midpoint(p: f64, a: f64, b: f64, m: usize) -> Result<Self, OperatorError> {
        if m == 0 || !(b > a) {
            return Err(OperatorError::InvalidSpace(format!(
                "need m >= 1 and a < b, got m={m}, [{a}, {b}]"
            )));
        }
        let h = (b - a) / m as f64;
        let coords = (0..m).map(|i| a + (i as f64 + 0.5) * h).collect();
        Self::new(
            SpaceKind::LpGrid {
                p,
                weights: vec![h; m],
            },
            m,
            Some(coords),
        )
    }

    /// `m` equispaced sample points on `[a, b]`, endpoints included.
    pub fn ck_grid(a: f64, b: f64, m: usize) -> Result<Self, OperatorError> {
        if m < 2 || !(b > a) {
            return Err(OperatorError::InvalidSpace(format!(
                "need m >= 2 and a < b, got m={m}, [{a}, {b}]"
            )));
        }
        let h = (b - a) / (m - 1) as f64;
        let mut coords: Vec<f64> = (0..m).map(|i| a + i as f64 * h).collect();
        coords[m - 1] = b;
        Self::new(SpaceKind::CkGrid, m, Some(coords))
    }

    fn validate(&self) -> Result<(), OperatorError> {
        if self.dim == 0 {
            return Err(OperatorError::InvalidSpace("dimension must be positive".into()));
        }
        match &self.kind {
            SpaceKind::LpGrid { p, weights } => {
                check_exponent(*p)?;
                if weights.len() != self.dim {
                    return Err(OperatorError::InvalidSpace(format!(
                        "{} weights for dimension {}",
                        weights.len(),
                        self.dim
                    )));
                }
                if weights.iter().any(|w| !(*w > 0.0) || !w.is_finite()) {
                    return Err(OperatorError::InvalidSpace(
                        "quadrature weights must be strictly positive".into(),
                    ));
                }
            }
            SpaceKind::Sequence { p } => check_exponent(*p)?,
            SpaceKind::CkGrid => {}
        }
        if let Some(coords) = &self.coords {
            if coords.len() != self.dim {
                return Err(OperatorError::InvalidSpace(format!(
                    "{} coordinates for dimension {}",
                    coords.len(),
                    self.dim
                )));
            }
            if coords.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(OperatorError::InvalidSpace(
                    "coordinates must be strictly increasing".into(),
                ));
            }
        }
        Ok(())
    }

    /// Quadrature weights (all ones outside `L^p` grids).
    pub fn weights(&self) -> Vec<f64> {
        match &self.kind {
            SpaceKind::LpGrid { weights, .. } => weights.clone(),
            _ => vec![1.0; self.dim],
        }
    }

    /// Norm exponent; `C(K)` is read as `p = ∞`.
    pub fn exponent(&self) -> f64 {
        match &self.kind {
            SpaceKind::LpGrid { p, .. } | SpaceKind::Sequence { p } => *p,
            SpaceKind::CkGrid => f64::INFINITY,
        }
    }

    pub fn support_semantics(&self) -> SupportSemantics {
        match self.kind {
            SpaceKind::CkGrid => SupportSemantics::Open,
            _ => SupportSemantics::AlmostEverywhere,
        }
    }

    /// Short tag: `lp`, `ck` or `seq`.
    pub fn tag(&self) -> &'static str {
        match self.kind {
            SpaceKind::LpGrid { .. } => "lp",
            SpaceKind::CkGrid => "ck",
            SpaceKind::Sequence { .. } => "seq",
        }
    }
}

fn check_exponent(p: f64) -> Result<(), OperatorError> {
    if !(p >= 1.0) {
        return Err(OperatorError::InvalidSpace(format!("exponent p={p} must be >= 1")));
    }
    Ok(())
}

/// A positive linear functional `α`, stored by its coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    pub coefficients: Vec<f64>,
}

impl Functional {
    pub fn new(coefficients: Vec<f64>) -> Result<Self, OperatorError> {
        for (i, c) in coefficients.iter().enumerate() {
            if !c.is_finite() {
                return Err(OperatorError::NonFinite { row: 0, col: i });
            }
            if *c < 0.0 {
                return Err(OperatorError::NegativeEntry {
                    row: 0,
                    col: i,
                    value: *c,
                });
            }
        }
        Ok(Self { coefficients })
    }

    /// Point evaluation at grid index `index`.
    pub fn point_evaluation(dim: usize, index: usize) -> Self {
        let mut coefficients = vec![0.0; dim];
        coefficients[index] = 1.0;
        Self { coefficients }
    }

    /// Row vector `r` with `⟨α, f⟩ = Σ rᵢ fᵢ` on the given space.
    pub fn effective_row(&self, space: &SpaceSemantics) -> Vec<f64> {
        match &space.kind {
            SpaceKind::LpGrid { weights, .. } => self
                .coefficients
                .iter()
                .zip(weights)
                .map(|(c, w)| c * w)
                .collect(),
            _ => self.coefficients.clone(),
        }
    }

    pub fn evaluate(&self, f: &[f64], space: &SpaceSemantics) -> f64 {
        self.effective_row(space).iter().zip(f).map(|(r, x)| r * x).sum()
    }
}

/// Which induced norm a [`PowerBound`] reports as its headline value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "norm", rename_all = "snake_case")]
pub enum NormUsed {
    InducedInf,
    /// `‖T‖_1^{1/p} ‖T‖_∞^{1-1/p}`, an upper bound for the induced `p`-norm.
    RieszThorin { p: f64 },
}

/// Empirical power-boundedness over a finite horizon.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerBound {
    pub sup_norm: f64,
    pub norm_used: NormUsed,
    /// `max_{n ≤ N} ‖Tⁿ‖` in the (weighted) induced 1-norm.
    pub sup_induced_one: f64,
    /// `max_{n ≤ N} ‖Tⁿ‖` in the induced ∞-norm.
    pub sup_induced_inf: f64,
    pub horizon: usize,
    pub bounded_guess: bool,
}

/// Relative slack in the non-increasing test on the tail of the norm sequence.
const GROWTH_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Operator {
    matrix: DMatrix<f64>,
    space: SpaceSemantics,
    label: String,
}

impl Operator {
    /// Builds an operator from row-major input. Tiny negative round-off is
    /// clipped to zero.
    pub fn from_dense(rows: &[Vec<f64>], space: SpaceSemantics) -> Result<Self, OperatorError> {
        let n = rows.len();
        if n == 0 {
            return Err(OperatorError::Empty);
        }
        for row in rows {
            if row.len() != n {
                return Err(OperatorError::NotSquare {
                    rows: n,
                    cols: row.len(),
                });
            }
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::from_matrix(matrix, space)
    }

    pub fn from_matrix(mut matrix: DMatrix<f64>, space: SpaceSemantics) -> Result<Self, OperatorError> {
        let (rows, cols) = matrix.shape();
        if rows != cols {
            return Err(OperatorError::NotSquare { rows, cols });
        }
        if rows == 0 {
            return Err(OperatorError::Empty);
        }
        if space.dim != rows {
            return Err(OperatorError::DimensionMismatch {
                expected: space.dim,
                got: rows,
            });
        }
        space.validate()?;
        let mut scale = 0.0f64;
        for j in 0..cols {
            for i in 0..rows {
                let v = matrix[(i, j)];
                if !v.is_finite() {
                    return Err(OperatorError::NonFinite { row: i, col: j });
                }
                scale = scale.max(v.abs());
            }
        }
        let clip = CLIP_REL_TOL * scale;
        // Report the first offending entry in row-major order.
        for i in 0..rows {
            for j in 0..cols {
                let v = matrix[(i, j)];
                if v < 0.0 {
                    if v > -clip {
                        matrix[(i, j)] = 0.0;
                    } else {
                        return Err(OperatorError::NegativeEntry {
                            row: i,
                            col: j,
                            value: v,
                        });
                    }
                }
            }
        }
        Ok(Self {
            matrix,
            space,
            label: String::new(),
        })
    }

    /// Unchecked constructor for products and sums of valid operators.
    pub(crate) fn from_parts(matrix: DMatrix<f64>, space: SpaceSemantics, label: String) -> Self {
        Self { matrix, space, label }
    }

    pub fn identity(space: SpaceSemantics) -> Self {
        let n = space.dim;
        Self::from_parts(DMatrix::identity(n, n), space, "identity".into())
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn space(&self) -> &SpaceSemantics {
        &self.space
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.dim())
            .map(|i| self.matrix.row(i).iter().copied().collect())
            .collect()
    }

    fn check_len(&self, len: usize) -> Result<(), OperatorError> {
        if len != self.dim() {
            return Err(OperatorError::DimensionMismatch {
                expected: self.dim(),
                got: len,
            });
        }
        Ok(())
    }

    pub fn apply(&self, f: &[Complex64]) -> Result<Vec<Complex64>, OperatorError> {
        self.check_len(f.len())?;
        let n = self.dim();
        Ok((0..n)
            .map(|i| (0..n).map(|j| f[j] * self.matrix[(i, j)]).sum())
            .collect())
    }

    pub fn apply_real(&self, f: &[f64]) -> Result<Vec<f64>, OperatorError> {
        self.check_len(f.len())?;
        Ok((&self.matrix * DVector::from_column_slice(f)).iter().copied().collect())
    }

    /// `Tⁿ` by binary powering; `T⁰` is the identity.
    pub fn matrix_power(&self, n: u64) -> Operator {
        let label = format!("{}^{}", self.label, n);
        Self::from_parts(matrix_power(&self.matrix, n), self.space.clone(), label)
    }

    /// `(1/n) Σ_{k<n} Tᵏ`.
    pub fn cesaro_mean(&self, n: u64) -> Result<Operator, OperatorError> {
        if n == 0 {
            return Err(OperatorError::InvalidParameter(
                "Cesàro mean needs n >= 1".into(),
            ));
        }
        let (sum, _) = power_sum(&self.matrix, n);
        Ok(Self::from_parts(
            sum / n as f64,
            self.space.clone(),
            format!("cesaro({}, {n})", self.label),
        ))
    }

    /// Scales every non-zero row to sum 1.
    pub fn row_normalized(&self) -> Operator {
        let mut m = self.matrix.clone();
        for i in 0..m.nrows() {
            let s: f64 = m.row(i).sum();
            if s > 0.0 {
                m.row_mut(i).scale_mut(1.0 / s);
            }
        }
        Self::from_parts(m, self.space.clone(), self.label.clone())
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix.row(i).sum()).collect()
    }

    pub fn column_sums(&self) -> Vec<f64> {
        (0..self.dim()).map(|j| self.matrix.column(j).sum()).collect()
    }

    /// Induced ∞-norm (max row sum).
    pub fn norm_inf(&self) -> f64 {
        self.row_sums().into_iter().fold(0.0, f64::max)
    }

    /// Largest row-sum estimate of `‖T‖`, used to scale tolerances.
    pub fn scale(&self) -> f64 {
        self.norm_inf().max(self.column_sums().into_iter().fold(0.0, f64::max))
    }

    /// Sup of `‖Tⁿ‖` over `0 ≤ n ≤ horizon`.
    ///
    /// For a non-negative matrix `‖Tⁿ‖_∞ = ‖Tⁿ𝟙‖_∞` and the weighted 1-norm is
    /// `max_j ((Tᵀ)ⁿ w)_j / w_j`, so both sequences come from vector
    /// iterations. `bounded_guess` holds when both norm sequences are
    /// non-increasing over the last quarter of the horizon, or when the
    /// support-graph classes certify boundedness (see
    /// [`crate::spectral::classes_power_bounded`]).
    pub fn power_bound_estimate(&self, horizon: usize) -> PowerBound {
        let horizon = horizon.max(1);
        let n = self.dim();
        let w = self.space.weights();
        let mut row_iter = DVector::from_element(n, 1.0);
        let mut col_iter = DVector::from_column_slice(&w);
        let transpose = self.matrix.transpose();
        let mut norms_inf = Vec::with_capacity(horizon + 1);
        let mut norms_one = Vec::with_capacity(horizon + 1);
        norms_inf.push(1.0);
        norms_one.push(1.0);
        for _ in 0..horizon {
            row_iter = &self.matrix * row_iter;
            col_iter = &transpose * col_iter;
            norms_inf.push(row_iter.iter().copied().fold(0.0, f64::max));
            norms_one.push(
                col_iter
                    .iter()
                    .zip(&w)
                    .map(|(c, wj)| c / wj)
                    .fold(0.0, f64::max),
            );
        }
        let sup = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
        let tail_non_increasing = |v: &[f64]| {
            let quarter = horizon.div_ceil(4);
            v[v.len() - 1 - quarter..]
                .windows(2)
                .all(|w| w[1].is_finite() && w[1] <= w[0] * (1.0 + GROWTH_SLACK))
        };
        let sup_induced_inf = sup(&norms_inf);
        let sup_induced_one = sup(&norms_one);
        let p = self.space.exponent();
        let (sup_norm, norm_used) = if p.is_infinite() {
            (sup_induced_inf, NormUsed::InducedInf)
        } else {
            // Riesz–Thorin bound taken termwise, then maximised.
            let s = norms_one
                .iter()
                .zip(&norms_inf)
                .map(|(a, b)| a.powf(1.0 / p) * b.powf(1.0 - 1.0 / p))
                .fold(0.0, f64::max);
            (s, NormUsed::RieszThorin { p })
        };
        PowerBound {
            sup_norm,
            norm_used,
            sup_induced_one,
            sup_induced_inf,
            horizon,
            bounded_guess: (tail_non_increasing(&norms_inf) && tail_non_increasing(&norms_one))
                || crate::spectral::classes_power_bounded(&self.matrix, crate::spectral::DEFAULT_UNIMODULAR_TOL),
        }
    }
}

pub(crate) fn matrix_power(m: &DMatrix<f64>, mut n: u64) -> DMatrix<f64> {
    let dim = m.nrows();
    let mut result = DMatrix::identity(dim, dim);
    let mut base = m.clone();
    while n > 0 {
        if n & 1 == 1 {
            result = &result * &base;
        }
        n >>= 1;
        if n > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `(Σ_{k<n} Mᵏ, Mⁿ)` with `O(log n)` products.
pub(crate) fn power_sum(m: &DMatrix<f64>, n: u64) -> (DMatrix<f64>, DMatrix<f64>) {
    let dim = m.nrows();
    let mut sum = DMatrix::zeros(dim, dim);
    let mut power = DMatrix::identity(dim, dim);
    if n == 0 {
        return (sum, power);
    }
    let bits = 64 - n.leading_zeros();
    for b in (0..bits).rev() {
        // (S_k, P_k) -> (S_2k, P_2k)
        sum = &sum + &power * &sum;
        power = &power * &power;
        if (n >> b) & 1 == 1 {
            // (S_k, P_k) -> (S_{k+1}, P_{k+1})
            sum += &power;
            power = &power * m;
        }
    }
    (sum, power)
}

/// Discretises `(Tf)(x) = ∫ k(x, y) f(y) dy` on `[a, b]` with the midpoint
/// rule: entry `(i, j)` is `h·k(xᵢ, xⱼ)` with `h = (b − a)/m`.
pub fn kernel_on_grid(
    kernel: impl Fn(f64, f64) -> f64,
    m: usize,
    a: f64,
    b: f64,
) -> Result<Operator, OperatorError> {
    if m < 2 {
        return Err(OperatorError::InvalidParameter(format!("grid size {m} < 2")));
    }
    let space = SpaceSemantics::lp_midpoint(1.0, a, b, m)?;
    let coords = space.coords.clone().expect("midpoint grid has coordinates");
    let weights = space.weights();
    let mut matrix = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let value = kernel(coords[i], coords[j]);
            if !value.is_finite() || value < 0.0 {
                return Err(OperatorError::NegativeKernelSample {
                    x: coords[i],
                    y: coords[j],
                    value,
                });
            }
            matrix[(i, j)] = weights[j] * value;
        }
    }
    Ok(Operator::from_matrix(matrix, space)?.with_label("kernel"))
}

/// Doubly stochastic discretisation of the strip kernel `1_{|x−y|<δ}` on
/// `[0, 1]`: the sampled kernel is scaled so the fullest row sums to one and
/// the missing mass of the boundary rows is put on the diagonal. The result
/// is symmetric, so column sums are one as well.
pub fn doubly_stochastic_strip(m: usize, delta: f64) -> Result<Operator, OperatorError> {
    if !(delta > 0.0) {
        return Err(OperatorError::InvalidParameter(format!("strip width {delta} <= 0")));
    }
    let raw = kernel_on_grid(|x, y| if (x - y).abs() < delta { 1.0 } else { 0.0 }, m, 0.0, 1.0)?;
    let mut matrix = raw.matrix.clone();
    let max_row = raw.norm_inf();
    matrix /= max_row;
    for i in 0..m {
        let deficit = 1.0 - matrix.row(i).sum();
        matrix[(i, i)] += deficit.max(0.0);
    }
    Ok(Operator::from_parts(matrix, raw.space, format!("strip(m={m}, delta={delta})")))
}

/// `Σⱼ eⱼ ⊗ αⱼ`, i.e. `f ↦ Σⱼ ⟨αⱼ, f⟩ eⱼ`.
pub fn finite_rank(
    vectors: &[Vec<f64>],
    functionals: &[Functional],
    space: SpaceSemantics,
) -> Result<Operator, OperatorError> {
    if vectors.len() != functionals.len() {
        return Err(OperatorError::InvalidParameter(format!(
            "{} vectors but {} functionals",
            vectors.len(),
            functionals.len()
        )));
    }
    let n = space.dim;
    let mut matrix = DMatrix::zeros(n, n);
    for (e, alpha) in vectors.iter().zip(functionals) {
        if e.len() != n {
            return Err(OperatorError::DimensionMismatch {
                expected: n,
                got: e.len(),
            });
        }
        if alpha.coefficients.len() != n {
            return Err(OperatorError::DimensionMismatch {
                expected: n,
                got: alpha.coefficients.len(),
            });
        }
        let row = alpha.effective_row(&space);
        for i in 0..n {
            if e[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                matrix[(i, j)] += e[i] * row[j];
            }
        }
    }
    Ok(Operator::from_matrix(matrix, space)?.with_label("finite-rank"))
}

/// Partition operator `Tf = Σₙ (∫_{Iₙ} f) 1_{Jₙ}` on `N` unit blocks of
/// `block_size` cells each.
///
/// `Iₙ = [n, n+1)` and `Jₙ = [n+1−overlap, n+1) ∪ [π(n), π(n)+1−overlap)`,
/// which partitions `[0, N)` for any permutation `π` and gives
/// `|Iₙ ∩ Jₙ| = overlap` whenever `π(n) ≠ n`. With `π` the cyclic shift and
/// overlap `0`, `Jₙ = I_{n+1 mod N}`. Cell averages of `1_{Jₙ}` may be
/// fractional when `overlap·block_size` is not an integer.
pub fn partition_operator(
    blocks: usize,
    block_size: usize,
    pairing: &[usize],
    overlap: f64,
) -> Result<Operator, OperatorError> {
    if blocks < 2 || block_size == 0 {
        return Err(OperatorError::InvalidParameter(format!(
            "need at least 2 blocks of positive size, got {blocks} x {block_size}"
        )));
    }
    if !(0.0..=1.0).contains(&overlap) {
        return Err(OperatorError::InvalidParameter(format!(
            "overlap {overlap} outside [0, 1]"
        )));
    }
    if pairing.len() != blocks {
        return Err(OperatorError::InvalidPermutation(blocks));
    }
    let mut seen = vec![false; blocks];
    for &t in pairing {
        if t >= blocks || seen[t] {
            return Err(OperatorError::InvalidPermutation(blocks));
        }
        seen[t] = true;
    }
    let dim = blocks * block_size;
    let b = block_size as f64;
    let space = SpaceSemantics::lp_midpoint(2.0, 0.0, blocks as f64, dim)?;
    let w = 1.0 / b;
    let mut matrix = DMatrix::zeros(dim, dim);
    for n in 0..blocks {
        // J_n in cell units.
        let tail = ((n as f64 + 1.0) * b - overlap * b, (n as f64 + 1.0) * b);
        let head = (
            pairing[n] as f64 * b,
            pairing[n] as f64 * b + (1.0 - overlap) * b,
        );
        for i in 0..dim {
            let coverage = cell_overlap(i, tail) + cell_overlap(i, head);
            if coverage == 0.0 {
                continue;
            }
            for j in n * block_size..(n + 1) * block_size {
                matrix[(i, j)] = coverage * w;
            }
        }
    }
    let label = format!("partition(N={blocks}, b={block_size}, overlap={overlap})");
    Ok(Operator::from_matrix(matrix, space)?.with_label(label))
}

fn cell_overlap(cell: usize, (start, end): (f64, f64)) -> f64 {
    let lo = start.max(cell as f64);
    let hi = end.min(cell as f64 + 1.0);
    (hi - lo).max(0.0)
}

/// Indicator of block `n` for a partition operator with `block_size` cells per block.
pub fn block_indicator(blocks: usize, block_size: usize, n: usize) -> Vec<f64> {
    let mut v = vec![0.0; blocks * block_size];
    for x in &mut v[n * block_size..(n + 1) * block_size] {
        *x = 1.0;
    }
    v
}

/// Cyclic shift `n ↦ n+1 mod N`.
pub fn cyclic_pairing(blocks: usize) -> Vec<usize> {
    (0..blocks).map(|n| (n + 1) % blocks).collect()
}

/// Permutation matrix of the cycle `0 → 1 → … → d−1 → 0`, acting as `e_j ↦ e_{j+1}`.
pub fn cyclic_permutation(d: usize) -> Operator {
    let mut m = DMatrix::zeros(d, d);
    for j in 0..d {
        m[((j + 1) % d, j)] = 1.0;
    }
    Operator::from_parts(m, SpaceSemantics::sequence(2.0, d), format!("cycle({d})"))
}
