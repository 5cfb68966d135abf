//! Vector-lattice primitives on finite grids.
//!
//! On an atomic space the closed ideal generated by a positive vector is
//! determined by the set of coordinates where the vector is non-zero, so a
//! [`SupportMask`] is the working representation of that ideal. The three
//! inclusion tests in this module (mask inclusion, truncation `f ∧ tg → f`,
//! and the `‖(g − sf)⁻‖ = o(s)` estimate) must agree on every pair of
//! non-negative vectors whose non-zero entries sit well above the support
//! threshold.

use std::fmt;

use fixedbitset::FixedBitSet;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Relative zero threshold used by [`support_default`].
pub const DEFAULT_SUPPORT_REL_TOL: f64 = 1e-12;

/// Final-ratio acceptance level of [`ideal_inclusion_little_o`], relative to `‖f‖_∞`.
pub const LITTLE_O_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LatticeError {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("support masks use different semantics ({left:?} vs {right:?})")]
    SemanticsMismatch {
        left: SupportSemantics,
        right: SupportSemantics,
    },
    #[error("negative entry {value} at index {index}")]
    NegativeEntry { index: usize, value: f64 },
    #[error("non-finite entry at index {0}")]
    NonFinite(usize),
    #[error("the s-grid is empty")]
    EmptyGrid,
    #[error("the s-grid must be positive and strictly decreasing")]
    InvalidGrid,
    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
}

/// How a support is read: almost-everywhere support on an `L^p` grid, or the
/// open support `{x : f(x) ≠ 0}` of a continuous function sampled on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum SupportSemantics {
    #[default]
    AlmostEverywhere,
    Open,
}

/// A subset of `{0, …, dim-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SupportMask {
    bits: FixedBitSet,
    semantics: SupportSemantics,
}

impl SupportMask {
    pub fn empty(dim: usize, semantics: SupportSemantics) -> Self {
        Self {
            bits: FixedBitSet::with_capacity(dim),
            semantics,
        }
    }

    pub fn full(dim: usize, semantics: SupportSemantics) -> Self {
        let mut bits = FixedBitSet::with_capacity(dim);
        bits.insert_range(..);
        Self { bits, semantics }
    }

    pub fn from_indices(
        dim: usize,
        indices: impl IntoIterator<Item = usize>,
        semantics: SupportSemantics,
    ) -> Result<Self, LatticeError> {
        let mut mask = Self::empty(dim, semantics);
        for index in indices {
            if index >= dim {
                return Err(LatticeError::IndexOutOfRange { index, dim });
            }
            mask.bits.insert(index);
        }
        Ok(mask)
    }

    pub(crate) fn from_bits(bits: FixedBitSet, semantics: SupportSemantics) -> Self {
        Self { bits, semantics }
    }

    pub(crate) fn bits(&self) -> &FixedBitSet {
        &self.bits
    }

    pub fn dim(&self) -> usize {
        self.bits.len()
    }

    pub fn semantics(&self) -> SupportSemantics {
        self.semantics
    }

    pub fn with_semantics(mut self, semantics: SupportSemantics) -> Self {
        self.semantics = semantics;
        self
    }

    pub fn contains(&self, index: usize) -> bool {
        self.bits.contains(index)
    }

    pub fn insert(&mut self, index: usize) {
        self.bits.insert(index);
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_clear()
    }

    /// Indices in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        self.bits.ones().collect()
    }

    fn check_comparable(&self, other: &Self) -> Result<(), LatticeError> {
        if self.dim() != other.dim() {
            return Err(LatticeError::DimensionMismatch {
                left: self.dim(),
                right: other.dim(),
            });
        }
        if self.semantics != other.semantics {
            return Err(LatticeError::SemanticsMismatch {
                left: self.semantics,
                right: other.semantics,
            });
        }
        Ok(())
    }

    /// `self ⊆ other`.
    pub fn is_subset(&self, other: &Self) -> Result<bool, LatticeError> {
        self.check_comparable(other)?;
        Ok(self.bits.is_subset(&other.bits))
    }

    pub fn union(&self, other: &Self) -> Result<Self, LatticeError> {
        self.check_comparable(other)?;
        let mut bits = self.bits.clone();
        bits.union_with(&other.bits);
        Ok(Self::from_bits(bits, self.semantics))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self, LatticeError> {
        self.check_comparable(other)?;
        let mut bits = self.bits.clone();
        bits.intersect_with(&other.bits);
        Ok(Self::from_bits(bits, self.semantics))
    }

    pub fn is_disjoint(&self, other: &Self) -> Result<bool, LatticeError> {
        self.check_comparable(other)?;
        Ok(self.bits.is_disjoint(&other.bits))
    }
}

impl fmt::Debug for SupportMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SupportMask")
            .field("dim", &self.dim())
            .field("indices", &self.indices())
            .field("semantics", &self.semantics)
            .finish()
    }
}

impl Serialize for SupportMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            dim: usize,
            indices: Vec<usize>,
            semantics: SupportSemantics,
        }
        Repr {
            dim: self.dim(),
            indices: self.indices(),
            semantics: self.semantics,
        }
        .serialize(serializer)
    }
}

/// Anything with a modulus: real or complex scalars.
pub trait Modulus: Copy {
    fn modulus(self) -> f64;
    fn is_finite_entry(self) -> bool;
}

impl Modulus for f64 {
    fn modulus(self) -> f64 {
        self.abs()
    }
    fn is_finite_entry(self) -> bool {
        self.is_finite()
    }
}

impl Modulus for Complex64 {
    fn modulus(self) -> f64 {
        self.norm()
    }
    fn is_finite_entry(self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }
}

pub fn check_finite<T: Modulus>(v: &[T]) -> Result<(), LatticeError> {
    match v.iter().position(|x| !x.is_finite_entry()) {
        Some(i) => Err(LatticeError::NonFinite(i)),
        None => Ok(()),
    }
}

pub fn check_nonnegative(v: &[f64]) -> Result<(), LatticeError> {
    check_finite(v)?;
    match v.iter().position(|&x| x < 0.0) {
        Some(index) => Err(LatticeError::NegativeEntry {
            index,
            value: v[index],
        }),
        None => Ok(()),
    }
}

fn check_same_dim(a: usize, b: usize) -> Result<(), LatticeError> {
    if a != b {
        return Err(LatticeError::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Indices with `|v_i| > tau`.
pub fn support<T: Modulus>(v: &[T], tau: f64) -> SupportMask {
    support_with(v, tau, SupportSemantics::AlmostEverywhere)
}

pub fn support_with<T: Modulus>(v: &[T], tau: f64, semantics: SupportSemantics) -> SupportMask {
    let mut mask = SupportMask::empty(v.len(), semantics);
    for (i, x) in v.iter().enumerate() {
        if x.modulus() > tau {
            mask.bits.insert(i);
        }
    }
    mask
}

/// Support with the scale-invariant threshold `1e-12 · ‖v‖_∞`.
pub fn support_default<T: Modulus>(v: &[T]) -> SupportMask {
    support(v, DEFAULT_SUPPORT_REL_TOL * sup_norm(v))
}

pub fn sup_norm<T: Modulus>(v: &[T]) -> f64 {
    v.iter().map(|x| x.modulus()).fold(0.0, f64::max)
}

/// `‖v‖_p` for `p ∈ [1, ∞]`.
pub fn p_norm(v: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return sup_norm(v);
    }
    v.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

pub fn mask_subseteq(a: &SupportMask, b: &SupportMask) -> Result<bool, LatticeError> {
    a.is_subset(b)
}

/// Entrywise lattice operations of a pair of real vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeParts {
    /// `f ∧ g`
    pub inf: Vec<f64>,
    /// `f ∨ g`
    pub sup: Vec<f64>,
    /// `f⁺`
    pub pos: Vec<f64>,
    /// `f⁻`
    pub neg: Vec<f64>,
    /// `|f|`
    pub modulus: Vec<f64>,
}

pub fn lattice_ops(f: &[f64], g: &[f64]) -> Result<LatticeParts, LatticeError> {
    check_same_dim(f.len(), g.len())?;
    check_finite(f)?;
    check_finite(g)?;
    let zip = || f.iter().zip(g);
    Ok(LatticeParts {
        inf: zip().map(|(a, b)| a.min(*b)).collect(),
        sup: zip().map(|(a, b)| a.max(*b)).collect(),
        pos: f.iter().map(|a| a.max(0.0)).collect(),
        neg: f.iter().map(|a| (-a).max(0.0)).collect(),
        modulus: f.iter().map(|a| a.abs()).collect(),
    })
}

/// Checks `lim_{t→∞} f ∧ (tg) = f` by evaluating the truncation at `t_max`.
///
/// Accepts when `‖f − f ∧ (t_max·g)‖_p ≤ 1e-12·‖f‖_p`.
pub fn ideal_inclusion_by_truncation(
    f: &[f64],
    g: &[f64],
    t_max: f64,
    p: f64,
) -> Result<bool, LatticeError> {
    check_same_dim(f.len(), g.len())?;
    check_nonnegative(f)?;
    check_nonnegative(g)?;
    let defect: Vec<f64> = f
        .iter()
        .zip(g)
        .map(|(a, b)| a - a.min(t_max * b))
        .collect();
    Ok(p_norm(&defect, p) <= DEFAULT_SUPPORT_REL_TOL * p_norm(f, p))
}

/// Ratios `‖(g − s·f)⁻‖_∞ / s` along a decreasing grid of `s` values.
pub fn little_o_ratios(f: &[f64], g: &[f64], s_grid: &[f64]) -> Result<Vec<f64>, LatticeError> {
    check_same_dim(f.len(), g.len())?;
    check_nonnegative(f)?;
    check_nonnegative(g)?;
    if s_grid.is_empty() {
        return Err(LatticeError::EmptyGrid);
    }
    if s_grid.iter().any(|&s| !(s > 0.0) || !s.is_finite())
        || s_grid.windows(2).any(|w| w[1] >= w[0])
    {
        return Err(LatticeError::InvalidGrid);
    }
    Ok(s_grid
        .iter()
        .map(|&s| {
            let neg = f
                .iter()
                .zip(g)
                .map(|(a, b)| (s * a - b).max(0.0))
                .fold(0.0, f64::max);
            neg / s
        })
        .collect())
}

/// Checks `‖(g − s·f)⁻‖ = o(s)` on a finite grid of `s` values.
///
/// Accepts when the last ratio is at most `1e-6·‖f‖_∞` and the ratios do not
/// increase over the last three grid points.
pub fn ideal_inclusion_little_o(f: &[f64], g: &[f64], s_grid: &[f64]) -> Result<bool, LatticeError> {
    let ratios = little_o_ratios(f, g, s_grid)?;
    let scale = sup_norm(f);
    let last = *ratios.last().expect("grid is non-empty");
    let tail = &ratios[ratios.len().saturating_sub(3)..];
    let monotone = tail.windows(2).all(|w| w[1] <= w[0]);
    Ok(last <= LITTLE_O_TOL * scale && monotone)
}

/// `1, 10⁻¹, …, 10⁻¹⁵`.
pub fn default_s_grid() -> Vec<f64> {
    (0..=15).map(|k| 10f64.powi(-k)).collect()
}
