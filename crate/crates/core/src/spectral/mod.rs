//! Spectra of positive operators and the conclusions drawn from them.
//!
//! Eigenvalues are computed per strongly connected component of the support
//! graph: permuting a non-negative matrix to Frobenius normal form makes it
//! block triangular, so its spectrum is the union of the spectra of the
//! diagonal blocks. Singleton blocks give exact eigenvalues, which keeps
//! permutation-like operators free of QR round-off.

mod eigen;
mod projection;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::operators::Operator;
use crate::structure::SupportGraph;

pub use projection::{
    classify_power_convergence, eigenprojection, jdlg_projection, jdlg_projection_with,
    mean_ergodic_projection, numerical_rank, EMPIRICAL_TOL, POSITIVITY_FLOOR, semisimple_eigenvalue_one, ConvergenceVerdict, EmpiricalConvergence,
    JdlgProjection, PowerConvergence,
};

/// Relative eigenvalue clustering tolerance: clusters are formed within
/// `DEFAULT_EIG_TOL·(1 + ‖T‖)`.
pub const DEFAULT_EIG_TOL: f64 = 1e-8;
/// Tolerance for `|λ| = 1` and `λ = 1` decisions.
pub const DEFAULT_UNIMODULAR_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("eigenvalue iteration did not converge; {} of {dim} eigenvalues found", partial.len())]
    SolverFailure { partial: Vec<Complex64>, dim: usize },
    #[error("operator is not power bounded (spectral radius {spr})")]
    PowerUnbounded { spr: f64 },
    #[error("epsilon {epsilon} exceeds the spectral radius {spr}")]
    EpsilonExceedsRadius { epsilon: f64, spr: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// One distinct eigenvalue with its algebraic multiplicity and the residual
/// `‖Tv − λv‖` of a unit vector found by inverse iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub value: Complex64,
    pub multiplicity: usize,
    pub residual: f64,
}

impl Serialize for SpectralPoint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("SpectralPoint", 4)?;
        s.serialize_field("re", &self.value.re)?;
        s.serialize_field("im", &self.value.im)?;
        s.serialize_field("mult", &self.multiplicity)?;
        s.serialize_field("residual", &self.residual)?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Spectrum {
    /// Distinct eigenvalues, by decreasing modulus.
    pub points: Vec<SpectralPoint>,
    pub spr: f64,
    /// Absolute clustering tolerance.
    pub tol: f64,
    /// `‖T‖_∞` of the operator the spectrum belongs to.
    pub operator_norm: f64,
    pub dim: usize,
}

impl Spectrum {
    /// Eigenvalues repeated according to multiplicity.
    pub fn values(&self) -> Vec<Complex64> {
        self.points
            .iter()
            .flat_map(|p| std::iter::repeat_n(p.value, p.multiplicity))
            .collect()
    }

    pub fn distinct(&self) -> Vec<Complex64> {
        self.points.iter().map(|p| p.value).collect()
    }

    pub fn contains(&self, lambda: Complex64, tol: f64) -> bool {
        self.points.iter().any(|p| (p.value - lambda).norm() <= tol)
    }

    pub fn multiplicity_near(&self, lambda: Complex64, tol: f64) -> usize {
        self.points
            .iter()
            .filter(|p| (p.value - lambda).norm() <= tol)
            .map(|p| p.multiplicity)
            .sum()
    }

    pub fn max_residual(&self) -> f64 {
        self.points.iter().map(|p| p.residual).fold(0.0, f64::max)
    }
}

/// All eigenvalues of `op` with multiplicities and residual certificates.
///
/// `tol` is relative: eigenvalues within `tol·(1 + ‖T‖_∞)` of each other are
/// merged into one cluster, and clusters whose imaginary part is within that
/// bound are reported as real.
pub fn eigenvalues(op: &Operator, tol: f64) -> Result<Spectrum, SpectralError> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(SpectralError::InvalidParameter(format!(
            "eigenvalue tolerance must be positive, got {tol}"
        )));
    }
    let m = op.matrix();
    let dim = m.nrows();
    let norm = op.norm_inf();
    let abs_tol = tol * (1.0 + norm);

    let raw = raw_eigenvalues(m)?;
    let mut real = Vec::new();
    let mut upper = Vec::new();
    for z in raw {
        if z.im.abs() <= abs_tol {
            real.push(Complex64::new(z.re, 0.0));
        } else if z.im > 0.0 {
            upper.push(z);
        }
    }
    let complex_m = m.map(|x| Complex64::new(x, 0.0));
    let mut points = Vec::new();
    for (value, multiplicity) in cluster(&real, abs_tol) {
        let residual = residual_certificate(&complex_m, value, norm);
        points.push(SpectralPoint {
            value,
            multiplicity,
            residual,
        });
    }
    for (value, multiplicity) in cluster(&upper, abs_tol) {
        let residual = residual_certificate(&complex_m, value, norm);
        points.push(SpectralPoint {
            value,
            multiplicity,
            residual,
        });
        points.push(SpectralPoint {
            value: value.conj(),
            multiplicity,
            residual,
        });
    }
    points.sort_by(|a, b| {
        b.value
            .norm()
            .total_cmp(&a.value.norm())
            .then(b.value.re.total_cmp(&a.value.re))
            .then(b.value.im.total_cmp(&a.value.im))
    });
    let spr = points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
    Ok(Spectrum {
        points,
        spr,
        tol: abs_tol,
        operator_norm: norm,
        dim,
    })
}

/// Eigenvalues block by block over the strongly connected components.
fn raw_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex64>, SpectralError> {
    let dim = m.nrows();
    let graph = SupportGraph::from_matrix(m, 0.0);
    let mut all = Vec::with_capacity(dim);
    let mut failed = false;
    for component in graph.components() {
        let k = component.len();
        let block = DMatrix::from_fn(k, k, |a, b| m[(component[a], component[b])]);
        match eigen::eigenvalues(&block) {
            Ok(v) => all.extend(v),
            Err(partial) => {
                failed = true;
                all.extend(partial);
            }
        }
    }
    if failed {
        return Err(SpectralError::SolverFailure { partial: all, dim });
    }
    Ok(all)
}

/// Single-linkage clustering; each cluster is represented by its mean.
fn cluster(values: &[Complex64], tol: f64) -> Vec<(Complex64, usize)> {
    let n = values.len();
    let mut label: Vec<usize> = (0..n).collect();
    fn find(label: &mut [usize], mut i: usize) -> usize {
        while label[i] != i {
            label[i] = label[label[i]];
            i = label[i];
        }
        i
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if (values[i] - values[j]).norm() <= tol {
                let (a, b) = (find(&mut label, i), find(&mut label, j));
                if a != b {
                    label[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
    for i in 0..n {
        let root = find(&mut label, i);
        match groups.iter_mut().find(|g| g.0 == root) {
            Some(g) => {
                g.1 += values[i];
                g.2 += 1;
            }
            None => groups.push((root, values[i], 1)),
        }
    }
    groups
        .into_iter()
        .map(|(_, sum, count)| (sum / count as f64, count))
        .collect()
}

/// `‖Tv − λv‖₂` for a unit vector `v` obtained by inverse iteration with a
/// slightly perturbed shift.
fn residual_certificate(t: &DMatrix<Complex64>, lambda: Complex64, norm: f64) -> f64 {
    let n = t.nrows();
    let mut best = f64::INFINITY;
    for rel in [1e-10, 1e-7] {
        let shift = lambda + Complex64::new(rel * (1.0 + norm), 0.0);
        let mut a = t.clone();
        for i in 0..n {
            a[(i, i)] -= shift;
        }
        let lu = a.lu();
        let mut v = DVector::from_fn(n, |i, _| {
            Complex64::new(1.0 + ((i * 7919) % 13) as f64 / 13.0, 0.0)
        });
        v /= Complex64::new(v.norm(), 0.0);
        for _ in 0..3 {
            match lu.solve(&v) {
                Some(x) => {
                    let len = x.norm();
                    if !(len.is_finite() && len > 0.0) {
                        break;
                    }
                    v = x / Complex64::new(len, 0.0);
                }
                None => break,
            }
        }
        let r = (t * &v - &v * lambda).norm();
        best = best.min(r);
        if best <= 1e-12 * (1.0 + norm) {
            break;
        }
    }
    best
}

/// Power boundedness read off the Frobenius normal form.
///
/// If every class (strongly connected block) has spectral radius below
/// `1 − tol` the powers decay; if some class exceeds `1 + tol` they blow up.
/// Otherwise the powers of a non-negative matrix stay bounded exactly when no
/// path in the support graph joins two distinct classes of spectral radius 1,
/// since such a chain of length `k` produces a Jordan block of size `k`.
pub fn classes_power_bounded(m: &DMatrix<f64>, tol: f64) -> bool {
    let graph = SupportGraph::from_matrix(m, 0.0);
    let n = m.nrows();
    let mut class_of = vec![usize::MAX; n];
    let mut basic = Vec::new();
    for (c, component) in graph.components().into_iter().enumerate() {
        let k = component.len();
        let block = DMatrix::from_fn(k, k, |a, b| m[(component[a], component[b])]);
        let Ok(values) = eigen::eigenvalues(&block) else {
            return false;
        };
        let radius = values.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if radius > 1.0 + tol {
            return false;
        }
        for &i in &component {
            class_of[i] = c;
        }
        if radius >= 1.0 - tol {
            basic.push((c, component));
        }
    }
    let is_basic = |c: usize| basic.iter().any(|(b, _)| *b == c);
    for (c, component) in &basic {
        let mut reached = fixedbitset::FixedBitSet::with_capacity(n);
        let mut frontier = reached.clone();
        for &i in component {
            frontier.insert(i);
        }
        while !frontier.is_clear() {
            reached.union_with(&frontier);
            let mut next = graph.image(&frontier);
            next.difference_with(&reached);
            frontier = next;
        }
        if reached.ones().any(|i| class_of[i] != *c && is_basic(class_of[i])) {
            return false;
        }
    }
    true
}

/// Eigenvalues with `||λ| − 1| ≤ tol`.
pub fn unimodular_point_spectrum(spectrum: &Spectrum, tol: f64) -> Vec<Complex64> {
    spectrum
        .points
        .iter()
        .map(|p| p.value)
        .filter(|z| (z.norm() - 1.0).abs() <= tol)
        .collect()
}

/// Unimodular eigenvalues farther than `tol` from 1.
pub fn nontrivial_unimodular(spectrum: &Spectrum, tol: f64) -> Vec<Complex64> {
    unimodular_point_spectrum(spectrum, tol)
        .into_iter()
        .filter(|z| (z - 1.0).norm() > tol)
        .collect()
}

/// Eigenvalues with `|λ| ≥ spr − tol`.
pub fn peripheral_spectrum(spectrum: &Spectrum, tol: f64) -> Vec<Complex64> {
    spectrum
        .points
        .iter()
        .map(|p| p.value)
        .filter(|z| z.norm() >= spectrum.spr - tol)
        .collect()
}

/// The peripheral spectrum equals `{spr}`: no eigenvalue of modulus `spr`
/// (up to `tol·max(1, spr)`) other than `spr` itself.
pub fn peripheral_is_radius(spectrum: &Spectrum, tol: f64) -> bool {
    let t = tol * spectrum.spr.max(1.0);
    let spr = Complex64::new(spectrum.spr, 0.0);
    spectrum.contains(spr, t)
        && spectrum
            .points
            .iter()
            .all(|p| (p.value.norm() - spectrum.spr).abs() > t || (p.value - spr).norm() <= t)
}

/// Whether the finite set is closed under `r·e^{iθ} ↦ r·e^{inθ}` for
/// `|n| ≤ |P| + 1`.
pub fn is_cyclic(set: &[Complex64], tol: f64) -> bool {
    let bound = set.len() as i64 + 1;
    set.iter().all(|z| {
        let r = z.norm();
        let theta = z.arg();
        (-bound..=bound).all(|n| {
            let w = Complex64::from_polar(r, theta * n as f64);
            set.iter().any(|s| (s - w).norm() <= tol)
        })
    })
}

/// Every eigenvalue lies in the closed disk of radius `spr − ε` centred at `ε`.
pub fn disk_inclusion(spectrum: &Spectrum, epsilon: f64, tol: f64) -> Result<bool, SpectralError> {
    if epsilon > spectrum.spr + tol {
        return Err(SpectralError::EpsilonExceedsRadius {
            epsilon,
            spr: spectrum.spr,
        });
    }
    if epsilon < 0.0 {
        return Err(SpectralError::InvalidParameter(format!(
            "epsilon must be non-negative, got {epsilon}"
        )));
    }
    let centre = Complex64::new(epsilon, 0.0);
    let radius = spectrum.spr - epsilon;
    Ok(spectrum
        .points
        .iter()
        .all(|p| (p.value - centre).norm() <= radius + tol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{cyclic_permutation, SpaceSemantics};
    use std::f64::consts::PI;

    fn op(rows: &[&[f64]]) -> Operator {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Operator::from_dense(&rows, SpaceSemantics::sequence(2.0, rows.len())).unwrap()
    }

    fn spectrum_of(values: &[(f64, f64)]) -> Spectrum {
        let points: Vec<SpectralPoint> = values
            .iter()
            .map(|&(re, im)| SpectralPoint {
                value: Complex64::new(re, im),
                multiplicity: 1,
                residual: 0.0,
            })
            .collect();
        let spr = points.iter().map(|p| p.value.norm()).fold(0.0, f64::max);
        Spectrum {
            dim: points.len(),
            points,
            spr,
            tol: 1e-8,
            operator_norm: spr,
        }
    }

    #[test]
    fn two_cycle_spectrum() {
        let s = eigenvalues(&op(&[&[0.0, 1.0], &[1.0, 0.0]]), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(s.distinct(), vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert!(s.points.iter().all(|p| p.multiplicity == 1 && p.residual < 1e-12));
        assert_eq!(s.spr, 1.0);
    }

    #[test]
    fn three_cycle_is_roots_of_unity() {
        let s = eigenvalues(&cyclic_permutation(3), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(s.points.len(), 3);
        for k in 0..3 {
            let w = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 3.0);
            assert!(s.contains(w, 1e-12), "{w}");
        }
    }

    #[test]
    fn identity_has_one_cluster() {
        let s = eigenvalues(&op(&[&[1.0, 0.0], &[0.0, 1.0]]), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].multiplicity, 2);
    }

    #[test]
    fn conjugate_pairs_share_multiplicity() {
        let s = eigenvalues(&cyclic_permutation(8), DEFAULT_EIG_TOL).unwrap();
        let total: usize = s.points.iter().map(|p| p.multiplicity).sum();
        assert_eq!(total, 8);
        for p in &s.points {
            assert!(s.contains(p.value.conj(), 1e-10));
        }
    }

    #[test]
    fn unimodular_examples() {
        let s = spectrum_of(&[(0.5, 0.0), (1.0, 0.0)]);
        assert_eq!(unimodular_point_spectrum(&s, 1e-6), vec![Complex64::new(1.0, 0.0)]);
        let s = eigenvalues(&op(&[&[0.0, 1.0], &[1.0, 0.0]]), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(unimodular_point_spectrum(&s, 1e-6).len(), 2);
        assert_eq!(nontrivial_unimodular(&s, 1e-6), vec![Complex64::new(-1.0, 0.0)]);
    }

    #[test]
    fn peripheral_examples() {
        let s = spectrum_of(&[(2.0, 0.0), (-2.0, 0.0), (1.0, 0.0)]);
        let per = peripheral_spectrum(&s, 1e-9);
        assert_eq!(per, vec![Complex64::new(2.0, 0.0), Complex64::new(-2.0, 0.0)]);
        assert!(!peripheral_is_radius(&s, 1e-6));

        let nil = eigenvalues(&op(&[&[0.0, 1.0], &[0.0, 0.0]]), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(peripheral_spectrum(&nil, 1e-9), vec![Complex64::new(0.0, 0.0)]);

        let s = eigenvalues(&cyclic_permutation(5), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(peripheral_spectrum(&s, 1e-9).len(), 5);
    }

    #[test]
    fn cyclic_sets() {
        let one = Complex64::new(1.0, 0.0);
        assert!(is_cyclic(&[one, -one], 1e-9));
        assert!(!is_cyclic(&[Complex64::new(0.0, 2.0)], 1e-9));
        let roots: Vec<Complex64> = (0..6)
            .map(|k| Complex64::from_polar(0.7, 2.0 * PI * k as f64 / 6.0))
            .collect();
        assert!(is_cyclic(&roots, 1e-9));
        assert!(!is_cyclic(&roots[..5], 1e-9));
    }

    #[test]
    fn disk_examples() {
        let id = eigenvalues(&op(&[&[1.0, 0.0], &[0.0, 1.0]]), DEFAULT_EIG_TOL).unwrap();
        assert!(disk_inclusion(&id, 1.0, 1e-8).unwrap());
        let avg = eigenvalues(&op(&[&[0.5, 0.5], &[0.5, 0.5]]), DEFAULT_EIG_TOL).unwrap();
        assert!(disk_inclusion(&avg, 0.5, 1e-8).unwrap());
        let cyc = eigenvalues(&op(&[&[0.0, 1.0], &[1.0, 0.0]]), DEFAULT_EIG_TOL).unwrap();
        assert!(!disk_inclusion(&cyc, 0.1, 1e-8).unwrap());
        assert!(matches!(
            disk_inclusion(&cyc, 1.5, 1e-8),
            Err(SpectralError::EpsilonExceedsRadius { .. })
        ));
    }

    #[test]
    fn reducible_jordan_pair_is_exact() {
        // Two identical 1x1 blocks coupled above the diagonal.
        let s = eigenvalues(&op(&[&[0.5, 1.0], &[0.0, 0.5]]), DEFAULT_EIG_TOL).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].value, Complex64::new(0.5, 0.0));
        assert_eq!(s.points[0].multiplicity, 2);
        assert!(s.points[0].residual < 1e-8);
    }

    #[test]
    fn class_power_boundedness() {
        let id = DMatrix::<f64>::identity(3, 3);
        assert!(classes_power_bounded(&id, 1e-6));
        let jordan = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        assert!(!classes_power_bounded(&jordan, 1e-6));
        // the path passes through a class of radius ½, still a chain of length 2
        let chain = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 0.0, 0.0, 0.5, 1.0, 0.0, 0.0, 1.0]);
        assert!(!classes_power_bounded(&chain, 1e-6));
        let transient = DMatrix::from_row_slice(2, 2, &[0.5, 0.5, 0.0, 1.0]);
        assert!(classes_power_bounded(&transient, 1e-6));
        assert!(!classes_power_bounded(&(id * 1.01), 1e-6));
    }

    #[test]
    fn rejects_bad_tolerance() {
        let t = op(&[&[1.0]]);
        assert!(eigenvalues(&t, 0.0).is_err());
    }
}
