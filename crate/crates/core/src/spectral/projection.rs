//! Spectral projections, mean ergodic limits and power convergence.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{eigenvalues, SpectralError, Spectrum, DEFAULT_EIG_TOL};
use crate::operators::{power_sum, Operator};

/// Threshold on `‖Tᵏ⁺¹ − Tᵏ‖_∞` for the empirical convergence test.
pub const EMPIRICAL_TOL: f64 = 1e-6;
/// Entrywise floor below which a projection is flagged as not positive.
pub const POSITIVITY_FLOOR: f64 = -1e-8;

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn induced_inf(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Orthonormal basis of an approximate `k`-dimensional null space of `a`,
/// by inverse subspace iteration on `a − δ` with `δ` tiny relative to `scale`.
fn null_space(a: &DMatrix<Complex64>, k: usize, scale: f64) -> Option<DMatrix<Complex64>> {
    let n = a.nrows();
    let delta = Complex64::new(1e-10 * (1.0 + scale), 0.0);
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= delta;
    }
    let lu = shifted.lu();
    let mut x = DMatrix::from_fn(n, k, |i, j| {
        let h = ((i * 7919 + j * 104_729) % 1009) as f64 / 1009.0;
        Complex64::new(1.0 + h, 0.5 - h)
    });
    for _ in 0..NULL_SPACE_SWEEPS {
        x = lu.solve(&x)?;
        if x.iter().any(|z| !z.is_finite()) {
            return None;
        }
        x = x.qr().q();
    }
    Some(x)
}

const NULL_SPACE_SWEEPS: usize = 6;

/// Spectral projection onto the eigenspace of a semisimple eigenvalue of
/// multiplicity `mult`: `V (W*V)⁻¹ W*` with `V`, `W` bases of the right and
/// left null spaces of `T − λ`.
fn semisimple_projection(
    m: &DMatrix<f64>,
    lambda: Complex64,
    mult: usize,
) -> Option<DMatrix<Complex64>> {
    let n = m.nrows();
    let scale = (0..n).map(|i| m.row(i).sum()).fold(0.0, f64::max);
    let mut a = m.map(|x| Complex64::new(x, 0.0));
    for i in 0..n {
        a[(i, i)] -= lambda;
    }
    let right = null_space(&a, mult.min(n), scale)?;
    let left = null_space(&a.adjoint(), mult.min(n), scale)?;
    let gram = left.adjoint() * &right;
    let inv = gram.try_inverse()?;
    Some(right * inv * left.adjoint())
}

/// Spectral projection for the eigenvalue of `spectrum` nearest `lambda`
/// (within the spectrum's clustering tolerance); zero if there is none.
pub fn eigenprojection(
    op: &Operator,
    spectrum: &Spectrum,
    lambda: Complex64,
) -> Result<DMatrix<Complex64>, SpectralError> {
    let n = op.dim();
    let Some(point) = spectrum
        .points
        .iter()
        .filter(|p| (p.value - lambda).norm() <= spectrum.tol)
        .min_by(|a, b| (a.value - lambda).norm().total_cmp(&(b.value - lambda).norm()))
    else {
        return Ok(DMatrix::zeros(n, n));
    };
    semisimple_projection(op.matrix(), point.value, point.multiplicity).ok_or_else(|| {
        SpectralError::InvalidParameter(format!(
            "eigenvalue {} is not semisimple; no spectral projection from null spaces",
            point.value
        ))
    })
}

/// Projection onto the span of the eigenvectors for unimodular eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct JdlgProjection {
    pub projection: DMatrix<f64>,
    /// Sum of the multiplicities of the eigenvalues with `|λ| ≥ 1 − tol`.
    pub reversible_dim: usize,
    /// `max |(P² − P)_ij|`.
    pub idempotence_residual: f64,
    /// `max |(PT − TP)_ij|`.
    pub commutation_residual: f64,
    pub min_entry: f64,
    /// `min_entry ≥ POSITIVITY_FLOOR`.
    pub positive: bool,
}

pub fn jdlg_projection(op: &Operator, tol: f64) -> Result<JdlgProjection, SpectralError> {
    let spectrum = eigenvalues(op, DEFAULT_EIG_TOL)?;
    jdlg_projection_with(op, &spectrum, tol)
}

/// As [`jdlg_projection`], reusing an already computed spectrum.
pub fn jdlg_projection_with(
    op: &Operator,
    spectrum: &Spectrum,
    tol: f64,
) -> Result<JdlgProjection, SpectralError> {
    let horizon = (2 * op.dim()).max(32);
    if spectrum.spr > 1.0 + tol || !op.power_bound_estimate(horizon).bounded_guess {
        return Err(SpectralError::PowerUnbounded { spr: spectrum.spr });
    }
    let n = op.dim();
    let m = op.matrix();
    let mut sum = DMatrix::<Complex64>::zeros(n, n);
    let mut reversible_dim = 0;
    for point in spectrum.points.iter().filter(|p| p.value.norm() >= 1.0 - tol) {
        let p = semisimple_projection(m, point.value, point.multiplicity).ok_or(
            SpectralError::PowerUnbounded { spr: spectrum.spr },
        )?;
        sum += p;
        reversible_dim += point.multiplicity;
    }
    let projection = sum.map(|z| z.re);
    let idempotence_residual = max_abs(&(&projection * &projection - &projection));
    let commutation_residual = max_abs(&(&projection * m - m * &projection));
    let min_entry = projection.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(JdlgProjection {
        idempotence_residual,
        commutation_residual,
        min_entry,
        positive: min_entry >= POSITIVITY_FLOOR,
        projection,
        reversible_dim,
    })
}

fn cesaro(m: &DMatrix<f64>, n: u64) -> DMatrix<f64> {
    power_sum(m, n).0 / n as f64
}

/// Limit of the Cesàro means `(1/n) Σ_{k<n} Tᵏ`, if it is reached within
/// `k_max` terms.
///
/// The means converge like `1/n`, so they are accelerated by one step of
/// Richardson extrapolation, `R(n) = 2C(n) − C(n/2)`, which cancels the `1/n`
/// term. With `n` the largest power of two not exceeding `k_max`, the result
/// `R(n)` is returned when it agrees with `R(n/2)` entrywise within `tol`.
/// For `k_max < 4` the plain means `C(n)` and `C(n/2)` are compared.
pub fn mean_ergodic_projection(op: &Operator, k_max: u64, tol: f64) -> Option<Operator> {
    if k_max < 2 {
        return None;
    }
    let m = op.matrix();
    let n = 1u64 << (63 - k_max.leading_zeros());
    let (candidate, previous) = if n >= 4 {
        let (c1, c2, c4) = (cesaro(m, n / 4), cesaro(m, n / 2), cesaro(m, n));
        (&c4 * 2.0 - &c2, &c2 * 2.0 - c1)
    } else {
        (cesaro(m, n), cesaro(m, n / 2))
    };
    if max_abs(&(&candidate - &previous)) > tol {
        return None;
    }
    let label = format!("mean_ergodic({})", op.label());
    Some(Operator::from_parts(candidate, op.space().clone(), label))
}

/// Number of singular values above `n·eps·‖M‖_∞`.
pub fn numerical_rank(m: &DMatrix<f64>) -> usize {
    let n = m.nrows();
    let threshold = n as f64 * f64::EPSILON * induced_inf(m);
    m.singular_values().iter().filter(|&&s| s > threshold).count()
}

/// `rank(T − I) = rank((T − I)²)`: the eigenvalue 1, if present, has no
/// Jordan block of size ≥ 2.
pub fn semisimple_eigenvalue_one(op: &Operator) -> bool {
    let n = op.dim();
    let a = op.matrix() - DMatrix::<f64>::identity(n, n);
    let a2 = &a * &a;
    numerical_rank(&a) == numerical_rank(&a2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PowerConvergence {
    ConvergesStrongly,
    DivergesOrOscillates,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalConvergence {
    /// First `k` on the doubling schedule with `‖Tᵏ⁺¹ − Tᵏ‖_∞ ≤ EMPIRICAL_TOL`.
    pub k_star: Option<u64>,
    /// Residual at `k_star`, or at the last `k` tried.
    pub final_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceVerdict {
    pub theoretical: PowerConvergence,
    pub empirical: EmpiricalConvergence,
    /// `Tᵏ` at `k = k_star`.
    #[serde(skip)]
    pub limit: Option<Operator>,
}

/// Decides whether `Tᵏ` converges from the spectrum and confirms it by
/// iterating `k = 1, 2, 4, … ≤ k_max`.
pub fn classify_power_convergence(
    spectrum: &Spectrum,
    op: &Operator,
    k_max: u64,
    tol: f64,
) -> ConvergenceVerdict {
    let one = Complex64::new(1.0, 0.0);
    let outside = spectrum.points.iter().any(|p| p.value.norm() > 1.0 + tol);
    let rotating = spectrum
        .points
        .iter()
        .any(|p| (p.value.norm() - 1.0).abs() <= tol && (p.value - one).norm() > tol);
    let theoretical = if outside || rotating {
        PowerConvergence::DivergesOrOscillates
    } else if !spectrum.contains(one, tol) || semisimple_eigenvalue_one(op) {
        PowerConvergence::ConvergesStrongly
    } else {
        PowerConvergence::Inconclusive
    };

    let m = op.matrix();
    let mut power = m.clone();
    let mut k = 1u64;
    let mut empirical = EmpiricalConvergence {
        k_star: None,
        final_residual: f64::INFINITY,
    };
    let mut limit = None;
    while k <= k_max.max(1) {
        let next = &power * m;
        let residual = induced_inf(&(&next - &power));
        empirical.final_residual = residual;
        if residual <= EMPIRICAL_TOL {
            empirical.k_star = Some(k);
            limit = Some(Operator::from_parts(
                power,
                op.space().clone(),
                format!("{}^{k}", op.label()),
            ));
            break;
        }
        if !residual.is_finite() {
            break;
        }
        power = &power * &power;
        k *= 2;
    }
    ConvergenceVerdict {
        theoretical,
        empirical,
        limit,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{cyclic_permutation, doubly_stochastic_strip, SpaceSemantics};

    fn op(rows: &[&[f64]]) -> Operator {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Operator::from_dense(&rows, SpaceSemantics::sequence(2.0, rows.len())).unwrap()
    }

    fn close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn jdlg_of_two_cycle_is_identity() {
        let j = jdlg_projection(&op(&[&[0.0, 1.0], &[1.0, 0.0]]), 1e-6).unwrap();
        assert!(close(&j.projection, &DMatrix::identity(2, 2), 1e-12));
        assert_eq!(j.reversible_dim, 2);
        assert!(j.positive);
    }

    #[test]
    fn jdlg_of_substochastic_is_zero() {
        let j = jdlg_projection(&op(&[&[0.3, 0.2], &[0.1, 0.4]]), 1e-6).unwrap();
        assert_eq!(j.projection, DMatrix::zeros(2, 2));
        assert_eq!(j.reversible_dim, 0);
    }

    #[test]
    fn jdlg_of_diagonal() {
        let j = jdlg_projection(&op(&[&[1.0, 0.0], &[0.0, 0.5]]), 1e-6).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(close(&j.projection, &expected, 1e-12));
        assert!(j.idempotence_residual < 1e-12 && j.commutation_residual < 1e-12);
    }

    #[test]
    fn jdlg_of_three_cycle_is_identity() {
        let j = jdlg_projection(&cyclic_permutation(3), 1e-6).unwrap();
        assert!(close(&j.projection, &DMatrix::identity(3, 3), 1e-10));
    }

    #[test]
    fn jdlg_rejects_growth() {
        let err = jdlg_projection(&op(&[&[2.0, 0.0], &[0.0, 1.0]]), 1e-6).unwrap_err();
        assert!(matches!(err, SpectralError::PowerUnbounded { .. }));
        let jordan = jdlg_projection(&op(&[&[1.0, 1.0], &[0.0, 1.0]]), 1e-6).unwrap_err();
        assert!(matches!(jordan, SpectralError::PowerUnbounded { .. }));
    }

    #[test]
    fn mean_ergodic_examples() {
        let id = op(&[&[1.0, 0.0], &[0.0, 1.0]]);
        for k in [2, 3, 10, 5000] {
            let p = mean_ergodic_projection(&id, k, 1e-6).unwrap();
            assert!(close(p.matrix(), &DMatrix::identity(2, 2), 1e-15));
        }
        let cyc = op(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let p = mean_ergodic_projection(&cyc, 5000, 1e-6).unwrap();
        assert!(close(p.matrix(), &DMatrix::from_element(2, 2, 0.5), 1e-12));
    }

    #[test]
    fn mean_ergodic_matches_eigenprojection_on_strip() {
        let t = doubly_stochastic_strip(40, 0.2).unwrap();
        let p = mean_ergodic_projection(&t, 5000, 1e-6).unwrap();
        let expected = DMatrix::from_element(40, 40, 1.0 / 40.0);
        assert!(close(p.matrix(), &expected, 1e-8));
        let s = eigenvalues(&t, DEFAULT_EIG_TOL).unwrap();
        let e = eigenprojection(&t, &s, Complex64::new(1.0, 0.0)).unwrap();
        let diff = max_abs(&(p.matrix() - e.map(|z| z.re)));
        assert!(diff < 1e-8, "{diff}");
    }

    #[test]
    fn eigenprojection_absent_value_is_zero() {
        let t = op(&[&[0.5, 0.0], &[0.0, 0.25]]);
        let s = eigenvalues(&t, DEFAULT_EIG_TOL).unwrap();
        let e = eigenprojection(&t, &s, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(e, DMatrix::zeros(2, 2));
    }

    #[test]
    fn semisimplicity_of_one() {
        assert!(semisimple_eigenvalue_one(&op(&[&[1.0, 0.0], &[0.0, 1.0]])));
        assert!(semisimple_eigenvalue_one(&op(&[&[0.5, 0.5], &[0.2, 0.8]])));
        assert!(!semisimple_eigenvalue_one(&op(&[&[1.0, 1.0], &[0.0, 1.0]])));
    }

    #[test]
    fn classify_examples() {
        let irreducible = op(&[&[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        let s = eigenvalues(&irreducible, DEFAULT_EIG_TOL).unwrap();
        let v = classify_power_convergence(&s, &irreducible, 5000, 1e-6);
        assert_eq!(v.theoretical, PowerConvergence::ConvergesStrongly);
        assert!(v.empirical.k_star.is_some());
        assert!(v.empirical.final_residual <= EMPIRICAL_TOL);
        assert!(v.limit.is_some());

        for d in 2..6 {
            let c = cyclic_permutation(d);
            let s = eigenvalues(&c, DEFAULT_EIG_TOL).unwrap();
            let v = classify_power_convergence(&s, &c, 1000, 1e-6);
            assert_eq!(v.theoretical, PowerConvergence::DivergesOrOscillates);
            assert!(v.empirical.k_star.is_none());
            assert!(v.limit.is_none());
        }

        let jordan = op(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let s = eigenvalues(&jordan, DEFAULT_EIG_TOL).unwrap();
        let v = classify_power_convergence(&s, &jordan, 100, 1e-6);
        assert_eq!(v.theoretical, PowerConvergence::Inconclusive);
    }
}
