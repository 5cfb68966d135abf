//! Theorem engines: each binds a list of hypothesis checks to a predicted
//! spectral conclusion and compares it with the computed spectrum.
//!
//! A verdict is *consistent* unless every hypothesis passed and the predicted
//! conclusion failed. An inconsistent verdict is either a tolerance problem
//! in the numerics or a counterexample, and callers treat it as fatal.

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::lattice::{SupportMask, SupportSemantics};
use crate::operators::{Operator, PowerBound};
use crate::spectral::{
    self, classify_power_convergence, eigenprojection, mean_ergodic_projection, ConvergenceVerdict,
    PowerConvergence, SpectralError, SpectralPoint, Spectrum, DEFAULT_EIG_TOL,
    DEFAULT_UNIMODULAR_TOL,
};
use crate::structure::{self, DominationResult, StructureError};

/// Relative floor for "strictly positive" entries of a fixed vector.
const POSITIVE_FIXED_REL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerdictError {
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Structure(#[from] StructureError),
    #[error("invalid option: {0}")]
    InvalidOption(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremId {
    MainEverywhere,
    MainIrreducible,
    LatticeHomomorphism,
    DominatesIdentity,
    PowerDomination,
    ConvergenceEverywhere,
    ConvergenceIrreducible,
    #[serde(rename = "CesaroABLV")]
    CesaroAblv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvergenceVariant {
    Everywhere,
    Irreducible,
    CesaroAblv,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    fn new(name: &str, passed: bool) -> Self {
        Self {
            name: name.to_string(),
            passed,
            witness: None,
            note: None,
        }
    }

    fn witness(mut self, witness: Value) -> Self {
        self.witness = Some(witness);
        self
    }

    fn note(mut self, note: &str) -> Self {
        self.note = Some(note.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReport {
    pub theorem_id: TheoremId,
    pub checks: Vec<Check>,
    pub all_passed: bool,
}

impl HypothesisReport {
    fn new(theorem_id: TheoremId, checks: Vec<Check>) -> Self {
        let all_passed = checks.iter().all(|c| c.passed);
        Self {
            theorem_id,
            checks,
            all_passed,
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// The conclusion a theorem predicts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Conclusion {
    /// `specPnt(T) ∩ 𝕋 ⊆ {1}`.
    UnimodularSubsetOfOne,
    /// `specPnt(T) ⊆ [0, ∞)`.
    NonnegativeRealPointSpectrum,
    /// `spec_per(T) = {spr(T)}`.
    PeripheralIsRadius,
    /// `spec_per(T) = {spr(T)}` and `spec(T)` lies in the disk of radius
    /// `spr − ε` centred at `ε`.
    PeripheralIsRadiusInDisk { epsilon: f64 },
    ConvergesStrongly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Observed {
    pub holds: bool,
    pub detail: String,
    /// Eigenvalues relevant to the conclusion.
    pub values: Vec<ComplexValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TheoremVerdict {
    #[serde(flatten)]
    pub report: HypothesisReport,
    pub predicted: Conclusion,
    pub observed: Observed,
    pub consistent: bool,
}

impl TheoremVerdict {
    fn new(report: HypothesisReport, predicted: Conclusion, observed: Observed) -> Self {
        let consistent = !report.all_passed || observed.holds;
        Self {
            report,
            predicted,
            observed,
            consistent,
        }
    }
}

/// Knobs shared by all engines.
#[derive(Debug, Clone, PartialEq)]
pub struct EngineOptions {
    /// Expansion and power-bound horizon; `None` means `2·dim`.
    pub horizon: Option<usize>,
    /// Random non-negative vectors used to cross-check expansion.
    pub samples: usize,
    pub seed: u64,
    /// Entries `≤ tau` count as zero in support computations.
    pub tau: f64,
    /// Tolerance for `|λ| = 1`, `λ = 1` and `|λ| = spr` decisions.
    pub tol: f64,
    /// Relative eigenvalue clustering tolerance.
    pub eig_tol: f64,
    pub k_max: u64,
    /// Power `n` in `Tⁿ ≥ εTⁿ⁻¹` for the power-domination engines.
    pub power_n: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self {
            horizon: None,
            samples: 64,
            seed: 0,
            tau: 0.0,
            tol: DEFAULT_UNIMODULAR_TOL,
            eig_tol: DEFAULT_EIG_TOL,
            k_max: 5000,
            power_n: 2,
        }
    }
}

impl EngineOptions {
    pub fn horizon_for(&self, dim: usize) -> usize {
        self.horizon.unwrap_or(2 * dim).max(1)
    }

    fn validate(&self) -> Result<(), VerdictError> {
        if !(self.tol > 0.0) || !(self.eig_tol > 0.0) || !(self.tau >= 0.0) {
            return Err(VerdictError::InvalidOption(
                "tolerances must be positive and tau non-negative".into(),
            ));
        }
        if self.power_n == 0 {
            return Err(VerdictError::InvalidOption("power_n must be >= 1".into()));
        }
        Ok(())
    }
}

fn values(zs: &[Complex64]) -> Vec<ComplexValue> {
    zs.iter().copied().map(ComplexValue::from).collect()
}

fn positivity_check(op: &Operator) -> Check {
    let min = op.matrix().iter().copied().fold(f64::INFINITY, f64::min);
    Check::new("positivity", min >= 0.0).witness(json!({ "min_entry": min }))
}

fn power_bound_check(op: &Operator, spectrum: &Spectrum, opts: &EngineOptions) -> (Check, PowerBound) {
    let pb = op.power_bound_estimate(opts.horizon_for(op.dim()));
    let passed = pb.bounded_guess && spectrum.spr <= 1.0 + opts.tol;
    let check = Check::new("power_bounded", passed).witness(json!({
        "sup_norm": pb.sup_norm,
        "bounded_guess": pb.bounded_guess,
        "spr": spectrum.spr,
        "horizon": pb.horizon,
    }));
    (check, pb)
}

fn expansion_check(op: &Operator, opts: &EngineOptions) -> Check {
    let r = structure::expands_support_everywhere(
        op,
        opts.horizon_for(op.dim()),
        opts.samples,
        opts.seed,
        opts.tau,
    );
    let max_n = r.per_basis_vector.iter().filter_map(|b| b.first_n).max();
    Check::new("expands_support_everywhere", r.all_satisfied).witness(json!({
        "failing_basis_indices": r.failing_basis_indices(),
        "failed_samples": r.failed_samples.len(),
        "max_first_n": max_n,
        "horizon": r.horizon,
    }))
}

fn finite_dimension_check(name: &str) -> Check {
    Check::new(name, true).note("satisfied by finite dimension")
}

fn observe_unimodular(spectrum: &Spectrum, tol: f64) -> Observed {
    let unimodular = spectral::unimodular_point_spectrum(spectrum, tol);
    let offending = spectral::nontrivial_unimodular(spectrum, tol);
    Observed {
        holds: offending.is_empty(),
        detail: if offending.is_empty() {
            "no unimodular eigenvalue other than 1".into()
        } else {
            format!("{} unimodular eigenvalue(s) other than 1", offending.len())
        },
        values: values(&unimodular),
    }
}

fn observe_nonnegative_real(spectrum: &Spectrum, tol: f64) -> Observed {
    let offending: Vec<Complex64> = spectrum
        .distinct()
        .into_iter()
        .filter(|z| z.im.abs() > tol || z.re < -tol)
        .collect();
    Observed {
        holds: offending.is_empty(),
        detail: if offending.is_empty() {
            "all eigenvalues are non-negative reals".into()
        } else {
            format!("{} eigenvalue(s) off [0, ∞)", offending.len())
        },
        values: values(&offending),
    }
}

fn observe_peripheral(spectrum: &Spectrum, tol: f64) -> Observed {
    let peripheral = spectral::peripheral_spectrum(spectrum, tol * spectrum.spr.max(1.0));
    let holds = spectral::peripheral_is_radius(spectrum, tol);
    Observed {
        holds,
        detail: if holds {
            format!("peripheral spectrum is {{{}}}", spectrum.spr)
        } else {
            format!("peripheral spectrum has {} points", peripheral.len())
        },
        values: values(&peripheral),
    }
}

/// Positive, power bounded, and every support expands under some power:
/// no unimodular eigenvalue other than 1.
pub fn engine_main_everywhere(
    op: &Operator,
    spectrum: &Spectrum,
    opts: &EngineOptions,
) -> TheoremVerdict {
    let (power, _) = power_bound_check(op, spectrum, opts);
    let mut checks = vec![positivity_check(op), power];
    if op.space().support_semantics() == SupportSemantics::Open {
        checks.push(finite_dimension_check("weakly_almost_periodic"));
    }
    checks.push(expansion_check(op, opts));
    TheoremVerdict::new(
        HypothesisReport::new(TheoremId::MainEverywhere, checks),
        Conclusion::UnimodularSubsetOfOne,
        observe_unimodular(spectrum, opts.tol),
    )
}

fn band_check(op: &Operator, band: Option<&SupportMask>, tau: f64) -> Check {
    match band {
        None => Check::new("expands_support_on_band", false).note("band is empty"),
        Some(band) => {
            let passed = structure::expands_support_on_band(op, band, tau).unwrap_or(false);
            Check::new("expands_support_on_band", passed)
                .witness(json!({ "band": band.indices() }))
        }
    }
}

fn irreducible_check(op: &Operator, tau: f64) -> Check {
    let graph = structure::support_graph(op, tau);
    Check::new("irreducible", graph.is_strongly_connected())
        .witness(json!({ "components": graph.components().len() }))
}

/// Power bounded, irreducible, and supports in the band `S` never shrink:
/// no unimodular eigenvalue other than 1.
pub fn engine_main_irreducible(
    op: &Operator,
    spectrum: &Spectrum,
    band: &SupportMask,
    opts: &EngineOptions,
) -> Result<TheoremVerdict, VerdictError> {
    if band.is_empty() {
        return Err(StructureError::EmptyBand.into());
    }
    if band.dim() != op.dim() {
        return Err(StructureError::BandDimension {
            band: band.dim(),
            dim: op.dim(),
        }
        .into());
    }
    Ok(main_irreducible(op, spectrum, Some(band), opts))
}

fn main_irreducible(
    op: &Operator,
    spectrum: &Spectrum,
    band: Option<&SupportMask>,
    opts: &EngineOptions,
) -> TheoremVerdict {
    let (power, _) = power_bound_check(op, spectrum, opts);
    let checks = vec![
        positivity_check(op),
        power,
        irreducible_check(op, opts.tau),
        band_check(op, band, opts.tau),
    ];
    TheoremVerdict::new(
        HypothesisReport::new(TheoremId::MainIrreducible, checks),
        Conclusion::UnimodularSubsetOfOne,
        observe_unimodular(spectrum, opts.tol),
    )
}

/// Indices with a positive diagonal entry; the natural band for
/// [`engine_main_irreducible`].
pub fn diagonal_band(op: &Operator, tau: f64) -> SupportMask {
    let idx: Vec<usize> = (0..op.dim()).filter(|&i| op.entry(i, i) > tau).collect();
    SupportMask::from_indices(op.dim(), idx, op.space().support_semantics())
        .expect("indices are in range")
}

/// Lattice homomorphism with expanding supports: the point spectrum lies in
/// `[0, ∞)`.
pub fn engine_lattice_homomorphism(
    op: &Operator,
    spectrum: &Spectrum,
    opts: &EngineOptions,
) -> TheoremVerdict {
    let checks = vec![
        Check::new(
            "lattice_homomorphism",
            structure::is_lattice_homomorphism(op, opts.tau, opts.seed),
        ),
        expansion_check(op, opts),
    ];
    TheoremVerdict::new(
        HypothesisReport::new(TheoremId::LatticeHomomorphism, checks),
        Conclusion::NonnegativeRealPointSpectrum,
        observe_nonnegative_real(spectrum, opts.tol),
    )
}

/// `T ≥ ε·id` with `ε > 0`: the peripheral spectrum is `{spr}` and the
/// spectrum lies in the disk of radius `spr − ε` centred at `ε`.
pub fn engine_dominates_identity(
    op: &Operator,
    spectrum: &Spectrum,
    opts: &EngineOptions,
) -> TheoremVerdict {
    let epsilon = structure::dominates_identity(op);
    let checks = vec![
        positivity_check(op),
        Check::new("dominates_identity", epsilon > 0.0).witness(json!({ "epsilon": epsilon })),
    ];
    let mut observed = observe_peripheral(spectrum, opts.tol);
    let eps = epsilon.min(spectrum.spr);
    let in_disk = spectral::disk_inclusion(spectrum, eps, spectrum.tol).unwrap_or(false);
    if !in_disk {
        observed.holds = false;
        observed.detail = format!("{}; spectrum leaves the disk around {eps}", observed.detail);
    }
    TheoremVerdict::new(
        HypothesisReport::new(TheoremId::DominatesIdentity, checks),
        Conclusion::PeripheralIsRadiusInDisk { epsilon: eps },
        observed,
    )
}

fn domination_check(op: &Operator, n: usize) -> (Check, DominationResult) {
    let d = structure::power_domination(op, n);
    let check = Check::new("power_domination", d.epsilon_max > 0.0).witness(json!({
        "n": d.n,
        "epsilon_max": d.epsilon_max,
        "witness_entry": d.witness_entry,
    }));
    (check, d)
}

/// Cyclic peripheral spectrum and `Tⁿ ≥ εTⁿ⁻¹` with `ε > 0`: the peripheral
/// spectrum is `{spr}`.
pub fn engine_power_domination(
    op: &Operator,
    spectrum: &Spectrum,
    n: usize,
    opts: &EngineOptions,
) -> TheoremVerdict {
    let peripheral = spectral::peripheral_spectrum(spectrum, opts.tol * spectrum.spr.max(1.0));
    let cyclic = spectral::is_cyclic(&peripheral, opts.tol * spectrum.spr.max(1.0));
    let checks = vec![
        positivity_check(op),
        Check::new("peripheral_cyclic", cyclic).witness(json!({ "points": peripheral.len() })),
        domination_check(op, n).0,
    ];
    TheoremVerdict::new(
        HypothesisReport::new(TheoremId::PowerDomination, checks),
        Conclusion::PeripheralIsRadius,
        observe_peripheral(spectrum, opts.tol),
    )
}

/// A fixed vector with all entries `> max(τ, 1e-9·max)`, built as `P₁𝟙`
/// where `P₁` is the spectral projection for the eigenvalue 1. When the
/// projection is positive, `P₁𝟙` dominates every fixed vector up to scaling,
/// so a strictly positive fixed vector exists iff this one is strictly
/// positive.
pub fn strictly_positive_fixed_vector(
    op: &Operator,
    spectrum: &Spectrum,
    tau: f64,
) -> Option<Vec<f64>> {
    let one = Complex64::new(1.0, 0.0);
    if !spectrum.contains(one, spectrum.tol) {
        return None;
    }
    let p = eigenprojection(op, spectrum, one).ok()?;
    let h: Vec<f64> = (0..op.dim()).map(|i| p.row(i).iter().map(|z| z.re).sum()).collect();
    let max = h.iter().copied().fold(0.0, f64::max);
    let floor = tau.max(POSITIVE_FIXED_REL * max);
    (max > 0.0 && h.iter().all(|&x| x > floor)).then_some(h)
}

fn observe_convergence(verdict: &ConvergenceVerdict) -> Observed {
    let holds = verdict.theoretical == PowerConvergence::ConvergesStrongly;
    Observed {
        holds,
        detail: format!(
            "{:?}; k_star = {:?}, residual {:.3e}",
            verdict.theoretical, verdict.empirical.k_star, verdict.empirical.final_residual
        ),
        values: Vec::new(),
    }
}

/// Hypotheses of the three convergence results; each predicts that `Tᵏ`
/// converges.
pub fn engine_convergence(
    op: &Operator,
    spectrum: &Spectrum,
    variant: ConvergenceVariant,
    opts: &EngineOptions,
) -> TheoremVerdict {
    let verdict = classify_power_convergence(spectrum, op, opts.k_max, opts.tol);
    engine_convergence_with(op, spectrum, variant, &verdict, opts)
}

fn engine_convergence_with(
    op: &Operator,
    spectrum: &Spectrum,
    variant: ConvergenceVariant,
    verdict: &ConvergenceVerdict,
    opts: &EngineOptions,
) -> TheoremVerdict {
    let (power, _) = power_bound_check(op, spectrum, opts);
    let (id, checks) = match variant {
        ConvergenceVariant::Everywhere => {
            let h = strictly_positive_fixed_vector(op, spectrum, opts.tau);
            let fixed = Check::new("strictly_positive_fixed_vector", h.is_some()).witness(json!({
                "min_entry": h.as_ref().map(|h| h.iter().copied().fold(f64::INFINITY, f64::min)),
            }));
            (
                TheoremId::ConvergenceEverywhere,
                vec![
                    power,
                    fixed,
                    finite_dimension_check("am_compact_power"),
                    expansion_check(op, opts),
                ],
            )
        }
        ConvergenceVariant::Irreducible => {
            let band = diagonal_band(op, opts.tau);
            let band = (!band.is_empty()).then_some(band);
            let fixed = spectrum.contains(Complex64::new(1.0, 0.0), opts.tol);
            (
                TheoremId::ConvergenceIrreducible,
                vec![
                    power,
                    irreducible_check(op, opts.tau),
                    band_check(op, band.as_ref(), opts.tau),
                    Check::new("nonzero_fixed_vector", fixed),
                    finite_dimension_check("order_continuous_norm"),
                    finite_dimension_check("am_compact_minorant"),
                ],
            )
        }
        ConvergenceVariant::CesaroAblv => {
            let mean = mean_ergodic_projection(op, opts.k_max, opts.tol);
            (
                TheoremId::CesaroAblv,
                vec![
                    power,
                    Check::new("mean_ergodic", mean.is_some()),
                    domination_check(op, opts.power_n).0,
                ],
            )
        }
    };
    TheoremVerdict::new(
        HypothesisReport::new(id, checks),
        Conclusion::ConvergesStrongly,
        observe_convergence(verdict),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureSummary {
    pub irreducible: bool,
    pub period: Option<usize>,
    pub components: usize,
    pub diagonal_epsilon: f64,
    pub lattice_homomorphism: bool,
    pub expansion_failures: Vec<usize>,
    pub power_bound: PowerBound,
    pub power_domination: DominationResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub label: String,
    pub dim: usize,
    pub semantics: String,
    pub spectrum: Vec<SpectralPoint>,
    pub spr: f64,
    pub structure: StructureSummary,
    pub convergence: ConvergenceVerdict,
    pub engines: Vec<TheoremVerdict>,
}

impl Report {
    /// Verdicts whose hypotheses all passed while the conclusion failed.
    pub fn violations(&self) -> Vec<&TheoremVerdict> {
        self.engines.iter().filter(|v| !v.consistent).collect()
    }

    pub fn engine(&self, id: TheoremId) -> Option<&TheoremVerdict> {
        self.engines.iter().find(|v| v.report.theorem_id == id)
    }
}

/// Spectrum, structure summary, convergence empirics and every engine.
pub fn analyze(op: &Operator, opts: &EngineOptions) -> Result<Report, VerdictError> {
    opts.validate()?;
    let spectrum = spectral::eigenvalues(op, opts.eig_tol)?;
    Ok(analyze_with(op, &spectrum, opts))
}

/// As [`analyze`], reusing an already computed spectrum.
pub fn analyze_with(op: &Operator, spectrum: &Spectrum, opts: &EngineOptions) -> Report {
    let graph = structure::support_graph(op, opts.tau);
    let horizon = opts.horizon_for(op.dim());
    let expansion =
        structure::expands_support_everywhere(op, horizon, opts.samples, opts.seed, opts.tau);
    let structure = StructureSummary {
        irreducible: graph.is_strongly_connected(),
        period: graph.period().ok(),
        components: graph.components().len(),
        diagonal_epsilon: structure::dominates_identity(op),
        lattice_homomorphism: structure::is_lattice_homomorphism(op, opts.tau, opts.seed),
        expansion_failures: expansion.failing_basis_indices(),
        power_bound: op.power_bound_estimate(horizon),
        power_domination: structure::power_domination(op, opts.power_n),
    };
    let convergence = classify_power_convergence(spectrum, op, opts.k_max, opts.tol);
    let band = diagonal_band(op, opts.tau);
    let band = (!band.is_empty()).then_some(band);
    let engines = vec![
        engine_main_everywhere(op, spectrum, opts),
        main_irreducible(op, spectrum, band.as_ref(), opts),
        engine_lattice_homomorphism(op, spectrum, opts),
        engine_dominates_identity(op, spectrum, opts),
        engine_power_domination(op, spectrum, opts.power_n, opts),
        engine_convergence_with(op, spectrum, ConvergenceVariant::Everywhere, &convergence, opts),
        engine_convergence_with(op, spectrum, ConvergenceVariant::Irreducible, &convergence, opts),
        engine_convergence_with(op, spectrum, ConvergenceVariant::CesaroAblv, &convergence, opts),
    ];
    Report {
        label: op.label().to_string(),
        dim: op.dim(),
        semantics: op.space().tag().to_string(),
        spectrum: spectrum.points.clone(),
        spr: spectrum.spr,
        structure,
        convergence,
        engines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{cyclic_permutation, finite_rank, Functional, SpaceSemantics};
    use crate::spectral::eigenvalues;

    fn op(rows: &[&[f64]]) -> Operator {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Operator::from_dense(&rows, SpaceSemantics::sequence(2.0, rows.len())).unwrap()
    }

    fn spec(t: &Operator) -> Spectrum {
        eigenvalues(t, DEFAULT_EIG_TOL).unwrap()
    }

    fn two_cycle() -> Operator {
        op(&[&[0.0, 1.0], &[1.0, 0.0]])
    }

    #[test]
    fn main_everywhere_on_positive_diagonal_stochastic() {
        let t = op(&[&[0.5, 0.5, 0.0], &[0.1, 0.6, 0.3], &[0.4, 0.0, 0.6]]);
        let v = engine_main_everywhere(&t, &spec(&t), &EngineOptions::default());
        assert!(v.report.all_passed);
        assert!(v.observed.holds);
        assert!(v.consistent);
        assert_eq!(v.observed.values.len(), 1);
    }

    #[test]
    fn main_everywhere_on_two_cycle() {
        let t = two_cycle();
        let v = engine_main_everywhere(&t, &spec(&t), &EngineOptions::default());
        assert!(!v.report.check("expands_support_everywhere").unwrap().passed);
        assert!(!v.observed.holds);
        assert_eq!(v.observed.values.len(), 2);
        assert!(v.consistent);
    }

    #[test]
    fn main_everywhere_on_nagler_operator() {
        let space = SpaceSemantics::sequence(2.0, 3);
        let e = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 1.0]];
        let alpha = vec![
            Functional::new(vec![0.5, 0.25, 0.25]).unwrap(),
            Functional::new(vec![0.0, 0.0, 1.0]).unwrap(),
        ];
        let t = finite_rank(&e, &alpha, space).unwrap();
        let v = engine_main_everywhere(&t, &spec(&t), &EngineOptions::default());
        assert!(v.report.all_passed, "{:?}", v.report);
        assert!(v.observed.holds && v.consistent);
    }

    #[test]
    fn main_irreducible_examples() {
        let t = op(&[&[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        let band = diagonal_band(&t, 0.0);
        assert_eq!(band.indices(), vec![0]);
        let v = engine_main_irreducible(&t, &spec(&t), &band, &EngineOptions::default()).unwrap();
        assert!(v.report.all_passed && v.observed.holds);

        let c = cyclic_permutation(4);
        let s = SupportMask::from_indices(4, [1], SupportSemantics::AlmostEverywhere).unwrap();
        let v = engine_main_irreducible(&c, &spec(&c), &s, &EngineOptions::default()).unwrap();
        assert!(!v.report.check("expands_support_on_band").unwrap().passed);
        assert!(!v.observed.holds && v.consistent);

        let blocks = op(&[&[0.0, 1.0, 0.0, 0.0], &[1.0, 0.0, 0.0, 0.0], &[0.0, 0.0, 1.0, 0.0], &[0.0, 0.0, 0.0, 1.0]]);
        let s = SupportMask::from_indices(4, [2], SupportSemantics::AlmostEverywhere).unwrap();
        let v = engine_main_irreducible(&blocks, &spec(&blocks), &s, &EngineOptions::default()).unwrap();
        assert!(!v.report.check("irreducible").unwrap().passed);
        assert!(v.consistent);

        let empty = SupportMask::empty(4, SupportSemantics::AlmostEverywhere);
        assert!(engine_main_irreducible(&c, &spec(&c), &empty, &EngineOptions::default()).is_err());
    }

    #[test]
    fn lattice_homomorphism_examples() {
        let d = op(&[&[0.3, 0.0], &[0.0, 2.0]]);
        let v = engine_lattice_homomorphism(&d, &spec(&d), &EngineOptions::default());
        assert!(v.report.all_passed && v.observed.holds);

        let t = two_cycle();
        let v = engine_lattice_homomorphism(&t, &spec(&t), &EngineOptions::default());
        assert!(v.report.check("lattice_homomorphism").unwrap().passed);
        assert!(!v.report.all_passed && !v.observed.holds && v.consistent);
    }

    #[test]
    fn dominates_identity_examples() {
        // (I + C₃)/2 has eigenvalues (1 + ω)/2.
        let c = cyclic_permutation(3);
        let half = Operator::from_matrix(
            (c.matrix() + nalgebra::DMatrix::<f64>::identity(3, 3)) * 0.5,
            c.space().clone(),
        )
        .unwrap();
        let v = engine_dominates_identity(&half, &spec(&half), &EngineOptions::default());
        assert!(v.report.all_passed && v.observed.holds);
        assert_eq!(v.predicted, Conclusion::PeripheralIsRadiusInDisk { epsilon: 0.5 });

        let id = op(&[&[1.0, 0.0], &[0.0, 1.0]]);
        assert!(engine_dominates_identity(&id, &spec(&id), &EngineOptions::default()).consistent);

        let t = two_cycle();
        let v = engine_dominates_identity(&t, &spec(&t), &EngineOptions::default());
        assert!(!v.report.all_passed && v.consistent);
    }

    #[test]
    fn power_domination_with_n_one_matches_identity_domination() {
        let t = op(&[&[0.2, 0.8, 0.0], &[0.0, 0.5, 0.5], &[0.6, 0.0, 0.4]]);
        let s = spec(&t);
        let opts = EngineOptions::default();
        let a = engine_dominates_identity(&t, &s, &opts);
        let b = engine_power_domination(&t, &s, 1, &opts);
        assert!(a.report.all_passed && b.report.all_passed);
        assert_eq!(a.observed.holds, b.observed.holds);
    }

    #[test]
    fn convergence_examples() {
        let t = two_cycle();
        let s = spec(&t);
        let opts = EngineOptions::default();
        for variant in [
            ConvergenceVariant::Everywhere,
            ConvergenceVariant::Irreducible,
            ConvergenceVariant::CesaroAblv,
        ] {
            let v = engine_convergence(&t, &s, variant, &opts);
            assert!(!v.report.all_passed, "{variant:?}");
            assert!(!v.observed.holds && v.consistent);
        }

        let t = op(&[&[0.5, 0.5, 0.0], &[0.0, 0.0, 1.0], &[1.0, 0.0, 0.0]]);
        let s = spec(&t);
        let v = engine_convergence(&t, &s, ConvergenceVariant::Irreducible, &opts);
        assert!(v.report.all_passed && v.observed.holds);
        let v = engine_convergence(&t, &s, ConvergenceVariant::CesaroAblv, &opts);
        assert!(!v.report.check("power_domination").unwrap().passed);

        let lazy = op(&[&[0.5, 0.5, 0.0], &[0.0, 0.5, 0.5], &[0.5, 0.0, 0.5]]);
        let s = spec(&lazy);
        let v = engine_convergence(&lazy, &s, ConvergenceVariant::CesaroAblv, &opts);
        assert!(v.report.all_passed && v.observed.holds, "{:?}", v.report);
        let v = engine_convergence(&lazy, &s, ConvergenceVariant::Everywhere, &opts);
        assert!(v.report.all_passed && v.observed.holds, "{:?}", v.report);
    }

    #[test]
    fn fixed_vector_positivity() {
        let t = op(&[&[0.5, 0.5], &[0.25, 0.75]]);
        let h = strictly_positive_fixed_vector(&t, &spec(&t), 0.0).unwrap();
        assert!((h[0] - 1.0).abs() < 1e-12 && (h[1] - 1.0).abs() < 1e-12);
        let absorbing = op(&[&[1.0, 0.0], &[0.5, 0.5]]);
        let h = strictly_positive_fixed_vector(&absorbing, &spec(&absorbing), 0.0);
        assert!(h.is_some());
        let leaking = op(&[&[0.5, 0.5], &[0.0, 1.0]]);
        let h = strictly_positive_fixed_vector(&leaking.clone(), &spec(&leaking), 0.0);
        assert!(h.is_some());
        let substochastic = op(&[&[0.5, 0.0], &[0.0, 1.0]]);
        assert!(strictly_positive_fixed_vector(&substochastic, &spec(&substochastic), 0.0).is_none());
    }

    #[test]
    fn analyze_identity() {
        let id = op(&[&[1.0, 0.0], &[0.0, 1.0]]);
        let r = analyze(&id, &EngineOptions::default()).unwrap();
        assert!(r.violations().is_empty());
        assert_eq!(r.spectrum.len(), 1);
        assert_eq!(r.spectrum[0].multiplicity, 2);
        assert_eq!(r.engines.len(), 8);
        let json = serde_json::to_value(&r).unwrap();
        for key in ["label", "dim", "semantics", "spectrum", "spr", "structure", "engines"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        let engine = &json["engines"][0];
        for key in ["theorem_id", "checks", "predicted", "observed", "consistent"] {
            assert!(engine.get(key).is_some(), "{key}");
        }
        assert_eq!(json["spectrum"][0]["mult"], 2);
    }

    #[test]
    fn analyze_is_deterministic() {
        let t = op(&[&[0.1, 0.9, 0.0], &[0.0, 0.3, 0.7], &[0.5, 0.5, 0.0]]);
        let opts = EngineOptions {
            seed: 9,
            ..EngineOptions::default()
        };
        let a = serde_json::to_string(&analyze(&t, &opts).unwrap()).unwrap();
        let b = serde_json::to_string(&analyze(&t, &opts).unwrap()).unwrap();
        assert_eq!(a, b);
    }
}
