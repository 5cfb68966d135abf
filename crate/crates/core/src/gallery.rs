//! Named, parameterised reproductions of the worked examples, each with a
//! list of golden assertions.
//!
//! [`build_scenario`] constructs the operator and the expected assertions;
//! [`run_scenario`] analyses the operator and evaluates every assertion.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::operators::{
    block_indicator, doubly_stochastic_strip, finite_rank, partition_operator, Functional,
    Operator, OperatorError, SpaceSemantics,
};
use crate::spectral::{
    self, eigenprojection, mean_ergodic_projection, numerical_rank, PowerConvergence, Spectrum,
};
use crate::structure;
use crate::verdicts::{analyze_with, EngineOptions, Report, TheoremId, VerdictError};

/// Parameter overrides by name.
pub type Overrides = BTreeMap<String, f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GalleryError {
    #[error("UnknownScenario: {0}")]
    UnknownScenario(String),
    #[error("scenario {scenario} has no parameter {name}")]
    UnknownParameter { scenario: String, name: String },
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: String,
        value: f64,
        reason: String,
    },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    Verdict(#[from] VerdictError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    WeaklyExpanding,
    Nagler,
    DiagonalStrip,
    SequencePositiveDiagonal,
    IrreducibleOneDiagonal,
    Partition,
}

const KINDS: [(&str, Kind); 6] = [
    ("weakly_expanding", Kind::WeaklyExpanding),
    ("nagler", Kind::Nagler),
    ("diagonal_strip", Kind::DiagonalStrip),
    ("sequence_positive_diagonal", Kind::SequencePositiveDiagonal),
    ("irreducible_one_diagonal", Kind::IrreducibleOneDiagonal),
    ("partition", Kind::Partition),
];

impl Kind {
    fn defaults(self) -> &'static [(&'static str, f64)] {
        match self {
            Kind::WeaklyExpanding => &[("m", 201.0)],
            Kind::Nagler => &[("d", 6.0), ("terms", 3.0), ("seed", 7.0)],
            Kind::DiagonalStrip => &[("m", 100.0), ("delta", 0.2)],
            Kind::SequencePositiveDiagonal => &[("d", 8.0), ("p", 2.0)],
            Kind::IrreducibleOneDiagonal => &[("d", 5.0)],
            Kind::Partition => &[
                ("blocks", 6.0),
                ("block_size", 5.0),
                ("shift", 1.0),
                ("overlap", 0.2),
            ],
        }
    }
}

/// Names of all scenarios.
pub fn list() -> Vec<&'static str> {
    KINDS.iter().map(|(name, _)| *name).collect()
}

/// A named assertion with its tolerance, if it has one.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Expectation {
    pub name: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
}

const fn exact(name: &'static str) -> Expectation {
    Expectation {
        name,
        tolerance: None,
    }
}

const fn within(name: &'static str, tol: f64) -> Expectation {
    Expectation {
        name,
        tolerance: Some(tol),
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: &'static str,
    pub params: BTreeMap<String, f64>,
    pub operator: Operator,
    pub expected: Vec<Expectation>,
    kind: Kind,
    /// Auxiliary vectors named by the assertions (e.g. `e`, `v − w`).
    vectors: BTreeMap<&'static str, Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssertionOutcome {
    pub name: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub measured: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioRun {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub passed: bool,
    pub assertions: Vec<AssertionOutcome>,
    pub report: Report,
}

fn int_param(params: &BTreeMap<String, f64>, name: &str, min: usize) -> Result<usize, GalleryError> {
    let value = params[name];
    if value.fract() != 0.0 || value < min as f64 || value > u32::MAX as f64 {
        return Err(GalleryError::InvalidParameter {
            name: name.into(),
            value,
            reason: format!("expected an integer >= {min}"),
        });
    }
    Ok(value as usize)
}

/// Builds the operator and golden assertions of a scenario; `overrides`
/// replace default parameters.
pub fn build_scenario(name: &str, overrides: &Overrides) -> Result<Scenario, GalleryError> {
    let (name, kind) = KINDS
        .iter()
        .find(|(n, _)| *n == name)
        .copied()
        .ok_or_else(|| GalleryError::UnknownScenario(name.to_string()))?;
    let mut params: BTreeMap<String, f64> =
        kind.defaults().iter().map(|(k, v)| (k.to_string(), *v)).collect();
    for (key, value) in overrides {
        match params.get_mut(key) {
            Some(slot) => *slot = *value,
            None => {
                return Err(GalleryError::UnknownParameter {
                    scenario: name.into(),
                    name: key.clone(),
                })
            }
        }
    }
    let mut vectors = BTreeMap::new();
    let (operator, expected) = match kind {
        Kind::WeaklyExpanding => {
            let m = int_param(&params, "m", 3)?;
            if m % 2 == 0 {
                return Err(GalleryError::InvalidParameter {
                    name: "m".into(),
                    value: params["m"],
                    reason: "grid size must be odd so that 0 is a grid point".into(),
                });
            }
            let (op, v_minus_w) = weakly_expanding(m)?;
            vectors.insert("v_minus_w", v_minus_w);
            let expected = vec![
                within("fixed_unit", 2.0 / m as f64),
                within("eigenvalue_minus_one", 1e-8),
                within("reflection_eigenvector", 1e-12),
                exact("expansion_fails_at_endpoints"),
                exact("main_everywhere_hypotheses_fail"),
                exact("no_violations"),
            ];
            (op, expected)
        }
        Kind::Nagler => {
            let d = int_param(&params, "d", 1)?;
            let terms = int_param(&params, "terms", 1)?;
            let seed = int_param(&params, "seed", 0)? as u64;
            let (op, e) = nagler(d, terms, seed)?;
            vectors.insert("e", e);
            let expected = vec![
                within("fixed_e", 1e-12),
                exact("main_everywhere_hypotheses_pass"),
                exact("main_everywhere_consistent"),
                exact("unimodular_subset_of_one"),
                exact("no_violations"),
            ];
            (op, expected)
        }
        Kind::DiagonalStrip => {
            let m = int_param(&params, "m", 2)?;
            let op = doubly_stochastic_strip(m, params["delta"])?;
            let expected = vec![
                within("row_sums", 1e-9),
                within("fixed_unit", 1e-9),
                exact("converges_strongly"),
                within("powers_reach_mean_ergodic_projection", 1e-6),
                exact("rank_one_limit"),
                exact("convergence_everywhere_passes"),
                exact("no_violations"),
            ];
            (op, expected)
        }
        Kind::SequencePositiveDiagonal => {
            let d = int_param(&params, "d", 2)?;
            let op = banded_positive_diagonal(d, params["p"])?;
            let expected = vec![
                exact("positive_diagonal"),
                within("row_sums", 1e-12),
                exact("strictly_positive_stationary_vector"),
                exact("convergence_everywhere_passes"),
                exact("no_violations"),
            ];
            (op, expected)
        }
        Kind::IrreducibleOneDiagonal => {
            let d = int_param(&params, "d", 2)?;
            let op = irreducible_one_diagonal(d);
            let expected = vec![
                exact("one_positive_diagonal"),
                exact("irreducible"),
                exact("period_one"),
                exact("unimodular_subset_of_one"),
                exact("main_irreducible_passes"),
                exact("convergence_irreducible_passes"),
                exact("no_violations"),
            ];
            (op, expected)
        }
        Kind::Partition => {
            let blocks = int_param(&params, "blocks", 2)?;
            let block_size = int_param(&params, "block_size", 1)?;
            let shift = int_param(&params, "shift", 0)?;
            let overlap = params["overlap"];
            let pairing: Vec<usize> = (0..blocks).map(|n| (n + shift) % blocks).collect();
            let op = partition_operator(blocks, block_size, &pairing, overlap)?;
            let expected = if overlap > 0.0 {
                vec![
                    within("power_domination_epsilon", 1e-12),
                    exact("converges_strongly"),
                    within("empirical_convergence", 1e-6),
                    exact("peripheral_is_one"),
                    exact("no_violations"),
                ]
            } else {
                vec![
                    exact("block_shift_exact"),
                    exact("period_equals_cycle_length"),
                    within("unimodular_roots_of_unity", 1e-8),
                    exact("not_convergent"),
                    exact("no_violations"),
                ]
            };
            (op, expected)
        }
    };
    let label = format!(
        "{name}({})",
        params
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(", ")
    );
    Ok(Scenario {
        name,
        params,
        operator: operator.with_label(label),
        expected,
        kind,
        vectors,
    })
}

/// `Tf = ½∫f·u + f(1)·v + f(−1)·w` on `m` sample points of `[−1, 1]`,
/// with `u = 1 − |x|`, `v = |x|·1_{x≤0}`, `w = |x|·1_{x≥0}`. The integral
/// uses the trapezoid rule, so `α₁(v − w) = 0` holds by symmetry and
/// `v − w` is an exact eigenvector for `−1`. Returns `T` and `v − w`.
fn weakly_expanding(m: usize) -> Result<(Operator, Vec<f64>), GalleryError> {
    let space = SpaceSemantics::ck_grid(-1.0, 1.0, m)?;
    let x = space.coords.clone().expect("grid has coordinates");
    let h = 2.0 / (m - 1) as f64;
    let u: Vec<f64> = x.iter().map(|x| 1.0 - x.abs()).collect();
    let v: Vec<f64> = x.iter().map(|&x| if x <= 0.0 { x.abs() } else { 0.0 }).collect();
    let w: Vec<f64> = x.iter().map(|&x| if x >= 0.0 { x.abs() } else { 0.0 }).collect();
    let mut half_integral = vec![0.5 * h; m];
    half_integral[0] = 0.25 * h;
    half_integral[m - 1] = 0.25 * h;
    let functionals = vec![
        Functional::new(half_integral)?,
        Functional::point_evaluation(m, m - 1),
        Functional::point_evaluation(m, 0),
    ];
    let v_minus_w = v.iter().zip(&w).map(|(a, b)| a - b).collect();
    let op = finite_rank(&[u, v, w], &functionals, space)?;
    Ok((op, v_minus_w))
}

/// Seeded `Σⱼ eⱼ ⊗ αⱼ` on `ℓ²` of dimension `d` with `⟨αⱼ, e⟩ = 1` and
/// `⟨αⱼ, eⱼ⟩ > 0`, where `e = Σ eⱼ`. Returns `T` and `e`.
fn nagler(d: usize, terms: usize, seed: u64) -> Result<(Operator, Vec<f64>), GalleryError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut es = Vec::with_capacity(terms);
    for _ in 0..terms {
        let mut e: Vec<f64> = (0..d)
            .map(|_| if rng.random_bool(0.5) { rng.random_range(0.1..1.0) } else { 0.0 })
            .collect();
        if e.iter().all(|&x| x == 0.0) {
            e[rng.random_range(0..d)] = 1.0;
        }
        es.push(e);
    }
    let e: Vec<f64> = (0..d).map(|i| es.iter().map(|ej| ej[i]).sum()).collect();
    let mut functionals = Vec::with_capacity(terms);
    for ej in &es {
        let mut alpha: Vec<f64> = (0..d)
            .map(|_| if rng.random_bool(0.5) { rng.random_range(0.1..1.0) } else { 0.0 })
            .collect();
        let support: Vec<usize> = (0..d).filter(|&i| ej[i] > 0.0).collect();
        let anchor = support[rng.random_range(0..support.len())];
        alpha[anchor] += 0.5;
        let total: f64 = alpha.iter().zip(&e).map(|(a, b)| a * b).sum();
        functionals.push(Functional::new(alpha.iter().map(|a| a / total).collect())?);
    }
    let op = finite_rank(&es, &functionals, SpaceSemantics::sequence(2.0, d))?;
    Ok((op, e))
}

/// Tridiagonal stochastic matrix on `ℓ^p` with diagonal `0.4`, right
/// neighbour `0.35` and left neighbour `0.25`; boundary rows keep the missing
/// mass on the diagonal.
fn banded_positive_diagonal(d: usize, p: f64) -> Result<Operator, GalleryError> {
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        let mut diag = 0.4;
        if i + 1 < d {
            m[(i, i + 1)] = 0.35;
        } else {
            diag += 0.35;
        }
        if i > 0 {
            m[(i, i - 1)] = 0.25;
        } else {
            diag += 0.25;
        }
        m[(i, i)] = diag;
    }
    Ok(Operator::from_matrix(m, SpaceSemantics::new(
        crate::operators::SpaceKind::Sequence { p },
        d,
        None,
    )?)?)
}

/// The cycle `0 → 1 → … → d−1 → 0` with a lazy step at `0`:
/// `T₀₀ = T₀₁ = ½`, `Tᵢ,ᵢ₊₁ = 1`, `T_{d−1,0} = 1`.
fn irreducible_one_diagonal(d: usize) -> Operator {
    let mut m = DMatrix::zeros(d, d);
    for i in 0..d {
        m[(i, (i + 1) % d)] = 1.0;
    }
    m[(0, 0)] = 0.5;
    m[(0, 1)] = 0.5;
    Operator::from_matrix(m, SpaceSemantics::sequence(2.0, d)).expect("non-negative")
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn induced_inf(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

struct Context<'a> {
    scenario: &'a Scenario,
    spectrum: &'a Spectrum,
    report: &'a Report,
    opts: &'a EngineOptions,
}

impl Context<'_> {
    fn op(&self) -> &Operator {
        &self.scenario.operator
    }

    fn engine_passes(&self, id: TheoremId) -> (bool, Value) {
        let v = self.report.engine(id).expect("analyze runs every engine");
        let failed: Vec<&str> = v
            .report
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect();
        (
            v.report.all_passed && v.consistent && v.observed.holds,
            json!({ "failed_checks": failed, "observed": v.observed.detail }),
        )
    }

    fn row_sums(&self, tol: f64) -> (bool, Value) {
        let dev = sup_diff(&self.op().row_sums(), &vec![1.0; self.op().dim()]);
        (dev <= tol, json!(dev))
    }

    fn unimodular_subset_of_one(&self) -> (bool, Value) {
        let offending = spectral::nontrivial_unimodular(self.spectrum, self.opts.tol);
        (offending.is_empty(), json!(offending.len()))
    }

    fn evaluate(&self, e: &Expectation) -> Result<(bool, Value), GalleryError> {
        let tol = e.tolerance.unwrap_or(0.0);
        let op = self.op();
        let n = op.dim();
        let one = Complex64::new(1.0, 0.0);
        Ok(match e.name {
            "fixed_unit" => {
                let t1 = op.apply_real(&vec![1.0; n])?;
                let dev = sup_diff(&t1, &vec![1.0; n]);
                (dev <= tol, json!(dev))
            }
            "eigenvalue_minus_one" => {
                let dist = self
                    .spectrum
                    .values()
                    .iter()
                    .map(|z| (z + 1.0).norm())
                    .fold(f64::INFINITY, f64::min);
                (dist <= tol, json!(dist))
            }
            "reflection_eigenvector" => {
                let f = &self.scenario.vectors["v_minus_w"];
                let tf = op.apply_real(f)?;
                let dev = sup_diff(&tf, &f.iter().map(|x| -x).collect::<Vec<_>>());
                (dev <= tol, json!(dev))
            }
            "expansion_fails_at_endpoints" => {
                let failing = &self.report.structure.expansion_failures;
                (failing == &[0, n - 1], json!(failing))
            }
            "main_everywhere_hypotheses_fail" => {
                let v = self.report.engine(TheoremId::MainEverywhere).expect("engine ran");
                (!v.report.all_passed, json!(v.report.all_passed))
            }
            "no_violations" => {
                let bad: Vec<TheoremId> =
                    self.report.violations().iter().map(|v| v.report.theorem_id).collect();
                (bad.is_empty(), json!(bad))
            }
            "fixed_e" => {
                let e = &self.scenario.vectors["e"];
                let te = op.apply_real(e)?;
                let dev = sup_diff(&te, e);
                (dev <= tol, json!(dev))
            }
            "main_everywhere_hypotheses_pass" => {
                let v = self.report.engine(TheoremId::MainEverywhere).expect("engine ran");
                (v.report.all_passed, json!(v.report.all_passed))
            }
            "main_everywhere_consistent" => {
                let v = self.report.engine(TheoremId::MainEverywhere).expect("engine ran");
                (v.consistent, json!(v.consistent))
            }
            "unimodular_subset_of_one" => self.unimodular_subset_of_one(),
            "row_sums" => self.row_sums(tol),
            "converges_strongly" => {
                let c = self.report.convergence.theoretical;
                (c == PowerConvergence::ConvergesStrongly, json!(c))
            }
            "powers_reach_mean_ergodic_projection" => {
                match mean_ergodic_projection(op, self.opts.k_max, self.opts.tol) {
                    None => (false, Value::Null),
                    Some(p) => {
                        let (k, dist) = first_power_within(op, p.matrix(), self.opts.k_max, tol);
                        (k.is_some(), json!({ "k": k, "distance": dist }))
                    }
                }
            }
            "rank_one_limit" => match mean_ergodic_projection(op, self.opts.k_max, self.opts.tol) {
                None => (false, Value::Null),
                Some(p) => {
                    let rank = numerical_rank(p.matrix());
                    (rank == 1, json!(rank))
                }
            },
            "convergence_everywhere_passes" => self.engine_passes(TheoremId::ConvergenceEverywhere),
            "positive_diagonal" => {
                let min = (0..n).map(|i| op.entry(i, i)).fold(f64::INFINITY, f64::min);
                (min > 0.0, json!(min))
            }
            "strictly_positive_stationary_vector" => {
                // Rows of the eigenprojection for 1 are multiples of the
                // stationary distribution.
                let p = eigenprojection(op, self.spectrum, one).map_err(VerdictError::from)?;
                let pi: Vec<f64> = (0..n).map(|j| p[(0, j)].re).collect();
                let min = pi.iter().copied().fold(f64::INFINITY, f64::min);
                (min > 0.0, json!(pi))
            }
            "one_positive_diagonal" => {
                let count = (0..n).filter(|&i| op.entry(i, i) > 0.0).count();
                (count == 1, json!(count))
            }
            "irreducible" => {
                let irr = self.report.structure.irreducible;
                (irr, json!(irr))
            }
            "period_one" => {
                let period = self.report.structure.period;
                (period == Some(1), json!(period))
            }
            "main_irreducible_passes" => self.engine_passes(TheoremId::MainIrreducible),
            "convergence_irreducible_passes" => {
                self.engine_passes(TheoremId::ConvergenceIrreducible)
            }
            "power_domination_epsilon" => {
                let eps = structure::power_domination(op, 2).epsilon_max;
                let overlap = self.scenario.params["overlap"];
                ((eps - overlap).abs() <= tol, json!(eps))
            }
            "empirical_convergence" => {
                let emp = self.report.convergence.empirical;
                let ok = emp.k_star.is_some_and(|k| k <= 2000) && emp.final_residual <= tol;
                (ok, json!(emp))
            }
            "peripheral_is_one" => {
                let ok = spectral::peripheral_is_radius(self.spectrum, self.opts.tol)
                    && (self.spectrum.spr - 1.0).abs() <= self.opts.tol;
                let peripheral =
                    spectral::peripheral_spectrum(self.spectrum, self.opts.tol * self.spectrum.spr.max(1.0));
                (ok, json!(peripheral.len()))
            }
            "block_shift_exact" => {
                let blocks = self.scenario.params["blocks"] as usize;
                let block_size = self.scenario.params["block_size"] as usize;
                let shift = self.scenario.params["shift"] as usize;
                let mut f = block_indicator(blocks, block_size, 0);
                let mut first_mismatch = None;
                for k in 1..=2 * blocks {
                    f = op.apply_real(&f)?;
                    if f != block_indicator(blocks, block_size, (k * shift) % blocks) {
                        first_mismatch = Some(k);
                        break;
                    }
                }
                (first_mismatch.is_none(), json!(first_mismatch))
            }
            "period_equals_cycle_length" => {
                let blocks = self.scenario.params["blocks"] as usize;
                let shift = self.scenario.params["shift"] as usize;
                let cycle = blocks / structure::gcd(blocks, shift);
                let period = self.report.structure.period;
                (
                    period == Some(cycle),
                    json!({ "period": period, "cycle_length": cycle }),
                )
            }
            "unimodular_roots_of_unity" => {
                let blocks = self.scenario.params["blocks"] as usize;
                let shift = self.scenario.params["shift"] as usize;
                let cycle = blocks / structure::gcd(blocks, shift);
                let unimodular = spectral::unimodular_point_spectrum(self.spectrum, self.opts.tol);
                let dist = roots_of_unity_distance(&unimodular, cycle);
                (
                    unimodular.len() == cycle && dist <= tol,
                    json!({ "count": unimodular.len(), "distance": dist }),
                )
            }
            "not_convergent" => {
                let c = self.report.convergence.theoretical;
                (
                    c == PowerConvergence::DivergesOrOscillates
                        && self.report.convergence.empirical.k_star.is_none(),
                    json!(c),
                )
            }
            other => unreachable!("no evaluator for assertion {other}"),
        })
    }
}

/// Largest distance from a point of `values` to the nearest `n`-th root of
/// unity, or from a root to the nearest point.
fn roots_of_unity_distance(values: &[Complex64], n: usize) -> f64 {
    let roots: Vec<Complex64> = (0..n)
        .map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / n as f64))
        .collect();
    let nearest = |z: &Complex64, set: &[Complex64]| {
        set.iter().map(|w| (z - w).norm()).fold(f64::INFINITY, f64::min)
    };
    let a = values.iter().map(|z| nearest(z, &roots)).fold(0.0, f64::max);
    let b = roots.iter().map(|z| nearest(z, values)).fold(0.0, f64::max);
    a.max(b)
}

/// First `k = 1, 2, 4, … ≤ k_max` with `‖Tᵏ − P‖_∞ ≤ tol`, and the distance
/// at the last `k` tried.
fn first_power_within(op: &Operator, p: &DMatrix<f64>, k_max: u64, tol: f64) -> (Option<u64>, f64) {
    let mut power = op.matrix().clone();
    let mut k = 1u64;
    let mut dist = f64::INFINITY;
    while k <= k_max {
        dist = induced_inf(&(&power - p));
        if dist <= tol {
            return (Some(k), dist);
        }
        power = &power * &power;
        k *= 2;
    }
    (None, dist)
}

/// Analyses the scenario operator and evaluates every expected assertion.
pub fn run_scenario(scenario: &Scenario, opts: &EngineOptions) -> Result<ScenarioRun, GalleryError> {
    let spectrum = spectral::eigenvalues(&scenario.operator, opts.eig_tol)
        .map_err(VerdictError::from)?;
    let report = analyze_with(&scenario.operator, &spectrum, opts);
    let ctx = Context {
        scenario,
        spectrum: &spectrum,
        report: &report,
        opts,
    };
    let mut assertions = Vec::with_capacity(scenario.expected.len());
    for e in &scenario.expected {
        let (passed, measured) = ctx.evaluate(e)?;
        assertions.push(AssertionOutcome {
            name: e.name.to_string(),
            tolerance: e.tolerance,
            passed,
            measured,
        });
    }
    Ok(ScenarioRun {
        name: scenario.name.to_string(),
        params: scenario.params.clone(),
        passed: assertions.iter().all(|a| a.passed),
        assertions,
        report,
    })
}

/// Builds and runs a scenario with default engine options.
pub fn run(name: &str, overrides: &Overrides) -> Result<ScenarioRun, GalleryError> {
    let scenario = build_scenario(name, overrides)?;
    run_scenario(&scenario, &EngineOptions::default())
}

impl Scenario {
    pub fn kind_name(&self) -> &'static str {
        KINDS
            .iter()
            .find(|(_, k)| *k == self.kind)
            .map(|(n, _)| *n)
            .expect("every kind is listed")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn overrides(pairs: &[(&str, f64)]) -> Overrides {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn assert_run(run: &ScenarioRun) {
        for a in &run.assertions {
            assert!(a.passed, "{}: {} failed, measured {}", run.name, a.name, a.measured);
        }
        assert!(run.passed);
    }

    #[test]
    fn unknown_scenario_and_parameter() {
        assert!(matches!(
            build_scenario("nope", &Overrides::new()),
            Err(GalleryError::UnknownScenario(_))
        ));
        assert!(matches!(
            build_scenario("nagler", &overrides(&[("delta", 1.0)])),
            Err(GalleryError::UnknownParameter { .. })
        ));
        assert!(build_scenario("weakly_expanding", &overrides(&[("m", 20.0)])).is_err());
    }

    #[test]
    fn weakly_expanding_small_grid() {
        let run = run("weakly_expanding", &overrides(&[("m", 21.0)])).unwrap();
        assert_run(&run);
    }

    #[test]
    fn weakly_expanding_interior_functions_expand() {
        // Interior-supported f: Tf = α₁(f)·u, and u is positive on the interior.
        let s = build_scenario("weakly_expanding", &overrides(&[("m", 11.0)])).unwrap();
        let mut f = vec![0.0; 11];
        f[4] = 1.0;
        let tf = s.operator.apply_real(&f).unwrap();
        assert_eq!(tf[0], 0.0);
        assert_eq!(tf[10], 0.0);
        assert!(tf[1..10].iter().all(|&x| x > 0.0));
    }

    #[test]
    fn nagler_default() {
        assert_run(&run("nagler", &Overrides::new()).unwrap());
    }

    #[test]
    fn nagler_is_seed_deterministic() {
        let a = build_scenario("nagler", &overrides(&[("seed", 3.0)])).unwrap();
        let b = build_scenario("nagler", &overrides(&[("seed", 3.0)])).unwrap();
        assert_eq!(a.operator.matrix(), b.operator.matrix());
    }

    #[test]
    fn small_scenarios_pass() {
        for name in ["sequence_positive_diagonal", "irreducible_one_diagonal"] {
            assert_run(&run(name, &Overrides::new()).unwrap());
        }
    }

    #[test]
    fn partition_both_regimes() {
        assert_run(&run("partition", &Overrides::new()).unwrap());
        let cyclic = run("partition", &overrides(&[("overlap", 0.0)])).unwrap();
        assert_run(&cyclic);
        assert_eq!(cyclic.assertions[0].name, "block_shift_exact");
    }

    #[test]
    fn list_matches_builders() {
        for name in list() {
            let s = build_scenario(name, &Overrides::new()).unwrap();
            assert_eq!(s.kind_name(), name);
            assert!(!s.expected.is_empty());
        }
    }
}
