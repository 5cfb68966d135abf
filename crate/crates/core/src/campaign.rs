//! Seeded randomised campaigns: generate operators from a hypothesis class,
//! analyse each one with every engine and collect soundness violations.

use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use thiserror::Error;

use crate::format::operator_to_json;
use crate::operators::{partition_operator, Operator, SpaceSemantics};
use crate::verdicts::{analyze, EngineOptions, Report, TheoremId, VerdictError};

#[derive(Debug, Error)]
pub enum CampaignError {
    #[error("invalid campaign: {0}")]
    Invalid(String),
    #[error("thread pool: {0}")]
    Pool(String),
    #[error("writing reproduction file {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Operator classes a campaign samples from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Generator {
    /// Strictly positive diagonal, row sums `≤ 1`, a closed stochastic class
    /// so that `spr = 1`.
    StochasticPositiveDiag,
    /// Irreducible stochastic with exactly one positive diagonal entry.
    IrreducibleOneDiag,
    /// `εI + (1 − ε)S` with `S` stochastic.
    DominatesId { epsilon: f64 },
    /// Partition operators with random pairing and overlap `ε`, checked
    /// for `Tⁿ ≥ εTⁿ⁻¹`.
    PowerDomination { n: usize, epsilon: f64 },
    /// Sparse non-negative matrices scaled to row sums near one.
    Unconstrained,
}

impl Generator {
    /// The engine whose hypotheses the class is built to satisfy.
    pub fn target(&self) -> TheoremId {
        match self {
            Generator::StochasticPositiveDiag | Generator::Unconstrained => {
                TheoremId::MainEverywhere
            }
            Generator::IrreducibleOneDiag => TheoremId::MainIrreducible,
            Generator::DominatesId { .. } => TheoremId::DominatesIdentity,
            Generator::PowerDomination { .. } => TheoremId::PowerDomination,
        }
    }

    fn min_dim(&self) -> usize {
        match self {
            Generator::PowerDomination { .. } => 2,
            _ => 1,
        }
    }

    /// One operator of dimension `dim`.
    pub fn generate(&self, dim: usize, rng: &mut impl Rng) -> Operator {
        let space = SpaceSemantics::sequence(2.0, dim);
        let (matrix, label) = match *self {
            Generator::StochasticPositiveDiag => (stochastic_positive_diag(dim, rng), "stochastic_positive_diag"),
            Generator::IrreducibleOneDiag => (irreducible_one_diag(dim, rng), "irreducible_one_diag"),
            Generator::DominatesId { epsilon } => {
                let s = random_stochastic(dim, 0.4, rng);
                let m = DMatrix::<f64>::identity(dim, dim) * epsilon + s * (1.0 - epsilon);
                (m, "dominates_id")
            }
            Generator::PowerDomination { epsilon, .. } => {
                return random_partition(dim, epsilon, rng).with_label("power_domination");
            }
            Generator::Unconstrained => (unconstrained(dim, rng), "unconstrained"),
        };
        Operator::from_matrix(matrix, space)
            .expect("generated entries are non-negative")
            .with_label(label)
    }
}

fn weight(rng: &mut impl Rng) -> f64 {
    rng.random_range(0.05..1.0)
}

fn normalize_rows(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        let s: f64 = m.row(i).sum();
        if s > 0.0 {
            for j in 0..m.ncols() {
                m[(i, j)] /= s;
            }
        }
    }
}

/// Row-stochastic with off-diagonal density `density`; every row has at
/// least one entry.
fn random_stochastic(dim: usize, density: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            if rng.random_bool(density) {
                m[(i, j)] = weight(rng);
            }
        }
        if m.row(i).sum() == 0.0 {
            let j = rng.random_range(0..dim);
            m[(i, j)] = weight(rng);
        }
    }
    normalize_rows(&mut m);
    m
}

fn stochastic_positive_diag(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    // Rows in `closed` are stochastic and stay inside `closed`; the others
    // lose a random fraction of their mass.
    let mut order: Vec<usize> = (0..dim).collect();
    order.shuffle(rng);
    let closed_size = if rng.random_bool(0.5) { dim } else { rng.random_range(1..=dim) };
    let mut closed = vec![false; dim];
    for &i in &order[..closed_size] {
        closed[i] = true;
    }
    let density = rng.random_range(0.1..0.7);
    let mut m = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        m[(i, i)] = weight(rng);
        for j in 0..dim {
            if j != i && (!closed[i] || closed[j]) && rng.random_bool(density) {
                m[(i, j)] = weight(rng);
            }
        }
    }
    normalize_rows(&mut m);
    for i in 0..dim {
        if !closed[i] {
            let c = rng.random_range(0.5..1.0);
            for j in 0..dim {
                m[(i, j)] *= c;
            }
        }
    }
    m
}

fn irreducible_one_diag(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(dim, dim);
    let mut cycle: Vec<usize> = (0..dim).collect();
    cycle.shuffle(rng);
    for k in 0..dim {
        let (from, to) = (cycle[k], cycle[(k + 1) % dim]);
        m[(from, to)] = weight(rng);
    }
    let density = rng.random_range(0.0..0.5);
    for i in 0..dim {
        for j in 0..dim {
            if i != j && rng.random_bool(density) {
                m[(i, j)] = weight(rng);
            }
        }
    }
    let d = rng.random_range(0..dim);
    m[(d, d)] = weight(rng);
    normalize_rows(&mut m);
    m
}

fn unconstrained(dim: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let density = rng.random_range(0.1..0.9);
    let mut m = DMatrix::from_fn(dim, dim, |_, _| {
        if rng.random_bool(density) {
            rng.random::<f64>()
        } else {
            0.0
        }
    });
    let max_row = (0..dim).map(|i| m.row(i).sum()).fold(0.0, f64::max);
    if max_row > 0.0 {
        m *= rng.random_range(0.8..1.2) / max_row;
    }
    m
}

/// Partition operator on `N·b ≤ dim` cells, `N ≥ 2`, random pairing and
/// overlap `epsilon`.
fn random_partition(dim: usize, epsilon: f64, rng: &mut impl Rng) -> Operator {
    let blocks = rng.random_range(2..=dim.max(2));
    let block_size = rng.random_range(1..=(dim / blocks).max(1));
    let mut pairing: Vec<usize> = (0..blocks).collect();
    pairing.shuffle(rng);
    partition_operator(blocks, block_size, &pairing, epsilon).expect("valid partition parameters")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignConfig {
    pub count: usize,
    pub min_dim: usize,
    pub max_dim: usize,
    pub generator: Generator,
    pub seed: u64,
    #[serde(skip)]
    pub options: EngineOptions,
}

impl CampaignConfig {
    pub fn new(generator: Generator, count: usize, max_dim: usize, seed: u64) -> Self {
        Self {
            count,
            min_dim: 1,
            max_dim,
            generator,
            seed,
            options: EngineOptions::default(),
        }
    }

    fn validate(&self) -> Result<(), CampaignError> {
        if self.count == 0 {
            return Err(CampaignError::Invalid("count must be at least 1".into()));
        }
        let lo = self.min_dim.max(self.generator.min_dim());
        if self.min_dim == 0 || lo > self.max_dim {
            return Err(CampaignError::Invalid(format!(
                "dimension range {}..={} is empty for {:?}",
                self.min_dim, self.max_dim, self.generator
            )));
        }
        match self.generator {
            Generator::DominatesId { epsilon } | Generator::PowerDomination { epsilon, .. }
                if !(0.0..=1.0).contains(&epsilon) =>
            {
                Err(CampaignError::Invalid(format!("epsilon {epsilon} outside [0, 1]")))
            }
            Generator::PowerDomination { n: 0, .. } => {
                Err(CampaignError::Invalid("power n must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }

    /// Seed of instance `index`.
    pub fn instance_seed(&self, index: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index as u64)
    }

    /// The operator of instance `index`.
    pub fn instance(&self, index: usize) -> Operator {
        let seed = self.instance_seed(index);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lo = self.min_dim.max(self.generator.min_dim());
        let dim = rng.random_range(lo..=self.max_dim);
        self.generator
            .generate(dim, &mut rng)
            .with_label(format!("{}#{index}", self.generator_name()))
    }

    fn generator_name(&self) -> &'static str {
        match self.generator {
            Generator::StochasticPositiveDiag => "stochastic_positive_diag",
            Generator::IrreducibleOneDiag => "irreducible_one_diag",
            Generator::DominatesId { .. } => "dominates_id",
            Generator::PowerDomination { .. } => "power_domination",
            Generator::Unconstrained => "unconstrained",
        }
    }

    fn engine_options(&self) -> EngineOptions {
        let mut opts = self.options.clone();
        if let Generator::PowerDomination { n, .. } = self.generator {
            opts.power_n = n;
        }
        opts
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub instance: usize,
    pub seed: u64,
    pub theorem_id: TheoremId,
    pub label: String,
}

/// Result of one instance; failed analyses are recorded with their error.
#[derive(Debug, Clone)]
pub struct InstanceOutcome {
    pub index: usize,
    pub seed: u64,
    pub operator: Operator,
    pub report: Result<Report, VerdictError>,
}

impl InstanceOutcome {
    fn target_passed(&self, target: TheoremId) -> bool {
        self.report
            .as_ref()
            .ok()
            .and_then(|r| r.engine(target))
            .is_some_and(|v| v.report.all_passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignSummary {
    pub generator: Generator,
    pub seed: u64,
    pub instances: usize,
    /// Instances whose target engine had every hypothesis pass.
    pub hypothesis_pass_count: usize,
    pub solver_failures: Vec<usize>,
    pub violations: Vec<Violation>,
}

pub struct CampaignRun {
    pub summary: CampaignSummary,
    pub outcomes: Vec<InstanceOutcome>,
}

/// Runs every instance on up to `jobs` threads (`0` means the rayon
/// default); outcomes are ordered by instance seed.
pub fn run_campaign(config: &CampaignConfig, jobs: usize) -> Result<CampaignRun, CampaignError> {
    config.validate()?;
    let opts = config.engine_options();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CampaignError::Pool(e.to_string()))?;
    let mut outcomes: Vec<InstanceOutcome> = pool.install(|| {
        (0..config.count)
            .into_par_iter()
            .map(|index| {
                let operator = config.instance(index);
                let mut instance_opts = opts.clone();
                instance_opts.seed = config.instance_seed(index);
                let report = analyze(&operator, &instance_opts);
                InstanceOutcome {
                    index,
                    seed: config.instance_seed(index),
                    operator,
                    report,
                }
            })
            .collect()
    });
    outcomes.sort_by_key(|o| (o.seed, o.index));
    let target = config.generator.target();
    let mut violations = Vec::new();
    let mut solver_failures = Vec::new();
    for o in &outcomes {
        match &o.report {
            Ok(report) => violations.extend(report.violations().iter().map(|v| Violation {
                instance: o.index,
                seed: o.seed,
                theorem_id: v.report.theorem_id,
                label: o.operator.label().to_string(),
            })),
            Err(_) => solver_failures.push(o.index),
        }
    }
    let summary = CampaignSummary {
        generator: config.generator,
        seed: config.seed,
        instances: outcomes.len(),
        hypothesis_pass_count: outcomes.iter().filter(|o| o.target_passed(target)).count(),
        solver_failures,
        violations,
    };
    Ok(CampaignRun { summary, outcomes })
}

/// Writes one JSON reproduction file per instance with a violation and
/// returns the paths.
pub fn write_reproductions(run: &CampaignRun, dir: &Path) -> Result<Vec<PathBuf>, CampaignError> {
    let mut paths = Vec::new();
    let mut seen = std::collections::BTreeSet::new();
    for v in &run.summary.violations {
        if !seen.insert(v.instance) {
            continue;
        }
        let o = run
            .outcomes
            .iter()
            .find(|o| o.index == v.instance)
            .expect("violation refers to an outcome");
        let path = dir.join(format!("violation-{}-{}.json", v.instance, v.seed));
        let body = json!({
            "instance": v.instance,
            "seed": v.seed,
            "operator": operator_to_json(&o.operator),
            "report": o.report.as_ref().ok(),
        });
        std::fs::create_dir_all(dir)
            .and_then(|_| std::fs::write(&path, serde_json::to_string_pretty(&body).expect("json")))
            .map_err(|source| CampaignError::Io {
                path: path.clone(),
                source,
            })?;
        paths.push(path);
    }
    Ok(paths)
}
