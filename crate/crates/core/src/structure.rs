//! Hypothesis checkers on the support graph of a positive operator.
//!
//! For a non-negative matrix the support of `Tf` depends only on the support
//! of `f` (no cancellation can occur), so support dynamics are computed on
//! the support graph with bitsets. This is exact, independent of the size
//! of the entries.

use fixedbitset::FixedBitSet;
use nalgebra::DMatrix;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::lattice::{self, LatticeError, SupportMask};
use crate::operators::{matrix_power, Operator};

/// Number of random pairs used to confirm the lattice-homomorphism row test.
const LATTICE_HOM_SAMPLES: usize = 20;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StructureError {
    #[error("operator is reducible; the period is only defined for irreducible operators")]
    ReducibleOperator,
    #[error("support graph has no cycle")]
    NoCycle,
    #[error("band must be non-empty")]
    EmptyBand,
    #[error("band dimension {band} does not match operator dimension {dim}")]
    BandDimension { band: usize, dim: usize },
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Directed graph with an edge `j → i` whenever `T_ij > τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SupportGraph {
    successors: Vec<FixedBitSet>,
}

impl SupportGraph {
    pub fn new(op: &Operator, tau: f64) -> Self {
        Self::from_matrix(op.matrix(), tau)
    }

    pub(crate) fn from_matrix(m: &DMatrix<f64>, tau: f64) -> Self {
        let n = m.nrows();
        let successors = (0..n)
            .map(|j| {
                let mut s = FixedBitSet::with_capacity(n);
                for i in 0..n {
                    if m[(i, j)] > tau {
                        s.insert(i);
                    }
                }
                s
            })
            .collect();
        Self { successors }
    }

    pub fn dim(&self) -> usize {
        self.successors.len()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.successors[from].contains(to)
    }

    pub fn successors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.successors[node].ones()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.dim())
            .flat_map(|j| self.successors[j].ones().map(move |i| (j, i)))
            .collect()
    }

    /// `supp(Tf)` given `supp(f)`.
    pub fn image(&self, set: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.dim());
        for j in set.ones() {
            out.union_with(&self.successors[j]);
        }
        out
    }

    /// Strongly connected components in reverse topological order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut g = DiGraph::<(), ()>::with_capacity(self.dim(), 0);
        let nodes: Vec<_> = (0..self.dim()).map(|_| g.add_node(())).collect();
        for (j, i) in self.edges() {
            g.add_edge(nodes[j], nodes[i], ());
        }
        tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|n| n.index()).collect();
                v.sort_unstable();
                v
            })
            .collect()
    }

    pub fn is_strongly_connected(&self) -> bool {
        self.dim() > 0 && self.components().len() == 1
    }

    /// Gcd of cycle lengths through a strongly connected graph, from BFS
    /// level classes: `gcd` over edges `u → v` of `level(u) + 1 − level(v)`.
    pub fn period(&self) -> Result<usize, StructureError> {
        if !self.is_strongly_connected() {
            return Err(StructureError::ReducibleOperator);
        }
        let n = self.dim();
        let mut level: Vec<Option<usize>> = vec![None; n];
        level[0] = Some(0);
        let mut queue = std::collections::VecDeque::from([0usize]);
        while let Some(u) = queue.pop_front() {
            let lu = level[u].expect("queued nodes have a level");
            for v in self.successors(u) {
                if level[v].is_none() {
                    level[v] = Some(lu + 1);
                    queue.push_back(v);
                }
            }
        }
        let mut g = 0usize;
        for (u, v) in self.edges() {
            let (lu, lv) = (level[u].unwrap() as i64, level[v].unwrap() as i64);
            g = gcd(g, (lu + 1 - lv).unsigned_abs() as usize);
        }
        if g == 0 {
            return Err(StructureError::NoCycle);
        }
        Ok(g)
    }
}

pub(crate) fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn support_graph(op: &Operator, tau: f64) -> SupportGraph {
    SupportGraph::new(op, tau)
}

/// Strong connectivity of the support graph.
pub fn is_irreducible(op: &Operator, tau: f64) -> bool {
    SupportGraph::new(op, tau).is_strongly_connected()
}

pub fn period(op: &Operator, tau: f64) -> Result<usize, StructureError> {
    SupportGraph::new(op, tau).period()
}

/// First `n` in `1..=horizon` with `supp(Tⁿf) ⊇ supp(Tⁿ⁻¹f)`, iterating from a
/// given support.
fn first_expansion(graph: &SupportGraph, start: &FixedBitSet, horizon: usize) -> Option<usize> {
    let mut prev = start.clone();
    for n in 1..=horizon {
        let next = graph.image(&prev);
        if prev.is_subset(&next) {
            return Some(n);
        }
        prev = next;
    }
    None
}

/// Smallest `n ∈ [1, horizon]` with `supp(Tⁿf) ⊇ supp(Tⁿ⁻¹f)`.
pub fn expands_support(
    op: &Operator,
    f: &[f64],
    horizon: usize,
    tau: f64,
) -> Result<Option<usize>, StructureError> {
    lattice::check_nonnegative(f)?;
    if f.len() != op.dim() {
        return Err(LatticeError::DimensionMismatch {
            left: f.len(),
            right: op.dim(),
        }
        .into());
    }
    let graph = SupportGraph::new(op, tau);
    let start = lattice::support_default(f);
    Ok(first_expansion(&graph, start.bits(), horizon))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BasisExpansion {
    pub index: usize,
    pub first_n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionResult {
    pub per_basis_vector: Vec<BasisExpansion>,
    pub samples: usize,
    /// Supports of random samples that failed to expand.
    pub failed_samples: Vec<Vec<usize>>,
    pub all_satisfied: bool,
    pub horizon: usize,
}

impl ExpansionResult {
    pub fn failing_basis_indices(&self) -> Vec<usize> {
        self.per_basis_vector
            .iter()
            .filter(|b| b.first_n.is_none())
            .map(|b| b.index)
            .collect()
    }

    pub fn basis_satisfied(&self) -> bool {
        self.per_basis_vector.iter().all(|b| b.first_n.is_some())
    }
}

/// Support expansion for every `f ≥ 0`, checked on all canonical basis
/// vectors and on `samples` seeded random non-negative vectors.
///
/// Supports are additive under a positive matrix and an expansion index, once
/// reached, persists for all later powers. So if every `eᵢ` expands by step
/// `nᵢ ≤ horizon`, every `f ≥ 0` expands by step `maxᵢ nᵢ`: within the horizon
/// the basis check decides the quantifier, and the random samples act as a
/// cross-check.
pub fn expands_support_everywhere(
    op: &Operator,
    horizon: usize,
    samples: usize,
    seed: u64,
    tau: f64,
) -> ExpansionResult {
    let n = op.dim();
    let graph = SupportGraph::new(op, tau);
    let per_basis_vector: Vec<BasisExpansion> = (0..n)
        .map(|i| {
            let mut start = FixedBitSet::with_capacity(n);
            start.insert(i);
            BasisExpansion {
                index: i,
                first_n: first_expansion(&graph, &start, horizon),
            }
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failed_samples = Vec::new();
    for _ in 0..samples {
        let f = random_sparse_nonneg(&mut rng, n);
        let start = lattice::support_default(&f);
        if first_expansion(&graph, start.bits(), horizon).is_none() {
            failed_samples.push(start.indices());
        }
    }

    let all_satisfied = per_basis_vector.iter().all(|b| b.first_n.is_some())
        && failed_samples.is_empty();
    ExpansionResult {
        per_basis_vector,
        samples,
        failed_samples,
        all_satisfied,
        horizon,
    }
}

/// Non-negative vector where each entry is zero with probability ½ and
/// otherwise uniform in `(0, 1]`; never identically zero.
pub(crate) fn random_sparse_nonneg(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut f: Vec<f64> = (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                0.0
            } else {
                1.0 - rng.random::<f64>()
            }
        })
        .collect();
    if f.iter().all(|&x| x == 0.0) {
        f[rng.random_range(0..n)] = 1.0;
    }
    f
}

/// `supp(Tf) ⊇ supp(f)` for every `0 ≤ f` supported in `band`; on a grid this
/// is positivity of the diagonal on the band.
pub fn expands_support_on_band(
    op: &Operator,
    band: &SupportMask,
    tau: f64,
) -> Result<bool, StructureError> {
    if band.is_empty() {
        return Err(StructureError::EmptyBand);
    }
    if band.dim() != op.dim() {
        return Err(StructureError::BandDimension {
            band: band.dim(),
            dim: op.dim(),
        });
    }
    Ok(band.indices().into_iter().all(|i| op.entry(i, i) > tau))
}

/// At most one entry `> τ` per row, confirmed by checking
/// `T(f ∨ g) = Tf ∨ Tg` on seeded random pairs.
pub fn is_lattice_homomorphism(op: &Operator, tau: f64, seed: u64) -> bool {
    let n = op.dim();
    let rows_ok = (0..n).all(|i| (0..n).filter(|&j| op.entry(i, j) > tau).count() <= 1);
    if !rows_ok {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = op.scale().max(f64::MIN_POSITIVE);
    (0..LATTICE_HOM_SAMPLES).all(|_| {
        let f: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let g: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let sup: Vec<f64> = f.iter().zip(&g).map(|(a, b)| a.max(*b)).collect();
        let lhs = op.apply_real(&sup).expect("dimensions match");
        let tf = op.apply_real(&f).expect("dimensions match");
        let tg = op.apply_real(&g).expect("dimensions match");
        lhs.iter()
            .zip(tf.iter().zip(&tg))
            .all(|(l, (a, b))| (l - a.max(*b)).abs() <= 1e-12 * scale + tau * n as f64)
    })
}

/// Largest `ε` with `T ≥ ε·id`: the smallest diagonal entry.
pub fn dominates_identity(op: &Operator) -> f64 {
    (0..op.dim())
        .map(|i| op.entry(i, i))
        .fold(f64::INFINITY, f64::min)
        .max(0.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationResult {
    pub n: usize,
    pub epsilon_max: f64,
    /// Entry `(i, j)` attaining the minimal ratio.
    pub witness_entry: Option<(usize, usize)>,
}

/// Largest `ε` with `Tⁿ ≥ ε·Tⁿ⁻¹`: the minimum of `(Tⁿ)_ij / (Tⁿ⁻¹)_ij` over
/// the support of `Tⁿ⁻¹`. When `Tⁿ⁻¹ = 0` the result is reported as `0`.
pub fn power_domination(op: &Operator, n: usize) -> DominationResult {
    let n = n.max(1);
    let lower = matrix_power(op.matrix(), (n - 1) as u64);
    let upper = &lower * op.matrix();
    let dim = op.dim();
    let mut best: Option<(f64, (usize, usize))> = None;
    for i in 0..dim {
        for j in 0..dim {
            let below = lower[(i, j)];
            if below > 0.0 {
                let ratio = upper[(i, j)] / below;
                if best.is_none_or(|(r, _)| ratio < r) {
                    best = Some((ratio, (i, j)));
                }
            }
        }
    }
    match best {
        Some((ratio, entry)) => DominationResult {
            n,
            epsilon_max: ratio.max(0.0),
            witness_entry: Some(entry),
        },
        None => DominationResult {
            n,
            epsilon_max: 0.0,
            witness_entry: None,
        },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SuperFixed {
    pub super_fixed: bool,
    pub fixed: bool,
}

/// `Tf ≥ f − τ` entrywise, and `‖Tf − f‖_∞ ≤ τ‖f‖_∞`.
pub fn is_super_fixed(op: &Operator, f: &[f64], tau: f64) -> Result<SuperFixed, StructureError> {
    lattice::check_nonnegative(f)?;
    let tf = op.apply_real(f).map_err(|_| LatticeError::DimensionMismatch {
        left: f.len(),
        right: op.dim(),
    })?;
    let super_fixed = tf.iter().zip(f).all(|(a, b)| *a >= b - tau);
    let defect = tf.iter().zip(f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(SuperFixed {
        super_fixed,
        fixed: defect <= tau * lattice::sup_norm(f),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::SupportSemantics;
    use crate::operators::{cyclic_permutation, SpaceSemantics};

    fn op(rows: &[&[f64]]) -> Operator {
        let rows: Vec<Vec<f64>> = rows.iter().map(|r| r.to_vec()).collect();
        Operator::from_dense(&rows, SpaceSemantics::sequence(2.0, rows.len())).unwrap()
    }

    fn identity(n: usize) -> Operator {
        Operator::identity(SpaceSemantics::sequence(2.0, n))
    }

    fn basis(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn graph_examples() {
        let g = support_graph(&identity(3), 0.0);
        assert_eq!(g.edges(), vec![(0, 0), (1, 1), (2, 2)]);
        let g = support_graph(&cyclic_permutation(2), 0.0);
        assert_eq!(g.edges(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn irreducibility_examples() {
        assert!(is_irreducible(&cyclic_permutation(5), 0.0));
        assert!(!is_irreducible(
            &op(&[&[0.0, 1.0, 1.0], &[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0]]),
            0.0
        ));
        assert!(!is_irreducible(&identity(2), 0.0));
    }

    #[test]
    fn period_examples() {
        assert_eq!(period(&cyclic_permutation(4), 0.0), Ok(4));
        let mut rows = cyclic_permutation(4).rows();
        rows[2][2] = 0.5;
        let t = Operator::from_dense(&rows, SpaceSemantics::sequence(2.0, 4)).unwrap();
        assert_eq!(period(&t, 0.0), Ok(1));
        // cycles 0→1→0 and 0→2→3→0 through node 0
        let t = op(&[
            &[0.0, 1.0, 0.0, 1.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 0.0, 1.0, 0.0],
        ]);
        assert_eq!(period(&t, 0.0), Ok(1));
        assert_eq!(period(&identity(2), 0.0), Err(StructureError::ReducibleOperator));
        assert_eq!(period(&op(&[&[0.0]]), 0.0), Err(StructureError::NoCycle));
    }

    #[test]
    fn expands_support_examples() {
        let f = [0.3, 0.0, 2.0];
        assert_eq!(expands_support(&identity(3), &f, 5, 0.0).unwrap(), Some(1));
        let p = cyclic_permutation(2);
        for horizon in [1, 2, 10, 100] {
            assert_eq!(expands_support(&p, &basis(2, 0), horizon, 0.0).unwrap(), None);
        }
        let t = op(&[&[0.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(expands_support(&t, &basis(2, 0), 5, 0.0).unwrap(), Some(2));
        assert_eq!(expands_support(&t, &basis(2, 0), 1, 0.0).unwrap(), None);
        assert!(expands_support(&t, &[-1.0, 0.0], 5, 0.0).is_err());
    }

    #[test]
    fn expands_everywhere_examples() {
        let t = op(&[&[0.5, 0.5, 0.0], &[0.1, 0.2, 0.7], &[0.0, 0.4, 0.6]]);
        let r = expands_support_everywhere(&t, 6, 16, 1, 0.0);
        assert!(r.all_satisfied);
        assert!(r.per_basis_vector.iter().all(|b| b.first_n == Some(1)));

        let r = expands_support_everywhere(&cyclic_permutation(2), 6, 16, 1, 0.0);
        assert!(!r.all_satisfied);
        assert_eq!(r.failing_basis_indices(), vec![0, 1]);
    }

    #[test]
    fn band_expansion_examples() {
        let t = op(&[&[0.0, 1.0], &[0.5, 0.5]]);
        let s = SupportMask::from_indices(2, [1], SupportSemantics::AlmostEverywhere).unwrap();
        assert!(expands_support_on_band(&t, &s, 0.0).unwrap());
        let s0 = SupportMask::from_indices(2, [0], SupportSemantics::AlmostEverywhere).unwrap();
        assert!(!expands_support_on_band(&cyclic_permutation(2), &s0, 0.0).unwrap());
        let empty = SupportMask::empty(2, SupportSemantics::AlmostEverywhere);
        assert_eq!(
            expands_support_on_band(&t, &empty, 0.0),
            Err(StructureError::EmptyBand)
        );
    }

    #[test]
    fn lattice_homomorphism_examples() {
        let weighted = op(&[&[0.0, 2.0, 0.0], &[0.0, 0.0, 0.5], &[3.0, 0.0, 0.0]]);
        assert!(is_lattice_homomorphism(&weighted, 0.0, 7));
        assert!(!is_lattice_homomorphism(&op(&[&[1.0, 1.0], &[0.0, 1.0]]), 0.0, 7));
        assert!(is_lattice_homomorphism(&op(&[&[2.0, 0.0], &[0.0, 0.1]]), 0.0, 7));
    }

    #[test]
    fn domination_examples() {
        assert_eq!(dominates_identity(&identity(3)), 1.0);
        assert_eq!(dominates_identity(&op(&[&[0.3, 0.7], &[0.7, 0.3]])), 0.3);
        assert_eq!(dominates_identity(&cyclic_permutation(2)), 0.0);

        assert_eq!(power_domination(&identity(3), 1).epsilon_max, 1.0);
        let d = power_domination(&cyclic_permutation(2), 2);
        assert_eq!(d.epsilon_max, 0.0);
        let t = op(&[&[0.3, 0.7], &[0.2, 0.8]]);
        assert_eq!(power_domination(&t, 1).epsilon_max, dominates_identity(&t));
    }

    #[test]
    fn super_fixed_examples() {
        let t = op(&[&[0.5, 0.5], &[0.5, 0.5]]);
        assert_eq!(
            is_super_fixed(&t, &[1.0, 1.0], 1e-12).unwrap(),
            SuperFixed {
                super_fixed: true,
                fixed: true
            }
        );
        let twice = op(&[&[2.0, 0.0], &[0.0, 2.0]]);
        assert_eq!(
            is_super_fixed(&twice, &[1.0, 0.0], 1e-12).unwrap(),
            SuperFixed {
                super_fixed: true,
                fixed: false
            }
        );
        assert!(is_super_fixed(&t, &[-1.0, 0.0], 0.0).is_err());
    }

    #[test]
    fn gcd_basics() {
        assert_eq!(gcd(0, 6), 6);
        assert_eq!(gcd(4, 6), 2);
        assert_eq!(gcd(3, 2), 1);
    }
}
