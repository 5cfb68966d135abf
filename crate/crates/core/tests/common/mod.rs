//! Independent oracles and generators shared by the integration tests.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use perispec::operators::{Operator, SpaceSemantics};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn seq_op(m: DMatrix<f64>) -> Operator {
    let n = m.nrows();
    Operator::from_matrix(m, SpaceSemantics::sequence(2.0, n)).unwrap()
}

pub fn from_flat(n: usize, entries: &[f64]) -> Operator {
    seq_op(DMatrix::from_row_slice(n, n, entries))
}

/// Eigenvalues from nalgebra's Schur decomposition.
///
/// nalgebra's QR iteration can stall on some reducible matrices, so the
/// iteration count is capped and the decomposition retried on the transpose
/// and on reversed-index permutations, all of which share the spectrum.
pub fn schur_eigenvalues(m: &DMatrix<f64>) -> Vec<Complex64> {
    let n = m.nrows();
    let reversed = DMatrix::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)]);
    let candidates = [m.clone(), m.transpose(), reversed.clone(), reversed.transpose()];
    for c in candidates {
        if let Some(schur) = nalgebra::Schur::try_new(c, f64::EPSILON, 10_000) {
            return schur.complex_eigenvalues().iter().copied().collect();
        }
    }
    panic!("Schur decomposition did not converge on any similar matrix")
}

/// Indices `i` with `v_i > 0`, computed without any library support code.
pub fn positive_indices(v: &[f64]) -> Vec<usize> {
    (0..v.len()).filter(|&i| v[i] > 0.0).collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// gcd of the lengths of all simple cycles of the digraph `adj[i][j]`,
/// found by exhaustive depth-first enumeration. Each cycle is enumerated
/// from its smallest vertex.
pub fn brute_force_cycle_gcd(adj: &[Vec<bool>]) -> usize {
    let n = adj.len();
    let mut g = 0;
    fn dfs(adj: &[Vec<bool>], start: usize, v: usize, len: usize, on_path: &mut [bool], g: &mut usize) {
        for w in 0..adj.len() {
            if !adj[v][w] || w < start {
                continue;
            }
            if w == start {
                *g = gcd(*g, len);
            } else if !on_path[w] {
                on_path[w] = true;
                dfs(adj, start, w, len + 1, on_path, g);
                on_path[w] = false;
            }
        }
    }
    for start in 0..n {
        let mut on_path = vec![false; n];
        on_path[start] = true;
        dfs(adj, start, start, 1, &mut on_path, &mut g);
    }
    g
}

/// Support-graph adjacency with an edge `j → i` whenever `T_ij > 0`.
pub fn adjacency(op: &Operator) -> Vec<Vec<bool>> {
    let n = op.dim();
    (0..n).map(|j| (0..n).map(|i| op.entry(i, j) > 0.0).collect()).collect()
}

/// Strong connectivity by reachability closure (Floyd–Warshall on booleans).
pub fn strongly_connected(adj: &[Vec<bool>]) -> bool {
    let n = adj.len();
    let mut r: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i == j || adj[i][j]).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r.iter().all(|row| row.iter().all(|&x| x))
}

/// Random irreducible digraph on `n` vertices: a random Hamiltonian cycle
/// plus extra edges with probability `density`.
pub fn random_irreducible(n: usize, density: f64, rng: &mut impl Rng) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for k in 0..n {
        m[(order[(k + 1) % n], order[k])] = rng.random_range(0.1..1.0);
    }
    for i in 0..n {
        for j in 0..n {
            if rng.random_bool(density) {
                m[(i, j)] = rng.random_range(0.1..1.0);
            }
        }
    }
    m
}

pub fn normalize_rows(m: &mut DMatrix<f64>) {
    for i in 0..m.nrows() {
        let s: f64 = m.row(i).sum();
        if s > 0.0 {
            for j in 0..m.ncols() {
                m[(i, j)] /= s;
            }
        }
    }
}

/// Row-stochastic matrix with strictly positive diagonal; every row is
/// irreducible-connected through a random cycle, so the stationary vector
/// is strictly positive.
pub fn random_stochastic_positive_stationary(n: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let density = rng.random_range(0.0..0.6);
    let mut m = random_irreducible(n, density, rng);
    if rng.random_bool(0.5) {
        for i in 0..n {
            m[(i, i)] += rng.random_range(0.05..1.0);
        }
    }
    normalize_rows(&mut m);
    m
}

/// Stationary distribution `πT = π`, `Σπ = 1`, by a dense linear solve.
pub fn stationary_by_solve(t: &DMatrix<f64>) -> Vec<f64> {
    let n = t.nrows();
    let mut a = t.transpose() - DMatrix::<f64>::identity(n, n);
    for j in 0..n {
        a[(n - 1, j)] = 1.0;
    }
    let mut b = nalgebra::DVector::zeros(n);
    b[n - 1] = 1.0;
    a.lu().solve(&b).expect("irreducible chain has a unique stationary vector").iter().copied().collect()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn induced_inf(m: &DMatrix<f64>) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Integer-power helper by repeated multiplication.
pub fn naive_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let n = m.nrows();
    let mut p = DMatrix::identity(n, n);
    for _ in 0..k {
        p = &p * m;
    }
    p
}
