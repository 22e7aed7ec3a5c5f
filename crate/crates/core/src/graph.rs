//! Communication topologies over the follower set plus the leader link.
//!
//! The follower graph is undirected and weighted. The leader (node 0) is not
//! stored in the adjacency matrix; instead each follower `i` carries a leader
//! weight `b_i`, and `b_i > 0` means follower `i` can sense the leader.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

/// Default real-part margin for [`is_positive_stable`].
pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("adjacency is not symmetric: a[{i}][{j}] = {aij} but a[{j}][{i}] = {aji}")]
    AsymmetricAdjacency { i: usize, j: usize, aij: f64, aji: f64 },
    #[error("negative or non-finite weight {value} at {location}")]
    NegativeWeight { location: String, value: f64 },
    #[error("nonzero self-loop weight {value} at follower {i}")]
    NonzeroDiagonal { i: usize, value: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("gain l must be positive, got {0}")]
    NonPositiveGain(f64),
    #[error("eigenvalue computation failed")]
    EigenSolverFailure,
}

/// Validated follower graph with leader adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    adjacency: DMatrix<f64>,
    leader_adjacency: DVector<f64>,
}

/// `L`, `H1 = l B + L` and `H2 = B + L` for one topology.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMatrices {
    pub laplacian: DMatrix<f64>,
    pub h1: DMatrix<f64>,
    pub h2: DMatrix<f64>,
}

/// Validate an adjacency matrix and leader weights into a [`Topology`].
///
/// Nothing is symmetrized or clipped: an input that violates an invariant is
/// rejected. The leader-reachability requirement is checked separately by
/// [`is_leader_globally_reachable`], since unreachable topologies are valid
/// negative-control experiments.
pub fn build_topology(
    adjacency: DMatrix<f64>,
    leader_adjacency: DVector<f64>,
) -> Result<Topology, GraphError> {
    let n = adjacency.nrows();
    if adjacency.ncols() != n {
        return Err(GraphError::DimensionMismatch(format!(
            "adjacency is {}x{}, expected square",
            n,
            adjacency.ncols()
        )));
    }
    if leader_adjacency.len() != n {
        return Err(GraphError::DimensionMismatch(format!(
            "leader_adjacency has {} entries for {} followers",
            leader_adjacency.len(),
            n
        )));
    }
    if n == 0 {
        return Err(GraphError::DimensionMismatch("no followers".into()));
    }
    for i in 0..n {
        let b = leader_adjacency[i];
        if !(b >= 0.0) || !b.is_finite() {
            return Err(GraphError::NegativeWeight { location: format!("b[{i}]"), value: b });
        }
        for j in 0..n {
            let a = adjacency[(i, j)];
            if !(a >= 0.0) || !a.is_finite() {
                return Err(GraphError::NegativeWeight { location: format!("a[{i}][{j}]"), value: a });
            }
        }
        if adjacency[(i, i)] != 0.0 {
            return Err(GraphError::NonzeroDiagonal { i, value: adjacency[(i, i)] });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if adjacency[(i, j)] != adjacency[(j, i)] {
                return Err(GraphError::AsymmetricAdjacency {
                    i,
                    j,
                    aij: adjacency[(i, j)],
                    aji: adjacency[(j, i)],
                });
            }
        }
    }
    Ok(Topology { adjacency, leader_adjacency })
}

impl Topology {
    /// Convenience constructor from row-major nested vectors.
    pub fn from_rows(rows: &[Vec<f64>], leader: &[f64]) -> Result<Self, GraphError> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(GraphError::DimensionMismatch(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        let adjacency = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        build_topology(adjacency, DVector::from_column_slice(leader))
    }

    pub fn n_followers(&self) -> usize {
        self.adjacency.nrows()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn leader_adjacency(&self) -> &DVector<f64> {
        &self.leader_adjacency
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.adjacency[(i, j)]
    }

    pub fn leader_weight(&self, i: usize) -> f64 {
        self.leader_adjacency[i]
    }

    /// Neighbors of follower `i` as `(j, a_ij)` with `a_ij > 0`, ascending `j`.
    pub fn neighbors(&self, i: usize) -> Vec<(usize, f64)> {
        (0..self.n_followers())
            .filter_map(|j| {
                let a = self.adjacency[(i, j)];
                (a > 0.0).then_some((j, a))
            })
            .collect()
    }

    /// Adjacency rows as nested vectors (row-major), the on-disk layout.
    pub fn adjacency_rows(&self) -> Vec<Vec<f64>> {
        self.adjacency.row_iter().map(|r| r.iter().copied().collect()).collect()
    }
}

pub fn laplacian(t: &Topology) -> DMatrix<f64> {
    let n = t.n_followers();
    let a = t.adjacency();
    let mut l = -a.clone();
    for i in 0..n {
        l[(i, i)] = a.row(i).sum();
    }
    l
}

pub fn h_matrices(t: &Topology, l: f64) -> Result<GraphMatrices, GraphError> {
    if !(l > 0.0) || !l.is_finite() {
        return Err(GraphError::NonPositiveGain(l));
    }
    let laplacian = laplacian(t);
    let b = DMatrix::from_diagonal(t.leader_adjacency());
    let h1 = &b * l + &laplacian;
    let h2 = &b + &laplacian;
    Ok(GraphMatrices { laplacian, h1, h2 })
}

/// Breadth-first search from the leader over the augmented graph.
pub fn is_leader_globally_reachable(t: &Topology) -> bool {
    let n = t.n_followers();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&i| t.leader_weight(i) > 0.0).collect();
    for &i in &queue {
        seen[i] = true;
    }
    while let Some(i) = queue.pop_front() {
        for (j, _) in t.neighbors(i) {
            if !seen[j] {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

/// Eigenvalues of a square matrix as `(re, im)` pairs.
///
/// Exactly symmetric input goes through the symmetric solver, everything else
/// through a real Schur decomposition.
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<(f64, f64)>, GraphError> {
    if !m.is_square() {
        return Err(GraphError::DimensionMismatch(format!(
            "{}x{} matrix has no eigenvalues",
            m.nrows(),
            m.ncols()
        )));
    }
    if m.iter().any(|v| !v.is_finite()) {
        return Err(GraphError::EigenSolverFailure);
    }
    let vals: Vec<(f64, f64)> = if m == &m.transpose() {
        m.clone()
            .try_symmetric_eigen(f64::EPSILON, 0)
            .ok_or(GraphError::EigenSolverFailure)?
            .eigenvalues
            .iter()
            .map(|&v| (v, 0.0))
            .collect()
    } else {
        m.clone()
            .try_schur(f64::EPSILON, 0)
            .ok_or(GraphError::EigenSolverFailure)?
            .complex_eigenvalues()
            .iter()
            .map(|c| (c.re, c.im))
            .collect()
    };
    if vals.iter().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
        return Err(GraphError::EigenSolverFailure);
    }
    Ok(vals)
}

/// True iff every eigenvalue of `m` has real part strictly above `tol`.
pub fn is_positive_stable(m: &DMatrix<f64>, tol: f64) -> Result<bool, GraphError> {
    Ok(eigenvalues(m)?.iter().all(|&(re, _)| re > tol))
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> Result<f64, GraphError> {
    eigenvalues(m)?
        .into_iter()
        .map(|(re, _)| re)
        .reduce(f64::min)
        .ok_or(GraphError::EigenSolverFailure)
}
