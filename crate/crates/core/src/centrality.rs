//! Google matrices of the share networks and their PageRank / CheiRank vectors.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::wtn::FlowStatistics;

pub const DEFAULT_DAMPING: f64 = 0.85;
pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 10_000;

/// G = alpha * S' + (1 - alpha) / N, where S' is the share matrix with
/// all-zero columns replaced by the uniform column 1/N. Stored dense,
/// row-major.
#[derive(Clone, Debug)]
pub struct GoogleMatrix {
    n: usize,
    damping: f64,
    entries: Vec<f64>,
}

impl GoogleMatrix {
    pub fn new(share: &[f64], n: usize, damping: f64) -> Result<Self> {
        if !(damping > 0.0 && damping < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "damping {damping} must lie in (0, 1)"
            )));
        }
        if share.len() != n * n || n == 0 {
            return Err(Error::InvalidParameter(format!(
                "share matrix has {} entries, expected {}",
                share.len(),
                n * n
            )));
        }
        let uniform = 1.0 / n as f64;
        let teleport = (1.0 - damping) * uniform;
        let mut entries = vec![0.0; n * n];
        for col in 0..n {
            let sum: f64 = (0..n).map(|row| share[row * n + col]).sum();
            let dangling = sum == 0.0;
            for row in 0..n {
                let s = if dangling {
                    uniform
                } else {
                    share[row * n + col]
                };
                entries[row * n + col] = damping * s + teleport;
            }
        }
        Ok(Self {
            n,
            damping,
            entries,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn damping(&self) -> f64 {
        self.damping
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.n + col]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn apply(&self, p: &[f64], out: &mut [f64]) {
        for (row, o) in self.entries.chunks(self.n).zip(out.iter_mut()) {
            *o = row.iter().zip(p).map(|(g, v)| g * v).sum();
        }
    }
}

pub fn google_matrix(share: &[f64], n: usize, damping: f64) -> Result<GoogleMatrix> {
    GoogleMatrix::new(share, n, damping)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RankKind {
    PageRank,
    CheiRank,
}

#[derive(Clone, Debug, Serialize)]
pub struct RankVector {
    pub values: Vec<f64>,
    pub kind: RankKind,
    pub iterations: usize,
    pub residual: f64,
}

fn power_iteration(
    g: &GoogleMatrix,
    tol: f64,
    max_iter: usize,
    kind: RankKind,
) -> Result<RankVector> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "tolerance {tol} must be positive"
        )));
    }
    let n = g.len();
    let mut p = vec![1.0 / n as f64; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for it in 1..=max_iter {
        g.apply(&p, &mut next);
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = next.iter().zip(&p).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut p, &mut next);
        if residual <= tol {
            return Ok(RankVector {
                values: p,
                kind,
                iterations: it,
                residual,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Stationary vector of `g` by power iteration from the uniform vector,
/// stopping once the L1 change between iterates is at most `tol`.
pub fn pagerank(g: &GoogleMatrix, tol: f64, max_iter: usize) -> Result<RankVector> {
    power_iteration(g, tol, max_iter, RankKind::PageRank)
}

/// PageRank of the Google matrix built from the import share matrix S.
pub fn pagerank_of(
    stats: &FlowStatistics,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RankVector> {
    let g = GoogleMatrix::new(stats.import_share(), stats.len(), damping)?;
    pagerank(&g, tol, max_iter)
}

/// PageRank of the Google matrix built from S*, the inverted-flow network.
pub fn cheirank(
    stats: &FlowStatistics,
    damping: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RankVector> {
    let g = GoogleMatrix::new(stats.export_share(), stats.len(), damping)?;
    power_iteration(&g, tol, max_iter, RankKind::CheiRank)
}
