//! Maximum-similarity bipartite matching between tracks (rows) and
//! detections (columns), with an optional post-assignment gate.

use crate::error::{Error, Result};

/// Dense row-major similarity grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl SimilarityMatrix {
    pub fn new(rows: usize, cols: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::invalid(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                values.len()
            )));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "non-finite similarity at ({}, {})",
                pos / cols.max(1),
                pos % cols.max(1)
            )));
        }
        Ok(Self { rows, cols, values })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("ragged similarity rows"));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    /// Fill a matrix by evaluating `f(row, col)`; fails on any error or
    /// non-finite value.
    pub fn from_fn(
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> Result<f64>,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                values.push(f(r, c)?);
            }
        }
        Self::new(rows, cols, values)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.cols + col]
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MatchResult {
    pub pairs: Vec<(usize, usize)>,
    pub unmatched_rows: Vec<usize>,
    pub unmatched_cols: Vec<usize>,
}

/// Matching of size `min(rows, cols)` that maximizes total similarity.
///
/// Pairs come back sorted by row. The solver scans columns in ascending
/// order and only replaces a candidate on strict improvement, so equal
/// inputs always produce equal outputs.
pub fn solve(sim: &SimilarityMatrix) -> Vec<(usize, usize)> {
    if sim.is_empty() {
        return Vec::new();
    }
    // Maximizing similarity is minimizing (1 - similarity).
    let transpose = sim.rows > sim.cols;
    let (n, m) = if transpose {
        (sim.cols, sim.rows)
    } else {
        (sim.rows, sim.cols)
    };
    let cost = |i: usize, j: usize| {
        if transpose {
            1.0 - sim.get(j, i)
        } else {
            1.0 - sim.get(i, j)
        }
    };

    let row_of_col = shortest_augmenting_path(n, m, cost);
    let mut pairs: Vec<(usize, usize)> = row_of_col
        .iter()
        .enumerate()
        .filter_map(|(j, r)| r.map(|i| if transpose { (j, i) } else { (i, j) }))
        .collect();
    pairs.sort_unstable();
    pairs
}

/// Hungarian method in its O(n^2 m) potential form, `n <= m`.
/// Returns, for each column, the row assigned to it.
fn shortest_augmenting_path(
    n: usize,
    m: usize,
    cost: impl Fn(usize, usize) -> f64,
) -> Vec<Option<usize>> {
    // 1-based with index 0 as the virtual source column.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    let mut minv = vec![0.0f64; m + 1];
    let mut used = vec![false; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    (1..=m).map(|j| (p[j] != 0).then(|| p[j] - 1)).collect()
}

/// [`solve`], then drop every assigned pair whose similarity is below
/// `min_sim`.
pub fn gated_match(sim: &SimilarityMatrix, min_sim: f64) -> Result<MatchResult> {
    if !min_sim.is_finite() {
        return Err(Error::invalid(format!("gate must be finite, got {min_sim}")));
    }
    let mut row_taken = vec![false; sim.rows];
    let mut col_taken = vec![false; sim.cols];
    let pairs: Vec<(usize, usize)> = solve(sim)
        .into_iter()
        .filter(|&(r, c)| sim.get(r, c) >= min_sim)
        .inspect(|&(r, c)| {
            row_taken[r] = true;
            col_taken[c] = true;
        })
        .collect();
    Ok(MatchResult {
        pairs,
        unmatched_rows: (0..sim.rows).filter(|&r| !row_taken[r]).collect(),
        unmatched_cols: (0..sim.cols).filter(|&c| !col_taken[c]).collect(),
    })
}
