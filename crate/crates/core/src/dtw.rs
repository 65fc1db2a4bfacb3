//! Dynamic time warping over discrete symbol sequences, plus the
//! same-length Euclidean baseline.
//!
//! Accumulated cost uses the usual recurrence
//! `D(n, m) = c(x_n, y_m) + min(D(n-1, m), D(n, m-1), D(n-1, m-1))`
//! with unit monotone steps and fixed boundary cells. No band constraint.
//! Indices in [`WarpingPath`] are 0-based.

use crate::error::{Error, Result};

/// Absolute difference of symbol indices.
pub fn local_cost(x: usize, y: usize) -> f64 {
    x.abs_diff(y) as f64
}

/// Local cost of every pair `(x_n, y_m)`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Vec<f64>,
    n_rows: usize,
    n_cols: usize,
}

impl CostMatrix {
    pub fn new(x: &[usize], y: &[usize]) -> Self {
        let entries = x
            .iter()
            .flat_map(|&a| y.iter().map(move |&b| local_cost(a, b)))
            .collect();
        Self {
            entries,
            n_rows: x.len(),
            n_cols: y.len(),
        }
    }

    pub fn get(&self, n: usize, m: usize) -> f64 {
        self.entries[n * self.n_cols + m]
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Sum of local costs along `path`.
    pub fn path_cost(&self, path: &WarpingPath) -> f64 {
        path.steps().iter().map(|&(n, m)| self.get(n, m)).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpingPath(Vec<(usize, usize)>);

impl WarpingPath {
    pub fn new(steps: Vec<(usize, usize)>) -> Self {
        Self(steps)
    }

    pub fn steps(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Whether this is an admissible path between sequences of length `n` and `m`:
    /// fixed endpoints, unit monotone steps, and a length in `[max(n, m), n + m - 1]`.
    pub fn is_valid_for(&self, n: usize, m: usize) -> bool {
        if n == 0 || m == 0 {
            return false;
        }
        let steps = &self.0;
        if steps.first() != Some(&(0, 0)) || steps.last() != Some(&(n - 1, m - 1)) {
            return false;
        }
        let unit = steps.windows(2).all(|w| {
            let (a, b) = (w[0], w[1]);
            b.0 >= a.0
                && b.1 >= a.1
                && matches!((b.0 - a.0, b.1 - a.1), (1, 0) | (0, 1) | (1, 1))
        });
        unit && steps.len() >= n.max(m) && steps.len() < n + m
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtwResult {
    pub distance: f64,
    pub path: WarpingPath,
}

/// DTW distance and an optimal warping path.
///
/// When predecessors tie during backtracking the diagonal step is preferred,
/// then the step that advances only in `x`, then the one advancing only in `y`.
pub fn dtw_distance(x: &[usize], y: &[usize]) -> Result<DtwResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySequence);
    }
    let cost = CostMatrix::new(x, y);
    let (rows, cols) = (x.len(), y.len());
    let mut acc = vec![f64::INFINITY; rows * cols];
    let at = |n: usize, m: usize| n * cols + m;

    for n in 0..rows {
        for m in 0..cols {
            let best = if n == 0 && m == 0 {
                0.0
            } else {
                let diag = if n > 0 && m > 0 { acc[at(n - 1, m - 1)] } else { f64::INFINITY };
                let up = if n > 0 { acc[at(n - 1, m)] } else { f64::INFINITY };
                let left = if m > 0 { acc[at(n, m - 1)] } else { f64::INFINITY };
                diag.min(up).min(left)
            };
            acc[at(n, m)] = cost.get(n, m) + best;
        }
    }

    let mut steps = vec![(rows - 1, cols - 1)];
    let (mut n, mut m) = (rows - 1, cols - 1);
    while (n, m) != (0, 0) {
        (n, m) = if n == 0 {
            (0, m - 1)
        } else if m == 0 {
            (n - 1, 0)
        } else {
            let diag = acc[at(n - 1, m - 1)];
            let up = acc[at(n - 1, m)];
            let left = acc[at(n, m - 1)];
            if diag <= up && diag <= left {
                (n - 1, m - 1)
            } else if up <= left {
                (n - 1, m)
            } else {
                (n, m - 1)
            }
        };
        steps.push((n, m));
    }
    steps.reverse();

    Ok(DtwResult {
        distance: acc[at(rows - 1, cols - 1)],
        path: WarpingPath(steps),
    })
}

/// DTW distance only, using two rolling rows. Same recurrence as [`dtw_distance`].
pub fn dtw_cost(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySequence);
    }
    let cols = y.len();
    let mut prev = vec![f64::INFINITY; cols];
    let mut cur = vec![f64::INFINITY; cols];
    for (n, &a) in x.iter().enumerate() {
        for (m, &b) in y.iter().enumerate() {
            let best = match (n, m) {
                (0, 0) => 0.0,
                (0, _) => cur[m - 1],
                (_, 0) => prev[0],
                _ => prev[m - 1].min(prev[m]).min(cur[m - 1]),
            };
            cur[m] = local_cost(a, b) + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[cols - 1])
}

/// `sqrt(Σ (x_t - y_t)²)` for equal-length sequences.
pub fn euclidean_distance(x: &[usize], y: &[usize]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let sq: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let d = local_cost(a, b);
            d * d
        })
        .sum();
    Ok(sq.sqrt())
}

/// Drops consecutive repeats: `1 2 2 2 2 3 4` becomes `1 2 3 4`.
pub fn run_length_collapse(x: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = x.to_vec();
    out.dedup();
    out
}
