//! Brute-force references for small instances.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::PointSet;

pub const GRID_MAX_POINTS: usize = 5;
pub const EXHAUSTIVE_MAX_POINTS: usize = 12;
pub const EXHAUSTIVE_MAX_M: usize = 4;

/// Minimum of `max_i ‖x_i − Σ_j t_j x_j‖` over weights on the grid
/// `{0, 1/R, …, 1}`. An upper bound on the relative radius, within
/// `d(A)/R` of it.
pub fn grid_radius(points: &PointSet, resolution: usize) -> Result<f64> {
    let n = points.len();
    if n > GRID_MAX_POINTS {
        return Err(Error::InstanceTooLarge {
            oracle: "grid_radius",
            found: n,
            limit: GRID_MAX_POINTS,
        });
    }
    if resolution == 0 {
        return Err(Error::InvalidArgument("grid resolution must be positive".into()));
    }
    if n == 1 {
        return Ok(0.0);
    }
    let dim = points.space().dim();
    let r = resolution as f64;

    // the first weight's numerator is split across threads
    let best = (0..=resolution)
        .into_par_iter()
        .map(|first| {
            let mut y: Vec<f64> = points
                .get(0)
                .coeffs()
                .iter()
                .map(|x| x * first as f64 / r)
                .collect();
            let mut best = f64::INFINITY;
            let mut scratch = vec![0.0; dim];
            walk(points, 1, resolution - first, r, &mut y, &mut scratch, &mut best);
            best
        })
        .reduce(|| f64::INFINITY, f64::min);
    Ok(best)
}

fn walk(
    points: &PointSet,
    level: usize,
    remaining: usize,
    r: f64,
    y: &mut Vec<f64>,
    scratch: &mut [f64],
    best: &mut f64,
) {
    let n = points.len();
    let x = points.get(level).coeffs();
    if level == n - 1 {
        let w = remaining as f64 / r;
        for ((s, yk), xk) in scratch.iter_mut().zip(y.iter()).zip(x) {
            *s = yk + w * xk;
        }
        let space = points.space();
        let mut worst = 0.0f64;
        for i in 0..n {
            worst = worst.max(space.distance_unchecked(points.get(i).coeffs(), scratch));
            if worst >= *best {
                return;
            }
        }
        *best = worst;
        return;
    }
    for c in 0..=remaining {
        if c > 0 {
            // y += (1/R) x, applied incrementally
            for (yk, xk) in y.iter_mut().zip(x) {
                *yk += xk / r;
            }
        }
        walk(points, level + 1, remaining - c, r, y, scratch, best);
    }
    // undo this level's contribution
    for (yk, xk) in y.iter_mut().zip(x) {
        *yk -= remaining as f64 * xk / r;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveSimplex {
    pub best_min_edge: f64,
    /// Lexicographically smallest `(m + 1)`-subset attaining `best_min_edge`.
    pub indices: Vec<usize>,
}

/// Exact maximum over all `(m + 1)`-subsets of the minimum pairwise distance.
pub fn exhaustive_simplex(points: &PointSet, m: usize) -> Result<ExhaustiveSimplex> {
    let n = points.len();
    if n > EXHAUSTIVE_MAX_POINTS {
        return Err(Error::InstanceTooLarge {
            oracle: "exhaustive_simplex",
            found: n,
            limit: EXHAUSTIVE_MAX_POINTS,
        });
    }
    if m == 0 || m > EXHAUSTIVE_MAX_M {
        return Err(Error::InvalidArgument(format!(
            "exhaustive search supports 1 <= m <= {EXHAUSTIVE_MAX_M}, got {m}"
        )));
    }
    let k = m + 1;
    if k > n {
        return Err(Error::TooFewPoints {
            what: "exhaustive simplex search",
            needed: k,
            found: n,
        });
    }
    let table = pairwise_table(points);
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best = ExhaustiveSimplex {
        best_min_edge: f64::NEG_INFINITY,
        indices: idx.clone(),
    };
    loop {
        let mut edge = f64::INFINITY;
        for a in 0..k {
            for b in a + 1..k {
                edge = edge.min(table[idx[a]][idx[b]]);
            }
        }
        if edge > best.best_min_edge {
            best = ExhaustiveSimplex {
                best_min_edge: edge,
                indices: idx.clone(),
            };
        }
        // next combination in lexicographic order
        let Some(pos) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            break;
        };
        idx[pos] += 1;
        for i in pos + 1..k {
            idx[i] = idx[i - 1] + 1;
        }
    }
    Ok(best)
}

/// Symmetric matrix of pairwise distances with zero diagonal.
pub fn pairwise_table(points: &PointSet) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut t = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = points.distance(i, j);
            t[i][j] = d;
            t[j][i] = d;
        }
    }
    t
}
