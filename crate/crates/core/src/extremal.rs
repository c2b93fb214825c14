//! Jung constants, self-extremality, and the witnesses that certify large
//! diameter-scale structure inside a finite set: heavy indices, near-equilateral
//! simplices and separated subsets.

use serde::Serialize;

use crate::chebyshev::{relative_radius, SolverConfig};
use crate::error::{Error, Result};
use crate::simplex::SimplexWeights;
use crate::space::{PointSet, IDENTITY_TOL};

/// `max(2^(1/p − 1), 2^(−1/p))`, the Jung and self-Jung constant of `L_p`.
pub fn jung_constant(p: f64) -> Result<f64> {
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange(p));
    }
    Ok((2f64.powf(1.0 / p - 1.0)).max(2f64.powf(-1.0 / p)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Classification {
    /// `|r(A)/d(A) − J_s| ≤ tolerance`.
    SelfExtremal { deviation: f64, tolerance: f64 },
    /// `J_s − r(A)/d(A)`, reported even when negative.
    Subextremal { margin: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExtremalityReport {
    pub radius: f64,
    pub diameter: f64,
    pub ratio: f64,
    pub jung: f64,
    pub classification: Classification,
}

fn radius_of(points: &PointSet, cfg: &SolverConfig) -> Result<f64> {
    Ok(relative_radius(points, cfg)?.radius)
}

fn nonzero_diameter(points: &PointSet) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "extremality",
            needed: 2,
            found: points.len(),
        });
    }
    let d = points.diameter();
    if d == 0.0 {
        return Err(Error::ZeroDiameter);
    }
    Ok(d)
}

pub fn extremality_ratio(points: &PointSet, cfg: &SolverConfig) -> Result<ExtremalityReport> {
    let diameter = nonzero_diameter(points)?;
    let radius = radius_of(points, cfg)?;
    let jung = jung_constant(points.space().p())?;
    let ratio = radius / diameter;
    let classification = if (ratio - jung).abs() <= cfg.class_tol {
        Classification::SelfExtremal {
            deviation: ratio - jung,
            tolerance: cfg.class_tol,
        }
    } else {
        Classification::Subextremal {
            margin: jung - ratio,
        }
    };
    Ok(ExtremalityReport {
        radius,
        diameter,
        ratio,
        jung,
        classification,
    })
}

/// `J_s·d(A) − r(A)`; positive for every finite set.
pub fn gulevich_margin(points: &PointSet, cfg: &SolverConfig) -> Result<f64> {
    let diameter = nonzero_diameter(points)?;
    let jung = jung_constant(points.space().p())?;
    Ok(jung * diameter - radius_of(points, cfg)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeavyIndexReport {
    /// `T_j = Σ_i w_i ‖y_i − y_j‖^α`.
    pub t: Vec<f64>,
    /// `2 r^α (1 − √(1 − r^α))`.
    pub threshold: f64,
    /// Indices with `T_j ≥ threshold`, ascending.
    pub heavy: Vec<usize>,
    /// Weight outside the heavy set.
    pub lambda: f64,
    /// Weight on the heavy set.
    pub heavy_mass: f64,
    pub r_used: f64,
    /// `√(1 − r^α)`, the bound on `lambda` implied by the certificate below.
    pub lambda_bound: f64,
    /// Whether `2 r^α ≤ Σ_{i,j} w_i w_j ‖y_i − y_j‖^α` holds for this configuration.
    pub certificate_holds: bool,
    /// Whether every `‖y_i − y_j‖^α ≤ 2`, the normalization under which
    /// the certificate bounds `lambda`.
    pub normalized: bool,
}

pub fn heavy_indices(points: &PointSet, w: &SimplexWeights, r: f64) -> Result<HeavyIndexReport> {
    if w.len() != points.len() {
        return Err(Error::WeightCountMismatch {
            weights: w.len(),
            points: points.len(),
        });
    }
    if !(r > 0.0 && r <= 1.0 + IDENTITY_TOL) {
        return Err(Error::InvalidArgument(format!(
            "heavy-index radius must lie in (0, 1], got {r}"
        )));
    }
    let space = points.space();
    let alpha = space.alpha();
    let ws = w.as_slice();
    let n = points.len();

    let mut dist_alpha = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let d = space.distance_pow_alpha(points.get(i).coeffs(), points.get(j).coeffs());
            dist_alpha[i][j] = d;
            dist_alpha[j][i] = d;
        }
    }
    let t: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| ws[i] * dist_alpha[i][j]).sum())
        .collect();

    let r_alpha = r.powf(alpha);
    let root = (1.0 - r_alpha).max(0.0).sqrt();
    let threshold = 2.0 * r_alpha * (1.0 - root);

    let heavy: Vec<usize> = (0..n).filter(|&j| t[j] >= threshold).collect();
    let heavy_mass: f64 = heavy.iter().map(|&j| ws[j]).sum();
    let lambda: f64 = (0..n)
        .filter(|j| heavy.binary_search(j).is_err())
        .map(|j| ws[j])
        .sum();

    let double_sum: f64 = (0..n).map(|j| ws[j] * t[j]).sum();
    let normalized = dist_alpha
        .iter()
        .flatten()
        .all(|&d| d <= 2.0 + IDENTITY_TOL);

    Ok(HeavyIndexReport {
        t,
        threshold,
        heavy,
        lambda,
        heavy_mass,
        r_used: r,
        lambda_bound: root,
        certificate_holds: 2.0 * r_alpha <= double_sum,
        normalized,
    })
}

/// `{ i : ‖y_i − y_j‖^α ≥ delta_alpha }`, ascending.
pub fn neighbor_indices(points: &PointSet, j: usize, delta_alpha: f64) -> Result<Vec<usize>> {
    if j >= points.len() {
        return Err(Error::InvalidArgument(format!(
            "index {j} out of range for a set of {} points",
            points.len()
        )));
    }
    let space = points.space();
    let yj = points.get(j).coeffs();
    Ok((0..points.len())
        .filter(|&i| space.distance_pow_alpha(points.get(i).coeffs(), yj) >= delta_alpha)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimplexWitness {
    /// The `m + 1` vertices, in selection order.
    pub indices: Vec<usize>,
    pub min_edge: f64,
    pub epsilon_used: f64,
    pub m: usize,
    /// `(d(A) − ε)^α`, the edge threshold in α-power units.
    pub threshold_alpha: f64,
    /// Dead ends abandoned before the witness was found.
    pub backtracks: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SimplexSearch {
    Found(SimplexWitness),
    Infeasible { threshold_alpha: f64, backtracks: usize },
}

impl SimplexSearch {
    pub fn witness(&self) -> Option<&SimplexWitness> {
        match self {
            SimplexSearch::Found(w) => Some(w),
            SimplexSearch::Infeasible { .. } => None,
        }
    }
}

/// Builds `z_1, …, z_{m+1}` with every `z_k` taken from the running
/// intersection of the neighbor sets of its predecessors, lowest index first.
/// Dead ends backtrack to the previous choice, so `Infeasible` means no
/// `m`-simplex with edges `≥ d(A) − ε` exists in the set.
pub fn extract_simplex(points: &PointSet, m: usize, epsilon: f64) -> Result<SimplexSearch> {
    if m == 0 {
        return Err(Error::InvalidArgument("simplex dimension m must be at least 1".into()));
    }
    let diameter = points.diameter();
    if !(epsilon > 0.0 && epsilon < diameter) {
        return Err(Error::InvalidArgument(format!(
            "epsilon must lie in (0, d(A)) = (0, {diameter}), got {epsilon}"
        )));
    }
    let space = points.space();
    let threshold_alpha = (diameter - epsilon).powf(space.alpha());
    let n = points.len();

    let adjacent: Vec<Vec<bool>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    space.distance_pow_alpha(points.get(i).coeffs(), points.get(j).coeffs())
                        >= threshold_alpha
                })
                .collect()
        })
        .collect();

    let mut chain: Vec<usize> = Vec::with_capacity(m + 1);
    let mut backtracks = 0usize;
    if extend(&adjacent, m + 1, &mut chain, &mut backtracks, (0..n).collect()) {
        let mut min_edge = f64::INFINITY;
        for (a, &i) in chain.iter().enumerate() {
            for &j in &chain[a + 1..] {
                min_edge = min_edge.min(points.distance(i, j));
            }
        }
        return Ok(SimplexSearch::Found(SimplexWitness {
            indices: chain,
            min_edge,
            epsilon_used: epsilon,
            m,
            threshold_alpha,
            backtracks,
        }));
    }
    Ok(SimplexSearch::Infeasible {
        threshold_alpha,
        backtracks,
    })
}

fn extend(
    adjacent: &[Vec<bool>],
    size: usize,
    chain: &mut Vec<usize>,
    backtracks: &mut usize,
    candidates: Vec<usize>,
) -> bool {
    if chain.len() == size {
        return true;
    }
    for (pos, &c) in candidates.iter().enumerate() {
        // earlier siblings already failed under this prefix
        let next: Vec<usize> = candidates[pos + 1..]
            .iter()
            .copied()
            .filter(|&x| adjacent[c][x])
            .collect();
        if next.len() + chain.len() + 1 < size {
            continue;
        }
        chain.push(c);
        if extend(adjacent, size, chain, backtracks, next) {
            return true;
        }
        chain.pop();
        *backtracks += 1;
    }
    false
}

/// Sufficient conditions under which the chain construction is guaranteed to
/// succeed for a heavy set of `heavy_count` indices out of `n`. Reported
/// alongside a search, never used to decide it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChainDiagnostics {
    pub heavy_exceeds_m: bool,
    /// `2 α m / n^(1/4) < 1`.
    pub quartic_condition: bool,
    /// `2 (1 − n^(−1/4)) ≥ (d(A) − ε)^α`.
    pub threshold_condition: bool,
}

pub fn chain_diagnostics(
    alpha: f64,
    m: usize,
    n: usize,
    heavy_count: usize,
    diameter: f64,
    epsilon: f64,
) -> ChainDiagnostics {
    let root4 = (n as f64).powf(0.25);
    ChainDiagnostics {
        heavy_exceeds_m: heavy_count > m,
        quartic_condition: 2.0 * alpha * m as f64 / root4 < 1.0,
        threshold_condition: 2.0 * (1.0 - 1.0 / root4) >= (diameter - epsilon).powf(alpha),
    }
}

/// Greedy maximal `delta`-separated subset, scanning in index order.
pub fn separated_subset(points: &PointSet, delta: f64) -> Result<Vec<usize>> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "separation delta must be positive, got {delta}"
        )));
    }
    let mut chosen: Vec<usize> = Vec::new();
    for i in 0..points.len() {
        if chosen.iter().all(|&j| points.distance(i, j) >= delta) {
            chosen.push(i);
        }
    }
    Ok(chosen)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Point, WeightedSpace};

    fn set(p: f64, cells: Vec<f64>, pts: Vec<Vec<f64>>) -> PointSet {
        let s = WeightedSpace::new(p, cells).unwrap();
        PointSet::new(s, pts.into_iter().map(Point::new).collect()).unwrap()
    }

    fn square() -> PointSet {
        set(
            2.0,
            vec![1.0, 1.0],
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0], vec![1.0, 1.0]],
        )
    }

    #[test]
    fn jung_values() {
        assert!((jung_constant(2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!((jung_constant(3.0).unwrap() - 2f64.powf(-1.0 / 3.0)).abs() < 1e-12);
        assert!((jung_constant(1.5).unwrap() - 2f64.powf(-1.0 / 3.0)).abs() < 1e-12);
        assert_eq!(jung_constant(1.0).unwrap(), 1.0);
        assert!(jung_constant(0.5).is_err());
        assert!(jung_constant(f64::INFINITY).is_err());
    }

    #[test]
    fn jung_conjugate_symmetry_and_minimum() {
        let mut p = 1.1;
        while p <= 2.0 {
            let q = p / (p - 1.0);
            assert!((jung_constant(p).unwrap() - jung_constant(q).unwrap()).abs() <= 1e-12);
            p += 0.05;
        }
        let at_two = jung_constant(2.0).unwrap();
        for k in 0..=69 {
            let p = 1.1 + 0.1 * k as f64;
            assert!(at_two <= jung_constant(p).unwrap() + 1e-15, "p={p}");
        }
    }

    #[test]
    fn pair_is_subextremal() {
        for p in [1.3, 2.0, 4.0] {
            let a = set(p, vec![1.0], vec![vec![0.0], vec![1.0]]);
            let rep = extremality_ratio(&a, &SolverConfig::default()).unwrap();
            assert!((rep.ratio - 0.5).abs() < 1e-6);
            assert!(matches!(rep.classification, Classification::Subextremal { margin } if margin > 0.0));
        }
    }

    #[test]
    fn gulevich_pair_and_triangle() {
        let a = set(3.0, vec![1.0], vec![vec![0.0], vec![1.0]]);
        let m = gulevich_margin(&a, &SolverConfig::default()).unwrap();
        assert!((m - (2f64.powf(-1.0 / 3.0) - 0.5)).abs() < 1e-6);

        let a = set(
            2.0,
            vec![1.0; 3],
            vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]],
        );
        let m = gulevich_margin(&a, &SolverConfig::default()).unwrap();
        assert!((m - (1.0 - 6f64.sqrt() / 3.0)).abs() < 1e-6, "{m}");
    }

    #[test]
    fn zero_diameter_rejected() {
        let a = set(2.0, vec![1.0], vec![vec![1.0], vec![1.0]]);
        assert!(matches!(
            extremality_ratio(&a, &SolverConfig::default()),
            Err(Error::ZeroDiameter)
        ));
        assert!(matches!(
            gulevich_margin(&a, &SolverConfig::default()),
            Err(Error::ZeroDiameter)
        ));
    }

    #[test]
    fn heavy_threshold_at_unit_radius() {
        let a = square();
        let rep = heavy_indices(&a, &SimplexWeights::uniform(4), 1.0).unwrap();
        assert_eq!(rep.threshold, 2.0);
        let expected: Vec<usize> = (0..4).filter(|&j| rep.t[j] >= 2.0).collect();
        assert_eq!(rep.heavy, expected);
    }

    #[test]
    fn heavy_two_point_configuration() {
        // ‖y_1 − y_2‖^α = 2 s^α with s chosen so membership flips at a known r
        let p = 3.0;
        let s = 0.9f64;
        let d = 2f64.powf(1.0 / p) * s;
        let a = set(p, vec![1.0], vec![vec![0.0], vec![d]]);
        let w = SimplexWeights::uniform(2);
        let dist_alpha = d.powf(p);
        for r in [0.3, 0.6, 0.9, 1.0] {
            let rep = heavy_indices(&a, &w, r).unwrap();
            for tj in &rep.t {
                assert!((tj - 0.5 * dist_alpha).abs() < 1e-12);
            }
            let ra = r.powf(p);
            let thr = 2.0 * ra * (1.0 - (1.0 - ra).sqrt());
            let heavy = 0.5 * dist_alpha >= thr;
            assert_eq!(rep.heavy.len(), if heavy { 2 } else { 0 }, "r={r}");
        }
    }

    #[test]
    fn heavy_lambda_with_uniform_weights() {
        let a = set(
            2.0,
            vec![1.0, 1.0],
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 0.2], vec![0.1, 0.1], vec![1.0, 1.0]],
        );
        let w = SimplexWeights::uniform(5);
        let rep = heavy_indices(&a, &w, 0.7).unwrap();
        let excluded = 5 - rep.heavy.len();
        assert!((rep.lambda - excluded as f64 / 5.0).abs() < 1e-15);
        assert!((rep.lambda + rep.heavy_mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heavy_rejects_radius_above_one() {
        let a = square();
        assert!(heavy_indices(&a, &SimplexWeights::uniform(4), 1.01).is_err());
        assert!(heavy_indices(&a, &SimplexWeights::uniform(4), 0.0).is_err());
        // rounding just above one is clamped, not rejected
        let rep = heavy_indices(&a, &SimplexWeights::uniform(4), 1.0 + 1e-13).unwrap();
        assert!(rep.threshold.is_finite());
        assert_eq!(rep.lambda_bound, 0.0);
    }

    #[test]
    fn neighbors() {
        let a = square();
        assert_eq!(neighbor_indices(&a, 0, 0.0).unwrap(), vec![0, 1, 2, 3]);
        assert!(neighbor_indices(&a, 0, 2.0 + 1e-9).unwrap().is_empty());
        assert_eq!(neighbor_indices(&a, 0, 2.0).unwrap(), vec![3]);
        assert!(neighbor_indices(&a, 9, 1.0).is_err());
    }

    #[test]
    fn simplex_on_square() {
        let a = square();
        let d = 2f64.sqrt();
        match extract_simplex(&a, 1, d - 1e-9).unwrap() {
            SimplexSearch::Found(w) => {
                assert_eq!(w.indices.len(), 2);
                assert!((w.min_edge - d).abs() < 1e-12 || w.min_edge >= 1e-9);
            }
            other => panic!("{other:?}"),
        }
        match extract_simplex(&a, 2, 0.5).unwrap() {
            SimplexSearch::Found(w) => {
                assert_eq!(w.indices.len(), 3);
                assert!((w.min_edge - 1.0).abs() < 1e-12);
                assert!(w.min_edge >= d - 0.5);
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(
            extract_simplex(&a, 2, 0.3).unwrap(),
            SimplexSearch::Infeasible { .. }
        ));
    }

    #[test]
    fn simplex_pair_attains_diameter() {
        let a = set(
            2.0,
            vec![1.0],
            vec![vec![0.0], vec![0.4], vec![3.0], vec![1.0]],
        );
        let w = extract_simplex(&a, 1, 1e-6).unwrap();
        let w = w.witness().unwrap();
        let mut idx = w.indices.clone();
        idx.sort_unstable();
        assert_eq!(idx, vec![0, 2]);
        assert!((w.min_edge - 3.0).abs() < 1e-12);
    }

    #[test]
    fn simplex_backtracks_past_decoys() {
        // triangle {3, 4, 5} of side 10; each decoy is far only from one triangle vertex
        let p = 2.0;
        let tri = [vec![0.0, 0.0], vec![10.0, 0.0], vec![5.0, 8.660254037844386]];
        let mut pts = Vec::new();
        for v in &tri {
            // decoy far from v only; the lowest-index greedy choice from v would pick it
            let c: [f64; 2] = [5.0, 2.886751345948129];
            let dir = [c[0] - v[0], c[1] - v[1]];
            let len = (dir[0] * dir[0] + dir[1] * dir[1]).sqrt();
            pts.push(vec![v[0] + dir[0] / len * 9.97, v[1] + dir[1] / len * 9.97]);
        }
        pts.extend(tri.iter().cloned());
        let a = set(p, vec![1.0, 1.0], pts);
        let eps = a.diameter() - 9.95;
        let found = extract_simplex(&a, 2, eps).unwrap();
        let w = found.witness().expect("the triangle is a witness");
        assert!(w.min_edge >= 9.95);
    }

    #[test]
    fn simplex_rejects_bad_arguments() {
        let a = square();
        assert!(extract_simplex(&a, 0, 0.5).is_err());
        assert!(extract_simplex(&a, 2, 0.0).is_err());
        assert!(extract_simplex(&a, 2, 2.0).is_err());
    }

    #[test]
    fn separated_examples() {
        let a = square();
        assert_eq!(separated_subset(&a, 2.0).unwrap(), vec![0]);
        assert_eq!(separated_subset(&a, 1.0).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(separated_subset(&a, 1.2).unwrap(), vec![0, 3]);
        assert!(separated_subset(&a, 0.0).is_err());
    }

    #[test]
    fn diagnostics() {
        let d = chain_diagnostics(2.0, 1, 10_000, 5, 2f64.sqrt(), 0.1);
        assert!(d.heavy_exceeds_m);
        assert!(d.quartic_condition);
        assert!(d.threshold_condition);
        let d = chain_diagnostics(2.0, 3, 16, 2, 2f64.sqrt(), 0.1);
        assert!(!d.heavy_exceeds_m && !d.quartic_condition);
    }
}
