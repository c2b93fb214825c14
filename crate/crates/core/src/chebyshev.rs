//! Relative and ambient Chebyshev radii, and the equidistant-core reduction.
//!
//! The relative radius of a finite set `A = {x_1, …, x_n}` is
//! `min_{t ∈ Δ} max_i ‖x_i − Σ_j t_j x_j‖`, a convex minimax problem over the
//! weight simplex. The ambient radius drops the simplex constraint and lets
//! the center range over the whole space.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::minimax::{self, Domain, Objective, Settings};
use crate::simplex::SimplexWeights;
use crate::space::{Point, PointSet};

/// Number of extra random starts used when a seed is configured.
const RANDOM_RESTARTS: usize = 3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    /// Certified optimality gap required for convergence, in norm units.
    pub tolerance: f64,
    /// Distance-to-radius slack for membership in the active set.
    pub active_tol: f64,
    pub max_iters: usize,
    /// Multiplier on the `1/√k` subgradient step.
    pub step_constant: f64,
    /// Enables random restarts of the subgradient phase when set.
    pub seed: Option<u64>,
    /// Self-extremality classification tolerance on `r(A)/d(A)`.
    pub class_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-6,
            active_tol: 1e-5,
            max_iters: 50_000,
            step_constant: 1.0,
            seed: None,
            class_tol: 1e-3,
        }
    }
}

impl SolverConfig {
    fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0 && self.tolerance.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if !(self.active_tol > 0.0 && self.active_tol.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "active_tol must be positive, got {}",
                self.active_tol
            )));
        }
        if self.max_iters == 0 {
            return Err(Error::InvalidArgument("max_iters must be positive".into()));
        }
        if !(self.step_constant > 0.0 && self.step_constant.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "step constant must be positive, got {}",
                self.step_constant
            )));
        }
        Ok(())
    }

    fn settings(&self, lower_bound: f64) -> Settings {
        Settings {
            target: (self.tolerance * 1e-2).max(1e-12),
            max_iters: self.max_iters,
            warm_iters: self.max_iters.min(400),
            step_constant: self.step_constant,
            lower_bound,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevSolution {
    pub radius: f64,
    pub center: Point,
    /// Barycentric coordinates of the center; absent for ambient solutions,
    /// whose center need not lie in the convex hull.
    pub weights: Option<SimplexWeights>,
    pub iterations: usize,
    /// Certified upper bound on `radius − optimum`.
    pub gap_estimate: f64,
}

impl ChebyshevSolution {
    /// Distance from each point to the center.
    pub fn distances(&self, points: &PointSet) -> Vec<f64> {
        (0..points.len())
            .map(|i| points.distance_to(i, &self.center))
            .collect()
    }
}

/// `φ_i(t) = ‖x_i − Σ_j t_j x_j‖` as a function of the barycentric weights.
struct HullObjective<'a> {
    points: &'a PointSet,
}

/// `φ_i(y) = ‖x_i − y‖` as a function of the center's coefficients.
struct FreeObjective<'a> {
    points: &'a PointSet,
}

/// Gradient of `‖v‖` with respect to `v`; zero at `v = 0` and in zero coordinates.
fn norm_gradient(points: &PointSet, v: &[f64], norm: f64, out: &mut [f64]) {
    let space = points.space();
    if norm == 0.0 {
        out.iter_mut().for_each(|g| *g = 0.0);
        return;
    }
    let e = space.p() - 1.0;
    for ((g, vk), mu) in out.iter_mut().zip(v).zip(space.cells()) {
        *g = if *vk == 0.0 {
            0.0
        } else {
            mu * vk.signum() * (vk.abs() / norm).powf(e)
        };
    }
}

impl Objective for HullObjective<'_> {
    fn dim(&self) -> usize {
        self.points.len()
    }

    fn count(&self) -> usize {
        self.points.len()
    }

    fn eval(&self, t: &[f64], values: &mut [f64], grads: Option<&mut [Vec<f64>]>) {
        let pts = self.points;
        let space = pts.space();
        let y = pts.combine_raw(t);
        let mut v = vec![0.0; space.dim()];
        let mut dv = vec![0.0; space.dim()];
        let mut grads = grads;
        for i in 0..pts.len() {
            for ((vk, xk), yk) in v.iter_mut().zip(pts.get(i).coeffs()).zip(&y) {
                *vk = xk - yk;
            }
            let norm = space.norm_unchecked(&v);
            values[i] = norm;
            if let Some(grads) = grads.as_deref_mut() {
                norm_gradient(pts, &v, norm, &mut dv);
                for (j, gj) in grads[i].iter_mut().enumerate() {
                    *gj = -pts
                        .get(j)
                        .coeffs()
                        .iter()
                        .zip(&dv)
                        .map(|(x, d)| x * d)
                        .sum::<f64>();
                }
            }
        }
    }
}

impl Objective for FreeObjective<'_> {
    fn dim(&self) -> usize {
        self.points.space().dim()
    }

    fn count(&self) -> usize {
        self.points.len()
    }

    fn eval(&self, y: &[f64], values: &mut [f64], grads: Option<&mut [Vec<f64>]>) {
        let pts = self.points;
        let space = pts.space();
        let mut v = vec![0.0; space.dim()];
        let mut grads = grads;
        for i in 0..pts.len() {
            for ((vk, xk), yk) in v.iter_mut().zip(pts.get(i).coeffs()).zip(y) {
                *vk = xk - yk;
            }
            let norm = space.norm_unchecked(&v);
            values[i] = norm;
            if let Some(grads) = grads.as_deref_mut() {
                norm_gradient(pts, &v, norm, &mut grads[i]);
                grads[i].iter_mut().for_each(|g| *g = -*g);
            }
        }
    }
}

fn trivial_solution(points: &PointSet) -> ChebyshevSolution {
    ChebyshevSolution {
        radius: 0.0,
        center: points.get(0).clone(),
        weights: Some(SimplexWeights::vertex(points.len(), 0)),
        iterations: 0,
        gap_estimate: 0.0,
    }
}

fn finish(
    solution: ChebyshevSolution,
    converged: bool,
) -> Result<ChebyshevSolution> {
    if converged {
        Ok(solution)
    } else {
        Err(Error::NotConverged(Box::new(solution)))
    }
}

/// Relative Chebyshev radius and center of `points` with respect to their convex hull.
///
/// Non-convergence within `cfg.max_iters` is returned as
/// [`Error::NotConverged`] carrying the best iterate found.
pub fn relative_radius(points: &PointSet, cfg: &SolverConfig) -> Result<ChebyshevSolution> {
    cfg.validate()?;
    let n = points.len();
    let diameter = points.diameter();
    if diameter == 0.0 {
        return Ok(trivial_solution(points));
    }

    let mut starts = vec![SimplexWeights::uniform(n).as_slice().to_vec()];
    if let Some(seed) = cfg.seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..RANDOM_RESTARTS {
            let raw: Vec<f64> = (0..n).map(|_| -rng.gen_range(f64::EPSILON..1.0).ln()).collect();
            let s: f64 = raw.iter().sum();
            starts.push(raw.into_iter().map(|x| x / s).collect());
        }
    }

    let objective = HullObjective { points };
    // any center is at distance ≥ d/2 from one end of a diameter pair
    let outcome = minimax::minimize(
        &objective,
        &Domain::Simplex,
        &starts,
        &cfg.settings(diameter / 2.0),
    );

    let weights = SimplexWeights::normalized(outcome.z.clone())?;
    let center = points.combine(&weights)?;
    let radius = (0..n)
        .map(|i| points.distance_to(i, &center))
        .fold(0.0f64, f64::max);
    let gap = (radius - outcome.lower_bound).max(0.0);
    finish(
        ChebyshevSolution {
            radius,
            center,
            weights: Some(weights),
            iterations: outcome.iterations,
            gap_estimate: gap,
        },
        gap <= cfg.tolerance,
    )
}

/// Chebyshev radius of `points` with the center ranging over the whole space.
///
/// Warm-started from the barycenter; the relative center is also kept as a
/// candidate, so the result never exceeds the relative radius.
pub fn ambient_radius(points: &PointSet, cfg: &SolverConfig) -> Result<ChebyshevSolution> {
    cfg.validate()?;
    let diameter = points.diameter();
    if diameter == 0.0 {
        let mut s = trivial_solution(points);
        s.weights = None;
        return Ok(s);
    }
    let relative = match relative_radius(points, cfg) {
        Ok(s) => s,
        Err(Error::NotConverged(s)) => *s,
        Err(e) => return Err(e),
    };

    // every center with radius ≤ R lies within R·μ_k^(-1/p) of each point in cell k
    let space = points.space();
    let bound = relative.radius;
    let (mut lo, mut hi) = (
        vec![f64::NEG_INFINITY; space.dim()],
        vec![f64::INFINITY; space.dim()],
    );
    for pt in points.points() {
        for (k, (x, mu)) in pt.coeffs().iter().zip(space.cells()).enumerate() {
            let w = bound * mu.powf(-1.0 / space.p());
            lo[k] = lo[k].max(x - w);
            hi[k] = hi[k].min(x + w);
        }
    }
    for (l, h) in lo.iter_mut().zip(hi.iter_mut()) {
        if *l > *h {
            let m = 0.5 * (*l + *h);
            *l = m;
            *h = m;
        }
    }
    let domain = Domain::Box { lo, hi };
    let objective = FreeObjective { points };
    let starts = vec![
        points.barycenter().into_inner(),
        relative.center.coeffs().to_vec(),
    ];
    let outcome = minimax::minimize(&objective, &domain, &starts, &cfg.settings(diameter / 2.0));

    let center = if outcome.value <= relative.radius {
        Point::new(outcome.z.clone())
    } else {
        relative.center.clone()
    };
    let radius = (0..points.len())
        .map(|i| points.distance_to(i, &center))
        .fold(0.0f64, f64::max);
    let gap = (radius - outcome.lower_bound).max(0.0);
    finish(
        ChebyshevSolution {
            radius,
            center,
            weights: None,
            iterations: outcome.iterations + relative.iterations,
            gap_estimate: gap,
        },
        gap <= cfg.tolerance,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquidistantCore {
    /// Indices into the input set, ascending.
    pub indices: Vec<usize>,
    #[serde(skip)]
    pub core: PointSet,
    pub solution: ChebyshevSolution,
    /// Relative radius of the full input set.
    pub input_radius: f64,
    pub rounds: usize,
    /// Set when the surviving index set repeated; the round with the largest
    /// radius is returned in that case.
    pub cycled: bool,
}

impl EquidistantCore {
    /// `max_i |‖y_i − b‖ − r(B)|` over the core.
    pub fn equidistance_defect(&self) -> f64 {
        self.solution
            .distances(&self.core)
            .iter()
            .map(|d| (d - self.solution.radius).abs())
            .fold(0.0, f64::max)
    }
}

fn solve_tight(points: &PointSet, cfg: &SolverConfig) -> Result<ChebyshevSolution> {
    match relative_radius(points, cfg) {
        Ok(s) => Ok(s),
        Err(Error::NotConverged(s)) if s.gap_estimate <= cfg.active_tol * 1e-2 => Ok(*s),
        Err(e) => Err(e),
    }
}

/// Shrinks `points` to a subset whose members are all at the relative radius
/// from its relative center, by repeatedly discarding points strictly inside
/// the Chebyshev ball and re-solving.
pub fn equidistant_core(points: &PointSet, cfg: &SolverConfig) -> Result<EquidistantCore> {
    cfg.validate()?;
    if points.len() < 2 {
        return Err(Error::TooFewPoints {
            what: "equidistant core",
            needed: 2,
            found: points.len(),
        });
    }
    // active-set decisions need a center much sharper than the membership slack
    let inner = SolverConfig {
        tolerance: cfg.tolerance.min(cfg.active_tol * 1e-3),
        ..cfg.clone()
    };

    let mut current: Vec<usize> = (0..points.len()).collect();
    let mut seen: Vec<Vec<usize>> = Vec::new();
    let mut best: Option<(Vec<usize>, ChebyshevSolution)> = None;
    let mut input_radius = None;
    let mut rounds = 0;

    loop {
        rounds += 1;
        let sub = points.subset(&current)?;
        let sol = solve_tight(&sub, &inner)?;
        input_radius.get_or_insert(sol.radius);

        let keep: Vec<usize> = current
            .iter()
            .enumerate()
            .filter(|&(local, _)| sub.distance_to(local, &sol.center) >= sol.radius - cfg.active_tol)
            .map(|(_, &global)| global)
            .collect();

        if best.as_ref().is_none_or(|(_, b)| sol.radius > b.radius) {
            best = Some((current.clone(), sol.clone()));
        }

        if keep == current {
            return Ok(EquidistantCore {
                core: sub,
                indices: current,
                solution: sol,
                input_radius: input_radius.unwrap_or(0.0),
                rounds,
                cycled: false,
            });
        }
        seen.push(current);
        if seen.contains(&keep) {
            let (indices, solution) = best.expect("at least one round ran");
            return Ok(EquidistantCore {
                core: points.subset(&indices)?,
                indices,
                solution,
                input_radius: input_radius.unwrap_or(0.0),
                rounds,
                cycled: true,
            });
        }
        current = keep;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::WeightedSpace;

    fn set(p: f64, cells: Vec<f64>, pts: Vec<Vec<f64>>) -> PointSet {
        let s = WeightedSpace::new(p, cells).unwrap();
        PointSet::new(s, pts.into_iter().map(Point::new).collect()).unwrap()
    }

    fn unit_vectors(p: f64, n: usize) -> PointSet {
        let pts = (0..n)
            .map(|i| (0..n).map(|k| if k == i { 1.0 } else { 0.0 }).collect())
            .collect();
        set(p, vec![1.0; n], pts)
    }

    #[test]
    fn singleton_has_zero_radius() {
        let a = set(2.0, vec![1.0, 1.0], vec![vec![3.0, -1.0]]);
        let s = relative_radius(&a, &SolverConfig::default()).unwrap();
        assert_eq!(s.radius, 0.0);
        assert_eq!(s.center.coeffs(), &[3.0, -1.0]);
        let s = ambient_radius(&a, &SolverConfig::default()).unwrap();
        assert_eq!(s.radius, 0.0);
    }

    #[test]
    fn two_points_give_midpoint() {
        for p in [1.2, 1.5, 2.0, 3.0, 7.0] {
            let a = set(p, vec![1.0], vec![vec![0.0], vec![1.0]]);
            let s = relative_radius(&a, &SolverConfig::default()).unwrap();
            assert!((s.radius - 0.5).abs() < 1e-9, "p={p}: {}", s.radius);
            assert!((s.center.coeffs()[0] - 0.5).abs() < 1e-9);
            let w = s.weights.unwrap();
            assert!((w.as_slice()[0] - 0.5).abs() < 1e-9);
            let amb = ambient_radius(&a, &SolverConfig::default()).unwrap();
            assert!((amb.radius - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn three_unit_vectors() {
        let a = unit_vectors(2.0, 3);
        let expected = 6f64.sqrt() / 3.0;
        let s = relative_radius(&a, &SolverConfig::default()).unwrap();
        assert!((s.radius - expected).abs() < 1e-6, "{}", s.radius);
        for c in s.center.coeffs() {
            assert!((c - 1.0 / 3.0).abs() < 1e-5);
        }
        let amb = ambient_radius(&a, &SolverConfig::default()).unwrap();
        assert!((amb.radius - expected).abs() < 1e-6, "{}", amb.radius);
    }

    #[test]
    fn center_matches_weights() {
        let a = set(
            1.5,
            vec![0.5, 1.5, 1.0],
            vec![
                vec![0.3, -1.0, 2.0],
                vec![1.2, 0.4, -0.7],
                vec![-0.5, 0.9, 0.1],
                vec![0.0, 0.0, 1.0],
            ],
        );
        let s = relative_radius(&a, &SolverConfig::default()).unwrap();
        let c = a.combine(s.weights.as_ref().unwrap()).unwrap();
        for (x, y) in c.coeffs().iter().zip(s.center.coeffs()) {
            assert!((x - y).abs() < 1e-10);
        }
        let max = s.distances(&a).into_iter().fold(0.0, f64::max);
        assert!((max - s.radius).abs() <= 1e-12);
        assert!(s.gap_estimate <= 1e-6);
    }

    #[test]
    fn core_drops_interior_point() {
        let a = set(2.0, vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![-1.0, 0.0], vec![0.0, 0.0]]);
        let core = equidistant_core(&a, &SolverConfig::default()).unwrap();
        assert_eq!(core.indices, vec![0, 1]);
        assert!((core.solution.radius - 1.0).abs() < 1e-8);
        assert!(core.solution.center.coeffs().iter().all(|c| c.abs() < 1e-8));
        assert!(!core.cycled);
    }

    #[test]
    fn core_of_pair_and_symmetric_triple() {
        let a = set(3.0, vec![1.0], vec![vec![0.0], vec![2.0]]);
        let core = equidistant_core(&a, &SolverConfig::default()).unwrap();
        assert_eq!(core.indices, vec![0, 1]);

        let a = unit_vectors(2.0, 3);
        let core = equidistant_core(&a, &SolverConfig::default()).unwrap();
        assert_eq!(core.indices, vec![0, 1, 2]);
        assert!((core.solution.radius - 6f64.sqrt() / 3.0).abs() < 1e-6);
        assert!(core.equidistance_defect() <= 1e-5);
    }

    #[test]
    fn core_needs_two_points() {
        let a = set(2.0, vec![1.0], vec![vec![0.0]]);
        assert!(matches!(
            equidistant_core(&a, &SolverConfig::default()),
            Err(Error::TooFewPoints { .. })
        ));
    }

    #[test]
    fn tiny_budget_reports_non_convergence() {
        // asymmetric, so the barycenter start is far from optimal
        let a = crate::gallery::random_family(5, 6, 4, 1.5, (-1.0, 1.0)).unwrap().points;
        let cfg = SolverConfig {
            max_iters: 3,
            ..SolverConfig::default()
        };
        match relative_radius(&a, &cfg) {
            Err(Error::NotConverged(s)) => {
                assert!(s.gap_estimate > cfg.tolerance);
                assert!(s.radius > 0.0);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
    }

    #[test]
    fn invalid_config_rejected() {
        let a = unit_vectors(2.0, 2);
        let cfg = SolverConfig {
            tolerance: 0.0,
            ..SolverConfig::default()
        };
        assert!(matches!(relative_radius(&a, &cfg), Err(Error::InvalidArgument(_))));
    }
}
