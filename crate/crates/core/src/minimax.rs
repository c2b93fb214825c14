//! Minimizer for `max_i φ_i(z)` with convex `φ_i`, over the probability
//! simplex or a box.
//!
//! Phase one is a projected normalized-subgradient method with steps
//! `c·D/√k`, running-best tracking and tail averaging. Phase two refines the
//! best point with a trust-region cutting-plane method: every evaluated point
//! contributes one linearization per `φ_i`, the piecewise-linear model is
//! minimized by LP inside a box around the current center, and LP multipliers
//! for the same model over the whole domain give a certified lower bound.

use std::panic::{self, AssertUnwindSafe};
use std::sync::Once;

use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};

use crate::simplex::project_onto_simplex;

pub(crate) trait Objective {
    fn dim(&self) -> usize;
    fn count(&self) -> usize;
    /// Writes `φ_i(z)` into `values` and, when requested, a subgradient of each `φ_i` into `grads`.
    fn eval(&self, z: &[f64], values: &mut [f64], grads: Option<&mut [Vec<f64>]>);
}

#[derive(Debug, Clone)]
pub(crate) enum Domain {
    Simplex,
    Box { lo: Vec<f64>, hi: Vec<f64> },
}

impl Domain {
    fn project(&self, z: &[f64]) -> Vec<f64> {
        match self {
            Domain::Simplex => project_onto_simplex(z),
            Domain::Box { lo, hi } => z
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(x, (l, h))| x.clamp(*l, *h))
                .collect(),
        }
    }

    fn bounds(&self, j: usize) -> (f64, f64) {
        match self {
            Domain::Simplex => (0.0, 1.0),
            Domain::Box { lo, hi } => (lo[j], hi[j]),
        }
    }

    /// `min g·z` over the domain.
    fn min_linear(&self, g: &[f64]) -> f64 {
        match self {
            Domain::Simplex => g.iter().copied().fold(f64::INFINITY, f64::min),
            Domain::Box { lo, hi } => g
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(gj, (l, h))| (gj * l).min(gj * h))
                .sum(),
        }
    }

    /// Characteristic length used to scale subgradient steps.
    fn scale(&self) -> f64 {
        match self {
            Domain::Simplex => std::f64::consts::SQRT_2,
            Domain::Box { lo, hi } => lo
                .iter()
                .zip(hi)
                .map(|(l, h)| (h - l).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct Settings {
    /// Certified gap at which refinement stops.
    pub target: f64,
    pub max_iters: usize,
    pub warm_iters: usize,
    pub step_constant: f64,
    /// A priori lower bound on the optimal value.
    pub lower_bound: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct Outcome {
    pub z: Vec<f64>,
    pub value: f64,
    pub lower_bound: f64,
    pub iterations: usize,
}

struct Cut {
    offset: f64,
    slope: Vec<f64>,
}

impl Cut {
    fn at(&self, z: &[f64]) -> f64 {
        self.offset + self.slope.iter().zip(z).map(|(g, x)| g * x).sum::<f64>()
    }
}

struct Evaluator<'a, O: Objective> {
    obj: &'a O,
    values: Vec<f64>,
    grads: Vec<Vec<f64>>,
}

impl<'a, O: Objective> Evaluator<'a, O> {
    fn new(obj: &'a O) -> Self {
        Self {
            obj,
            values: vec![0.0; obj.count()],
            grads: vec![vec![0.0; obj.dim()]; obj.count()],
        }
    }

    fn value(&mut self, z: &[f64]) -> f64 {
        self.obj.eval(z, &mut self.values, None);
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Max value and the lowest index attaining it.
    fn value_and_grads(&mut self, z: &[f64]) -> (f64, usize) {
        self.obj.eval(z, &mut self.values, Some(&mut self.grads));
        let mut best = 0;
        for (i, &v) in self.values.iter().enumerate() {
            if v > self.values[best] {
                best = i;
            }
        }
        (self.values[best], best)
    }

    fn push_cuts(&self, z: &[f64], cuts: &mut Vec<Cut>) {
        for (v, g) in self.values.iter().zip(&self.grads) {
            let gz: f64 = g.iter().zip(z).map(|(a, b)| a * b).sum();
            cuts.push(Cut {
                offset: v - gz,
                slope: g.clone(),
            });
        }
    }
}

pub(crate) fn minimize<O: Objective>(
    obj: &O,
    domain: &Domain,
    starts: &[Vec<f64>],
    settings: &Settings,
) -> Outcome {
    let mut ev = Evaluator::new(obj);
    let dim = obj.dim();
    let mut iterations = 0usize;

    let mut best_z = starts[0].clone();
    let mut best_f = ev.value(&best_z);

    // phase one
    let step_base = settings.step_constant * 0.5 * domain.scale();
    let per_start = (settings.warm_iters / starts.len().max(1)).max(1);
    for start in starts {
        let mut z = domain.project(start);
        let mut avg = vec![0.0; dim];
        let mut avg_count = 0usize;
        for k in 1..=per_start {
            if iterations >= settings.max_iters {
                break;
            }
            iterations += 1;
            let (f, i) = ev.value_and_grads(&z);
            if f < best_f {
                best_f = f;
                best_z = z.clone();
            }
            let g = &ev.grads[i];
            let gnorm = g.iter().map(|x| x * x).sum::<f64>().sqrt();
            if gnorm == 0.0 {
                break;
            }
            let step = step_base / (k as f64).sqrt() / gnorm;
            let trial: Vec<f64> = z.iter().zip(g).map(|(x, gi)| x - step * gi).collect();
            z = domain.project(&trial);
            if 2 * k > per_start {
                avg_count += 1;
                for (a, x) in avg.iter_mut().zip(&z) {
                    *a += (x - *a) / avg_count as f64;
                }
            }
        }
        if avg_count > 0 {
            let avg = domain.project(&avg);
            let f = ev.value(&avg);
            if f < best_f {
                best_f = f;
                best_z = avg;
            }
        }
    }

    let mut lower = settings.lower_bound.min(best_f);
    if best_f - lower <= settings.target {
        return Outcome {
            z: best_z,
            value: best_f,
            lower_bound: lower,
            iterations,
        };
    }

    // phase two
    let mut cuts: Vec<Cut> = Vec::new();
    let (f, _) = ev.value_and_grads(&best_z);
    best_f = best_f.min(f);
    ev.push_cuts(&best_z, &mut cuts);

    let max_cuts = (30 * obj.count()).max(60 + 4 * dim);
    let mut radius = 0.25 * domain.scale();
    let min_radius = 1e-13 * domain.scale().max(1.0);
    let mut stalls = 0usize;

    while iterations < settings.max_iters {
        iterations += 1;

        let Some((trial, model)) = solve_model(&cuts, domain, &best_z, best_f, radius) else {
            break;
        };
        let binding = trial.iter().zip(&best_z).enumerate().any(|(j, (x, c))| {
            let (lo, hi) = domain.bounds(j);
            (x - c).abs() >= radius * (1.0 - 1e-9) && *x > lo + 1e-12 && *x < hi - 1e-12
        });
        // an unconstrained step means the box model value estimates the
        // global one; confirm with a certified bound before stopping
        if binding || best_f - model <= settings.target {
            if let Some(b) = dual_bound(&cuts, domain, &best_z, best_f, radius) {
                lower = lower.max(b).min(best_f);
            }
        }
        if best_f - lower <= settings.target {
            break;
        }

        let predicted = best_f - model;
        let trial = domain.project(&trial);
        let (f, _) = ev.value_and_grads(&trial);
        ev.push_cuts(&trial, &mut cuts);

        let improvement = best_f - f;
        if improvement > 0.0 && improvement >= 0.1 * predicted {
            best_f = f;
            best_z = trial;
            if binding {
                radius *= 2.0;
            }
            stalls = 0;
        } else {
            if improvement <= 0.0 {
                radius = (radius * 0.5).max(min_radius);
            }
            if improvement > 0.0 {
                best_f = f;
                best_z = trial;
            }
            stalls += 1;
        }
        if predicted <= 1e-15 * best_f.abs().max(1.0) && !binding {
            if radius <= min_radius {
                break;
            }
            // the model looks flat at this resolution; look closer
            radius = (radius * 0.1).max(min_radius);
        }
        if stalls > 200 {
            break;
        }

        if cuts.len() > max_cuts {
            prune(&mut cuts, &best_z, best_f, max_cuts);
        }
    }

    if best_f - lower > settings.target {
        if let Some(b) = dual_bound(&cuts, domain, &best_z, best_f, radius) {
            lower = lower.max(b);
        }
    }
    Outcome {
        z: best_z,
        value: best_f,
        lower_bound: lower.min(best_f),
        iterations,
    }
}

/// Drops the cuts that are slackest at the current center.
fn prune(cuts: &mut Vec<Cut>, center: &[f64], f_center: f64, keep: usize) {
    let mut slack: Vec<(f64, usize)> = cuts
        .iter()
        .enumerate()
        .map(|(i, c)| (f_center - c.at(center), i))
        .collect();
    slack.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.cmp(&a.1)));
    let mut retained: Vec<usize> = slack.iter().take(keep * 2 / 3).map(|&(_, i)| i).collect();
    retained.sort_unstable();
    let old = std::mem::take(cuts);
    let mut old: Vec<Option<Cut>> = old.into_iter().map(Some).collect();
    for i in retained {
        cuts.push(old[i].take().expect("retained indices are distinct"));
    }
}

/// The cut model seen from a trust box: cut values at the center, the cuts
/// that can bind inside the box, and the scale `σ` of the largest change any
/// cut makes across it.
struct LocalModel {
    at_center: Vec<f64>,
    kept: Vec<usize>,
    sigma: f64,
    radius: f64,
    center: Vec<f64>,
}

impl LocalModel {
    fn new(cuts: &[Cut], center: &[f64], radius: f64) -> Self {
        let reach: Vec<f64> = cuts
            .iter()
            .map(|c| radius * c.slope.iter().map(|g| g.abs()).sum::<f64>())
            .collect();
        let at_center: Vec<f64> = cuts.iter().map(|c| c.at(center)).collect();
        // no cut can push the model in the box below this
        let floor = at_center
            .iter()
            .zip(&reach)
            .map(|(v, r)| v - r)
            .fold(f64::NEG_INFINITY, f64::max);
        let kept = (0..cuts.len())
            .filter(|&c| at_center[c] + reach[c] >= floor)
            .collect();
        let sigma = reach.iter().copied().fold(0.0, f64::max);
        Self {
            at_center,
            kept,
            sigma: if sigma > 0.0 { sigma } else { 1.0 },
            radius,
            center: center.to_vec(),
        }
    }

    /// Range of the scaled step `δ_j = (z_j − center_j)/radius`.
    fn step_bounds(&self, domain: &Domain, j: usize) -> (f64, f64) {
        let (lo, hi) = domain.bounds(j);
        let c = self.center[j];
        let r = self.radius;
        (
            ((lo.max(c - r) - c) / r).min(0.0),
            ((hi.min(c + r) - c) / r).max(0.0),
        )
    }
}

/// Lower bound on the minimum of the cut model over the whole domain, read
/// off a multiplier vector `λ ∈ Δ`: `Σ λ_c offset_c + min_z Σ λ_c slope_c·z`.
/// The bound is valid for any `λ` on the simplex, so LP round-off costs
/// tightness only. The multipliers come from the dual of the trust-box model
/// in the same scaled coordinates as [`solve_model`], which keeps them
/// accurate close to the optimum.
fn dual_bound(
    cuts: &[Cut],
    domain: &Domain,
    center: &[f64],
    f_center: f64,
    radius: f64,
) -> Option<f64> {
    let dim = center.len();
    let local = LocalModel::new(cuts, center, radius);
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let lambda: Vec<(usize, Variable)> = local
        .kept
        .iter()
        .map(|&c| (c, lp.add_var((local.at_center[c] - f_center) / local.sigma, (0.0, f64::INFINITY))))
        .collect();
    lp.add_constraint(
        lambda.iter().map(|&(_, v)| (v, 1.0)).collect::<Vec<_>>().as_slice(),
        ComparisonOp::Eq,
        1.0,
    );
    // multiplier of Σδ = 0 on the simplex
    let nu = matches!(domain, Domain::Simplex)
        .then(|| lp.add_var(0.0, (f64::NEG_INFINITY, f64::INFINITY)));
    for j in 0..dim {
        let (lo, hi) = local.step_bounds(domain, j);
        let w = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
        // w ≤ b·(Σ λ_c h_cj + ν) for b at both ends of the step range
        for b in [lo, hi] {
            let mut terms = vec![(w, 1.0)];
            if b != 0.0 {
                for &(c, v) in &lambda {
                    let h = cuts[c].slope[j] * radius / local.sigma;
                    if h != 0.0 {
                        terms.push((v, -b * h));
                    }
                }
                if let Some(nu) = nu {
                    terms.push((nu, -b));
                }
            }
            lp.add_constraint(terms.as_slice(), ComparisonOp::Le, 0.0);
        }
    }
    quiet_lp_panics();
    let sol = panic::catch_unwind(AssertUnwindSafe(|| lp.solve())).ok()?.ok()?;
    let raw: Vec<(usize, f64)> = lambda
        .iter()
        .map(|&(c, v)| (c, sol.var_value(v).max(0.0)))
        .collect();
    let total: f64 = raw.iter().map(|r| r.1).sum();
    if !(total > 0.0) {
        return None;
    }
    let mut offset = 0.0;
    let mut slope = vec![0.0; dim];
    for &(c, l) in &raw {
        let l = l / total;
        if l == 0.0 {
            continue;
        }
        offset += l * cuts[c].offset;
        for (s, g) in slope.iter_mut().zip(&cuts[c].slope) {
            *s += l * g;
        }
    }
    let bound = offset + domain.min_linear(&slope);
    bound.is_finite().then_some(bound)
}

/// Keeps panics raised inside the LP backend out of stderr; they are caught
/// and handled as failed solves. Other panics reach the previous hook.
fn quiet_lp_panics() {
    static INSTALL: Once = Once::new();
    INSTALL.call_once(|| {
        let previous = panic::take_hook();
        panic::set_hook(Box::new(move |info| {
            let from_lp = info.location().is_some_and(|l| l.file().contains("minilp"));
            if !from_lp {
                previous(info);
            }
        }));
    });
}

/// Minimizes the cutting-plane model over the domain intersected with the box
/// `‖z − center‖_∞ ≤ radius`. Returns the minimizer and the model value there.
///
/// The LP is posed in local coordinates, `z = center + radius·δ` and
/// `s = f_center + σ·t` with `σ` the largest change any cut can make across
/// the box, so the backend's absolute tolerances act relative to the step.
fn solve_model(
    cuts: &[Cut],
    domain: &Domain,
    center: &[f64],
    f_center: f64,
    radius: f64,
) -> Option<(Vec<f64>, f64)> {
    let dim = center.len();
    let local = LocalModel::new(cuts, center, radius);
    if local.kept.is_empty() {
        return None;
    }
    let mut lp = Problem::new(OptimizationDirection::Minimize);
    let vars: Vec<Variable> = (0..dim)
        .map(|j| lp.add_var(0.0, local.step_bounds(domain, j)))
        .collect();
    let t = lp.add_var(1.0, (f64::NEG_INFINITY, f64::INFINITY));
    if matches!(domain, Domain::Simplex) {
        lp.add_constraint(
            vars.iter().map(|&v| (v, 1.0)).collect::<Vec<_>>().as_slice(),
            ComparisonOp::Eq,
            0.0,
        );
    }
    for &c in &local.kept {
        let mut terms: Vec<(Variable, f64)> = Vec::with_capacity(dim + 1);
        terms.push((t, 1.0));
        for (&x, &g) in vars.iter().zip(&cuts[c].slope) {
            if g != 0.0 {
                terms.push((x, -g * radius / local.sigma));
            }
        }
        lp.add_constraint(
            terms.as_slice(),
            ComparisonOp::Ge,
            (local.at_center[c] - f_center) / local.sigma,
        );
    }
    quiet_lp_panics();
    // the LP backend can panic on a numerically singular basis; treat that
    // like any other failed solve
    let sol = panic::catch_unwind(AssertUnwindSafe(|| lp.solve())).ok()?.ok()?;
    let z: Vec<f64> = vars
        .iter()
        .enumerate()
        .map(|(j, &v)| {
            let (lo, hi) = domain.bounds(j);
            (center[j] + radius * *sol.var_value(v)).clamp(lo, hi)
        })
        .collect();
    let model = cuts
        .iter()
        .map(|c| c.at(&z))
        .fold(f64::NEG_INFINITY, f64::max);
    Some((z, model))
}
