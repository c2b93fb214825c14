//! Generators for the structured families used as test beds: normalized
//! indicator functions of disjoint cells, Rademacher functions on a dyadic
//! grid, and seeded random sets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Point, PointSet, WeightedSpace};

/// Metric facts a family is built to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Expectations {
    /// Common value of every pairwise distance, when the family is equidistant.
    pub pairwise_distance: Option<f64>,
    /// Common norm of every point.
    pub point_norm: Option<f64>,
    /// Closed-form relative radius of the truncation, when known.
    pub truncation_radius: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Family {
    pub name: &'static str,
    pub points: PointSet,
    pub expected: Expectations,
}

/// `((1 − 1/n)^p + (n − 1)/n^p)^(1/p)`: distance from an indicator to the
/// barycenter of `n` unit-cell indicators.
pub fn indicator_truncation_radius(n: usize, p: f64) -> f64 {
    let n = n as f64;
    ((1.0 - 1.0 / n).powf(p) + (n - 1.0) / n.powf(p)).powf(1.0 / p)
}

/// Indicators of `n` disjoint unit-measure cells, `f_i = χ_i / μ_i` with `μ_i = 1`.
///
/// Every pair is at distance `2^(1/p)` and every point has norm one. Only
/// `p ≥ 2` is accepted, the range in which this family is self-extremal.
pub fn indicator_family(n: usize, p: f64) -> Result<Family> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "indicator family needs n >= 2, got {n}"
        )));
    }
    if !(p >= 2.0) {
        return Err(Error::InvalidArgument(format!(
            "indicator family is self-extremal only for p >= 2, got p = {p}"
        )));
    }
    let space = WeightedSpace::counting(p, n)?;
    let points = (0..n)
        .map(|i| {
            let mut v = vec![0.0; n];
            v[i] = 1.0;
            Point::new(v)
        })
        .collect();
    Ok(Family {
        name: "indicator",
        points: PointSet::new(space, points)?,
        expected: Expectations {
            pairwise_distance: Some(2f64.powf(1.0 / p)),
            point_norm: Some(1.0),
            truncation_radius: Some(indicator_truncation_radius(n, p)),
        },
    })
}

/// Default dyadic depth for an `n`-term Rademacher truncation.
pub fn default_levels(n: usize) -> u32 {
    n.max(6) as u32
}

/// The `i`-th Rademacher function on `2^levels` cells: `+1` then `−1` on
/// alternating blocks of `2^(levels − i − 1)` cells.
pub fn rademacher_function(levels: u32, i: u32) -> Result<Point> {
    if i >= levels {
        return Err(Error::InvalidArgument(format!(
            "r_{i} is not representable on 2^{levels} cells"
        )));
    }
    let cells = 1usize << levels;
    let block = 1usize << (levels - i - 1);
    Ok(Point::new(
        (0..cells)
            .map(|c| if (c / block) % 2 == 0 { 1.0 } else { -1.0 })
            .collect(),
    ))
}

/// `r_0, …, r_{n−1}` in `L_p[0, 1]` discretized on `2^levels` dyadic cells.
///
/// Every pair is at distance `2^(1 − 1/p)` and every point has norm one.
pub fn rademacher_family(n: usize, p: f64, levels: u32) -> Result<Family> {
    if n < 1 {
        return Err(Error::InvalidArgument("rademacher family needs n >= 1".into()));
    }
    if !(p > 1.0 && p < 2.0) {
        return Err(Error::InvalidArgument(format!(
            "rademacher family is self-extremal only for 1 < p < 2, got p = {p}"
        )));
    }
    if (levels as usize) < n {
        return Err(Error::InvalidArgument(format!(
            "dyadic depth K = {levels} cannot represent {n} Rademacher functions (need K >= n)"
        )));
    }
    if levels > 20 {
        return Err(Error::InvalidArgument(format!(
            "dyadic depth K = {levels} exceeds the supported maximum of 20"
        )));
    }
    let space = WeightedSpace::dyadic(p, levels)?;
    let points = (0..n as u32)
        .map(|i| rademacher_function(levels, i))
        .collect::<Result<Vec<_>>>()?;
    Ok(Family {
        name: "rademacher",
        points: PointSet::new(space, points)?,
        expected: Expectations {
            pairwise_distance: Some(2f64.powf(1.0 - 1.0 / p)),
            point_norm: Some(1.0),
            truncation_radius: None,
        },
    })
}

/// `|∫ (y − r_k) r_k dμ|` for a probe Rademacher function `r_k`. For any `y`
/// in the span of `r_0, …, r_{k−1}` this equals one, and since `|r_k| = 1`
/// it lower-bounds `‖y − r_k‖_p` by Hölder.
pub fn rademacher_pairing(space: &WeightedSpace, y: &Point, probe: u32) -> Result<f64> {
    let levels = space.dim().trailing_zeros();
    if 1usize << levels != space.dim() {
        return Err(Error::InvalidArgument(
            "rademacher pairing needs a dyadic space".into(),
        ));
    }
    let rk = rademacher_function(levels, probe)?;
    if y.dim() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: y.dim(),
        });
    }
    let integral: f64 = y
        .coeffs()
        .iter()
        .zip(rk.coeffs())
        .zip(space.cells())
        .map(|((a, b), mu)| mu * (a - b) * b)
        .sum();
    Ok(integral.abs())
}

/// Seeded random set: measures uniform in `[0.1, 2]`, coefficients uniform in `coeff_range`.
pub fn random_family(
    seed: u64,
    n: usize,
    cells: usize,
    p: f64,
    coeff_range: (f64, f64),
) -> Result<Family> {
    let (lo, hi) = coeff_range;
    if n == 0 || cells == 0 {
        return Err(Error::InvalidArgument(
            "random family needs at least one point and one cell".into(),
        ));
    }
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "coefficient range ({lo}, {hi}) is empty or unbounded"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let measures: Vec<f64> = (0..cells).map(|_| rng.gen_range(0.1..=2.0)).collect();
    let space = WeightedSpace::new(p, measures)?;
    let points = (0..n)
        .map(|_| Point::new((0..cells).map(|_| rng.gen_range(lo..hi)).collect()))
        .collect();
    Ok(Family {
        name: "random",
        points: PointSet::new(space, points)?,
        expected: Expectations {
            pairwise_distance: None,
            point_norm: None,
            truncation_radius: None,
        },
    })
}
