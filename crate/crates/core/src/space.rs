//! Weighted p-norm geometry over a finite list of measured cells.
//!
//! A [`WeightedSpace`] stands in for `L_p(Ω)` with `Ω` split into finitely many
//! cells of positive measure. Points are coefficient vectors, one value per
//! cell, so the norm is `(Σ_k μ_k |v_k|^p)^(1/p)`. Unit measures give `ℓ_p^n`,
//! dyadic measures `2^-K` give step functions in `L_p[0, 1]`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::simplex::SimplexWeights;
use crate::williams_wells::alpha_exponent;

/// Largest exponent accepted by [`WeightedSpace::new`].
pub const MAX_P: f64 = 64.0;

/// Absolute tolerance for pure arithmetic identities.
pub const IDENTITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace", into = "RawSpace")]
pub struct WeightedSpace {
    p: f64,
    alpha: f64,
    cells: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSpace {
    p: f64,
    cells: Vec<f64>,
}

impl TryFrom<RawSpace> for WeightedSpace {
    type Error = Error;

    fn try_from(raw: RawSpace) -> Result<Self> {
        WeightedSpace::new(raw.p, raw.cells)
    }
}

impl From<WeightedSpace> for RawSpace {
    fn from(space: WeightedSpace) -> Self {
        RawSpace {
            p: space.p,
            cells: space.cells,
        }
    }
}

impl WeightedSpace {
    pub fn new(p: f64, cells: Vec<f64>) -> Result<Self> {
        if !(p > 1.0 && p <= MAX_P) {
            return Err(Error::ExponentOutOfRange(p));
        }
        if cells.is_empty() {
            return Err(Error::NoCells);
        }
        if let Some((index, &value)) = cells
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m > 0.0))
        {
            return Err(Error::InvalidMeasure { index, value });
        }
        Ok(Self {
            p,
            alpha: alpha_exponent(p)?,
            cells,
        })
    }

    /// `n` cells of unit measure, i.e. `ℓ_p^n`.
    pub fn counting(p: f64, n: usize) -> Result<Self> {
        Self::new(p, vec![1.0; n])
    }

    /// `2^k` cells of measure `2^-k`, step functions on the dyadic grid of `[0, 1]`.
    pub fn dyadic(p: f64, k: u32) -> Result<Self> {
        let n = 1usize << k;
        Self::new(p, vec![1.0 / n as f64; n])
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// The Williams–Wells exponent attached to `p`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn dim(&self) -> usize {
        self.cells.len()
    }

    fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        if let Some(i) = v.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(())
    }

    pub fn norm(&self, v: &Point) -> Result<f64> {
        self.check(v.coeffs())?;
        Ok(self.norm_unchecked(v.coeffs()))
    }

    pub fn distance(&self, a: &Point, b: &Point) -> Result<f64> {
        self.check(a.coeffs())?;
        self.check(b.coeffs())?;
        Ok(self.distance_unchecked(a.coeffs(), b.coeffs()))
    }

    /// Norm of a raw coefficient slice. Scales by the largest entry first so
    /// large exponents do not overflow.
    pub(crate) fn norm_unchecked(&self, v: &[f64]) -> f64 {
        self.norm_of(v.iter().copied())
    }

    pub(crate) fn distance_unchecked(&self, a: &[f64], b: &[f64]) -> f64 {
        self.norm_of(a.iter().zip(b).map(|(x, y)| x - y))
    }

    fn norm_of<I: Iterator<Item = f64> + Clone>(&self, v: I) -> f64 {
        let scale = v.clone().fold(0.0f64, |m, x| m.max(x.abs()));
        if scale == 0.0 {
            return 0.0;
        }
        let sum: f64 = v
            .zip(&self.cells)
            .map(|(x, mu)| mu * (x.abs() / scale).powf(self.p))
            .sum();
        scale * sum.powf(1.0 / self.p)
    }

    /// `‖a - b‖^α` for the space's Williams–Wells exponent.
    pub(crate) fn distance_pow_alpha(&self, a: &[f64], b: &[f64]) -> f64 {
        self.distance_unchecked(a, b).powf(self.alpha)
    }
}

/// Coefficients of a step function, one value per cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Self(coeffs)
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![0.0; dim])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|x| c * x).collect())
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// A non-empty finite subset of a [`WeightedSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    space: WeightedSpace,
    points: Vec<Point>,
}

impl PointSet {
    pub fn new(space: WeightedSpace, points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySet);
        }
        for pt in &points {
            space.check(pt.coeffs())?;
        }
        Ok(Self { space, points })
    }

    pub fn space(&self) -> &WeightedSpace {
        &self.space
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// The sub-family at `indices`, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        let points = indices.iter().map(|&i| self.points[i].clone()).collect();
        Self::new(self.space.clone(), points)
    }

    /// Every point multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(
            self.space.clone(),
            self.points.iter().map(|p| p.scaled(c)).collect(),
        )
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.space
            .distance_unchecked(self.points[i].coeffs(), self.points[j].coeffs())
    }

    pub fn distance_to(&self, i: usize, y: &Point) -> f64 {
        self.space.distance_unchecked(self.points[i].coeffs(), y.coeffs())
    }

    /// Largest pairwise distance; zero for a singleton.
    pub fn diameter(&self) -> f64 {
        let n = self.len();
        let mut d = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                d = d.max(self.distance(i, j));
            }
        }
        d
    }

    /// Indices `(i, j)`, `i < j`, of the lexicographically first pair attaining the diameter.
    pub fn diameter_pair(&self) -> Option<(usize, usize)> {
        let n = self.len();
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            for j in i + 1..n {
                let d = self.distance(i, j);
                if best.map_or(true, |(_, _, b)| d > b) {
                    best = Some((i, j, d));
                }
            }
        }
        best.map(|(i, j, _)| (i, j))
    }

    /// The convex combination `Σ_j w_j x_j`.
    pub fn combine(&self, w: &SimplexWeights) -> Result<Point> {
        if w.len() != self.len() {
            return Err(Error::WeightCountMismatch {
                weights: w.len(),
                points: self.len(),
            });
        }
        Ok(Point(self.combine_raw(w.as_slice())))
    }

    pub(crate) fn combine_raw(&self, t: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.space.dim()];
        for (pt, &tj) in self.points.iter().zip(t) {
            if tj == 0.0 {
                continue;
            }
            for (yk, xk) in y.iter_mut().zip(pt.coeffs()) {
                *yk += tj * xk;
            }
        }
        y
    }

    /// Equal-weight barycenter.
    pub fn barycenter(&self) -> Point {
        Point(self.combine_raw(SimplexWeights::uniform(self.len()).as_slice()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zero_vector_has_zero_norm() {
        let s = WeightedSpace::new(2.0, vec![1.0]).unwrap();
        assert_eq!(s.norm(&Point::new(vec![0.0])).unwrap(), 0.0);
    }

    #[test]
    fn norm_examples() {
        let s = WeightedSpace::new(3.0, vec![1.0, 1.0]).unwrap();
        let n = s.norm(&Point::new(vec![1.0, 1.0])).unwrap();
        assert!(approx(n, 2f64.powf(1.0 / 3.0), 1e-15));

        let s = WeightedSpace::new(2.0, vec![0.25; 4]).unwrap();
        let n = s.norm(&Point::new(vec![1.0; 4])).unwrap();
        assert!(approx(n, 1.0, 1e-15));
    }

    #[test]
    fn distance_examples() {
        let s = WeightedSpace::new(2.0, vec![1.0, 1.0]).unwrap();
        let a = Point::new(vec![1.0, 0.0]);
        let b = Point::new(vec![0.0, 1.0]);
        assert_eq!(s.distance(&a, &a).unwrap(), 0.0);
        assert!(approx(s.distance(&a, &b).unwrap(), 2f64.sqrt(), 1e-15));

        let s = WeightedSpace::new(1.5, vec![1.0]).unwrap();
        let d = s
            .distance(&Point::new(vec![2.0]), &Point::new(vec![-1.0]))
            .unwrap();
        assert!(approx(d, 3.0, 1e-14));
    }

    #[test]
    fn rejects_bad_spaces() {
        assert!(matches!(
            WeightedSpace::new(1.0, vec![1.0]),
            Err(Error::ExponentOutOfRange(_))
        ));
        assert!(matches!(
            WeightedSpace::new(f64::INFINITY, vec![1.0]),
            Err(Error::ExponentOutOfRange(_))
        ));
        assert!(matches!(
            WeightedSpace::new(65.0, vec![1.0]),
            Err(Error::ExponentOutOfRange(_))
        ));
        assert!(matches!(WeightedSpace::new(2.0, vec![]), Err(Error::NoCells)));
        assert!(matches!(
            WeightedSpace::new(2.0, vec![1.0, 0.0]),
            Err(Error::InvalidMeasure { index: 1, .. })
        ));
        assert!(WeightedSpace::new(64.0, vec![1.0]).is_ok());
    }

    #[test]
    fn alpha_follows_exponent_rule() {
        assert_eq!(WeightedSpace::counting(2.0, 1).unwrap().alpha(), 2.0);
        assert!(approx(
            WeightedSpace::counting(1.5, 1).unwrap().alpha(),
            3.0,
            1e-12
        ));
        assert_eq!(WeightedSpace::counting(4.0, 1).unwrap().alpha(), 4.0);
    }

    #[test]
    fn norm_rejects_bad_points() {
        let s = WeightedSpace::counting(2.0, 2).unwrap();
        assert!(matches!(
            s.norm(&Point::new(vec![1.0])),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(matches!(
            s.norm(&Point::new(vec![1.0, f64::NAN])),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn large_exponent_does_not_overflow() {
        let s = WeightedSpace::counting(64.0, 2).unwrap();
        let n = s.norm(&Point::new(vec![1e10, 1e10])).unwrap();
        assert!(approx(n / 1e10, 2f64.powf(1.0 / 64.0), 1e-14));
    }

    #[test]
    fn diameter_and_combine() {
        let s = WeightedSpace::counting(2.0, 2).unwrap();
        let single = PointSet::new(s.clone(), vec![Point::new(vec![3.0, 4.0])]).unwrap();
        assert_eq!(single.diameter(), 0.0);

        let pair = PointSet::new(
            s.clone(),
            vec![Point::new(vec![0.0, 0.0]), Point::new(vec![1.0, 0.0])],
        )
        .unwrap();
        assert_eq!(pair.diameter(), 1.0);

        let set = PointSet::new(
            s.clone(),
            vec![Point::new(vec![1.0, 0.0]), Point::new(vec![0.0, 1.0])],
        )
        .unwrap();
        let mid = set
            .combine(&SimplexWeights::new(vec![0.5, 0.5]).unwrap())
            .unwrap();
        assert_eq!(mid.coeffs(), &[0.5, 0.5]);
        let vertex = set
            .combine(&SimplexWeights::new(vec![0.0, 1.0]).unwrap())
            .unwrap();
        assert_eq!(vertex.coeffs(), &[0.0, 1.0]);

        let line = WeightedSpace::counting(2.0, 1).unwrap();
        let set = PointSet::new(line, vec![Point::new(vec![0.0]), Point::new(vec![4.0])]).unwrap();
        let p = set
            .combine(&SimplexWeights::new(vec![0.25, 0.75]).unwrap())
            .unwrap();
        assert_eq!(p.coeffs(), &[3.0]);
        assert!(matches!(
            set.combine(&SimplexWeights::uniform(3)),
            Err(Error::WeightCountMismatch { weights: 3, points: 2 })
        ));
    }

    #[test]
    fn point_set_validation() {
        let s = WeightedSpace::counting(2.0, 2).unwrap();
        assert!(matches!(PointSet::new(s.clone(), vec![]), Err(Error::EmptySet)));
        assert!(PointSet::new(s, vec![Point::new(vec![1.0])]).is_err());
    }
}
