//! Both sides of the Williams–Wells inequality
//!
//! ```text
//! 2 Σ_i t_i ‖x_i − Σ_j t_j x_j‖^α  ≤  Σ_{i,j} t_i t_j ‖x_i − x_j‖^α
//! ```
//!
//! with `α = p/(p−1)` for `1 < p ≤ 2` and `α = p` for `p ≥ 2`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simplex::SimplexWeights;
use crate::space::PointSet;

pub fn alpha_exponent(p: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::ExponentOutOfRange(p));
    }
    Ok(if p <= 2.0 { p / (p - 1.0) } else { p })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WwSides {
    pub lhs: f64,
    pub rhs: f64,
}

impl WwSides {
    pub fn gap(&self) -> f64 {
        self.rhs - self.lhs
    }

    /// Gap relative to `max(1, rhs)`.
    pub fn relative_gap(&self) -> f64 {
        self.gap() / self.rhs.max(1.0)
    }
}

/// Kahan–Babuška (Neumaier) running sum.
#[derive(Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

pub fn ww_sides(points: &PointSet, t: &SimplexWeights) -> Result<WwSides> {
    if t.len() != points.len() {
        return Err(Error::WeightCountMismatch {
            weights: t.len(),
            points: points.len(),
        });
    }
    let space = points.space();
    let alpha = space.alpha();
    let w = t.as_slice();
    let mean = points.combine(t)?;

    let mut lhs = CompensatedSum::default();
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        lhs.add(wi * points.distance_to(i, &mean).powf(alpha));
    }

    // index-ascending double sum; the diagonal contributes nothing
    let mut rhs = CompensatedSum::default();
    for (i, &wi) in w.iter().enumerate() {
        if wi == 0.0 {
            continue;
        }
        for (j, &wj) in w.iter().enumerate() {
            if j == i || wj == 0.0 {
                continue;
            }
            let d = space.distance_pow_alpha(points.get(i).coeffs(), points.get(j).coeffs());
            rhs.add(wi * wj * d);
        }
    }

    Ok(WwSides {
        lhs: 2.0 * lhs.value(),
        rhs: rhs.value(),
    })
}

/// `rhs − lhs`; non-negative up to rounding for every admissible input.
pub fn ww_gap(points: &PointSet, t: &SimplexWeights) -> Result<f64> {
    Ok(ww_sides(points, t)?.gap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Point, WeightedSpace};
    use proptest::prelude::*;

    fn set(p: f64, cells: Vec<f64>, pts: Vec<Vec<f64>>) -> PointSet {
        let s = WeightedSpace::new(p, cells).unwrap();
        PointSet::new(s, pts.into_iter().map(Point::new).collect()).unwrap()
    }

    #[test]
    fn exponent_rule() {
        assert_eq!(alpha_exponent(2.0).unwrap(), 2.0);
        assert!((alpha_exponent(1.5).unwrap() - 3.0).abs() < 1e-15);
        assert_eq!(alpha_exponent(4.0).unwrap(), 4.0);
        assert!(alpha_exponent(1.0).is_err());
        assert!(alpha_exponent(f64::INFINITY).is_err());
    }

    #[test]
    fn conjugate_exponents_share_alpha() {
        for p in [1.1, 1.25, 1.5, 1.75, 2.0] {
            let q = p / (p - 1.0);
            let (a, b) = (alpha_exponent(p).unwrap(), alpha_exponent(q).unwrap());
            assert!((a - b).abs() <= 1e-12 * a, "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn singleton_sides_vanish() {
        let a = set(2.0, vec![1.0], vec![vec![3.0]]);
        let s = ww_sides(&a, &SimplexWeights::uniform(1)).unwrap();
        assert_eq!((s.lhs, s.rhs), (0.0, 0.0));
        assert_eq!(ww_gap(&a, &SimplexWeights::uniform(1)).unwrap(), 0.0);
    }

    #[test]
    fn symmetric_pair_is_tight() {
        let a = set(2.0, vec![1.0, 1.0], vec![vec![1.0, 0.0], vec![-1.0, 0.0]]);
        let s = ww_sides(&a, &SimplexWeights::uniform(2)).unwrap();
        assert!((s.lhs - 2.0).abs() < 1e-14);
        assert!((s.rhs - 2.0).abs() < 1e-14);
        assert!(s.gap().abs() < 1e-14);
    }

    #[test]
    fn cubic_two_point_example() {
        let a = set(3.0, vec![1.0], vec![vec![1.0], vec![0.0]]);
        let s = ww_sides(&a, &SimplexWeights::uniform(2)).unwrap();
        assert!((s.lhs - 0.25).abs() < 1e-14);
        assert!((s.rhs - 0.5).abs() < 1e-14);
        assert!((s.gap() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn weight_count_mismatch() {
        let a = set(2.0, vec![1.0], vec![vec![1.0], vec![0.0]]);
        assert!(matches!(
            ww_sides(&a, &SimplexWeights::uniform(3)),
            Err(Error::WeightCountMismatch { .. })
        ));
    }

    fn arb_instance() -> impl Strategy<Value = (PointSet, SimplexWeights)> {
        (
            prop::sample::select(vec![1.2, 1.5, 2.0, 3.0, 5.0]),
            1usize..6,
            1usize..5,
        )
            .prop_flat_map(|(p, n, cells)| {
                (
                    Just(p),
                    prop::collection::vec(0.1f64..2.0, cells),
                    prop::collection::vec(prop::collection::vec(-3.0f64..3.0, cells), n),
                    prop::collection::vec(0.0f64..1.0, n),
                )
            })
            .prop_filter_map("zero weight mass", |(p, cells, pts, raw)| {
                let w = SimplexWeights::normalized(raw).ok()?;
                Some((set(p, cells, pts), w))
            })
    }

    proptest! {
        #[test]
        fn zero_weight_points_can_be_dropped((a, w) in arb_instance()) {
            let keep: Vec<usize> = (0..a.len()).filter(|&i| w.as_slice()[i] >= 1e-15).collect();
            let sub = a.subset(&keep).unwrap();
            let sub_w = SimplexWeights::normalized(keep.iter().map(|&i| w.as_slice()[i]).collect()).unwrap();
            let full = ww_sides(&a, &w).unwrap();
            let reduced = ww_sides(&sub, &sub_w).unwrap();
            prop_assert!((full.lhs - reduced.lhs).abs() <= 1e-12 * full.lhs.max(1.0));
            prop_assert!((full.rhs - reduced.rhs).abs() <= 1e-12 * full.rhs.max(1.0));
        }

        #[test]
        fn sides_scale_with_alpha((a, w) in arb_instance(), c in 0.1f64..10.0) {
            let alpha = a.space().alpha();
            let base = ww_sides(&a, &w).unwrap();
            let scaled = ww_sides(&a.scaled(c).unwrap(), &w).unwrap();
            let f = c.powf(alpha);
            prop_assert!((scaled.lhs - f * base.lhs).abs() <= 1e-9 * (f * base.lhs).max(1e-300));
            prop_assert!((scaled.rhs - f * base.rhs).abs() <= 1e-9 * (f * base.rhs).max(1e-300));
        }

        #[test]
        fn gap_is_non_negative((a, w) in arb_instance()) {
            let s = ww_sides(&a, &w).unwrap();
            prop_assert!(s.relative_gap() >= -1e-9, "lhs {} rhs {}", s.lhs, s.rhs);
        }
    }
}
