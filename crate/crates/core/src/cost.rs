//! Ground costs, the vectorial c-transform and Laguerre-cell assignment.
//!
//! Cells are indexed from 0. A point on a cell boundary goes to the lowest
//! index among the tied cells, so assignment is a deterministic partition.

use crate::error::{Error, Result};
use crate::measures::DiscreteTarget;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostKind {
    /// `c(x, y) = 1/2 |x - y|^2`
    Quadratic,
    /// `c(x, y) = |x - y|^p`, `p > 1`
    PowerP,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostFunction {
    kind: CostKind,
    p: f64,
}

impl CostFunction {
    pub fn quadratic() -> Self {
        Self { kind: CostKind::Quadratic, p: 2.0 }
    }

    pub fn power(p: f64) -> Result<Self> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::invalid(format!("power cost needs p in (1, inf), got {p}")));
        }
        Ok(Self { kind: CostKind::PowerP, p })
    }

    pub fn kind(&self) -> CostKind {
        self.kind
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn is_quadratic(&self) -> bool {
        self.kind == CostKind::Quadratic
    }

    /// Cost as a function of the Euclidean distance `s = |x - y|`.
    #[inline]
    pub fn radial(&self, s: f64) -> f64 {
        match self.kind {
            CostKind::Quadratic => 0.5 * s * s,
            CostKind::PowerP => s.powf(self.p),
        }
    }

    /// Unchecked evaluation on equal-length slices. Hot path.
    #[inline]
    pub fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let sq: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        match self.kind {
            CostKind::Quadratic => 0.5 * sq,
            CostKind::PowerP => sq.sqrt().powf(self.p),
        }
    }

    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_point(x, y.len())?;
        check_point(y, x.len())?;
        Ok(self.eval_unchecked(x, y))
    }
}

fn check_point(x: &[f64], dim: usize) -> Result<()> {
    if x.len() != dim {
        return Err(Error::invalid(format!("dimension mismatch: {} vs {}", x.len(), dim)));
    }
    if x.is_empty() {
        return Err(Error::invalid("points must have dimension >= 1"));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite coordinate"));
    }
    Ok(())
}

/// Value of the c-transform and the index of the Laguerre cell containing `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CTransform {
    pub value: f64,
    pub cell: usize,
}

/// `min_i c(x, y_i) - g_i` with lowest-index tie-breaking. No validation.
#[inline]
pub fn c_transform_unchecked(
    cost: &CostFunction,
    target: &DiscreteTarget,
    g: &[f64],
    x: &[f64],
) -> CTransform {
    let mut best = CTransform { value: f64::INFINITY, cell: 0 };
    for (i, (y, gi)) in target.iter_points().zip(g).enumerate() {
        let v = cost.eval_unchecked(x, y) - gi;
        // strict: keeps the lowest index on ties
        if v < best.value {
            best = CTransform { value: v, cell: i };
        }
    }
    best
}

pub fn c_transform(
    cost: &CostFunction,
    target: &DiscreteTarget,
    g: &[f64],
    x: &[f64],
) -> Result<CTransform> {
    if g.len() != target.len() {
        return Err(Error::invalid(format!(
            "potential has {} entries, target has {} points",
            g.len(),
            target.len()
        )));
    }
    if g.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("non-finite potential"));
    }
    check_point(x, target.dim())?;
    Ok(c_transform_unchecked(cost, target, g, x))
}

/// Map estimate `T(g)(x)`: the support point of the cell containing `x`.
pub fn assign_map<'a>(
    cost: &CostFunction,
    target: &'a DiscreteTarget,
    g: &[f64],
    x: &[f64],
) -> Result<&'a [f64]> {
    let ct = c_transform(cost, target, g, x)?;
    Ok(target.point(ct.cell))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn two_points() -> DiscreteTarget {
        DiscreteTarget::new(vec![0.0, 1.0], 1, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let q = CostFunction::quadratic();
        assert_eq!(q.evaluate(&[0.0], &[0.0]).unwrap(), 0.0);
        assert_eq!(q.evaluate(&[0.0], &[1.0]).unwrap(), 0.5);
        let p = CostFunction::power(1.5).unwrap();
        let v = p.evaluate(&[0.0; 10], &[1.0; 10]).unwrap();
        assert!((v - 10f64.powf(0.75)).abs() < 1e-12);
        assert!((v - 5.6234).abs() < 1e-4);
    }

    #[test]
    fn evaluate_rejects_bad_input() {
        let q = CostFunction::quadratic();
        assert!(q.evaluate(&[0.0, 1.0], &[1.0]).is_err());
        assert!(q.evaluate(&[f64::NAN], &[1.0]).is_err());
        assert!(q.evaluate(&[], &[]).is_err());
        assert!(CostFunction::power(1.0).is_err());
        assert!(CostFunction::power(f64::INFINITY).is_err());
    }

    #[test]
    fn c_transform_examples() {
        let t = two_points();
        let q = CostFunction::quadratic();
        let ct = c_transform(&q, &t, &[0.0, 0.0], &[0.25]).unwrap();
        assert_eq!(ct.cell, 0);
        assert!((ct.value - 0.03125).abs() < 1e-15);
        let a = 3.7;
        let ct2 = c_transform(&q, &t, &[a, a], &[0.25]).unwrap();
        assert_eq!(ct2.cell, 0);
        assert!((ct2.value - (0.03125 - a)).abs() < 1e-14);
    }

    #[test]
    fn boundary_tie_goes_to_lowest_index() {
        // g = (0, 1/2 - delta) puts the boundary exactly at x = delta.
        let t = two_points();
        let q = CostFunction::quadratic();
        let delta = 0.25; // dyadic, so the tie is exact in floating point
        let g = [0.0, 0.5 - delta];
        let ct = c_transform(&q, &t, &g, &[delta]).unwrap();
        assert_eq!(ct.cell, 0);
        let g = [0.0, 0.5 - 0.3];
        assert_eq!(c_transform(&q, &t, &g, &[0.3 - 1e-9]).unwrap().cell, 0);
        assert_eq!(c_transform(&q, &t, &g, &[0.3 + 1e-9]).unwrap().cell, 1);
    }

    #[test]
    fn assign_map_examples() {
        let t = two_points();
        let q = CostFunction::quadratic();
        assert_eq!(assign_map(&q, &t, &[0.0, 0.0], &[0.9]).unwrap(), &[1.0]);
        assert_eq!(assign_map(&q, &t, &[5.0, 5.0], &[0.9]).unwrap(), &[1.0]);
        let delta = 0.3;
        let g = [0.0, 0.5 - delta];
        assert_eq!(assign_map(&q, &t, &g, &[delta + 0.01]).unwrap(), &[1.0]);
        assert_eq!(assign_map(&q, &t, &g, &[delta - 0.01]).unwrap(), &[0.0]);
    }

    #[test]
    fn c_transform_validates() {
        let t = two_points();
        let q = CostFunction::quadratic();
        assert!(c_transform(&q, &t, &[0.0], &[0.0]).is_err());
        assert!(c_transform(&q, &t, &[0.0, 0.0], &[0.0, 1.0]).is_err());
    }

    fn random_problem() -> impl Strategy<Value = (DiscreteTarget, Vec<f64>, Vec<f64>, f64, bool)> {
        (1usize..6, 1usize..4).prop_flat_map(|(m, d)| {
            (
                proptest::collection::vec(-2.0f64..2.0, m * d),
                proptest::collection::vec(0.1f64..1.0, m),
                proptest::collection::vec(-1.0f64..1.0, m),
                proptest::collection::vec(-3.0f64..3.0, d),
                -5.0f64..5.0,
                any::<bool>(),
            )
                .prop_map(move |(pts, w, g, x, a, quad)| {
                    (DiscreteTarget::new(pts, d, w).unwrap(), g, x, a, quad)
                })
        })
    }

    proptest! {
        #[test]
        fn shift_invariance_and_partition((t, g, x, a, quad) in random_problem()) {
            let cost = if quad { CostFunction::quadratic() } else { CostFunction::power(1.5).unwrap() };
            let base = c_transform(&cost, &t, &g, &x).unwrap();
            let shifted: Vec<f64> = g.iter().map(|v| v + a).collect();
            let sh = c_transform(&cost, &t, &shifted, &x).unwrap();
            prop_assert!((sh.value - (base.value - a)).abs() < 1e-9);
            // same cell unless the shift moved a near-tie across rounding
            let cell_gap = (0..t.len()).filter(|&i| i != base.cell)
                .map(|i| cost.eval_unchecked(&x, t.point(i)) - g[i] - base.value)
                .fold(f64::INFINITY, f64::min);
            if cell_gap > 1e-9 {
                prop_assert_eq!(sh.cell, base.cell);
            }
            // partition: the assigned cell achieves the minimum
            for i in 0..t.len() {
                prop_assert!(cost.eval_unchecked(&x, t.point(base.cell)) - g[base.cell]
                    <= cost.eval_unchecked(&x, t.point(i)) - g[i]);
            }
            let again = c_transform(&cost, &t, &g, &x).unwrap();
            prop_assert_eq!(again, base);
        }

        #[test]
        fn cost_is_symmetric_nonnegative(x in proptest::collection::vec(-5.0f64..5.0, 3),
                                         y in proptest::collection::vec(-5.0f64..5.0, 3)) {
            for cost in [CostFunction::quadratic(), CostFunction::power(2.5).unwrap()] {
                let a = cost.evaluate(&x, &y).unwrap();
                prop_assert!(a >= 0.0);
                prop_assert_eq!(a, cost.evaluate(&y, &x).unwrap());
                prop_assert_eq!(cost.evaluate(&x, &x).unwrap(), 0.0);
            }
        }
    }
}
