//! The convex semi-dual objective and its stochastic estimators.
//!
//! Minimization convention: `h(g, x) = -g^c(x) - <w, g>` and
//! `H(g) = E[h(g, X)]`, so `grad H(g)_i = mu(L_i(g)) - w_i` and the OT cost
//! is `-min H`.

use std::ops::{Deref, DerefMut};

use crate::cost::{c_transform_unchecked, CostFunction};
use crate::error::{Error, Result};
use crate::mc::{self, Moments};
use crate::measures::{DiscreteTarget, SourceMeasure};
use crate::projection::project_gauge;
use crate::rng::StreamKey;

/// Dual potential `g in R^M`. Defined up to adding a multiple of `1`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Potential(Vec<f64>);

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("potential has non-finite entries"));
        }
        Ok(Self(values))
    }

    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn shifted(&self, a: f64) -> Self {
        Self(self.0.iter().map(|v| v + a).collect())
    }

    /// Representative orthogonal to `1`.
    pub fn gauge_projected(&self) -> Self {
        Self(project_gauge(&self.0))
    }

    /// Representative with first coordinate zero.
    pub fn first_fixed(&self) -> Self {
        match self.0.first() {
            Some(&g0) => self.shifted(-g0),
            None => self.clone(),
        }
    }

    pub fn gauge_equal(&self, other: &Potential, tol: f64) -> bool {
        self.len() == other.len() && crate::projection::gauge_distance(self, other) <= tol
    }
}

impl Deref for Potential {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Potential {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Potential {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Cost, target and source of one semi-discrete problem.
#[derive(Debug, Clone)]
pub struct Problem {
    pub cost: CostFunction,
    pub target: DiscreteTarget,
    pub source: SourceMeasure,
}

/// One stochastic subgradient `e_cell - w`, stored by its cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubgradientSample<'a> {
    pub cell: usize,
    weights: &'a [f64],
}

impl SubgradientSample<'_> {
    pub fn get(&self, j: usize) -> f64 {
        let ind = if j == self.cell { 1.0 } else { 0.0 };
        ind - self.weights[j]
    }

    pub fn to_vec(&self) -> Vec<f64> {
        (0..self.weights.len()).map(|j| self.get(j)).collect()
    }
}

impl Problem {
    pub fn new(cost: CostFunction, target: DiscreteTarget, source: SourceMeasure) -> Result<Self> {
        if target.dim() != source.dim() {
            return Err(Error::invalid(format!(
                "target lives in R^{} but the source in R^{}",
                target.dim(),
                source.dim()
            )));
        }
        Ok(Self { cost, target, source })
    }

    pub fn m(&self) -> usize {
        self.target.len()
    }

    fn check(&self, g: &[f64]) -> Result<()> {
        if g.len() != self.m() {
            return Err(Error::invalid(format!("potential has {} entries, expected {}", g.len(), self.m())));
        }
        Ok(())
    }

    #[inline]
    pub fn cell(&self, g: &[f64], x: &[f64]) -> usize {
        c_transform_unchecked(&self.cost, &self.target, g, x).cell
    }

    #[inline]
    fn h_unchecked(&self, g: &[f64], wg: f64, x: &[f64]) -> f64 {
        -c_transform_unchecked(&self.cost, &self.target, g, x).value - wg
    }

    fn w_dot(&self, g: &[f64]) -> f64 {
        self.target.weights().iter().zip(g).map(|(w, v)| w * v).sum()
    }

    /// `h(g, x) = -g^c(x) - <w, g>`.
    pub fn h_sample(&self, g: &[f64], x: &[f64]) -> Result<f64> {
        self.check(g)?;
        if x.len() != self.target.dim() {
            return Err(Error::invalid("sample dimension mismatch"));
        }
        Ok(self.h_unchecked(g, self.w_dot(g), x))
    }

    pub fn subgradient_sample(&self, g: &[f64], x: &[f64]) -> Result<SubgradientSample<'_>> {
        self.check(g)?;
        if x.len() != self.target.dim() {
            return Err(Error::invalid("sample dimension mismatch"));
        }
        Ok(SubgradientSample { cell: self.cell(g, x), weights: self.target.weights() })
    }

    /// Mean of `h(g, x_i)` over a fixed row-major sample set.
    pub fn empirical_h(&self, g: &[f64], samples: &[f64]) -> Result<f64> {
        self.check(g)?;
        let wg = self.w_dot(g);
        let d = self.target.dim();
        let n = samples.len() / d;
        Ok(samples.chunks_exact(d).map(|x| self.h_unchecked(g, wg, x)).sum::<f64>() / n as f64)
    }

    /// Mean subgradient over a fixed sample set: cell frequencies minus `w`.
    pub fn empirical_subgradient(&self, g: &[f64], samples: &[f64]) -> Result<Vec<f64>> {
        self.check(g)?;
        let d = self.target.dim();
        let n = samples.len() / d;
        let mut counts = vec![0usize; self.m()];
        for x in samples.chunks_exact(d) {
            counts[self.cell(g, x)] += 1;
        }
        Ok(counts
            .iter()
            .zip(self.target.weights())
            .map(|(&c, w)| c as f64 / n as f64 - w)
            .collect())
    }

    /// Mean and standard error of `h(g, X)` over `n` fresh draws keyed by `key`.
    pub fn estimate_h(&self, g: &[f64], key: StreamKey, n: usize) -> Result<Moments> {
        self.check(g)?;
        if n < 2 {
            return Err(Error::invalid("estimate_h needs n >= 2"));
        }
        let wg = self.w_dot(g);
        let [m] = mc::sample_moments(&self.source, key, n, |x| [self.h_unchecked(g, wg, x)]);
        Ok(m)
    }

    /// `H(g) - H(g_ref)` with common random numbers: both potentials are
    /// evaluated on the same draws.
    pub fn estimate_h_gap(&self, g: &[f64], g_ref: &[f64], key: StreamKey, n: usize) -> Result<Moments> {
        self.check(g)?;
        self.check(g_ref)?;
        if n < 2 {
            return Err(Error::invalid("estimate_h_gap needs n >= 2"));
        }
        let (wg, wr) = (self.w_dot(g), self.w_dot(g_ref));
        let [m] = mc::sample_moments(&self.source, key, n, |x| {
            [self.h_unchecked(g, wg, x) - self.h_unchecked(g_ref, wr, x)]
        });
        Ok(m)
    }

    /// Empirical Laguerre-cell masses over `n` fresh draws; sums to one.
    pub fn estimate_cell_masses(&self, g: &[f64], key: StreamKey, n: usize) -> Result<Vec<f64>> {
        self.check(g)?;
        if n == 0 {
            return Err(Error::invalid("estimate_cell_masses needs n >= 1"));
        }
        let counts = mc::sample_counts(&self.source, key, n, self.m(), |x| self.cell(g, x));
        Ok(counts.iter().map(|&c| c as f64 / n as f64).collect())
    }
}
