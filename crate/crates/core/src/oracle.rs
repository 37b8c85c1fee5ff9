//! Exact ground truth for 1-D problems with the quadratic cost.
//!
//! In 1-D, `1/2 (x - y_i)^2 - g_i = 1/2 x^2 + (-y_i x + 1/2 y_i^2 - g_i)`, so
//! the Laguerre cells are the pieces of the lower envelope of `M` lines.
//! With sorted support points every cell is a (possibly empty) interval and
//! the cells appear in index order; the optimal map is monotone, so the
//! optimal thresholds are quantiles of the cumulative weights.

use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measures::{DiscreteTarget, SourceMeasure};
use crate::projection::{box_radius, Compact, ProjectionBox};
use crate::semidual::Potential;

/// Nonempty Laguerre cell `(lo, hi]` of a 1-D problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellInterval {
    pub cell: usize,
    pub lo: f64,
    pub hi: f64,
}

fn sorted_support(target: &DiscreteTarget) -> Result<&[f64]> {
    if target.dim() != 1 {
        return Err(Error::invalid("1-D oracle needs a 1-D target"));
    }
    let y = target.points();
    if y.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Degenerate("target points must be strictly increasing".into()));
    }
    Ok(y)
}

/// Boundary between cells `i` and `j > i` (equal transformed cost).
#[inline]
fn boundary(y: &[f64], g: &[f64], i: usize, j: usize) -> f64 {
    0.5 * (y[i] + y[j]) + (g[i] - g[j]) / (y[j] - y[i])
}

/// Nonempty Laguerre cells of `g`, left to right. Boundary points belong to
/// the lower index.
pub fn laguerre_intervals_1d(target: &DiscreteTarget, g: &[f64]) -> Result<Vec<CellInterval>> {
    let y = sorted_support(target)?;
    if g.len() != y.len() {
        return Err(Error::invalid("potential length does not match the target"));
    }
    // lower envelope of lines with decreasing slopes -y_i
    let mut hull: Vec<usize> = Vec::with_capacity(y.len());
    for j in 0..y.len() {
        while let [.., a, b] = hull[..] {
            if boundary(y, g, b, j) <= boundary(y, g, a, b) {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(j);
    }
    let mut out = Vec::with_capacity(hull.len());
    let mut lo = f64::NEG_INFINITY;
    for (k, &i) in hull.iter().enumerate() {
        let hi = hull.get(k + 1).map_or(f64::INFINITY, |&j| boundary(y, g, i, j));
        out.push(CellInterval { cell: i, lo, hi });
        lo = hi;
    }
    Ok(out)
}

fn cdf_at(src: &SourceMeasure, x: f64) -> Result<f64> {
    if x == f64::INFINITY {
        Ok(1.0)
    } else if x == f64::NEG_INFINITY {
        Ok(0.0)
    } else {
        src.cdf(x)
    }
}

/// `mu(L_i(g))` for every cell, from the exact CDF.
pub fn cell_masses_exact(src: &SourceMeasure, target: &DiscreteTarget, g: &[f64]) -> Result<Vec<f64>> {
    let mut masses = vec![0.0; target.len()];
    for c in laguerre_intervals_1d(target, g)? {
        masses[c.cell] = cdf_at(src, c.hi)? - cdf_at(src, c.lo)?;
    }
    Ok(masses)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Oracle1D {
    pub source: SourceMeasure,
    pub target: DiscreteTarget,
    /// Optimal potential with `g_star[0] = 0`.
    pub g_star: Potential,
    /// Optimal cell boundaries, strictly increasing.
    pub thresholds: Vec<f64>,
}

/// Exact optimum for the quadratic cost: thresholds `t_i = F^-1(w_0 + ... + w_i)`
/// and potentials from the boundary equalities, left to right from `g_0 = 0`.
pub fn solve_1d_exact(src: &SourceMeasure, target: &DiscreteTarget) -> Result<Oracle1D> {
    let y = sorted_support(target)?;
    if src.dim() != 1 {
        return Err(Error::Unavailable("exact 1-D solve needs a 1-D source with a cdf".into()));
    }
    let w = target.weights();
    let mut level = 0.0;
    let mut thresholds = Vec::with_capacity(y.len().saturating_sub(1));
    for wi in &w[..w.len() - 1] {
        level += wi;
        thresholds.push(src.quantile(level.min(1.0))?);
    }
    if thresholds.windows(2).any(|t| !(t[0] < t[1])) || thresholds.iter().any(|t| !t.is_finite()) {
        return Err(Error::Unavailable("source cdf is not invertible at the cumulative weights".into()));
    }
    let mut g = vec![0.0; y.len()];
    for (i, t) in thresholds.iter().enumerate() {
        g[i + 1] = g[i] + 0.5 * (t - y[i + 1]).powi(2) - 0.5 * (t - y[i]).powi(2);
    }
    Ok(Oracle1D { source: src.clone(), target: target.clone(), g_star: g.into(), thresholds })
}

impl Oracle1D {
    /// Oracle for a known optimal potential, e.g. one whose weights were set
    /// to its own exact cell masses.
    pub fn from_potential(src: &SourceMeasure, target: &DiscreteTarget, g_star: Potential) -> Result<Self> {
        let cells = laguerre_intervals_1d(target, &g_star)?;
        if cells.len() != target.len() {
            return Err(Error::Degenerate("every Laguerre cell of g* must be nonempty".into()));
        }
        let thresholds = cells[..cells.len() - 1].iter().map(|c| c.hi).collect();
        Ok(Self { source: src.clone(), target: target.clone(), g_star, thresholds })
    }

    /// `K =[F^-1(q), F^-1(1 - q)]` with `q = w_min / 4`, so that
    /// `mu(K) = 1 - w_min / 2`.
    pub fn central_compact(&self) -> Result<Compact> {
        let q = self.target.min_weight() / 4.0;
        Ok(Compact::Cube { lo: vec![self.source.quantile(q)?], hi: vec![self.source.quantile(1.0 - q)?] })
    }

    pub fn projection_box(&self) -> Result<ProjectionBox> {
        let r = box_radius(&CostFunction::quadratic(), &self.target, &self.central_compact()?)?;
        ProjectionBox::new(r, self.target.len())
    }
}

/// Hessian of `H` at `g` (minimization convention, positive semidefinite):
/// `H_{i,i+1} = -f(b_i) / (y_{i+1} - y_i)` at the boundary `b_i`, other
/// off-diagonals zero, diagonal equal to minus the off-diagonal row sum.
pub fn hessian_1d(src: &SourceMeasure, target: &DiscreteTarget, g: &[f64]) -> Result<Vec<Vec<f64>>> {
    let y = sorted_support(target)?;
    let cells = laguerre_intervals_1d(target, g)?;
    let m = y.len();
    if cells.len() != m || cells.iter().enumerate().any(|(k, c)| c.cell != k || !(c.lo < c.hi)) {
        return Err(Error::Degenerate("every Laguerre cell must be a nonempty interval".into()));
    }
    let mut h = vec![vec![0.0; m]; m];
    for i in 0..m.saturating_sub(1) {
        let b = cells[i].hi;
        let v = -src.density(&[b])? / (y[i + 1] - y[i]);
        h[i][i + 1] = v;
        h[i + 1][i] = v;
    }
    for (i, row) in h.iter_mut().enumerate() {
        let off: f64 = row.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, v)| v).sum();
        row[i] = -off;
    }
    Ok(h)
}

/// `int |T(g)(x) - T_*(x)|^p dmu(x)` computed exactly by merging the two
/// interval partitions.
pub fn map_error_exact_1d(oracle: &Oracle1D, g: &[f64], p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::invalid(format!("map error exponent must be >= 1, got {p}")));
    }
    let y = oracle.target.points();
    let a = laguerre_intervals_1d(&oracle.target, g)?;
    let b = laguerre_intervals_1d(&oracle.target, &oracle.g_star)?;
    let src = &oracle.source;
    let (mut i, mut j) = (0, 0);
    let mut lo = f64::NEG_INFINITY;
    let mut total = 0.0;
    while i < a.len() && j < b.len() {
        let hi = a[i].hi.min(b[j].hi);
        if a[i].cell != b[j].cell && hi > lo {
            total += (cdf_at(src, hi)? - cdf_at(src, lo)?) * (y[a[i].cell] - y[b[j].cell]).abs().powf(p);
        }
        lo = hi;
        if a[i].hi == hi {
            i += 1;
        }
        if b[j].hi == hi {
            j += 1;
        }
    }
    Ok(total)
}
