//! The clipping box that contains a minimizer of the semi-dual, the
//! sample-based radius estimate for a high-mass ball, and the two projections
//! used by the solver and the error metrics.
//!
//! For any compact `K` with `mu(K) >= 1 - min_j w_j / 2`, some minimizer lies
//! in `{ g : |g_j| <= sup_{x in K, j} c(x, y_j) }`.

use crate::cost::CostFunction;
use crate::error::{Error, Result};
use crate::measures::{DiscreteTarget, SourceMeasure};
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionBox {
    radius: f64,
    m: usize,
}

impl ProjectionBox {
    pub fn new(radius: f64, m: usize) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::invalid(format!("box radius must be finite and >= 0, got {radius}")));
        }
        if m == 0 {
            return Err(Error::invalid("box dimension must be >= 1"));
        }
        Ok(Self { radius, m })
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dim(&self) -> usize {
        self.m
    }

    pub fn contains(&self, g: &[f64]) -> bool {
        g.iter().all(|v| v.abs() <= self.radius)
    }

    /// Euclidean diameter `2 r sqrt(M)`.
    pub fn euclidean_diameter(&self) -> f64 {
        2.0 * self.radius * (self.m as f64).sqrt()
    }

    /// Clamps every coordinate to `[-r, r]` in place.
    #[inline]
    pub fn clip_in_place(&self, g: &mut [f64]) {
        for v in g {
            *v = v.clamp(-self.radius, self.radius);
        }
    }
}

pub fn clip_to_box(bx: &ProjectionBox, g: &[f64]) -> Result<Vec<f64>> {
    if g.len() != bx.dim() {
        return Err(Error::invalid(format!("potential has {} entries, box has {}", g.len(), bx.dim())));
    }
    let mut out = g.to_vec();
    bx.clip_in_place(&mut out);
    Ok(out)
}

/// Orthogonal projection onto the complement of the all-ones vector.
pub fn project_gauge(g: &[f64]) -> Vec<f64> {
    if g.is_empty() {
        return Vec::new();
    }
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    g.iter().map(|v| v - mean).collect()
}

/// `|g - h|_v`: Euclidean norm of the gauge-projected difference.
pub fn gauge_distance(g: &[f64], h: &[f64]) -> f64 {
    let diff: Vec<f64> = g.iter().zip(h).map(|(a, b)| a - b).collect();
    project_gauge(&diff).iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Compact set used to size the box.
#[derive(Debug, Clone, PartialEq)]
pub enum Compact {
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned box `prod_k [lo_k, hi_k]`.
    Cube { lo: Vec<f64>, hi: Vec<f64> },
}

impl Compact {
    pub fn cube_uniform(dim: usize, lo: f64, hi: f64) -> Self {
        Compact::Cube { lo: vec![lo; dim], hi: vec![hi; dim] }
    }

    pub fn dim(&self) -> usize {
        match self {
            Compact::Ball { center, .. } => center.len(),
            Compact::Cube { lo, .. } => lo.len(),
        }
    }

    /// Largest Euclidean distance from `y` to a point of the set.
    fn farthest_distance(&self, y: &[f64]) -> f64 {
        match self {
            Compact::Ball { center, radius } => {
                radius + center.iter().zip(y).map(|(c, v)| (c - v).powi(2)).sum::<f64>().sqrt()
            }
            Compact::Cube { lo, hi } => lo
                .iter()
                .zip(hi)
                .zip(y)
                .map(|((l, h), v)| (v - l).abs().max((h - v).abs()).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

/// `sup_{x in K, j} c(x, y_j)`, computed analytically from the farthest
/// point of `K` to each `y_j`.
pub fn box_radius(cost: &CostFunction, target: &DiscreteTarget, k: &Compact) -> Result<f64> {
    if k.dim() != target.dim() {
        return Err(Error::invalid("compact set and target have different dimensions"));
    }
    match k {
        Compact::Ball { radius, center } => {
            if !(*radius >= 0.0) || center.iter().any(|c| !c.is_finite()) {
                return Err(Error::invalid(format!("degenerate ball radius {radius}")));
            }
        }
        Compact::Cube { lo, hi } => {
            if lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l <= h)) {
                return Err(Error::invalid("degenerate cube: need lo <= hi coordinatewise"));
            }
        }
    }
    let s = target
        .iter_points()
        .map(|y| k.farthest_distance(y))
        .fold(0.0, f64::max);
    Ok(cost.radial(s))
}

/// Sample size for the radius estimate, `ceil(32 ln(2/delta) / w_min^2)`.
pub fn radius_sample_size(w_min: f64, delta: f64) -> Result<usize> {
    if !(w_min > 0.0 && w_min <= 1.0) {
        return Err(Error::invalid(format!("w_min must be in (0, 1], got {w_min}")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    Ok((32.0 * (2.0 / delta).ln() / (w_min * w_min)).ceil() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadiusEstimate {
    pub radius: f64,
    pub n_used: usize,
    /// Set when a caller cap reduced the sample size below the DKW size; the
    /// probabilistic guarantee no longer applies.
    pub capped: bool,
}

/// Empirical `(1 - w_min/8)`-quantile of `|X|`. With the uncapped sample
/// size, `mu(B(0, R)) >= 1 - w_min/4` holds with probability `>= 1 - delta`.
pub fn estimate_radius(
    src: &SourceMeasure,
    w_min: f64,
    delta: f64,
    key: StreamKey,
    max_samples: Option<usize>,
) -> Result<RadiusEstimate> {
    let required = radius_sample_size(w_min, delta)?;
    let n = max_samples.map_or(required, |cap| required.min(cap.max(1)));
    let mut rng = key.stream();
    let d = src.dim();
    let mut x = vec![0.0; d];
    let mut norms: Vec<f64> = (0..n)
        .map(|_| {
            src.sample_into(&mut rng, &mut x);
            x.iter().map(|v| v * v).sum::<f64>().sqrt()
        })
        .collect();
    // inf { r : F_n(r) >= level } is the ceil(n * level)-th order statistic
    let level = 1.0 - w_min / 8.0;
    let rank = ((n as f64 * level).ceil() as usize).clamp(1, n);
    let (_, r, _) = norms.select_nth_unstable_by(rank - 1, f64::total_cmp);
    Ok(RadiusEstimate { radius: *r, n_used: n, capped: n < required })
}
