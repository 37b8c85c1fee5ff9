use crate::error::{Error, Result};
use crate::mc::{self, Moments};
use crate::projection::project_gauge;
use crate::rng::StreamKey;
use crate::semidual::Problem;

/// Squared gauge distance `|g - g*|_v^2`.
pub fn potential_error(g: &[f64], g_star: &[f64]) -> Result<f64> {
    if g.len() != g_star.len() {
        return Err(Error::invalid("potentials have different lengths"));
    }
    let diff: Vec<f64> = g.iter().zip(g_star).map(|(a, b)| a - b).collect();
    Ok(project_gauge(&diff).iter().map(|v| v * v).sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapErrorEstimate {
    /// `(mean |T(g)(x) - T(g*)(x)|^p)^(1/p)`.
    pub value: f64,
    /// Moments of the per-sample `|T(g)(x) - T(g*)(x)|^p`.
    pub pth_power: Moments,
}

#[inline]
pub(crate) fn displacement_pow(problem: &Problem, a: usize, b: usize, p: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let sq: f64 = problem
        .target
        .point(a)
        .iter()
        .zip(problem.target.point(b))
        .map(|(u, v)| (u - v) * (u - v))
        .sum();
    if p == 1.0 {
        sq.sqrt()
    } else if p == 2.0 {
        sq
    } else {
        sq.powf(0.5 * p)
    }
}

/// Monte-Carlo `L^p(mu)` distance between the maps of `g` and `g*`, over
/// `n_eval` fresh draws keyed by `key`.
pub fn map_error_mc(
    problem: &Problem,
    g: &[f64],
    g_star: &[f64],
    key: StreamKey,
    n_eval: usize,
    p: f64,
) -> Result<MapErrorEstimate> {
    if g.len() != problem.m() || g_star.len() != problem.m() {
        return Err(Error::invalid("potential length does not match the target"));
    }
    if n_eval == 0 {
        return Err(Error::invalid("map error needs n_eval >= 1"));
    }
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::invalid(format!("map error exponent must be >= 1, got {p}")));
    }
    let [m] = mc::sample_moments(&problem.source, key, n_eval, |x| {
        [displacement_pow(problem, problem.cell(g, x), problem.cell(g_star, x), p)]
    });
    Ok(MapErrorEstimate { value: m.mean.powf(1.0 / p), pth_power: m })
}
