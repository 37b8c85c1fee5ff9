use rand::Rng;

use super::{BoxSpec, ExperimentSpec, GroundTruthSpec, TargetSpec};
use crate::error::{Error, Result};
use crate::cost::CostFunction;
use crate::measures::{DiscreteTarget, SourceMeasure};
use crate::oracle::{cell_masses_exact, solve_1d_exact, Oracle1D};
use crate::projection::{box_radius, estimate_radius, project_gauge, Compact, ProjectionBox};
use crate::rng::{purpose, StreamKey};
use crate::semidual::{Potential, Problem};

/// Redraws of `g*` allowed before giving up.
const MAX_DRAWS: usize = 100;

/// Smallest admissible exact cell mass of a random `g*`.
const MIN_EXACT_MASS: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct GroundTruth {
    /// Target with `w` set so that `g_star` is optimal.
    pub target: DiscreteTarget,
    pub g_star: Potential,
    /// Exact 1-D description, when the problem admits one.
    pub oracle: Option<Oracle1D>,
    /// Number of `g*` draws used (1 when the first was accepted).
    pub draws: usize,
}

fn draw_support(spec: &ExperimentSpec, key: StreamKey) -> Result<DiscreteTarget> {
    match &spec.target {
        TargetSpec::Fixed(t) => Ok(t.clone()),
        &TargetSpec::UniformCube { m, lo, hi } => {
            let d = spec.source.dim();
            let mut rng = key.child(purpose::TARGET).stream();
            let mut pts: Vec<f64> = (0..m * d).map(|_| rng.random_range(lo..hi)).collect();
            if d == 1 {
                pts.sort_by(f64::total_cmp);
            }
            DiscreteTarget::uniform(pts, d)
        }
    }
}

fn exact_oracle(spec: &ExperimentSpec, target: &DiscreteTarget, g: &Potential) -> Option<Oracle1D> {
    if !spec.cost.is_quadratic() || target.dim() != 1 || spec.source.cdf(0.0).is_err() {
        return None;
    }
    Oracle1D::from_potential(&spec.source, target, g.clone()).ok()
}

/// Target support and optimal potential for one repeat, drawn from `key`.
///
/// Random ground truth draws `g*` uniformly in `[-scale, scale]^M`,
/// gauge-projects it and sets `w` to its Laguerre-cell masses. A draw is
/// rejected when some mass falls below `10 / n_reference` (or a tiny
/// constant for exact masses); after 100 rejections this is a
/// configuration error.
pub fn make_ground_truth(spec: &ExperimentSpec, key: StreamKey) -> Result<GroundTruth> {
    let support = draw_support(spec, key)?;
    match spec.ground_truth {
        GroundTruthSpec::Oracle1D => {
            if !spec.cost.is_quadratic() {
                return Err(Error::Config("oracle ground truth needs the quadratic cost".into()));
            }
            let o = solve_1d_exact(&spec.source, &support)?;
            Ok(GroundTruth { target: support, g_star: o.g_star.clone(), oracle: Some(o), draws: 1 })
        }
        GroundTruthSpec::Random { scale, n_reference } => {
            if !(scale >= 0.0) || !scale.is_finite() {
                return Err(Error::Config(format!("ground-truth scale must be >= 0, got {scale}")));
            }
            let problem = Problem::new(spec.cost, support.clone(), spec.source.clone())?;
            let m = support.len();
            for draw in 0..MAX_DRAWS {
                let mut rng = key.path(&[purpose::G_STAR, draw as u64]).stream();
                let raw: Vec<f64> = (0..m).map(|_| scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
                let g = Potential::from(project_gauge(&raw));
                let (masses, floor) = match n_reference {
                    Some(n) => {
                        let ref_key = key.path(&[purpose::REFERENCE, draw as u64]);
                        (problem.estimate_cell_masses(&g, ref_key, n)?, 10.0 / n as f64)
                    }
                    None => {
                        if !spec.cost.is_quadratic() {
                            return Err(Error::Config("exact reference masses need the quadratic cost".into()));
                        }
                        (cell_masses_exact(&spec.source, &support, &g)?, MIN_EXACT_MASS)
                    }
                };
                if masses.iter().all(|&w| w >= floor) {
                    let target = support.with_weights(masses)?;
                    let oracle = exact_oracle(spec, &target, &g);
                    return Ok(GroundTruth { target, g_star: g, oracle, draws: draw + 1 });
                }
            }
            Err(Error::Config(format!(
                "no admissible g* in {MAX_DRAWS} draws: some Laguerre cell keeps a mass below the guard; reduce ground_truth.scale"
            )))
        }
    }
}

/// Projection box `[-r, r]^M` with `r = sup_{x in K, j} c(x, y_j)` for the
/// compact set `K` described by `spec`. `key` drives the radius estimate.
pub fn projection_box(
    cost: &CostFunction,
    source: &SourceMeasure,
    target: &DiscreteTarget,
    spec: &BoxSpec,
    key: StreamKey,
) -> Result<ProjectionBox> {
    let w_min = target.min_weight();
    let d = target.dim();
    let k = match spec {
        BoxSpec::Radius(r) => return ProjectionBox::new(*r, target.len()),
        BoxSpec::Compact(k) => k.clone(),
        BoxSpec::SourceBall => {
            let r = source.norm_quantile(1.0 - 0.5 * w_min)?;
            Compact::Ball { center: vec![0.0; d], radius: r }
        }
        BoxSpec::CentralInterval => {
            if d != 1 {
                return Err(Error::Config("central-interval box needs a 1-D source".into()));
            }
            let q = 0.25 * w_min;
            Compact::Cube { lo: vec![source.quantile(q)?], hi: vec![source.quantile(1.0 - q)?] }
        }
        BoxSpec::Estimated { delta, max_samples } => {
            let est = estimate_radius(source, w_min, *delta, key.child(purpose::RADIUS), *max_samples)?;
            Compact::Ball { center: vec![0.0; d], radius: est.radius }
        }
    };
    ProjectionBox::new(box_radius(cost, target, &k)?, target.len())
}

/// Projection box for a ground truth. Fails when `g*` lies outside it in
/// both the zero-mean and the first-coordinate-zero gauge.
pub fn build_box(spec: &ExperimentSpec, gt: &GroundTruth, key: StreamKey) -> Result<ProjectionBox> {
    let bx = projection_box(&spec.cost, &spec.source, &gt.target, &spec.box_spec, key)?;
    if !bx.contains(&gt.g_star) && !bx.contains(&gt.g_star.first_fixed()) {
        return Err(Error::Config(format!(
            "g* does not fit in the projection box of radius {}; enlarge the compact set or reduce ground_truth.scale",
            bx.radius()
        )));
    }
    Ok(bx)
}
