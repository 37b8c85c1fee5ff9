//! Experiment harness: ground truth, error metrics, rate fits and the
//! replication runs.

pub mod check;
pub mod config;
mod ground_truth;
mod metrics;
mod rate;
mod run;

pub use check::{oracle_check, CheckResult};
pub use ground_truth::{build_box, make_ground_truth, projection_box, GroundTruth};
pub use metrics::{map_error_mc, potential_error, MapErrorEstimate};
pub use rate::{default_window, fit_rate, RateFit};
pub use run::{run_experiment, ExperimentResult, SummaryRow, SUMMARY_HEADER};

use crate::cost::CostFunction;
use crate::measures::{DiscreteTarget, SourceMeasure};
use crate::error::{Error, Result};
use crate::optim::{AdamParams, OptimizerConfig, Variant};
use crate::projection::{Compact, ProjectionBox};

/// How the target support is obtained.
#[derive(Debug, Clone, PartialEq)]
pub enum TargetSpec {
    /// `m` points drawn uniformly in `[lo, hi]^d` for every repeat. In 1-D the
    /// points are sorted.
    UniformCube { m: usize, lo: f64, hi: f64 },
    /// A fixed support, with weights used by the oracle ground truth.
    Fixed(DiscreteTarget),
}

/// How `(g*, w)` is produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GroundTruthSpec {
    /// Draw `g*` uniformly in `[-scale, scale]^M`, gauge-project it, and set
    /// `w` to its cell masses. Masses are estimated from `n_reference`
    /// draws, or computed from the cdf when `n_reference` is `None` (1-D,
    /// quadratic cost).
    Random { scale: f64, n_reference: Option<usize> },
    /// Keep the target weights and solve exactly (1-D, quadratic cost).
    Oracle1D,
}

/// The compact set `K` (or a fixed radius) sizing the projection box.
#[derive(Debug, Clone, PartialEq)]
pub enum BoxSpec {
    Compact(Compact),
    /// `B(0, R)` with `mu(B(0, R)) = 1 - w_min / 2`, from the exact law of `|X|`.
    SourceBall,
    /// 1-D `[F^-1(w_min/4), F^-1(1 - w_min/4)]`.
    CentralInterval,
    /// `B(0, R)` with `R` from the DKW radius estimate.
    Estimated { delta: f64, max_samples: Option<usize> },
    Radius(f64),
}

/// First step size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepRule {
    Fixed(f64),
    /// `Diam(C)`.
    Diam,
    /// `Diam(C) / (2 sqrt 2)`.
    General,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerSpec {
    pub name: String,
    pub variant: Variant,
    pub gamma1: StepRule,
    pub b: f64,
    pub batch: usize,
    pub iters: u64,
    pub adam: AdamParams,
}

impl OptimizerSpec {
    /// Concrete optimizer settings for a given box.
    pub fn to_config(&self, bx: &ProjectionBox, seed: u64) -> Result<OptimizerConfig> {
        let diam = bx.euclidean_diameter();
        let gamma1 = match self.gamma1 {
            StepRule::Fixed(v) => v,
            StepRule::Diam => diam,
            StepRule::General => diam / (2.0 * std::f64::consts::SQRT_2),
        };
        let mut cfg = OptimizerConfig::new(self.variant, gamma1, self.b, self.batch, self.iters, seed)
            .map_err(|e| Error::Config(format!("optimizer {:?}: {e}", self.name)))?;
        cfg.adam = self.adam;
        cfg.validate().map_err(|e| Error::Config(format!("optimizer {:?}: {e}", self.name)))?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapErrorMode {
    MonteCarlo,
    /// Exact 1-D integral (quadratic cost, source with a cdf).
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalSpec {
    pub n_eval: usize,
    /// Exponent of the `L^p(mu)` map error.
    pub p: f64,
    /// Slope window: the last `window_decades` decades of samples.
    pub window_decades: f64,
    pub map_error: MapErrorMode,
    /// Write measured wall times instead of zeros.
    pub timing: bool,
}

impl Default for EvalSpec {
    fn default() -> Self {
        Self { n_eval: 100_000, p: 1.0, window_decades: 2.0, map_error: MapErrorMode::MonteCarlo, timing: false }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub seed: u64,
    pub repeats: usize,
    pub cost: CostFunction,
    pub source: SourceMeasure,
    pub target: TargetSpec,
    pub ground_truth: GroundTruthSpec,
    pub box_spec: BoxSpec,
    pub eval: EvalSpec,
    pub optimizers: Vec<OptimizerSpec>,
}

impl ExperimentSpec {
    /// Non-fatal problems worth reporting before a run.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if let GroundTruthSpec::Random { n_reference: Some(n_ref), .. } = self.ground_truth {
            if n_ref < 100 * self.eval.n_eval {
                out.push(format!(
                    "n_reference = {n_ref} is below 100 * n_eval = {}; reference noise may dominate small errors",
                    100 * self.eval.n_eval
                ));
            }
        }
        if let BoxSpec::Estimated { max_samples: Some(_), .. } = self.box_spec {
            out.push("radius estimate may be capped; its probabilistic guarantee is void when it is".into());
        }
        out
    }

    /// Potential errors below this level are dominated by the error in the
    /// reference masses and are left out of slope fits.
    pub fn noise_floor(&self) -> f64 {
        match self.ground_truth {
            GroundTruthSpec::Random { n_reference: Some(n), .. } => {
                let m = match &self.target {
                    TargetSpec::UniformCube { m, .. } => *m,
                    TargetSpec::Fixed(t) => t.len(),
                };
                25.0 * m as f64 / n as f64
            }
            _ => 0.0,
        }
    }
}
