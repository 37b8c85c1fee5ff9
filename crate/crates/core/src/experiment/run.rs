use std::collections::HashSet;
use std::fmt::Write as _;

use rayon::prelude::*;

use super::ground_truth::{build_box, make_ground_truth, GroundTruth};
use super::metrics::{displacement_pow, potential_error};
use super::rate::{default_window, fit_rate, RateFit};
use super::{ExperimentSpec, MapErrorMode, OptimizerSpec};
use crate::cost::c_transform_unchecked;
use crate::error::{Error, Result};
use crate::mc;
use crate::optim::{self, Diagnostics, SolverState};
use crate::oracle::map_error_exact_1d;
use crate::projection::ProjectionBox;
use crate::rng::{purpose, StreamKey};
use crate::semidual::{Potential, Problem};
use crate::trace::{Metric, RunTrace};

pub const SUMMARY_HEADER: &str = "config,metric,slope,slope_stderr,n_points,final_value";

/// Child index of a repeat key under which optimizer configs branch off.
const RUNS: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub config: String,
    pub metric: Metric,
    /// `None` when the window holds too few usable checkpoints.
    pub fit: Option<RateFit>,
    /// Seed-averaged value at the last checkpoint.
    pub final_value: f64,
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub name: String,
    pub config_names: Vec<String>,
    /// `traces[config][repeat]`.
    pub traces: Vec<Vec<RunTrace>>,
    /// Seed-averaged trace per config.
    pub means: Vec<RunTrace>,
    pub summary: Vec<SummaryRow>,
    /// Projection-box radius per repeat.
    pub box_radii: Vec<f64>,
    pub timing: bool,
}

fn fmt_f(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("NaN");
    } else {
        let _ = write!(out, "{v:.16e}");
    }
}

impl ExperimentResult {
    pub fn summary_csv(&self) -> String {
        let mut out = String::from(SUMMARY_HEADER);
        out.push('\n');
        for row in &self.summary {
            let _ = write!(out, "{},{},", row.config, row.metric.name());
            match row.fit {
                Some(f) => {
                    fmt_f(&mut out, f.slope);
                    out.push(',');
                    fmt_f(&mut out, f.stderr);
                    let _ = write!(out, ",{},", f.n_points);
                }
                None => out.push_str("NaN,NaN,0,"),
            }
            fmt_f(&mut out, row.final_value);
            out.push('\n');
        }
        out
    }

    pub fn row(&self, config: &str, metric: Metric) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.config == config && r.metric == metric)
    }
}

fn validate(spec: &ExperimentSpec) -> Result<()> {
    if spec.repeats == 0 {
        return Err(Error::Config("repeats must be >= 1".into()));
    }
    if spec.optimizers.is_empty() {
        return Err(Error::Config("at least one optimizer is required".into()));
    }
    let mut seen = HashSet::new();
    for o in &spec.optimizers {
        let ok = !o.name.is_empty()
            && o.name != "."
            && o.name != ".."
            && o.name.chars().all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
        if !ok {
            return Err(Error::Config(format!("optimizer name {:?} is not a plain file name", o.name)));
        }
        if !seen.insert(&o.name) {
            return Err(Error::Config(format!("duplicate optimizer name {:?}", o.name)));
        }
        if o.iters == 0 {
            return Err(Error::Config(format!("optimizer {:?}: iters must be >= 1", o.name)));
        }
    }
    if spec.eval.n_eval < 2 {
        return Err(Error::Config("eval.n_eval must be >= 2".into()));
    }
    if !(spec.eval.p >= 1.0) || !spec.eval.p.is_finite() {
        return Err(Error::Config(format!("eval.p must be >= 1, got {}", spec.eval.p)));
    }
    if !(spec.eval.window_decades > 0.0) {
        return Err(Error::Config("eval.window_decades must be > 0".into()));
    }
    Ok(())
}

fn evaluate(
    spec: &ExperimentSpec,
    problem: &Problem,
    gt: &GroundTruth,
    state: &SolverState,
    key: StreamKey,
) -> Result<Diagnostics> {
    let p = spec.eval.p;
    let g_star: &[f64] = &gt.g_star;
    let w = problem.target.weights();
    let dot = |g: &[f64]| w.iter().zip(g).map(|(a, b)| a * b).sum::<f64>();
    let (wg_avg, wg_star) = (dot(&state.g_bar), dot(g_star));
    let exact = spec.eval.map_error == MapErrorMode::Exact;
    let [last, avg, gap] = mc::sample_moments(&problem.source, key, spec.eval.n_eval, |x| {
        let cs = c_transform_unchecked(&problem.cost, &problem.target, g_star, x);
        let ca = c_transform_unchecked(&problem.cost, &problem.target, &state.g_bar, x);
        // h(g_bar, x) - h(g*, x)
        let gap = (cs.value - ca.value) - (wg_avg - wg_star);
        if exact {
            return [0.0, 0.0, gap];
        }
        let cl = problem.cell(&state.g, x);
        [displacement_pow(problem, cl, cs.cell, p), displacement_pow(problem, ca.cell, cs.cell, p), gap]
    });
    let (map_err_last, map_err_avg) = if exact {
        let oracle = gt
            .oracle
            .as_ref()
            .ok_or_else(|| Error::Config("exact map error needs a 1-D quadratic problem with a cdf".into()))?;
        (
            map_error_exact_1d(oracle, &state.g, p)?.powf(1.0 / p),
            map_error_exact_1d(oracle, &state.g_bar, p)?.powf(1.0 / p),
        )
    } else {
        (last.mean.powf(1.0 / p), avg.mean.powf(1.0 / p))
    };
    Ok(Diagnostics {
        pot_err_last: potential_error(&state.g, g_star)?,
        pot_err_avg: potential_error(&state.g_bar, g_star)?,
        map_err_last,
        map_err_avg,
        h_gap_avg: gap.mean,
        h_gap_stderr: gap.std_err(),
    })
}

fn run_one(
    spec: &ExperimentSpec,
    gt: &GroundTruth,
    bx: &ProjectionBox,
    opt: &OptimizerSpec,
    key: StreamKey,
) -> Result<RunTrace> {
    let problem = Problem::new(spec.cost, gt.target.clone(), spec.source.clone())?;
    let cfg = opt.to_config(bx, spec.seed)?;
    let mut failure = None;
    let (_, mut trace) = optim::run(&problem, bx, &cfg, Potential::zeros(problem.m()), key, |state, idx| {
        let eval_key = key.path(&[purpose::EVAL, idx as u64]);
        evaluate(spec, &problem, gt, state, eval_key).unwrap_or_else(|e| {
            failure.get_or_insert(e);
            Diagnostics::unavailable()
        })
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    trace.config = format!("name={} {}", opt.name, trace.config);
    Ok(trace)
}

/// Runs every optimizer config on `spec.repeats` independent ground truths.
///
/// Repeat `r` draws its target, `g*` and box from the stream `seed / r`;
/// config `c` trains and evaluates on `seed / r / 100 / c`. Runs execute in
/// parallel and results are collected in (config, repeat) order, so the
/// output does not depend on the thread count.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    validate(spec)?;
    let root = StreamKey::new(spec.seed);
    let setups: Vec<(GroundTruth, ProjectionBox)> = (0..spec.repeats)
        .into_par_iter()
        .map(|r| {
            let key = root.child(r as u64);
            let gt = make_ground_truth(spec, key)?;
            let bx = build_box(spec, &gt, key)?;
            Ok((gt, bx))
        })
        .collect::<Result<_>>()?;

    let n_cfg = spec.optimizers.len();
    let jobs: Vec<(usize, usize)> = (0..n_cfg).flat_map(|c| (0..spec.repeats).map(move |r| (c, r))).collect();
    let runs: Vec<RunTrace> = jobs
        .par_iter()
        .map(|&(c, r)| {
            let (gt, bx) = &setups[r];
            let key = root.path(&[r as u64, RUNS, c as u64]);
            let t = run_one(spec, gt, bx, &spec.optimizers[c], key);
            log::debug!("{}: config {} repeat {} done", spec.name, spec.optimizers[c].name, r);
            t
        })
        .collect::<Result<_>>()?;

    let mut traces: Vec<Vec<RunTrace>> = vec![Vec::with_capacity(spec.repeats); n_cfg];
    for ((c, _), t) in jobs.iter().zip(runs) {
        traces[*c].push(t);
    }
    let means = traces.iter().map(|ts| RunTrace::mean(ts)).collect::<Result<Vec<_>>>()?;

    let floor = spec.noise_floor();
    let mut summary = Vec::with_capacity(n_cfg * Metric::ALL.len());
    for (o, mean) in spec.optimizers.iter().zip(&means) {
        let window = default_window(mean, spec.eval.window_decades);
        let mut fitted = mean.clone();
        fitted.checkpoints.retain(|c| !(c.pot_err_avg < floor));
        for metric in Metric::ALL {
            summary.push(SummaryRow {
                config: o.name.clone(),
                metric,
                fit: fit_rate(&fitted, metric, window).ok(),
                final_value: mean.checkpoints.last().map_or(f64::NAN, |c| c.get(metric)),
            });
        }
    }

    Ok(ExperimentResult {
        name: spec.name.clone(),
        config_names: spec.optimizers.iter().map(|o| o.name.clone()).collect(),
        traces,
        means,
        summary,
        box_radii: setups.iter().map(|(_, bx)| bx.radius()).collect(),
        timing: spec.eval.timing,
    })
}
