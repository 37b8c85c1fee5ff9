//! Projected stochastic gradient descent with iterate averaging, and the
//! adaptive variants it is compared against.
//!
//! Every variant takes a (batch-mean) stochastic subgradient, applies its
//! update, clips onto the box, and updates the running average
//! `g_bar_k = g_bar_{k-1} + (g_k - g_bar_{k-1}) / (k + 1)`.

use std::fmt;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::projection::ProjectionBox;
use crate::rng::{purpose, StreamKey};
use crate::semidual::{Potential, Problem};
use crate::trace::{Checkpoint, RunTrace};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Step `gamma1 / k^b`.
    Psgd,
    /// Diagonal Adagrad with base step `gamma1`.
    Adagrad,
    /// Adam with fixed step `gamma1`.
    AdamProjected,
    /// S-Adam: step `gamma1 / k`, preconditioned by `v` instead of `sqrt(v)`.
    SAdamProjected,
}

impl Variant {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "psgd" | "sgd" => Ok(Variant::Psgd),
            "adagrad" => Ok(Variant::Adagrad),
            "adam" | "adamprojected" => Ok(Variant::AdamProjected),
            "sadam" | "sadamprojected" => Ok(Variant::SAdamProjected),
            _ => Err(Error::Config(format!("unknown optimizer variant {s:?}"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Variant::Psgd => "psgd",
            Variant::Adagrad => "adagrad",
            Variant::AdamProjected => "adam",
            Variant::SAdamProjected => "sadam",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamParams {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl Default for AdamParams {
    fn default() -> Self {
        Self { beta1: 0.9, beta2: 0.999, eps: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub variant: Variant,
    pub gamma1: f64,
    pub b: f64,
    pub batch: usize,
    pub max_iters: u64,
    pub seed: u64,
    pub adam: AdamParams,
}

impl OptimizerConfig {
    pub fn new(variant: Variant, gamma1: f64, b: f64, batch: usize, max_iters: u64, seed: u64) -> Result<Self> {
        let cfg = Self { variant, gamma1, b, batch, max_iters, seed, adam: AdamParams::default() };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma1 > 0.0) || !self.gamma1.is_finite() {
            return Err(Error::Config(format!("gamma1 must be > 0, got {}", self.gamma1)));
        }
        if !(0.5..1.0).contains(&self.b) {
            return Err(Error::Config(format!("b must be in [1/2, 1), got {}", self.b)));
        }
        if self.batch == 0 {
            return Err(Error::Config("batch must be >= 1".into()));
        }
        let a = &self.adam;
        if !(0.0..1.0).contains(&a.beta1) || !(0.0..1.0).contains(&a.beta2) || !(a.eps > 0.0) {
            return Err(Error::Config("adam parameters need beta in [0, 1) and eps > 0".into()));
        }
        Ok(())
    }

    pub fn with_iters(mut self, n: u64) -> Self {
        self.max_iters = n;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    #[inline]
    pub fn step_size(&self, k: u64) -> f64 {
        self.gamma1 / (k as f64).powf(self.b)
    }
}

impl fmt::Display for OptimizerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "variant={} gamma1={:e} b={} batch={} max_iters={} seed={}",
            self.variant.name(),
            self.gamma1,
            self.b,
            self.batch,
            self.max_iters,
            self.seed
        )?;
        if matches!(self.variant, Variant::AdamProjected | Variant::SAdamProjected) {
            write!(f, " beta1={} beta2={} eps={:e}", self.adam.beta1, self.adam.beta2, self.adam.eps)?;
        }
        Ok(())
    }
}

/// General-setting preset: `gamma1 = Diam(C) / (2 sqrt 2)`, `b = 1/2`.
pub fn preset_general(bx: &ProjectionBox) -> OptimizerConfig {
    OptimizerConfig {
        variant: Variant::Psgd,
        gamma1: bx.euclidean_diameter() / (2.0 * std::f64::consts::SQRT_2),
        b: 0.5,
        batch: 1,
        max_iters: 1,
        seed: 0,
        adam: AdamParams::default(),
    }
}

/// Experiment preset: `gamma1 = Diam(C)` with the given decay.
pub fn preset_experiment(bx: &ProjectionBox, b: f64) -> Result<OptimizerConfig> {
    let cfg = OptimizerConfig {
        variant: Variant::Psgd,
        gamma1: bx.euclidean_diameter(),
        b,
        batch: 1,
        max_iters: 1,
        seed: 0,
        adam: AdamParams::default(),
    };
    if !(0.5..1.0).contains(&b) {
        return Err(Error::Config(format!("b must be in [1/2, 1), got {b}")));
    }
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverState {
    pub g: Potential,
    pub g_bar: Potential,
    pub k: u64,
    /// Adagrad: running sum of squares. Adam/S-Adam: second moment.
    pub second: Vec<f64>,
    /// Adam/S-Adam first moment.
    pub first: Vec<f64>,
}

impl SolverState {
    pub fn new(g0: Potential) -> Self {
        let m = g0.len();
        Self { g_bar: g0.clone(), g: g0, k: 0, second: vec![0.0; m], first: vec![0.0; m] }
    }
}

/// One optimizer step with the given (batch-mean) subgradient.
pub fn step(state: &mut SolverState, cfg: &OptimizerConfig, bx: &ProjectionBox, grad: &[f64]) {
    debug_assert_eq!(grad.len(), state.g.len());
    state.k += 1;
    let k = state.k;
    match cfg.variant {
        Variant::Psgd => {
            let gamma = cfg.step_size(k);
            for (g, d) in state.g.iter_mut().zip(grad) {
                *g -= gamma * d;
            }
        }
        Variant::Adagrad => {
            let eps = cfg.adam.eps;
            for ((g, s), d) in state.g.iter_mut().zip(&mut state.second).zip(grad) {
                *s += d * d;
                *g -= cfg.gamma1 * d / (s.sqrt() + eps);
            }
        }
        Variant::AdamProjected | Variant::SAdamProjected => {
            let AdamParams { beta1, beta2, eps } = cfg.adam;
            let c1 = 1.0 - beta1.powf(k as f64);
            let c2 = 1.0 - beta2.powf(k as f64);
            let sadam = cfg.variant == Variant::SAdamProjected;
            let lr = if sadam { cfg.gamma1 / k as f64 } else { cfg.gamma1 };
            for (((g, m), v), d) in state.g.iter_mut().zip(&mut state.first).zip(&mut state.second).zip(grad) {
                *m = beta1 * *m + (1.0 - beta1) * d;
                *v = beta2 * *v + (1.0 - beta2) * d * d;
                let m_hat = *m / c1;
                let v_hat = *v / c2;
                let denom = if sadam { v_hat + eps } else { v_hat.sqrt() + eps };
                *g -= lr * m_hat / denom;
            }
        }
    }
    bx.clip_in_place(&mut state.g);
    let inv = 1.0 / (k + 1) as f64;
    for (a, g) in state.g_bar.iter_mut().zip(state.g.iter()) {
        *a += (g - *a) * inv;
    }
}

/// Iterations `ceil(10^(j/8))`, j = 0, 1, ..., up to `max_iters`, which is
/// always included last.
pub fn checkpoint_schedule(max_iters: u64) -> Vec<u64> {
    let mut out: Vec<u64> = Vec::new();
    for j in 0.. {
        let v = 10f64.powf(j as f64 / 8.0);
        let r = v.round();
        let it = if (v - r).abs() <= 1e-9 * v { r } else { v.ceil() } as u64;
        if it >= max_iters {
            break;
        }
        if out.last() != Some(&it) {
            out.push(it);
        }
    }
    if max_iters > 0 {
        out.push(max_iters);
    }
    out
}

/// Error diagnostics computed at a checkpoint by the caller.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostics {
    pub pot_err_last: f64,
    pub pot_err_avg: f64,
    pub map_err_last: f64,
    pub map_err_avg: f64,
    pub h_gap_avg: f64,
    pub h_gap_stderr: f64,
}

impl Diagnostics {
    pub fn unavailable() -> Self {
        Self {
            pot_err_last: f64::NAN,
            pot_err_avg: f64::NAN,
            map_err_last: f64::NAN,
            map_err_avg: f64::NAN,
            h_gap_avg: f64::NAN,
            h_gap_stderr: f64::NAN,
        }
    }
}

/// Runs the configured optimizer for `cfg.max_iters` iterations, drawing
/// `cfg.batch` samples per iteration from the stream
/// `key / TRAIN`. `diagnose(state, checkpoint_index)` fills the trace at
/// every point of [`checkpoint_schedule`].
pub fn run<F>(
    problem: &Problem,
    bx: &ProjectionBox,
    cfg: &OptimizerConfig,
    g0: Potential,
    key: StreamKey,
    mut diagnose: F,
) -> Result<(SolverState, RunTrace)>
where
    F: FnMut(&SolverState, usize) -> Diagnostics,
{
    cfg.validate()?;
    let m = problem.m();
    if g0.len() != m || bx.dim() != m {
        return Err(Error::invalid(format!(
            "dimension mismatch: target M={m}, g0 has {}, box has {}",
            g0.len(),
            bx.dim()
        )));
    }
    if cfg.max_iters == 0 {
        return Err(Error::Config("max_iters must be >= 1".into()));
    }
    let mut g0 = g0;
    bx.clip_in_place(&mut g0);

    let schedule = checkpoint_schedule(cfg.max_iters);
    let mut state = SolverState::new(g0);
    let mut trace = RunTrace { checkpoints: Vec::with_capacity(schedule.len()), config: cfg.to_string(), seed: cfg.seed };

    let mut rng = key.child(purpose::TRAIN).stream();
    let d = problem.target.dim();
    let weights = problem.target.weights();
    let mut x = vec![0.0; d];
    let mut counts = vec![0u32; m];
    let mut grad = vec![0.0; m];
    let inv_batch = 1.0 / cfg.batch as f64;
    let mut elapsed = 0.0;
    let mut next = 0;

    while state.k < cfg.max_iters {
        let t0 = Instant::now();
        let until = schedule[next];
        while state.k < until {
            counts.iter_mut().for_each(|c| *c = 0);
            for _ in 0..cfg.batch {
                problem.source.sample_into(&mut rng, &mut x);
                counts[problem.cell(&state.g, &x)] += 1;
            }
            for ((gr, &c), w) in grad.iter_mut().zip(&counts).zip(weights) {
                *gr = c as f64 * inv_batch - w;
            }
            step(&mut state, cfg, bx, &grad);
        }
        elapsed += t0.elapsed().as_secs_f64();
        let diag = diagnose(&state, next);
        trace.checkpoints.push(Checkpoint {
            iter: state.k,
            n_samples: state.k * cfg.batch as u64,
            pot_err_last: diag.pot_err_last,
            pot_err_avg: diag.pot_err_avg,
            map_err_last: diag.map_err_last,
            map_err_avg: diag.map_err_avg,
            h_gap_avg: diag.h_gap_avg,
            h_gap_stderr: diag.h_gap_stderr,
            wall_time_s: elapsed,
        });
        next += 1;
    }
    Ok((state, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cost::CostFunction;
    use crate::measures::{DiscreteTarget, SourceMeasure};

    fn psgd(gamma1: f64, b: f64) -> OptimizerConfig {
        OptimizerConfig::new(Variant::Psgd, gamma1, b, 1, 10, 0).unwrap()
    }

    #[test]
    fn zero_gradient_keeps_iterate() {
        let bx = ProjectionBox::new(10.0, 2).unwrap();
        let mut s = SolverState::new(vec![1.0, -1.0].into());
        s.g_bar = vec![0.0, 0.0].into();
        step(&mut s, &psgd(1.0, 0.5), &bx, &[0.0, 0.0]);
        assert_eq!(&*s.g, &[1.0, -1.0]);
        assert_eq!(&*s.g_bar, &[0.5, -0.5]);
    }

    #[test]
    fn one_step_arithmetic_and_clip() {
        let grad = [0.5, -0.5];
        let bx = ProjectionBox::new(10.0, 2).unwrap();
        let mut s = SolverState::new(Potential::zeros(2));
        step(&mut s, &psgd(1.0, 0.5), &bx, &grad);
        assert_eq!(&*s.g, &[-0.5, 0.5]);
        let bx = ProjectionBox::new(0.4, 2).unwrap();
        let mut s = SolverState::new(Potential::zeros(2));
        step(&mut s, &psgd(1.0, 0.5), &bx, &grad);
        assert_eq!(&*s.g, &[-0.4, 0.4]);
    }

    #[test]
    fn presets() {
        let cfg = preset_general(&ProjectionBox::new(1.0, 2).unwrap());
        assert!((cfg.gamma1 - 1.0).abs() < 1e-15);
        assert_eq!(cfg.b, 0.5);
        let r = 10f64.powf(0.75);
        let cfg = preset_general(&ProjectionBox::new(r, 50).unwrap());
        assert!((cfg.gamma1 - 5.0 * r).abs() < 1e-12);
        assert!((cfg.gamma1 - 28.12).abs() < 0.01);
        let bx = ProjectionBox::new(2.0, 9).unwrap();
        let e = preset_experiment(&bx, 0.75).unwrap();
        assert_eq!(e.gamma1, 12.0);
        assert_eq!(e.b, 0.75);
        assert_eq!(preset_experiment(&bx, 0.9).unwrap().b, 0.9);
        assert!(preset_experiment(&bx, 1.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(OptimizerConfig::new(Variant::Psgd, 0.0, 0.5, 1, 1, 0).is_err());
        assert!(OptimizerConfig::new(Variant::Psgd, 1.0, 0.4, 1, 1, 0).is_err());
        assert!(OptimizerConfig::new(Variant::Psgd, 1.0, 1.0, 1, 1, 0).is_err());
        assert!(OptimizerConfig::new(Variant::Psgd, 1.0, 0.5, 0, 1, 0).is_err());
        assert_eq!(Variant::parse("S-Adam").unwrap(), Variant::SAdamProjected);
        assert!(Variant::parse("lbfgs").is_err());
    }

    #[test]
    fn step_sizes_decrease() {
        let cfg = psgd(3.0, 0.75);
        for k in 1..1000 {
            assert!(cfg.step_size(k + 1) < cfg.step_size(k));
        }
        assert_eq!(cfg.step_size(1), 3.0);
    }

    #[test]
    fn schedule_is_log_spaced() {
        let s = checkpoint_schedule(100_000);
        assert_eq!(&s[..6], &[1, 2, 3, 4, 5, 6]);
        for n in [10, 100, 1000, 10_000, 100_000] {
            assert!(s.contains(&n), "{n} missing");
        }
        assert!(s.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(*s.last().unwrap(), 100_000);
        assert_eq!(checkpoint_schedule(7).last(), Some(&7));
    }

    fn problem() -> Problem {
        let t = DiscreteTarget::new(vec![0.0, 0.5, 1.0], 1, vec![0.2, 0.3, 0.5]).unwrap();
        Problem::new(CostFunction::quadratic(), t, SourceMeasure::uniform_cube(1, 0.0, 1.0).unwrap()).unwrap()
    }

    #[test]
    fn averaging_matches_arithmetic_mean() {
        let p = problem();
        let bx = ProjectionBox::new(0.5, 3).unwrap();
        let cfg = psgd(2.0, 0.6).with_iters(800);
        let mut state = SolverState::new(Potential::zeros(3));
        let mut iterates = vec![state.g.clone()];
        let mut rng = StreamKey::new(4).stream();
        let mut x = [0.0];
        for _ in 0..cfg.max_iters {
            p.source.sample_into(&mut rng, &mut x);
            let grad = p.subgradient_sample(&state.g, &x).unwrap().to_vec();
            step(&mut state, &cfg, &bx, &grad);
            assert!(bx.contains(&state.g) && bx.contains(&state.g_bar));
            iterates.push(state.g.clone());
        }
        for j in 0..3 {
            let mean = iterates.iter().map(|g| g[j]).sum::<f64>() / iterates.len() as f64;
            assert!((mean - state.g_bar[j]).abs() < 1e-12);
        }
    }

    #[test]
    fn single_point_target_never_moves() {
        let t = DiscreteTarget::uniform(vec![0.3], 1).unwrap();
        let p = Problem::new(CostFunction::quadratic(), t, SourceMeasure::SqrtDensity1D).unwrap();
        let bx = ProjectionBox::new(1.0, 1).unwrap();
        let (s, trace) = run(&p, &bx, &psgd(1.0, 0.5).with_iters(500), vec![0.25].into(), StreamKey::new(1), |_, _| {
            Diagnostics::unavailable()
        })
        .unwrap();
        assert_eq!(&*s.g, &[0.25]);
        assert_eq!(&*s.g_bar, &[0.25]);
        assert_eq!(trace.checkpoints.last().unwrap().iter, 500);
    }

    #[test]
    fn shift_of_start_shifts_every_iterate() {
        let p = problem();
        let bx = ProjectionBox::new(1e6, 3).unwrap();
        let a = 0.375;
        let cfg = psgd(0.5, 0.75).with_iters(2000);
        let g0: Potential = vec![0.1, -0.2, 0.05].into();
        let collect = |g0: Potential| {
            let mut iters = Vec::new();
            run(&p, &bx, &cfg, g0, StreamKey::new(9), |s, _| {
                iters.push(s.g.clone());
                Diagnostics::unavailable()
            })
            .unwrap();
            iters
        };
        let base = collect(g0.clone());
        let shifted = collect(g0.shifted(a));
        for (u, v) in base.iter().zip(&shifted) {
            for (x, y) in u.iter().zip(v.iter()) {
                assert!((y - x - a).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn runs_are_deterministic_for_every_variant() {
        let p = problem();
        let bx = ProjectionBox::new(0.5, 3).unwrap();
        for v in [Variant::Psgd, Variant::Adagrad, Variant::AdamProjected, Variant::SAdamProjected] {
            let cfg = OptimizerConfig::new(v, 0.05, 0.75, 4, 3000, 1).unwrap();
            let go = || {
                run(&p, &bx, &cfg, Potential::zeros(3), StreamKey::new(2), |s, _| Diagnostics {
                    pot_err_last: s.g[0],
                    ..Diagnostics::unavailable()
                })
                .unwrap()
            };
            let (s1, t1) = go();
            let (s2, t2) = go();
            assert_eq!(s1, s2);
            assert_eq!(t1.to_csv(false), t2.to_csv(false));
            assert!(bx.contains(&s1.g) && bx.contains(&s1.g_bar));
        }
    }

    #[test]
    fn psgd_finds_the_uniform_optimum() {
        // U(0,1), y = (0, 1/2, 1): thresholds 0.2 and 0.5.
        let p = problem();
        let bx = ProjectionBox::new(0.5, 3).unwrap();
        let cfg = psgd(bx.euclidean_diameter(), 0.75).with_iters(200_000);
        let (s, _) = run(&p, &bx, &cfg, Potential::zeros(3), StreamKey::new(3), |_, _| Diagnostics::unavailable()).unwrap();
        let masses = p.estimate_cell_masses(&s.g_bar, StreamKey::new(77), 200_000).unwrap();
        for (m, w) in masses.iter().zip(p.target.weights()) {
            assert!((m - w).abs() < 0.01, "{masses:?}");
        }
    }
}
