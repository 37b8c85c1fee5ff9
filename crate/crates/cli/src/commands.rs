use std::fmt;
use std::path::Path;

use sdot_core::experiment::config::{load_experiment, load_oracle_check, load_radius, load_solve};
use sdot_core::experiment::{oracle_check as run_checks, projection_box, run_experiment};
use sdot_core::optim::{self, Diagnostics};
use sdot_core::oracle::solve_1d_exact;
use sdot_core::projection::{box_radius, estimate_radius};
use sdot_core::rng::purpose;
use sdot_core::{Compact, Error, Potential, Problem, StreamKey};

use crate::output::{vector_text, write_atomic};

/// Samples used for the objective estimate printed by `solve`.
const N_COST_EVAL: usize = 100_000;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Runtime(_) => 3,
        }
    }

    /// Errors while loading a config.
    fn config(e: Error) -> Self {
        CliError::Config(e.to_string())
    }

    /// Errors while running: configuration problems found late keep their
    /// exit code.
    fn runtime(e: Error) -> Self {
        match e {
            Error::Config(_) => CliError::Config(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Runtime(format!("cannot write {}: {e}", path.display()))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

type CliResult = Result<u8, CliError>;

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    write_atomic(path, contents).map_err(|e| CliError::io(path, e))
}

pub fn solve(config: &Path, seed: Option<u64>, out: &Path, iters: Option<u64>, timing: bool, quiet: bool) -> CliResult {
    let mut spec = load_solve(config).map_err(CliError::config)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(n) = iters {
        spec.optimizer.iters = n;
    }
    let key = StreamKey::new(spec.seed);
    let problem = Problem::new(spec.cost, spec.target.clone(), spec.source.clone()).map_err(CliError::config)?;
    let bx = projection_box(&spec.cost, &spec.source, &spec.target, &spec.box_spec, key).map_err(CliError::runtime)?;
    let cfg = spec.optimizer.to_config(&bx, spec.seed).map_err(CliError::config)?;
    log::info!("box radius {:.6}, {}", bx.radius(), cfg);

    let (state, trace) =
        optim::run(&problem, &bx, &cfg, Potential::zeros(problem.m()), key, |_, _| Diagnostics::unavailable())
            .map_err(CliError::runtime)?;
    let h = problem
        .estimate_h(&state.g_bar, key.child(purpose::EVAL), N_COST_EVAL)
        .map_err(CliError::runtime)?;

    write(&out.join("g_last.txt"), &vector_text(&state.g))?;
    write(&out.join("g_avg.txt"), &vector_text(&state.g_bar))?;
    write(&out.join("trace.csv"), &trace.to_csv(timing || spec.timing))?;
    if !quiet {
        println!("iterations   {}", state.k);
        println!("box_radius   {:.17e}", bx.radius());
        println!("ot_cost      {:.17e} +- {:.3e}", -h.mean, h.std_err());
    }
    Ok(0)
}

pub fn experiment(
    config: &Path,
    seed: Option<u64>,
    out: &Path,
    iters: Option<u64>,
    repeats: Option<usize>,
    timing: bool,
    quiet: bool,
) -> CliResult {
    let mut spec = load_experiment(config).map_err(CliError::config)?;
    if let Some(s) = seed {
        spec.seed = s;
    }
    if let Some(r) = repeats {
        spec.repeats = r;
    }
    if let Some(n) = iters {
        spec.optimizers.iter_mut().for_each(|o| o.iters = n);
    }
    spec.eval.timing |= timing;
    for w in spec.warnings() {
        log::warn!("{w}");
    }
    log::info!("{}: {} repeats x {} configs", spec.name, spec.repeats, spec.optimizers.len());

    let res = run_experiment(&spec).map_err(CliError::runtime)?;
    let dir = out.join(&res.name);
    for (name, traces) in res.config_names.iter().zip(&res.traces) {
        for (r, t) in traces.iter().enumerate() {
            write(&dir.join(name).join(format!("{r}.csv")), &t.to_csv(res.timing))?;
        }
    }
    write(&dir.join("summary.csv"), &res.summary_csv())?;

    if !quiet {
        println!("{:<16} {:<14} {:>9} {:>9} {:>5} {:>12}", "config", "metric", "slope", "stderr", "n", "final");
        for row in &res.summary {
            let (slope, se, n) = match row.fit {
                Some(f) => (format!("{:.4}", f.slope), format!("{:.4}", f.stderr), f.n_points),
                None => ("-".into(), "-".into(), 0),
            };
            println!(
                "{:<16} {:<14} {:>9} {:>9} {:>5} {:>12.4e}",
                row.config,
                row.metric.name(),
                slope,
                se,
                n,
                row.final_value
            );
        }
    }
    Ok(0)
}

pub fn radius(config: &Path, seed: Option<u64>) -> CliResult {
    let spec = load_radius(config).map_err(CliError::config)?;
    let key = StreamKey::new(seed.unwrap_or(spec.seed)).child(purpose::RADIUS);
    let est = estimate_radius(&spec.source, spec.w_min, spec.delta, key, spec.max_samples).map_err(CliError::config)?;
    println!("R          {:.17e}", est.radius);
    println!("n_used     {}", est.n_used);
    if est.capped {
        println!("capped     true (sample size below the DKW requirement; no guarantee)");
    }
    if let Some((cost, target)) = &spec.problem {
        let k = Compact::Ball { center: vec![0.0; target.dim()], radius: est.radius };
        let r = box_radius(cost, target, &k).map_err(CliError::runtime)?;
        println!("box_radius {r:.17e}");
    }
    Ok(0)
}

pub fn oracle_check(config: &Path, seed: Option<u64>) -> CliResult {
    let spec = load_oracle_check(config).map_err(CliError::config)?;
    let mut oracle = solve_1d_exact(&spec.source, &spec.target).map_err(CliError::runtime)?;
    if let Some((i, a)) = spec.perturb {
        oracle.g_star[i] += a;
    }
    let results = run_checks(&oracle, StreamKey::new(seed.unwrap_or(spec.seed)), spec.n_mc).map_err(CliError::runtime)?;
    for r in &results {
        println!("{} {:<22} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
    }
    Ok(if results.iter().all(|r| r.passed) { 0 } else { 1 })
}
