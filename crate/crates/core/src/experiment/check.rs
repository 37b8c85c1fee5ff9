//! Self-checks of a 1-D oracle instance.

use rand::Rng;

use super::metrics::map_error_mc;
use crate::cost::CostFunction;
use crate::error::Result;
use crate::oracle::{cell_masses_exact, hessian_1d, map_error_exact_1d, Oracle1D};
use crate::rng::{purpose, StreamKey};
use crate::semidual::Problem;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

const FIRST_ORDER_TOL: f64 = 1e-10;
const FD_STEP: f64 = 1e-5;
const FD_REL_TOL: f64 = 1e-4;

fn first_order(o: &Oracle1D) -> Result<CheckResult> {
    let masses = cell_masses_exact(&o.source, &o.target, &o.g_star)?;
    let err = masses.iter().zip(o.target.weights()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(CheckResult {
        name: "first_order",
        passed: err <= FIRST_ORDER_TOL,
        detail: format!("max |mu(L_i(g*)) - w_i| = {err:.3e} (tol {FIRST_ORDER_TOL:e})"),
    })
}

fn hessian_fd(o: &Oracle1D) -> Result<CheckResult> {
    let h = match hessian_1d(&o.source, &o.target, &o.g_star) {
        Ok(h) => h,
        Err(e) => return Ok(CheckResult { name: "hessian_fd", passed: false, detail: e.to_string() }),
    };
    let m = h.len();
    let mut worst: f64 = 0.0;
    let mut g = o.g_star.to_vec();
    for j in 0..m {
        g[j] = o.g_star[j] + FD_STEP;
        let plus = cell_masses_exact(&o.source, &o.target, &g)?;
        g[j] = o.g_star[j] - FD_STEP;
        let minus = cell_masses_exact(&o.source, &o.target, &g)?;
        g[j] = o.g_star[j];
        for i in 0..m {
            let fd = (plus[i] - minus[i]) / (2.0 * FD_STEP);
            let err = (fd - h[i][j]).abs();
            let rel = if h[i][j] == 0.0 { err } else { err / h[i][j].abs() };
            worst = worst.max(rel);
        }
    }
    // the chain of cells is connected iff every adjacent coupling is
    // negative, which makes span{1} the whole kernel
    let connected = (0..m.saturating_sub(1)).all(|i| h[i][i + 1] < 0.0);
    Ok(CheckResult {
        name: "hessian_fd",
        passed: worst <= FD_REL_TOL && connected,
        detail: format!("max relative deviation {worst:.3e} (tol {FD_REL_TOL:e}), kernel span(1): {connected}"),
    })
}

fn box_containment(o: &Oracle1D) -> Result<CheckResult> {
    let bx = o.projection_box()?;
    let g = o.g_star.first_fixed();
    let sup = g.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(CheckResult {
        name: "box_containment",
        passed: bx.contains(&g),
        detail: format!("max |g*_j| = {sup:.6} vs box radius {:.6}", bx.radius()),
    })
}

fn map_error_agreement(o: &Oracle1D, key: StreamKey, n_mc: usize) -> Result<CheckResult> {
    let mut rng = key.child(0).stream();
    let scale = 0.05 * (1.0 + o.g_star.iter().map(|v| v.abs()).fold(0.0, f64::max));
    let g: Vec<f64> = o.g_star.iter().map(|v| v + scale * (2.0 * rng.random::<f64>() - 1.0)).collect();
    let exact = map_error_exact_1d(o, &g, 1.0)?;
    let problem = Problem::new(CostFunction::quadratic(), o.target.clone(), o.source.clone())?;
    let mc = map_error_mc(&problem, &g, &o.g_star, key.child(1), n_mc, 1.0)?;
    let se = mc.pth_power.std_err();
    let diff = (mc.value - exact).abs();
    Ok(CheckResult {
        name: "map_error_exact_vs_mc",
        passed: diff <= 4.0 * se + 1e-12,
        detail: format!("exact {exact:.6e}, mc {:.6e} +- {se:.2e} ({:.2} std errs)", mc.value, diff / se.max(1e-300)),
    })
}

/// First-order optimality, Hessian against finite differences of the exact
/// cell masses, box containment of `g*`, and exact against Monte-Carlo map
/// error at a random perturbation of `g*`.
pub fn oracle_check(oracle: &Oracle1D, key: StreamKey, n_mc: usize) -> Result<Vec<CheckResult>> {
    Ok(vec![
        first_order(oracle)?,
        hessian_fd(oracle)?,
        box_containment(oracle)?,
        map_error_agreement(oracle, key.child(purpose::CHECK), n_mc)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::{DiscreteTarget, SourceMeasure};
    use crate::oracle::solve_1d_exact;

    fn half_half() -> DiscreteTarget {
        DiscreteTarget::new(vec![0.0, 1.0], 1, vec![0.5, 0.5]).unwrap()
    }

    #[test]
    fn gaussian_and_sqrt_oracles_pass() {
        for src in [SourceMeasure::gaussian(vec![0.3], 1.0).unwrap(), SourceMeasure::SqrtDensity1D] {
            let o = solve_1d_exact(&src, &half_half()).unwrap();
            let res = oracle_check(&o, StreamKey::new(1), 100_000).unwrap();
            assert!(res.iter().all(|r| r.passed), "{res:?}");
        }
    }

    #[test]
    fn corrupted_potential_fails_first_order() {
        let src = SourceMeasure::gaussian(vec![0.3], 1.0).unwrap();
        let mut o = solve_1d_exact(&src, &half_half()).unwrap();
        o.g_star[1] += 0.1;
        let res = oracle_check(&o, StreamKey::new(1), 10_000).unwrap();
        assert!(!res[0].passed);
    }
}
