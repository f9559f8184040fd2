//! Convergence-rate study: runs the fixed-stress solver on a mesh ladder
//! against the manufactured solution and reports L² errors and rates.
//!
//! Errors compare the reconstructed full solutions against the full analytic
//! ones with the singular parts interpolated identically on both sides at
//! quadrature level, so the discrete singular interpolant cancels and the
//! measured quantities reduce to the remainder errors
//! ‖p_r,ex - p_r,h‖, ‖w_r,ex - w_r,h‖ plus ‖u_ex - u_h‖.

use std::time::Instant;

use crate::biot::{BiotSystem, DiscreteState, SolverConfig};
use crate::error::Result;
use crate::fem::{l2_error_p0, l2_error_p1v, l2_error_rt0, MaterialParams};
use crate::mesh::build_structured_tet_mesh;

use super::manufactured::ManufacturedCase;

/// Quadrature degree used for the error integrals.
pub const ERROR_QUAD_DEGREE: usize = 6;

/// Errors and diagnostics of one mesh level.
#[derive(Clone, Debug)]
pub struct LevelResult {
    pub n: usize,
    pub h: f64,
    pub err_p: f64,
    pub err_w: f64,
    pub err_u: f64,
    /// Fixed-stress iterations per time step.
    pub iterations: Vec<usize>,
    pub wall_seconds: f64,
}

/// Per-level errors, successive rates, and least-squares fitted rates.
#[derive(Clone, Debug)]
pub struct ConvergenceReport {
    pub levels: Vec<LevelResult>,
    /// log2(e_{2h}/e_h) between successive levels, per variable (p, w, u).
    pub successive_rates: Vec<[f64; 3]>,
    /// Least-squares slope of log e against log h, per variable (p, w, u).
    pub fitted_rates: [f64; 3],
}

/// Runs the full solver at one mesh level and measures errors at t = T.
pub fn run_level(n: usize, case: &ManufacturedCase, config: &SolverConfig) -> Result<LevelResult> {
    let start = Instant::now();
    let mesh = build_structured_tet_mesh(n)?;
    let system = BiotSystem::new(
        mesh,
        case.params.clone(),
        Some(case.network()),
        config.clone(),
    )?;
    let initial = DiscreteState::zeros(system.dofs(), 0.0);
    let loads_at = |t: f64| case.step_loads(&system, t);
    let trajectory = system.run(initial, &loads_at)?;
    let last = trajectory.states.last().expect("at least one time step");
    let t_end = last.t;

    let err_p = l2_error_p0(
        system.mesh(),
        system.dofs(),
        &last.p_r,
        &|x| case.pr(x, t_end),
        ERROR_QUAD_DEGREE,
    )?;
    let err_w = l2_error_rt0(
        system.mesh(),
        system.dofs(),
        &last.w_r,
        &|x| case.wr(x, t_end),
        ERROR_QUAD_DEGREE,
    )?;
    let err_u = l2_error_p1v(
        system.mesh(),
        system.dofs(),
        &last.u,
        &|x| Ok(case.u(x, t_end)),
        ERROR_QUAD_DEGREE,
    )?;

    Ok(LevelResult {
        n,
        h: 1.0 / n as f64,
        err_p,
        err_w,
        err_u,
        iterations: trajectory.iterations,
        wall_seconds: start.elapsed().as_secs_f64(),
    })
}

/// Runs the study over a mesh ladder.
pub fn run_convergence_study(
    levels: &[usize],
    params: &MaterialParams,
    config: &SolverConfig,
) -> Result<ConvergenceReport> {
    let case = ManufacturedCase::standard(params.clone());
    let mut results = Vec::with_capacity(levels.len());
    for &n in levels {
        log::info!("convergence study: level n = {n}");
        results.push(run_level(n, &case, config)?);
    }
    Ok(report_from_levels(results))
}

pub fn report_from_levels(levels: Vec<LevelResult>) -> ConvergenceReport {
    let mut successive = Vec::new();
    for pair in levels.windows(2) {
        successive.push([
            (pair[0].err_p / pair[1].err_p).log2() / (pair[1].n as f64 / pair[0].n as f64).log2(),
            (pair[0].err_w / pair[1].err_w).log2() / (pair[1].n as f64 / pair[0].n as f64).log2(),
            (pair[0].err_u / pair[1].err_u).log2() / (pair[1].n as f64 / pair[0].n as f64).log2(),
        ]);
    }
    let fit = |pick: &dyn Fn(&LevelResult) -> f64| -> f64 {
        // least-squares slope of ln e over ln h
        let pts: Vec<(f64, f64)> = levels.iter().map(|l| (l.h.ln(), pick(l).ln())).collect();
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        (n * sxy - sx * sy) / (n * sxx - sx * sx)
    };
    let fitted = [fit(&|l| l.err_p), fit(&|l| l.err_w), fit(&|l| l.err_u)];
    ConvergenceReport {
        levels,
        successive_rates: successive,
        fitted_rates: fitted,
    }
}

impl ConvergenceReport {
    /// ASCII table: per-level errors, fitted rates, optimal reference rates.
    pub fn table(&self) -> String {
        let mut out = String::new();
        out.push_str("    h        err_p        err_w        err_u     iters  wall[s]\n");
        for l in &self.levels {
            let max_it = l.iterations.iter().copied().max().unwrap_or(0);
            out.push_str(&format!(
                " 1/{:<4}  {:10.3e}  {:10.3e}  {:10.3e}   {:4}  {:7.1}\n",
                l.n, l.err_p, l.err_w, l.err_u, max_it, l.wall_seconds
            ));
        }
        out.push_str(&format!(
            " rate    {:10.2}  {:10.2}  {:10.2}\n",
            self.fitted_rates[0], self.fitted_rates[1], self.fitted_rates[2]
        ));
        out.push_str(" optimal       1.00        1.00        2.00\n");
        out
    }
}
