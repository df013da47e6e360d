//! ADMM splitting between the affine constraint set and the PSD cone.
//!
//! With `c` the (minimization) objective in coordinates:
//!
//! ```text
//! x ← Π_aff(z − u − c/ρ)
//! x̂ ← α·x + (1 − α)·z
//! z ← Π_psd(x̂ + u)
//! u ← u + x̂ − z
//! ```
//!
//! `x` satisfies the equalities exactly and `z` is PSD; at a solution they
//! coincide. The returned point is `x`, so its constraint residual is at
//! round-off level and its negative eigenvalues are bounded by `‖x − z‖`.

use log::debug;

use super::canonical::{dist, dot, Canonical};
use super::coords::{from_coords, to_coords};
use super::{RawSolution, SdpError, SolverOptions};
use crate::numkernel::eigh;

/// Iterations before infeasibility is judged, and the spacing of the checks.
const INFEASIBILITY_BURN_IN: usize = 5_000;
const INFEASIBILITY_CHECK_EVERY: usize = 1_000;
const INFEASIBLE_RESIDUAL: f64 = 1e-4;

fn project_psd_coords(v: &[f64]) -> Result<Vec<f64>, SdpError> {
    let e = eigh(&from_coords(v))?;
    if e.min_value() >= 0.0 {
        return Ok(v.to_vec());
    }
    Ok(to_coords(&e.reconstruct_with(|l| l.max(0.0))))
}

pub(super) fn run(
    problem: &Canonical,
    opts: &SolverOptions,
    initial: Option<Vec<f64>>,
) -> Result<RawSolution, SdpError> {
    let dim = problem.dim();
    let c = &problem.c;
    let mut rho = opts.rho;
    let mut z = initial.unwrap_or_else(|| vec![0.0; dim]);
    let mut u = vec![0.0; dim];
    let mut x = z.clone();
    let mut history: Vec<f64> = Vec::new();
    let mut last_check = f64::INFINITY;
    let mut primal = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;

    for k in 1..=opts.max_iterations {
        iterations = k;
        let mut v: Vec<f64> = (0..dim).map(|i| z[i] - u[i] - c[i] / rho).collect();
        problem.project(&mut v);
        x = v;
        let xh: Vec<f64> = (0..dim)
            .map(|i| opts.relaxation * x[i] + (1.0 - opts.relaxation) * z[i])
            .collect();
        let w: Vec<f64> = (0..dim).map(|i| xh[i] + u[i]).collect();
        let z_new = project_psd_coords(&w)?;
        for i in 0..dim {
            u[i] += xh[i] - z_new[i];
        }
        let dual = rho * dist(&z_new, &z);
        z = z_new;
        primal = dist(&x, &z);

        let value = dot(c, &x);
        history.push(value);
        let stalled = history.len() > opts.stall_window && {
            let old = history[history.len() - 1 - opts.stall_window];
            (value - old).abs() <= opts.objective_tol * value.abs().max(1.0)
        };
        if primal <= opts.primal_tol && dual <= opts.dual_tol && stalled {
            converged = true;
            break;
        }

        // Residual balancing keeps the two residuals within a factor of 10.
        if opts.adapt_every > 0 && k % opts.adapt_every == 0 {
            if primal > 10.0 * dual {
                rho *= 2.0;
                u.iter_mut().for_each(|v| *v /= 2.0);
            } else if dual > 10.0 * primal {
                rho /= 2.0;
                u.iter_mut().for_each(|v| *v *= 2.0);
            }
        }

        if k >= INFEASIBILITY_BURN_IN && k % INFEASIBILITY_CHECK_EVERY == 0 {
            if primal > INFEASIBLE_RESIDUAL && primal > 0.99 * last_check {
                return Err(SdpError::InfeasibleDetected { residual: primal });
            }
            last_check = primal;
        }
        if k % 10_000 == 0 {
            debug!("admm {k}: primal {primal:.3e}, dual {dual:.3e}, rho {rho:.3e}, value {value:.12}");
        }
    }

    Ok(RawSolution {
        x,
        iterations,
        primal_residual: primal,
        converged,
    })
}
