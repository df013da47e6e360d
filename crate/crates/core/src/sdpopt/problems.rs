//! The cloning optimizations: constraint sets, the symmetric optimum, the
//! extreme values of `F̄_A` and the `(F̄_A, F̄_B)` boundary sweep.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{solve_with, SolverOptions};
use super::{EqualityConstraint, SdpError, SdpProblem, SdpSolution, Sense};
use crate::channel::{validate, DIM, N};
use crate::fidelity::{fidelity_functionals, universality_spread, LinearFunctional};
use crate::interference::interference_of_dynamical;
use crate::numkernel::ComplexMatrix;
use crate::util::sig12;

pub const DEFAULT_SWEEP_STEP: f64 = 0.01;
/// Tolerances checked by [`symmetric_optimum`] on the returned matrix.
const SYMMETRIC_INTERFERENCE_TOL: f64 = 1e-8;
const SYMMETRIC_SPREAD_TOL: f64 = 1e-6;
const SPREAD_GRID: usize = 20;

/// Functional picking `Re D[r][c]`.
fn re_entry(r: usize, c: usize) -> LinearFunctional {
    let mut m = ComplexMatrix::zeros(DIM);
    if r == c {
        m[(r, r)] = Complex64::new(1.0, 0.0);
    } else {
        m[(r, c)] = Complex64::new(0.5, 0.0);
        m[(c, r)] = Complex64::new(0.5, 0.0);
    }
    LinearFunctional::new(m)
}

/// Functional picking `Im D[r][c]`, `r ≠ c`.
fn im_entry(r: usize, c: usize) -> LinearFunctional {
    let mut m = ComplexMatrix::zeros(DIM);
    m[(r, c)] = Complex64::new(0.0, -0.5);
    m[(c, r)] = Complex64::new(0.0, 0.5);
    LinearFunctional::new(m)
}

fn sum_functional(terms: impl Iterator<Item = LinearFunctional>) -> LinearFunctional {
    terms.fold(LinearFunctional::new(ComplexMatrix::zeros(DIM)), |acc, f| acc.add(&f))
}

/// Normalization rows `Σ_i D[4i+j][4i+j] = 1`, plus either the vanishing of all
/// off-diagonal entries of the four diagonal blocks (`zero_interference`) or,
/// without it, the remaining trace-preservation rows `Σ_i D[4i+k][4i+l] = 0`.
pub fn standard_constraints(zero_interference: bool) -> Vec<EqualityConstraint> {
    let mut out = Vec::new();
    for j in 0..N {
        let f = sum_functional((0..N).map(|i| re_entry(N * i + j, N * i + j)));
        out.push(EqualityConstraint::new(f, 1.0, format!("partial_trace[{j}]")));
    }
    for k in 0..N {
        for l in k + 1..N {
            if zero_interference {
                for i in 0..N {
                    let (r, c) = (N * i + k, N * i + l);
                    out.push(EqualityConstraint::new(re_entry(r, c), 0.0, format!("re D[{r}][{c}]")));
                    out.push(EqualityConstraint::new(im_entry(r, c), 0.0, format!("im D[{r}][{c}]")));
                }
            } else {
                let re = sum_functional((0..N).map(|i| re_entry(N * i + k, N * i + l)));
                let im = sum_functional((0..N).map(|i| im_entry(N * i + k, N * i + l)));
                out.push(EqualityConstraint::new(re, 0.0, format!("trace_offdiag_re[{k}][{l}]")));
                out.push(EqualityConstraint::new(im, 0.0, format!("trace_offdiag_im[{k}][{l}]")));
            }
        }
    }
    out
}

/// Maximize `(A + B)/2` over interference-free channels with `A·D = B·D`.
pub fn symmetric_problem() -> SdpProblem {
    let (a, b) = fidelity_functionals();
    let mut constraints = standard_constraints(true);
    constraints.push(EqualityConstraint::new(a.sub(&b), 0.0, "symmetric"));
    SdpProblem::new(a.add(&b).scale(0.5), Sense::Maximize, constraints)
}

/// Extreme `F̄_A` over interference-free channels.
pub fn extreme_a_problem(sense: Sense) -> SdpProblem {
    let (a, _) = fidelity_functionals();
    SdpProblem::new(a, sense, standard_constraints(true))
}

/// Extreme `F̄_B` among interference-free channels with `F̄_A = t`.
pub fn boundary_problem(t: f64, sense: Sense) -> SdpProblem {
    let (a, b) = fidelity_functionals();
    let mut constraints = standard_constraints(true);
    constraints.push(EqualityConstraint::new(a, t, "f_a"));
    SdpProblem::new(b, sense, constraints)
}

pub fn max_fidelity_a() -> Result<SdpSolution, SdpError> {
    solve_with(&extreme_a_problem(Sense::Maximize), &SolverOptions::default())?.require_converged()
}

pub fn min_fidelity_a() -> Result<SdpSolution, SdpError> {
    solve_with(&extreme_a_problem(Sense::Minimize), &SolverOptions::default())?.require_converged()
}

/// Solves [`symmetric_problem`] and checks that the optimizer is a valid,
/// interference-free and universal channel.
pub fn symmetric_optimum() -> Result<SdpSolution, SdpError> {
    symmetric_optimum_with(&SolverOptions::default())
}

pub fn symmetric_optimum_with(opts: &SolverOptions) -> Result<SdpSolution, SdpError> {
    let sol = solve_with(&symmetric_problem(), opts)?.require_converged()?;
    let report = validate(&sol.d);
    if !report.is_valid_channel {
        return Err(SdpError::Verification(report.failure_summary()));
    }
    let interference = interference_of_dynamical(&sol.d).value;
    if interference > SYMMETRIC_INTERFERENCE_TOL {
        return Err(SdpError::Verification(format!("interference = {interference:.3e}")));
    }
    let spread = universality_spread(&sol.d, SPREAD_GRID).map_err(|e| SdpError::Verification(e.to_string()))?;
    if spread.spread_a.max(spread.spread_b) > SYMMETRIC_SPREAD_TOL {
        return Err(SdpError::Verification(format!(
            "universality spread = ({:.3e}, {:.3e})",
            spread.spread_a, spread.spread_b
        )));
    }
    Ok(sol)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub fa: f64,
    /// `None` when the solver declared the point infeasible.
    pub fb_min: Option<f64>,
    pub fb_max: Option<f64>,
    pub converged_min: bool,
    pub converged_max: bool,
}

impl SweepPoint {
    pub fn converged(&self) -> bool {
        self.converged_min && self.converged_max
    }
}

/// Grid anchored at `F̄_A = 1` and stepping down by `step` while staying above
/// 1/3, with 1/3 itself appended as the lower endpoint. Ascending order.
pub fn sweep_grid(step: f64) -> Vec<f64> {
    assert!(step > 0.0 && step.is_finite());
    let lower = 1.0 / 3.0;
    let mut grid = vec![lower];
    let count = ((1.0 - lower) / step + 1e-9).floor() as usize;
    let mut above: Vec<f64> = (0..=count)
        .map(|k| 1.0 - k as f64 * step)
        .filter(|&t| t > lower + 1e-12)
        .collect();
    above.reverse();
    grid.extend(above);
    grid
}

fn boundary_value(t: f64, sense: Sense) -> (Option<f64>, bool) {
    match solve_with(&boundary_problem(t, sense), &SolverOptions::default()) {
        Ok(sol) => (Some(sol.value), sol.converged),
        Err(SdpError::NoConvergence { best, .. }) => (Some(best.value), false),
        Err(e) => {
            log::warn!("sweep point f_a = {t}: {e}");
            (None, false)
        }
    }
}

/// Lower and upper `F̄_B` boundary of the interference-free region at each
/// `F̄_A` in `fa_grid`. Points run in parallel; output follows grid order.
pub fn sweep_boundary(fa_grid: &[f64]) -> Vec<SweepPoint> {
    fa_grid
        .par_iter()
        .map(|&fa| {
            let (fb_min, converged_min) = boundary_value(fa, Sense::Minimize);
            let (fb_max, converged_max) = boundary_value(fa, Sense::Maximize);
            SweepPoint {
                fa,
                fb_min,
                fb_max,
                converged_min,
                converged_max,
            }
        })
        .collect()
}

/// Writes the sweep as CSV `f_a,f_b_min,f_b_max,converged`; infeasible values
/// are written as `nan`.
pub fn write_sweep_csv(points: &[SweepPoint], mut out: impl Write) -> std::io::Result<()> {
    let field = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), sig12);
    writeln!(out, "f_a,f_b_min,f_b_max,converged")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            sig12(p.fa),
            field(p.fb_min),
            field(p.fb_max),
            p.converged()
        )?;
    }
    Ok(())
}
