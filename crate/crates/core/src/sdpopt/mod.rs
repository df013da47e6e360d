//! Linear optimization over interference-free two-qubit channels.
//!
//! The variable is a 16×16 Hermitian matrix `D ⪰ 0` subject to linear
//! equality constraints `C_k · D = b_k` (scalar product `Σ C[I][K]·D[I][K]`).
//! [`solve`] runs an ADMM splitting between the affine constraint set and the
//! PSD cone. Problems whose feasible set has no positive definite point (for
//! instance `F̄_A` pinned to its maximum) make ADMM crawl; for those the
//! solver falls back to a primal-dual interior-point method, combined with
//! facial reduction when needed. The `*_problem` builders set up the cloning
//! optimizations.

mod admm;
mod canonical;
mod coords;
mod facial;
mod ipm;
mod problems;

pub use coords::{from_coords, functional_coords, to_coords};
pub use problems::{
    boundary_problem, extreme_a_problem, max_fidelity_a, min_fidelity_a, standard_constraints, sweep_boundary,
    sweep_grid, symmetric_optimum, symmetric_optimum_with, symmetric_problem, write_sweep_csv, SweepPoint,
    DEFAULT_SWEEP_STEP,
};

use serde::Serialize;
use thiserror::Error;

use crate::channel::DynamicalMatrix;
use crate::fidelity::LinearFunctional;
use crate::numkernel::{min_eigenvalue, ComplexMatrix, NumError};

use canonical::{Basis, Canonical};

/// Bounds a solution must meet to count as converged.
pub const CONSTRAINT_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = 1e-9;
/// ADMM iterations tried by [`Method::Auto`] before switching algorithms.
/// Well-posed cloning problems converge in a few thousand.
const AUTO_ADMM_BUDGET: usize = 20_000;
/// Rounds of facial reduction attempted before giving up.
const MAX_FACIAL_ROUNDS: usize = 3;

#[derive(Clone, Debug)]
pub struct EqualityConstraint {
    pub functional: LinearFunctional,
    pub target: f64,
    pub label: String,
}

impl EqualityConstraint {
    pub fn new(functional: LinearFunctional, target: f64, label: impl Into<String>) -> Self {
        Self {
            functional,
            target,
            label: label.into(),
        }
    }

    pub fn residual(&self, d: &DynamicalMatrix) -> f64 {
        (self.functional.evaluate(d) - self.target).abs()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub objective: LinearFunctional,
    pub sense: Sense,
    pub constraints: Vec<EqualityConstraint>,
}

impl SdpProblem {
    pub fn new(objective: LinearFunctional, sense: Sense, constraints: Vec<EqualityConstraint>) -> Self {
        Self {
            objective,
            sense,
            constraints,
        }
    }

    /// Largest absolute constraint violation of `d`.
    pub fn constraint_residual(&self, d: &DynamicalMatrix) -> f64 {
        self.constraints.iter().map(|c| c.residual(d)).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SdpSolution {
    #[serde(skip)]
    pub d: DynamicalMatrix,
    pub value: f64,
    /// `‖X − Z‖_F` between the affine and the PSD iterates.
    pub primal_residual: f64,
    /// Largest absolute equality-constraint violation of `d`.
    pub constraint_residual: f64,
    pub min_eigenvalue: f64,
    pub iterations: usize,
    pub converged: bool,
    pub dropped_constraints: usize,
    /// Algorithm that produced `d`.
    pub method: &'static str,
}

impl SdpSolution {
    /// Turns a non-converged solution into [`SdpError::NoConvergence`].
    pub fn require_converged(self) -> Result<Self, SdpError> {
        if self.converged {
            Ok(self)
        } else {
            Err(SdpError::NoConvergence {
                iterations: self.iterations,
                best: Box::new(self),
            })
        }
    }
}

#[derive(Debug, Error)]
pub enum SdpError {
    #[error("solver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize, best: Box<SdpSolution> },
    #[error("problem appears infeasible (constraint residual {residual:.3e})")]
    InfeasibleDetected { residual: f64 },
    #[error("solution check failed: {0}")]
    Verification(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Which algorithm [`solve_with`] runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    Admm,
    InteriorPoint,
    /// ADMM; if it does not converge, the interior-point method, and then the
    /// interior-point method on the face found by facial reduction.
    #[default]
    Auto,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub method: Method,
    /// ADMM iteration cap.
    pub max_iterations: usize,
    /// Initial ADMM penalty parameter.
    pub rho: f64,
    /// ADMM over-relaxation factor in `(0, 2)`.
    pub relaxation: f64,
    /// Bound on `‖x − z‖_F` at ADMM convergence.
    pub primal_tol: f64,
    /// Bound on `ρ‖z_k − z_{k−1}‖_F` at ADMM convergence.
    pub dual_tol: f64,
    /// Relative objective change allowed over `stall_window` iterations.
    pub objective_tol: f64,
    pub stall_window: usize,
    /// Rebalance `ρ` every this many iterations (0 disables).
    pub adapt_every: usize,
    /// Starting point for ADMM; defaults to the zero matrix.
    pub initial: Option<ComplexMatrix>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            method: Method::Auto,
            max_iterations: 200_000,
            rho: 1.0,
            relaxation: 1.6,
            primal_tol: 1e-10,
            dual_tol: 1e-9,
            objective_tol: 1e-10,
            stall_window: 100,
            adapt_every: 50,
            initial: None,
        }
    }
}

/// Solver output in canonical coordinates.
pub(crate) struct RawSolution {
    x: Vec<f64>,
    iterations: usize,
    primal_residual: f64,
    converged: bool,
}

pub fn solve(problem: &SdpProblem) -> Result<SdpSolution, SdpError> {
    solve_with(problem, &SolverOptions::default())
}

/// Solves `problem`. A solution is marked converged only if the algorithm met
/// its own stopping rule and `d` satisfies every constraint within
/// [`CONSTRAINT_TOL`] with minimum eigenvalue at least `−PSD_TOL`.
pub fn solve_with(problem: &SdpProblem, opts: &SolverOptions) -> Result<SdpSolution, SdpError> {
    let canonical = Canonical::from_problem(problem)?;
    let initial = opts.initial.as_ref().map(|m| to_coords(&m.hermitian_part()));
    let admm = |max_iterations: usize| -> Result<SdpSolution, SdpError> {
        let opts = SolverOptions {
            max_iterations,
            ..opts.clone()
        };
        let raw = admm::run(&canonical, &opts, initial.clone())?;
        finish(problem, &canonical, raw, None, "admm")
    };
    let interior = || -> Result<Option<SdpSolution>, SdpError> {
        let sol = finish(problem, &canonical, ipm::run(&canonical)?, None, "interior-point")?;
        if sol.converged {
            return Ok(Some(sol));
        }
        log::debug!("interior point stalled; trying facial reduction");
        solve_on_face(problem, &canonical)
    };
    match opts.method {
        Method::Admm => admm(opts.max_iterations),
        Method::InteriorPoint => match interior()? {
            Some(sol) => Ok(sol),
            None => finish(problem, &canonical, ipm::run(&canonical)?, None, "interior-point"),
        },
        Method::Auto => {
            let first = admm(opts.max_iterations.min(AUTO_ADMM_BUDGET))?;
            if first.converged {
                return Ok(first);
            }
            log::debug!(
                "ADMM stopped after {} iterations; trying interior point",
                first.iterations
            );
            if let Some(sol) = interior()?.filter(|s| s.converged) {
                return Ok(sol);
            }
            if opts.max_iterations > AUTO_ADMM_BUDGET {
                admm(opts.max_iterations)
            } else {
                Ok(first)
            }
        }
    }
}

fn solve_on_face(problem: &SdpProblem, canonical: &Canonical) -> Result<Option<SdpSolution>, SdpError> {
    let mut current = canonical.clone();
    let mut basis: Option<Basis> = None;
    for _ in 0..MAX_FACIAL_ROUNDS {
        let Some(face) = facial::find_face(&current)? else {
            break;
        };
        current = current.restrict(&face)?;
        basis = Some(match basis {
            None => face,
            Some(outer) => outer.compose(&face),
        });
    }
    let Some(basis) = basis else {
        return Ok(None);
    };
    let raw = ipm::run(&current)?;
    let sol = finish(problem, canonical, raw, Some(&basis), "interior-point on reduced face")?;
    Ok(Some(sol).filter(|s| s.converged))
}

fn finish(
    problem: &SdpProblem,
    canonical: &Canonical,
    raw: RawSolution,
    face: Option<&Basis>,
    method: &'static str,
) -> Result<SdpSolution, SdpError> {
    let m = from_coords(&raw.x);
    let m = match face {
        Some(basis) => basis.lift(&m),
        None => m,
    };
    let d = DynamicalMatrix::new(m).map_err(|e| SdpError::Verification(e.to_string()))?;
    let constraint_residual = problem.constraint_residual(&d);
    let min_eig = min_eigenvalue(d.matrix())?;
    Ok(SdpSolution {
        value: problem.objective.evaluate(&d),
        d,
        primal_residual: raw.primal_residual,
        constraint_residual,
        min_eigenvalue: min_eig,
        iterations: raw.iterations,
        converged: raw.converged && constraint_residual <= CONSTRAINT_TOL && min_eig >= -PSD_TOL,
        dropped_constraints: canonical.dropped,
        method,
    })
}
