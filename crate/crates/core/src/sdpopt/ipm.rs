//! Infeasible-start primal-dual interior-point method (HKM direction with
//! Mehrotra predictor-corrector).
//!
//! Primal `min ⟨C, X⟩` s.t. `⟨A_k, X⟩ = b_k`, `X ⪰ 0`; dual `max bᵀy` s.t.
//! `Σ y_k A_k + Z = C`, `Z ⪰ 0`, with `⟨A, X⟩ = Re tr(A X)`. The constraint
//! matrices are the orthonormalized rows of the affine set, so the Schur
//! complement stays well conditioned. Unlike ADMM this handles feasible sets
//! without interior points (optimizing on a face of the cone), where the
//! splitting converges only sublinearly.

use super::canonical::{dist, dot, Canonical};
use super::coords::{from_coords, to_coords};
use super::{RawSolution, SdpError};
use crate::numkernel::{eigh, ComplexMatrix};

pub const MAX_IPM_ITERATIONS: usize = 200;
/// Relative primal/dual infeasibility and duality gap at convergence.
const IPM_TOL: f64 = 1e-10;
/// Looser bound accepted when the iteration stalls at round-off level.
const IPM_STALL_TOL: f64 = 1e-8;
/// Fraction of the distance to the cone boundary taken per step.
const STEP_FRACTION: f64 = 0.98;
/// Steps shorter than this mean the iteration has stalled.
const MIN_STEP: f64 = 1e-10;

fn frob(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.entries()
        .iter()
        .zip(b.entries())
        .map(|(x, y)| x.re * y.re + x.im * y.im)
        .sum()
}

/// `Re tr(A B)` for Hermitian `A`.
fn re_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            let (x, y) = (a[(r, c)], b[(c, r)]);
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

fn combine(n: usize, weights: &[f64], mats: &[ComplexMatrix]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(n);
    for (w, m) in weights.iter().zip(mats) {
        for (o, v) in out.entries_mut().iter_mut().zip(m.entries()) {
            *o += v * *w;
        }
    }
    out
}

/// Gaussian elimination with partial pivoting.
fn lu_solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut a: Vec<Vec<f64>> = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| {
            let mut v = row.clone();
            v.push(*r);
            v
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col] == 0.0 {
            return None;
        }
        a.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..=n {
                    a[r][c] -= f * a[col][c];
                }
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        x[i] = (a[i][n] - (i + 1..n).map(|k| a[i][k] * x[k]).sum::<f64>()) / a[i][i];
    }
    Some(x)
}

fn cholesky_solve(m: &[Vec<f64>], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    let mut l = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..=i {
            let s: f64 = m[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            if i == j {
                if !(s > 0.0) {
                    return None;
                }
                l[i][i] = s.sqrt();
            } else {
                l[i][j] = s / l[j][j];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in 0..n {
        y[i] = (rhs[i] - (0..i).map(|k| l[i][k] * y[k]).sum::<f64>()) / l[i][i];
    }
    for i in (0..n).rev() {
        y[i] = (y[i] - (i + 1..n).map(|k| l[k][i] * y[k]).sum::<f64>()) / l[i][i];
    }
    Some(y)
}

/// Largest `α ≤ 1` keeping `X + αΔ ⪰ 0`, scaled by `fraction` when the
/// boundary is hit first.
fn step_length(x: &ComplexMatrix, delta: &ComplexMatrix, fraction: f64) -> Result<f64, SdpError> {
    let s = eigh(x)?.reconstruct_with(|l| 1.0 / l.max(f64::MIN_POSITIVE).sqrt());
    let w = s.matmul(delta).matmul(&s).hermitian_part();
    let lam = eigh(&w)?.min_value();
    Ok(if lam >= 0.0 { 1.0 } else { (fraction / -lam).min(1.0) })
}

struct Direction {
    dx: ComplexMatrix,
    dy: Vec<f64>,
    dz: ComplexMatrix,
}

pub(super) fn run(problem: &Canonical) -> Result<RawSolution, SdpError> {
    let dim = problem.n;
    let c_mat = from_coords(&problem.c);
    let a: Vec<ComplexMatrix> = problem.rows.iter().map(|row| from_coords(row)).collect();
    let b = &problem.targets;
    let m = a.len();
    let n = dim as f64;
    let b_norm = dot(b, b).sqrt();
    let c_norm = c_mat.frobenius_norm();
    let eye = ComplexMatrix::identity(dim);

    let mut x = eye.clone();
    let mut z = eye.clone();
    let mut y = vec![0.0; m];
    let mut converged = false;
    let mut iterations = 0;
    let mut accuracy = f64::INFINITY;

    for it in 1..=MAX_IPM_ITERATIONS {
        iterations = it;
        let rp: Vec<f64> = (0..m).map(|k| b[k] - frob(&a[k], &x)).collect();
        let rd = &(&c_mat - &z) - &combine(dim, &y, &a);
        let mu = frob(&x, &z) / n;
        let pobj = frob(&c_mat, &x);
        let dobj = dot(b, &y);
        let pinf = dot(&rp, &rp).sqrt() / (1.0 + b_norm);
        let dinf = rd.frobenius_norm() / (1.0 + c_norm);
        let gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        accuracy = pinf.max(dinf).max(gap);
        if accuracy <= IPM_TOL {
            converged = true;
            break;
        }

        let z_inv = eigh(&z)?.reconstruct_with(|l| 1.0 / l);
        let g: Vec<ComplexMatrix> = a.iter().map(|ak| x.matmul(ak).matmul(&z_inv)).collect();
        let mut schur = vec![vec![0.0; m]; m];
        for i in 0..m {
            for j in 0..=i {
                let v = re_trace_product(&a[i], &g[j]);
                schur[i][j] = v;
                schur[j][i] = v;
            }
        }
        let x_rd_zinv = x.matmul(&rd).matmul(&z_inv);

        // Newton direction for the complementarity target `X Z = K`.
        let direction = |k: &ComplexMatrix| -> Option<Direction> {
            let k_zinv = k.matmul(&z_inv);
            let t = &(&k_zinv - &x) - &x_rd_zinv;
            let rhs: Vec<f64> = (0..m).map(|i| rp[i] - re_trace_product(&a[i], &t)).collect();
            let dy = cholesky_solve(&schur, &rhs).or_else(|| lu_solve(&schur, &rhs))?;
            let dz = &rd - &combine(dim, &dy, &a);
            let dx = &(&k_zinv.hermitian_part() - &x) - &x.matmul(&dz).matmul(&z_inv).hermitian_part();
            Some(Direction { dx, dy, dz })
        };

        let Some(pred) = direction(&ComplexMatrix::zeros(dim)) else {
            break;
        };
        let ap = step_length(&x, &pred.dx, 1.0)?;
        let ad = step_length(&z, &pred.dz, 1.0)?;
        let x_aff = &x + &pred.dx.scale(ap);
        let z_aff = &z + &pred.dz.scale(ad);
        let mu_aff = frob(&x_aff, &z_aff) / n;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let k = &eye.scale(sigma * mu) - &pred.dx.matmul(&pred.dz);
        let Some(corr) = direction(&k) else {
            break;
        };
        let ap = step_length(&x, &corr.dx, STEP_FRACTION)?;
        let ad = step_length(&z, &corr.dz, STEP_FRACTION)?;
        if ap < MIN_STEP && ad < MIN_STEP {
            break;
        }
        x = (&x + &corr.dx.scale(ap)).hermitian_part();
        z = (&z + &corr.dz.scale(ad)).hermitian_part();
        for (yi, di) in y.iter_mut().zip(&corr.dy) {
            *yi += ad * di;
        }
        log::trace!("ipm {it}: pinf {pinf:.2e} dinf {dinf:.2e} gap {gap:.2e} mu {mu:.2e} steps ({ap:.3}, {ad:.3})");
    }

    // Restore the equalities exactly; the shift is of the order of the final
    // primal infeasibility.
    let raw = to_coords(&x);
    let mut coords = raw.clone();
    problem.project(&mut coords);
    Ok(RawSolution {
        primal_residual: dist(&raw, &coords),
        x: coords,
        iterations,
        converged: converged || accuracy <= IPM_STALL_TOL,
    })
}
