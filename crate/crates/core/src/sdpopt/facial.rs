//! Facial reduction for feasible sets without interior points.
//!
//! If no feasible `X` is positive definite, there is an exposing matrix
//! `Y = Σ y_k A_k ⪰ 0`, `Y ≠ 0`, with `bᵀy = 0`: every feasible `X` then has
//! `⟨Y, X⟩ = 0`, so it lives on the face `{V W V† : W ⪰ 0}` where the columns
//! of `V` span `ker Y`. `Y` is found by the auxiliary problem
//!
//! ```text
//! min ⟨Σ b_k A_k, Y⟩  s.t.  Y ∈ span{A_k}, tr Y = 1, Y ⪰ 0
//! ```
//!
//! whose value is `min bᵀy` (the rows are orthonormal, so `y_k = ⟨A_k, Y⟩`).
//! A negative value certifies infeasibility, a positive one that the original
//! problem has interior points, and zero yields `Y`. The interior-point
//! solver converges to the relative interior of the optimal face, which gives
//! a maximal-rank `Y` and hence the smallest face.

use log::debug;
use num_complex::Complex64;

use super::canonical::{axpy, dot, Basis, Canonical};
use super::coords::{from_coords, to_coords};
use super::{ipm, SdpError};
use crate::numkernel::{eigh, ComplexMatrix};

/// `|min bᵀy|` below this counts as zero.
const FACE_VALUE_TOL: f64 = 1e-8;
/// Eigenvalues of `Y` (normalized to trace one) below this span its kernel.
const KERNEL_TOL: f64 = 1e-6;

/// Orthonormal basis of the orthogonal complement of the (orthonormal) rows.
fn complement(rows: &[Vec<f64>], dim: usize) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        if rows.len() + basis.len() == dim {
            break;
        }
        let mut v = vec![0.0; dim];
        v[i] = 1.0;
        for _ in 0..2 {
            for q in rows.iter().chain(&basis) {
                let p = dot(q, &v);
                axpy(-p, q, &mut v);
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm > 1e-8 {
            v.iter_mut().for_each(|x| *x /= norm);
            basis.push(v);
        }
    }
    basis
}

/// The smaller face containing the feasible set, or `None` if the problem has
/// a positive definite feasible point (or the auxiliary solve is inconclusive).
pub(super) fn find_face(problem: &Canonical) -> Result<Option<Basis>, SdpError> {
    let n = problem.n;
    let dim = problem.dim();
    let mut objective = vec![0.0; dim];
    for (q, b) in problem.rows.iter().zip(&problem.targets) {
        axpy(*b, q, &mut objective);
    }
    let mut raw: Vec<(Vec<f64>, f64, String)> = complement(&problem.rows, dim)
        .into_iter()
        .map(|v| (v, 0.0, String::new()))
        .collect();
    raw.push((to_coords(&ComplexMatrix::identity(n)), 1.0, String::new()));
    let aux = match Canonical::new(n, objective.clone(), raw, 1e-10, 1e-9) {
        Ok(aux) => aux,
        // The span of the constraints holds no matrix of unit trace.
        Err(SdpError::InfeasibleDetected { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let sol = ipm::run(&aux)?;
    if !sol.converged {
        debug!("facial reduction: auxiliary problem did not converge");
        return Ok(None);
    }
    let value = dot(&objective, &sol.x);
    debug!("facial reduction: min bᵀy = {value:.3e}");
    if value < -FACE_VALUE_TOL {
        return Err(SdpError::InfeasibleDetected { residual: -value });
    }
    if value > FACE_VALUE_TOL {
        return Ok(None);
    }
    let e = eigh(&from_coords(&sol.x))?;
    let kernel: Vec<Vec<Complex64>> = (0..n)
        .filter(|&k| e.values[k] <= KERNEL_TOL)
        .map(|k| e.vectors.column(k))
        .collect();
    debug!("facial reduction: face of dimension {} in {n}", kernel.len());
    if kernel.is_empty() {
        return Err(SdpError::InfeasibleDetected {
            residual: e.min_value(),
        });
    }
    if kernel.len() == n {
        return Ok(None);
    }
    Ok(Some(Basis::new(n, kernel)))
}
