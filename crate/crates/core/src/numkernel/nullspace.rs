use super::{NumError, RealMatrix};

const MAX_SVD_SWEEPS: usize = 200;

/// Right singular vectors and singular values of a real matrix from one-sided
/// (Hestenes) Jacobi orthogonalization of its columns.
///
/// Returns `(sigma, v)` where `v[k]` is the k-th right singular vector and
/// `sigma[k]` the norm of `L·v[k]`. Not sorted.
pub fn right_singular_pairs(l: &RealMatrix) -> Result<(Vec<f64>, Vec<Vec<f64>>), NumError> {
    let (m, n) = (l.rows(), l.cols());
    // Column-major working copies.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|c| (0..m).map(|r| l[(r, c)]).collect()).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            e
        })
        .collect();

    // Columns already at round-off level are left alone; they belong to the
    // nullspace whatever their mutual angle.
    let negligible = (1e-15 * l.frobenius_norm()).powi(2);
    let mut converged = false;
    for _ in 0..MAX_SVD_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(a, b)| a * b).sum();
                if alpha <= negligible || beta <= negligible || gamma.abs() <= 1e-15 * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
                let (lo, hi) = v.split_at_mut(q);
                for (x, y) in lo[p].iter_mut().zip(hi[0].iter_mut()) {
                    let (a, b) = (*x, *y);
                    *x = c * a - s * b;
                    *y = s * a + c * b;
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(NumError::NoConvergence {
            iterations: MAX_SVD_SWEEPS,
        });
    }
    let sigma = cols
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    Ok((sigma, v))
}

/// Orthonormal basis of the right nullspace of `l`: every right singular vector
/// whose singular value is at most `tol · σ_max`.
pub fn nullspace(l: &RealMatrix, tol: f64) -> Result<Vec<Vec<f64>>, NumError> {
    if !l.frobenius_norm().is_finite() {
        return Err(NumError::NonFinite);
    }
    if l.cols() == 0 {
        return Ok(Vec::new());
    }
    let (sigma, v) = right_singular_pairs(l)?;
    let smax = sigma.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * smax;
    Ok(sigma
        .iter()
        .zip(v)
        .filter(|(s, _)| **s <= cutoff)
        .map(|(_, vec)| vec)
        .collect())
}
