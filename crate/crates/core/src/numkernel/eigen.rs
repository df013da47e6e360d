use num_complex::Complex64;

use super::{ComplexMatrix, NumError, HERMITIAN_TOL};

/// Sweep cap for the cyclic Jacobi iteration.
pub const MAX_SWEEPS: usize = 10_000;

/// Eigenvalues (ascending) and the matching orthonormal eigenvectors stored as
/// the columns of `vectors`.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// Rebuilds `V · diag(values) · V†`, optionally mapping each eigenvalue.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let v = &self.vectors;
        let mapped: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in mapped.iter().enumerate() {
            if lam == 0.0 {
                continue;
            }
            for r in 0..n {
                let a = v[(r, k)] * lam;
                for c in 0..n {
                    out[(r, c)] += a * v[(c, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }

    pub fn min_value(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max_value(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for r in 0..n {
        for c in 0..n {
            if r != c {
                acc += a[(r, c)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Rotations run in fixed row-major pair order. Eigenvalues come back sorted
/// ascending (ties keep their Jacobi order) and every eigenvector is rephased
/// so that its first component with modulus above `1e-8` is real positive.
pub fn eigh(h: &ComplexMatrix) -> Result<EigenDecomposition, NumError> {
    let residual = h.hermiticity_residual();
    if !(residual <= HERMITIAN_TOL) {
        return Err(NumError::NotHermitian { residual });
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    let scale = a.frobenius_norm();
    let target = 1e-15 * scale;

    let mut sweeps = 0;
    while off_diagonal_norm(&a) > target {
        if sweeps == MAX_SWEEPS {
            return Err(NumError::NoConvergence { iterations: sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q, scale);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = ComplexMatrix::from_fn(n, |r, c| v[(r, order[c])]);
    for c in 0..n {
        if let Some(r) = (0..n).find(|&r| vectors[(r, c)].norm() > 1e-8) {
            let z = vectors[(r, c)];
            let phase = z.conj() / z.norm();
            for rr in 0..n {
                vectors[(rr, c)] *= phase;
            }
            vectors[(r, c)] = Complex64::new(vectors[(r, c)].re, 0.0);
        }
    }
    Ok(EigenDecomposition { values, vectors })
}

/// One Jacobi rotation annihilating `a[p][q]`.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, scale: f64) {
    let apq = a[(p, q)];
    let r = apq.norm();
    if r <= 1e-300 || r <= 1e-18 * scale {
        return;
    }
    let phase = apq / r;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * r);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // Q = [[c, s·e^{iφ}], [−s·e^{−iφ}, c]] on the (p, q) plane; A ← Q†AQ, V ← VQ.
    let sp = phase * s;
    let spc = sp.conj();
    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * c - akq * spc;
        a[(k, q)] = akp * sp + akq * c;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = apk * c - aqk * sp;
        a[(q, k)] = apk * spc + aqk * c;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;
    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * c - vkq * spc;
        v[(k, q)] = vkp * sp + vkq * c;
    }
}

/// Frobenius-nearest positive semidefinite matrix (negative eigenvalues clipped to zero).
pub fn project_psd(h: &ComplexMatrix) -> Result<ComplexMatrix, NumError> {
    let eig = eigh(h)?;
    if eig.min_value() >= 0.0 {
        return Ok(h.hermitian_part());
    }
    Ok(eig.reconstruct_with(|l| l.max(0.0)))
}

/// Smallest eigenvalue of a Hermitian matrix.
pub fn min_eigenvalue(h: &ComplexMatrix) -> Result<f64, NumError> {
    Ok(eigh(h)?.min_value())
}

/// Largest eigenvalue modulus, i.e. the spectral norm of a Hermitian matrix.
pub fn spectral_norm(h: &ComplexMatrix) -> Result<f64, NumError> {
    let eig = eigh(h)?;
    Ok(eig.min_value().abs().max(eig.max_value().abs()))
}
