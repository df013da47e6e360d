//! Real coordinates of n×n Hermitian matrices.
//!
//! Layout: n diagonal entries, then for every `r < c` the pair
//! `(√2·Re M_rc, √2·Im M_rc)`. The √2 makes the map an isometry from the
//! Frobenius norm to the Euclidean norm, so the Euclidean projections used by
//! the solvers are the Frobenius ones on matrices, and
//! `⟨to_coords(A), to_coords(B)⟩ = Re tr(A B)` for Hermitian `A`, `B`.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;

use crate::fidelity::LinearFunctional;
use crate::numkernel::ComplexMatrix;

/// Coordinates of the Hermitian part of `m`.
pub fn to_coords(m: &ComplexMatrix) -> Vec<f64> {
    let n = m.dim();
    let mut x = Vec::with_capacity(n * n);
    for i in 0..n {
        x.push(m[(i, i)].re);
    }
    for r in 0..n {
        for c in r + 1..n {
            let z = (m[(r, c)] + m[(c, r)].conj()) * 0.5;
            x.push(SQRT_2 * z.re);
            x.push(SQRT_2 * z.im);
        }
    }
    x
}

pub fn from_coords(x: &[f64]) -> ComplexMatrix {
    let n = (x.len() as f64).sqrt().round() as usize;
    assert_eq!(n * n, x.len(), "coordinate vector length must be a square");
    let mut m = ComplexMatrix::zeros(n);
    for i in 0..n {
        m[(i, i)] = Complex64::new(x[i], 0.0);
    }
    let mut k = n;
    for r in 0..n {
        for c in r + 1..n {
            let z = Complex64::new(x[k], x[k + 1]) / SQRT_2;
            m[(r, c)] = z;
            m[(c, r)] = z.conj();
            k += 2;
        }
    }
    m
}

/// Gradient of `D ↦ f·D` in coordinates, for Hermitian coefficient matrices:
/// `f·D = Σ C_IK D_IK = Re tr(Cᵀ D) = ⟨functional_coords(f), to_coords(D)⟩`.
pub fn functional_coords(f: &LinearFunctional) -> Vec<f64> {
    to_coords(&f.coeffs().transpose())
}
