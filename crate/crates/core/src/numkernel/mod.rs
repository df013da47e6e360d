//! Dense complex Hermitian linear algebra used throughout the crate:
//! a cyclic Jacobi eigensolver, projection onto the PSD cone and real
//! nullspace extraction.
//!
//! Everything here works on small dense matrices (dimension ≤ 64) and is
//! deterministic: identical input gives bit-identical output.

mod eigen;
mod matrix;
mod nullspace;

pub use eigen::{eigh, min_eigenvalue, project_psd, spectral_norm, EigenDecomposition, MAX_SWEEPS};
pub use matrix::{ComplexMatrix, RealMatrix};
pub use nullspace::{nullspace, right_singular_pairs};

use thiserror::Error;

/// Hermiticity tolerance `‖H − H†‖_F` accepted by [`eigh`].
pub const HERMITIAN_TOL: f64 = 1e-9;
/// Eigen-residual tolerance relative to `max(1, ‖H‖_F)`.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-10;
/// Relative singular-value cutoff used for nullspaces.
pub const NULLSPACE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumError {
    #[error("matrix is not Hermitian (‖H − H†‖_F = {residual:.3e})")]
    NotHermitian { residual: f64 },
    #[error("iteration did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

#[cfg(test)]
pub(crate) mod testutil {
    use num_complex::Complex64;
    use rand::Rng;

    use super::ComplexMatrix;

    pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> ComplexMatrix {
        let g = ComplexMatrix::from_fn(n, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        });
        g.hermitian_part()
    }
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::testutil::random_hermitian;
    use super::*;

    fn check_decomposition(h: &ComplexMatrix, eig: &EigenDecomposition) {
        let n = h.dim();
        let v = &eig.vectors;
        let lam = ComplexMatrix::from_real_diagonal(&eig.values);
        let resid = (&h.matmul(v) - &v.matmul(&lam)).frobenius_norm();
        assert!(
            resid <= EIGEN_RESIDUAL_TOL * h.frobenius_norm().max(1.0),
            "residual {resid}"
        );
        let orth = (&v.adjoint().matmul(v) - &ComplexMatrix::identity(n)).frobenius_norm();
        assert!(orth <= 1e-10, "orthonormality {orth}");
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_has_unit_spectrum() {
        let eig = eigh(&ComplexMatrix::identity(4)).unwrap();
        assert_eq!(eig.values, vec![1.0; 4]);
    }

    #[test]
    fn diagonal_is_sorted_with_permuted_basis() {
        let h = ComplexMatrix::from_real_diagonal(&[2.0, -1.0]);
        let eig = eigh(&h).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0]);
        assert_eq!(eig.vectors[(1, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(eig.vectors[(0, 1)], Complex64::new(1.0, 0.0));
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = ComplexMatrix::identity(3);
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(eigh(&h), Err(NumError::NotHermitian { .. })));
    }

    #[test]
    fn complex_two_by_two() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let mut h = ComplexMatrix::identity(2);
        h[(0, 1)] = Complex64::new(0.0, 1.0);
        h[(1, 0)] = Complex64::new(0.0, -1.0);
        let eig = eigh(&h).unwrap();
        assert!((eig.values[0]).abs() < 1e-15);
        assert!((eig.values[1] - 2.0).abs() < 1e-15);
        check_decomposition(&h, &eig);
    }

    #[test]
    fn eigenvectors_follow_sign_convention_and_are_deterministic() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(&mut rng, 16);
        let a = eigh(&h).unwrap();
        let b = eigh(&h).unwrap();
        assert_eq!(a.values, b.values);
        assert_eq!(a.vectors, b.vectors);
        for c in 0..16 {
            let first = (0..16).map(|r| a.vectors[(r, c)]).find(|z| z.norm() > 1e-8).unwrap();
            assert!(first.re > 0.0 && first.im == 0.0);
        }
    }

    #[test]
    fn psd_projection_clips_negative_part() {
        let h = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let p = project_psd(&h).unwrap();
        assert_eq!(p, ComplexMatrix::from_real_diagonal(&[1.0, 0.0]));
    }

    #[test]
    fn psd_projection_fixes_psd_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = random_hermitian(&mut rng, 16);
        let psd = g.matmul(&g);
        let p = project_psd(&psd).unwrap();
        assert!((&p - &psd).frobenius_norm() <= 1e-12);
    }

    #[test]
    fn psd_projection_matches_manual_clipping() {
        // Oracle: reassemble Σ max(λ,0) v v† by hand from a fresh decomposition.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let h = random_hermitian(&mut rng, 16);
            let eig = eigh(&h).unwrap();
            let mut oracle = ComplexMatrix::zeros(16);
            for k in 0..16 {
                let lam = eig.values[k].max(0.0);
                let col = eig.vectors.column(k);
                for r in 0..16 {
                    for c in 0..16 {
                        oracle[(r, c)] += col[r] * col[c].conj() * lam;
                    }
                }
            }
            let p = project_psd(&h).unwrap();
            assert!((&p - &oracle).frobenius_norm() <= 1e-10);
            assert!(min_eigenvalue(&p).unwrap() >= -1e-12);
            let again = project_psd(&p).unwrap();
            assert!((&again - &p).frobenius_norm() <= 1e-12);
        }
    }

    #[test]
    fn nullspace_of_row_vector() {
        let l = RealMatrix::from_rows(&[vec![1.0, 1.0]]).unwrap();
        let ns = nullspace(&l, NULLSPACE_TOL).unwrap();
        assert_eq!(ns.len(), 1);
        let v = &ns[0];
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v[0].abs() - s).abs() < 1e-14 && (v[0] + v[1]).abs() < 1e-14);
    }

    #[test]
    fn nullspace_of_full_rank_is_empty() {
        let l = RealMatrix::from_rows(&[vec![2.0, 1.0, 0.0], vec![0.0, 1.0, 3.0], vec![1.0, 0.0, 1.0]]).unwrap();
        assert!(nullspace(&l, NULLSPACE_TOL).unwrap().is_empty());
    }

    #[test]
    fn nullspace_of_wide_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        use rand::Rng;
        let rows: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..20).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect();
        let l = RealMatrix::from_rows(&rows).unwrap();
        let ns = nullspace(&l, NULLSPACE_TOL).unwrap();
        assert_eq!(ns.len(), 13);
        let norm = l.frobenius_norm();
        for (i, a) in ns.iter().enumerate() {
            assert!(l.apply(a).iter().map(|x| x * x).sum::<f64>().sqrt() <= NULLSPACE_TOL * norm);
            for b in &ns[i..] {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let expect = if std::ptr::eq(a, b) { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() <= 1e-10);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn eigh_reconstructs_random_hermitian(seed in any::<u64>(), n in 1usize..=16) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, n);
            let eig = eigh(&h).unwrap();
            check_decomposition(&h, &eig);
            prop_assert!((&eig.reconstruct() - &h).frobenius_norm() <= 1e-9);
        }

        #[test]
        fn psd_projection_is_contraction(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = random_hermitian(&mut rng, 8);
            let g = random_hermitian(&mut rng, 8);
            let probe = g.matmul(&g);
            let p = project_psd(&h).unwrap();
            prop_assert!((&p - &probe).frobenius_norm() <= (&h - &probe).frobenius_norm() + 1e-12);
        }
    }
}
