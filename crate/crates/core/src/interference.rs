//! Interference measure of a propagation.
//!
//! For a propagator `P` on an `N`-level system
//! `I(P) = Σ_{i,k,l} |P_{ii,kl}|² − Σ_{i,k} |P_{ii,kk}|²`:
//! the weight with which input coherences feed output probabilities. It
//! vanishes for classical stochastic maps and basis permutations and is at
//! most `N − 1`. In dynamical-matrix form the same quantity reads
//! `Σ_{i,k≠l} |D[4i+k][4i+l]|²`, the off-diagonal mass of the four diagonal
//! 4×4 blocks.

use serde::Serialize;
use thiserror::Error;

use crate::channel::{DynamicalMatrix, PropagatorMatrix, N};
use crate::numkernel::ComplexMatrix;

/// Default elementwise tolerance for "zero" interference.
pub const ZERO_TOL: f64 = 1e-9;
/// Threshold on the measure itself below which it is reported as zero.
pub const MEASURE_ZERO: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum InterferenceError {
    #[error("matrix is not unitary (‖U†U − I‖_F = {residual:.3e})")]
    NotUnitary { residual: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct InterferenceValue {
    pub value: f64,
    pub hilbert_dim: usize,
}

impl InterferenceValue {
    pub fn is_zero(&self) -> bool {
        self.value.abs() <= MEASURE_ZERO
    }
}

fn measure_p(p: &ComplexMatrix, n: usize) -> f64 {
    // Only the rows with i = j enter; subtract the k = l columns.
    let mut total = 0.0;
    for i in 0..n {
        let row = n * i + i;
        for k in 0..n {
            for l in 0..n {
                if k != l {
                    total += p[(row, n * k + l)].norm_sqr();
                }
            }
        }
    }
    total
}

pub fn interference_of_propagator(p: &PropagatorMatrix) -> InterferenceValue {
    InterferenceValue {
        value: measure_p(p.matrix(), N),
        hilbert_dim: N,
    }
}

pub fn interference_of_dynamical(d: &DynamicalMatrix) -> InterferenceValue {
    let mut total = 0.0;
    for i in 0..N {
        for k in 0..N {
            for l in 0..N {
                if k != l {
                    total += d.get(N * i + k, N * i + l).norm_sqr();
                }
            }
        }
    }
    InterferenceValue {
        value: total,
        hilbert_dim: N,
    }
}

/// `N − Σ_{i,k} |U_{ik}|⁴` for the unitary propagation `ρ ↦ UρU†`.
pub fn interference_of_unitary(u: &ComplexMatrix) -> Result<InterferenceValue, InterferenceError> {
    let n = u.dim();
    let residual = (&u.adjoint().matmul(u) - &ComplexMatrix::identity(n)).frobenius_norm();
    if !(residual <= 1e-9) {
        return Err(InterferenceError::NotUnitary { residual });
    }
    let ipr: f64 = u.entries().iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(InterferenceValue {
        value: n as f64 - ipr,
        hilbert_dim: n,
    })
}

/// The same measure evaluated on the `N²×N²` propagator
/// `P_{ij,kl} = U_{ik} conj(U_{jl})` induced by `U`.
pub fn interference_of_induced_propagator(u: &ComplexMatrix) -> InterferenceValue {
    let n = u.dim();
    let p = ComplexMatrix::from_fn(n * n, |row, col| {
        let (i, j) = (row / n, row % n);
        let (k, l) = (col / n, col % n);
        u[(i, k)] * u[(j, l)].conj()
    });
    InterferenceValue {
        value: measure_p(&p, n),
        hilbert_dim: n,
    }
}

/// Largest modulus among the off-diagonal entries of the diagonal blocks.
pub fn max_block_offdiagonal(d: &DynamicalMatrix) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..N {
        for k in 0..N {
            for l in 0..N {
                if k != l {
                    worst = worst.max(d.get(N * i + k, N * i + l).norm());
                }
            }
        }
    }
    worst
}

/// True iff every `|D[4i+k][4i+l]|`, `k ≠ l`, is at most `tol`.
pub fn is_interference_free(d: &DynamicalMatrix, tol: f64) -> bool {
    max_block_offdiagonal(d) <= tol
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::channel::random::random_channel;
    use crate::channel::{d_opt, identity_channel, reshuffle, trivial_swap_channel, unitary_channel, unreshuffle, DIM};
    use crate::numkernel::{eigh, testutil::random_hermitian};

    fn hadamard() -> ComplexMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ComplexMatrix::from_real_rows(&[&[s, s], &[s, -s]])
    }

    fn cnot() -> ComplexMatrix {
        ComplexMatrix::from_real_rows(&[
            &[1.0, 0.0, 0.0, 0.0],
            &[0.0, 1.0, 0.0, 0.0],
            &[0.0, 0.0, 0.0, 1.0],
            &[0.0, 0.0, 1.0, 0.0],
        ])
    }

    #[test]
    fn identity_propagator_has_none() {
        let p = PropagatorMatrix::new(ComplexMatrix::identity(DIM)).unwrap();
        assert_eq!(interference_of_propagator(&p).value, 0.0);
    }

    #[test]
    fn classical_stochastic_propagator_has_none() {
        // Rows i = j only see diagonal inputs; coherences go elsewhere.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ComplexMatrix::from_fn(DIM, |row, col| {
            let (i, j) = (row / 4, row % 4);
            let (k, l) = (col / 4, col % 4);
            if i == j && k != l {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(rng.gen(), 0.0)
            }
        });
        let v = interference_of_propagator(&PropagatorMatrix::new(p).unwrap());
        assert_eq!(v.value, 0.0);
    }

    #[test]
    fn reference_machines_have_none() {
        assert!(interference_of_propagator(&unreshuffle(&d_opt())).value <= 1e-12);
        assert_eq!(interference_of_dynamical(&d_opt()).value, 0.0);
        assert!(interference_of_dynamical(&trivial_swap_channel()).value <= 1e-12);
        assert_eq!(interference_of_dynamical(&unitary_channel(&cnot()).unwrap()).value, 0.0);
    }

    #[test]
    fn hadamard_is_maximal() {
        let v = interference_of_unitary(&hadamard()).unwrap();
        assert!((v.value - 1.0).abs() <= 1e-12);
        assert!((interference_of_induced_propagator(&hadamard()).value - 1.0).abs() <= 1e-12);
        let hh = hadamard().kron(&hadamard());
        assert!((interference_of_unitary(&hh).unwrap().value - 3.0).abs() <= 1e-12);
        let via_channel = interference_of_dynamical(&unitary_channel(&hh).unwrap());
        assert!((via_channel.value - 3.0).abs() <= 1e-12);
    }

    #[test]
    fn permutations_have_none() {
        assert_eq!(interference_of_unitary(&cnot()).unwrap().value, 0.0);
        assert_eq!(
            interference_of_unitary(&crate::channel::swap_gate()).unwrap().value,
            0.0
        );
    }

    #[test]
    fn non_unitary_is_rejected() {
        let m = ComplexMatrix::identity(2).scale(2.0);
        assert!(matches!(
            interference_of_unitary(&m),
            Err(InterferenceError::NotUnitary { .. })
        ));
    }

    #[test]
    fn zero_interference_predicate() {
        assert!(is_interference_free(&d_opt(), 1e-10));
        assert!(is_interference_free(&identity_channel(), 1e-10));
        let mut m = d_opt().into_matrix();
        m[(0, 1)] = Complex64::new(0.01, 0.0);
        m[(1, 0)] = Complex64::new(0.01, 0.0);
        let d = crate::channel::DynamicalMatrix::new(m).unwrap();
        assert!(!is_interference_free(&d, 1e-3));
        assert!((interference_of_dynamical(&d).value - 2e-4).abs() < 1e-15);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn propagator_and_dynamical_forms_agree(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = ComplexMatrix::from_fn(DIM, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let p = PropagatorMatrix::new(p).unwrap();
            let a = interference_of_propagator(&p).value;
            let b = interference_of_dynamical(&reshuffle(&p)).value;
            prop_assert!((a - b).abs() <= 1e-12);
            prop_assert!(a >= -1e-12);
        }

        #[test]
        fn valid_channels_stay_within_range(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = random_channel(&mut rng);
            let v = interference_of_dynamical(&d).value;
            prop_assert!((-1e-12..=3.0 + 1e-9).contains(&v));
        }

        #[test]
        fn random_unitaries_are_bounded(seed in any::<u64>(), n in 2usize..=4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = eigh(&random_hermitian(&mut rng, n)).unwrap().vectors;
            let v = interference_of_unitary(&u).unwrap().value;
            prop_assert!(v >= -1e-9 && v <= (n - 1) as f64 + 1e-9);
            prop_assert!((v - interference_of_induced_propagator(&u).value).abs() <= 1e-10);
        }

        #[test]
        fn predicate_implies_vanishing_measure(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut m = random_channel(&mut rng).into_matrix();
            for i in 0..4 {
                for k in 0..4 {
                    for l in 0..4 {
                        if k != l {
                            m[(4 * i + k, 4 * i + l)] = Complex64::new(rng.gen_range(-1e-13..1e-13), 0.0);
                        }
                    }
                }
            }
            let d = crate::channel::DynamicalMatrix::new(m).unwrap();
            prop_assert!(is_interference_free(&d, 1e-12));
            prop_assert!(interference_of_dynamical(&d).value <= 1e-20);
        }
    }
}
