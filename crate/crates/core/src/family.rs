//! The continuous family of optimal symmetric interference-free cloners
//! `D̃ = D^opt + Ŵ`.
//!
//! Admissible perturbations `Ŵ` are Hermitian matrices on the support of
//! `D^opt` (its eigenvalue-1 and eigenvalue-1/4 eigenspaces). They leave both
//! average fidelities and all partial traces unchanged and keep the
//! off-diagonal entries of the diagonal blocks at zero. These are linear
//! conditions on the 100 real coordinates of a Hermitian matrix on the
//! 10-dimensional support; their nullspace is the family's tangent space.
//! Because the support eigenvalues are at least 1/4, every admissible `Ŵ`
//! with spectral norm at most 1/4 keeps `D^opt + Ŵ` positive.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{d_opt, validate, DynamicalMatrix, DIM};
use crate::fidelity::{average_fidelities, fidelity_functionals, universality_spread, LinearFunctional};
use crate::interference::interference_of_dynamical;
use crate::numkernel::{
    eigh, min_eigenvalue, nullspace, spectral_norm, ComplexMatrix, NumError, RealMatrix, NULLSPACE_TOL,
};
use crate::sdpopt::{from_coords, standard_constraints};

/// Quoted real parameter count of the family.
pub const CLAIMED_DIMENSION: usize = 64;
/// Count obtained by tallying the explicit vanishing conditions and sum rules
/// given alongside that claim.
pub const COUNTED_DIMENSION: usize = 62;
/// Largest perturbation size accepted by [`PerturbationBasis::sample_member`].
pub const MAX_EPSILON: f64 = 0.2;
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Tolerances used by [`PerturbationBasis::verify_member`].
pub const FIDELITY_TOL: f64 = 1e-9;
pub const INTERFERENCE_TOL: f64 = 1e-9;
pub const SPREAD_TOL: f64 = 1e-8;
pub const PSD_TOL: f64 = 1e-9;
pub const MEMBERSHIP_TOL: f64 = 1e-9;
const SPREAD_GRID: usize = 20;
/// Resolution of the bisection in [`PerturbationBasis::max_epsilon`].
const BISECTION_WIDTH: f64 = 1e-9;
/// The kernel of `D^opt` stays in the kernel of every admissible `Ŵ`, so its
/// eigenvalues only move by round-off.
const EIGEN_NOISE: f64 = 1e-12;
/// Eigenvalues of `D^opt` above this span its support.
const SUPPORT_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("epsilon {0} outside [0, {MAX_EPSILON}]")]
    InvalidEpsilon(f64),
    #[error("perturbation too large: minimum eigenvalue {min_eigenvalue:.3e}")]
    EpsilonTooLarge { min_eigenvalue: f64 },
    #[error("direction is not admissible: {0}")]
    NotAdmissible(String),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

/// Orthonormal (Hilbert–Schmidt) basis of the admissible perturbations, in the
/// computational basis.
#[derive(Clone, Debug)]
pub struct PerturbationBasis {
    pub basis: Vec<ComplexMatrix>,
    pub dimension: usize,
    /// Eigenvectors of `D^opt` spanning its support, eigenvalue 1 first.
    support: Vec<Vec<Complex64>>,
    /// How many of the `support` vectors belong to eigenvalue 1.
    unit_eigenspace: usize,
}

/// `Σ_a Σ_b X[a][b] · v_a v_b†`.
fn lift(vectors: &[Vec<Complex64>], x: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(DIM);
    for (a, va) in vectors.iter().enumerate() {
        for (b, vb) in vectors.iter().enumerate() {
            let w = x[(a, b)];
            if w.norm_sqr() == 0.0 {
                continue;
            }
            for i in 0..DIM {
                let s = va[i] * w;
                for j in 0..DIM {
                    out[(i, j)] += s * vb[j].conj();
                }
            }
        }
    }
    out
}

/// `V† M V` for the columns `V`.
fn compress(vectors: &[Vec<Complex64>], m: &ComplexMatrix) -> ComplexMatrix {
    let mv: Vec<Vec<Complex64>> = vectors.iter().map(|v| m.apply_vec(v)).collect();
    ComplexMatrix::from_fn(vectors.len(), |a, b| {
        vectors[a].iter().zip(&mv[b]).map(|(x, y)| x.conj() * y).sum()
    })
}

/// Functionals that must vanish on an admissible perturbation.
fn invariance_functionals() -> Vec<LinearFunctional> {
    let (a, b) = fidelity_functionals();
    let mut out = vec![a, b];
    out.extend(standard_constraints(true).into_iter().map(|c| c.functional));
    out
}

fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    a.inner(b).re
}

fn as_dynamical(m: ComplexMatrix) -> DynamicalMatrix {
    DynamicalMatrix::new(m).expect("16x16")
}

/// Builds the admissible subspace as the nullspace of the invariance
/// conditions over Hermitian matrices supported on `D^opt`'s support.
pub fn admissible_perturbation_basis() -> Result<PerturbationBasis, FamilyError> {
    let e = eigh(d_opt().matrix())?;
    let mut order: Vec<usize> = (0..DIM).filter(|&k| e.values[k] > SUPPORT_TOL).collect();
    order.reverse();
    let support: Vec<Vec<Complex64>> = order.iter().map(|&k| e.vectors.column(k)).collect();
    let unit_eigenspace = order.iter().filter(|&&k| (e.values[k] - 1.0).abs() < 1e-9).count();
    let r = support.len();

    let functionals = invariance_functionals();
    let coords = r * r;
    let mut l = RealMatrix::zeros(functionals.len(), coords);
    for k in 0..coords {
        let mut unit = vec![0.0; coords];
        unit[k] = 1.0;
        let w = as_dynamical(lift(&support, &from_coords(&unit)));
        for (row, f) in functionals.iter().enumerate() {
            l[(row, k)] = f.evaluate(&w);
        }
    }
    let basis: Vec<ComplexMatrix> = nullspace(&l, NULLSPACE_TOL)?
        .iter()
        .map(|v| lift(&support, &from_coords(v)))
        .collect();
    Ok(PerturbationBasis {
        dimension: basis.len(),
        basis,
        support,
        unit_eigenspace,
    })
}

/// Process-wide basis, built on first use.
pub fn shared_basis() -> Result<&'static PerturbationBasis, FamilyError> {
    static BASIS: OnceLock<PerturbationBasis> = OnceLock::new();
    if let Some(b) = BASIS.get() {
        return Ok(b);
    }
    let built = admissible_perturbation_basis()?;
    Ok(BASIS.get_or_init(|| built))
}

#[derive(Clone, Debug, Serialize)]
pub struct MemberReport {
    pub valid_channel: bool,
    pub min_eigenvalue: f64,
    pub trace_residual: f64,
    pub interference: f64,
    pub fidelity_a: f64,
    pub fidelity_b: f64,
    pub spread_a: f64,
    pub spread_b: f64,
    /// Frobenius distance of `D − D^opt` from the admissible subspace.
    pub membership_residual: f64,
    pub passed: bool,
    /// Names of the failed checks.
    pub failures: Vec<String>,
}

impl PerturbationBasis {
    /// Coefficients of `m` along the basis.
    pub fn coefficients(&self, m: &ComplexMatrix) -> Vec<f64> {
        self.basis.iter().map(|b| hs_inner(b, m)).collect()
    }

    pub fn combine(&self, coeffs: &[f64]) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(DIM);
        for (c, b) in coeffs.iter().zip(&self.basis) {
            out = &out + &b.scale(*c);
        }
        out
    }

    /// Distance of `m` from the admissible subspace.
    pub fn distance(&self, m: &ComplexMatrix) -> f64 {
        let proj = self.combine(&self.coefficients(m));
        (m - &proj).frobenius_norm()
    }

    /// Uniformly random unit vector of the subspace (Hilbert–Schmidt norm 1).
    pub fn random_direction(&self, seed: u64) -> ComplexMatrix {
        if self.dimension == 0 {
            return ComplexMatrix::zeros(DIM);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c: Vec<f64> = (0..self.dimension).map(|_| rng.sample(StandardNormal)).collect();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        c.iter_mut().for_each(|x| *x /= norm);
        self.combine(&c)
    }

    /// `D^opt + ε·Ŵ` with `Ŵ` a seeded random admissible direction scaled to
    /// spectral norm 1.
    pub fn sample_member(&self, seed: u64, epsilon: f64) -> Result<DynamicalMatrix, FamilyError> {
        if !(0.0..=MAX_EPSILON).contains(&epsilon) {
            return Err(FamilyError::InvalidEpsilon(epsilon));
        }
        if epsilon == 0.0 || self.dimension == 0 {
            return Ok(d_opt());
        }
        let w = self.random_direction(seed);
        let w = w.scale(1.0 / spectral_norm(&w)?);
        let d = d_opt().matrix() + &w.scale(epsilon);
        let min_eigenvalue = min_eigenvalue(&d)?;
        if min_eigenvalue < -PSD_TOL {
            return Err(FamilyError::EpsilonTooLarge { min_eigenvalue });
        }
        Ok(as_dynamical(d))
    }

    pub fn verify_member(&self, d: &DynamicalMatrix) -> MemberReport {
        let report = validate(d);
        let interference = interference_of_dynamical(d).value;
        let (fa, fb) = average_fidelities(d);
        let spread = universality_spread(d, SPREAD_GRID).expect("grid is large enough");
        let membership_residual = self.distance(&(d.matrix() - d_opt().matrix()));
        let trace_residual = report.trace_residuals.iter().copied().fold(0.0, f64::max);
        let target = 5.0 / 6.0;
        let checks = [
            ("valid_channel", report.is_valid_channel),
            ("min_eigenvalue", report.min_eigenvalue >= -PSD_TOL),
            ("interference", interference <= INTERFERENCE_TOL),
            ("fidelity_a", (fa - target).abs() <= FIDELITY_TOL),
            ("fidelity_b", (fb - target).abs() <= FIDELITY_TOL),
            ("spread_a", spread.spread_a <= SPREAD_TOL),
            ("spread_b", spread.spread_b <= SPREAD_TOL),
            ("membership_residual", membership_residual <= MEMBERSHIP_TOL),
        ];
        let failures: Vec<String> = checks
            .iter()
            .filter(|(_, ok)| !ok)
            .map(|(name, _)| name.to_string())
            .collect();
        MemberReport {
            valid_channel: report.is_valid_channel,
            min_eigenvalue: report.min_eigenvalue,
            trace_residual,
            interference,
            fidelity_a: fa,
            fidelity_b: fb,
            spread_a: spread.spread_a,
            spread_b: spread.spread_b,
            membership_residual,
            passed: failures.is_empty(),
            failures,
        }
    }

    /// Largest `t` keeping `D^opt + t·Ŵ` positive semidefinite, for an
    /// admissible direction of spectral norm 1. The zero direction gives
    /// `f64::INFINITY`.
    pub fn max_epsilon(&self, direction: &ComplexMatrix) -> Result<f64, FamilyError> {
        if direction.dim() != DIM {
            return Err(FamilyError::NotAdmissible(format!("dimension {}", direction.dim())));
        }
        if direction.frobenius_norm() == 0.0 {
            return Ok(f64::INFINITY);
        }
        let residual = self.distance(direction);
        if residual > 1e-8 || direction.hermiticity_residual() > 1e-12 {
            return Err(FamilyError::NotAdmissible(format!(
                "distance from subspace {residual:.3e}"
            )));
        }
        let norm = spectral_norm(direction)?;
        if (norm - 1.0).abs() > 1e-9 {
            return Err(FamilyError::NotAdmissible(format!("spectral norm {norm}")));
        }
        let base = d_opt();
        let psd = |t: f64| -> Result<bool, FamilyError> {
            Ok(min_eigenvalue(&(base.matrix() + &direction.scale(t)))? >= -EIGEN_NOISE)
        };
        // Admissible directions are traceless, so some t makes the sum indefinite.
        let mut hi = 0.25;
        while psd(hi)? {
            hi *= 2.0;
            if hi > 1e6 {
                return Ok(f64::INFINITY);
            }
        }
        let mut lo = 0.0;
        while hi - lo > BISECTION_WIDTH {
            let mid = 0.5 * (lo + hi);
            if psd(mid)? {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Largest entry modulus of the block of `Ŵ` on the eigenvalue-1
    /// eigenspace of `D^opt`. Fidelity invariance plus unchanged partial
    /// traces force this block to vanish.
    pub fn unit_eigenspace_block(&self, w: &ComplexMatrix) -> f64 {
        compress(&self.support[..self.unit_eigenspace], w).max_abs()
    }

    /// `Ŵ` written in the support eigenbasis of `D^opt` (eigenvalue 1 first).
    pub fn in_eigenbasis(&self, w: &ComplexMatrix) -> ComplexMatrix {
        compress(&self.support, w)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySummary {
    pub dimension: usize,
    pub claimed_dimension: usize,
    pub counted_dimension: usize,
    pub samples: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub passed: usize,
    pub failed: usize,
    pub max_fidelity_deviation: f64,
    pub max_interference: f64,
    pub max_spread: f64,
    pub min_eigenvalue: f64,
    pub max_membership_residual: f64,
    pub max_unit_eigenspace_block: f64,
}

/// Samples members with seeds `seed, seed+1, …` and summarizes their checks.
pub fn survey(
    basis: &PerturbationBasis,
    samples: usize,
    epsilon: f64,
    seed: u64,
) -> Result<(FamilySummary, Vec<DynamicalMatrix>), FamilyError> {
    let mut members = Vec::with_capacity(samples);
    let mut summary = FamilySummary {
        dimension: basis.dimension,
        claimed_dimension: CLAIMED_DIMENSION,
        counted_dimension: COUNTED_DIMENSION,
        samples,
        epsilon,
        seed,
        passed: 0,
        failed: 0,
        max_fidelity_deviation: 0.0,
        max_interference: 0.0,
        max_spread: 0.0,
        min_eigenvalue: f64::INFINITY,
        max_membership_residual: 0.0,
        max_unit_eigenspace_block: 0.0,
    };
    for k in 0..samples as u64 {
        let d = basis.sample_member(seed.wrapping_add(k), epsilon)?;
        let r = basis.verify_member(&d);
        if r.passed {
            summary.passed += 1;
        } else {
            summary.failed += 1;
        }
        let dev = (r.fidelity_a - 5.0 / 6.0).abs().max((r.fidelity_b - 5.0 / 6.0).abs());
        summary.max_fidelity_deviation = summary.max_fidelity_deviation.max(dev);
        summary.max_interference = summary.max_interference.max(r.interference);
        summary.max_spread = summary.max_spread.max(r.spread_a.max(r.spread_b));
        summary.min_eigenvalue = summary.min_eigenvalue.min(r.min_eigenvalue);
        summary.max_membership_residual = summary.max_membership_residual.max(r.membership_residual);
        let w = d.matrix() - d_opt().matrix();
        summary.max_unit_eigenspace_block = summary.max_unit_eigenspace_block.max(basis.unit_eigenspace_block(&w));
        members.push(d);
    }
    Ok((summary, members))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn basis() -> &'static PerturbationBasis {
        shared_basis().unwrap()
    }

    #[test]
    fn basis_elements_are_admissible() {
        let b = basis();
        let (fa, fb) = fidelity_functionals();
        let support: ComplexMatrix = lift(&b.support, &ComplexMatrix::identity(b.support.len()));
        for w in &b.basis {
            assert!(w.hermiticity_residual() <= 1e-10);
            let projected = support.matmul(w).matmul(&support);
            assert!((&projected - w).frobenius_norm() <= 1e-10);
            let d = as_dynamical(w.clone());
            assert!(fa.evaluate(&d).abs() <= 1e-10 && fb.evaluate(&d).abs() <= 1e-10);
            assert!(d.partial_trace_sums().iter().all(|s| s.abs() <= 1e-10));
            assert!(interference_of_dynamical(&d).value <= 1e-20);
        }
        for (i, x) in b.basis.iter().enumerate() {
            for (j, y) in b.basis.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((hs_inner(x, y) - expect).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn support_is_ten_dimensional() {
        let b = basis();
        assert_eq!(b.support.len(), 10);
        assert_eq!(b.unit_eigenspace, 2);
        assert!(b.dimension > 0 && b.dimension < 100);
    }

    #[test]
    fn dimension_matches_condition_count() {
        assert_eq!(basis().dimension, COUNTED_DIMENSION);
    }

    #[test]
    fn zero_epsilon_is_d_opt() {
        for seed in [0, 1, 99] {
            assert_eq!(basis().sample_member(seed, 0.0).unwrap(), d_opt());
        }
        let r = basis().verify_member(&d_opt());
        assert!(r.passed, "{:?}", r.failures);
        assert_eq!(r.membership_residual, 0.0);
    }

    #[test]
    fn seeded_member_is_optimal_and_universal() {
        let d = basis().sample_member(1, 0.1).unwrap();
        let r = basis().verify_member(&d);
        assert!(r.passed, "{:?}", r.failures);
        assert!((r.fidelity_a - 5.0 / 6.0).abs() <= 1e-9 && (r.fidelity_b - 5.0 / 6.0).abs() <= 1e-9);
        assert!(r.interference <= 1e-9 && r.spread_a.max(r.spread_b) <= 1e-8);
        let d7 = basis().sample_member(7, 0.15).unwrap();
        assert!(basis().verify_member(&d7).passed);
        assert_eq!(basis().sample_member(1, 0.1).unwrap(), d);
    }

    #[test]
    fn block_coherence_fails_interference_check() {
        let mut m = d_opt().into_matrix();
        m[(0, 1)] += Complex64::new(0.05, 0.0);
        m[(1, 0)] += Complex64::new(0.05, 0.0);
        let r = basis().verify_member(&as_dynamical(m));
        assert!(!r.passed);
        assert!(r.failures.contains(&"interference".to_string()));
    }

    #[test]
    fn epsilon_out_of_range() {
        assert!(matches!(
            basis().sample_member(0, 0.25),
            Err(FamilyError::InvalidEpsilon(_))
        ));
        assert!(matches!(
            basis().sample_member(0, -0.1),
            Err(FamilyError::InvalidEpsilon(_))
        ));
    }

    #[test]
    fn max_epsilon_contract() {
        let b = basis();
        assert_eq!(b.max_epsilon(&ComplexMatrix::zeros(DIM)).unwrap(), f64::INFINITY);
        for seed in 0..5 {
            let w = b.random_direction(seed);
            let w = w.scale(1.0 / spectral_norm(&w).unwrap());
            let t = b.max_epsilon(&w).unwrap();
            assert!(t >= 0.25 - 1e-6, "{t}");
            let m = min_eigenvalue(&(d_opt().matrix() + &w.scale(t))).unwrap();
            assert!(m.abs() <= 1e-6, "{m}");
        }
        let mut bad = ComplexMatrix::zeros(DIM);
        bad[(0, 0)] = Complex64::new(1.0, 0.0);
        assert!(matches!(b.max_epsilon(&bad), Err(FamilyError::NotAdmissible(_))));
    }

    #[test]
    fn unit_eigenspace_block_vanishes() {
        for seed in 0..10 {
            let w = basis().random_direction(seed);
            assert!(basis().unit_eigenspace_block(&w) <= 1e-9);
        }
    }

    #[test]
    fn survey_counts() {
        let (summary, members) = survey(basis(), 5, 0.2, 3).unwrap();
        assert_eq!(members.len(), 5);
        assert_eq!((summary.passed, summary.failed), (5, 0));
        assert_eq!(summary.claimed_dimension, 64);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn members_pass_verification(seed in any::<u64>(), eps in 0.0..=MAX_EPSILON) {
            let d = basis().sample_member(seed, eps).unwrap();
            let r = basis().verify_member(&d);
            prop_assert!(r.passed, "{:?}", r.failures);
        }

        #[test]
        fn midpoints_stay_in_family(s1 in any::<u64>(), s2 in any::<u64>()) {
            let a = basis().sample_member(s1, 0.2).unwrap();
            let b = basis().sample_member(s2, 0.2).unwrap();
            let r = basis().verify_member(&a.mix(&b, 0.5));
            prop_assert!(r.passed, "{:?}", r.failures);
        }
    }
}
