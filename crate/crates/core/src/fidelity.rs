//! Cloning fidelities.
//!
//! The input is always `|ψ⟩⟨ψ| ⊗ |0⟩⟨0|` (blank copy in `|0⟩`), and the
//! fidelity of clone `j` is the overlap `⟨ψ|ρ'_j|ψ⟩` of its reduced output
//! with the original. Averaged uniformly over the Bloch sphere, each
//! fidelity becomes a fixed linear functional of the dynamical matrix that
//! reads only twelve of its entries; [`fidelity_functionals`] hard-codes
//! those, and [`derive_fidelity_functionals`] recomputes them from scratch by
//! quadrature as an independent check.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{apply, validate, DynamicalMatrix, Subsystem, TwoQubitState, DIM};
use crate::numkernel::ComplexMatrix;

/// Gauss–Legendre nodes in `cos θ`.
pub const QUAD_POLAR_NODES: usize = 32;
/// Uniform nodes in `φ`.
pub const QUAD_AZIMUTH_NODES: usize = 64;

#[derive(Debug, Error)]
pub enum FidelityError {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("input amplitudes not normalized (|α|²+|β|² = {norm})")]
    NotNormalized { norm: f64 },
    #[error("grid must be at least 8, got {0}")]
    GridTooSmall(usize),
    #[error("Bloch angles out of range: θ = {theta}, φ = {phi}")]
    InvalidAngles { theta: f64, phi: f64 },
}

/// Hermitian coefficient matrix paired with `D` through `Σ_{I,K} C[I][K]·D[I][K]`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearFunctional {
    coeffs: ComplexMatrix,
}

impl LinearFunctional {
    pub fn new(coeffs: ComplexMatrix) -> Self {
        debug_assert_eq!(coeffs.dim(), DIM);
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &ComplexMatrix {
        &self.coeffs
    }

    /// Real part of the entrywise (unconjugated) scalar product with `m`.
    pub fn apply_matrix(&self, m: &ComplexMatrix) -> f64 {
        self.coeffs
            .entries()
            .iter()
            .zip(m.entries())
            .map(|(a, d)| (a * d).re)
            .sum()
    }

    pub fn evaluate(&self, d: &DynamicalMatrix) -> f64 {
        self.apply_matrix(d.matrix())
    }

    pub fn nonzero_count(&self) -> usize {
        self.coeffs.entries().iter().filter(|z| z.norm() > 0.0).count()
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(&self.coeffs - &other.coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::new(&self.coeffs + &other.coeffs)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.scale(s))
    }
}

fn functional_from(doubles: [usize; 4], singles: [(usize, usize); 8]) -> LinearFunctional {
    let mut m = ComplexMatrix::zeros(DIM);
    for i in doubles {
        m[(i, i)] = Complex64::new(2.0 / 6.0, 0.0);
    }
    for (r, c) in singles {
        m[(r, c)] = Complex64::new(1.0 / 6.0, 0.0);
    }
    LinearFunctional::new(m)
}

/// Average-fidelity functionals `(A, B)` of the original and copy.
pub fn fidelity_functionals() -> (LinearFunctional, LinearFunctional) {
    let a = functional_from(
        [0, 4, 10, 14],
        [(0, 10), (2, 2), (4, 14), (6, 6), (8, 8), (10, 0), (12, 12), (14, 4)],
    );
    let b = functional_from(
        [0, 6, 8, 14],
        [(0, 6), (2, 2), (4, 4), (6, 0), (8, 14), (10, 10), (12, 12), (14, 8)],
    );
    (a, b)
}

/// `(F̄_A, F̄_B) = (A·D, B·D)`.
pub fn average_fidelities(d: &DynamicalMatrix) -> (f64, f64) {
    let (a, b) = fidelity_functionals();
    (a.evaluate(d), b.evaluate(d))
}

pub fn average_fidelities_strict(d: &DynamicalMatrix) -> Result<(f64, f64), FidelityError> {
    ensure_valid(d)?;
    Ok(average_fidelities(d))
}

fn ensure_valid(d: &DynamicalMatrix) -> Result<(), FidelityError> {
    let report = validate(d);
    if !report.is_valid_channel {
        return Err(FidelityError::InvalidChannel(report.failure_summary()));
    }
    Ok(())
}

/// Point on the Bloch sphere, `ψ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochAngles {
    theta: f64,
    phi: f64,
}

impl BlochAngles {
    pub fn new(theta: f64, phi: f64) -> Result<Self, FidelityError> {
        if !(0.0..=PI).contains(&theta) || !(0.0..2.0 * PI).contains(&phi) {
            return Err(FidelityError::InvalidAngles { theta, phi });
        }
        Ok(Self { theta, phi })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn amplitudes(&self) -> (Complex64, Complex64) {
        let (s, c) = (self.theta / 2.0).sin_cos();
        (Complex64::new(c, 0.0), Complex64::from_polar(s, self.phi))
    }
}

/// `(⟨ψ|ρ'_A|ψ⟩, ⟨ψ|ρ'_B|ψ⟩)` for the pure input `α|0⟩ + β|1⟩` (not checked for normalization).
pub fn point_fidelity_amplitudes(d: &DynamicalMatrix, alpha: Complex64, beta: Complex64) -> (f64, f64) {
    let out = apply(d, &TwoQubitState::with_blank(alpha, beta));
    let psi = [alpha, beta];
    let overlap = |r: ComplexMatrix| -> f64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for a in 0..2 {
            for b in 0..2 {
                acc += psi[a].conj() * r[(a, b)] * psi[b];
            }
        }
        acc.re
    };
    (
        overlap(out.partial_trace(Subsystem::A)),
        overlap(out.partial_trace(Subsystem::B)),
    )
}

pub fn point_fidelity(d: &DynamicalMatrix, angles: BlochAngles) -> (f64, f64) {
    let (alpha, beta) = angles.amplitudes();
    point_fidelity_amplitudes(d, alpha, beta)
}

pub fn point_fidelity_strict(d: &DynamicalMatrix, angles: BlochAngles) -> Result<(f64, f64), FidelityError> {
    ensure_valid(d)?;
    Ok(point_fidelity(d, angles))
}

/// Gauss–Legendre nodes and weights on `[−1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and its derivative.
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Bloch-sphere average of the point fidelities by product quadrature
/// (Gauss–Legendre in `cos θ`, uniform trapezoid in `φ`).
pub fn average_by_quadrature(d: &DynamicalMatrix) -> (f64, f64) {
    let (nodes, weights) = gauss_legendre(QUAD_POLAR_NODES);
    let (mut fa, mut fb) = (0.0, 0.0);
    for (u, w) in nodes.iter().zip(&weights) {
        let c = ((1.0 + u) / 2.0).sqrt();
        let s = ((1.0 - u) / 2.0).sqrt();
        let (mut ra, mut rb) = (0.0, 0.0);
        for m in 0..QUAD_AZIMUTH_NODES {
            let phi = 2.0 * PI * m as f64 / QUAD_AZIMUTH_NODES as f64;
            let (a, b) = point_fidelity_amplitudes(d, Complex64::new(c, 0.0), Complex64::from_polar(s, phi));
            ra += a;
            rb += b;
        }
        fa += w * ra / QUAD_AZIMUTH_NODES as f64;
        fb += w * rb / QUAD_AZIMUTH_NODES as f64;
    }
    // (1/4π)∫dφ∫du = ½ Σ_u w_u · mean_φ
    (fa / 2.0, fb / 2.0)
}

/// Recovers the coefficient matrices of both average-fidelity functionals by
/// evaluating [`average_by_quadrature`] on a basis of Hermitian matrices.
pub fn derive_fidelity_functionals() -> (LinearFunctional, LinearFunctional) {
    let probe = |entries: &[(usize, usize, Complex64)]| {
        let mut m = ComplexMatrix::zeros(DIM);
        for &(r, c, v) in entries {
            m[(r, c)] = v;
        }
        average_by_quadrature(&DynamicalMatrix::new(m).expect("16x16"))
    };
    let mut a = ComplexMatrix::zeros(DIM);
    let mut b = ComplexMatrix::zeros(DIM);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for r in 0..DIM {
        let (fa, fb) = probe(&[(r, r, one)]);
        a[(r, r)] = Complex64::new(fa, 0.0);
        b[(r, r)] = Complex64::new(fb, 0.0);
        for c in r + 1..DIM {
            // Symmetric probe gives 2·Re C_rc, antisymmetric probe gives −2·Im C_rc.
            let (sa, sb) = probe(&[(r, c, one), (c, r, one)]);
            let (ta, tb) = probe(&[(r, c, i), (c, r, -i)]);
            let ca = Complex64::new(sa, -ta) / 2.0;
            let cb = Complex64::new(sb, -tb) / 2.0;
            a[(r, c)] = ca;
            a[(c, r)] = ca.conj();
            b[(r, c)] = cb;
            b[(c, r)] = cb.conj();
        }
    }
    (LinearFunctional::new(a), LinearFunctional::new(b))
}

#[derive(Clone, Copy, Debug, Serialize, PartialEq)]
pub struct Spread {
    pub spread_a: f64,
    pub spread_b: f64,
}

/// Max minus min point fidelity per clone over a `grid × grid` lattice in
/// `(cos θ, φ)`.
pub fn universality_spread(d: &DynamicalMatrix, grid: usize) -> Result<Spread, FidelityError> {
    if grid < 8 {
        return Err(FidelityError::GridTooSmall(grid));
    }
    let (mut amin, mut amax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut bmin, mut bmax) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 0..grid {
        let u = -1.0 + 2.0 * k as f64 / (grid - 1) as f64;
        let c = ((1.0 + u) / 2.0).max(0.0).sqrt();
        let s = ((1.0 - u) / 2.0).max(0.0).sqrt();
        for m in 0..grid {
            let phi = 2.0 * PI * m as f64 / grid as f64;
            let (fa, fb) = point_fidelity_amplitudes(d, Complex64::new(c, 0.0), Complex64::from_polar(s, phi));
            amin = amin.min(fa);
            amax = amax.max(fa);
            bmin = bmin.min(fb);
            bmax = bmax.max(fb);
        }
    }
    Ok(Spread {
        spread_a: amax - amin,
        spread_b: bmax - bmin,
    })
}

pub fn check_normalized(alpha: Complex64, beta: Complex64) -> Result<(), FidelityError> {
    let norm = alpha.norm_sqr() + beta.norm_sqr();
    if !((norm - 1.0).abs() <= 1e-10) {
        return Err(FidelityError::NotNormalized { norm });
    }
    Ok(())
}

/// Single-clone reduced outputs `(ρ'_A, ρ'_B)` for input `(α|0⟩+β|1⟩) ⊗ |0⟩`.
pub fn reduced_outputs(
    d: &DynamicalMatrix,
    alpha: Complex64,
    beta: Complex64,
) -> Result<(ComplexMatrix, ComplexMatrix), FidelityError> {
    check_normalized(alpha, beta)?;
    let out = apply(d, &TwoQubitState::with_blank(alpha, beta));
    Ok((out.partial_trace(Subsystem::A), out.partial_trace(Subsystem::B)))
}

/// Closed-form reduced clone of every optimal symmetric machine:
/// `[[2|α|²/3 + 1/6, 2αβ*/3], [2α*β/3, 5/6 − 2|α|²/3]]`.
pub fn optimal_reduced_matrix(alpha: Complex64, beta: Complex64) -> ComplexMatrix {
    let a2 = alpha.norm_sqr();
    let off = alpha * beta.conj() * (2.0 / 3.0);
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = Complex64::new(2.0 * a2 / 3.0 + 1.0 / 6.0, 0.0);
    m[(0, 1)] = off;
    m[(1, 0)] = off.conj();
    m[(1, 1)] = Complex64::new(5.0 / 6.0 - 2.0 * a2 / 3.0, 0.0);
    m
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::channel::random::random_channel;
    use crate::channel::{d_opt, identity_channel, trivial_swap_channel};

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn random_angles(rng: &mut impl Rng) -> BlochAngles {
        BlochAngles::new(rng.gen_range(0.0..=PI), rng.gen_range(0.0..2.0 * PI)).unwrap()
    }

    #[test]
    fn functionals_have_twelve_entries_and_are_hermitian() {
        let (a, b) = fidelity_functionals();
        assert_eq!(a.nonzero_count(), 12);
        assert_eq!(b.nonzero_count(), 12);
        assert_eq!(a.coeffs().hermiticity_residual(), 0.0);
        assert_eq!(b.coeffs().hermiticity_residual(), 0.0);
    }

    #[test]
    fn reference_averages() {
        let (fa, fb) = average_fidelities(&d_opt());
        assert!((fa - 5.0 / 6.0).abs() <= 1e-15 && (fb - 5.0 / 6.0).abs() <= 1e-15);
        let (fa, fb) = average_fidelities(&trivial_swap_channel());
        assert!((fa - 0.75).abs() <= 1e-15 && (fb - 0.75).abs() <= 1e-15);
        let (fa, fb) = average_fidelities(&identity_channel());
        assert!((fa - 1.0).abs() <= 1e-15 && (fb - 0.5).abs() <= 1e-15);
    }

    #[test]
    fn strict_mode_rejects_invalid_channels() {
        let mut m = d_opt().into_matrix();
        m[(0, 0)] = c(0.7);
        let bad = DynamicalMatrix::new(m).unwrap();
        assert!(matches!(
            average_fidelities_strict(&bad),
            Err(FidelityError::InvalidChannel(_))
        ));
        let angles = BlochAngles::new(0.3, 0.2).unwrap();
        assert!(point_fidelity_strict(&bad, angles).is_err());
        assert!(average_fidelities_strict(&d_opt()).is_ok());
    }

    #[test]
    fn d_opt_is_universal_at_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (fa, fb) = point_fidelity(&d_opt(), BlochAngles::new(0.0, 0.0).unwrap());
        assert!((fa - 5.0 / 6.0).abs() <= 1e-15 && (fb - 5.0 / 6.0).abs() <= 1e-15);
        for _ in 0..50 {
            let (fa, fb) = point_fidelity(&d_opt(), random_angles(&mut rng));
            assert!((fa - 5.0 / 6.0).abs() <= 1e-10 && (fb - 5.0 / 6.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn identity_keeps_the_original_perfectly() {
        let mut rng = ChaCha8Rng::seed_from_u64(22);
        for _ in 0..20 {
            let (fa, _) = point_fidelity(&identity_channel(), random_angles(&mut rng));
            assert!((fa - 1.0).abs() <= 1e-14);
        }
    }

    #[test]
    fn trivial_swap_is_flat_on_a_grid() {
        for t in 0..20 {
            for p in 0..20 {
                let angles = BlochAngles::new(PI * t as f64 / 19.0, 2.0 * PI * p as f64 / 20.0).unwrap();
                let (fa, fb) = point_fidelity(&trivial_swap_channel(), angles);
                assert!((fa - 0.75).abs() <= 1e-12 && (fb - 0.75).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn angles_are_range_checked() {
        assert!(BlochAngles::new(-0.1, 0.0).is_err());
        assert!(BlochAngles::new(0.0, 2.0 * PI).is_err());
        assert!(BlochAngles::new(PI, 0.0).is_ok());
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(QUAD_POLAR_NODES);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
        let m4: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(4)).sum();
        assert!((m4 - 0.4).abs() < 1e-14);
        let (x3, w3) = gauss_legendre(3);
        assert!((x3[2] - (0.6f64).sqrt()).abs() < 1e-15);
        assert!((w3[1] - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_reproduces_reference_averages() {
        for (d, fa0, fb0) in [(d_opt(), 5.0 / 6.0, 5.0 / 6.0), (trivial_swap_channel(), 0.75, 0.75)] {
            let (fa, fb) = average_by_quadrature(&d);
            assert!((fa - fa0).abs() <= 1e-10 && (fb - fb0).abs() <= 1e-10);
        }
    }

    #[test]
    fn derived_functionals_match_hard_coded() {
        let (a, b) = fidelity_functionals();
        let (da, db) = derive_fidelity_functionals();
        assert!((da.coeffs()[(0, 0)].re - 1.0 / 3.0).abs() <= 1e-10);
        assert!((da.coeffs()[(2, 2)].re - 1.0 / 6.0).abs() <= 1e-10);
        assert!(da.coeffs()[(1, 1)].norm() <= 1e-10);
        assert!((&da.coeffs().clone() - a.coeffs()).max_abs() <= 1e-10);
        assert!((&db.coeffs().clone() - b.coeffs()).max_abs() <= 1e-10);
    }

    #[test]
    fn spreads() {
        let s = universality_spread(&d_opt(), 20).unwrap();
        assert!(s.spread_a <= 1e-10 && s.spread_b <= 1e-10);
        let s = universality_spread(&trivial_swap_channel(), 20).unwrap();
        assert!(s.spread_a <= 1e-10 && s.spread_b <= 1e-10);
        // Blank copy stays |0⟩: F_B = |α|² = (1 + cos θ)/2 sweeps all of [0, 1].
        let s = universality_spread(&identity_channel(), 16).unwrap();
        assert!(s.spread_a <= 1e-12);
        assert!(s.spread_b > 0.4);
        assert!((s.spread_b - 1.0).abs() <= 1e-12);
        assert!(matches!(
            universality_spread(&d_opt(), 7),
            Err(FidelityError::GridTooSmall(7))
        ));
    }

    #[test]
    fn reduced_outputs_of_d_opt() {
        let (ra, rb) = reduced_outputs(&d_opt(), c(1.0), c(0.0)).unwrap();
        let expect = ComplexMatrix::from_real_diagonal(&[5.0 / 6.0, 1.0 / 6.0]);
        assert!((&ra - &expect).max_abs() <= 1e-15 && (&rb - &expect).max_abs() <= 1e-15);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let (ra, _) = reduced_outputs(&d_opt(), c(s), c(s)).unwrap();
        assert!((ra[(0, 0)].re - 0.5).abs() <= 1e-15 && (ra[(0, 1)].re - 1.0 / 3.0).abs() <= 1e-15);

        let (alpha, beta) = (c(1.0 / 3f64.sqrt()), c((2.0f64 / 3.0).sqrt()));
        let (ra, rb) = reduced_outputs(&d_opt(), alpha, beta).unwrap();
        for r in [ra, rb] {
            assert!((r[(0, 0)].re - (2.0 / 9.0 + 1.0 / 6.0)).abs() <= 1e-14);
            assert!((r[(1, 1)].re - (5.0 / 6.0 - 2.0 / 9.0)).abs() <= 1e-14);
            assert!((r[(0, 1)].re - (2.0 / 3.0) * (2f64.sqrt() / 3.0)).abs() <= 1e-14);
        }
        assert!(matches!(
            reduced_outputs(&d_opt(), c(1.0), c(1.0)),
            Err(FidelityError::NotNormalized { .. })
        ));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn quadrature_matches_functionals(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d = random_channel(&mut rng);
            let (fa, fb) = average_fidelities(&d);
            let (qa, qb) = average_by_quadrature(&d);
            prop_assert!((fa - qa).abs() <= 1e-10 && (fb - qb).abs() <= 1e-10);
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&fa));
            prop_assert!((-1e-9..=1.0 + 1e-9).contains(&fb));
        }

        #[test]
        fn averages_are_linear(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let d1 = random_channel(&mut rng);
            let d2 = random_channel(&mut rng);
            let (a1, b1) = average_fidelities(&d1);
            let (a2, b2) = average_fidelities(&d2);
            let (am, bm) = average_fidelities(&d1.mix(&d2, 0.5));
            prop_assert!((am - (a1 + a2) / 2.0).abs() <= 1e-15);
            prop_assert!((bm - (b1 + b2) / 2.0).abs() <= 1e-15);
        }
    }
}
