//! Two-qubit channels in propagator and dynamical-matrix form.
//!
//! Index conventions (used everywhere in the crate):
//!
//! * two-qubit basis `|00⟩, |01⟩, |10⟩, |11⟩`, qubit A (original) is the leading
//!   tensor factor, qubit B (copy) the trailing one;
//! * propagator `P[4i+j][4k+l]` maps `ρ_{kl}` into `ρ'_{ij}`;
//! * dynamical matrix `D[4i+k][4j+l] = P[4i+j][4k+l]`, so rows pack the
//!   pair (output `i`, input `k`) and columns pack (output `j`, input `l`).
//!
//! A channel is completely positive iff its dynamical matrix is positive
//! semidefinite. The weaker block-positivity condition, ⟨u⊗v|D|u⊗v⟩ ≥ 0 for
//! product vectors, is not certified anywhere; validation checks full
//! positivity instead.

mod json;

pub use json::{matrix_from_json, matrix_to_json, read_matrix_file, write_matrix_file, MatrixJson};

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::interference::interference_of_dynamical;
use crate::numkernel::{eigh, ComplexMatrix, NumError};

/// Local dimension of the two-qubit system.
pub const N: usize = 4;
/// Side of the propagator and dynamical matrices.
pub const DIM: usize = N * N;

pub const HERMITIAN_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-9;
pub const PSD_TOL: f64 = 1e-9;
const STATE_TOL: f64 = 1e-10;
const KRAUS_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("dimension mismatch: expected {expected}x{expected}, found {found}x{found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid channel: {0}")]
    InvalidChannel(String),
    #[error("Kraus operators are not trace preserving (‖ΣK†K − I‖_F = {residual:.3e})")]
    NotTracePreserving { residual: f64 },
    #[error("invalid state: {0}")]
    InvalidState(String),
    #[error("input amplitudes not normalized (|α|²+|β|² = {norm})")]
    NotNormalized { norm: f64 },
    #[error("malformed matrix JSON: {0}")]
    Json(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Numeric(#[from] NumError),
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn ensure_dim(m: &ComplexMatrix, expected: usize) -> Result<(), ChannelError> {
    if m.dim() != expected {
        return Err(ChannelError::DimensionMismatch {
            expected,
            found: m.dim(),
        });
    }
    Ok(())
}

/// Which qubit survives a partial trace.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Density matrix of the original+copy pair.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitState {
    rho: ComplexMatrix,
}

impl TwoQubitState {
    /// Checked constructor: Hermitian, unit trace and positive within `1e-10`.
    pub fn new(rho: ComplexMatrix) -> Result<Self, ChannelError> {
        ensure_dim(&rho, N)?;
        let herm = rho.hermiticity_residual();
        if herm > STATE_TOL {
            return Err(ChannelError::InvalidState(format!("hermiticity residual {herm:.3e}")));
        }
        let tr = rho.trace();
        if (tr - c(1.0)).norm() > STATE_TOL {
            return Err(ChannelError::InvalidState(format!("trace {tr}")));
        }
        let min = eigh(&rho)?.min_value();
        if min < -STATE_TOL {
            return Err(ChannelError::InvalidState(format!("min eigenvalue {min:.3e}")));
        }
        Ok(Self { rho })
    }

    pub fn from_matrix_unchecked(rho: ComplexMatrix) -> Self {
        debug_assert_eq!(rho.dim(), N);
        Self { rho }
    }

    /// `|ψ⟩⟨ψ|` for a normalized 4-component state vector.
    pub fn pure(psi: [Complex64; 4]) -> Self {
        Self {
            rho: ComplexMatrix::from_fn(N, |r, c| psi[r] * psi[c].conj()),
        }
    }

    /// `|a⟩⟨a| ⊗ |b⟩⟨b|` for single-qubit amplitudes.
    pub fn product_pure(a: [Complex64; 2], b: [Complex64; 2]) -> Self {
        Self::pure([a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]])
    }

    /// The cloning input `|ψ⟩⟨ψ| ⊗ |0⟩⟨0|` with `ψ = α|0⟩ + β|1⟩`.
    pub fn with_blank(alpha: Complex64, beta: Complex64) -> Self {
        Self::product_pure([alpha, beta], [c(1.0), c(0.0)])
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.rho
    }

    pub fn partial_trace(&self, keep: Subsystem) -> ComplexMatrix {
        partial_trace(&self.rho, keep)
    }
}

/// Reduced single-qubit matrix of a 4×4 two-qubit operator.
pub fn partial_trace(rho: &ComplexMatrix, keep: Subsystem) -> ComplexMatrix {
    assert_eq!(rho.dim(), N, "partial_trace expects a 4x4 matrix");
    ComplexMatrix::from_fn(2, |a, b| match keep {
        Subsystem::A => rho[(2 * a, 2 * b)] + rho[(2 * a + 1, 2 * b + 1)],
        Subsystem::B => rho[(a, b)] + rho[(2 + a, 2 + b)],
    })
}

/// 16×16 superoperator acting on row-major flattened density matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct PropagatorMatrix(ComplexMatrix);

impl PropagatorMatrix {
    pub fn new(p: ComplexMatrix) -> Result<Self, ChannelError> {
        ensure_dim(&p, DIM)?;
        Ok(Self(p))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `ρ'_{ij} = Σ_{kl} P[4i+j][4k+l] ρ_{kl}`.
    pub fn apply(&self, rho: &TwoQubitState) -> TwoQubitState {
        let out = self.0.apply_vec(rho.matrix().entries());
        TwoQubitState::from_matrix_unchecked(ComplexMatrix::from_entries(N, out).expect("16 entries"))
    }
}

/// 16×16 dynamical (Choi) matrix of a two-qubit channel.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalMatrix(ComplexMatrix);

impl DynamicalMatrix {
    /// Wraps a 16×16 matrix. No channel properties are checked; see [`validate`].
    pub fn new(d: ComplexMatrix) -> Result<Self, ChannelError> {
        ensure_dim(&d, DIM)?;
        Ok(Self(d))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.0[(row, col)]
    }

    /// `D[4i+k][4j+l]` addressed by the four two-qubit indices.
    #[inline]
    pub fn element(&self, i: usize, k: usize, j: usize, l: usize) -> Complex64 {
        self.0[(N * i + k, N * j + l)]
    }

    /// Convex combination `(1−t)·self + t·other`.
    pub fn mix(&self, other: &Self, t: f64) -> Self {
        Self(&self.0.scale(1.0 - t) + &other.0.scale(t))
    }

    /// `Σ_i D[4i+j][4i+j]` for each input index `j`.
    pub fn partial_trace_sums(&self) -> [f64; N] {
        let mut sums = [0.0; N];
        for (j, s) in sums.iter_mut().enumerate() {
            *s = (0..N).map(|i| self.0[(N * i + j, N * i + j)].re).sum();
        }
        sums
    }
}

fn reshuffle_matrix(m: &ComplexMatrix) -> ComplexMatrix {
    ComplexMatrix::from_fn(DIM, |row, col| {
        let (i, k) = (row / N, row % N);
        let (j, l) = (col / N, col % N);
        m[(N * i + j, N * k + l)]
    })
}

/// Propagator → dynamical matrix: `D[4i+k][4j+l] = P[4i+j][4k+l]`.
pub fn reshuffle(p: &PropagatorMatrix) -> DynamicalMatrix {
    DynamicalMatrix(reshuffle_matrix(&p.0))
}

/// Dynamical matrix → propagator (the same index swap; it is an involution).
pub fn unreshuffle(d: &DynamicalMatrix) -> PropagatorMatrix {
    PropagatorMatrix(reshuffle_matrix(&d.0))
}

/// Raw index reshuffle on any 16×16 matrix.
pub fn reshuffle_raw(m: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
    ensure_dim(m, DIM)?;
    Ok(reshuffle_matrix(m))
}

/// `ρ'_{ij} = Σ_{k,l} D[4i+k][4j+l] ρ_{kl}`.
pub fn apply(d: &DynamicalMatrix, rho: &TwoQubitState) -> TwoQubitState {
    let r = rho.matrix();
    let out = ComplexMatrix::from_fn(N, |i, j| {
        let mut acc = c(0.0);
        for k in 0..N {
            for l in 0..N {
                acc += d.0[(N * i + k, N * j + l)] * r[(k, l)];
            }
        }
        acc
    });
    TwoQubitState::from_matrix_unchecked(out)
}

/// [`apply`] after requiring `d` to pass [`validate`].
pub fn apply_strict(d: &DynamicalMatrix, rho: &TwoQubitState) -> Result<TwoQubitState, ChannelError> {
    let report = validate(d);
    if !report.is_valid_channel {
        return Err(ChannelError::InvalidChannel(report.failure_summary()));
    }
    Ok(apply(d, rho))
}

/// `D[4i+k][4j+l] = Σ_m (K_m)_{ik} conj((K_m)_{jl})`.
pub fn channel_from_kraus(operators: &[ComplexMatrix]) -> Result<DynamicalMatrix, ChannelError> {
    let mut completeness = ComplexMatrix::zeros(N);
    for k in operators {
        ensure_dim(k, N)?;
        completeness = &completeness + &k.adjoint().matmul(k);
    }
    let residual = (&completeness - &ComplexMatrix::identity(N)).frobenius_norm();
    if !(residual <= KRAUS_TOL) {
        return Err(ChannelError::NotTracePreserving { residual });
    }
    let mut d = ComplexMatrix::zeros(DIM);
    for km in operators {
        let vec = km.entries();
        for row in 0..DIM {
            let a = vec[row];
            if a.norm_sqr() == 0.0 {
                continue;
            }
            for col in 0..DIM {
                d[(row, col)] += a * vec[col].conj();
            }
        }
    }
    Ok(DynamicalMatrix(d))
}

/// Channel `ρ ↦ U ρ U†` of a 4×4 unitary.
pub fn unitary_channel(u: &ComplexMatrix) -> Result<DynamicalMatrix, ChannelError> {
    channel_from_kraus(std::slice::from_ref(u))
}

pub fn identity_channel() -> DynamicalMatrix {
    unitary_channel(&ComplexMatrix::identity(N)).expect("identity is unitary")
}

/// The symmetric interference-free optimal cloner.
pub fn d_opt() -> DynamicalMatrix {
    const DIAG: [f64; DIM] = [
        2.0 / 3.0,
        0.25,
        0.0,
        0.25,
        1.0 / 6.0,
        0.25,
        1.0 / 6.0,
        0.25,
        1.0 / 6.0,
        0.25,
        1.0 / 6.0,
        0.25,
        0.0,
        0.25,
        2.0 / 3.0,
        0.25,
    ];
    let mut d = ComplexMatrix::from_real_diagonal(&DIAG);
    for (r, col) in [(0, 6), (0, 10), (4, 14), (8, 14)] {
        d[(r, col)] = c(1.0 / 3.0);
        d[(col, r)] = c(1.0 / 3.0);
    }
    for (r, col) in [(4, 8), (6, 10)] {
        d[(r, col)] = c(1.0 / 6.0);
        d[(col, r)] = c(1.0 / 6.0);
    }
    DynamicalMatrix(d)
}

pub fn swap_gate() -> ComplexMatrix {
    ComplexMatrix::from_real_rows(&[
        &[1.0, 0.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0],
        &[0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0],
    ])
}

/// Kraus operators of the machine that keeps the original, prepares a random
/// copy and swaps the two with probability 1/2:
/// `{(I⊗|m⟩⟨n|)/2, SWAP·(I⊗|m⟩⟨n|)/2}`.
pub fn trivial_swap_kraus() -> Vec<ComplexMatrix> {
    let id2 = ComplexMatrix::identity(2);
    let swap = swap_gate();
    let mut ops = Vec::with_capacity(16);
    for m in 0..2 {
        for n in 0..2 {
            let mut e = ComplexMatrix::zeros(2);
            e[(m, n)] = c(1.0);
            let k = id2.kron(&e).scale(0.5);
            ops.push(swap.matmul(&k));
            ops.push(k);
        }
    }
    ops
}

/// `ρ_AB ↦ ½·Tr_B(ρ)⊗I/2 + ½·I/2⊗Tr_B(ρ)`.
pub fn trivial_swap_channel() -> DynamicalMatrix {
    channel_from_kraus(&trivial_swap_kraus()).expect("complete Kraus set")
}

#[derive(Clone, Debug, Serialize)]
pub struct ValidationReport {
    pub hermiticity_residual: f64,
    pub trace_residuals: [f64; N],
    pub min_eigenvalue: f64,
    pub interference: f64,
    pub is_valid_channel: bool,
}

impl ValidationReport {
    /// Human-readable list of the violated invariants.
    pub fn failure_summary(&self) -> String {
        let mut parts = Vec::new();
        if !(self.hermiticity_residual <= HERMITIAN_TOL) {
            parts.push(format!("hermiticity_residual = {:.3e}", self.hermiticity_residual));
        }
        for (j, r) in self.trace_residuals.iter().enumerate() {
            if !(*r <= TRACE_TOL) {
                parts.push(format!("trace_residuals[{j}] = {r:.3e}"));
            }
        }
        if !(self.min_eigenvalue >= -PSD_TOL) {
            parts.push(format!("min_eigenvalue = {:.3e}", self.min_eigenvalue));
        }
        if parts.is_empty() {
            "none".to_owned()
        } else {
            parts.join(", ")
        }
    }
}

/// Hermiticity, column normalization and positivity of a dynamical matrix.
pub fn validate(d: &DynamicalMatrix) -> ValidationReport {
    let hermiticity_residual = d.0.hermiticity_residual();
    let sums = d.partial_trace_sums();
    let trace_residuals = sums.map(|s| (s - 1.0).abs());
    let min_eigenvalue = if d.0.all_finite() {
        eigh(&d.0.hermitian_part()).map_or(f64::NAN, |e| e.min_value())
    } else {
        f64::NAN
    };
    let interference = interference_of_dynamical(d).value;
    let is_valid_channel = hermiticity_residual <= HERMITIAN_TOL
        && trace_residuals.iter().all(|r| *r <= TRACE_TOL)
        && min_eigenvalue >= -PSD_TOL;
    ValidationReport {
        hermiticity_residual,
        trace_residuals,
        min_eigenvalue,
        interference,
        is_valid_channel,
    }
}

/// Seeded random channels and states for tests and benchmarks.
pub mod random {
    use num_complex::Complex64;
    use rand::Rng;
    use rand_distr::StandardNormal;

    use super::*;

    fn gaussian_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Vec<Complex64> {
        (0..rows * cols)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect()
    }

    /// Random CPTP map from a random Stiefel isometry `C⁴ → C⁴ ⊗ C^r`.
    pub fn random_channel(rng: &mut impl Rng) -> DynamicalMatrix {
        let r = rng.gen_range(1..=4);
        let g = gaussian_matrix(rng, N * r, N);
        // Orthonormalize the four columns (Gram–Schmidt).
        let mut cols: Vec<Vec<Complex64>> = (0..N).map(|c| (0..N * r).map(|row| g[row * N + c]).collect()).collect();
        for a in 0..N {
            for b in 0..a {
                let proj: Complex64 = cols[b].iter().zip(&cols[a]).map(|(x, y)| x.conj() * y).sum();
                let cb = cols[b].clone();
                for (y, x) in cols[a].iter_mut().zip(&cb) {
                    *y -= proj * x;
                }
            }
            let norm = cols[a].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            cols[a].iter_mut().for_each(|z| *z /= norm);
        }
        let kraus: Vec<ComplexMatrix> = (0..r)
            .map(|e| ComplexMatrix::from_fn(N, |i, k| cols[k][i * r + e]))
            .collect();
        channel_from_kraus(&kraus).unwrap()
    }

    pub fn random_state(rng: &mut impl Rng) -> TwoQubitState {
        let g = ComplexMatrix::from_entries(N, gaussian_matrix(rng, N, N)).unwrap();
        let m = g.matmul(&g.adjoint());
        let tr = m.trace().re;
        TwoQubitState::new(m.scale(1.0 / tr).hermitian_part()).unwrap()
    }
}
