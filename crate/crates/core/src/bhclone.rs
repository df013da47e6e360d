//! The Bužek–Hillery universal cloner with one ancilla qubit.
//!
//! Basis vectors of `A ⊗ B ⊗ ancilla` are indexed `4a + 2b + x`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::channel::{apply, channel_from_kraus, d_opt, validate, DynamicalMatrix, Subsystem, TwoQubitState, N};
use crate::family::shared_basis;
use crate::fidelity::{average_fidelities, check_normalized, optimal_reduced_matrix, reduced_outputs, FidelityError};
use crate::interference::interference_of_dynamical;
use crate::numkernel::ComplexMatrix;

const OUT: usize = 8;

/// Isometry `C² → C⁸` taking the original into clone pair plus ancilla.
#[derive(Clone, Debug)]
pub struct BhIsometry {
    /// Columns `V|0⟩` and `V|1⟩`.
    columns: [[Complex64; OUT]; 2],
}

fn idx(a: usize, b: usize, x: usize) -> usize {
    4 * a + 2 * b + x
}

fn re(v: f64) -> Complex64 {
    Complex64::new(v, 0.0)
}

/// `V|0⟩ = √(2/3)|00⟩|0⟩ + √(1/6)(|01⟩+|10⟩)|1⟩`,
/// `V|1⟩ = √(2/3)|11⟩|1⟩ + √(1/6)(|01⟩+|10⟩)|0⟩`.
pub fn bh_isometry() -> BhIsometry {
    let big = re((2.0f64 / 3.0).sqrt());
    let small = re((1.0f64 / 6.0).sqrt());
    let mut columns = [[re(0.0); OUT]; 2];
    columns[0][idx(0, 0, 0)] = big;
    columns[0][idx(0, 1, 1)] = small;
    columns[0][idx(1, 0, 1)] = small;
    columns[1][idx(1, 1, 1)] = big;
    columns[1][idx(0, 1, 0)] = small;
    columns[1][idx(1, 0, 0)] = small;
    BhIsometry { columns }
}

impl BhIsometry {
    pub fn column(&self, k: usize) -> &[Complex64; OUT] {
        &self.columns[k]
    }

    /// `‖V†V − I‖_F`.
    pub fn isometry_residual(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let g: Complex64 = self.columns[i]
                    .iter()
                    .zip(&self.columns[j])
                    .map(|(a, b)| a.conj() * b)
                    .sum();
                let expect = if i == j { 1.0 } else { 0.0 };
                sum += (g - expect).norm_sqr();
            }
        }
        sum.sqrt()
    }

    fn apply(&self, alpha: Complex64, beta: Complex64) -> [Complex64; OUT] {
        std::array::from_fn(|k| alpha * self.columns[0][k] + beta * self.columns[1][k])
    }

    /// `(I ⊗ X ⊗ Z)·V`: the clone pair of the other blank. Its range is
    /// orthogonal to that of `V`.
    fn flipped(&self) -> Self {
        let mut columns = [[re(0.0); OUT]; 2];
        for (k, col) in self.columns.iter().enumerate() {
            for a in 0..2 {
                for b in 0..2 {
                    for x in 0..2 {
                        let sign = if x == 1 { -1.0 } else { 1.0 };
                        columns[k][idx(a, 1 - b, x)] = col[idx(a, b, x)] * sign;
                    }
                }
            }
        }
        Self { columns }
    }
}

/// Two-clone state `Tr_ancilla[V|ψ⟩⟨ψ|V†]` for `ψ = α|0⟩ + β|1⟩`.
pub fn bh_output(alpha: Complex64, beta: Complex64) -> Result<TwoQubitState, FidelityError> {
    check_normalized(alpha, beta)?;
    let v = bh_isometry().apply(alpha, beta);
    let rho = ComplexMatrix::from_fn(N, |r, c| (0..2).map(|x| v[2 * r + x] * v[2 * c + x].conj()).sum());
    Ok(TwoQubitState::from_matrix_unchecked(rho))
}

/// Kraus operators `K_x = (I ⊗ ⟨x|)·U` of the full two-qubit map, where `U`
/// acts as `V` on blank `|0⟩` and as `(I ⊗ X ⊗ Z)·V` on blank `|1⟩`.
pub fn bh_extended_kraus() -> [ComplexMatrix; 2] {
    let v = bh_isometry();
    let w = v.flipped();
    std::array::from_fn(|x| {
        ComplexMatrix::from_fn(N, |out, input| {
            let (a, blank) = (input / 2, input % 2);
            let col = if blank == 0 { &v.columns[a] } else { &w.columns[a] };
            col[2 * out + x]
        })
    })
}

/// Dynamical matrix of the extended machine and its interference value.
pub fn bh_extended_channel() -> (DynamicalMatrix, f64) {
    let d = channel_from_kraus(&bh_extended_kraus()).expect("extension is an isometry");
    let interference = interference_of_dynamical(&d).value;
    (d, interference)
}

#[derive(Clone, Debug, Serialize)]
pub struct BhReport {
    pub isometry_residual: f64,
    pub samples: usize,
    pub seed: u64,
    /// Largest entry deviation of the reduced clones from the `D^opt` ones.
    pub max_reduced_deviation: f64,
    /// Largest deviation from the closed-form reduced clone.
    pub max_closed_form_deviation: f64,
    pub max_symmetry_deviation: f64,
    pub min_point_fidelity: f64,
    pub max_point_fidelity: f64,
    pub extended_valid_channel: bool,
    pub extended_interference: f64,
    pub extended_fidelity_a: f64,
    pub extended_fidelity_b: f64,
    /// Largest deviation of the extended channel from `bh_output` on blank `|0⟩`.
    pub extended_blank_deviation: f64,
    /// Frobenius distance of `D_ext − D^opt` from the admissible perturbations.
    pub extended_family_distance: f64,
}

fn max_entry_diff(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).max_abs()
}

pub fn random_amplitudes(rng: &mut ChaCha8Rng) -> (Complex64, Complex64) {
    use rand_distr::{Distribution, StandardNormal};
    let mut g = || -> f64 { StandardNormal.sample(rng) };
    let (a, b) = (Complex64::new(g(), g()), Complex64::new(g(), g()));
    let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
    (a / norm, b / norm)
}

/// Checks every property of the machine on `samples` seeded random inputs.
pub fn bh_report(samples: usize, seed: u64) -> BhReport {
    let iso = bh_isometry();
    let (d, interference) = bh_extended_channel();
    let dopt = d_opt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut r = BhReport {
        isometry_residual: iso.isometry_residual(),
        samples,
        seed,
        max_reduced_deviation: 0.0,
        max_closed_form_deviation: 0.0,
        max_symmetry_deviation: 0.0,
        min_point_fidelity: f64::INFINITY,
        max_point_fidelity: f64::NEG_INFINITY,
        extended_valid_channel: validate(&d).is_valid_channel,
        extended_interference: interference,
        extended_fidelity_a: 0.0,
        extended_fidelity_b: 0.0,
        extended_blank_deviation: 0.0,
        extended_family_distance: shared_basis()
            .map(|b| b.distance(&(d.matrix() - dopt.matrix())))
            .unwrap_or(f64::NAN),
    };
    (r.extended_fidelity_a, r.extended_fidelity_b) = average_fidelities(&d);
    for _ in 0..samples {
        let (alpha, beta) = random_amplitudes(&mut rng);
        let out = bh_output(alpha, beta).expect("normalized");
        let (ra, rb) = (out.partial_trace(Subsystem::A), out.partial_trace(Subsystem::B));
        let (oa, ob) = reduced_outputs(&dopt, alpha, beta).expect("normalized");
        let closed = optimal_reduced_matrix(alpha, beta);
        r.max_reduced_deviation = r
            .max_reduced_deviation
            .max(max_entry_diff(&ra, &oa))
            .max(max_entry_diff(&rb, &ob));
        r.max_closed_form_deviation = r.max_closed_form_deviation.max(max_entry_diff(&ra, &closed));
        r.max_symmetry_deviation = r.max_symmetry_deviation.max(max_entry_diff(&ra, &rb));
        let f = (alpha.conj() * (ra[(0, 0)] * alpha + ra[(0, 1)] * beta)
            + beta.conj() * (ra[(1, 0)] * alpha + ra[(1, 1)] * beta))
            .re;
        r.min_point_fidelity = r.min_point_fidelity.min(f);
        r.max_point_fidelity = r.max_point_fidelity.max(f);
        let via_channel = apply(&d, &TwoQubitState::with_blank(alpha, beta));
        r.extended_blank_deviation = r
            .extended_blank_deviation
            .max(max_entry_diff(via_channel.matrix(), out.matrix()));
    }
    r
}
