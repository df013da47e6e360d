//! Classical cloning: column-stochastic maps on basis-state probabilities.
//!
//! A classical cloner only sees the diagonal of the input density matrix, so
//! its dynamical matrix is diagonal with `D[4i+j][4i+j] = t[i][j]`. The
//! average fidelities are linear in `t`, hence extremal on the 4⁴ deterministic
//! maps, which [`enumerate_deterministic_extrema`] checks exhaustively.

use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{DynamicalMatrix, N};
use crate::numkernel::ComplexMatrix;

const STOCHASTIC_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum ClassicalError {
    #[error("invalid stochastic map: {0}")]
    InvalidStochastic(String),
}

/// `t[i][j]` = probability of output basis state `i` given input state `j`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StochasticMap {
    t: [[f64; N]; N],
}

impl StochasticMap {
    pub fn new(t: [[f64; N]; N]) -> Result<Self, ClassicalError> {
        for (i, row) in t.iter().enumerate() {
            for (j, &p) in row.iter().enumerate() {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(ClassicalError::InvalidStochastic(format!("t[{i}][{j}] = {p}")));
                }
            }
        }
        for j in 0..N {
            let s: f64 = (0..N).map(|i| t[i][j]).sum();
            if (s - 1.0).abs() > STOCHASTIC_TOL {
                return Err(ClassicalError::InvalidStochastic(format!("column {j} sums to {s}")));
            }
        }
        Ok(Self { t })
    }

    /// Deterministic map sending input `j` to output `targets[j]`.
    pub fn deterministic(targets: [usize; N]) -> Self {
        let mut t = [[0.0; N]; N];
        for (j, &i) in targets.iter().enumerate() {
            t[i][j] = 1.0;
        }
        Self { t }
    }

    pub fn identity() -> Self {
        Self::deterministic([0, 1, 2, 3])
    }

    pub fn uniform() -> Self {
        Self { t: [[0.25; N]; N] }
    }

    /// Copies the bit of A onto B: `|00⟩ → |00⟩`, `|10⟩ → |11⟩`.
    pub fn bit_copy() -> Self {
        Self::deterministic([0, 1, 3, 3])
    }

    pub fn entries(&self) -> &[[f64; N]; N] {
        &self.t
    }

    /// Output index of each input column, if the map is deterministic.
    pub fn targets(&self) -> Option<[usize; N]> {
        let mut out = [0; N];
        for (j, slot) in out.iter_mut().enumerate() {
            *slot = (0..N).find(|&i| self.t[i][j] == 1.0)?;
        }
        Some(out)
    }
}

pub fn to_dynamical(map: &StochasticMap) -> DynamicalMatrix {
    let mut d = ComplexMatrix::zeros(N * N);
    for i in 0..N {
        for j in 0..N {
            d[(N * i + j, N * i + j)] = Complex64::new(map.t[i][j], 0.0);
        }
    }
    DynamicalMatrix::new(d).expect("16x16")
}

/// Closed-form classical averages
/// `F̄_A = (3 + t00 + t10 − t02 − t12)/6`, `F̄_B = (3 + t00 + t20 − t02 − t22)/6`.
pub fn classical_average_fidelities(map: &StochasticMap) -> (f64, f64) {
    let t = &map.t;
    let fa = (3.0 + t[0][0] + t[1][0] - t[0][2] - t[1][2]) / 6.0;
    let fb = (3.0 + t[0][0] + t[2][0] - t[0][2] - t[2][2]) / 6.0;
    (fa, fb)
}

#[derive(Clone, Debug, Serialize)]
pub struct Witness {
    pub targets: [usize; N],
    pub fa: f64,
    pub fb: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassicalExtrema {
    pub max_fa: f64,
    pub min_fa: f64,
    pub max_fb: f64,
    pub min_fb: f64,
    /// Largest `min(F̄_A, F̄_B)` over all vertices.
    pub max_symmetric: f64,
    pub max_fa_witness: Witness,
    pub min_fa_witness: Witness,
    pub max_fb_witness: Witness,
    pub min_fb_witness: Witness,
    pub symmetric_witness: Witness,
    pub vertices: usize,
}

fn better(candidate: f64, incumbent: f64, maximize: bool) -> bool {
    if maximize {
        candidate > incumbent
    } else {
        candidate < incumbent
    }
}

/// Exhaustive search over all deterministic column maps. Ties keep the first
/// vertex found in lexicographic order of `targets`, which with columns 1 and 3
/// enumerated fastest favours identity-like choices there.
pub fn enumerate_deterministic_extrema() -> ClassicalExtrema {
    let mut all = Vec::with_capacity(N.pow(4));
    for t0 in 0..N {
        for t2 in 0..N {
            for t1 in [1, 0, 2, 3] {
                for t3 in [3, 0, 1, 2] {
                    let targets = [t0, t1, t2, t3];
                    let (fa, fb) = classical_average_fidelities(&StochasticMap::deterministic(targets));
                    all.push(Witness { targets, fa, fb });
                }
            }
        }
    }
    let pick = |key: &dyn Fn(&Witness) -> f64, maximize: bool| -> Witness {
        let mut best = &all[0];
        for w in &all[1..] {
            if better(key(w), key(best), maximize) {
                best = w;
            }
        }
        best.clone()
    };
    let max_fa_witness = pick(&|w| w.fa, true);
    let min_fa_witness = pick(&|w| w.fa, false);
    let max_fb_witness = pick(&|w| w.fb, true);
    let min_fb_witness = pick(&|w| w.fb, false);
    let symmetric_witness = pick(&|w| w.fa.min(w.fb), true);
    ClassicalExtrema {
        max_fa: max_fa_witness.fa,
        min_fa: min_fa_witness.fa,
        max_fb: max_fb_witness.fb,
        min_fb: min_fb_witness.fb,
        max_symmetric: symmetric_witness.fa.min(symmetric_witness.fb),
        max_fa_witness,
        min_fa_witness,
        max_fb_witness,
        min_fb_witness,
        symmetric_witness,
        vertices: all.len(),
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::channel::validate;
    use crate::fidelity::average_fidelities;
    use crate::interference::{interference_of_dynamical, is_interference_free};

    fn random_map(rng: &mut impl Rng) -> StochasticMap {
        let mut t = [[0.0; N]; N];
        for j in 0..N {
            let w: Vec<f64> = (0..N).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
            let s: f64 = w.iter().sum();
            for i in 0..N {
                t[i][j] = w[i] / s;
            }
            // Exact column sum.
            let rest: f64 = (0..N - 1).map(|i| t[i][j]).sum();
            t[N - 1][j] = (1.0 - rest).max(0.0);
        }
        StochasticMap::new(t).unwrap()
    }

    #[test]
    fn identity_map_is_diagonal_ones() {
        let d = to_dynamical(&StochasticMap::identity());
        for r in 0..16 {
            for c in 0..16 {
                let expect = if r == c && [0, 5, 10, 15].contains(&r) {
                    1.0
                } else {
                    0.0
                };
                assert_eq!(d.get(r, c).re, expect);
            }
        }
        let (fa, fb) = classical_average_fidelities(&StochasticMap::identity());
        assert!((fa - 2.0 / 3.0).abs() < 1e-15);
        assert!((fb - 0.5).abs() < 1e-15);
    }

    #[test]
    fn uniform_and_copy_maps() {
        let (fa, fb) = average_fidelities(&to_dynamical(&StochasticMap::uniform()));
        assert!((fa - 0.5).abs() < 1e-15 && (fb - 0.5).abs() < 1e-15);
        let (fa, fb) = average_fidelities(&to_dynamical(&StochasticMap::bit_copy()));
        assert!((fa - 2.0 / 3.0).abs() < 1e-15 && (fb - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(
            classical_average_fidelities(&StochasticMap::bit_copy()),
            (4.0 / 6.0, 4.0 / 6.0)
        );
        let flip = StochasticMap::deterministic([2, 1, 0, 3]);
        assert_eq!(classical_average_fidelities(&flip).0, 2.0 / 6.0);
    }

    #[test]
    fn rejects_non_stochastic() {
        let mut t = [[0.25; N]; N];
        t[0][0] = 0.5;
        assert!(StochasticMap::new(t).is_err());
        t[0][0] = -0.25;
        t[1][0] = 0.75;
        assert!(StochasticMap::new(t).is_err());
    }

    #[test]
    fn extrema_over_vertices() {
        let e = enumerate_deterministic_extrema();
        assert_eq!(e.vertices, 256);
        assert_eq!(e.max_fa, 4.0 / 6.0);
        assert_eq!(e.min_fa, 2.0 / 6.0);
        assert_eq!(e.max_fb, 4.0 / 6.0);
        assert_eq!(e.min_fb, 2.0 / 6.0);
        assert_eq!(e.max_symmetric, 4.0 / 6.0);
        assert_eq!(e.symmetric_witness.fa, e.symmetric_witness.fb);
        assert_eq!(e.symmetric_witness.targets, [0, 1, 3, 3]);
    }

    #[test]
    fn random_maps_never_beat_the_vertices() {
        let e = enumerate_deterministic_extrema();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        for _ in 0..10_000 {
            let (fa, fb) = classical_average_fidelities(&random_map(&mut rng));
            assert!(fa <= e.max_fa + 1e-12 && fa >= e.min_fa - 1e-12);
            assert!(fb <= e.max_fb + 1e-12 && fb >= e.min_fb - 1e-12);
        }
    }

    proptest! {
        #[test]
        fn closed_form_matches_functionals(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let map = random_map(&mut rng);
            let d = to_dynamical(&map);
            let (fa, fb) = classical_average_fidelities(&map);
            let (ga, gb) = average_fidelities(&d);
            prop_assert!((fa - ga).abs() <= 1e-12 && (fb - gb).abs() <= 1e-12);
            prop_assert!(validate(&d).is_valid_channel);
            prop_assert!(is_interference_free(&d, 1e-15));
            prop_assert_eq!(interference_of_dynamical(&d).value, 0.0);
        }
    }
}
