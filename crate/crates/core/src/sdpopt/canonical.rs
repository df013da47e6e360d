//! Solver-internal form: minimize `⟨c, x⟩` over coordinates `x` of an n×n
//! Hermitian PSD matrix subject to `Q x = q` with orthonormal rows `Q`.

use log::warn;
use num_complex::Complex64;

use super::coords::{from_coords, functional_coords, to_coords};
use super::{SdpError, SdpProblem, Sense};
use crate::numkernel::ComplexMatrix;

/// Rows whose Gram-Schmidt remainder falls below this (relative to the
/// original row norm) count as linearly dependent.
const DEPENDENT_ROW_TOL: f64 = 1e-10;
/// Dependent rows whose targets disagree by more than this make the problem
/// infeasible instead of being dropped.
const DEPENDENT_TARGET_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub(super) struct Canonical {
    pub n: usize,
    pub c: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    pub dropped: usize,
}

pub(super) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(super) fn axpy(a: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += a * xi);
}

pub(super) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl Canonical {
    /// Orthonormalizes `raw` rows by two-pass Gram-Schmidt, dropping
    /// dependent ones.
    pub fn new(
        n: usize,
        c: Vec<f64>,
        raw: impl IntoIterator<Item = (Vec<f64>, f64, String)>,
        row_tol: f64,
        target_tol: f64,
    ) -> Result<Self, SdpError> {
        let mut rows: Vec<Vec<f64>> = Vec::new();
        let mut targets = Vec::new();
        let mut dropped = 0;
        for (mut row, mut b, label) in raw {
            let norm0 = dot(&row, &row).sqrt();
            for _ in 0..2 {
                for (qk, bk) in rows.iter().zip(&targets) {
                    let p = dot(qk, &row);
                    axpy(-p, qk, &mut row);
                    b -= p * bk;
                }
            }
            let norm = dot(&row, &row).sqrt();
            if norm <= row_tol * norm0.max(1.0) {
                if b.abs() > target_tol {
                    return Err(SdpError::InfeasibleDetected { residual: b.abs() });
                }
                if !label.is_empty() {
                    warn!("dropping linearly dependent constraint '{label}'");
                }
                dropped += 1;
                continue;
            }
            row.iter_mut().for_each(|v| *v /= norm);
            rows.push(row);
            targets.push(b / norm);
        }
        Ok(Self {
            n,
            c,
            rows,
            targets,
            dropped,
        })
    }

    pub fn from_problem(problem: &SdpProblem) -> Result<Self, SdpError> {
        let sign = match problem.sense {
            Sense::Minimize => 1.0,
            Sense::Maximize => -1.0,
        };
        let c = functional_coords(&problem.objective).iter().map(|v| sign * v).collect();
        let raw = problem
            .constraints
            .iter()
            .map(|k| (functional_coords(&k.functional), k.target, k.label.clone()));
        let n = problem.objective.coeffs().dim();
        Self::new(n, c, raw, DEPENDENT_ROW_TOL, DEPENDENT_TARGET_TOL)
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// Euclidean projection onto `{x : Q x = q}`.
    pub fn project(&self, v: &mut [f64]) {
        for (qk, bk) in self.rows.iter().zip(&self.targets) {
            let p = dot(qk, v) - bk;
            axpy(-p, qk, v);
        }
    }

    /// Restriction to matrices `V W V†`, where the columns of `v` are
    /// orthonormal vectors of length `n`. The reduced data are `V†·M·V` for
    /// every constraint and objective matrix.
    pub fn restrict(&self, v: &Basis) -> Result<Self, SdpError> {
        let compress = |coords: &[f64]| to_coords(&v.compress(&from_coords(coords)));
        let raw: Vec<_> = self
            .rows
            .iter()
            .zip(&self.targets)
            .map(|(row, &b)| (compress(row), b, String::new()))
            .collect();
        // The face comes out of a numerical solve, so near-dependencies are
        // judged more loosely than for user constraints.
        Self::new(v.rank(), compress(&self.c), raw, 1e-8, 1e-7)
    }
}

/// Orthonormal vectors spanning a subspace of `C^n`, stored as columns.
#[derive(Clone, Debug)]
pub(super) struct Basis {
    n: usize,
    cols: Vec<Vec<Complex64>>,
}

impl Basis {
    pub fn new(n: usize, cols: Vec<Vec<Complex64>>) -> Self {
        Self { n, cols }
    }

    pub fn rank(&self) -> usize {
        self.cols.len()
    }

    /// `V† M V`.
    pub fn compress(&self, m: &ComplexMatrix) -> ComplexMatrix {
        let mv: Vec<Vec<Complex64>> = self.cols.iter().map(|col| m.apply_vec(col)).collect();
        ComplexMatrix::from_fn(self.rank(), |a, b| {
            self.cols[a].iter().zip(&mv[b]).map(|(x, y)| x.conj() * y).sum()
        })
    }

    /// `V W V†`.
    pub fn lift(&self, w: &ComplexMatrix) -> ComplexMatrix {
        let r = self.rank();
        let mut out = ComplexMatrix::zeros(self.n);
        for a in 0..r {
            for b in 0..r {
                let wab = w[(a, b)];
                if wab == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for i in 0..self.n {
                    let s = self.cols[a][i] * wab;
                    for j in 0..self.n {
                        out[(i, j)] += s * self.cols[b][j].conj();
                    }
                }
            }
        }
        out
    }

    /// Composition: `self` spans a subspace of `C^n`, `inner` a subspace of
    /// `C^rank`; the result is `V·U` in `C^n`.
    pub fn compose(&self, inner: &Basis) -> Basis {
        let cols = inner
            .cols
            .iter()
            .map(|u| {
                (0..self.n)
                    .map(|i| self.cols.iter().zip(u).map(|(col, uk)| col[i] * uk).sum())
                    .collect()
            })
            .collect();
        Basis { n: self.n, cols }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdpopt::symmetric_problem;

    #[test]
    fn rows_are_orthonormal() {
        let c = Canonical::from_problem(&symmetric_problem()).unwrap();
        assert_eq!(c.rows.len() + c.dropped, 53);
        for (i, a) in c.rows.iter().enumerate() {
            for (j, b) in c.rows.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((dot(a, b) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dependent_rows_are_dropped_or_rejected() {
        let e = |k: usize| {
            let mut v = vec![0.0; 4];
            v[k] = 1.0;
            v
        };
        let sum = vec![1.0, 1.0, 0.0, 0.0];
        let ok = Canonical::new(
            2,
            vec![0.0; 4],
            [
                (e(0), 1.0, "a".into()),
                (e(1), 2.0, "b".into()),
                (sum.clone(), 3.0, "a+b".into()),
            ],
            1e-10,
            1e-9,
        )
        .unwrap();
        assert_eq!((ok.rows.len(), ok.dropped), (2, 1));
        let bad = Canonical::new(
            2,
            vec![0.0; 4],
            [
                (e(0), 1.0, "a".into()),
                (e(1), 2.0, "b".into()),
                (sum, 3.5, "a+b".into()),
            ],
            1e-10,
            1e-9,
        );
        assert!(matches!(bad, Err(SdpError::InfeasibleDetected { .. })));
    }
}
