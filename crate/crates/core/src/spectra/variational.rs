//! Randomized checks of the trace variational principles for Hermitian
//! matrices: `tr(H 1_{(-∞,0)}(H)) <= tr(H γ)` for `0 <= γ <= 1`, and the
//! same infimum over orthonormal families.

use super::sparse::C64;
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Absolute slack, scaled by `‖H‖`, for the inequality checks.
pub const SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VariationalReport {
    pub trials: usize,
    pub contraction_violations: usize,
    pub family_violations: usize,
    /// Largest `|tr(H P₋) - Σλ₋|` with `P₋` the negative spectral projector.
    pub projector_equality_error: f64,
    /// Largest `|Σ⟨f_j, H f_j⟩ - Σλ₋|` over the negative eigenvector family.
    pub family_equality_error: f64,
    pub worst_margin: f64,
}

impl VariationalReport {
    pub fn passed(&self) -> bool {
        self.contraction_violations == 0
            && self.family_violations == 0
            && self.projector_equality_error <= SLACK
            && self.family_equality_error <= SLACK
    }
}

fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::<C64>::from_fn(n, n, |_, _| {
        C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
    });
    let shift = rng.gen::<f64>() * 2.0 - 1.0;
    let mut h = (&a + a.adjoint()) * C64::new(0.5, 0.0);
    for i in 0..n {
        h[(i, i)] += C64::new(shift * n as f64 * 0.3, 0.0);
    }
    h
}

fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<C64> {
    let a = DMatrix::<C64>::from_fn(n, n, |_, _| {
        C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)
    });
    a.qr().q()
}

fn trace_product(h: &DMatrix<C64>, g: &DMatrix<C64>) -> f64 {
    (h * g).trace().re
}

pub fn variational_checks(seed: u64, trials: usize) -> VariationalReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = VariationalReport {
        trials,
        contraction_violations: 0,
        family_violations: 0,
        projector_equality_error: 0.0,
        family_equality_error: 0.0,
        worst_margin: f64::INFINITY,
    };
    for _ in 0..trials {
        let n = rng.gen_range(1..=30);
        let h = random_hermitian(&mut rng, n);
        let norm = h.norm().max(1.0);
        let tol = SLACK * norm;
        let eig = SymmetricEigen::new(h.clone());
        let negative: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] < 0.0).collect();
        let neg_trace: f64 = negative.iter().map(|&i| eig.eigenvalues[i]).sum();

        // the optimal density matrix and the optimal family
        let mut proj = DMatrix::<C64>::zeros(n, n);
        let mut family_sum = 0.0;
        for &i in &negative {
            let v = eig.eigenvectors.column(i).into_owned();
            proj += &v * v.adjoint();
            family_sum += (v.adjoint() * &h * &v)[(0, 0)].re;
        }
        let e1 = (trace_product(&h, &proj) - neg_trace).abs() / norm;
        let e2 = (family_sum - neg_trace).abs() / norm;
        report.projector_equality_error = report.projector_equality_error.max(e1);
        report.family_equality_error = report.family_equality_error.max(e2);

        // random contraction 0 <= γ <= 1
        let u = random_unitary(&mut rng, n);
        let d = DMatrix::<C64>::from_fn(n, n, |i, j| {
            if i == j {
                let x: f64 = rng.gen();
                // push some weights to the endpoints
                C64::new(if x < 0.2 { 0.0 } else if x > 0.8 { 1.0 } else { x }, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let gamma = &u * d * u.adjoint();
        let t = trace_product(&h, &gamma);
        report.worst_margin = report.worst_margin.min(t - neg_trace);
        if t < neg_trace - tol {
            report.contraction_violations += 1;
        }

        // random orthonormal family of random size
        let size = rng.gen_range(0..=n);
        let w = random_unitary(&mut rng, n);
        let mut s = 0.0;
        for j in 0..size {
            let f = w.column(j).into_owned();
            s += (f.adjoint() * &h * &f)[(0, 0)].re;
        }
        report.worst_margin = report.worst_margin.min(s - neg_trace);
        if s < neg_trace - tol {
            report.family_violations += 1;
        }
    }
    report
}
