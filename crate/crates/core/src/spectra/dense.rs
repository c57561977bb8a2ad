//! Dense kernels for small pencils: Bunch–Kaufman inertia and a direct
//! generalized eigensolver.

use super::ldl::Inertia;
use super::sparse::{CsrMatrix, C64};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};

/// Bunch–Kaufman pivot threshold `(1 + √17) / 8`.
const BK_ALPHA: f64 = 0.640_388_203_202_208_4;

/// Inertia of a dense Hermitian matrix (row-major, full storage) by
/// `P A Pᵀ = L D Lᴴ` with 1×1 and 2×2 pivots.
pub fn bunch_kaufman_inertia(a: &[Vec<C64>]) -> Inertia {
    let n = a.len();
    let mut m: Vec<Vec<C64>> = a.to_vec();
    let mut out = Inertia::default();
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(0.0f64, |s, v| s.max(v.norm()))
        .max(f64::MIN_POSITIVE);
    let zero_tol = 1e-14 * scale * n as f64;
    let mut k = 0;
    while k < n {
        let absakk = m[k][k].re.abs();
        let (mut imax, mut colmax) = (k, 0.0f64);
        for (i, row) in m.iter().enumerate().skip(k + 1) {
            let v = row[k].norm();
            if v > colmax {
                colmax = v;
                imax = i;
            }
        }
        if absakk.max(colmax) <= zero_tol {
            out.zero += 1;
            k += 1;
            continue;
        }
        let (kp, kstep) = if absakk >= BK_ALPHA * colmax {
            (k, 1)
        } else {
            let mut rowmax = 0.0f64;
            for j in k..n {
                if j != imax {
                    rowmax = rowmax.max(m[imax][j].norm());
                }
            }
            if absakk * rowmax >= BK_ALPHA * colmax * colmax {
                (k, 1)
            } else if m[imax][imax].re.abs() >= BK_ALPHA * rowmax {
                (imax, 1)
            } else {
                (imax, 2)
            }
        };
        let kk = k + kstep - 1;
        if kp != kk {
            m.swap(kp, kk);
            for row in m.iter_mut() {
                row.swap(kp, kk);
            }
        }
        if kstep == 1 {
            let d = m[k][k].re;
            if d < 0.0 {
                out.negative += 1;
            } else {
                out.positive += 1;
            }
            for i in k + 1..n {
                let f = m[i][k] / d;
                if f == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let akj = m[k][j];
                    m[i][j] -= f * akj;
                }
            }
        } else {
            let d11 = m[k][k].re;
            let d22 = m[k + 1][k + 1].re;
            let d21 = m[k + 1][k];
            let det = d11 * d22 - d21.norm_sqr();
            if det < 0.0 {
                out.negative += 1;
                out.positive += 1;
            } else if d11 + d22 < 0.0 {
                out.negative += 2;
            } else {
                out.positive += 2;
            }
            // D⁻¹ = [[d22, -d12], [-d21, d11]] / det, d12 = conj(d21)
            let inv = [
                [C64::new(d22 / det, 0.0), -d21.conj() / det],
                [-d21 / det, C64::new(d11 / det, 0.0)],
            ];
            for i in k + 2..n {
                let (a0, a1) = (m[i][k], m[i][k + 1]);
                let w0 = a0 * inv[0][0] + a1 * inv[1][0];
                let w1 = a0 * inv[0][1] + a1 * inv[1][1];
                for j in k + 2..n {
                    let (b0, b1) = (m[k][j], m[k + 1][j]);
                    m[i][j] -= w0 * b0 + w1 * b1;
                }
            }
        }
        k += kstep;
    }
    out
}

/// All eigenpairs of the dense pencil `(K, M)`, ascending, with
/// `M`-orthonormal eigenvectors.
pub fn dense_eigenpairs(k: &CsrMatrix, m: &CsrMatrix) -> Result<(Vec<f64>, Vec<Vec<C64>>)> {
    let n = k.nrows;
    let kd = to_nalgebra(k);
    let md = to_nalgebra(m);
    let chol = md
        .clone()
        .cholesky()
        .ok_or_else(|| Error::Discretization("mass matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Discretization("singular mass factor".into()))?;
    let c = &linv * kd * linv.adjoint();
    let c = (&c + c.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(c);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let back = linv.adjoint();
    let mut values = Vec::with_capacity(n);
    let mut vectors = Vec::with_capacity(n);
    for &i in &idx {
        values.push(eig.eigenvalues[i]);
        let y = eig.eigenvectors.column(i);
        let x = &back * y;
        vectors.push(x.iter().copied().collect());
    }
    Ok((values, vectors))
}

fn to_nalgebra(a: &CsrMatrix) -> DMatrix<C64> {
    let mut d = DMatrix::<C64>::zeros(a.nrows, a.ncols);
    for i in 0..a.nrows {
        for (j, v) in a.row(i) {
            d[(i, j)] = v;
        }
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    #[test]
    fn inertia_of_diagonal_and_zero_diagonal() {
        let a = vec![
            vec![c(0.0), c(1.0), c(0.0)],
            vec![c(1.0), c(0.0), c(0.0)],
            vec![c(0.0), c(0.0), c(-3.0)],
        ];
        let i = bunch_kaufman_inertia(&a);
        assert_eq!((i.negative, i.zero, i.positive), (2, 0, 1));
    }

    #[test]
    fn singular_matrix_reports_zero() {
        let a = vec![vec![c(1.0), c(1.0)], vec![c(1.0), c(1.0)]];
        let i = bunch_kaufman_inertia(&a);
        assert_eq!((i.negative, i.zero, i.positive), (0, 1, 1));
    }

    #[test]
    fn scalar_pencil() {
        let k = CsrMatrix::from_dense(&[vec![c(2.0)]]);
        let m = CsrMatrix::from_dense(&[vec![c(1.0)]]);
        let (v, _) = dense_eigenpairs(&k, &m).unwrap();
        assert!((v[0] - 2.0).abs() < 1e-15);
    }
}
