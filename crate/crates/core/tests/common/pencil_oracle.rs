//! Dense reference eigensolver for small Hermitian pencils: hand-written
//! complex Cholesky reduction, real symmetric embedding and cyclic Jacobi.

use num_complex::Complex64 as C;

/// Lower Cholesky factor of a Hermitian positive definite matrix.
fn cholesky(m: &[Vec<C>]) -> Vec<Vec<C>> {
    let n = m.len();
    let mut l = vec![vec![C::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let mut d = m[j][j].re;
        for k in 0..j {
            d -= l[j][k].norm_sqr();
        }
        assert!(d > 0.0, "mass not positive definite");
        let d = d.sqrt();
        l[j][j] = C::new(d, 0.0);
        for i in j + 1..n {
            let mut s = m[i][j];
            for k in 0..j {
                s -= l[i][k] * l[j][k].conj();
            }
            l[i][j] = s / d;
        }
    }
    l
}

/// Solve `L X = B` column by column (B given as columns).
fn forward(l: &[Vec<C>], b: &[C]) -> Vec<C> {
    let n = l.len();
    let mut x = b.to_vec();
    for i in 0..n {
        let mut s = x[i];
        for k in 0..i {
            s -= l[i][k] * x[k];
        }
        x[i] = s / l[i][i];
    }
    x
}

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi rotations.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        let total: f64 = a.iter().flatten().map(|v| v * v).sum();
        if off <= 1e-30 * total.max(1e-300) {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    ev
}

/// All eigenvalues of the pencil `(K, M)`, ascending.
pub fn pencil_eigenvalues(k: &[Vec<C>], m: &[Vec<C>]) -> Vec<f64> {
    let n = k.len();
    let l = cholesky(m);
    // C = L⁻¹ K L⁻ᴴ: first Y = L⁻¹ K (columns), then C = (L⁻¹ Yᴴ)ᴴ
    let mut y = vec![vec![C::new(0.0, 0.0); n]; n];
    for j in 0..n {
        let col: Vec<C> = (0..n).map(|i| k[i][j]).collect();
        let x = forward(&l, &col);
        for i in 0..n {
            y[i][j] = x[i];
        }
    }
    let mut c = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        let row: Vec<C> = (0..n).map(|j| y[i][j].conj()).collect();
        let x = forward(&l, &row);
        for j in 0..n {
            c[i][j] = x[j].conj();
        }
    }
    // real embedding [[Re, -Im], [Im, Re]] doubles every eigenvalue
    let mut r = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let v = (c[i][j] + c[j][i].conj()) * 0.5;
            r[i][j] = v.re;
            r[i + n][j + n] = v.re;
            r[i][j + n] = -v.im;
            r[i + n][j] = v.im;
        }
    }
    let ev = jacobi_eigenvalues(r);
    ev.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Random Hermitian pencil with a well-conditioned positive definite mass.
pub fn random_pencil(rng: &mut impl rand::Rng, n: usize) -> (Vec<Vec<C>>, Vec<Vec<C>>) {
    let mut k = vec![vec![C::new(0.0, 0.0); n]; n];
    let mut b = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            b[i][j] = C::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
        }
        for j in 0..=i {
            let v = C::new(rng.gen::<f64>() * 2.0 - 1.0, if i == j { 0.0 } else { rng.gen::<f64>() * 2.0 - 1.0 });
            k[i][j] = v;
            k[j][i] = v.conj();
        }
    }
    // M = BᴴB / n + I
    let mut m = vec![vec![C::new(0.0, 0.0); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut s = C::new(0.0, 0.0);
            for r in 0..n {
                s += b[r][i].conj() * b[r][j];
            }
            m[i][j] = s / n as f64;
        }
        m[i][i] += C::new(1.0, 0.0);
    }
    (k, m)
}
