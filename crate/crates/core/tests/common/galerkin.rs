//! Dense Legendre–Galerkin solver for `-u'' + (t - ξ)² u` on `[0, T]` with
//! `u'(0) = 0`, `u(T) = 0`. Shares no code with the finite-difference path.

use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss–Legendre rule from the Jacobi matrix (Golub–Welsch).
pub fn gauss_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut j = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let kf = k as f64;
        let b = kf / (4.0 * kf * kf - 1.0).sqrt();
        j[(k - 1, k)] = b;
        j[(k, k - 1)] = b;
    }
    let eig = SymmetricEigen::new(j);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| (eig.eigenvalues[i], 2.0 * eig.eigenvectors[(0, i)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    pairs.into_iter().unzip()
}

/// Values and derivatives of `P_0..=P_m` at `x`.
fn legendre_table(m: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut p = vec![0.0; m + 1];
    let mut d = vec![0.0; m + 1];
    p[0] = 1.0;
    if m >= 1 {
        p[1] = x;
        d[1] = 1.0;
    }
    for k in 1..m {
        let kf = k as f64;
        p[k + 1] = ((2.0 * kf + 1.0) * x * p[k] - kf * p[k - 1]) / (kf + 1.0);
        d[k + 1] = d[k - 1] + (2.0 * kf + 1.0) * p[k];
    }
    (p, d)
}

/// Lowest `count` eigenvalues with `k` basis functions.
pub fn eigenvalues(xi: f64, truncation: f64, k: usize, count: usize) -> Vec<f64> {
    // φ_i = P_i + a_i P_{i+1} + b_i P_{i+2}; φ_i(1) = 0, φ_i'(-1) = 0
    let coeffs: Vec<(f64, f64)> = (0..k)
        .map(|i| {
            let f = |n: usize| (n * (n + 1)) as f64 / 2.0;
            // 1 + a + b = 0 ; f(i) - a f(i+1) + b f(i+2) = 0
            let (f0, f1, f2) = (f(i), f(i + 1), f(i + 2));
            let b = -(f0 + f1) / (f1 + f2);
            let a = -1.0 - b;
            (a, b)
        })
        .collect();
    let nq = k + 120;
    let (xs, ws) = gauss_rule(nq);
    let half = truncation / 2.0;
    let mut stiff = DMatrix::<f64>::zeros(k, k);
    let mut mass = DMatrix::<f64>::zeros(k, k);
    let mut phi = vec![0.0; k];
    let mut dphi = vec![0.0; k];
    for (x, w) in xs.iter().zip(&ws) {
        let (p, d) = legendre_table(k + 1, *x);
        for i in 0..k {
            let (a, b) = coeffs[i];
            phi[i] = p[i] + a * p[i + 1] + b * p[i + 2];
            dphi[i] = (d[i] + a * d[i + 1] + b * d[i + 2]) / half;
        }
        let t = half * (1.0 + x);
        let v = (t - xi).powi(2);
        let wt = w * half;
        for i in 0..k {
            for j in 0..=i {
                let s = wt * (dphi[i] * dphi[j] + v * phi[i] * phi[j]);
                let m = wt * phi[i] * phi[j];
                stiff[(i, j)] += s;
                mass[(i, j)] += m;
            }
        }
    }
    for i in 0..k {
        for j in 0..i {
            stiff[(j, i)] = stiff[(i, j)];
            mass[(j, i)] = mass[(i, j)];
        }
    }
    let chol = mass.cholesky().expect("mass matrix positive definite");
    let l = chol.l();
    let linv = l.clone().try_inverse().expect("invertible factor");
    let c = &linv * stiff * linv.transpose();
    let c = (&c + c.transpose()) * 0.5;
    let mut ev: Vec<f64> = SymmetricEigen::new(c).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ev.truncate(count);
    ev
}

/// Oracle value of `μ_j(ξ)` with the standard truncation; returns the value
/// at the finest of three resolutions and the spread across them.
pub fn mu(j: usize, xi: f64) -> (f64, f64) {
    let t = xi.max(0.0) + 10.0;
    let vals: Vec<f64> = [40, 60, 80]
        .iter()
        .map(|&k| eigenvalues(xi, t, k, j)[j - 1])
        .collect();
    let spread = vals.iter().fold(0.0f64, |m, v| m.max((v - vals[2]).abs()));
    (vals[2], spread)
}

/// Golden-section minimization of the oracle `μ₁` on `[a, b]`.
pub fn theta0(a: f64, b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let f = |x: f64| eigenvalues(x, x.max(0.0) + 10.0, 80, 1)[0];
    let (mut a, mut b) = (a, b);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-9 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (f(x), x)
}
