//! Collapsed Gauss–Legendre product rule on a triangle.

/// Barycentric points and weights summing to 1, exact to degree `2n - 2`.
pub fn collapsed_rule(n: usize) -> Vec<([f64; 3], f64)> {
    let (x, w) = corner_spectra::numerics::gauss_legendre(n);
    let mut out = Vec::with_capacity(n * n);
    for (xu, wu) in x.iter().zip(&w) {
        let u = 0.5 * (xu + 1.0);
        for (xv, wv) in x.iter().zip(&w) {
            let v = 0.5 * (xv + 1.0);
            let l1 = u * (1.0 - v);
            let l2 = u * v;
            out.push(([1.0 - l1 - l2, l1, l2], 2.0 * u * 0.25 * wu * wv));
        }
    }
    out
}
