//! Independent evaluation of the sublevel quantities of `μ₁`: bisection for
//! the endpoints and Gauss–Legendre on every table panel, where the
//! interpolant is a single cubic.

use corner_spectra::model1d::ModelSpectrum;
use corner_spectra::numerics::gauss_legendre;

pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) <= 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if (f(m) > 0.0) == (fa > 0.0) {
            a = m;
        } else {
            b = m;
        }
        if b - a < 1e-15 {
            break;
        }
    }
    0.5 * (a + b)
}

/// Root of the interpolant, refined by bisection on exact solves.
fn level_crossing(spec: &ModelSpectrum, ratio: f64, a: f64, b: f64) -> f64 {
    let rough = bisect(|x| spec.mu1(x) - ratio, a, b);
    let exact = |x: f64| spec.mu_exact(1, x).unwrap() - ratio;
    let mut d = 1e-6;
    while exact(rough - d) * exact(rough + d) > 0.0 {
        d *= 4.0;
    }
    bisect(exact, rough - d, rough + d)
}

/// Endpoints of `{μ₁ ≤ ratio}`, with `+∞` on the right when `ratio ≥ 1`.
pub fn endpoints(spec: &ModelSpectrum, ratio: f64) -> (f64, f64) {
    let left = level_crossing(spec, ratio, spec.xi_min(), spec.xi0);
    let right = if ratio >= 1.0 {
        f64::INFINITY
    } else {
        level_crossing(spec, ratio, spec.xi0, spec.xi_max())
    };
    (left, right)
}

/// `∫ [ratio − μ₁]₊ dξ` over the table range.
pub fn positive_part_integral(spec: &ModelSpectrum, ratio: f64) -> f64 {
    let (x, w) = gauss_legendre(8);
    let (left, right) = endpoints(spec, ratio);
    let right = right.min(spec.xi_max());
    let mut breaks = vec![left];
    breaks.extend(spec.xi_grid.iter().copied().filter(|&g| g > left && g < right));
    breaks.push(right);
    let mut total = 0.0;
    for p in breaks.windows(2) {
        let (a, b) = (p[0], p[1]);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (xi, wi) in x.iter().zip(&w) {
            total += wi * half * (ratio - spec.mu1(mid + half * xi)).max(0.0);
        }
    }
    total
}
