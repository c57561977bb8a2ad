//! Finite-difference discretization of `-d²/dt² + (t - ξ)²` on `[0, L]` with
//! a Neumann condition at `t = 0` (even ghost points) and a Dirichlet node at
//! `t = L`.
//!
//! The discrete problem is written in symmetric form `S u = μ W u` with
//! `W = diag(1/2, 1, 1, ...)`, so eigenvalue counts follow from the inertia of
//! the banded matrix `S - σ W`.

use serde::{Deserialize, Serialize};

/// Finite-difference stencil order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FdOrder {
    #[default]
    Second,
    Fourth,
}

impl FdOrder {
    pub fn convergence_order(self) -> i32 {
        match self {
            FdOrder::Second => 2,
            FdOrder::Fourth => 4,
        }
    }

    pub fn bandwidth(self) -> usize {
        match self {
            FdOrder::Second => 1,
            FdOrder::Fourth => 2,
        }
    }
}

impl std::str::FromStr for FdOrder {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "2" | "second" => Ok(FdOrder::Second),
            "4" | "fourth" => Ok(FdOrder::Fourth),
            other => Err(format!("unknown order '{other}' (expected 2 or 4)")),
        }
    }
}

/// Symmetric banded operator stored by diagonals: `diag[k][i] = S[i][i+k]`.
#[derive(Debug, Clone)]
pub struct BandedOperator {
    pub xi: f64,
    pub spacing: f64,
    pub order: FdOrder,
    /// `diags[0]` is the main diagonal, `diags[k]` the k-th superdiagonal.
    pub diags: Vec<Vec<f64>>,
    /// Diagonal mass weights (1/2 at the Neumann node, 1 elsewhere).
    pub weights: Vec<f64>,
}

impl BandedOperator {
    /// Build the operator for `grid_points` nodes spanning `[0, length]`.
    /// The last node carries the Dirichlet condition and is eliminated.
    pub fn new(xi: f64, length: f64, grid_points: usize, order: FdOrder) -> Self {
        assert!(grid_points >= 6, "grid too small");
        let n = grid_points - 1;
        let d = length / (grid_points - 1) as f64;
        let inv = 1.0 / (d * d);
        let pot = |i: usize| {
            let t = i as f64 * d - xi;
            t * t
        };
        let dpot0 = -2.0 * xi;
        let bw = order.bandwidth();
        let mut diags = vec![vec![0.0; n]; bw + 1];
        let mut weights = vec![1.0; n];
        weights[0] = 0.5;
        match order {
            FdOrder::Second => {
                for i in 0..n {
                    diags[0][i] = 2.0 * inv + pot(i);
                    if i + 1 < n {
                        diags[1][i] = -inv;
                    }
                }
                // exact Neumann closure: u'''(0) = V'(0) u(0)
                diags[0][0] = inv + 0.5 * pot(0) + d / 6.0 * dpot0;
            }
            FdOrder::Fourth => {
                let c = inv / 12.0;
                for i in 0..n {
                    diags[0][i] = 30.0 * c + pot(i);
                    if i + 1 < n {
                        diags[1][i] = -16.0 * c;
                    }
                    if i + 2 < n {
                        diags[2][i] = c;
                    }
                }
                // even reflection at t = 0
                // ghost values u(-kh) = u(kh) - (kh)³/3 · V'(0) u(0), with the
                // off-diagonal part of the correction symmetrized
                diags[0][0] = 15.0 * c + 0.5 * pot(0) + 5.0 * d / 36.0 * dpot0;
                diags[1][0] = -16.0 * c - d / 36.0 * dpot0;
                diags[2][0] = c;
                if n > 1 {
                    diags[0][1] = 31.0 * c + pot(1);
                }
                // odd reflection across the Dirichlet node
                diags[0][n - 1] = 29.0 * c + pot(n - 1);
            }
        }
        BandedOperator {
            xi,
            spacing: d,
            order,
            diags,
            weights,
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// Number of eigenvalues strictly below `sigma`, from the inertia of
    /// `S - σW` (LDLᵀ without pivoting; exact zero pivots are nudged).
    pub fn count_below(&self, sigma: f64) -> usize {
        let n = self.dim();
        let bw = self.diags.len() - 1;
        let mut neg = 0;
        if bw == 1 {
            // Sturm sequence
            let mut q = 0.0f64;
            for i in 0..n {
                let a = self.diags[0][i] - sigma * self.weights[i];
                let b2 = if i > 0 { self.diags[1][i - 1].powi(2) } else { 0.0 };
                q = if i == 0 { a } else { a - b2 / q };
                if q == 0.0 {
                    q = -f64::EPSILON * (a.abs() + 1.0);
                }
                if q < 0.0 {
                    neg += 1;
                }
            }
            return neg;
        }
        // bandwidth 2: rolling LDLᵀ over a 3x3 window
        // l1[i] = L[i+1][i], l2[i] = L[i+2][i]
        let mut dvals = vec![0.0f64; n];
        let mut l1 = vec![0.0f64; n];
        let mut l2 = vec![0.0f64; n];
        for j in 0..n {
            let mut djj = self.diags[0][j] - sigma * self.weights[j];
            if j >= 1 {
                djj -= l1[j - 1] * l1[j - 1] * dvals[j - 1];
            }
            if j >= 2 {
                djj -= l2[j - 2] * l2[j - 2] * dvals[j - 2];
            }
            if djj == 0.0 {
                djj = -f64::EPSILON * (self.diags[0][j].abs() + 1.0);
            }
            dvals[j] = djj;
            if djj < 0.0 {
                neg += 1;
            }
            if j + 1 < n {
                let mut s = self.diags[1][j];
                if j >= 1 {
                    s -= l2[j - 1] * l1[j - 1] * dvals[j - 1];
                }
                l1[j] = s / djj;
            }
            if j + 2 < n {
                l2[j] = self.diags[2][j] / djj;
            }
        }
        neg
    }

    /// Gershgorin-type bounds on the spectrum of `W⁻¹S`.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let bw = self.diags.len() - 1;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut r = 0.0;
            for k in 1..=bw {
                if i + k < n {
                    r += self.diags[k][i].abs();
                }
                if i >= k {
                    r += self.diags[k][i - k].abs();
                }
            }
            let w = self.weights[i];
            lo = lo.min((self.diags[0][i] - r) / w);
            hi = hi.max((self.diags[0][i] + r) / w);
        }
        (lo, hi)
    }

    /// The `j`-th (1-based) smallest eigenvalue by bisection on inertia counts.
    pub fn eigenvalue(&self, j: usize) -> f64 {
        let (mut lo, hi) = self.spectral_bounds();
        lo = lo.min(0.0) - 1.0;
        self.eigenvalue_in(j, lo, hi.max(lo + 1.0))
    }

    /// Bisection for the `j`-th eigenvalue, given `count(lo) < j <= count(hi)`.
    pub fn eigenvalue_in(&self, j: usize, mut lo: f64, mut hi: f64) -> f64 {
        while self.count_below(lo) >= j {
            lo -= (hi - lo).max(1.0);
        }
        while self.count_below(hi) < j {
            hi += (hi - lo).max(1.0);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) >= j {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(1.0) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Apply `S` to a vector.
    pub fn apply(&self, u: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let bw = self.diags.len() - 1;
        let mut out = vec![0.0; n];
        for i in 0..n {
            let mut s = self.diags[0][i] * u[i];
            for k in 1..=bw {
                if i + k < n {
                    s += self.diags[k][i] * u[i + k];
                }
                if i >= k {
                    s += self.diags[k][i - k] * u[i - k];
                }
            }
            out[i] = s;
        }
        out
    }

    /// Eigenvector for an eigenvalue approximation `mu` by inverse iteration.
    /// Returned vector is normalized with `uᵀ W u = 1`.
    pub fn eigenvector(&self, mu: f64) -> Vec<f64> {
        let n = self.dim();
        let bw = self.diags.len() - 1;
        // dense band of S - σW with partial pivoting: lower bw, upper 2bw
        let shift = mu + 1e-10 * mu.abs().max(1.0);
        let width = 3 * bw + 1;
        let row_off = bw; // column offset: band[i][c] = A[i][i + c - row_off]
        let mut band = vec![vec![0.0f64; width]; n];
        for i in 0..n {
            band[i][row_off] = self.diags[0][i] - shift * self.weights[i];
            for k in 1..=bw {
                if i + k < n {
                    band[i][row_off + k] = self.diags[k][i];
                }
                if i >= k {
                    band[i][row_off - k] = self.diags[k][i - k];
                }
            }
        }
        // LU with partial pivoting
        let mut piv = vec![0usize; n];
        let get = |band: &Vec<Vec<f64>>, i: usize, j: usize| -> f64 {
            let c = j as i64 - i as i64 + row_off as i64;
            if c < 0 || c >= width as i64 {
                0.0
            } else {
                band[i][c as usize]
            }
        };
        for k in 0..n {
            let last = (k + bw).min(n - 1);
            let mut p = k;
            let mut best = get(&band, k, k).abs();
            for i in k + 1..=last {
                let v = get(&band, i, k).abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            piv[k] = p;
            let jmax = (k + 2 * bw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    let a = get(&band, k, j);
                    let b = get(&band, p, j);
                    set(&mut band, k, j, b, row_off, width);
                    set(&mut band, p, j, a, row_off, width);
                }
            }
            let mut pivot = get(&band, k, k);
            if pivot == 0.0 {
                pivot = f64::EPSILON;
                set(&mut band, k, k, pivot, row_off, width);
            }
            for i in k + 1..=last {
                let f = get(&band, i, k) / pivot;
                set(&mut band, i, k, f, row_off, width);
                if f != 0.0 {
                    for j in k + 1..=jmax {
                        let v = get(&band, i, j) - f * get(&band, k, j);
                        set(&mut band, i, j, v, row_off, width);
                    }
                }
            }
        }
        let solve = |rhs: &mut Vec<f64>| {
            for k in 0..n {
                let p = piv[k];
                if p != k {
                    rhs.swap(k, p);
                }
                let last = (k + bw).min(n - 1);
                for i in k + 1..=last {
                    rhs[i] -= get(&band, i, k) * rhs[k];
                }
            }
            for k in (0..n).rev() {
                let jmax = (k + 2 * bw).min(n - 1);
                let mut s = rhs[k];
                for j in k + 1..=jmax {
                    s -= get(&band, k, j) * rhs[j];
                }
                rhs[k] = s / get(&band, k, k);
            }
        };
        let mut u: Vec<f64> = (0..n)
            .map(|i| 1.0 + 0.1 * ((i as f64) * 0.618_033_988_7).sin())
            .collect();
        for _ in 0..4 {
            let mut rhs: Vec<f64> = u.iter().zip(&self.weights).map(|(a, w)| a * w).collect();
            solve(&mut rhs);
            let norm = self.weighted_norm(&rhs);
            u = rhs.into_iter().map(|v| v / norm).collect();
        }
        u
    }

    /// `sqrt(uᵀ W u)`.
    pub fn weighted_norm(&self, u: &[f64]) -> f64 {
        u.iter()
            .zip(&self.weights)
            .map(|(a, w)| w * a * a)
            .sum::<f64>()
            .sqrt()
    }
}

fn set(band: &mut [Vec<f64>], i: usize, j: usize, v: f64, row_off: usize, width: usize) {
    let c = j as i64 - i as i64 + row_off as i64;
    if c >= 0 && (c as usize) < width {
        band[i][c as usize] = v;
    }
}
