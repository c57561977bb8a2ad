//! Lowest eigenpairs of a Hermitian pencil by shift-invert block subspace
//! expansion with Rayleigh–Ritz on `K`.

use super::dense::dense_eigenpairs;
use super::ldl::LdlFactor;
use super::pencil::{HermitianPencil, DENSE_LIMIT};
use super::sparse::{dot, norm2, C64};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    pub block_size: usize,
    pub seed: u64,
    /// Backward-error tolerance `‖Ku - θMu‖ / ((‖K‖ + |θ|‖M‖)‖u‖)`.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Shift for the inverse; `None` places it just below the spectrum.
    pub shift: Option<f64>,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            block_size: 8,
            seed: 0x5eed_c0de,
            tolerance: 1e-12,
            max_iterations: 2000,
            shift: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Eigenpairs {
    pub values: Vec<f64>,
    #[serde(skip)]
    pub vectors: Vec<Vec<C64>>,
    /// `‖K v - e M v‖₂ / ‖v‖_M` per pair.
    pub residuals: Vec<f64>,
    pub shift: f64,
    pub iterations: usize,
}

pub fn lowest_k(pencil: &HermitianPencil, k: usize) -> Result<Eigenpairs> {
    lowest_k_with(pencil, k, &EigenOptions::default())
}

pub fn lowest_k_with(pencil: &HermitianPencil, k: usize, opts: &EigenOptions) -> Result<Eigenpairs> {
    let n = pencil.dim();
    if k == 0 {
        return Ok(Eigenpairs {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
            shift: opts.shift.unwrap_or(0.0),
            iterations: 0,
        });
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds dimension {n}")));
    }
    if n <= DENSE_LIMIT {
        let (values, vectors) = dense_eigenpairs(&pencil.k, &pencil.m)?;
        let values: Vec<f64> = values.into_iter().take(k).collect();
        let vectors: Vec<Vec<C64>> = vectors.into_iter().take(k).collect();
        let residuals = values
            .iter()
            .zip(&vectors)
            .map(|(e, v)| residual(pencil, *e, v))
            .collect();
        return Ok(Eigenpairs {
            values,
            vectors,
            residuals,
            shift: f64::NAN,
            iterations: 0,
        });
    }
    if k > n / 10 {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds dimension/10 = {}",
            n / 10
        )));
    }
    let sigma = opts.shift.unwrap_or_else(|| default_shift(pencil));
    let (factor, sigma) = pencil.factor_shifted(sigma)?;
    Solver::new(pencil, &factor, k, opts).run(sigma)
}

/// A shift a little below the smallest diagonal Rayleigh quotient.
fn default_shift(pencil: &HermitianPencil) -> f64 {
    let kd = pencil.k.diagonal();
    let md = pencil.m.diagonal();
    let s = kd
        .iter()
        .zip(&md)
        .filter(|(_, m)| m.re > 0.0)
        .map(|(k, m)| k.re / m.re)
        .fold(f64::INFINITY, f64::min);
    if s.is_finite() && s > 0.0 {
        -1e-3 * s
    } else if s.is_finite() {
        s - 1e-3 * s.abs() - 1.0
    } else {
        0.0
    }
}

/// `‖K v - e M v‖₂ / ‖v‖_M`.
pub fn residual(pencil: &HermitianPencil, e: f64, v: &[C64]) -> f64 {
    let kv = pencil.k.mul_vec(v);
    let mv = pencil.m.mul_vec(v);
    let r: Vec<C64> = kv.iter().zip(&mv).map(|(a, b)| a - b * e).collect();
    norm2(&r) / dot(v, &mv).re.max(f64::MIN_POSITIVE).sqrt()
}

struct Solver<'a> {
    pencil: &'a HermitianPencil,
    factor: &'a LdlFactor,
    k: usize,
    opts: &'a EigenOptions,
    v: Vec<Vec<C64>>,
    kv: Vec<Vec<C64>>,
    mv: Vec<Vec<C64>>,
    h: Vec<Vec<C64>>,
    knorm: f64,
    mnorm: f64,
    rng: ChaCha8Rng,
}

impl<'a> Solver<'a> {
    fn new(pencil: &'a HermitianPencil, factor: &'a LdlFactor, k: usize, opts: &'a EigenOptions) -> Self {
        let (knorm, mnorm) = pencil.scale();
        Solver {
            pencil,
            factor,
            k,
            opts,
            v: Vec::new(),
            kv: Vec::new(),
            mv: Vec::new(),
            h: Vec::new(),
            knorm,
            mnorm,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
        }
    }

    fn random_vector(&mut self) -> Vec<C64> {
        let n = self.pencil.dim();
        (0..n)
            .map(|_| C64::new(self.rng.gen::<f64>() - 0.5, self.rng.gen::<f64>() - 0.5))
            .collect()
    }

    /// Append `w` after M-orthogonalization; returns false if it was deflated.
    fn push(&mut self, mut w: Vec<C64>) -> bool {
        let mut mw = self.pencil.m.mul_vec(&w);
        let before = dot(&w, &mw).re.max(0.0).sqrt();
        if before == 0.0 {
            return false;
        }
        for _ in 0..2 {
            for j in 0..self.v.len() {
                let c = dot(&self.mv[j], &w);
                if c != C64::new(0.0, 0.0) {
                    for (wi, vi) in w.iter_mut().zip(&self.v[j]) {
                        *wi -= c * vi;
                    }
                }
            }
            mw = self.pencil.m.mul_vec(&w);
        }
        let norm = dot(&w, &mw).re.max(0.0).sqrt();
        if norm <= 1e-10 * before {
            return false;
        }
        let inv = 1.0 / norm;
        for x in w.iter_mut() {
            *x *= inv;
        }
        for x in mw.iter_mut() {
            *x *= inv;
        }
        let kw = self.pencil.k.mul_vec(&w);
        let mut col: Vec<C64> = self.v.iter().map(|vj| dot(vj, &kw)).collect();
        col.push(C64::new(dot(&w, &kw).re, 0.0));
        for (row, c) in self.h.iter_mut().zip(&col) {
            row.push(*c);
        }
        self.h.push(col.iter().map(|c| c.conj()).collect());
        let last = self.h.len() - 1;
        self.h[last][last] = col[last];
        self.v.push(w);
        self.mv.push(mw);
        self.kv.push(kw);
        true
    }

    fn apply_inverse(&self, mu: &[C64]) -> Vec<C64> {
        self.factor.solve(mu)
    }

    fn ritz(&self) -> (Vec<f64>, DMatrix<C64>) {
        let m = self.v.len();
        let hm = DMatrix::<C64>::from_fn(m, m, |i, j| {
            if i == j {
                C64::new(self.h[i][i].re, 0.0)
            } else {
                (self.h[i][j] + self.h[j][i].conj()) * 0.5
            }
        });
        let eig = SymmetricEigen::new(hm);
        let mut idx: Vec<usize> = (0..m).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vecs = DMatrix::<C64>::from_fn(m, m, |r, c| eig.eigenvectors[(r, idx[c])]);
        (vals, vecs)
    }

    fn combine(basis: &[Vec<C64>], y: &DMatrix<C64>, col: usize) -> Vec<C64> {
        let n = basis[0].len();
        let mut out = vec![C64::new(0.0, 0.0); n];
        for (j, bj) in basis.iter().enumerate() {
            let c = y[(j, col)];
            if c != C64::new(0.0, 0.0) {
                for (o, b) in out.iter_mut().zip(bj) {
                    *o += c * b;
                }
            }
        }
        out
    }

    fn backward_error(&self, theta: f64, u: &[C64], ku: &[C64], mu: &[C64]) -> f64 {
        let r: Vec<C64> = ku.iter().zip(mu).map(|(a, b)| a - b * theta).collect();
        norm2(&r) / ((self.knorm + theta.abs() * self.mnorm) * norm2(u)).max(f64::MIN_POSITIVE)
    }

    fn run(mut self, sigma: f64) -> Result<Eigenpairs> {
        let n = self.pencil.dim();
        let b = self.opts.block_size.max(1);
        let k = self.k;
        let mmax = (2 * k + 2 * b).max(k + 4 * b).min(n);
        let keep = (k + b).min(mmax.saturating_sub(b)).max(k);
        for _ in 0..b {
            let x = self.random_vector();
            let mx = self.pencil.m.mul_vec(&x);
            let w = self.apply_inverse(&mx);
            self.push(w);
        }
        let mut nconv = 0;
        for iteration in 0..self.opts.max_iterations {
            let (theta, y) = self.ritz();
            let m = self.v.len();
            // leading converged pairs (previously converged ones are trusted)
            let mut targets = Vec::new();
            let mut i = nconv.min(m);
            while i < m && (i < k || targets.len() < b) && targets.len() < b {
                let u = Self::combine(&self.v, &y, i);
                let ku = Self::combine(&self.kv, &y, i);
                let mu = Self::combine(&self.mv, &y, i);
                let err = self.backward_error(theta[i], &u, &ku, &mu);
                if targets.is_empty() && err <= self.opts.tolerance && i < k {
                    nconv = i + 1;
                } else {
                    // expanding with the preconditioned residual instead of
                    // the inverse image of `Mu` avoids cancellation near convergence
                    let r: Vec<C64> = ku.iter().zip(&mu).map(|(a, b)| a - b * theta[i]).collect();
                    targets.push(r);
                }
                i += 1;
            }
            if nconv >= k {
                return self.finish(&theta, &y, sigma, iteration);
            }
            if m + b > mmax {
                self.restart(&theta, &y, keep);
            }
            let mut added = 0;
            for r in targets {
                let w = self.apply_inverse(&r);
                if self.push(w) {
                    added += 1;
                }
            }
            if added == 0 {
                let x = self.random_vector();
                let mx = self.pencil.m.mul_vec(&x);
                let w = self.apply_inverse(&mx);
                if !self.push(w) && self.v.len() >= n {
                    return Err(Error::NotConverged("subspace exhausted".into()));
                }
            }
        }
        Err(Error::NotConverged(format!(
            "{nconv} of {k} eigenpairs after {} iterations",
            self.opts.max_iterations
        )))
    }

    fn restart(&mut self, theta: &[f64], y: &DMatrix<C64>, keep: usize) {
        let keep = keep.min(self.v.len());
        let v: Vec<Vec<C64>> = (0..keep).map(|i| Self::combine(&self.v, y, i)).collect();
        let kv: Vec<Vec<C64>> = (0..keep).map(|i| Self::combine(&self.kv, y, i)).collect();
        let mv: Vec<Vec<C64>> = (0..keep).map(|i| Self::combine(&self.mv, y, i)).collect();
        self.v = v;
        self.kv = kv;
        self.mv = mv;
        self.h = (0..keep)
            .map(|i| {
                (0..keep)
                    .map(|j| C64::new(if i == j { theta[i] } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
    }

    fn finish(&self, theta: &[f64], y: &DMatrix<C64>, sigma: f64, iterations: usize) -> Result<Eigenpairs> {
        let k = self.k;
        let mut values = Vec::with_capacity(k);
        let mut vectors = Vec::with_capacity(k);
        let mut residuals = Vec::with_capacity(k);
        for (i, &t) in theta.iter().enumerate().take(k) {
            let u = Self::combine(&self.v, y, i);
            let ku = Self::combine(&self.kv, y, i);
            let mu = Self::combine(&self.mv, y, i);
            let r: Vec<C64> = ku.iter().zip(&mu).map(|(a, b)| a - b * t).collect();
            let mnorm = dot(&u, &mu).re.max(f64::MIN_POSITIVE).sqrt();
            residuals.push(norm2(&r) / mnorm);
            values.push(t);
            vectors.push(u);
        }
        Ok(Eigenpairs {
            values,
            vectors,
            residuals,
            shift: sigma,
            iterations,
        })
    }
}
