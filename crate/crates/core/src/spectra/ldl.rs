//! Sparse `L D Lᴴ` factorization of Hermitian matrices (up-looking, after a
//! nested-dissection permutation). `D` is real and diagonal, so the inertia of
//! the factored matrix is read off its signs.

use super::ordering::{inverse, nested_dissection};
use super::sparse::{CsrMatrix, C64};

const NONE: usize = usize::MAX;

/// Pivots with `|d| <= PIVOT_TOLERANCE · max|A_kk|` count as a breakdown.
pub const PIVOT_TOLERANCE: f64 = 1e-13;

/// Ordering and elimination-tree data shared by every matrix with the same
/// sparsity pattern.
#[derive(Debug, Clone)]
pub struct Symbolic {
    pub n: usize,
    pub perm: Vec<usize>,
    pub iperm: Vec<usize>,
    parent: Vec<usize>,
    lp: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct LdlFactor {
    pub n: usize,
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<C64>,
    pub d: Vec<f64>,
}

/// Inertia triple of a Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Inertia {
    pub negative: usize,
    pub zero: usize,
    pub positive: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Breakdown {
    pub column: usize,
    pub pivot: f64,
}

impl Symbolic {
    pub fn analyze(a: &CsrMatrix) -> Symbolic {
        assert_eq!(a.nrows, a.ncols, "matrix must be square");
        let n = a.nrows;
        let perm = nested_dissection(&a.adjacency());
        let iperm = inverse(&perm);
        let mut parent = vec![NONE; n];
        let mut flag = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        for k in 0..n {
            flag[k] = k;
            for (j, _) in a.row(perm[k]) {
                let mut i = iperm[j];
                if i >= k {
                    continue;
                }
                while flag[i] != k {
                    if parent[i] == NONE {
                        parent[i] = k;
                    }
                    lnz[i] += 1;
                    flag[i] = k;
                    i = parent[i];
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for k in 0..n {
            lp[k + 1] = lp[k] + lnz[k];
        }
        Symbolic {
            n,
            perm,
            iperm,
            parent,
            lp,
        }
    }

    /// Number of off-diagonal entries of `L`.
    pub fn factor_nnz(&self) -> usize {
        self.lp[self.n]
    }

    /// Numeric factorization of a matrix with the analyzed pattern.
    pub fn factor(&self, a: &CsrMatrix) -> Result<LdlFactor, Breakdown> {
        let n = self.n;
        let perm = &self.perm;
        let iperm = &self.iperm;
        let total = self.lp[n];
        let mut li = vec![0usize; total];
        let mut lx = vec![C64::new(0.0, 0.0); total];
        let mut d = vec![0.0f64; n];
        let mut lnz = vec![0usize; n];
        let mut y = vec![C64::new(0.0, 0.0); n];
        let mut flag = vec![NONE; n];
        let mut pattern = vec![0usize; n];
        let scale = (0..n)
            .map(|i| a.get(i, i).re.abs())
            .fold(0.0f64, f64::max)
            .max(f64::MIN_POSITIVE);
        let tol = PIVOT_TOLERANCE * scale;
        for k in 0..n {
            let mut top = n;
            flag[k] = k;
            let mut diag = 0.0;
            for (j, v) in a.row(perm[k]) {
                let mut i = iperm[j];
                if i > k {
                    continue;
                }
                if i == k {
                    diag += v.re;
                    continue;
                }
                // upper entry C(i, k) = conj(C(k, i))
                y[i] += v.conj();
                let mut len = 0;
                while flag[i] != k {
                    pattern[len] = i;
                    len += 1;
                    flag[i] = k;
                    i = self.parent[i];
                }
                while len > 0 {
                    top -= 1;
                    len -= 1;
                    pattern[top] = pattern[len];
                }
            }
            let mut dk = diag;
            for &i in &pattern[top..n] {
                let yi = y[i];
                y[i] = C64::new(0.0, 0.0);
                let p2 = self.lp[i] + lnz[i];
                for p in self.lp[i]..p2 {
                    y[li[p]] -= lx[p] * yi;
                }
                dk -= yi.norm_sqr() / d[i];
                li[p2] = k;
                lx[p2] = yi.conj() / d[i];
                lnz[i] += 1;
            }
            if !(dk.abs() > tol) {
                return Err(Breakdown { column: k, pivot: dk });
            }
            d[k] = dk;
        }
        Ok(LdlFactor {
            n,
            perm: perm.clone(),
            lp: self.lp.clone(),
            li,
            lx,
            d,
        })
    }
}

impl LdlFactor {
    pub fn inertia(&self) -> Inertia {
        let mut out = Inertia::default();
        for &v in &self.d {
            if v < 0.0 {
                out.negative += 1;
            } else if v > 0.0 {
                out.positive += 1;
            } else {
                out.zero += 1;
            }
        }
        out
    }

    /// Solve `A x = b`.
    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut x: Vec<C64> = (0..n).map(|k| b[self.perm[k]]).collect();
        for j in 0..n {
            let xj = x[j];
            if xj != C64::new(0.0, 0.0) {
                for p in self.lp[j]..self.lp[j + 1] {
                    x[self.li[p]] -= self.lx[p] * xj;
                }
            }
        }
        for (xj, dj) in x.iter_mut().zip(&self.d) {
            *xj /= *dj;
        }
        for j in (0..n).rev() {
            let mut s = x[j];
            for p in self.lp[j]..self.lp[j + 1] {
                s -= self.lx[p].conj() * x[self.li[p]];
            }
            x[j] = s;
        }
        let mut out = vec![C64::new(0.0, 0.0); n];
        for k in 0..n {
            out[self.perm[k]] = x[k];
        }
        out
    }

    /// Largest `|L_ij|`, a growth indicator for the unpivoted factorization.
    pub fn max_multiplier(&self) -> f64 {
        self.lx.iter().fold(0.0, |m, v| m.max(v.norm()))
    }
}
