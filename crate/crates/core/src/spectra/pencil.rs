use super::dense::bunch_kaufman_inertia;
use super::ldl::{Inertia, LdlFactor, Symbolic};
use super::sparse::{CsrMatrix, C64};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Pencils of at most this dimension use dense kernels.
pub const DENSE_LIMIT: usize = 256;

/// Generalized Hermitian eigenproblem `K u = e M u`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HermitianPencil {
    /// Stiffness (energy form).
    pub k: CsrMatrix,
    /// Mass (Hermitian positive definite).
    pub m: CsrMatrix,
    /// Mesh node → matrix index (`None` for eliminated Dirichlet nodes).
    pub dof_map: Vec<Option<usize>>,
    /// Semiclassical parameter used in assembly.
    pub h: f64,
    #[serde(skip)]
    symbolic: OnceLock<Symbolic>,
}

impl HermitianPencil {
    pub fn new(k: CsrMatrix, m: CsrMatrix, dof_map: Vec<Option<usize>>, h: f64) -> Result<Self> {
        if k.nrows != k.ncols || m.nrows != m.ncols || k.nrows != m.nrows {
            return Err(Error::InvalidParameter(format!(
                "pencil shapes {}x{} and {}x{} differ",
                k.nrows, k.ncols, m.nrows, m.ncols
            )));
        }
        Ok(HermitianPencil {
            k,
            m,
            dof_map,
            h,
            symbolic: OnceLock::new(),
        })
    }

    /// Pencil without a mesh (identity dof map).
    pub fn from_matrices(k: CsrMatrix, m: CsrMatrix) -> Result<Self> {
        let n = k.nrows;
        Self::new(k, m, (0..n).map(Some).collect(), 1.0)
    }

    pub fn dim(&self) -> usize {
        self.k.nrows
    }

    /// `K - σ M`.
    pub fn shifted(&self, sigma: f64) -> CsrMatrix {
        self.k
            .combine(C64::new(1.0, 0.0), &self.m, C64::new(-sigma, 0.0))
    }

    /// Magnitude used for relative tie and residual tolerances.
    pub fn scale(&self) -> (f64, f64) {
        (self.k.norm_inf().max(f64::MIN_POSITIVE), self.m.norm_inf().max(f64::MIN_POSITIVE))
    }

    fn symbolic(&self) -> &Symbolic {
        self.symbolic.get_or_init(|| {
            let pattern = self
                .k
                .combine(C64::new(1.0, 0.0), &self.m, C64::new(1.0, 0.0));
            Symbolic::analyze(&pattern)
        })
    }

    /// Factor `K - σM`; on a breakdown, retry at `σ(1 ± 1e-10)` (up to three
    /// attempts in total). Returns the factor and the shift actually used.
    pub fn factor_shifted(&self, sigma: f64) -> Result<(LdlFactor, f64)> {
        let symbolic = self.symbolic();
        let delta = 1e-10 * sigma.abs().max(f64::MIN_POSITIVE.sqrt());
        let shifts = [sigma, sigma - delta, sigma + delta];
        for &s in &shifts {
            let a = self.shifted(s);
            if let Ok(f) = symbolic.factor(&a) {
                return Ok((f, s));
            }
        }
        Err(Error::FactorizationBreakdown {
            shift: sigma,
            attempts: shifts.len(),
        })
    }

    /// Inertia of `K - σM` with the same retry policy.
    pub fn inertia_at(&self, sigma: f64) -> Result<(Inertia, f64)> {
        if self.dim() <= DENSE_LIMIT {
            let a = self.shifted(sigma).to_dense();
            let inertia = bunch_kaufman_inertia(&a);
            if inertia.zero == 0 {
                return Ok((inertia, sigma));
            }
            let delta = 1e-10 * sigma.abs().max(f64::MIN_POSITIVE.sqrt());
            for s in [sigma - delta, sigma + delta] {
                let inertia = bunch_kaufman_inertia(&self.shifted(s).to_dense());
                if inertia.zero == 0 {
                    return Ok((inertia, s));
                }
            }
            return Err(Error::FactorizationBreakdown {
                shift: sigma,
                attempts: 3,
            });
        }
        let (f, s) = self.factor_shifted(sigma)?;
        Ok((f.inertia(), s))
    }
}
