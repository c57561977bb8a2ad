use super::{mu, FdOrder, ModelOperatorParams, DEFAULT_SPACING};
use crate::error::{Error, Result};
use crate::numerics::{brent_minimize, cubic_uniform};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

/// Tabulated eigenvalue curves `μ_j(ξ)` on a uniform ξ grid.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelSpectrum {
    pub xi_grid: Vec<f64>,
    pub xi_step: f64,
    /// `mu[j][i] = μ_{j+1}(xi_grid[i])`.
    pub mu: Vec<Vec<f64>>,
    pub theta0: f64,
    pub xi0: f64,
    /// Largest Richardson error estimate over `j` at each sample.
    pub resolution_report: Vec<f64>,
    pub spacing: f64,
    pub order: FdOrder,
}

impl ModelSpectrum {
    pub fn build(
        xi_min: f64,
        xi_max: f64,
        xi_step: f64,
        jmax: usize,
        spacing: f64,
        order: FdOrder,
    ) -> Result<Self> {
        if !(xi_max > xi_min) || xi_step <= 0.0 || jmax == 0 {
            return Err(Error::InvalidParameter(format!(
                "bad ξ grid [{xi_min}, {xi_max}] step {xi_step}, jmax {jmax}"
            )));
        }
        let n = ((xi_max - xi_min) / xi_step).round() as usize + 1;
        let xi_grid: Vec<f64> = (0..n).map(|i| xi_min + i as f64 * xi_step).collect();
        let rows: Vec<Vec<(f64, f64)>> = xi_grid
            .par_iter()
            .map(|&xi| {
                let p = ModelOperatorParams::with_spacing(xi, spacing, order);
                (1..=jmax)
                    .map(|j| mu(j, &p).map(|m| (m.value, m.error_estimate)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<_>>()?;
        let mut table = vec![vec![0.0; n]; jmax];
        let mut resolution_report = vec![0.0f64; n];
        for (i, row) in rows.iter().enumerate() {
            for (j, (v, e)) in row.iter().enumerate() {
                table[j][i] = *v;
                resolution_report[i] = resolution_report[i].max(*e);
            }
        }
        // locate the minimum of μ₁ on the table, then polish with exact solves
        let imin = (0..n)
            .min_by(|&a, &b| table[0][a].total_cmp(&table[0][b]))
            .unwrap();
        let lo = xi_grid[imin.saturating_sub(2)];
        let hi = xi_grid[(imin + 2).min(n - 1)];
        let m = brent_minimize(
            |xi| {
                mu(1, &ModelOperatorParams::with_spacing(xi, spacing, order))
                    .map(|m| m.value)
                    .unwrap_or(f64::INFINITY)
            },
            lo,
            hi,
            1e-9,
        );
        let spectrum = ModelSpectrum {
            xi_grid,
            xi_step,
            mu: table,
            theta0: m.f,
            xi0: m.x,
            resolution_report,
            spacing,
            order,
        };
        spectrum.check_invariants()?;
        Ok(spectrum)
    }

    /// The shared table used by the semiclassical evaluators: ξ ∈ [-4, 12],
    /// step 0.02, two curves.
    pub fn standard() -> &'static ModelSpectrum {
        static TABLE: OnceLock<ModelSpectrum> = OnceLock::new();
        TABLE.get_or_init(|| {
            ModelSpectrum::build(-4.0, 12.0, 0.02, 2, DEFAULT_SPACING, FdOrder::Second)
                .expect("standard model spectrum")
        })
    }

    pub fn jmax(&self) -> usize {
        self.mu.len()
    }

    pub fn xi_min(&self) -> f64 {
        self.xi_grid[0]
    }

    pub fn xi_max(&self) -> f64 {
        *self.xi_grid.last().unwrap()
    }

    /// Interpolated `μ₁(ξ)`; outside the table it falls back to an exact solve.
    pub fn mu1(&self, xi: f64) -> f64 {
        self.mu_j(1, xi)
    }

    pub fn mu_j(&self, j: usize, xi: f64) -> f64 {
        if xi < self.xi_min() || xi > self.xi_max() {
            return self.mu_exact(j, xi).unwrap_or(f64::NAN);
        }
        cubic_uniform(&self.mu[j - 1], self.xi_min(), self.xi_step, xi)
    }

    /// Re-solve `μ_j(ξ)` with the table's discretization.
    pub fn mu_exact(&self, j: usize, xi: f64) -> Result<f64> {
        mu(j, &ModelOperatorParams::with_spacing(xi, self.spacing, self.order)).map(|m| m.value)
    }

    pub fn check_invariants(&self) -> Result<()> {
        let n = self.xi_grid.len();
        for i in 0..n {
            for j in 1..self.jmax() {
                if self.mu[j][i] <= self.mu[j - 1][i] {
                    return Err(Error::Discretization(format!(
                        "μ_{} <= μ_{} at ξ = {}",
                        j + 1,
                        j,
                        self.xi_grid[i]
                    )));
                }
            }
        }
        if !(0.5 < self.theta0 && self.theta0 < 1.0) {
            return Err(Error::Discretization(format!(
                "Θ₀ = {} outside (1/2, 1)",
                self.theta0
            )));
        }
        // μ₁ decreasing left of ξ₀ and increasing right of it, near ξ₀
        let near: Vec<usize> = (0..n)
            .filter(|&i| (self.xi_grid[i] - self.xi0).abs() < 1.0)
            .collect();
        for w in near.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (xa, xb) = (self.xi_grid[a], self.xi_grid[b]);
            let (ya, yb) = (self.mu[0][a], self.mu[0][b]);
            if xb <= self.xi0 && yb > ya {
                return Err(Error::Discretization(format!(
                    "μ₁ not decreasing on [{xa}, {xb}] left of ξ₀"
                )));
            }
            if xa >= self.xi0 && yb < ya {
                return Err(Error::Discretization(format!(
                    "μ₁ not increasing on [{xa}, {xb}] right of ξ₀"
                )));
            }
        }
        Ok(())
    }
}
