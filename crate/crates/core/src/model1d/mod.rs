//! The half-line harmonic oscillator family `L[ξ] = -∂_t² + (t - ξ)²` with a
//! Neumann condition at `t = 0`: eigenvalue curves `μ_j(ξ)`, eigenfunctions,
//! the de Gennes constant `Θ₀ = min μ₁` with its minimizer `ξ₀`, and the
//! separable cylinder spectrum.

pub mod cylinder;
pub mod fd;
pub mod spectrum;

pub use cylinder::{cylinder_spectrum, CylinderParams, CylinderSpectrum};
pub use fd::{BandedOperator, FdOrder};
pub use spectrum::ModelSpectrum;

use crate::error::{Error, Result};
use crate::numerics::brent_minimize;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Grid spacing used when no grid is specified.
pub const DEFAULT_SPACING: f64 = 0.005;
/// Cutoff margin `T_cut = max(ξ, 0) + DEFAULT_MARGIN`.
pub const DEFAULT_MARGIN: f64 = 10.0;
/// Smallest admissible margin between the well centre and the cutoff.
pub const MIN_MARGIN: f64 = 8.0;
pub const MAX_SPACING: f64 = 0.05;

/// Discretization of one operator `L[ξ]` on a truncated interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelOperatorParams {
    pub xi: f64,
    /// Dirichlet cutoff replacing `t = ∞`.
    pub truncation_length: f64,
    pub grid_points: usize,
    pub order: FdOrder,
}

impl ModelOperatorParams {
    /// Default cutoff `max(ξ,0) + 10` and spacing [`DEFAULT_SPACING`].
    pub fn new(xi: f64) -> Self {
        Self::with_spacing(xi, DEFAULT_SPACING, FdOrder::Second)
    }

    pub fn with_spacing(xi: f64, spacing: f64, order: FdOrder) -> Self {
        // keep the spacing exact so that μ(ξ) is smooth in ξ
        let intervals = ((xi.max(0.0) + DEFAULT_MARGIN) / spacing).ceil() as usize;
        let truncation_length = intervals as f64 * spacing;
        let grid_points = intervals + 1;
        ModelOperatorParams {
            xi,
            truncation_length,
            grid_points,
            order,
        }
    }

    pub fn spacing(&self) -> f64 {
        self.truncation_length / (self.grid_points - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if !self.xi.is_finite() || !self.truncation_length.is_finite() {
            return Err(Error::InvalidParameter("non-finite ξ or truncation".into()));
        }
        if self.grid_points < 16 {
            return Err(Error::InvalidParameter(format!(
                "grid_points = {} < 16",
                self.grid_points
            )));
        }
        let required = self.xi + MIN_MARGIN;
        if self.xi > 0.0 && self.truncation_length < required {
            return Err(Error::TruncationTooSmall {
                truncation: self.truncation_length,
                required,
            });
        }
        if self.spacing() > MAX_SPACING {
            return Err(Error::InvalidParameter(format!(
                "grid spacing {:.4} exceeds {MAX_SPACING}",
                self.spacing()
            )));
        }
        Ok(())
    }

    fn operator(&self) -> BandedOperator {
        BandedOperator::new(self.xi, self.truncation_length, self.grid_points, self.order)
    }

    fn refined(&self) -> ModelOperatorParams {
        ModelOperatorParams {
            grid_points: 2 * self.grid_points - 1,
            ..*self
        }
    }
}

/// An eigenvalue of the discretized operator with its Richardson estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    /// Richardson-extrapolated value from the grid and its 2x refinement.
    pub value: f64,
    /// Eigenvalue of the discrete problem on the requested grid.
    pub discrete: f64,
    /// `|value - discrete|`, the estimated discretization error of `discrete`.
    pub error_estimate: f64,
}

/// `j`-th eigenvalue (1-based) of `L[ξ]` with Neumann condition at 0.
pub fn mu(j: usize, params: &ModelOperatorParams) -> Result<MuEstimate> {
    params.validate()?;
    let max = params.grid_points / 4;
    if j == 0 || j > max {
        return Err(Error::IndexTooLarge {
            index: j,
            grid_points: params.grid_points,
            max,
        });
    }
    let coarse = params.operator().eigenvalue(j);
    let fine = params.refined().operator().eigenvalue(j);
    let p = params.order.convergence_order();
    let factor = (1i64 << p) as f64 - 1.0;
    let value = fine + (fine - coarse) / factor;
    Ok(MuEstimate {
        value,
        discrete: coarse,
        error_estimate: (value - coarse).abs(),
    })
}

/// `μ_j(ξ)` with the default discretization.
pub fn mu_default(j: usize, xi: f64) -> Result<f64> {
    mu(j, &ModelOperatorParams::new(xi)).map(|m| m.value)
}

/// De Gennes constant and its minimizer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theta0 {
    pub theta0: f64,
    pub xi0: f64,
    /// Centered-difference derivative of μ₁ at `xi0`.
    pub derivative_at_min: f64,
    pub evaluations: usize,
}

/// Minimize `ξ ↦ μ₁(ξ)` over `window` with Brent's method.
pub fn theta0(window: (f64, f64), tol: f64) -> Result<Theta0> {
    theta0_with(window, tol, DEFAULT_SPACING, FdOrder::Second)
}

pub fn theta0_with(window: (f64, f64), tol: f64, spacing: f64, order: FdOrder) -> Result<Theta0> {
    let (lo, hi) = window;
    if !(lo <= 0.0 && hi >= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "search window [{lo}, {hi}] must contain (0, 2)"
        )));
    }
    if tol < 1e-10 {
        return Err(Error::InvalidParameter(format!("tol {tol} below 1e-10")));
    }
    let eval = |xi: f64| -> Result<f64> {
        mu(1, &ModelOperatorParams::with_spacing(xi, spacing, order)).map(|m| m.value)
    };
    let mut failure = None;
    let m = brent_minimize(
        |xi| match eval(xi) {
            Ok(v) => v,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        },
        lo,
        hi,
        tol,
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let edge = 1e-3 * (hi - lo);
    if m.x - lo < edge || hi - m.x < edge {
        return Err(Error::WindowBoundary {
            location: m.x,
            lo,
            hi,
        });
    }
    let d = 1e-3;
    let derivative = (eval(m.x + d)? - eval(m.x - d)?) / (2.0 * d);
    if derivative.abs() > tol.sqrt() {
        return Err(Error::Discretization(format!(
            "μ₁'(ξ₀) = {derivative:.3e} exceeds {:.3e}",
            tol.sqrt()
        )));
    }
    if !(0.5 < m.f && m.f < 1.0) {
        return Err(Error::Discretization(format!(
            "Θ₀ = {} outside (1/2, 1)",
            m.f
        )));
    }
    Ok(Theta0 {
        theta0: m.f,
        xi0: m.x,
        derivative_at_min: derivative,
        evaluations: m.evaluations + 2,
    })
}

/// Minimum of `μ₂` over the samples; must exceed 1.
pub fn mu2_floor(xi_grid: &[f64]) -> Result<f64> {
    mu2_floor_with(xi_grid, DEFAULT_SPACING, FdOrder::Second)
}

pub fn mu2_floor_with(xi_grid: &[f64], spacing: f64, order: FdOrder) -> Result<f64> {
    if xi_grid.is_empty() {
        return Err(Error::InvalidParameter("empty ξ grid".into()));
    }
    let values: Vec<f64> = xi_grid
        .par_iter()
        .map(|&xi| mu(2, &ModelOperatorParams::with_spacing(xi, spacing, order)).map(|m| m.value))
        .collect::<Result<_>>()?;
    let mut floor = f64::INFINITY;
    for (xi, v) in xi_grid.iter().zip(&values) {
        if *v <= 1.0 {
            return Err(Error::Discretization(format!(
                "μ₂({xi}) = {v} <= 1: discretization failure"
            )));
        }
        floor = floor.min(*v);
    }
    Ok(floor)
}

/// A sampled eigenfunction `u_p(t; ξ)` on the truncated interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampledFunction {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    /// Discrete eigenvalue on the sampling grid.
    pub eigenvalue: f64,
    /// `‖S u - μ W u‖` in the weighted discrete norm.
    pub residual: f64,
}

impl SampledFunction {
    /// Trapezoid approximation of `∫ u² dt`.
    pub fn l2_norm_squared(&self) -> f64 {
        let h = self.t[1] - self.t[0];
        let n = self.values.len();
        let mut s = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            s += w * v * v;
        }
        s * h
    }
}

/// The `p`-th eigenfunction (1-based), normalized in L² with `u_p(0) > 0`.
pub fn eigenfunction(p: usize, params: &ModelOperatorParams) -> Result<SampledFunction> {
    params.validate()?;
    let max = params.grid_points / 4;
    if p == 0 || p > max {
        return Err(Error::IndexTooLarge {
            index: p,
            grid_points: params.grid_points,
            max,
        });
    }
    let op = params.operator();
    let mu = op.eigenvalue(p);
    let mut u = op.eigenvector(mu);
    let h = op.spacing;
    let norm = (op.weighted_norm(&u).powi(2) * h).sqrt();
    let sign = if u[0] < 0.0 { -1.0 } else { 1.0 };
    for v in u.iter_mut() {
        *v *= sign / norm;
    }
    let su = op.apply(&u);
    let residual = su
        .iter()
        .zip(&u)
        .zip(&op.weights)
        .map(|((s, u), w)| (s - mu * w * u).powi(2) / w)
        .sum::<f64>()
        .sqrt()
        * h.sqrt();
    let mut t: Vec<f64> = (0..params.grid_points).map(|i| i as f64 * h).collect();
    t[params.grid_points - 1] = params.truncation_length;
    u.push(0.0);
    Ok(SampledFunction {
        t,
        values: u,
        eigenvalue: mu,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_point_values() {
        let m1 = mu(1, &ModelOperatorParams::new(0.0)).unwrap();
        assert!((m1.value - 1.0).abs() < 1e-8, "{m1:?}");
        let m2 = mu(2, &ModelOperatorParams::new(0.0)).unwrap();
        assert!((m2.value - 5.0).abs() < 1e-6, "{m2:?}");
        let m3 = mu(3, &ModelOperatorParams::new(0.0)).unwrap();
        assert!((m3.value - 9.0).abs() < 1e-6, "{m3:?}");
    }

    #[test]
    fn form_lower_bound_for_negative_xi() {
        for xi in [-0.5, -1.0, -2.0] {
            assert!(mu_default(1, xi).unwrap() >= xi * xi);
        }
        assert!(mu_default(1, -2.0).unwrap() >= 4.0);
    }

    #[test]
    fn large_xi_approaches_one() {
        let v = mu_default(1, 6.0).unwrap();
        assert!((v - 1.0).abs() < 1e-6, "{v}");
        assert!(v <= 1.0 + 1e-9);
    }

    #[test]
    fn rejects_short_truncation_and_large_index() {
        let p = ModelOperatorParams {
            xi: 3.0,
            truncation_length: 9.0,
            grid_points: 1000,
            order: FdOrder::Second,
        };
        assert!(matches!(mu(1, &p), Err(Error::TruncationTooSmall { .. })));
        let p = ModelOperatorParams {
            xi: 0.0,
            truncation_length: 10.0,
            grid_points: 201,
            order: FdOrder::Second,
        };
        assert!(matches!(mu(60, &p), Err(Error::IndexTooLarge { .. })));
        let coarse = ModelOperatorParams {
            grid_points: 101,
            ..p
        };
        assert!(matches!(mu(1, &coarse), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn fourth_order_agrees_with_second() {
        let a = mu(1, &ModelOperatorParams::with_spacing(0.7, 0.005, FdOrder::Second)).unwrap();
        let b = mu(1, &ModelOperatorParams::with_spacing(0.7, 0.01, FdOrder::Fourth)).unwrap();
        assert!((a.value - b.value).abs() < 1e-8, "{a:?} {b:?}");
    }

    #[test]
    fn eigenfunction_ground_state_is_gaussian() {
        let f = eigenfunction(1, &ModelOperatorParams::new(0.0)).unwrap();
        assert!((f.l2_norm_squared() - 1.0).abs() < 1e-10);
        assert!(f.values[0] > 0.0);
        let c = (2.0 / std::f64::consts::PI.sqrt()).sqrt();
        let worst = f
            .t
            .iter()
            .zip(&f.values)
            .map(|(t, u)| (u - c * (-t * t / 2.0).exp()).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "{worst}");
        assert!(f.residual < 1e-6);
        // discrete Neumann: centered difference with even ghost vanishes by symmetry
        // so the one-sided slope is O(h)
        assert!((f.values[1] - f.values[0]).abs() / (f.t[1] - f.t[0]) < 1e-2);
    }

    #[test]
    fn theta0_in_range_and_virial() {
        let t = theta0((0.0, 2.0), 1e-9).unwrap();
        assert!(t.theta0 > 0.5 && t.theta0 < 1.0);
        assert!((t.theta0 - t.xi0 * t.xi0).abs() < 1e-5, "{t:?}");
    }

    #[test]
    fn theta0_window_errors() {
        assert!(theta0((0.5, 2.0), 1e-8).is_err());
        assert!(theta0((0.0, 2.0), 1e-12).is_err());
    }

    #[test]
    fn mu2_floor_single_point() {
        let v = mu2_floor(&[0.0]).unwrap();
        assert!((v - 5.0).abs() < 1e-6);
    }
}
