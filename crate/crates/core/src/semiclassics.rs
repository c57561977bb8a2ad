//! Leading-order predictions: boundary integrals over the sublevel sets of
//! `μ₁` for the eigenvalue count and energy, and the exact corner count
//! assembled from sector counts.

use crate::error::{Error, Result};
use crate::fem2d::{MagneticField, PolygonalDomain};
use crate::model1d::ModelSpectrum;
use crate::numerics::{adaptive_simpson, brent_root};
use crate::sector::{sector_count_with, SectorCount, SectorOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;

/// Tolerance for the sublevel endpoints.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Absolute tolerance of the inner ξ quadrature.
pub const INNER_TOLERANCE: f64 = 1e-12;
/// Integrand values below this end the ξ integral at `λ = B`.
pub const TAIL_CUTOFF: f64 = 1e-12;
/// Outer samples per perimeter, at least.
pub const SAMPLES_PER_PERIMETER: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSample {
    pub s: f64,
    pub x: [f64; 2],
    pub b: f64,
}

/// The field sampled along the boundary in arc length. Corners are
/// repeated as the last sample of one edge and the first of the next (same
/// `s`), so that each edge is integrated on its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryTrace {
    /// Samples of each edge, in order.
    pub edges: Vec<Vec<TraceSample>>,
    pub total_perimeter: f64,
}

impl BoundaryTrace {
    pub fn from_domain(domain: &PolygonalDomain, field: &MagneticField) -> Result<Self> {
        Self::with_spacing(domain, field, domain.perimeter() / SAMPLES_PER_PERIMETER as f64)
    }

    pub fn with_spacing(domain: &PolygonalDomain, field: &MagneticField, spacing: f64) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::InvalidParameter(format!("sample spacing {spacing} must be positive")));
        }
        let mut edges = Vec::with_capacity(domain.len());
        let mut s0 = 0.0;
        for i in 0..domain.len() {
            let (a, b) = domain.edge(i);
            let len = domain.edge_length(i);
            let pieces = (len / spacing).ceil().max(1.0) as usize;
            let samples: Vec<TraceSample> = (0..=pieces)
                .map(|k| {
                    let t = k as f64 / pieces as f64;
                    let x = [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])];
                    TraceSample {
                        s: s0 + t * len,
                        x,
                        b: field.b(x),
                    }
                })
                .collect();
            s0 += len;
            edges.push(samples);
        }
        let trace = BoundaryTrace {
            edges,
            total_perimeter: s0,
        };
        trace.check()?;
        Ok(trace)
    }

    /// A boundary of length `perimeter` carrying the constant field `beta`.
    pub fn constant(perimeter: f64, beta: f64) -> Result<Self> {
        let sample = |s| TraceSample { s, x: [s, 0.0], b: beta };
        let trace = BoundaryTrace {
            edges: vec![vec![sample(0.0), sample(perimeter)]],
            total_perimeter: perimeter,
        };
        trace.check()?;
        Ok(trace)
    }

    fn check(&self) -> Result<()> {
        if !(self.total_perimeter > 0.0) {
            return Err(Error::Geometry("boundary has no length".into()));
        }
        for edge in &self.edges {
            if edge.len() < 2 || edge.windows(2).any(|w| !(w[1].s > w[0].s)) {
                return Err(Error::Geometry("trace samples must have increasing arc length".into()));
            }
            if let Some(p) = edge.iter().find(|p| !(p.b > 0.0) || !p.b.is_finite()) {
                return Err(Error::FieldMismatch(format!("B = {} at s = {} is not positive", p.b, p.s)));
            }
        }
        Ok(())
    }

    /// Checks the samples against `field` within 1e-12.
    pub fn consistent_with(&self, field: &MagneticField) -> bool {
        self.samples().all(|p| (field.b(p.x) - p.b).abs() <= 1e-12 * p.b.abs().max(1.0))
    }

    pub fn samples(&self) -> impl Iterator<Item = &TraceSample> {
        self.edges.iter().flatten()
    }

    /// Smallest sampled field, the boundary infimum `b′`.
    pub fn b_min(&self) -> f64 {
        self.samples().map(|p| p.b).fold(f64::INFINITY, f64::min)
    }

    /// Trapezoid rule for `∫ g(B(x(s))) ds`, evaluating `g` once per distinct
    /// field value.
    pub fn integrate(&self, g: impl Fn(f64) -> Result<f64> + Sync) -> Result<f64> {
        let mut distinct: Vec<f64> = self.samples().map(|p| p.b).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let values: Vec<f64> = distinct.par_iter().map(|&b| g(b)).collect::<Result<_>>()?;
        let table: HashMap<u64, f64> = distinct.iter().map(|b| b.to_bits()).zip(values).collect();
        let mut total = 0.0;
        for edge in &self.edges {
            for w in edge.windows(2) {
                let (ga, gb) = (table[&w[0].b.to_bits()], table[&w[1].b.to_bits()]);
                total += 0.5 * (w[1].s - w[0].s) * (ga + gb);
            }
        }
        Ok(total)
    }
}

/// `{ξ : μ₁(ξ) ≤ ratio}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SublevelSet {
    pub ratio: f64,
    pub empty: bool,
    pub xi_minus: f64,
    /// `+∞` when `ratio ≥ 1`.
    pub xi_plus: f64,
    pub width: f64,
}

impl SublevelSet {
    fn empty(ratio: f64) -> Self {
        SublevelSet {
            ratio,
            empty: true,
            xi_minus: f64::NAN,
            xi_plus: f64::NAN,
            width: 0.0,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.empty || self.xi_plus.is_finite()
    }
}

/// Root of `μ₁ = ratio` in `[a, b]` on the interpolated curve, polished by
/// secant steps on exact solves.
fn branch_root(spectrum: &ModelSpectrum, ratio: f64, a: f64, b: f64) -> Result<f64> {
    let root = brent_root(|x| spectrum.mu1(x) - ratio, a, b, 1e-13)
        .ok_or_else(|| Error::Discretization(format!("μ₁ = {ratio} not bracketed in [{a}, {b}]")))?;
    let f = |x: f64| spectrum.mu_exact(1, x).map(|m| m - ratio);
    let (mut x0, mut x1) = (root, root + 1e-6);
    let (mut f0, mut f1) = (f(x0)?, f(x1)?);
    for _ in 0..8 {
        if f1 == f0 || (x1 - x0).abs() < 0.1 * ROOT_TOLERANCE {
            break;
        }
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        if !x2.is_finite() || (x2 - root).abs() > spectrum.xi_step {
            break;
        }
        (x0, f0) = (x1, f1);
        x1 = x2;
        f1 = f(x1)?;
    }
    Ok(if f1.abs() <= f0.abs() { x1 } else { x0 })
}

pub fn xi_sublevel(ratio: f64, spectrum: &ModelSpectrum) -> Result<SublevelSet> {
    if !ratio.is_finite() {
        return Err(Error::InvalidParameter(format!("ratio {ratio} is not finite")));
    }
    if ratio < spectrum.theta0 {
        return Ok(SublevelSet::empty(ratio));
    }
    let xi0 = spectrum.xi0;
    if ratio == spectrum.theta0 {
        return Ok(SublevelSet {
            ratio,
            empty: false,
            xi_minus: xi0,
            xi_plus: xi0,
            width: 0.0,
        });
    }
    let left_sup = spectrum.mu[0][0];
    if ratio >= left_sup {
        return Err(Error::SpectrumTooNarrow(format!(
            "ratio {ratio} exceeds μ₁ = {left_sup} at ξ = {}; widen the table",
            spectrum.xi_min()
        )));
    }
    let xi_minus = branch_root(spectrum, ratio, spectrum.xi_min(), xi0)?;
    let xi_plus = if ratio >= 1.0 {
        f64::INFINITY
    } else {
        // μ₁ climbs back to 1 only at ξ = ∞; the table may end first
        let right_end = spectrum.xi_max();
        if spectrum.mu1(right_end) > ratio {
            branch_root(spectrum, ratio, xi0, right_end)?
        } else {
            return Err(Error::SpectrumTooNarrow(format!(
                "ratio {ratio} too close to 1 for a table ending at ξ = {right_end}"
            )));
        }
    };
    Ok(SublevelSet {
        ratio,
        empty: false,
        xi_minus,
        xi_plus,
        width: xi_plus - xi_minus,
    })
}

/// `∫ [ratio − μ₁(ξ)]₊ dξ`.
pub fn sublevel_integral(ratio: f64, spectrum: &ModelSpectrum) -> Result<f64> {
    let set = xi_sublevel(ratio, spectrum)?;
    if set.empty || set.width == 0.0 {
        return Ok(0.0);
    }
    let f = |x: f64| (ratio - spectrum.mu1(x)).max(0.0);
    let upper = if set.xi_plus.is_finite() {
        set.xi_plus
    } else {
        // first grid sample past ξ₀ where the integrand has died out
        let start = spectrum.xi_grid.partition_point(|&x| x <= spectrum.xi0);
        let cut = (start..spectrum.xi_grid.len())
            .find(|&i| ratio - spectrum.mu[0][i] < TAIL_CUTOFF)
            .ok_or_else(|| {
                Error::SpectrumTooNarrow(format!(
                    "tail of [{ratio} − μ₁]₊ not below {TAIL_CUTOFF} by ξ = {}",
                    spectrum.xi_max()
                ))
            })?;
        spectrum.xi_grid[cut]
    };
    // split at ξ₀ and at the grid nodes so that every panel sees one cubic
    let mut breaks = vec![set.xi_minus, spectrum.xi0];
    let mut x = (set.xi_minus / spectrum.xi_step).ceil() * spectrum.xi_step;
    let coarse = 25.0 * spectrum.xi_step;
    while x < upper {
        if x > set.xi_minus {
            breaks.push(x);
        }
        x += coarse;
    }
    breaks.push(upper);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let panels = breaks.len() - 1;
    Ok(breaks
        .windows(2)
        .map(|w| adaptive_simpson(&f, w[0], w[1], INNER_TOLERANCE / panels as f64))
        .sum())
}

fn check_field_bound(trace: &BoundaryTrace, lambda: f64, strict: bool) -> Result<()> {
    let b = trace.b_min();
    if lambda > b || (strict && lambda >= b) {
        return Err(Error::Hypothesis(format!(
            "lambda = {lambda} must be {} inf B = {b}",
            if strict { "<" } else { "<=" }
        )));
    }
    Ok(())
}

/// `−(h^{1/2}/2π) ∫_{∂Ω} ∫ B^{3/2} [λ/B − μ₁(ξ)]₊ dξ ds`, for `λ ≤ inf B`.
pub fn energy_asymptotic(trace: &BoundaryTrace, lambda: f64, h: f64, spectrum: &ModelSpectrum) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("h = {h} must be positive")));
    }
    check_field_bound(trace, lambda, false)?;
    let integral = trace.integrate(|b| Ok(b.powf(1.5) * sublevel_integral((lambda / b).min(1.0), spectrum)?))?;
    Ok(-h.sqrt() / (2.0 * PI) * integral + 0.0)
}

/// `(1/2π h^{1/2}) ∫_{∂Ω} B^{1/2} |{μ₁ ≤ λ/B}| ds`, for `λ < inf B`.
pub fn count_asymptotic(trace: &BoundaryTrace, lambda: f64, h: f64, spectrum: &ModelSpectrum) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("h = {h} must be positive")));
    }
    check_field_bound(trace, lambda, true)?;
    let integral = trace.integrate(|b| Ok(b.sqrt() * xi_sublevel(lambda / b, spectrum)?.width))?;
    Ok(integral / (2.0 * PI * h.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerTerm {
    pub vertex: usize,
    pub alpha: f64,
    pub field: f64,
    pub n: usize,
    pub converged: bool,
    pub evidence_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerPrediction {
    pub total: usize,
    pub terms: Vec<CornerTerm>,
    /// False when some sector count did not converge.
    pub confident: bool,
}

/// `Σ_k n(α_k, λ/B(s_k))` over the corners, for `λ < min(Θ₀ b′, b)`.
pub fn corner_count_prediction(
    domain: &PolygonalDomain,
    field: &MagneticField,
    lambda: f64,
) -> Result<CornerPrediction> {
    corner_count_prediction_with(domain, field, lambda, &SectorOptions::default())
}

pub fn corner_count_prediction_with(
    domain: &PolygonalDomain,
    field: &MagneticField,
    lambda: f64,
    opts: &SectorOptions,
) -> Result<CornerPrediction> {
    let theta0 = ModelSpectrum::standard().theta0;
    let b = field.inf_over(domain);
    let b_edge = field.inf_over_boundary(domain);
    if !(lambda < theta0 * b_edge) {
        return Err(Error::Hypothesis(format!(
            "lambda = {lambda} must be below Θ₀·b′ = {}",
            theta0 * b_edge
        )));
    }
    if !(lambda < b) {
        return Err(Error::Hypothesis(format!("lambda = {lambda} must be below b = {b}")));
    }
    let corners: Vec<(usize, f64, f64)> = domain
        .corner_angles
        .iter()
        .enumerate()
        .map(|(k, &a)| (k, a, field.b(domain.vertices[k])))
        .collect();
    // identical (angle, λ/B) corners share one sector computation
    let key = |a: f64, r: f64| ((a * 1e12).round() as i64, ((lambda / r) * 1e12).round() as i64);
    let mut groups: Vec<(i64, i64)> = corners.iter().map(|&(_, a, r)| key(a, r)).collect();
    groups.sort_unstable();
    groups.dedup();
    let representatives: Vec<(f64, f64)> = groups
        .iter()
        .map(|g| {
            let &(_, a, r) = corners.iter().find(|&&(_, a, r)| key(a, r) == *g).unwrap();
            (a, lambda / r)
        })
        .collect();
    let counts: Vec<Option<SectorCount>> = representatives
        .par_iter()
        .map(|&(a, ratio)| {
            if ratio <= 0.0 {
                Ok(None)
            } else {
                sector_count_with(a, ratio, 1.0, opts).map(Some)
            }
        })
        .collect::<Result<_>>()?;
    let lookup: HashMap<(i64, i64), &Option<SectorCount>> = groups.iter().copied().zip(&counts).collect();
    let terms: Vec<CornerTerm> = corners
        .iter()
        .map(|&(k, a, r)| {
            let c = lookup[&key(a, r)];
            CornerTerm {
                vertex: k,
                alpha: a,
                field: r,
                n: c.as_ref().map_or(0, |c| c.n),
                converged: c.as_ref().is_none_or(|c| c.convergence_flag),
                evidence_only: a > 0.5 * PI + 1e-12,
            }
        })
        .collect();
    Ok(CornerPrediction {
        total: terms.iter().map(|t| t.n).sum(),
        confident: terms.iter().all(|t| t.converged),
        terms,
    })
}
