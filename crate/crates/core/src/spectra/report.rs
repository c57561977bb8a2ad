use super::eigen::{lowest_k_with, EigenOptions};
use super::pencil::{HermitianPencil, DENSE_LIMIT};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Relative tolerance for eigenvalues counted as ties with the threshold.
pub const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QueryMode {
    Extract,
    Count,
    Both,
}

impl std::str::FromStr for QueryMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "extract" => Ok(QueryMode::Extract),
            "count" => Ok(QueryMode::Count),
            "both" => Ok(QueryMode::Both),
            other => Err(format!("unknown mode '{other}'")),
        }
    }
}

/// Result of an inertia count, with the bracket used when the threshold had
/// to be perturbed off a (numerically) singular shift.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CountResult {
    pub count: usize,
    pub shift_used: f64,
    pub tie_bracket: Option<(f64, f64)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralReport {
    pub threshold: f64,
    /// Extracted eigenvalues `<= threshold`, ascending.
    pub eigenvalues: Vec<f64>,
    pub count: usize,
    /// `Σ (e_j - threshold)` over the listed eigenvalues (`<= 0`).
    pub energy: f64,
    pub inertia_count: usize,
    pub residuals: Vec<f64>,
    pub ties: Vec<f64>,
    /// `count == inertia_count`, or explained by ties.
    pub paths_agree: bool,
}

/// Number of eigenvalues strictly below `threshold`, from the inertia of
/// `K - threshold·M`.
pub fn count_below(pencil: &HermitianPencil, threshold: f64) -> Result<usize> {
    Ok(count_below_detailed(pencil, threshold)?.count)
}

pub fn count_below_detailed(pencil: &HermitianPencil, threshold: f64) -> Result<CountResult> {
    if !threshold.is_finite() {
        return Err(Error::InvalidParameter("threshold must be finite".into()));
    }
    let (inertia, shift) = pencil.inertia_at(threshold)?;
    let tie_bracket = (shift != threshold).then(|| {
        let d = (shift - threshold).abs();
        (threshold - d, threshold + d)
    });
    Ok(CountResult {
        count: inertia.negative,
        shift_used: shift,
        tie_bracket,
    })
}

/// `Σ (e_j - threshold)` over `e_j <= threshold`.
pub fn energy_functional(pencil: &HermitianPencil, threshold: f64, k_max: usize) -> Result<f64> {
    Ok(spectral_report(pencil, threshold, k_max, QueryMode::Both)?.energy)
}

pub fn spectral_report(
    pencil: &HermitianPencil,
    threshold: f64,
    k_max: usize,
    mode: QueryMode,
) -> Result<SpectralReport> {
    spectral_report_with(pencil, threshold, k_max, mode, &EigenOptions::default())
}

pub fn spectral_report_with(
    pencil: &HermitianPencil,
    threshold: f64,
    k_max: usize,
    mode: QueryMode,
    opts: &EigenOptions,
) -> Result<SpectralReport> {
    let counted = count_below_detailed(pencil, threshold)?;
    let inertia_count = counted.count;
    if mode == QueryMode::Count {
        return Ok(SpectralReport {
            threshold,
            eigenvalues: vec![],
            count: inertia_count,
            energy: f64::NAN,
            inertia_count,
            residuals: vec![],
            ties: vec![],
            paths_agree: true,
        });
    }
    let n = pencil.dim();
    let scale = threshold.abs().max(f64::MIN_POSITIVE);
    let tie_eps = TIE_TOLERANCE * scale;
    // extract past the threshold so that ties and near-misses are visible
    let mut want = (inertia_count + 2).min(n);
    if n > DENSE_LIMIT {
        want = want.min(n / 10);
    }
    if inertia_count > k_max || inertia_count > want {
        return Err(Error::CapacityExceeded(format!(
            "{inertia_count} eigenvalues below {threshold} exceed capacity {}",
            k_max.min(want)
        )));
    }
    let mut opts = *opts;
    if opts.shift.is_none() && threshold > 0.0 && n > DENSE_LIMIT {
        opts.shift = Some(0.5 * threshold);
    }
    let pairs = lowest_k_with(pencil, want, &opts)?;
    let mut eigenvalues = Vec::new();
    let mut residuals = Vec::new();
    let mut ties = Vec::new();
    for (e, r) in pairs.values.iter().zip(&pairs.residuals) {
        if (e - threshold).abs() <= tie_eps {
            ties.push(*e);
        }
        if *e <= threshold + tie_eps {
            eigenvalues.push(*e);
            residuals.push(*r);
        }
    }
    let count = eigenvalues.len();
    let energy = eigenvalues.iter().map(|e| (e - threshold).min(0.0)).sum();
    let paths_agree = count == inertia_count || !ties.is_empty() || counted.tie_bracket.is_some();
    Ok(SpectralReport {
        threshold,
        eigenvalues,
        count,
        energy,
        inertia_count,
        residuals,
        ties,
        paths_agree,
    })
}
