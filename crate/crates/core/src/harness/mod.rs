//! End-to-end experiments: `h`-sweeps of the finite element count and
//! energy against the boundary asymptotics and the corner count, with
//! machine-readable reports.

pub mod config;
pub mod format;

pub use config::{DomainConfig, ExperimentConfig, MeshRule, SweepConfig, Tolerances};
pub use format::{fmt_f64, to_json_string, write_json};

use crate::error::{Error, Result};
use crate::fem2d::{assemble, mesh_with_field, MagneticField, PolygonalDomain};
use crate::model1d::ModelSpectrum;
use crate::semiclassics::{
    corner_count_prediction_with, count_asymptotic, energy_asymptotic, xi_sublevel, BoundaryTrace,
    CornerPrediction,
};
use crate::sector::SectorOptions;
use crate::spectra::{spectral_report_with, EigenOptions};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;
use std::time::Instant;

/// Environment variable capping the worker pool.
pub const THREADS_VAR: &str = "CORNER_SPECTRA_THREADS";

/// One `h` of a sweep. Counts and energies refer to the threshold `λh`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub h: f64,
    pub lambda: f64,
    pub threshold: f64,
    pub dofs: usize,
    pub triangles: usize,
    pub min_angle_deg: f64,
    /// Inertia count.
    pub n_fem: Option<usize>,
    /// Number of extracted eigenvalues `≤ λh`.
    pub n_extracted: Option<usize>,
    pub paths_agree: Option<bool>,
    pub ties: usize,
    pub e_fem: Option<f64>,
    pub n_pred: Option<f64>,
    pub e_pred: Option<f64>,
    pub n_corner_pred: Option<usize>,
    pub count_ratio: Option<f64>,
    pub energy_ratio: Option<f64>,
    pub corner_match: Option<bool>,
    pub eigenvalues: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RowTiming {
    pub h: f64,
    pub mesh_seconds: f64,
    pub assemble_seconds: f64,
    pub solve_seconds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    InsufficientData,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub status: VerdictStatus,
    pub detail: String,
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: ExperimentConfig,
    /// Ordered by decreasing `h`.
    pub rows: Vec<SweepRow>,
    pub corner_prediction: Option<CornerPrediction>,
    pub verdicts: Vec<Verdict>,
    #[serde(skip)]
    pub timings: Vec<RowTiming>,
}

/// Leading-order predictions at one `(λ, h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub energy_leading: Option<f64>,
    pub count_leading: Option<f64>,
    pub corner_count: Option<usize>,
    /// Widths of `{μ₁ ≤ λ/B}` for the distinct boundary field values.
    pub sublevel_widths: Vec<f64>,
    pub diagnostics: PredictionDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionDiagnostics {
    pub field_values: Vec<f64>,
    pub b_inf: f64,
    pub b_boundary_inf: f64,
    pub theta0: f64,
    pub perimeter: f64,
    pub corner_angles: Vec<f64>,
    pub corner_confident: Option<bool>,
    pub evidence_only_corners: Vec<usize>,
    pub notes: Vec<String>,
}

/// Worker count: the machine's parallelism, capped by [`THREADS_VAR`].
pub fn worker_threads() -> usize {
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(THREADS_VAR).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => cap.min(available),
        _ => available,
    }
}

fn corner_applicable(field: &MagneticField, domain: &PolygonalDomain, lambda: f64) -> bool {
    let theta0 = ModelSpectrum::standard().theta0;
    lambda < theta0 * field.inf_over_boundary(domain) && lambda < field.inf_over(domain)
}

/// Evaluates every leading-order prediction that applies at `(λ, h)`; the
/// others are `None` with the reason in the diagnostics.
pub fn predict(
    domain: &PolygonalDomain,
    field: &MagneticField,
    lambda: f64,
    h: f64,
    sector: &SectorOptions,
) -> Result<Prediction> {
    field.validate_on(domain)?;
    let spectrum = ModelSpectrum::standard();
    let trace = BoundaryTrace::from_domain(domain, field)?;
    let b_inf = field.inf_over(domain);
    let b_edge = field.inf_over_boundary(domain);
    let mut notes = Vec::new();
    let energy_leading = if lambda <= b_inf {
        Some(energy_asymptotic(&trace, lambda, h, spectrum)?)
    } else {
        notes.push(format!("energy: lambda = {lambda} exceeds inf B = {b_inf}"));
        None
    };
    let count_leading = if lambda < b_inf {
        Some(count_asymptotic(&trace, lambda, h, spectrum)?)
    } else {
        notes.push(format!("count: lambda = {lambda} is not below inf B = {b_inf}"));
        None
    };
    let mut field_values: Vec<f64> = trace.samples().map(|p| p.b).collect();
    field_values.sort_by(f64::total_cmp);
    field_values.dedup();
    let sublevel_widths = if lambda < b_edge {
        field_values
            .iter()
            .map(|b| xi_sublevel(lambda / b, spectrum).map(|s| s.width))
            .collect::<Result<_>>()?
    } else {
        notes.push("sublevel widths are infinite for lambda >= inf of B on the boundary".into());
        vec![f64::INFINITY; field_values.len()]
    };
    let corner = if corner_applicable(field, domain, lambda) {
        Some(corner_count_prediction_with(domain, field, lambda, sector)?)
    } else {
        notes.push(format!(
            "corner count: lambda = {lambda} is not below min(Θ₀·b′, b) = {}",
            (spectrum.theta0 * b_edge).min(b_inf)
        ));
        None
    };
    let evidence_only_corners = domain
        .corner_angles
        .iter()
        .enumerate()
        .filter(|(_, &a)| a > 0.5 * std::f64::consts::PI + 1e-12)
        .map(|(k, _)| k)
        .collect::<Vec<_>>();
    if corner.is_some() && !evidence_only_corners.is_empty() {
        notes.push("corners wider than π/2 contribute evidence-only sector counts".into());
    }
    Ok(Prediction {
        energy_leading,
        count_leading,
        corner_count: corner.as_ref().map(|c| c.total),
        sublevel_widths,
        diagnostics: PredictionDiagnostics {
            field_values,
            b_inf,
            b_boundary_inf: b_edge,
            theta0: spectrum.theta0,
            perimeter: domain.perimeter(),
            corner_angles: domain.corner_angles.clone(),
            corner_confident: corner.as_ref().map(|c| c.confident),
            evidence_only_corners,
            notes,
        },
    })
}

struct Context<'a> {
    config: &'a ExperimentConfig,
    domain: PolygonalDomain,
    field: MagneticField,
    trace: BoundaryTrace,
    corner: Option<CornerPrediction>,
}

fn ratio(num: f64, den: Option<f64>) -> Option<f64> {
    den.filter(|d| *d != 0.0).map(|d| num / d)
}

impl Context<'_> {
    fn run_row(&self, h: f64) -> (SweepRow, RowTiming) {
        let lambda = self.config.sweep.lambda;
        let mut row = SweepRow {
            h,
            lambda,
            threshold: lambda * h,
            dofs: 0,
            triangles: 0,
            min_angle_deg: f64::NAN,
            n_fem: None,
            n_extracted: None,
            paths_agree: None,
            ties: 0,
            e_fem: None,
            n_pred: None,
            e_pred: None,
            n_corner_pred: self.corner.as_ref().map(|c| c.total),
            count_ratio: None,
            energy_ratio: None,
            corner_match: None,
            eigenvalues: vec![],
            error: None,
        };
        let mut timing = RowTiming {
            h,
            mesh_seconds: 0.0,
            assemble_seconds: 0.0,
            solve_seconds: 0.0,
        };
        if let Err(e) = self.fill_row(&mut row, &mut timing) {
            row.error = Some(e.to_string());
        }
        (row, timing)
    }

    fn fill_row(&self, row: &mut SweepRow, timing: &mut RowTiming) -> Result<()> {
        let spectrum = ModelSpectrum::standard();
        let (h, lambda) = (row.h, row.lambda);
        let b_inf = self.field.inf_over(&self.domain);
        if lambda <= b_inf {
            row.e_pred = Some(energy_asymptotic(&self.trace, lambda, h, spectrum)?);
        }
        if lambda < b_inf {
            row.n_pred = Some(count_asymptotic(&self.trace, lambda, h, spectrum)?);
        }
        let t = Instant::now();
        let mesh = mesh_with_field(&self.domain, &self.config.mesh.size_field(&self.domain, h))?;
        timing.mesh_seconds = t.elapsed().as_secs_f64();
        let q = mesh.quality();
        row.triangles = q.triangles;
        row.min_angle_deg = q.min_angle_deg;
        let t = Instant::now();
        let pencil = assemble(&mesh, &self.field, h)?;
        timing.assemble_seconds = t.elapsed().as_secs_f64();
        row.dofs = pencil.dim();
        let t = Instant::now();
        let opts = EigenOptions {
            seed: self.config.sweep.seed,
            tolerance: self.config.sweep.solver_tolerance,
            ..Default::default()
        };
        let report = spectral_report_with(&pencil, row.threshold, self.config.sweep.k_max, self.config.sweep.mode, &opts)?;
        timing.solve_seconds = t.elapsed().as_secs_f64();
        row.n_fem = Some(report.inertia_count);
        row.ties = report.ties.len();
        if self.config.sweep.mode != crate::spectra::QueryMode::Count {
            row.n_extracted = Some(report.count);
            row.paths_agree = Some(report.paths_agree);
            row.e_fem = Some(report.energy);
            row.energy_ratio = ratio(report.energy, row.e_pred);
            row.eigenvalues = report.eigenvalues;
        }
        row.count_ratio = ratio(report.inertia_count as f64, row.n_pred);
        row.corner_match = row.n_corner_pred.map(|c| c == report.inertia_count);
        Ok(())
    }
}

pub fn run_sweep(config: &ExperimentConfig) -> Result<SweepReport> {
    run_sweep_with(config, &|_| {})
}

/// Runs the ladder in a worker pool; `on_row` sees each row as it completes.
pub fn run_sweep_with(config: &ExperimentConfig, on_row: &(dyn Fn(&SweepRow) + Sync)) -> Result<SweepReport> {
    config.validate()?;
    let domain = config.domain()?;
    let field = MagneticField::from_spec(&config.field);
    field.validate_on(&domain)?;
    let trace = BoundaryTrace::from_domain(&domain, &field)?;
    let lambda = config.sweep.lambda;
    let corner = if corner_applicable(&field, &domain, lambda) {
        Some(corner_count_prediction_with(&domain, &field, lambda, &config.sector)?)
    } else {
        None
    };
    let ctx = Context {
        config,
        domain,
        field,
        trace,
        corner,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let results: Vec<(SweepRow, RowTiming)> = pool.install(|| {
        config
            .sweep
            .h_ladder
            .par_iter()
            .map(|&h| {
                let out = ctx.run_row(h);
                on_row(&out.0);
                out
            })
            .collect()
    });
    let (rows, timings): (Vec<SweepRow>, Vec<RowTiming>) = results.into_iter().unzip();
    let verdicts = verdicts(&rows, ctx.corner.as_ref(), &config.tolerances);
    Ok(SweepReport {
        config: config.clone(),
        rows,
        corner_prediction: ctx.corner,
        verdicts,
        timings,
    })
}

fn deviation(r: Option<f64>) -> Option<f64> {
    r.map(|r| (r - 1.0).abs())
}

fn trend_verdict(name: &str, rows: &[SweepRow], pick: impl Fn(&SweepRow) -> Option<f64>) -> Verdict {
    let devs: Vec<Option<f64>> = rows.iter().map(|r| deviation(pick(r))).collect();
    let mut verdict = Verdict {
        name: name.into(),
        status: VerdictStatus::InsufficientData,
        detail: String::new(),
        value: None,
    };
    if devs.iter().all(Option::is_none) {
        verdict.status = VerdictStatus::NotApplicable;
        verdict.detail = "no prediction on any row".into();
        return verdict;
    }
    if rows.len() < 3 || devs.iter().any(Option::is_none) {
        verdict.detail = format!("{} of {} rows have a ratio; 3 needed", devs.iter().flatten().count(), rows.len());
        return verdict;
    }
    let devs: Vec<f64> = devs.into_iter().flatten().collect();
    let ok = devs.windows(2).all(|w| w[1] <= w[0]);
    verdict.status = if ok { VerdictStatus::Pass } else { VerdictStatus::Fail };
    verdict.detail = format!(
        "|ratio − 1| along the ladder: [{}]",
        devs.iter().map(|d| fmt_f64(*d)).collect::<Vec<_>>().join(", ")
    );
    verdict.value = devs.last().copied();
    verdict
}

fn final_verdict(name: &str, rows: &[SweepRow], tol: f64, pick: impl Fn(&SweepRow) -> Option<f64>) -> Verdict {
    let last = rows.last().and_then(|r| pick(r).map(|x| (r.h, x)));
    match last {
        None => Verdict {
            name: name.into(),
            status: VerdictStatus::NotApplicable,
            detail: "no ratio at the smallest h".into(),
            value: None,
        },
        Some((h, r)) => {
            let d = (r - 1.0).abs();
            Verdict {
                name: name.into(),
                status: if d <= tol { VerdictStatus::Pass } else { VerdictStatus::Fail },
                detail: format!("h = {}: ratio {}, tolerance {}", fmt_f64(h), fmt_f64(r), fmt_f64(tol)),
                value: Some(r),
            }
        }
    }
}

/// Verdicts over rows ordered by decreasing `h`.
pub fn verdicts(rows: &[SweepRow], corner: Option<&CornerPrediction>, tol: &Tolerances) -> Vec<Verdict> {
    let mut out = Vec::new();
    let failed: Vec<String> = rows
        .iter()
        .filter_map(|r| r.error.as_ref().map(|e| format!("h = {}: {e}", fmt_f64(r.h))))
        .collect();
    out.push(Verdict {
        name: "row_failures".into(),
        status: if failed.is_empty() { VerdictStatus::Pass } else { VerdictStatus::Fail },
        detail: failed.join("; "),
        value: Some(failed.len() as f64),
    });
    let checked: Vec<&SweepRow> = rows.iter().filter(|r| r.paths_agree.is_some()).collect();
    let disagree: Vec<String> = checked
        .iter()
        .filter(|r| r.paths_agree == Some(false))
        .map(|r| fmt_f64(r.h))
        .collect();
    out.push(Verdict {
        name: "inertia_matches_extraction".into(),
        status: if checked.is_empty() {
            VerdictStatus::NotApplicable
        } else if disagree.is_empty() {
            VerdictStatus::Pass
        } else {
            VerdictStatus::Fail
        },
        detail: if disagree.is_empty() { String::new() } else { format!("disagree at h = {}", disagree.join(", ")) },
        value: None,
    });
    match corner {
        None => out.push(Verdict {
            name: "corner_count_identity".into(),
            status: VerdictStatus::NotApplicable,
            detail: "lambda is not below min(Θ₀·b′, b)".into(),
            value: None,
        }),
        Some(c) => {
            let matches: Vec<Option<bool>> = rows.iter().map(|r| r.corner_match).collect();
            let all = matches.iter().all(|m| *m == Some(true));
            // the largest h from which the identity holds on every smaller h
            let mut h0 = None;
            for (r, m) in rows.iter().zip(&matches).rev() {
                if *m == Some(true) {
                    h0 = Some(r.h);
                } else {
                    break;
                }
            }
            let mut detail = format!(
                "prediction {} ({}); empirical h0 = {}",
                c.total,
                if c.confident { "converged sector counts" } else { "degraded: a sector count did not converge" },
                h0.map_or("none".into(), fmt_f64)
            );
            if c.terms.iter().any(|t| t.evidence_only) {
                detail.push_str("; includes corners wider than π/2 (evidence only)");
            }
            out.push(Verdict {
                name: "corner_count_identity".into(),
                status: if all { VerdictStatus::Pass } else { VerdictStatus::Fail },
                detail,
                value: h0,
            });
        }
    }
    out.push(trend_verdict("energy_ratio_trend", rows, |r| r.energy_ratio));
    out.push(final_verdict("energy_ratio_final", rows, tol.ratio, |r| r.energy_ratio));
    out.push(trend_verdict("count_ratio_trend", rows, |r| r.count_ratio));
    out.push(final_verdict("count_ratio_final", rows, tol.ratio, |r| r.count_ratio));
    out
}

const CSV_COLUMNS: [&str; 18] = [
    "h",
    "lambda",
    "threshold",
    "dofs",
    "triangles",
    "min_angle_deg",
    "n_fem",
    "n_extracted",
    "paths_agree",
    "ties",
    "e_fem",
    "n_pred",
    "e_pred",
    "n_corner_pred",
    "count_ratio",
    "energy_ratio",
    "corner_match",
    "error",
];

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

pub fn write_csv(rows: &[SweepRow], w: impl Write) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    let err = |e: csv::Error| Error::Io(std::io::Error::other(e));
    out.write_record(CSV_COLUMNS).map_err(err)?;
    for r in rows {
        out.write_record([
            fmt_f64(r.h),
            fmt_f64(r.lambda),
            fmt_f64(r.threshold),
            r.dofs.to_string(),
            r.triangles.to_string(),
            fmt_f64(r.min_angle_deg),
            opt(r.n_fem, |n| n.to_string()),
            opt(r.n_extracted, |n| n.to_string()),
            opt(r.paths_agree, |b| b.to_string()),
            r.ties.to_string(),
            opt(r.e_fem, fmt_f64),
            opt(r.n_pred, fmt_f64),
            opt(r.e_pred, fmt_f64),
            opt(r.n_corner_pred, |n| n.to_string()),
            opt(r.count_ratio, fmt_f64),
            opt(r.energy_ratio, fmt_f64),
            opt(r.corner_match, |b| b.to_string()),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(err)?;
    }
    out.flush()?;
    Ok(())
}

/// Writes `sweep.csv`, `sweep.json`, `verdicts.json` and `timings.json`.
/// The first three are byte-identical across reruns; timings are not.
pub fn write_report(report: &SweepReport, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_csv(&report.rows, std::fs::File::create(dir.join("sweep.csv"))?)?;
    write_json(std::fs::File::create(dir.join("sweep.json"))?, report)?;
    write_json(std::fs::File::create(dir.join("verdicts.json"))?, &report.verdicts)?;
    write_json(std::fs::File::create(dir.join("timings.json"))?, &report.timings)?;
    Ok(())
}
