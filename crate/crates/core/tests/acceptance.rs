//! Acceptance criteria. Prints one line per criterion and exits non-zero if
//! any of them fails.

mod common;

use common::{galerkin, pencil_oracle};
use corner_spectra::fem2d::{assemble, mesh_with_field, MagneticField, PolygonalDomain};
use corner_spectra::harness::{run_sweep, ExperimentConfig, MeshRule, SweepReport};
use corner_spectra::model1d::{cylinder_spectrum, mu, mu2_floor, theta0, CylinderParams, ModelOperatorParams};
use corner_spectra::sector::sector_count;
use corner_spectra::spectra::{
    count_below, energy_functional, lowest_k_with, variational_checks, CsrMatrix, EigenOptions,
    HermitianPencil,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

const RATIO_TOLERANCE: f64 = 0.15;
const LADDER: [f64; 3] = [0.02, 0.01, 0.005];

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn a1() -> Outcome {
    let m1 = mu(1, &ModelOperatorParams::new(0.0)).map_err(|e| e.to_string())?.value;
    let m2 = mu(2, &ModelOperatorParams::new(0.0)).map_err(|e| e.to_string())?.value;
    let mut detail = format!("μ₁(0) - 1 = {:.2e}, μ₂(0) - 5 = {:.2e}", m1 - 1.0, m2 - 5.0);
    let mut ok = (m1 - 1.0).abs() <= 1e-8 && (m2 - 5.0).abs() <= 1e-6;
    for xi in [-0.5, -1.0, -2.0] {
        let v = mu(1, &ModelOperatorParams::new(xi)).map_err(|e| e.to_string())?.value;
        ok &= v >= xi * xi;
        detail += &format!(", μ₁({xi}) - ξ² = {:.3}", v - xi * xi);
    }
    let grid: Vec<f64> = (0..=160).map(|i| -2.0 + 0.05 * i as f64).collect();
    let floor = mu2_floor(&grid).map_err(|e| e.to_string())?;
    ok &= floor > 1.0;
    check(ok, format!("{detail}, inf μ₂ = {floor:.6}"))
}

fn a2() -> Outcome {
    let t = theta0((0.0, 2.0), 1e-9).map_err(|e| e.to_string())?;
    let (oracle, _) = galerkin::theta0(0.6, 0.9);
    let virial = (t.theta0 - t.xi0 * t.xi0).abs();
    check(
        t.theta0 > 0.5 && t.theta0 < 1.0 && (t.theta0 - oracle).abs() <= 1e-6 && virial <= 1e-5,
        format!("Θ₀ = {:.10}, oracle gap {:.2e}, |Θ₀ - ξ₀²| = {virial:.2e}", t.theta0, (t.theta0 - oracle).abs()),
    )
}

fn a3() -> Outcome {
    let mut violations = 0;
    let mut cases = 0;
    for s in [0.5, 1.0, 3.0] {
        for t in [3.0, 4.5, 6.0] {
            for h in [0.01, 0.005, 0.002] {
                let c = cylinder_spectrum(&CylinderParams { s, t, h, b: 1.0, lambda: 0.05, mode_range: None })
                    .map_err(|e| e.to_string())?;
                let count_rhs = s * t / (2.0 * PI * h.sqrt()) + 1.0;
                let energy_rhs = c.count as f64 * 1.05 * h;
                cases += 1;
                if c.count as f64 > count_rhs || c.energy.abs() > energy_rhs {
                    violations += 1;
                }
            }
        }
    }
    check(violations == 0, format!("{violations} violations in {cases} cylinders"))
}

fn sweep(lambda: f64) -> Result<SweepReport, String> {
    let mut c = ExperimentConfig::from_toml(&format!(
        "[domain]\npreset = \"square\"\n[sweep]\nlambda = {lambda}\nh_ladder = [0.02, 0.01, 0.005]\n"
    ))
    .map_err(|e| e.to_string())?;
    c.mesh = MeshRule::default();
    run_sweep(&c).map_err(|e| e.to_string())
}

fn a4() -> Outcome {
    let sector = sector_count(PI / 2.0, 0.55, 1.0).map_err(|e| e.to_string())?;
    let expected = 4 * sector.n;
    let report = sweep(0.55)?;
    let mut ok = sector.convergence_flag;
    let mut parts = vec![format!("n(π/2, 0.55) = {} at R = {}", sector.n, sector.r_used)];
    for row in &report.rows {
        let n = row.n_fem.ok_or_else(|| format!("h = {}: {:?}", row.h, row.error))?;
        ok &= n == expected;
        parts.push(format!("h = {}: N = {n}", row.h));
    }
    check(ok, format!("{}; expected {expected}", parts.join(", ")))
}

fn ratio_criterion(report: &SweepReport, ratio: impl Fn(&corner_spectra::harness::SweepRow) -> Option<f64>) -> Outcome {
    let mut deviations = Vec::new();
    for row in &report.rows {
        let r = ratio(row).ok_or_else(|| format!("h = {}: no ratio ({:?})", row.h, row.error))?;
        deviations.push((row.h, r));
    }
    let gaps: Vec<f64> = deviations.iter().map(|(_, r)| (r - 1.0).abs()).collect();
    let trend = gaps.windows(2).all(|w| w[1] <= w[0]);
    let last = *gaps.last().ok_or("empty sweep")?;
    let listing: Vec<String> = deviations.iter().map(|(h, r)| format!("h = {h}: {r:.4}")).collect();
    check(
        last <= RATIO_TOLERANCE && trend && deviations.len() == LADDER.len(),
        format!("{}; non-increasing: {trend}", listing.join(", ")),
    )
}

fn a7() -> Outcome {
    let r = variational_checks(7, 1000);
    check(
        r.passed(),
        format!(
            "{} + {} violations in {} instances, equality error {:.1e}",
            r.contraction_violations, r.family_violations, r.trials, r.projector_equality_error
        ),
    )
}

fn a8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut count_errors = 0;
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=50);
        let (k, m) = pencil_oracle::random_pencil(&mut rng, n);
        let exact = pencil_oracle::pencil_eigenvalues(&k, &m);
        let threshold = rng.gen::<f64>() * 3.0 - 1.5;
        let p = HermitianPencil::from_matrices(CsrMatrix::from_dense(&k), CsrMatrix::from_dense(&m))
            .map_err(|e| e.to_string())?;
        let expected = exact.iter().filter(|e| **e < threshold).count();
        if count_below(&p, threshold).map_err(|e| e.to_string())? != expected {
            count_errors += 1;
        }
        let e_exact: f64 = exact.iter().filter(|e| **e <= threshold).map(|e| e - threshold).sum();
        let e = energy_functional(&p, threshold, n).map_err(|e| e.to_string())?;
        worst = worst.max((e - e_exact).abs());
    }
    check(
        count_errors == 0 && worst <= 1e-10,
        format!("{count_errors} count mismatches, worst energy error {worst:.1e}"),
    )
}

fn a9() -> Outcome {
    let h = 0.01;
    let square = PolygonalDomain::unit_square();
    let mesh = mesh_with_field(&square, &MeshRule::default().size_field(&square, h)).map_err(|e| e.to_string())?;
    let fine = mesh.refine_red();
    let base = MagneticField::constant(1.0);
    let shifted = MagneticField::constant(1.0).gauge_shifted(1.0);
    let coarse_pencil = assemble(&mesh, &base, h).map_err(|e| e.to_string())?;
    let k = count_below(&coarse_pencil, h).map_err(|e| e.to_string())?;
    let opts = EigenOptions { shift: Some(0.4 * h), ..Default::default() };
    let solve = |p: &HermitianPencil| lowest_k_with(p, k, &opts).map(|e| e.values).map_err(|e| e.to_string());
    let coarse = solve(&coarse_pencil)?;
    let refined = solve(&assemble(&fine, &base, h).map_err(|e| e.to_string())?)?;
    let moved = solve(&assemble(&mesh, &shifted, h).map_err(|e| e.to_string())?)?;
    let mut violations = 0;
    let mut worst = 0.0f64;
    for i in 0..k {
        let estimate = (coarse[i] - refined[i]).abs() * 4.0 / 3.0;
        let shift = (moved[i] - coarse[i]).abs();
        worst = worst.max(shift / estimate);
        if shift >= estimate {
            violations += 1;
        }
    }
    check(
        violations == 0 && k > 0,
        format!("{k} eigenvalues, {violations} violations, largest shift/estimate {worst:.1e}"),
    )
}

fn main() -> ExitCode {
    let energy = std::cell::OnceCell::new();
    let count = std::cell::OnceCell::new();
    let criteria: Vec<Criterion> = vec![
        ("A1 model family exactness", Box::new(a1)),
        ("A2 Θ₀ stability", Box::new(a2)),
        ("A3 cylinder bounds", Box::new(a3)),
        ("A4 corner-count identity", Box::new(a4)),
        (
            "A5 energy asymptotics",
            Box::new(|| {
                let r = energy.get_or_init(|| sweep(1.0));
                ratio_criterion(r.as_ref().map_err(Clone::clone)?, |row| row.energy_ratio)
            }),
        ),
        (
            "A6 count asymptotics",
            Box::new(|| {
                let r = count.get_or_init(|| sweep(0.8));
                ratio_criterion(r.as_ref().map_err(Clone::clone)?, |row| row.count_ratio)
            }),
        ),
        ("A7 variational principles", Box::new(a7)),
        ("A8 solver oracles", Box::new(a8)),
        ("A9 gauge invariance", Box::new(a9)),
    ];
    let mut failed = 0;
    for (name, run) in &criteria {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
