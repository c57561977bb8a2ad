use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use corner_spectra::fem2d::matrix_market::{read_pencil, write_pencil};
use corner_spectra::fem2d::{
    assemble_with, mesh_with_field, AssemblyOptions, MagneticField, PolygonalDomain, SizeField, TriangularMesh,
};
use corner_spectra::harness::{self, fmt_f64, write_json, ExperimentConfig, MeshRule};
use corner_spectra::model1d::{cylinder_spectrum, CylinderParams, FdOrder, ModelSpectrum};
use corner_spectra::sector::{sector_count_with, SectorOptions};
use corner_spectra::spectra::{spectral_report, QueryMode};
use serde::Serialize;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

#[derive(Parser)]
#[command(name = "corner-spectra", version, about = "Spectra of magnetic Neumann Laplacians near boundaries and corners")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the half-line oscillator eigenvalues μ_j(ξ).
    Degennes(DegennesArgs),
    /// Spectrum below hb(1+λ) of the model cylinder.
    Cylinder(CylinderArgs),
    /// Eigenvalue count of the infinite sector below λ.
    Sector(SectorArgs),
    /// Meshing and assembly on polygonal domains.
    #[command(subcommand)]
    Domain(DomainCommand),
    /// Count and extract eigenvalues of a stored pencil.
    Spectra(SpectraArgs),
    /// Leading-order predictions for a domain.
    Predict(PredictArgs),
    /// Run an h-sweep from a config file.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct DegennesArgs {
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    xi_min: f64,
    #[arg(long, default_value_t = 12.0, allow_hyphen_values = true)]
    xi_max: f64,
    #[arg(long, default_value_t = 0.02)]
    xi_step: f64,
    #[arg(long, default_value_t = 2)]
    jmax: usize,
    /// Finite-difference grid spacing.
    #[arg(long, default_value_t = corner_spectra::model1d::DEFAULT_SPACING)]
    grid: f64,
    /// Stencil order, 2 or 4.
    #[arg(long, default_value = "2")]
    order: FdOrder,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct CylinderArgs {
    #[arg(long = "S")]
    s: f64,
    #[arg(long = "T")]
    t: f64,
    #[arg(long)]
    h: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SectorArgs {
    #[arg(long)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long = "R-ladder", value_delimiter = ',', default_value = "8,10,12")]
    r_ladder: Vec<f64>,
    /// Mesh size at the apex.
    #[arg(long, default_value_t = corner_spectra::sector::DEFAULT_MESH_SIZE)]
    mesh: f64,
    #[arg(long, default_value_t = corner_spectra::sector::DEFAULT_GRADING)]
    grading: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand)]
enum DomainCommand {
    /// Mesh a domain and write the mesh text format.
    Mesh(MeshArgs),
    /// Assemble K and M on a mesh.
    Assemble(AssembleArgs),
}

#[derive(Args)]
struct MeshArgs {
    /// Domain file or preset name (square, rectangle, l-shape, wedge).
    #[arg(long, default_value = "square")]
    domain: String,
    /// Size the mesh for this h with the default rule.
    #[arg(long, conflicts_with = "size")]
    h: Option<f64>,
    /// Uniform target size.
    #[arg(long)]
    size: Option<f64>,
    #[arg(long, default_value_t = 2.0)]
    grading: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AssembleArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    h: f64,
    #[arg(long = "B", default_value_t = 1.0)]
    b: f64,
    /// Boundary markers carrying a Dirichlet condition.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    dirichlet: Vec<i32>,
    /// Output prefix; writes `<out>.K.mtx` and `<out>.M.mtx`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SpectraArgs {
    /// Stiffness and mass files.
    #[arg(long, num_args = 2, value_names = ["K", "M"])]
    pencil: Vec<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    threshold: f64,
    #[arg(long, default_value_t = 200)]
    kmax: usize,
    #[arg(long, default_value = "both")]
    mode: QueryMode,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Domain file or preset name.
    #[arg(long)]
    domain: String,
    #[arg(long = "B", default_value_t = 1.0)]
    b: f64,
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))
}

fn json_out<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = create(path)?;
    write_json(&mut w, value)?;
    w.flush()?;
    Ok(())
}

fn load_domain(name: &str) -> Result<PolygonalDomain> {
    let path = Path::new(name);
    if path.exists() {
        let file = File::open(path)?;
        return Ok(PolygonalDomain::read_text(BufReader::new(file))?);
    }
    PolygonalDomain::preset(name).with_context(|| format!("'{name}' is neither a file nor a preset"))
}

fn degennes(a: DegennesArgs) -> Result<()> {
    let spectrum = ModelSpectrum::build(a.xi_min, a.xi_max, a.xi_step, a.jmax, a.grid, a.order)?;
    let mut w = csv::Writer::from_writer(create(&a.out)?);
    let mut header = vec!["xi".to_string()];
    header.extend((1..=a.jmax).map(|j| format!("mu{j}")));
    header.push("err_est".into());
    w.write_record(&header)?;
    for (i, xi) in spectrum.xi_grid.iter().enumerate() {
        let mut rec = vec![fmt_f64(*xi)];
        rec.extend(spectrum.mu.iter().map(|m| fmt_f64(m[i])));
        rec.push(fmt_f64(spectrum.resolution_report[i]));
        w.write_record(&rec)?;
    }
    w.flush()?;
    eprintln!("Θ₀ = {} at ξ₀ = {}", fmt_f64(spectrum.theta0), fmt_f64(spectrum.xi0));
    Ok(())
}

fn cylinder(a: CylinderArgs) -> Result<()> {
    let spec = cylinder_spectrum(&CylinderParams {
        s: a.s,
        t: a.t,
        h: a.h,
        b: a.b,
        lambda: a.lambda,
        mode_range: None,
    })?;
    json_out(&a.out, &spec)
}

#[derive(Serialize)]
struct SectorOutput {
    alpha: f64,
    lambda: f64,
    b: f64,
    n: usize,
    eigenvalues: Vec<f64>,
    #[serde(rename = "R_used")]
    r_used: f64,
    converged: bool,
    evidence_only: bool,
    steps: Vec<corner_spectra::sector::LadderStep>,
}

fn sector(a: SectorArgs) -> Result<()> {
    let opts = SectorOptions {
        ladder: a.r_ladder,
        mesh_size: a.mesh,
        grading: a.grading,
        ..Default::default()
    };
    let c = sector_count_with(a.alpha, a.lambda, a.b, &opts)?;
    json_out(
        &a.out,
        &SectorOutput {
            alpha: c.alpha,
            lambda: c.lambda,
            b: c.b,
            n: c.n,
            eigenvalues: c.eigenvalues_below,
            r_used: c.r_used,
            converged: c.convergence_flag,
            evidence_only: c.evidence_only,
            steps: c.steps,
        },
    )
}

fn domain_mesh(a: MeshArgs) -> Result<()> {
    let domain = load_domain(&a.domain)?;
    let field = match (a.h, a.size) {
        (Some(h), None) => MeshRule {
            grading: a.grading,
            ..Default::default()
        }
        .size_field(&domain, h),
        (None, Some(s)) => SizeField::graded(&domain, s, a.grading),
        _ => bail!("give exactly one of --h and --size"),
    };
    let mesh = mesh_with_field(&domain, &field)?;
    let mut w = create(&a.out)?;
    mesh.write_text(&mut w)?;
    w.flush()?;
    let q = mesh.quality();
    eprintln!(
        "{} nodes, {} triangles, min angle {:.2}°",
        q.nodes, q.triangles, q.min_angle_deg
    );
    Ok(())
}

fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn domain_assemble(a: AssembleArgs) -> Result<()> {
    let mesh = TriangularMesh::read_text(BufReader::new(File::open(&a.mesh)?))?;
    let mut opts = AssemblyOptions::default();
    if !a.dirichlet.is_empty() {
        opts.dirichlet_markers = a.dirichlet;
    }
    let pencil = assemble_with(&mesh, &MagneticField::constant(a.b), a.h, &opts)?;
    let (kp, mp) = (with_suffix(&a.out, ".K.mtx"), with_suffix(&a.out, ".M.mtx"));
    let (mut k, mut m) = (create(&kp)?, create(&mp)?);
    write_pencil(&pencil, &mut k, &mut m)?;
    k.flush()?;
    m.flush()?;
    eprintln!("{} dofs -> {}, {}", pencil.dim(), kp.display(), mp.display());
    Ok(())
}

fn spectra(a: SpectraArgs) -> Result<()> {
    let open = |p: &PathBuf| -> Result<BufReader<File>> {
        Ok(BufReader::new(File::open(p).with_context(|| format!("opening {}", p.display()))?))
    };
    let pencil = read_pencil(open(&a.pencil[0])?, open(&a.pencil[1])?)?;
    let report = spectral_report(&pencil, a.threshold, a.kmax, a.mode)?;
    json_out(&a.out, &report)
}

fn predict(a: PredictArgs) -> Result<()> {
    let domain = load_domain(&a.domain)?;
    let field = MagneticField::constant(a.b);
    let p = harness::predict(&domain, &field, a.lambda, a.h, &SectorOptions::default())?;
    json_out(&a.out, &p)
}

fn sweep(a: SweepArgs) -> Result<()> {
    let config = ExperimentConfig::load(&a.config)?;
    std::fs::create_dir_all(&a.out_dir)?;
    // completed rows are appended here as they finish, in completion order
    let partial = Mutex::new(create(&a.out_dir.join("rows.partial.jsonl"))?);
    let on_row = |row: &harness::SweepRow| {
        let line = serde_json::to_string(row).unwrap_or_default();
        if let Ok(mut w) = partial.lock() {
            let _ = writeln!(w, "{line}");
            let _ = w.flush();
        }
        eprintln!(
            "h = {}: N = {}, E = {}{}",
            fmt_f64(row.h),
            row.n_fem.map_or("-".into(), |n| n.to_string()),
            row.e_fem.map_or("-".into(), fmt_f64),
            row.error.as_ref().map_or(String::new(), |e| format!(" (error: {e})"))
        );
    };
    let report = harness::run_sweep_with(&config, &on_row)?;
    harness::write_report(&report, &a.out_dir)?;
    for v in &report.verdicts {
        eprintln!("{:<28} {:?} {}", v.name, v.status, v.detail);
    }
    Ok(())
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Degennes(a) => degennes(a),
        Command::Cylinder(a) => cylinder(a),
        Command::Sector(a) => sector(a),
        Command::Domain(DomainCommand::Mesh(a)) => domain_mesh(a),
        Command::Domain(DomainCommand::Assemble(a)) => domain_assemble(a),
        Command::Spectra(a) => spectra(a),
        Command::Predict(a) => predict(a),
        Command::Sweep(a) => sweep(a),
    }
}
