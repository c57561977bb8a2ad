use corner_spectra::fem2d::FieldSpec;
use corner_spectra::harness::*;
use corner_spectra::spectra::QueryMode;

fn config(lambda: f64, ladder: &[f64]) -> ExperimentConfig {
    let ladder: Vec<String> = ladder.iter().map(|h| h.to_string()).collect();
    ExperimentConfig::from_toml(&format!(
        r#"
[domain]
preset = "square"

[sweep]
lambda = {lambda}
h_ladder = [{}]

[sector]
ladder = [6.0, 8.0]
max_radius = 8.0
mesh_size = 0.1
"#,
        ladder.join(", ")
    ))
    .unwrap()
}

#[test]
fn config_defaults_and_validation() {
    let c = config(0.5, &[0.04, 0.02]);
    assert_eq!(c.field, FieldSpec::Constant { beta: 1.0, gauge_xy: 0.0 });
    assert_eq!(c.mesh, MeshRule::default());
    assert_eq!(c.sweep.mode, QueryMode::Both);
    assert_eq!(c.tolerances.ratio, 0.15);
    for bad in [
        "[domain]\npreset = \"square\"\n[sweep]\nlambda = 1.0\nh_ladder = []\n",
        "[domain]\npreset = \"square\"\n[sweep]\nlambda = 1.0\nh_ladder = [0.01, 0.02]\n",
        "[domain]\npreset = \"square\"\n[sweep]\nlambda = 1.0\nh_ladder = [0.01]\ncolour = 3\n",
        "[domain]\npreset = \"square\"\n[sweep]\nlambda = 1.0\nh_ladder = [0.01]\n[mesh]\nboundary = 0.5\n",
    ] {
        assert!(ExperimentConfig::from_toml(bad).is_err(), "{bad}");
    }
}

#[test]
fn shipped_configs_parse() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            let c = ExperimentConfig::load(&path).unwrap();
            c.domain().unwrap();
            seen += 1;
        }
    }
    assert!(seen >= 3);
}

#[test]
fn below_every_threshold_everything_vanishes() {
    let report = run_sweep(&config(0.3, &[0.04, 0.02, 0.01])).unwrap();
    assert_eq!(report.rows.len(), 3);
    for row in &report.rows {
        assert!(row.error.is_none(), "{:?}", row.error);
        assert_eq!(row.n_fem, Some(0));
        assert_eq!(row.e_fem, Some(0.0));
        assert_eq!(row.e_pred, Some(0.0));
        assert_eq!(row.n_pred, Some(0.0));
        assert_eq!(row.n_corner_pred, Some(0));
        assert_eq!(row.corner_match, Some(true));
        assert_eq!(row.energy_ratio, None);
    }
    let identity = report.verdicts.iter().find(|v| v.name == "corner_count_identity").unwrap();
    assert_eq!(identity.status, VerdictStatus::Pass);
    assert_eq!(identity.value, Some(0.04));
}

#[test]
fn reports_are_byte_stable() {
    let c = config(1.0, &[0.04, 0.02]);
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        write_report(&run_sweep(&c).unwrap(), d.path()).unwrap();
    }
    for name in ["sweep.csv", "sweep.json", "verdicts.json"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    // csv and json carry the same numbers
    let json: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dirs[0].path().join("sweep.json")).unwrap()).unwrap();
    let mut csv = csv::Reader::from_path(dirs[0].path().join("sweep.csv")).unwrap();
    let headers = csv.headers().unwrap().clone();
    for (rec, row) in csv.records().zip(json["rows"].as_array().unwrap()) {
        let rec = rec.unwrap();
        for col in ["h", "e_fem", "e_pred", "energy_ratio", "n_pred"] {
            let i = headers.iter().position(|h| h == col).unwrap();
            if rec[i].is_empty() {
                assert!(row[col].is_null(), "{col}");
                continue;
            }
            let from_csv: f64 = rec[i].parse().unwrap();
            assert_eq!(from_csv.to_bits(), row[col].as_f64().unwrap().to_bits(), "{col}");
        }
    }
}

fn row(h: f64, ratio: f64, corner: Option<bool>) -> SweepRow {
    SweepRow {
        h,
        lambda: 1.0,
        threshold: h,
        dofs: 10,
        triangles: 10,
        min_angle_deg: 30.0,
        n_fem: Some(4),
        n_extracted: Some(4),
        paths_agree: Some(true),
        ties: 0,
        e_fem: Some(-ratio),
        n_pred: Some(4.0),
        e_pred: Some(-1.0),
        n_corner_pred: corner.map(|_| 4),
        count_ratio: Some(1.0),
        energy_ratio: Some(ratio),
        corner_match: corner,
        eigenvalues: vec![],
        error: None,
    }
}

#[test]
fn verdicts_follow_the_rows() {
    let tol = Tolerances::default();
    let find = |v: &[Verdict], name: &str| v.iter().find(|x| x.name == name).unwrap().clone();

    let two = [row(0.02, 1.3, None), row(0.01, 1.1, None)];
    let v = verdicts(&two, None, &tol);
    assert_eq!(find(&v, "energy_ratio_trend").status, VerdictStatus::InsufficientData);
    assert_eq!(find(&v, "energy_ratio_final").status, VerdictStatus::Pass);
    assert_eq!(find(&v, "corner_count_identity").status, VerdictStatus::NotApplicable);

    let worse = [row(0.02, 1.3, None), row(0.01, 1.1, None), row(0.005, 1.2, None)];
    let v = verdicts(&worse, None, &tol);
    assert_eq!(find(&v, "energy_ratio_trend").status, VerdictStatus::Fail);
    assert_eq!(find(&v, "energy_ratio_final").status, VerdictStatus::Fail);

    let prediction = corner_spectra::semiclassics::CornerPrediction {
        total: 4,
        terms: vec![],
        confident: true,
    };
    let late = [row(0.02, 1.0, Some(false)), row(0.01, 1.0, Some(true)), row(0.005, 1.0, Some(true))];
    let v = find(&verdicts(&late, Some(&prediction), &tol), "corner_count_identity");
    assert_eq!(v.status, VerdictStatus::Fail);
    assert_eq!(v.value, Some(0.01));
    assert!(v.detail.contains("empirical h0"));

    let mut broken = late.clone();
    broken[1].error = Some("solver".into());
    assert_eq!(find(&verdicts(&broken, None, &tol), "row_failures").status, VerdictStatus::Fail);
}

#[test]
fn thread_cap_is_honoured() {
    std::env::set_var(THREADS_VAR, "1");
    assert_eq!(worker_threads(), 1);
    std::env::remove_var(THREADS_VAR);
    assert!(worker_threads() >= 1);
}

#[test]
fn domain_files_round_trip() {
    let d = corner_spectra::fem2d::PolygonalDomain::with_dirichlet(
        vec![[0.0, 0.0], [2.0, 0.0], [1.5, 1.0], [0.2, 0.7]],
        vec![2],
    )
    .unwrap();
    let mut buf = Vec::new();
    d.write_text(&mut buf).unwrap();
    let back = corner_spectra::fem2d::PolygonalDomain::read_text(buf.as_slice()).unwrap();
    assert_eq!(back, d);
    assert!(corner_spectra::fem2d::PolygonalDomain::read_text("vertices 2\n0 0\n1 1\n".as_bytes()).is_err());
}

#[test]
fn predictions_report_their_reach() {
    let sq = corner_spectra::fem2d::PolygonalDomain::unit_square();
    let field = corner_spectra::fem2d::MagneticField::constant(1.0);
    let p = predict(&sq, &field, 1.0, 0.01, &Default::default()).unwrap();
    assert!(p.energy_leading.unwrap() < 0.0);
    assert!(p.count_leading.is_none());
    assert!(p.corner_count.is_none());
    assert!(p.sublevel_widths.iter().all(|w| w.is_infinite()));
    assert!(!p.diagnostics.notes.is_empty());
}
