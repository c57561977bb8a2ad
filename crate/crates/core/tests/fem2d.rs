mod common;

use common::triangle_rule::collapsed_rule;
use corner_spectra::fem2d::assemble::{quadratic_form, to_nodes};
use corner_spectra::fem2d::matrix_market::{read_pencil, write_pencil};
use corner_spectra::fem2d::*;
use corner_spectra::spectra::sparse::dot;
use corner_spectra::spectra::{count_below, lowest_k, lowest_k_with, EigenOptions, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;

fn layer_mesh(domain: &PolygonalDomain, h: f64) -> TriangularMesh {
    let mut f = SizeField::uniform(h.sqrt() / 8.0);
    f.interior_size = h.sqrt() / 4.0;
    f.layer_width = 4.0 * h.sqrt();
    mesh_with_field(domain, &f).unwrap()
}

#[test]
fn free_neumann_square() {
    let mesh = mesh_polygon(&PolygonalDomain::unit_square(), 0.02, 1.0).unwrap();
    let p = assemble(&mesh, &MagneticField::constant(0.0), 1.0).unwrap();
    let e = lowest_k(&p, 3).unwrap();
    let (knorm, _) = p.scale();
    assert!(e.values[0].abs() <= 1e-8 * knorm, "{}", e.values[0]);
    assert!((e.values[1] / (PI * PI) - 1.0).abs() < 0.02);
    assert!((e.values[2] / (PI * PI) - 1.0).abs() < 0.02);
}

#[test]
fn second_neumann_eigenvalue_converges_at_second_order() {
    let mut mesh = mesh_polygon(&PolygonalDomain::unit_square(), 0.1, 1.0).unwrap();
    let mut errors = vec![];
    for _ in 0..4 {
        let p = assemble(&mesh, &MagneticField::constant(0.0), 1.0).unwrap();
        let e = lowest_k(&p, 2).unwrap();
        errors.push(e.values[1] - PI * PI);
        mesh = mesh.refine_red();
    }
    for w in errors.windows(2) {
        let rate = (w[0] / w[1]).log2();
        assert!((1.7..=2.3).contains(&rate), "errors {errors:?}");
    }
}

#[test]
fn dirichlet_square_starts_above_landau_level() {
    let h = 0.01;
    let sq = PolygonalDomain::with_dirichlet(
        PolygonalDomain::unit_square().vertices,
        vec![0, 1, 2, 3],
    )
    .unwrap();
    let mesh = layer_mesh(&sq, h);
    let p = assemble_with(&mesh, &MagneticField::constant(1.0), h, &AssemblyOptions::for_domain(&sq)).unwrap();
    let e = lowest_k_with(&p, 1, &EigenOptions { shift: Some(0.5 * h), ..Default::default() }).unwrap();
    assert!(e.values[0] >= h * (1.0 - 0.05), "{}", e.values[0] / h);
    assert_eq!(count_below(&p, 0.95 * h).unwrap(), 0);
}

#[test]
fn halving_the_target_size_quadruples_the_triangles() {
    for domain in [PolygonalDomain::unit_square(), PolygonalDomain::l_shape()] {
        let a = mesh_polygon(&domain, 0.04, 1.0).unwrap().triangles.len() as f64;
        let b = mesh_polygon(&domain, 0.02, 1.0).unwrap().triangles.len() as f64;
        assert!((b / a / 4.0 - 1.0).abs() <= 0.2, "{a} -> {b}");
    }
}

#[test]
fn quality_contract_on_presets() {
    for domain in [PolygonalDomain::unit_square(), PolygonalDomain::rectangle(2.0, 0.5), PolygonalDomain::l_shape()] {
        let m = mesh_polygon(&domain, 0.05, 2.0).unwrap();
        m.validate().unwrap();
        let q = m.quality();
        assert!(q.min_angle_deg >= 20.0 && q.max_diameter <= 0.05 + 1e-12, "{q:?}");
        assert!((m.total_area() - domain.area()).abs() < 1e-12);
    }
}

fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
}

/// Element-local energy with a rule independent of the assembler's.
fn reference_form(mesh: &TriangularMesh, field: &MagneticField, h: f64, u: &[C64]) -> f64 {
    let rule = collapsed_rule(6);
    let mut total = 0.0;
    for t in 0..mesh.triangles.len() {
        let p = mesh.vertices(t);
        let area = mesh.area(t);
        let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
        let tri = mesh.triangles[t];
        // u = e^{iφ} v on the element with φ the line integral of A from c
        let v: Vec<C64> = (0..3)
            .map(|j| u[tri[j]] * C64::from_polar(1.0, -field.line_integral(c, p[j]) / h))
            .collect();
        let det = 2.0 * area;
        let g = [
            [(p[1][1] - p[2][1]) / det, (p[2][0] - p[1][0]) / det],
            [(p[2][1] - p[0][1]) / det, (p[0][0] - p[2][0]) / det],
            [(p[0][1] - p[1][1]) / det, (p[1][0] - p[0][0]) / det],
        ];
        for (lam, w) in &rule {
            let x = [
                lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
            ];
            // the gauge-transformed potential A − ∇(∫_c^x A·dl), by differences
            let d = 1e-6;
            let phi = |y: [f64; 2]| field.line_integral(c, y);
            let grad_phi = [
                (phi([x[0] + d, x[1]]) - phi([x[0] - d, x[1]])) / (2.0 * d),
                (phi([x[0], x[1] + d]) - phi([x[0], x[1] - d])) / (2.0 * d),
            ];
            let a = field.a(x);
            let at = [a[0] - grad_phi[0], a[1] - grad_phi[1]];
            let val: C64 = (0..3).map(|j| v[j] * lam[j]).sum();
            let dv: [C64; 2] = std::array::from_fn(|k| (0..3).map(|j| v[j] * g[j][k]).sum());
            let e0 = dv[0] * h - C64::new(0.0, at[0]) * val;
            let e1 = dv[1] * h - C64::new(0.0, at[1]) * val;
            total += w * area * (e0.norm_sqr() + e1.norm_sqr());
        }
    }
    total
}

#[test]
fn stiffness_is_the_discrete_energy() {
    let mesh = mesh_polygon(&PolygonalDomain::l_shape(), 0.08, 1.0).unwrap();
    let field = MagneticField::constant(1.3).gauge_shifted(0.4);
    let h = 0.05;
    let opts = AssemblyOptions {
        quadrature: Quadrature::SixPoint,
        ..Default::default()
    };
    let p = assemble_with(&mesh, &field, h, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let x = random_vector(&mut rng, p.dim());
        let quad = dot(&x, &p.k.mul_vec(&x));
        assert!(quad.im.abs() <= 1e-13 * quad.re);
        let u = to_nodes(&p, &x);
        let reference = reference_form(&mesh, &field, h, &u);
        assert!((quad.re / reference - 1.0).abs() < 1e-8, "{} vs {reference}", quad.re);
        let direct = quadratic_form(&mesh, &field, h, &u);
        assert!((quad.re / direct - 1.0).abs() < 1e-12);
        // mass is the L² norm of the interpolant
        let mass = dot(&x, &p.m.mul_vec(&x)).re;
        assert!(mass > 0.0);
    }
}

#[test]
fn assembly_is_exactly_hermitian_and_positive() {
    let mesh = mesh_polygon(&PolygonalDomain::unit_square(), 0.05, 2.0).unwrap();
    let field = MagneticField::functional(|x| 1.0 + 0.3 * x[0] - 0.2 * x[1] * x[1]);
    let p = assemble(&mesh, &field, 0.02).unwrap();
    assert_eq!(p.k.hermitian_defect(), 0.0);
    assert_eq!(p.m.hermitian_defect(), 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let x = random_vector(&mut rng, p.dim());
        assert!(dot(&x, &p.k.mul_vec(&x)).re >= 0.0);
    }
}

#[test]
fn field_raises_the_ground_energy() {
    let mesh = mesh_polygon(&PolygonalDomain::unit_square(), 0.05, 1.0).unwrap();
    let free = lowest_k(&assemble(&mesh, &MagneticField::constant(0.0), 0.1).unwrap(), 1).unwrap();
    let mag = lowest_k(&assemble(&mesh, &MagneticField::constant(1.0), 0.1).unwrap(), 1).unwrap();
    assert!(mag.values[0] > 0.0);
    assert!(mag.values[0] >= free.values[0] - 1e-12);
}

#[test]
fn gauge_change_moves_eigenvalues_less_than_the_error_estimate() {
    let h = 0.02;
    let mesh = layer_mesh(&PolygonalDomain::unit_square(), h);
    let fine = mesh.refine_red();
    let opts = EigenOptions { shift: Some(0.3 * h), ..Default::default() };
    let solve = |m: &TriangularMesh, f: &MagneticField| lowest_k_with(&assemble(m, f, h).unwrap(), 4, &opts).unwrap().values;
    let base = MagneticField::constant(1.0);
    let shifted = MagneticField::constant(1.0).gauge_shifted(1.0);
    let coarse = solve(&mesh, &base);
    let refined = solve(&fine, &base);
    let moved = solve(&mesh, &shifted);
    for i in 0..4 {
        let estimate = (coarse[i] - refined[i]).abs() * 4.0 / 3.0;
        assert!((moved[i] - coarse[i]).abs() < estimate, "{i}: {} vs {estimate}", moved[i] - coarse[i]);
    }
}

#[test]
fn standard_scheme_agrees_without_field() {
    let mesh = mesh_polygon(&PolygonalDomain::l_shape(), 0.05, 1.0).unwrap();
    let zero = MagneticField::constant(0.0);
    let a = assemble(&mesh, &zero, 1.0).unwrap();
    let opts = AssemblyOptions { scheme: Scheme::Standard, ..Default::default() };
    let b = assemble_with(&mesh, &zero, 1.0, &opts).unwrap();
    let d = a.k.combine(C64::new(1.0, 0.0), &b.k, C64::new(-1.0, 0.0));
    assert!(d.max_abs() < 1e-12);
}

#[test]
fn standard_scheme_converges_to_the_covariant_spectrum() {
    let h = 0.1;
    let field = MagneticField::constant(1.0);
    let opts = AssemblyOptions { scheme: Scheme::Standard, ..Default::default() };
    let mut mesh = mesh_polygon(&PolygonalDomain::unit_square(), 0.08, 1.0).unwrap();
    let mut gaps = vec![];
    for _ in 0..3 {
        let cov = lowest_k(&assemble(&mesh, &field, h).unwrap(), 3).unwrap().values;
        let std = lowest_k(&assemble_with(&mesh, &field, h, &opts).unwrap(), 3).unwrap().values;
        gaps.push(cov.iter().zip(&std).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
        mesh = mesh.refine_red();
    }
    assert!(gaps[1] < gaps[0] / 3.0 && gaps[2] < gaps[1] / 3.0, "{gaps:?}");
}

#[test]
fn files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = mesh_polygon(&PolygonalDomain::l_shape(), 0.1, 2.0).unwrap();
    let path = dir.path().join("l.mesh");
    mesh.write_text(std::fs::File::create(&path).unwrap()).unwrap();
    let back = TriangularMesh::read_text(std::io::BufReader::new(std::fs::File::open(&path).unwrap())).unwrap();
    assert_eq!(back, mesh);

    let p = assemble(&mesh, &MagneticField::constant(1.0), 0.1).unwrap();
    let (mut kb, mut mb) = (Vec::new(), Vec::new());
    write_pencil(&p, &mut kb, &mut mb).unwrap();
    assert!(String::from_utf8_lossy(&kb).starts_with("%%HermitianPencil h=0.1\n"));
    let q = read_pencil(&kb[..], &mb[..]).unwrap();
    assert_eq!(q.k, p.k);
    assert_eq!(q.m, p.m);
    assert_eq!(q.h, 0.1);
}

#[test]
fn mismatched_fields_are_rejected() {
    let mesh = mesh_polygon(&PolygonalDomain::unit_square(), 0.1, 1.0).unwrap();
    let wrong = MagneticField::with_potential(|_| 1.0, |x| [-2.0 * x[1], 0.0]);
    assert!(assemble(&mesh, &wrong, 0.1).is_err());
    let singular = MagneticField::functional(|x| 1.0 / (x[0] - 0.5));
    assert!(assemble(&mesh, &singular, 0.1).is_err());
}
