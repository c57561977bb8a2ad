mod common;

use common::galerkin;
use corner_spectra::model1d::{
    cylinder_spectrum, eigenfunction, mu, mu2_floor, mu2_floor_with, theta0, CylinderParams, FdOrder,
    ModelOperatorParams,
};

#[test]
fn oracle_reproduces_even_oscillator_levels() {
    let ev = galerkin::eigenvalues(0.0, 10.0, 80, 3);
    for (v, exact) in ev.iter().zip([1.0, 5.0, 9.0]) {
        assert!((v - exact).abs() < 1e-10, "{v} vs {exact}");
    }
}

#[test]
fn oracle_is_resolved() {
    for xi in [-1.0, 0.0, 0.77, 2.0, 4.0] {
        let (_, spread) = galerkin::mu(2, xi);
        assert!(spread < 1e-10, "ξ = {xi}: spread {spread}");
    }
}

#[test]
fn finite_differences_match_oracle() {
    for xi in [-1.5, -0.3, 0.0, 0.5, 0.77, 1.3, 3.0, 6.0] {
        for j in 1..=3 {
            let fd = mu(j, &ModelOperatorParams::new(xi)).unwrap();
            let (exact, _) = galerkin::mu(j, xi);
            assert!(
                (fd.value - exact).abs() < 1e-7 * exact.max(1.0),
                "ξ = {xi}, j = {j}: {} vs {exact}",
                fd.value
            );
        }
    }
}

#[test]
fn fourth_order_matches_oracle() {
    for xi in [0.0, 0.77, 2.0] {
        let p = ModelOperatorParams::with_spacing(xi, 0.01, FdOrder::Fourth);
        let fd = mu(1, &p).unwrap();
        let (exact, _) = galerkin::mu(1, xi);
        assert!((fd.value - exact).abs() < 1e-8, "ξ = {xi}: {} vs {exact}", fd.value);
    }
}

#[test]
fn theta0_matches_oracle() {
    let t = theta0((0.0, 2.0), 1e-9).unwrap();
    let (oracle_theta, oracle_xi) = galerkin::theta0(0.6, 0.9);
    assert!((t.theta0 - oracle_theta).abs() < 1e-6, "{t:?} vs {oracle_theta}");
    assert!((t.xi0 - oracle_xi).abs() < 1e-4);
    assert!((t.theta0 - t.xi0 * t.xi0).abs() < 1e-5);
}

#[test]
fn theta0_is_self_convergent() {
    let a = corner_spectra::model1d::theta0_with((0.0, 2.0), 1e-9, 0.005, FdOrder::Second).unwrap();
    let b = corner_spectra::model1d::theta0_with((0.0, 2.0), 1e-9, 0.0025, FdOrder::Second).unwrap();
    assert!((a.theta0 - b.theta0).abs() < 1e-6);
    assert!((a.xi0 - b.xi0).abs() < 1e-5);
}

#[test]
fn truncation_monotonicity() {
    let mut last = f64::INFINITY;
    for t in [3.0, 3.5, 4.0, 5.0, 6.0, 8.0] {
        let p = ModelOperatorParams {
            xi: -0.2,
            truncation_length: t,
            grid_points: (t / 0.005) as usize + 1,
            order: FdOrder::Second,
        };
        let v = mu(1, &p).unwrap().discrete;
        assert!(v <= last + 1e-13, "T = {t}: {v} > {last}");
        last = v;
    }
}

#[test]
fn second_level_floor() {
    let grid: Vec<f64> = (0..=160).map(|i| -2.0 + 0.05 * i as f64).collect();
    let coarse = mu2_floor(&grid).unwrap();
    assert!(coarse > 1.0);
    let refined = mu2_floor_with(&grid, 0.0025, FdOrder::Second).unwrap();
    assert!((refined - coarse).abs() <= 1e-4);
}

#[test]
fn eigenfunction_defect_is_small() {
    for xi in [0.0, 0.77, 2.5] {
        for p in 1..=2 {
            let f = eigenfunction(p, &ModelOperatorParams::new(xi)).unwrap();
            assert!(f.residual < 1e-6);
            assert!((f.l2_norm_squared() - 1.0).abs() < 1e-10);
            assert!(f.values[0] > 0.0);
        }
    }
}

#[test]
fn cylinder_counting_bound_over_parameter_grid() {
    for &s in &[0.5, 1.0, 3.0] {
        for &t in &[3.0, 6.0] {
            for &h in &[0.01, 0.003] {
                for &b in &[0.25f64, 0.5, 1.0] {
                    for &lambda in &[0.0, 0.05, 0.1] {
                        // the bound needs T ≥ √b T₀
                        if t < b.sqrt() * 3.0 {
                            continue;
                        }
                        let c = cylinder_spectrum(&CylinderParams {
                            s,
                            t,
                            h,
                            b,
                            lambda,
                            mode_range: None,
                        })
                        .unwrap();
                        assert!(c.bound_satisfied, "{s} {t} {h} {b} {lambda}: {}", c.count);
                        assert!(c.energy_bound_satisfied);
                    }
                }
            }
        }
    }
}

#[test]
fn strong_field_cylinder_exceeds_unscaled_bound() {
    // for b > 1 the reduced box has length √b T and holds about b S T / (2π √h)
    // bulk modes, so only the b-scaled bound can hold
    let c = cylinder_spectrum(&CylinderParams {
        s: 0.5,
        t: 6.0,
        h: 0.01,
        b: 2.0,
        lambda: 0.05,
        mode_range: None,
    })
    .unwrap();
    assert!(!c.bound_satisfied);
    assert!(c.scaled_bound_satisfied, "{} > {}", c.count, c.scaled_bound_rhs);
}
