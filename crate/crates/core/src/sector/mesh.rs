use crate::error::{Error, Result};
use crate::fem2d::mesh::ARC_MARKER;
use crate::fem2d::mesher::{mesh_pslg, Pslg};
use crate::fem2d::TriangularMesh;
use std::f64::consts::PI;

/// Element growth per unit distance from the apex, relative to the apex size.
const APEX_GROWTH: f64 = 0.15;
/// Sizes never exceed this multiple of the apex size.
const MAX_GROWTH: f64 = 6.0;

/// Size field of the truncated sector in unit-field coordinates: `size` at
/// unit distance from the apex, algebraic grading `r^(grading−1)` inside the
/// unit disc, slow growth along the edges and coarsening away from them.
pub fn sector_size(alpha: f64, size: f64, grading: f64) -> impl Fn([f64; 2]) -> f64 {
    let (s, c) = alpha.sin_cos();
    move |x: [f64; 2]| {
        let r = x[0].hypot(x[1]);
        let near = if r < 1.0 {
            (r.powf(grading - 1.0)).max(0.125)
        } else {
            1.0 + APEX_GROWTH * (r - 1.0)
        };
        // distance to the two straight edges (rays from the apex)
        let d0 = if x[0] >= 0.0 { x[1].abs() } else { r };
        let proj = x[0] * c + x[1] * s;
        let d1 = if proj >= 0.0 { (x[0] * s - x[1] * c).abs() } else { r };
        let d = d0.min(d1);
        let lateral = 1.0 + 0.5 * (d - 3.0).max(0.0);
        size * (near * lateral).min(MAX_GROWTH).max(near)
    }
}

/// Triangulates the sector `{0 ≤ r ≤ radius, 0 ≤ θ ≤ alpha}`; the straight
/// edges carry markers 0 and 1, the chords of the arc [`ARC_MARKER`].
pub fn sector_mesh(alpha: f64, radius: f64, size: f64, grading: f64) -> Result<TriangularMesh> {
    if !(alpha > 0.0 && alpha < 2.0 * PI) {
        return Err(Error::InvalidParameter(format!("opening angle {alpha} not in (0, 2π)")));
    }
    if !(radius > 0.0 && size > 0.0 && grading >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "radius {radius}, size {size}, grading {grading} out of range"
        )));
    }
    let field = sector_size(alpha, size, grading);
    let arc_size = field([radius * (0.5 * alpha).cos(), radius * (0.5 * alpha).sin()]);
    let pieces = ((alpha * radius / arc_size).ceil() as usize).max(4);
    let mut vertices = vec![[0.0, 0.0]];
    let mut markers = vec![0];
    for i in 0..=pieces {
        let t = alpha * i as f64 / pieces as f64;
        vertices.push([radius * t.cos(), radius * t.sin()]);
        markers.push(if i < pieces { ARC_MARKER } else { 1 });
    }
    mesh_pslg(&Pslg { vertices, markers }, &field)
}
