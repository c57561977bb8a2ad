//! Piecewise-linear assembly of `∫|(h∇ − iA)u|²` and `∫|u|²`.
//!
//! The default scheme works element by element in the radial gauge about
//! the element centroid: on a triangle `T` with centroid `c`,
//! `A = ∇(∫_c^x A·dl) + Ã` with `Ã(x) = (∫₀¹ s B(c + s(x − c)) ds)·(x − c)^⊥`.
//! Nodal unknowns are rotated by the phases `(1/h)∫_c^{x_j} A·dl`, so the
//! discrete spectrum is exactly invariant under gauge changes and the
//! oscillation `e^{iA·x/h}` never has to be resolved by the mesh.

use super::field::MagneticField;
use super::mesh::{TriangularMesh, ARC_MARKER};
use super::domain::PolygonalDomain;
use crate::error::{Error, Result};
use crate::spectra::{CsrMatrix, HermitianPencil, C64};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Element-local radial gauge with nodal phase factors.
    Covariant,
    /// Plain P1 with `A` sampled at the quadrature points; real mass matrix.
    Standard,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Quadrature {
    /// Degree 2, three interior points.
    ThreePoint,
    /// Degree 4, six points.
    SixPoint,
}

impl Quadrature {
    /// Barycentric points and weights (weights sum to 1).
    pub fn rule(self) -> Vec<([f64; 3], f64)> {
        match self {
            Quadrature::ThreePoint => {
                let (a, b) = (2.0 / 3.0, 1.0 / 6.0);
                vec![([a, b, b], 1.0 / 3.0), ([b, a, b], 1.0 / 3.0), ([b, b, a], 1.0 / 3.0)]
            }
            Quadrature::SixPoint => {
                let (a1, w1) = (0.445948490915965, 0.223381589678011);
                let (a2, w2) = (0.091576213509771, 0.109951743655322);
                let (b1, b2) = (1.0 - 2.0 * a1, 1.0 - 2.0 * a2);
                vec![
                    ([b1, a1, a1], w1),
                    ([a1, b1, a1], w1),
                    ([a1, a1, b1], w1),
                    ([b2, a2, a2], w2),
                    ([a2, b2, a2], w2),
                    ([a2, a2, b2], w2),
                ]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssemblyOptions {
    pub scheme: Scheme,
    pub quadrature: Quadrature,
    /// Boundary markers whose nodes are eliminated.
    pub dirichlet_markers: Vec<i32>,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        AssemblyOptions {
            scheme: Scheme::Covariant,
            quadrature: Quadrature::ThreePoint,
            dirichlet_markers: vec![ARC_MARKER],
        }
    }
}

impl AssemblyOptions {
    /// Dirichlet on the domain's marked edges, Neumann elsewhere.
    pub fn for_domain(domain: &PolygonalDomain) -> Self {
        AssemblyOptions {
            dirichlet_markers: domain.dirichlet_edges.iter().map(|&e| e as i32).collect(),
            ..Default::default()
        }
    }
}

type ElementMatrix = [[C64; 3]; 3];

/// Element stiffness and mass for triangle `t`, both Hermitian by construction.
pub fn element_matrices(
    mesh: &TriangularMesh,
    t: usize,
    field: &MagneticField,
    h: f64,
    opts: &AssemblyOptions,
) -> (ElementMatrix, ElementMatrix) {
    let p = mesh.vertices(t);
    let area = mesh.area(t);
    // gradients of the barycentric coordinates
    let grad: [[f64; 2]; 3] = std::array::from_fn(|k| {
        let a = p[(k + 1) % 3];
        let b = p[(k + 2) % 3];
        [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)]
    });
    let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
    let rule = opts.quadrature.rule();
    let mut stiff_re = [[0.0; 3]; 3];
    // t[i][j] = ∫ N_i (a·∇N_j), the antisymmetric part gives the cross term
    let mut cross = [[0.0; 3]; 3];
    let mut potential = [[0.0; 3]; 3];
    for (lam, w) in &rule {
        let x = [
            lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
            lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
        ];
        let a = match opts.scheme {
            Scheme::Covariant => {
                let beta = field.radial_weight(c, x);
                [-beta * (x[1] - c[1]), beta * (x[0] - c[0])]
            }
            Scheme::Standard => field.a(x),
        };
        let a2 = a[0] * a[0] + a[1] * a[1];
        for i in 0..3 {
            for j in 0..3 {
                cross[i][j] += w * lam[i] * (a[0] * grad[j][0] + a[1] * grad[j][1]);
                potential[i][j] += w * a2 * lam[i] * lam[j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..3 {
            stiff_re[i][j] = h * h * (grad[i][0] * grad[j][0] + grad[i][1] * grad[j][1]);
        }
    }
    let phase: [f64; 3] = match opts.scheme {
        Scheme::Covariant => std::array::from_fn(|j| field.line_integral(c, p[j]) / h),
        Scheme::Standard => [0.0; 3],
    };
    let zero = C64::new(0.0, 0.0);
    let mut k = [[zero; 3]; 3];
    let mut m = [[zero; 3]; 3];
    for i in 0..3 {
        k[i][i] = C64::new(area * (stiff_re[i][i] + potential[i][i]), 0.0);
        m[i][i] = C64::new(area / 6.0, 0.0);
        for j in i + 1..3 {
            let re = area * (stiff_re[i][j] + 0.5 * (potential[i][j] + potential[j][i]));
            let im = area * h * (cross[i][j] - cross[j][i]);
            let rot = C64::from_polar(1.0, phase[i] - phase[j]);
            let kij = C64::new(re, im) * rot;
            let mij = C64::new(area / 12.0, 0.0) * rot;
            k[i][j] = kij;
            k[j][i] = kij.conj();
            m[i][j] = mij;
            m[j][i] = mij.conj();
        }
    }
    (k, m)
}

pub fn assemble(mesh: &TriangularMesh, field: &MagneticField, h: f64) -> Result<HermitianPencil> {
    assemble_with(mesh, field, h, &AssemblyOptions::default())
}

pub fn assemble_with(
    mesh: &TriangularMesh,
    field: &MagneticField,
    h: f64,
    opts: &AssemblyOptions,
) -> Result<HermitianPencil> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!("h = {h} must be positive")));
    }
    if mesh.triangles.is_empty() {
        return Err(Error::Geometry("empty mesh".into()));
    }
    check_field(mesh, field)?;
    let fixed = mesh.boundary_nodes(|m| opts.dirichlet_markers.contains(&m));
    let mut dof_map: Vec<Option<usize>> = vec![None; mesh.nodes.len()];
    let mut n = 0;
    let mut is_fixed = vec![false; mesh.nodes.len()];
    for &f in &fixed {
        is_fixed[f] = true;
    }
    for (i, d) in dof_map.iter_mut().enumerate() {
        if !is_fixed[i] {
            *d = Some(n);
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::Geometry("every node is constrained".into()));
    }
    let elements: Vec<(ElementMatrix, ElementMatrix)> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| element_matrices(mesh, t, field, h, opts))
        .collect();
    let mut kt = Vec::with_capacity(9 * elements.len());
    let mut mt = Vec::with_capacity(9 * elements.len());
    for (t, (ke, me)) in elements.iter().enumerate() {
        let dofs = mesh.triangles[t].map(|v| dof_map[v]);
        for i in 0..3 {
            let Some(di) = dofs[i] else { continue };
            kt.push((di, di, ke[i][i]));
            mt.push((di, di, me[i][i]));
            for j in i + 1..3 {
                let Some(dj) = dofs[j] else { continue };
                kt.push((di, dj, ke[i][j]));
                kt.push((dj, di, ke[j][i]));
                mt.push((di, dj, me[i][j]));
                mt.push((dj, di, me[j][i]));
            }
        }
    }
    let k = CsrMatrix::from_triplets(n, n, &kt);
    let m = CsrMatrix::from_triplets(n, n, &mt);
    assert_eq!(k.hermitian_defect(), 0.0, "assembled stiffness is not Hermitian");
    assert_eq!(m.hermitian_defect(), 0.0, "assembled mass is not Hermitian");
    HermitianPencil::new(k, m, dof_map, h)
}

fn check_field(mesh: &TriangularMesh, field: &MagneticField) -> Result<()> {
    if let Some(i) = mesh.nodes.iter().position(|&x| {
        let a = field.a(x);
        !(field.b(x).is_finite() && a[0].is_finite() && a[1].is_finite())
    }) {
        return Err(Error::FieldMismatch(format!(
            "field is not finite at node {i} {:?}",
            mesh.nodes[i]
        )));
    }
    // curl check on up to 512 element centroids
    let stride = (mesh.triangles.len() / 512).max(1);
    let samples: Vec<[f64; 2]> = (0..mesh.triangles.len())
        .step_by(stride)
        .map(|t| {
            let p = mesh.vertices(t);
            [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
        })
        .collect();
    let scale = samples.iter().map(|&x| field.b(x).abs()).fold(1.0, f64::max);
    let defect = field.curl_defect(&samples);
    if defect > 1e-8 * scale {
        return Err(Error::FieldMismatch(format!("curl A − B = {defect:e} on the mesh")));
    }
    Ok(())
}

/// `Σ_T ∫_T |(h∇ − iÃ)v|²` for the element-local interpolant of `u`, by a
/// high-order rule; `u` is indexed by node.
pub fn quadratic_form(mesh: &TriangularMesh, field: &MagneticField, h: f64, u: &[C64]) -> f64 {
    let rule = Quadrature::SixPoint.rule();
    (0..mesh.triangles.len())
        .map(|t| {
            let p = mesh.vertices(t);
            let area = mesh.area(t);
            let c = [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0];
            let tri = mesh.triangles[t];
            let v: [C64; 3] = std::array::from_fn(|j| {
                u[tri[j]] * C64::from_polar(1.0, -field.line_integral(c, p[j]) / h)
            });
            let grad: [[f64; 2]; 3] = std::array::from_fn(|k| {
                let a = p[(k + 1) % 3];
                let b = p[(k + 2) % 3];
                [(a[1] - b[1]) / (2.0 * area), (b[0] - a[0]) / (2.0 * area)]
            });
            let gv = [
                v[0] * grad[0][0] + v[1] * grad[1][0] + v[2] * grad[2][0],
                v[0] * grad[0][1] + v[1] * grad[1][1] + v[2] * grad[2][1],
            ];
            rule.iter()
                .map(|(lam, w)| {
                    let x = [
                        lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                        lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                    ];
                    let beta = field.radial_weight(c, x);
                    let a = [-beta * (x[1] - c[1]), beta * (x[0] - c[0])];
                    let val = v[0] * lam[0] + v[1] * lam[1] + v[2] * lam[2];
                    let d0 = gv[0] * h - C64::new(0.0, a[0]) * val;
                    let d1 = gv[1] * h - C64::new(0.0, a[1]) * val;
                    w * area * (d0.norm_sqr() + d1.norm_sqr())
                })
                .sum::<f64>()
        })
        .sum()
}

/// Embeds a dof vector back into node indexing (eliminated nodes are zero).
pub fn to_nodes(pencil: &HermitianPencil, x: &[C64]) -> Vec<C64> {
    pencil
        .dof_map
        .iter()
        .map(|d| d.map_or(C64::new(0.0, 0.0), |i| x[i]))
        .collect()
}
