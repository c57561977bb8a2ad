//! Polygonal domains, triangular meshes and assembly of the magnetic
//! stiffness and mass matrices.

pub mod assemble;
pub mod domain;
pub mod field;
pub mod matrix_market;
pub mod mesh;
pub mod mesher;

pub use assemble::{assemble, assemble_with, AssemblyOptions, Quadrature, Scheme};
pub use domain::PolygonalDomain;
pub use field::{FieldKind, FieldSpec, MagneticField};
pub use mesh::{BoundaryEdge, MeshQuality, TriangularMesh, ARC_MARKER};
pub use mesher::{mesh_polygon, mesh_pslg, mesh_with_field, CornerGrading, Pslg, SizeField};
