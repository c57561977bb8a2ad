//! Sparse Hermitian generalized eigenproblems: exact counting by inertia,
//! extraction of the lowest eigenpairs, and the counting and energy
//! functionals below a threshold.

pub mod dense;
pub mod eigen;
pub mod ldl;
pub mod ordering;
pub mod pencil;
pub mod report;
pub mod sparse;
pub mod variational;

pub use eigen::{lowest_k, lowest_k_with, EigenOptions, Eigenpairs};
pub use pencil::HermitianPencil;
pub use report::{
    count_below, count_below_detailed, energy_functional, spectral_report, spectral_report_with,
    CountResult, QueryMode, SpectralReport,
};
pub use sparse::{CsrMatrix, C64};
pub use variational::{variational_checks, VariationalReport};
