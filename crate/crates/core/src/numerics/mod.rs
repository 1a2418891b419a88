//! Dense linear algebra: data matrices, orthonormal bases, SVD, PCA and the
//! half-range display scale.

mod basis;
mod data;
mod eigen;
mod pca;
mod scale;
mod svd;

pub use basis::{
    basis_rows, orthonormality_error, orthonormalize, project, project_values,
    projector_distance, ProjectionBasis, ORTHONORMAL_TOL, RANK_TOL,
};
pub use data::DataMatrix;
pub use eigen::symmetric_eigen;
pub use pca::{pca, PcaResult};
pub use scale::{compute_half_range, HalfRange};
pub use svd::{svd, svd_full, svd_with_tol, SvdResult, DEFAULT_RANK_TOL, JACOBI_TOL};
