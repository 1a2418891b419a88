//! Embedding methods: exact t-SNE, PCA layouts and correspondence analysis.

mod ca;
mod tsne;

use ndarray::Array2;

use crate::error::Result;
use crate::numerics::{pca, DataMatrix};

pub use ca::{correspondence_analysis, CaResult};
pub use tsne::{
    calibrate_sigmas, kl_loss, loss_terms, low_dim_affinities, pairwise_sq_dists,
    prepare_input, run_tsne, symmetrize, tsne_gradient, Affinities, Calibration, LossTerms,
    TsneConfig, TsneInit, TsneModel, ENTROPY_TOL_BITS, MAX_BISECTION_STEPS, Q_FLOOR,
};

/// The first `d` principal component scores.
pub fn pca_embed(x: &DataMatrix, d: usize) -> Result<Array2<f64>> {
    Ok(pca(x, d)?.scores)
}
