use ndarray::{s, Array1, Array2, Axis};

use super::{symmetric_eigen, DataMatrix};
use crate::error::{Error, Result};

/// Principal components of a data matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaResult {
    /// `p × k` loadings, one component per column.
    pub components: Array2<f64>,
    /// Variances of all `p` components, non-increasing.
    pub explained_variance: Array1<f64>,
    /// `explained_variance` as fractions of the total.
    pub explained_ratio: Array1<f64>,
    pub center: Array1<f64>,
    /// `n × k` centered data projected onto the components.
    pub scores: Array2<f64>,
}

impl PcaResult {
    pub fn k(&self) -> usize {
        self.components.ncols()
    }

    /// Scores divided by the component standard deviations, i.e. fully sphered.
    /// Components with zero variance are left at zero.
    pub fn whitened_scores(&self) -> Array2<f64> {
        let mut w = self.scores.clone();
        for (k, mut col) in w.axis_iter_mut(Axis(1)).enumerate() {
            let sd = self.explained_variance[k].max(0.0).sqrt();
            if sd > 0.0 {
                col.mapv_inplace(|v| v / sd);
            } else {
                col.fill(0.0);
            }
        }
        w
    }

    /// Fraction of total variance captured by the first `k` components.
    pub fn cumulative_ratio(&self, k: usize) -> f64 {
        self.explained_ratio.iter().take(k).sum()
    }
}

/// Principal components from the eigendecomposition of the sample covariance
/// (divisor `n − 1`), keeping `k` components.
pub fn pca(x: &DataMatrix, k: usize) -> Result<PcaResult> {
    let (n, p) = (x.n(), x.p());
    if n < 2 {
        return Err(Error::DegenerateInput(format!(
            "pca needs at least 2 rows, got {n}"
        )));
    }
    if k == 0 || k > (n - 1).min(p) {
        return Err(Error::ConfigInvalid(format!(
            "component count {k} must be in 1..={}",
            (n - 1).min(p)
        )));
    }
    let center = x.values().mean_axis(Axis(0)).expect("n >= 2");
    let centered = &x.values() - &center.view().insert_axis(Axis(0));
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    let (vals, vecs) = symmetric_eigen(cov.view())?;
    // Rounding can leave tiny negative eigenvalues on rank-deficient input.
    let explained_variance = vals.mapv(|v| v.max(0.0));
    let total: f64 = explained_variance.sum();
    let explained_ratio = if total > 0.0 {
        explained_variance.mapv(|v| v / total)
    } else {
        Array1::from_elem(p, 1.0 / p as f64)
    };
    let components = vecs.slice(s![.., ..k]).to_owned();
    let scores = centered.dot(&components);
    Ok(PcaResult {
        components,
        explained_variance,
        explained_ratio,
        center,
        scores,
    })
}
