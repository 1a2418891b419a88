//! Correspondence analysis of a non-negative contingency table.

use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::numerics::{svd, SvdResult};

#[derive(Debug, Clone, PartialEq)]
pub struct CaResult {
    /// Row scores, `n^{1/2} D_r^{-1/2} U D^α`.
    pub r: Array2<f64>,
    /// Column scores, `n^{1/2} D_c^{-1/2} V D^{1−α}`.
    pub c: Array2<f64>,
    /// Retained singular values, strictly positive and non-increasing.
    pub sing_val: Array1<f64>,
    /// Relative contribution of each row to each dimension's inertia.
    pub row_inert: Array2<f64>,
    pub col_inert: Array2<f64>,
    /// Share of each row's reconstructed chi-square distance per dimension.
    pub row_dist: Array2<f64>,
    pub col_dist: Array2<f64>,
    pub alpha: f64,
    /// `D_r^{-1/2}(F − E)D_c^{-1/2}`.
    pub residuals: Array2<f64>,
    pub svd: SvdResult,
    pub row_sums: Array1<f64>,
    pub col_sums: Array1<f64>,
    pub total: f64,
}

impl CaResult {
    pub fn dims(&self) -> usize {
        self.sing_val.len()
    }

    /// Principal inertia per dimension, the squared singular values.
    pub fn inertia(&self) -> Array1<f64> {
        self.sing_val.mapv(|s| s * s)
    }
}

/// Fits the independence model `E = n⁻¹ D_r 1 1ᵀ D_c`, decomposes the
/// standardized residuals and scales the singular vectors by `D^α` (rows)
/// and `D^{1−α}` (columns). `α = 1` is the row principal solution, `α = 0` the
/// column principal one, and `α = 1/2` the symmetric one.
pub fn correspondence_analysis(f: ArrayView2<'_, f64>, alpha: f64) -> Result<CaResult> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::ConfigInvalid(format!("alpha must be in [0, 1], got {alpha}")));
    }
    if let Some(((i, j), v)) = f.indexed_iter().find(|(_, v)| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::DegenerateInput(format!(
            "counts must be non-negative and finite; entry ({i}, {j}) = {v}"
        )));
    }
    let row_sums = f.sum_axis(Axis(1));
    let col_sums = f.sum_axis(Axis(0));
    if let Some(i) = row_sums.iter().position(|&s| s <= 0.0) {
        return Err(Error::EmptyMargin(format!("row {i} sums to zero")));
    }
    if let Some(j) = col_sums.iter().position(|&s| s <= 0.0) {
        return Err(Error::EmptyMargin(format!("column {j} sums to zero")));
    }
    let total = row_sums.sum();

    let (nr, nc) = f.dim();
    let mut residuals = Array2::<f64>::zeros((nr, nc));
    for ((i, j), s) in residuals.indexed_iter_mut() {
        let e = row_sums[i] * col_sums[j] / total;
        *s = (f[[i, j]] - e) / (row_sums[i] * col_sums[j]).sqrt();
    }
    let dec = svd(residuals.view())?;
    let d = &dec.d;
    let root_n = total.sqrt();

    let mut r = dec.u.clone();
    for ((i, k), v) in r.indexed_iter_mut() {
        *v *= root_n / row_sums[i].sqrt() * d[k].powf(alpha);
    }
    let mut c = dec.v.clone();
    for ((j, k), v) in c.indexed_iter_mut() {
        *v *= root_n / col_sums[j].sqrt() * d[k].powf(1.0 - alpha);
    }

    let mut row_inert = r.mapv(|v| v * v);
    for ((i, k), v) in row_inert.indexed_iter_mut() {
        *v *= row_sums[i] / total / d[k].powf(2.0 * alpha);
    }
    let mut col_inert = c.mapv(|v| v * v);
    for ((j, k), v) in col_inert.indexed_iter_mut() {
        *v *= col_sums[j] / total / d[k].powf(2.0 * (1.0 - alpha));
    }

    Ok(CaResult {
        row_dist: distance_shares(&r),
        col_dist: distance_shares(&c),
        r,
        c,
        sing_val: dec.d.clone(),
        row_inert,
        col_inert,
        alpha,
        residuals,
        svd: dec,
        row_sums,
        col_sums,
        total,
    })
}

/// Squared scores normalized to sum to one per row. A row lying exactly at
/// the origin gets equal shares.
fn distance_shares(scores: &Array2<f64>) -> Array2<f64> {
    let k = scores.ncols();
    let mut out = scores.mapv(|v| v * v);
    for mut row in out.axis_iter_mut(Axis(0)) {
        let s = row.sum();
        if s > 0.0 {
            row.mapv_inplace(|v| v / s);
        } else if k > 0 {
            row.fill(1.0 / k as f64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn independent_table_has_no_dimensions() {
        let r = array![2.0, 3.0, 5.0];
        let c = array![1.0, 4.0];
        let n = 10.0;
        let f = Array2::from_shape_fn((3, 2), |(i, j)| r[i] * c[j] / n * 7.0);
        let out = correspondence_analysis(f.view(), 0.5).unwrap();
        assert_eq!(out.dims(), 0);
        assert_eq!(out.r.dim(), (3, 0));
        assert_eq!(out.c.dim(), (2, 0));
    }

    #[test]
    fn diagonal_two_by_two_by_hand() {
        // Residuals are (1/2)[[1, −1], [−1, 1]]: one singular value of 1.
        let f = array![[2.0, 0.0], [0.0, 2.0]];
        let out = correspondence_analysis(f.view(), 0.5).unwrap();
        assert_eq!(out.dims(), 1);
        assert!((out.sing_val[0] - 1.0).abs() < 1e-14);
        let sign = out.r[[0, 0]].signum();
        for (got, want) in out.r.column(0).iter().zip([1.0, -1.0]) {
            assert!((got * sign - want).abs() < 1e-14);
        }
        let csign = out.c[[0, 0]].signum();
        assert_eq!(sign, csign);
        for (got, want) in out.c.column(0).iter().zip([1.0, -1.0]) {
            assert!((got * csign - want).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_row_is_an_empty_margin() {
        let f = array![[1.0, 2.0], [0.0, 0.0]];
        assert!(matches!(
            correspondence_analysis(f.view(), 0.5),
            Err(Error::EmptyMargin(_))
        ));
    }

    #[test]
    fn negative_counts_are_rejected() {
        let f = array![[1.0, -2.0], [3.0, 4.0]];
        assert!(correspondence_analysis(f.view(), 0.5).is_err());
    }

    #[test]
    fn inertia_contributions_are_squared_singular_vectors() {
        let f = array![[6.0, 2.0, 2.0], [2.0, 0.0, 3.0], [1.0, 0.0, 2.0], [7.0, 1.0, 0.5]];
        for alpha in [0.0, 0.5, 1.0] {
            let out = correspondence_analysis(f.view(), alpha).unwrap();
            for k in 0..out.dims() {
                let col_total: f64 = out.row_inert.column(k).sum();
                assert!((col_total - 1.0).abs() < 1e-12);
                let col_total: f64 = out.col_inert.column(k).sum();
                assert!((col_total - 1.0).abs() < 1e-12);
            }
        }
    }
}
