use ndarray::{Array2, ArrayView2, Axis};

use super::DataMatrix;
use crate::error::{Error, Result};

/// Residual norm below which a column is treated as linearly dependent.
pub const RANK_TOL: f64 = 1e-12;

/// Maximum absolute deviation of `AᵀA` from the identity accepted by
/// [`ProjectionBasis::new`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;

/// A `p × d` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionBasis {
    columns: Array2<f64>,
}

impl ProjectionBasis {
    /// Wraps a matrix that is already orthonormal; fails otherwise.
    pub fn new(columns: Array2<f64>) -> Result<Self> {
        let (p, d) = columns.dim();
        if d == 0 || d > p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: d,
            });
        }
        let dev = orthonormality_error(columns.view());
        if !(dev < ORTHONORMAL_TOL) {
            return Err(Error::DegenerateInput(format!(
                "columns are not orthonormal (max |AᵀA - I| = {dev:e})"
            )));
        }
        Ok(Self { columns })
    }

    pub(crate) fn new_unchecked(columns: Array2<f64>) -> Self {
        Self { columns }
    }

    /// The first `d` columns of the `p × p` identity.
    pub fn identity(p: usize, d: usize) -> Result<Self> {
        if d == 0 || d > p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: d,
            });
        }
        let mut m = Array2::zeros((p, d));
        for k in 0..d {
            m[[k, k]] = 1.0;
        }
        Ok(Self { columns: m })
    }

    pub fn p(&self) -> usize {
        self.columns.nrows()
    }

    pub fn d(&self) -> usize {
        self.columns.ncols()
    }

    pub fn matrix(&self) -> ArrayView2<'_, f64> {
        self.columns.view()
    }

    pub fn into_matrix(self) -> Array2<f64> {
        self.columns
    }

    /// Orthogonal projector `A·Aᵀ` onto the spanned subspace.
    pub fn projector(&self) -> Array2<f64> {
        self.columns.dot(&self.columns.t())
    }

    /// `max |AᵀA − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        orthonormality_error(self.columns.view())
    }
}

/// `max |MᵀM − I|` for any `p × d` matrix.
pub fn orthonormality_error(m: ArrayView2<'_, f64>) -> f64 {
    let gram = m.t().dot(&m);
    gram.indexed_iter()
        .map(|((i, j), v)| (v - if i == j { 1.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max)
}

/// Frobenius distance between the orthogonal projectors of two bases; zero iff
/// they span the same subspace.
pub fn projector_distance(a: &ProjectionBasis, b: &ProjectionBasis) -> f64 {
    let diff = a.projector() - b.projector();
    diff.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Gram–Schmidt orthonormalization of the columns of `m` (`p × d`, `p ≥ d`).
///
/// Each column is orthogonalized twice against the accepted ones, which keeps
/// the result orthonormal to rounding even for badly conditioned input. The
/// first output column points along the first input column.
pub fn orthonormalize(m: ArrayView2<'_, f64>) -> Result<ProjectionBasis> {
    let (p, d) = m.dim();
    if d == 0 || d > p {
        return Err(Error::DimensionMismatch {
            expected: p,
            found: d,
        });
    }
    let mut q = m.to_owned();
    for k in 0..d {
        for _pass in 0..2 {
            for j in 0..k {
                let proj = q.column(j).dot(&q.column(k));
                let qj = q.column(j).to_owned();
                q.column_mut(k).scaled_add(-proj, &qj);
            }
        }
        let norm = q.column(k).dot(&q.column(k)).sqrt();
        if !(norm >= RANK_TOL) {
            return Err(Error::RankDeficient {
                column: k,
                residual: norm,
            });
        }
        q.column_mut(k).mapv_inplace(|v| v / norm);
    }
    Ok(ProjectionBasis { columns: q })
}

/// Projects every row of `x` onto the basis: row `i` of the result is `Aᵀ·xᵢ`.
pub fn project(x: &DataMatrix, basis: &ProjectionBasis) -> Result<Array2<f64>> {
    project_values(x.values(), basis)
}

pub fn project_values(x: ArrayView2<'_, f64>, basis: &ProjectionBasis) -> Result<Array2<f64>> {
    if x.ncols() != basis.p() {
        return Err(Error::DimensionMismatch {
            expected: basis.p(),
            found: x.ncols(),
        });
    }
    Ok(x.dot(&basis.columns))
}

/// Stacks the basis as `d` rows of `p` loadings, the layout used on the wire.
pub fn basis_rows(basis: &ProjectionBasis) -> Vec<Vec<f64>> {
    basis
        .columns
        .axis_iter(Axis(1))
        .map(|c| c.to_vec())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn identity_columns_come_back_unchanged() {
        let m = ProjectionBasis::identity(4, 2).unwrap().into_matrix();
        let q = orthonormalize(m.view()).unwrap();
        assert_eq!(q.matrix(), m.view());
    }

    #[test]
    fn gram_schmidt_by_hand() {
        let m = array![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let q = orthonormalize(m.view()).unwrap();
        let s2 = 2f64.sqrt();
        let s6 = 6f64.sqrt();
        let expected = array![[1.0 / s2, -1.0 / s6], [1.0 / s2, 1.0 / s6], [0.0, 2.0 / s6]];
        for (a, b) in q.matrix().iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(q.orthonormality_error() < 1e-14);
    }

    #[test]
    fn collinear_columns_are_rank_deficient() {
        let m = array![[1.0, 2.0], [0.0, 0.0]];
        assert!(matches!(
            orthonormalize(m.view()),
            Err(Error::RankDeficient { column: 1, .. })
        ));
    }

    #[test]
    fn wider_than_tall_is_rejected() {
        let m = Array2::<f64>::zeros((2, 3));
        assert!(matches!(
            orthonormalize(m.view()),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn coordinate_projection_keeps_leading_coordinates() {
        let x = DataMatrix::from_rows(&[vec![1.0, 2.0, 3.0], vec![-4.0, 5.0, 6.0]]).unwrap();
        let a = ProjectionBasis::identity(3, 2).unwrap();
        let y = project(&x, &a).unwrap();
        assert_eq!(y, array![[1.0, 2.0], [-4.0, 5.0]]);
    }

    #[test]
    fn zero_data_projects_to_zero() {
        let x = DataMatrix::new(Array2::zeros((5, 3))).unwrap();
        let a = orthonormalize(array![[1.0, 0.0], [1.0, 1.0], [0.0, 1.0]].view()).unwrap();
        assert!(project(&x, &a).unwrap().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn rotation_by_quarter_pi_round_trips() {
        let t = std::f64::consts::FRAC_PI_4;
        let a = ProjectionBasis::new(array![[t.cos(), -t.sin()], [t.sin(), t.cos()]]).unwrap();
        let x = DataMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 2.0], vec![3.0, -1.0]]).unwrap();
        let y = project(&x, &a).unwrap();
        // Direct multiply oracle: (1,0) rotated by -π/4.
        assert!((y[[0, 0]] - t.cos()).abs() < 1e-15);
        assert!((y[[0, 1]] + t.sin()).abs() < 1e-15);
        let back = y.dot(&a.matrix().t());
        for (u, v) in back.iter().zip(x.values().iter()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn mismatched_projection_is_an_error() {
        let x = DataMatrix::new(Array2::zeros((2, 3))).unwrap();
        let a = ProjectionBasis::identity(4, 2).unwrap();
        assert!(matches!(
            project(&x, &a),
            Err(Error::DimensionMismatch {
                expected: 4,
                found: 3
            })
        ));
    }
}
