use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use super::svd::largest_magnitude_entry;
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 100;

/// Eigendecomposition of a real symmetric matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in decreasing order and the matching eigenvectors as
/// columns, each signed so its largest-magnitude entry is positive. Sweeps
/// stop once the off-diagonal Frobenius mass is below `1e-12` of the total.
pub fn symmetric_eigen(m: ArrayView2<'_, f64>) -> Result<(Array1<f64>, Array2<f64>)> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimensionMismatch {
            expected: r,
            found: c,
        });
    }
    if let Some(v) = m.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("eigen input contains {v}")));
    }
    let n = r;
    let mut a = m.to_owned();
    // Symmetrize exactly; callers pass covariance-like input.
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (a[[i, j]] + a[[j, i]]);
            a[[i, j]] = avg;
            a[[j, i]] = avg;
        }
    }
    // Rows of `vt` are eigenvectors.
    let mut vt = Array2::<f64>::eye(n);
    let total: f64 = a.iter().map(|v| v * v).sum::<f64>().sqrt();

    let mut converged = n < 2 || total == 0.0;
    let mut sweeps = 0;
    while !converged && sweeps < MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[[p, q]];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = t * cs;
                // A ← JᵀAJ on rows and columns p, q.
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = cs * akp - sn * akq;
                    a[[k, q]] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = cs * apk - sn * aqk;
                    a[[q, k]] = sn * apk + cs * aqk;
                }
                let (mut vp, mut vq) = vt.multi_slice_mut((s![p, ..], s![q, ..]));
                ndarray::Zip::from(&mut vp).and(&mut vq).for_each(|x, y| {
                    let (xp, yq) = (*x, *y);
                    *x = cs * xp - sn * yq;
                    *y = sn * xp + cs * yq;
                });
            }
        }
        let off: f64 = a
            .indexed_iter()
            .filter(|((i, j), _)| i != j)
            .map(|(_, v)| v * v)
            .sum::<f64>()
            .sqrt();
        converged = off <= 1e-12 * total;
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps });
    }

    let vals: Array1<f64> = (0..n).map(|i| a[[i, i]]).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| vals[y].total_cmp(&vals[x]).then(x.cmp(&y)));
    let vals = vals.select(Axis(0), &order);
    let mut vecs = vt.select(Axis(0), &order).reversed_axes();
    for k in 0..n {
        if largest_magnitude_entry(vecs.column(k).iter().copied()) < 0.0 {
            vecs.column_mut(k).mapv_inplace(|x| -x);
        }
    }
    Ok((vals, vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn two_by_two_closed_form() {
        let m = array![[2.0, 1.0], [1.0, 2.0]];
        let (vals, vecs) = symmetric_eigen(m.view()).unwrap();
        assert!((vals[0] - 3.0).abs() < 1e-14);
        assert!((vals[1] - 1.0).abs() < 1e-14);
        let h = 0.5f64.sqrt();
        assert!((vecs[[0, 0]] - h).abs() < 1e-14 && (vecs[[1, 0]] - h).abs() < 1e-14);
    }

    #[test]
    fn diagonal_is_sorted() {
        let m = array![[1.0, 0.0, 0.0], [0.0, 5.0, 0.0], [0.0, 0.0, 3.0]];
        let (vals, vecs) = symmetric_eigen(m.view()).unwrap();
        assert_eq!(vals.to_vec(), vec![5.0, 3.0, 1.0]);
        assert_eq!(vecs.column(0).to_vec(), vec![0.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_non_square() {
        assert!(symmetric_eigen(Array2::<f64>::zeros((2, 3)).view()).is_err());
    }
}
