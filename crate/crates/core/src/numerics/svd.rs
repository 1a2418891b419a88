//! One-sided (Hestenes) Jacobi singular value decomposition.
//!
//! Columns of a working copy are rotated pairwise until every pair is
//! orthogonal to a relative tolerance; the accumulated rotations form `V`, the
//! column norms are the singular values and the normalized columns form `U`.
//! Accurate to working precision at the sizes this crate deals with (a few
//! thousand rows, tens of columns).

use ndarray::{s, Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Relative off-diagonal tolerance at which a column pair counts as orthogonal.
pub const JACOBI_TOL: f64 = 1e-12;

/// Singular values at or below this are dropped by [`svd`].
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 80;

/// Thin SVD `M = U·diag(D)·Vᵀ` restricted to singular values above `rank_tol`.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    pub u: Array2<f64>,
    pub d: Array1<f64>,
    pub v: Array2<f64>,
    pub rank_tol: f64,
}

impl SvdResult {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    pub fn reconstruct(&self) -> Array2<f64> {
        let ud = &self.u * &self.d.view().insert_axis(Axis(0));
        ud.dot(&self.v.t())
    }
}

/// SVD with the default rank tolerance.
pub fn svd(m: ArrayView2<'_, f64>) -> Result<SvdResult> {
    svd_with_tol(m, DEFAULT_RANK_TOL)
}

pub fn svd_with_tol(m: ArrayView2<'_, f64>, rank_tol: f64) -> Result<SvdResult> {
    let (u, d, v) = svd_full(m)?;
    let keep = d.iter().take_while(|&&s| s > rank_tol).count();
    Ok(SvdResult {
        u: u.slice(s![.., ..keep]).to_owned(),
        d: d.slice(s![..keep]).to_owned(),
        v: v.slice(s![.., ..keep]).to_owned(),
        rank_tol,
    })
}

/// Unfiltered thin SVD of an `r × c` matrix: `U` is `r × k`, `V` is `c × k`
/// with `k = min(r, c)`, both with orthonormal columns even where singular
/// values vanish. Singular values are sorted descending and each pair of
/// singular vectors is signed so the largest-magnitude entry of the `U`
/// column is positive.
pub fn svd_full(m: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    if let Some(v) = m.iter().find(|v| !v.is_finite()) {
        return Err(Error::NonFinite(format!("svd input contains {v}")));
    }
    let (r, c) = m.dim();
    if r == 0 || c == 0 {
        return Err(Error::DegenerateInput("svd of an empty matrix".into()));
    }
    if r >= c {
        tall_svd(m)
    } else {
        // Mᵀ = U'·D·V'ᵀ, so M = V'·D·U'ᵀ.
        let (ut, d, vt) = tall_svd(m.t())?;
        Ok(canonical_order(vt, d, ut))
    }
}

fn tall_svd(m: ArrayView2<'_, f64>) -> Result<(Array2<f64>, Array1<f64>, Array2<f64>)> {
    let (r, c) = m.dim();
    // Columns of M stored as contiguous rows.
    let mut cols = m.t().to_owned();
    let mut vt = Array2::<f64>::eye(c);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..c {
            for j in (i + 1)..c {
                let (alpha, beta, gamma) = {
                    let a = cols.row(i);
                    let b = cols.row(j);
                    (a.dot(&a), b.dot(&b), a.dot(&b))
                };
                if gamma == 0.0 || gamma.abs() <= JACOBI_TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                rotate_rows(&mut cols, i, j, cs, sn);
                rotate_rows(&mut vt, i, j, cs, sn);
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence { sweeps: MAX_SWEEPS });
    }

    let d: Array1<f64> = cols.axis_iter(Axis(0)).map(|c| c.dot(&c).sqrt()).collect();
    let mut u = Array2::<f64>::zeros((r, c));
    for k in 0..c {
        if d[k] > 0.0 && d[k].is_normal() {
            let col = cols.row(k).mapv(|v| v / d[k]);
            u.column_mut(k).assign(&col);
        }
    }
    let v = vt.t().to_owned();
    let (mut u, d, v) = canonical_order(u, d, v);
    complete_orthonormal(&mut u, &d);
    Ok((u, d, v))
}

fn rotate_rows(m: &mut Array2<f64>, i: usize, j: usize, cs: f64, sn: f64) {
    let (mut a, mut b) = m.multi_slice_mut((s![i, ..], s![j, ..]));
    ndarray::Zip::from(&mut a).and(&mut b).for_each(|x, y| {
        let (xi, yi) = (*x, *y);
        *x = cs * xi - sn * yi;
        *y = sn * xi + cs * yi;
    });
}

/// Sorts singular triplets by decreasing value and applies the sign rule.
fn canonical_order(
    u: Array2<f64>,
    d: Array1<f64>,
    v: Array2<f64>,
) -> (Array2<f64>, Array1<f64>, Array2<f64>) {
    let mut order: Vec<usize> = (0..d.len()).collect();
    order.sort_by(|&a, &b| d[b].total_cmp(&d[a]).then(a.cmp(&b)));
    let mut u = u.select(Axis(1), &order);
    let d = d.select(Axis(0), &order);
    let mut v = v.select(Axis(1), &order);
    for k in 0..d.len() {
        // Sign by U when it is populated, otherwise by V.
        let col = if u.column(k).iter().any(|&x| x != 0.0) {
            u.column(k)
        } else {
            v.column(k)
        };
        if largest_magnitude_entry(col.iter().copied()) < 0.0 {
            u.column_mut(k).mapv_inplace(|x| -x);
            v.column_mut(k).mapv_inplace(|x| -x);
        }
    }
    (u, d, v)
}

pub(crate) fn largest_magnitude_entry(it: impl Iterator<Item = f64>) -> f64 {
    it.fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best })
}

/// Re-orthonormalizes `U` in singular-value order and fills columns that
/// belong to vanishing singular values with unit vectors orthogonal to the
/// rest.
fn complete_orthonormal(u: &mut Array2<f64>, d: &Array1<f64>) {
    let (r, k) = u.dim();
    let scale = d.iter().copied().fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for col in 0..k {
        let populated = d[col] > scale * 1e-300 && u.column(col).iter().any(|&x| x != 0.0);
        if populated {
            let mut w = u.column(col).to_owned();
            for j in 0..col {
                let uj = u.column(j);
                let proj = uj.dot(&w);
                w.scaled_add(-proj, &uj);
            }
            let nrm = w.dot(&w).sqrt();
            if nrm > 0.5 {
                u.column_mut(col).assign(&(w / nrm));
                continue;
            }
        }
        // Complete with the canonical vector that survives projection best.
        let mut best: Option<(f64, Array1<f64>)> = None;
        for e in 0..r {
            let mut w = Array1::<f64>::zeros(r);
            w[e] = 1.0;
            for _ in 0..2 {
                for j in 0..col {
                    let uj = u.column(j);
                    let proj = uj.dot(&w);
                    w.scaled_add(-proj, &uj);
                }
            }
            let nrm = w.dot(&w).sqrt();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, w));
            }
        }
        let (nrm, w) = best.expect("r >= 1");
        u.column_mut(col).assign(&(w / nrm));
    }
}
