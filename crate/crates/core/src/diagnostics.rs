//! Neighborhood faithfulness of an embedding: exact k-NN graphs, overlap,
//! distortion and diffusion scores, rank displacement, centroid geometry and
//! the one-to-many brush expansion.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_K: usize = 10;

/// Each point's `k` nearest other points, nearest first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NeighborGraph {
    k: usize,
    indices: Vec<Vec<usize>>,
}

impl NeighborGraph {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.indices.len()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.indices[i]
    }

    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }
}

fn sq_dist(x: &ArrayView2<'_, f64>, i: usize, j: usize) -> f64 {
    x.row(i)
        .iter()
        .zip(x.row(j))
        .map(|(a, b)| (a - b) * (a - b))
        .sum()
}

/// Distance order of all other points as seen from `i`; ties go to the lower
/// index.
fn ordering_from(x: &ArrayView2<'_, f64>, i: usize) -> Vec<usize> {
    let n = x.nrows();
    let d: Vec<f64> = (0..n).map(|j| sq_dist(x, i, j)).collect();
    let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]).then(a.cmp(&b)));
    order
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::ConfigInvalid("k must be at least 1".into()));
    }
    if k >= n {
        return Err(Error::KTooLarge { k, n });
    }
    Ok(())
}

fn check_rows(x: &ArrayView2<'_, f64>, y: &ArrayView2<'_, f64>) -> Result<()> {
    if x.nrows() != y.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: y.nrows(),
        });
    }
    Ok(())
}

/// Exact Euclidean k-NN by brute force.
pub fn knn(x: ArrayView2<'_, f64>, k: usize) -> Result<NeighborGraph> {
    check_k(x.nrows(), k)?;
    let indices = (0..x.nrows())
        .into_par_iter()
        .map(|i| {
            let mut order = ordering_from(&x, i);
            order.truncate(k);
            order
        })
        .collect();
    Ok(NeighborGraph { k, indices })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreservationReport {
    pub k: usize,
    /// `|knn_X(i) ∩ knn_Y(i)| / k`.
    pub per_point_overlap: Vec<f64>,
    /// Share of the embedding neighbors of `i` that are not original-space
    /// neighbors.
    pub distortion_score: Vec<f64>,
    /// Share of the original-space neighbors of `i` that the embedding lost.
    pub diffusion_score: Vec<f64>,
    pub mean_overlap: f64,
}

impl PreservationReport {
    pub fn mean_distortion(&self) -> f64 {
        mean(&self.distortion_score)
    }

    pub fn mean_diffusion(&self) -> f64 {
        mean(&self.diffusion_score)
    }
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Compares the k-NN graphs of the original data `x` and the layout `y`.
pub fn neighborhood_preservation(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    k: usize,
) -> Result<PreservationReport> {
    check_rows(&x, &y)?;
    let gx = knn(x, k)?;
    let gy = knn(y, k)?;
    Ok(compare_graphs(&gx, &gy))
}

/// Scores for two precomputed graphs over the same points.
pub fn compare_graphs(gx: &NeighborGraph, gy: &NeighborGraph) -> PreservationReport {
    let n = gx.n();
    let mut overlap = Vec::with_capacity(n);
    let mut distortion = Vec::with_capacity(n);
    let mut diffusion = Vec::with_capacity(n);
    for i in 0..n {
        let nx: BTreeSet<usize> = gx.neighbors(i).iter().copied().collect();
        let ny: BTreeSet<usize> = gy.neighbors(i).iter().copied().collect();
        let shared = nx.intersection(&ny).count() as f64;
        overlap.push(shared / gx.k() as f64);
        distortion.push(ny.difference(&nx).count() as f64 / gy.k() as f64);
        diffusion.push(nx.difference(&ny).count() as f64 / gx.k() as f64);
    }
    PreservationReport {
        k: gx.k(),
        mean_overlap: mean(&overlap),
        per_point_overlap: overlap,
        distortion_score: distortion,
        diffusion_score: diffusion,
    }
}

/// For each point, the mean over its `k` original-space neighbors `j` of
/// `|rank_X(i, j) − rank_Y(i, j)|`, ranks being 1-based positions in the
/// distance order from `i`.
pub fn rank_preservation(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    k: usize,
) -> Result<Vec<f64>> {
    check_rows(&x, &y)?;
    check_k(x.nrows(), k)?;
    let n = x.nrows();
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let ox = ordering_from(&x, i);
            let oy = ordering_from(&y, i);
            let mut rank_y = vec![0usize; n];
            for (r, &j) in oy.iter().enumerate() {
                rank_y[j] = r + 1;
            }
            ox.iter()
                .take(k)
                .enumerate()
                .map(|(r, &j)| (r + 1).abs_diff(rank_y[j]) as f64)
                .sum::<f64>()
                / k as f64
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CentroidPair {
    pub a: usize,
    pub b: usize,
    pub dist_x: f64,
    pub dist_y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterGeometry {
    pub classes: Vec<usize>,
    pub pairs: Vec<CentroidPair>,
    /// Spearman correlation between the two centroid distance vectors.
    pub rank_correlation: f64,
    /// Set when the correlation is not defined by the data: a single pair
    /// (reported as 1), or a constant distance vector (1 if both are
    /// constant, 0 otherwise).
    pub degenerate: bool,
}

fn centroids(x: &ArrayView2<'_, f64>, labels: &[usize], classes: &[usize]) -> Array2<f64> {
    let pos: BTreeMap<usize, usize> = classes.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let mut sums = Array2::<f64>::zeros((classes.len(), x.ncols()));
    let mut counts = vec![0usize; classes.len()];
    for (row, &l) in x.axis_iter(Axis(0)).zip(labels) {
        let c = pos[&l];
        counts[c] += 1;
        let mut s = sums.row_mut(c);
        s += &row;
    }
    for (mut s, &m) in sums.axis_iter_mut(Axis(0)).zip(&counts) {
        s /= m as f64;
    }
    sums
}

/// Centroid distances between every pair of classes in both spaces.
pub fn cluster_geometry(
    x: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    labels: &[usize],
) -> Result<ClusterGeometry> {
    check_rows(&x, &y)?;
    if labels.len() != x.nrows() {
        return Err(Error::DimensionMismatch {
            expected: x.nrows(),
            found: labels.len(),
        });
    }
    let classes: Vec<usize> = labels.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    if classes.len() < 2 {
        return Err(Error::SingleClass);
    }
    let cx = centroids(&x, labels, &classes);
    let cy = centroids(&y, labels, &classes);
    let dist = |c: &Array2<f64>, a: usize, b: usize| {
        (&c.row(a) - &c.row(b)).mapv(|v| v * v).sum().sqrt()
    };
    let mut pairs = Vec::new();
    for a in 0..classes.len() {
        for b in a + 1..classes.len() {
            pairs.push(CentroidPair {
                a: classes[a],
                b: classes[b],
                dist_x: dist(&cx, a, b),
                dist_y: dist(&cy, a, b),
            });
        }
    }
    let dx: Vec<f64> = pairs.iter().map(|p| p.dist_x).collect();
    let dy: Vec<f64> = pairs.iter().map(|p| p.dist_y).collect();
    let (rank_correlation, degenerate) = if pairs.len() == 1 {
        (1.0, true)
    } else {
        match spearman(&dx, &dy) {
            Some(r) => (r, false),
            None if is_constant(&dx) && is_constant(&dy) => (1.0, true),
            None => (0.0, true),
        }
    };
    Ok(ClusterGeometry {
        classes,
        pairs,
        rank_correlation,
        degenerate,
    })
}

fn is_constant(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] == w[1])
}

/// 1-based ranks with ties sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap_or(Ordering::Equal));
    let mut ranks = vec![0.0; v.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && v[order[end]] == v[order[start]] {
            end += 1;
        }
        let avg = (start + end + 1) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = avg;
        }
        start = end;
    }
    ranks
}

/// Pearson correlation of average ranks; `None` when either side is constant.
pub fn spearman(a: &[f64], b: &[f64]) -> Option<f64> {
    let ra = Array1::from(average_ranks(a));
    let rb = Array1::from(average_ranks(b));
    let ca = &ra - ra.mean()?;
    let cb = &rb - rb.mean()?;
    let den = (ca.dot(&ca) * cb.dot(&cb)).sqrt();
    (den > 0.0).then(|| ca.dot(&cb) / den)
}

/// The selection together with every selected point's graph neighbors.
pub fn knn_brush(selection: &BTreeSet<usize>, graph: &NeighborGraph) -> Result<BTreeSet<usize>> {
    let n = graph.n();
    let mut out = selection.clone();
    for &i in selection {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        out.extend(graph.neighbors(i));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn collinear_by_hand() {
        let x = array![[0.0], [1.0], [3.0]];
        let g = knn(x.view(), 1).unwrap();
        assert_eq!(g.indices(), &[vec![1], vec![0], vec![1]]);
    }

    #[test]
    fn full_k_lists_everyone_else() {
        let x = array![[0.0, 1.0], [2.0, 0.0], [5.0, 5.0], [1.0, 1.0]];
        let g = knn(x.view(), 3).unwrap();
        for i in 0..4 {
            let mut l = g.neighbors(i).to_vec();
            l.sort_unstable();
            assert_eq!(l, (0..4).filter(|&j| j != i).collect::<Vec<_>>());
        }
    }

    #[test]
    fn duplicates_tie_break_by_index() {
        let x = array![[0.0], [1.0], [1.0], [1.0]];
        let g = knn(x.view(), 2).unwrap();
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(3), &[1, 2]);
    }

    #[test]
    fn k_too_large() {
        let x = array![[0.0], [1.0]];
        assert_eq!(knn(x.view(), 2).unwrap_err(), Error::KTooLarge { k: 2, n: 2 });
    }

    #[test]
    fn two_classes_are_degenerate() {
        let x = array![[0.0], [1.0], [5.0], [6.0]];
        let g = cluster_geometry(x.view(), x.view(), &[0, 0, 1, 1]).unwrap();
        assert_eq!(g.rank_correlation, 1.0);
        assert!(g.degenerate);
        assert_eq!(g.pairs.len(), 1);
    }

    #[test]
    fn one_class_is_an_error() {
        let x = array![[0.0], [1.0]];
        assert_eq!(cluster_geometry(x.view(), x.view(), &[3, 3]).unwrap_err(), Error::SingleClass);
    }

    #[test]
    fn average_ranks_share_ties() {
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
    }

    #[test]
    fn brush_of_nothing_is_nothing() {
        let x = array![[0.0], [1.0], [3.0]];
        let g = knn(x.view(), 1).unwrap();
        assert!(knn_brush(&BTreeSet::new(), &g).unwrap().is_empty());
        let err = knn_brush(&BTreeSet::from([7]), &g).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { index: 7, n: 3 });
    }
}
