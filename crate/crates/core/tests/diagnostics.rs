use std::collections::BTreeSet;

use ndarray::{array, Array2};

use tourlens::diagnostics::{
    cluster_geometry, knn, knn_brush, neighborhood_preservation, rank_preservation, spearman,
};

#[test]
fn swapped_pair_rank_table() {
    // Points 2 and 3 trade places between the two spaces. Ranks worked out by
    // hand from the distance tables of both layouts.
    let x = array![[0.0], [1.0], [3.0], [7.0]];
    let y = array![[0.0], [1.0], [7.0], [3.0]];
    let r = rank_preservation(x.view(), y.view(), 2).unwrap();
    assert_eq!(r, vec![0.5, 0.5, 1.0, 1.5]);
}

#[test]
fn identical_spaces_score_perfectly() {
    let x = array![[0.0, 1.0], [2.0, 3.0], [4.0, 1.0], [1.0, 1.0], [7.0, 2.0]];
    let report = neighborhood_preservation(x.view(), x.view(), 2).unwrap();
    assert!(report.per_point_overlap.iter().all(|&v| v == 1.0));
    assert!(report.distortion_score.iter().all(|&v| v == 0.0));
    assert!(report.diffusion_score.iter().all(|&v| v == 0.0));
    assert_eq!(report.mean_overlap, 1.0);
    assert_eq!(rank_preservation(x.view(), (&x * 2.0).view(), 2).unwrap(), vec![0.0; 5]);
}

#[test]
fn rotated_layout_overlaps_fully() {
    let x = array![[0.0, 0.0], [1.0, 0.2], [3.0, 1.0], [-2.0, 4.0], [0.5, -3.0], [5.0, 5.0]];
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let rot = array![[c, -s], [s, c]];
    let y = x.dot(&rot);
    assert_eq!(neighborhood_preservation(x.view(), y.view(), 3).unwrap().mean_overlap, 1.0);
}

fn two_per_cluster(centroids: &[f64]) -> (Array2<f64>, Vec<usize>) {
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for (c, &m) in centroids.iter().enumerate() {
        rows.extend([m - 0.1, m + 0.1]);
        labels.extend([c, c]);
    }
    (Array2::from_shape_vec((rows.len(), 1), rows).unwrap(), labels)
}

#[test]
fn reordered_cluster_distances_lower_the_correlation() {
    // Centroid distances (1, 3, 2) in X against (5, 1, 4) in Y; rank
    // differences (−2, 2, 0) give 1 − 6·8 / (3·8) = −1.
    let (x, labels) = two_per_cluster(&[0.0, 1.0, 3.0]);
    let (y, _) = two_per_cluster(&[0.0, 5.0, 1.0]);
    let g = cluster_geometry(x.view(), y.view(), &labels).unwrap();
    assert!(!g.degenerate);
    assert!((g.rank_correlation + 1.0).abs() < 1e-12);
    let dx: Vec<f64> = g.pairs.iter().map(|p| p.dist_x).collect();
    assert!(dx.iter().zip([1.0, 3.0, 2.0]).all(|(a, b)| (a - b).abs() < 1e-12));
}

#[test]
fn isometric_cluster_geometry_correlates_perfectly() {
    let (x, labels) = two_per_cluster(&[0.0, 1.0, 3.0, 8.0]);
    let y = &x * -1.0 + 4.0;
    assert_eq!(cluster_geometry(x.view(), y.view(), &labels).unwrap().rank_correlation, 1.0);
}

#[test]
fn spearman_with_ties() {
    // Average ranks (1, 2.5, 2.5, 4) against (1, 2, 3, 4).
    let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
    assert!((r - 0.9486832980505138).abs() < 1e-12);
    assert!(spearman(&[1.0, 1.0], &[1.0, 2.0]).is_none());
}

#[test]
fn adjacent_brush_is_a_plain_union() {
    let x = array![[0.0], [1.0], [2.0], [10.0], [11.0], [12.5]];
    let g = knn(x.view(), 2).unwrap();
    let sel = BTreeSet::from([1, 2]);
    let mut oracle = sel.clone();
    for &i in &sel {
        oracle.extend(g.neighbors(i).iter().copied());
    }
    let out = knn_brush(&sel, &g).unwrap();
    assert_eq!(out, oracle);
    assert_eq!(out, BTreeSet::from([0, 1, 2]));
    let single = knn_brush(&BTreeSet::from([4]), &g).unwrap();
    assert!(single.len() <= 3);
    assert_eq!(single, BTreeSet::from([3, 4, 5]));
}
