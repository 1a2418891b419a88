//! Seeded benchmark data: spherical Gaussian clusters, clusters with nested
//! sub-clusters, a noisy random-walk tree, and class-weighted subsampling.

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::DataMatrix;

/// Attempts per center before the separation constraint is declared infeasible.
pub const MAX_CENTER_ATTEMPTS: usize = 1000;

/// A generated dataset with its ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    /// Observations; the row labels are the decimal form of `labels`.
    pub data: DataMatrix,
    pub labels: Vec<usize>,
    /// Top-level grouping, when the generator has two granularities.
    pub coarse_labels: Option<Vec<usize>>,
    /// Noise-free coordinates, when the generator adds noise.
    pub ground_truth: Option<Array2<f64>>,
}

impl LabeledDataset {
    fn new(values: Array2<f64>, labels: Vec<usize>) -> Result<Self> {
        let names = labels.iter().map(usize::to_string).collect();
        Ok(Self {
            data: DataMatrix::new(values)?.with_labels(names)?,
            labels,
            coarse_labels: None,
            ground_truth: None,
        })
    }

    pub fn n(&self) -> usize {
        self.data.n()
    }

    pub fn class_count(&self) -> usize {
        let mut seen: Vec<usize> = self.labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Keeps the given rows in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        Ok(Self {
            data: self.data.select_rows(rows)?,
            labels: rows.iter().map(|&r| self.labels[r]).collect(),
            coarse_labels: self
                .coarse_labels
                .as_ref()
                .map(|c| rows.iter().map(|&r| c[r]).collect()),
            ground_truth: self
                .ground_truth
                .as_ref()
                .map(|g| g.select(Axis(0), rows)),
        })
    }
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianClusterParams {
    pub k: usize,
    pub signal_dim: usize,
    pub ambient_dim: usize,
    pub n_per_cluster: usize,
    pub spread: f64,
    /// Minimum distance between any two centers.
    pub separation: f64,
    pub seed: u64,
}

impl Default for GaussianClusterParams {
    fn default() -> Self {
        Self {
            k: 5,
            signal_dim: 5,
            ambient_dim: 10,
            n_per_cluster: 100,
            spread: 1.0,
            separation: 10.0,
            seed: 1,
        }
    }
}

/// `k` spherical clusters sharing the covariance `spread²·I` in the first
/// `signal_dim` coordinates; the remaining ambient coordinates are zero.
/// Centers are drawn uniformly from `[−separation, separation]^signal_dim`
/// and rejected until all pairwise distances reach `separation`.
pub fn gen_gaussian_clusters(params: &GaussianClusterParams) -> Result<LabeledDataset> {
    let GaussianClusterParams {
        k,
        signal_dim,
        ambient_dim,
        n_per_cluster,
        spread,
        separation,
        seed,
    } = *params;
    if k == 0 || signal_dim == 0 || n_per_cluster == 0 || signal_dim > ambient_dim {
        return Err(Error::ConfigInvalid(format!(
            "need k, n_per_cluster, signal_dim >= 1 and signal_dim <= ambient_dim; got {params:?}"
        )));
    }
    if !(spread >= 0.0 && separation >= 0.0) {
        return Err(Error::ConfigInvalid("spread and separation must be non-negative".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(k);
    for _ in 0..k {
        let mut placed = false;
        for _ in 0..MAX_CENTER_ATTEMPTS {
            let cand: Vec<f64> = (0..signal_dim)
                .map(|_| rng.random_range(-1.0..=1.0) * separation)
                .collect();
            let ok = centers.iter().all(|c| {
                c.iter().zip(&cand).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
                    >= separation
            });
            if ok {
                centers.push(cand);
                placed = true;
                break;
            }
        }
        if !placed {
            return Err(Error::SeparationInfeasible {
                clusters: k,
                separation,
                attempts: MAX_CENTER_ATTEMPTS,
            });
        }
    }

    let n = k * n_per_cluster;
    let mut values = Array2::<f64>::zeros((n, ambient_dim));
    let mut labels = Vec::with_capacity(n);
    for (c, center) in centers.iter().enumerate() {
        for i in 0..n_per_cluster {
            let row = c * n_per_cluster + i;
            for (j, mu) in center.iter().enumerate() {
                values[[row, j]] = mu + spread * normal(&mut rng);
            }
            labels.push(c);
        }
    }
    LabeledDataset::new(values, labels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HierarchicalParams {
    pub ambient_dim: usize,
    /// Points in each of the two plain top-level clusters.
    pub n_top: usize,
    /// Points in the undivided sub-cluster of the third group.
    pub n_sub: usize,
    /// Points in each of the three leaf clusters.
    pub n_leaf: usize,
    /// Distance between the three top-level group centers.
    pub top_separation: f64,
    pub top_spread: f64,
    /// Dimension of the subspace holding the third group's structure.
    pub sub_dim: usize,
    /// Distance between the third group's two sub-cluster centers.
    pub sub_separation: f64,
    pub sub_spread: f64,
    /// Side of the equilateral triangle holding the three leaf centers.
    pub leaf_separation: f64,
    pub leaf_spread: f64,
    pub seed: u64,
}

impl Default for HierarchicalParams {
    fn default() -> Self {
        Self {
            ambient_dim: 10,
            n_top: 100,
            n_sub: 100,
            n_leaf: 50,
            top_separation: 12.0,
            top_spread: 1.0,
            sub_dim: 3,
            sub_separation: 6.0,
            sub_spread: 0.5,
            leaf_separation: 2.0,
            leaf_spread: 0.25,
            seed: 2,
        }
    }
}

/// Centers of the six fine classes: two top-level clusters, the undivided
/// sub-cluster, and the three leaves.
///
/// The top-level centers are `top_separation / √2` times distinct coordinate
/// vectors beyond the sub-cluster subspace, so they are mutually equidistant.
/// Inside the third group, the sub-clusters sit on the first subspace axis and
/// the leaves on an equilateral triangle in the next two.
pub fn hierarchical_centers(params: &HierarchicalParams) -> Result<Vec<Vec<f64>>> {
    let HierarchicalParams {
        ambient_dim,
        sub_dim,
        top_separation,
        sub_separation,
        leaf_separation,
        ..
    } = *params;
    if sub_dim < 3 || ambient_dim < sub_dim + 3 {
        return Err(Error::ConfigInvalid(format!(
            "need sub_dim >= 3 and ambient_dim >= sub_dim + 3; got {sub_dim}, {ambient_dim}"
        )));
    }
    let top = |g: usize| {
        let mut c = vec![0.0; ambient_dim];
        c[sub_dim + g] = top_separation / 2f64.sqrt();
        c
    };
    let group = top(2);
    let mut sub_a = group.clone();
    sub_a[0] -= sub_separation / 2.0;
    let mut sub_b = group.clone();
    sub_b[0] += sub_separation / 2.0;
    let radius = leaf_separation / 3f64.sqrt();
    let leaves = (0..3).map(|m| {
        let angle = 2.0 * std::f64::consts::PI * m as f64 / 3.0;
        let mut c = sub_b.clone();
        c[1] += radius * angle.cos();
        c[2] += radius * angle.sin();
        c
    });
    let mut out = vec![top(0), top(1), sub_a];
    out.extend(leaves);
    Ok(out)
}

/// Two spherical clusters in the full space and a third group living in a
/// low-dimensional subspace, made of one sub-cluster and one sub-cluster
/// split into three equidistant leaves.
///
/// `labels` are the six fine classes; `coarse_labels` the three groups.
pub fn gen_hierarchical_clusters(params: &HierarchicalParams) -> Result<LabeledDataset> {
    let centers = hierarchical_centers(params)?;
    let p = params.ambient_dim;
    let sizes = [
        params.n_top,
        params.n_top,
        params.n_sub,
        params.n_leaf,
        params.n_leaf,
        params.n_leaf,
    ];
    if sizes.contains(&0) {
        return Err(Error::ConfigInvalid("every class needs at least one point".into()));
    }
    let n: usize = sizes.iter().sum();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut values = Array2::<f64>::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    let mut coarse = Vec::with_capacity(n);
    let mut row = 0;
    for (class, (&size, center)) in sizes.iter().zip(&centers).enumerate() {
        let (sd, dims) = match class {
            0 | 1 => (params.top_spread, p),
            2 => (params.sub_spread, params.sub_dim),
            _ => (params.leaf_spread, params.sub_dim),
        };
        for _ in 0..size {
            for j in 0..p {
                let noise = if j < dims { sd * normal(&mut rng) } else { 0.0 };
                values[[row, j]] = center[j] + noise;
            }
            labels.push(class);
            coarse.push(class.min(2));
            row += 1;
        }
    }
    let mut ds = LabeledDataset::new(values, labels)?;
    ds.coarse_labels = Some(coarse);
    Ok(ds)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub n: usize,
    pub p: usize,
    pub branches: usize,
    /// Standard deviation of the isotropic noise added to every point.
    pub noise_sd: f64,
    /// Standard deviation of each walk increment, per coordinate.
    pub step: f64,
    pub seed: u64,
}

impl Default for TreeParams {
    fn default() -> Self {
        // With unit steps, noise_sd = 8.5 puts the first 12 principal components
        // at roughly 70% of the total variance for n = 3000, p = 100.
        Self {
            n: 3000,
            p: 100,
            branches: 10,
            noise_sd: 8.5,
            step: 1.0,
            seed: 3,
        }
    }
}

/// A branching random-walk tree.
///
/// Branch 0 walks from the origin; each later branch starts at a point
/// chosen uniformly from all earlier branches and walks from there. Every
/// branch has `n / branches` points, with the remainder added to branch 0.
/// Noise is added on top and the noise-free points are kept as ground truth.
pub fn gen_dla_tree(params: &TreeParams) -> Result<LabeledDataset> {
    let TreeParams {
        n,
        p,
        branches,
        noise_sd,
        step,
        seed,
    } = *params;
    if branches < 2 || p == 0 || n < branches {
        return Err(Error::ConfigInvalid(format!(
            "need branches >= 2, p >= 1 and n >= branches; got {params:?}"
        )));
    }
    if !(noise_sd >= 0.0 && step >= 0.0) {
        return Err(Error::ConfigInvalid("noise_sd and step must be non-negative".into()));
    }
    let per = n / branches;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut truth = Array2::<f64>::zeros((n, p));
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for b in 0..branches {
        let len = if b == 0 { per + n % branches } else { per };
        let start: Vec<f64> = if b == 0 {
            vec![0.0; p]
        } else {
            let at = rng.random_range(0..row);
            truth.row(at).to_vec()
        };
        let mut pos = start;
        for i in 0..len {
            if i > 0 {
                pos.iter_mut().for_each(|v| *v += step * normal(&mut rng));
            }
            truth.row_mut(row).assign(&ndarray::ArrayView1::from(&pos));
            labels.push(b);
            row += 1;
        }
    }
    let values = truth.mapv(|v| v + noise_sd * normal(&mut rng));
    let mut ds = LabeledDataset::new(values, labels)?;
    ds.ground_truth = Some(truth);
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubsampleParams {
    pub fraction: f64,
    /// Exponent applied to class shares; below 1 favors small classes.
    pub damping: f64,
    pub seed: u64,
}

impl SubsampleParams {
    pub fn new(fraction: f64, seed: u64) -> Self {
        Self {
            fraction,
            damping: 0.5,
            seed,
        }
    }
}

/// Rows kept per class: class `c` is allotted `fraction · n · s_c^δ / Σ s^δ`
/// rows (`s_c` its share of rows, `δ` the damping), capped at its size with
/// the excess handed to the other classes, and never fewer than
/// `min(size, 5)`.
pub fn subsample_allocation(
    class_sizes: &BTreeMap<usize, usize>,
    fraction: f64,
    damping: f64,
) -> Result<BTreeMap<usize, usize>> {
    let n: usize = class_sizes.values().sum();
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::ConfigInvalid(format!("fraction must be in (0, 1], got {fraction}")));
    }
    if !(damping >= 0.0 && damping.is_finite()) {
        return Err(Error::ConfigInvalid(format!("damping must be non-negative, got {damping}")));
    }
    let budget = fraction * n as f64;
    if budget < class_sizes.len() as f64 {
        return Err(Error::EmptyResult(format!(
            "{budget} rows cannot cover {} classes",
            class_sizes.len()
        )));
    }
    // Water-filling: cap saturated classes, spread the rest by damped share.
    let mut expected: BTreeMap<usize, f64> = BTreeMap::new();
    let mut open: Vec<usize> = class_sizes.keys().copied().collect();
    let mut remaining = budget;
    loop {
        let weight: f64 = open
            .iter()
            .map(|c| (class_sizes[c] as f64 / n as f64).powf(damping))
            .sum();
        let mut saturated = Vec::new();
        for &c in &open {
            let share = (class_sizes[&c] as f64 / n as f64).powf(damping) / weight;
            let want = remaining * share;
            if want >= class_sizes[&c] as f64 {
                saturated.push(c);
            }
            expected.insert(c, want);
        }
        if saturated.is_empty() {
            break;
        }
        for c in saturated {
            let size = class_sizes[&c] as f64;
            expected.insert(c, size);
            remaining -= size;
            open.retain(|&o| o != c);
        }
        if open.is_empty() {
            break;
        }
    }
    Ok(class_sizes
        .iter()
        .map(|(&c, &size)| {
            let floor = size.min(5);
            let count = (expected[&c].round() as usize).clamp(floor, size);
            (c, count)
        })
        .collect())
}

/// Class-weighted sampling without replacement; kept rows stay in their
/// original order.
pub fn weighted_subsample(ds: &LabeledDataset, params: &SubsampleParams) -> Result<LabeledDataset> {
    let rows = weighted_subsample_rows(&ds.labels, params)?;
    ds.select_rows(&rows)
}

/// Row indices chosen by [`weighted_subsample`], ascending.
pub fn weighted_subsample_rows(labels: &[usize], params: &SubsampleParams) -> Result<Vec<usize>> {
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        members.entry(l).or_default().push(i);
    }
    let sizes: BTreeMap<usize, usize> = members.iter().map(|(&c, v)| (c, v.len())).collect();
    let alloc = subsample_allocation(&sizes, params.fraction, params.damping)?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut rows = Vec::new();
    for (c, idx) in &members {
        let take = alloc[c];
        if take == idx.len() {
            rows.extend_from_slice(idx);
        } else {
            rows.extend(index::sample(&mut rng, idx.len(), take).into_iter().map(|k| idx[k]));
        }
    }
    rows.sort_unstable();
    Ok(rows)
}
