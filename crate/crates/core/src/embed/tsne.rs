//! Exact t-SNE.
//!
//! High-dimensional similarities use a Gaussian kernel whose per-point
//! bandwidth is calibrated to a common perplexity; the layout uses a Cauchy
//! kernel and is fitted by momentum gradient descent on the Kullback–Leibler
//! divergence. Everything is `O(n²)`: intended for a few thousand points.
//!
//! Row-parallel loops compute each row sequentially and combine row results
//! in index order, so output is bit-identical for a fixed seed regardless of
//! the thread count.

use ndarray::{Array1, Array2, ArrayView2, Axis, Zip};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numerics::{pca, DataMatrix};

/// Entropy tolerance, in bits, for bandwidth calibration.
pub const ENTROPY_TOL_BITS: f64 = 1e-5;
/// Maximum bisection steps per point.
pub const MAX_BISECTION_STEPS: usize = 50;
/// Floor applied to `q_ij` when the optimizer records its loss.
pub const Q_FLOOR: f64 = 1e-12;

/// How the layout is initialized.
#[derive(Debug, Clone, PartialEq)]
pub enum TsneInit {
    /// Independent normal draws with the given standard deviation.
    Random { sd: f64 },
    /// Leading principal component scores, each column rescaled to `sd`.
    Pca { sd: f64 },
    /// A caller-supplied `n × d` layout, used verbatim.
    Given(Array2<f64>),
}

impl TsneInit {
    pub fn name(&self) -> &'static str {
        match self {
            TsneInit::Random { .. } => "random",
            TsneInit::Pca { .. } => "pca",
            TsneInit::Given(_) => "given",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TsneConfig {
    pub perplexity: f64,
    pub output_dim: usize,
    pub n_iter: usize,
    pub learning_rate: f64,
    pub early_exaggeration: f64,
    pub exaggeration_iters: usize,
    pub initial_momentum: f64,
    pub final_momentum: f64,
    pub momentum_switch_iter: usize,
    pub init: TsneInit,
    /// Reduce the input to this many principal components first, when it has
    /// more columns than that.
    pub pca_dims: Option<usize>,
    pub seed: u64,
}

impl Default for TsneConfig {
    fn default() -> Self {
        Self {
            perplexity: 30.0,
            output_dim: 2,
            n_iter: 1000,
            learning_rate: 200.0,
            early_exaggeration: 12.0,
            exaggeration_iters: 250,
            initial_momentum: 0.5,
            final_momentum: 0.8,
            momentum_switch_iter: 250,
            init: TsneInit::Random { sd: 1e-4 },
            pca_dims: Some(50),
            seed: 42,
        }
    }
}

impl TsneConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("perplexity", self.perplexity),
            ("learning_rate", self.learning_rate),
            ("early_exaggeration", self.early_exaggeration),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::ConfigInvalid(format!("{name} must be positive, got {v}")));
            }
        }
        if self.output_dim == 0 {
            return Err(Error::ConfigInvalid("output_dim must be at least 1".into()));
        }
        for (name, m) in [
            ("initial_momentum", self.initial_momentum),
            ("final_momentum", self.final_momentum),
        ] {
            if !(0.0..1.0).contains(&m) {
                return Err(Error::ConfigInvalid(format!("{name} must be in [0, 1), got {m}")));
            }
        }
        match &self.init {
            TsneInit::Random { sd } | TsneInit::Pca { sd } if !(*sd > 0.0) => {
                Err(Error::ConfigInvalid(format!("init sd must be positive, got {sd}")))
            }
            _ if self.pca_dims == Some(0) => {
                Err(Error::ConfigInvalid("pca_dims must be at least 1".into()))
            }
            _ => Ok(()),
        }
    }
}

/// A fitted embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct TsneModel {
    /// Joint similarities `p_ij`.
    pub p: Array2<f64>,
    pub sigmas: Vec<f64>,
    pub y: Array2<f64>,
    /// `(iteration, KL divergence)` on the un-exaggerated `P`.
    pub loss_trace: Vec<(usize, f64)>,
    pub config: TsneConfig,
}

impl TsneModel {
    pub fn initial_loss(&self) -> f64 {
        self.loss_trace.first().map_or(f64::NAN, |r| r.1)
    }

    pub fn final_loss(&self) -> f64 {
        self.loss_trace.last().map_or(f64::NAN, |r| r.1)
    }
}

/// Squared Euclidean distances between all rows.
pub fn pairwise_sq_dists(x: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = x.nrows();
    let mut out = Array2::<f64>::zeros((n, n));
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(i, mut row)| {
            let xi = x.row(i);
            for j in 0..n {
                if j != i {
                    row[j] = xi
                        .iter()
                        .zip(x.row(j))
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum();
                }
            }
        });
    out
}

/// Per-point bandwidths and the conditional similarities they produce.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub sigmas: Vec<f64>,
    /// Row `i` holds `p_{j|i}`; rows sum to one and the diagonal is zero.
    pub conditional: Array2<f64>,
    /// Achieved Shannon entropy of each row, in bits.
    pub entropies: Vec<f64>,
}

impl Calibration {
    /// Achieved perplexities, `2^entropy`.
    pub fn perplexities(&self) -> Vec<f64> {
        self.entropies.iter().map(|h| h.exp2()).collect()
    }
}

/// Finds for every point the Gaussian bandwidth whose conditional
/// distribution over the other points has perplexity `perplexity`.
pub fn calibrate_sigmas(d2: ArrayView2<'_, f64>, perplexity: f64) -> Result<Calibration> {
    let n = d2.nrows();
    if d2.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: d2.ncols(),
        });
    }
    if !(perplexity > 1.0 && perplexity <= n.saturating_sub(1) as f64) {
        return Err(Error::InfeasiblePerplexity { perplexity, n });
    }
    let target = perplexity.log2();
    let rows: Vec<Result<(f64, Vec<f64>, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| calibrate_row(d2.row(i).to_vec(), i, target))
        .collect();

    let mut sigmas = Vec::with_capacity(n);
    let mut entropies = Vec::with_capacity(n);
    let mut conditional = Array2::<f64>::zeros((n, n));
    for (i, r) in rows.into_iter().enumerate() {
        let (sigma, probs, h) = r?;
        sigmas.push(sigma);
        entropies.push(h);
        conditional.row_mut(i).assign(&Array1::from(probs));
    }
    Ok(Calibration {
        sigmas,
        conditional,
        entropies,
    })
}

/// Row distribution and its entropy (bits) at bandwidth `exp(log_sigma)`.
fn row_entropy(d: &[f64], own: usize, dmin: f64, log_sigma: f64) -> (Vec<f64>, f64) {
    let beta = 0.5 * (-2.0 * log_sigma).exp();
    let mut w: Vec<f64> = d
        .iter()
        .enumerate()
        .map(|(j, &dj)| if j == own { 0.0 } else { (-beta * (dj - dmin)).exp() })
        .collect();
    let z: f64 = w.iter().sum();
    let weighted: f64 = w
        .iter()
        .zip(d)
        .enumerate()
        .filter(|(j, _)| *j != own)
        .map(|(_, (wj, dj))| wj * beta * (dj - dmin))
        .sum();
    let h_nats = z.ln() + weighted / z;
    w.iter_mut().for_each(|v| *v /= z);
    (w, h_nats / std::f64::consts::LN_2)
}

fn calibrate_row(d: Vec<f64>, own: usize, target: f64) -> Result<(f64, Vec<f64>, f64)> {
    let others = d.iter().enumerate().filter(|(j, _)| *j != own).map(|(_, v)| *v);
    let (dmin, dmax, sum) = others.fold((f64::INFINITY, 0.0f64, 0.0), |(lo, hi, s), v| {
        (lo.min(v), hi.max(v), s + v)
    });
    if !(dmax > 0.0) {
        return Err(Error::DegenerateRow { row: own });
    }
    let mean = sum / (d.len() - 1) as f64;

    let eval = |u: f64| row_entropy(&d, own, dmin, u);
    let mut u = 0.5 * mean.ln();
    let (mut probs, mut h) = eval(u);
    if (h - target).abs() < ENTROPY_TOL_BITS {
        return Ok((u.exp(), probs, h));
    }

    // Bracket the target: entropy grows with the bandwidth.
    let (mut lo, mut hi) = (u, u);
    let dir = if h < target { 1.0 } else { -1.0 };
    for _ in 0..400 {
        let next = u + dir;
        let (pn, hn) = eval(next);
        if dir > 0.0 {
            lo = u;
            hi = next;
        } else {
            hi = u;
            lo = next;
        }
        u = next;
        probs = pn;
        h = hn;
        if (h - target).abs() < ENTROPY_TOL_BITS {
            return Ok((u.exp(), probs, h));
        }
        if (dir > 0.0) == (h > target) {
            break;
        }
    }

    let mut best = (u, probs, h);
    for _ in 0..MAX_BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        let (pm, hm) = eval(mid);
        if (hm - target).abs() < (best.2 - target).abs() {
            best = (mid, pm, hm);
        }
        if (hm - target).abs() < ENTROPY_TOL_BITS {
            break;
        }
        if hm > target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok((best.0.exp(), best.1, best.2))
}

/// `p_ij = (p_{j|i} + p_{i|j}) / 2n`.
pub fn symmetrize(conditional: ArrayView2<'_, f64>) -> Array2<f64> {
    let n = conditional.nrows();
    let scale = 1.0 / (2.0 * n as f64);
    let mut p = Array2::<f64>::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i != j {
                p[[i, j]] = (conditional[[i, j]] + conditional[[j, i]]) * scale;
            }
        }
    }
    p
}

/// Cauchy-kernel affinities of a layout.
#[derive(Debug, Clone, PartialEq)]
pub struct Affinities {
    /// `q_ij = w_ij / Z`.
    pub q: Array2<f64>,
    /// `w_ij = 1 / (1 + ‖y_i − y_j‖²)`, zero diagonal.
    pub w: Array2<f64>,
    /// `Z = Σ_{k≠l} w_kl`.
    pub z: f64,
}

pub fn low_dim_affinities(y: ArrayView2<'_, f64>) -> Affinities {
    let mut w = pairwise_sq_dists(y);
    w.mapv_inplace(|d| 1.0 / (1.0 + d));
    w.diag_mut().fill(0.0);
    let z: f64 = w.rows().into_iter().map(|r| r.sum()).sum();
    let q = &w / z;
    Affinities { q, w, z }
}

/// `Σ_{i≠j} p_ij log(p_ij / q_ij)`; pairs with `p_ij = 0` contribute nothing.
pub fn kl_loss(p: ArrayView2<'_, f64>, q: ArrayView2<'_, f64>) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.nrows(),
            found: q.nrows(),
        });
    }
    let mut total = 0.0;
    for ((i, j), &pij) in p.indexed_iter() {
        if i == j || pij <= 0.0 {
            continue;
        }
        let qij = q[[i, j]];
        if !(qij > 0.0 && qij.is_finite()) {
            return Err(Error::NonFinite(format!("q[{i}, {j}] = {qij} where p > 0")));
        }
        total += pij * (pij / qij).ln();
    }
    Ok(total.max(0.0))
}

/// The loss split as `Σ p log p − Σ p log w + log Σ w`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossTerms {
    /// `Σ_{i≠j} p_ij log p_ij`; constant in the layout.
    pub p_log_p: f64,
    /// `−Σ_{i≠j} p_ij log w_ij`.
    pub neg_log_w: f64,
    /// `log Σ_{i≠j} w_ij`.
    pub log_z: f64,
}

impl LossTerms {
    pub fn total(&self) -> f64 {
        self.p_log_p + self.neg_log_w + self.log_z
    }
}

pub fn loss_terms(p: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> LossTerms {
    let aff = low_dim_affinities(y);
    let mut p_log_p = 0.0;
    let mut neg_log_w = 0.0;
    for ((i, j), &pij) in p.indexed_iter() {
        if i != j && pij > 0.0 {
            p_log_p += pij * pij.ln();
            neg_log_w -= pij * aff.w[[i, j]].ln();
        }
    }
    LossTerms {
        p_log_p,
        neg_log_w,
        log_z: aff.z.ln(),
    }
}

/// `∂L/∂y_i = 4 Σ_j (p_ij − q_ij) w_ij (y_i − y_j)`.
pub fn tsne_gradient(p: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> Array2<f64> {
    let mut grad = Array2::zeros(y.dim());
    let mut w = Array2::zeros((y.nrows(), y.nrows()));
    gradient_into(p, y, 1.0, &mut grad, &mut w);
    grad
}

/// Gradient with `P` scaled by `exaggeration`, written into `grad`; returns `Z`.
/// `w` is scratch space for the `n × n` kernel matrix.
fn gradient_into(
    p: ArrayView2<'_, f64>,
    y: ArrayView2<'_, f64>,
    exaggeration: f64,
    grad: &mut Array2<f64>,
    w: &mut Array2<f64>,
) -> f64 {
    let (n, d) = y.dim();
    let y = y.as_standard_layout();
    let ys = y.as_slice().expect("standard layout");
    let p = p.as_standard_layout();
    let ps = p.as_slice().expect("standard layout");
    let ws = w.as_slice_mut().expect("owned scratch is contiguous");

    // Upper triangle in parallel, then mirror.
    let upper: Vec<f64> = ws
        .par_chunks_exact_mut(n)
        .enumerate()
        .map(|(i, row)| {
            let yi = &ys[i * d..(i + 1) * d];
            row[i] = 0.0;
            let mut s = 0.0;
            for j in i + 1..n {
                let v = 1.0 / (1.0 + sq_dist_slice(yi, &ys[j * d..(j + 1) * d]));
                row[j] = v;
                s += v;
            }
            s
        })
        .collect();
    for i in 1..n {
        for j in 0..i {
            ws[i * n + j] = ws[j * n + i];
        }
    }
    let z = 2.0 * upper.iter().sum::<f64>();
    let inv_z = 1.0 / z;
    let ws = &*ws;
    let gs = grad.as_slice_mut().expect("owned gradient is contiguous");
    gs.par_chunks_exact_mut(d).enumerate().for_each(|(i, g)| {
        g.fill(0.0);
        let yi = &ys[i * d..(i + 1) * d];
        let pi = &ps[i * n..(i + 1) * n];
        let wi = &ws[i * n..(i + 1) * n];
        for (j, yj) in ys.chunks_exact(d).enumerate() {
            let w = wi[j];
            let coef = 4.0 * (exaggeration * pi[j] - w * inv_z) * w;
            for k in 0..d {
                g[k] += coef * (yi[k] - yj[k]);
            }
        }
    });
    z
}

fn sq_dist_slice(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// KL divergence with `q` floored at [`Q_FLOOR`], without materializing `Q`.
fn floored_loss(p: ArrayView2<'_, f64>, y: ArrayView2<'_, f64>) -> f64 {
    let (n, d) = y.dim();
    let y = y.as_standard_layout();
    let ys = y.as_slice().expect("standard layout");
    let p = p.as_standard_layout();
    let ps = p.as_slice().expect("standard layout");
    let w = |i: usize, j: usize| {
        1.0 / (1.0 + sq_dist_slice(&ys[i * d..(i + 1) * d], &ys[j * d..(j + 1) * d]))
    };
    let row_sums: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| (0..n).filter(|&j| j != i).map(|j| w(i, j)).sum())
        .collect();
    let ln_z = row_sums.iter().sum::<f64>().ln();
    let floor_ln = Q_FLOOR.ln();
    let rows: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let pi = &ps[i * n..(i + 1) * n];
            (0..n)
                .filter(|&j| j != i && pi[j] > 0.0)
                .map(|j| {
                    let ln_q = (w(i, j).ln() - ln_z).max(floor_ln);
                    pi[j] * (pi[j].ln() - ln_q)
                })
                .sum()
        })
        .collect();
    rows.iter().sum::<f64>().max(0.0)
}

/// Input actually fed to the affinity computation: optionally PCA-reduced.
pub fn prepare_input(x: &DataMatrix, pca_dims: Option<usize>) -> Result<Array2<f64>> {
    match pca_dims {
        Some(k) if x.p() > k && x.n() > 1 => {
            let k = k.min(x.n() - 1);
            Ok(pca(x, k)?.scores)
        }
        _ => {
            let center = x.values().mean_axis(Axis(0)).expect("n >= 1");
            Ok(&x.values() - &center.insert_axis(Axis(0)))
        }
    }
}

fn initial_layout(x: &DataMatrix, input: &Array2<f64>, config: &TsneConfig) -> Result<Array2<f64>> {
    let (n, d) = (x.n(), config.output_dim);
    match &config.init {
        TsneInit::Random { sd } => {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let normal = Normal::new(0.0, *sd).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
            Ok(Array2::from_shape_simple_fn((n, d), || normal.sample(&mut rng)))
        }
        TsneInit::Pca { sd } => {
            let data = DataMatrix::new(input.clone())?;
            let mut scores = pca(&data, d)?.scores;
            for mut col in scores.axis_iter_mut(Axis(1)) {
                let s = col.std(1.0);
                if s > 0.0 {
                    col.mapv_inplace(|v| v * sd / s);
                }
            }
            Ok(scores)
        }
        TsneInit::Given(y0) => {
            if y0.dim() != (n, d) {
                return Err(Error::DimensionMismatch {
                    expected: n * d,
                    found: y0.len(),
                });
            }
            Ok(y0.clone())
        }
    }
}

/// The full pipeline: distances, calibration, symmetrization, then gradient
/// descent with momentum, per-coordinate gains and early exaggeration.
pub fn run_tsne(x: &DataMatrix, config: &TsneConfig) -> Result<TsneModel> {
    config.validate()?;
    let n = x.n();
    if n < 4 {
        return Err(Error::DegenerateInput(format!("t-SNE needs at least 4 points, got {n}")));
    }
    let input = prepare_input(x, config.pca_dims)?;
    let d2 = pairwise_sq_dists(input.view());
    let cal = calibrate_sigmas(d2.view(), config.perplexity)?;
    drop(d2);
    let p = symmetrize(cal.conditional.view());

    let mut y = initial_layout(x, &input, config)?;
    let mut update = Array2::<f64>::zeros(y.dim());
    let mut gains = Array2::<f64>::ones(y.dim());
    let mut grad = Array2::<f64>::zeros(y.dim());
    let mut w = Array2::<f64>::zeros((n, n));
    let mut loss_trace = vec![(0, floored_loss(p.view(), y.view()))];

    for iter in 0..config.n_iter {
        let exaggeration = if iter < config.exaggeration_iters {
            config.early_exaggeration
        } else {
            1.0
        };
        let momentum = if iter < config.momentum_switch_iter {
            config.initial_momentum
        } else {
            config.final_momentum
        };
        gradient_into(p.view(), y.view(), exaggeration, &mut grad, &mut w);
        Zip::from(&mut gains)
            .and(&grad)
            .and(&update)
            .for_each(|g, &dy, &u| {
                *g = if sign(dy) != sign(u) { *g + 0.2 } else { *g * 0.8 };
                *g = g.max(0.01);
            });
        Zip::from(&mut update)
            .and(&gains)
            .and(&grad)
            .for_each(|u, &g, &dy| *u = momentum * *u - config.learning_rate * g * dy);
        y += &update;
        let mean = y.mean_axis(Axis(0)).expect("n >= 4");
        y -= &mean.insert_axis(Axis(0));

        let done = iter + 1;
        if done % 10 == 0 || done == config.n_iter {
            loss_trace.push((done, floored_loss(p.view(), y.view())));
        }
    }

    Ok(TsneModel {
        p,
        sigmas: cal.sigmas,
        y,
        loss_trace,
        config: config.clone(),
    })
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}
