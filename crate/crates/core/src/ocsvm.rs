//! One-class SVM with an RBF kernel, trained on the dual
//!
//! ```text
//! min_a  1/2 sum_ij a_i a_j K(x_i, x_j)   s.t.  sum_i a_i = 1,  0 <= a_i <= 1/(nu N)
//! ```
//!
//! by sequential pairwise updates. The decision function
//! `f(x) = sum_i a_i K(x_i, x) - rho` is nonnegative on the learned domain.

use std::collections::HashMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datasets::{PointCloud, Scaler};
use crate::error::{Error, Result};

pub const MODEL_SCHEMA: &str = "validom.ocsvm/1";

/// Relative drop in support vectors below which the schedule has plateaued.
pub const DEFAULT_PLATEAU: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn rbf(gamma: f64) -> Result<KernelSpec> {
        if gamma > 0.0 && gamma.is_finite() {
            Ok(KernelSpec::Rbf { gamma })
        } else {
            Err(Error::Config(format!(
                "gamma must be positive, got {gamma}"
            )))
        }
    }

    pub fn gamma(&self) -> f64 {
        match *self {
            KernelSpec::Rbf { gamma } => gamma,
        }
    }

    pub fn eval(&self, a: &[f64], b: &[f64]) -> f64 {
        let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
        (-self.gamma() * d2).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainOptions {
    /// Threshold below which a dual weight is treated as zero, and the slack
    /// separating free weights from the box.
    pub tol: f64,
    /// Stopping tolerance on the maximal KKT violation.
    pub kkt_tol: f64,
    pub max_iterations: usize,
    /// Memory budget of the kernel row cache, in megabytes.
    pub cache_mb: usize,
}

impl Default for TrainOptions {
    fn default() -> Self {
        TrainOptions {
            tol: 1e-6,
            kkt_tol: 1e-10,
            max_iterations: 10_000_000,
            cache_mb: 256,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneClassSvmModel {
    pub schema: String,
    pub nu: f64,
    pub kernel: KernelSpec,
    pub rho: f64,
    pub n_train: usize,
    pub support_vectors: Vec<Vec<f64>>,
    pub alphas: Vec<f64>,
    /// Maps raw inputs into the space the model was trained in.
    pub scaler: Option<Scaler>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainStats {
    pub iterations: usize,
    pub kkt_residual: f64,
    pub objective: f64,
    /// Dual weights for every training point, before pruning.
    pub alpha: Vec<f64>,
    pub support_indices: Vec<usize>,
}

impl OneClassSvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, |v| v.len())
    }

    pub fn n_support(&self) -> usize {
        self.alphas.len()
    }

    pub fn with_scaler(mut self, scaler: Scaler) -> Self {
        self.scaler = Some(scaler);
        self
    }

    /// Kernel sum at `x`, which must already be in model coordinates.
    pub fn kernel_sum_scaled(&self, x: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.alphas)
            .map(|(sv, a)| a * self.kernel.eval(sv, x))
            .sum()
    }

    pub fn decision(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        Ok(match &self.scaler {
            Some(s) => self.kernel_sum_scaled(&s.apply(x)) - self.rho,
            None => self.kernel_sum_scaled(x) - self.rho,
        })
    }

    /// Kernel terms expressed in raw coordinates: term `i` is
    /// `alphas[i] * exp(-sum_j w_j (x_j - c_ij)^2)`.
    pub fn raw_terms(&self) -> (Vec<Vec<f64>>, Vec<f64>) {
        let gamma = self.kernel.gamma();
        match &self.scaler {
            None => (self.support_vectors.clone(), vec![gamma; self.dim()]),
            Some(s) => (
                self.support_vectors.iter().map(|v| s.invert(v)).collect(),
                s.gains.iter().map(|g| gamma * g * g).collect(),
            ),
        }
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }

    pub fn load_json(path: &Path) -> Result<OneClassSvmModel> {
        let model: OneClassSvmModel = serde_json::from_str(&std::fs::read_to_string(path)?)?;
        if model.schema != MODEL_SCHEMA {
            return Err(Error::Format(format!(
                "expected schema {MODEL_SCHEMA}, found {}",
                model.schema
            )));
        }
        if model.support_vectors.len() != model.alphas.len() || model.support_vectors.is_empty() {
            return Err(Error::Format("support vectors and alphas disagree".into()));
        }
        Ok(model)
    }
}

/// Free function form of [`OneClassSvmModel::decision`].
pub fn decision(model: &OneClassSvmModel, x: &[f64]) -> Result<f64> {
    model.decision(x)
}

struct KernelCache<'a> {
    cloud: &'a PointCloud,
    kernel: KernelSpec,
    rows: HashMap<usize, (Vec<f64>, u64)>,
    capacity: usize,
    clock: u64,
}

impl<'a> KernelCache<'a> {
    fn new(cloud: &'a PointCloud, kernel: KernelSpec, capacity: usize) -> Self {
        KernelCache {
            cloud,
            kernel,
            rows: HashMap::new(),
            capacity: capacity.max(2),
            clock: 0,
        }
    }

    fn row(&mut self, i: usize) -> &[f64] {
        self.clock += 1;
        let clock = self.clock;
        if !self.rows.contains_key(&i) {
            if self.rows.len() >= self.capacity {
                let oldest = *self.rows.iter().min_by_key(|(_, (_, t))| *t).unwrap().0;
                self.rows.remove(&oldest);
            }
            let xi = self.cloud.point(i);
            let row = (0..self.cloud.len())
                .map(|j| self.kernel.eval(xi, self.cloud.point(j)))
                .collect();
            self.rows.insert(i, (row, clock));
        }
        let entry = self.rows.get_mut(&i).unwrap();
        entry.1 = clock;
        &entry.0
    }
}

pub fn train(cloud: &PointCloud, nu: f64, kernel: KernelSpec) -> Result<OneClassSvmModel> {
    Ok(train_with_stats(cloud, nu, kernel, &TrainOptions::default())?.0)
}

/// Trains with maximal-violating-pair working sets.
pub fn train_with_stats(
    cloud: &PointCloud,
    nu: f64,
    kernel: KernelSpec,
    opts: &TrainOptions,
) -> Result<(OneClassSvmModel, TrainStats)> {
    let n = cloud.len();
    if !(nu > 0.0 && nu < 1.0) {
        return Err(Error::Config(format!("nu must lie in (0, 1), got {nu}")));
    }
    if n < 2 || nu * n as f64 <= 1.0 {
        return Err(Error::Config(format!(
            "nu * N must exceed 1 (nu = {nu}, N = {n})"
        )));
    }
    let c = 1.0 / (nu * n as f64);
    let tol = opts.tol;

    // Uniform start: feasible since 1/N < C, and symmetric inputs keep
    // symmetric weights.
    let mut alpha = vec![1.0 / n as f64; n];

    let rows = opts.cache_mb * (1 << 20) / (8 * n);
    let mut cache = KernelCache::new(cloud, kernel, rows);
    let mut grad = vec![0.0; n];
    for i in 0..n {
        for j in i..n {
            let k = kernel.eval(cloud.point(i), cloud.point(j)) / n as f64;
            grad[i] += k;
            if j != i {
                grad[j] += k;
            }
        }
    }

    let mut iterations = 0;
    let residual = loop {
        // i: may grow (a < C) with smallest gradient; j: may shrink (a > 0)
        // with largest gradient.
        let mut i = usize::MAX;
        let mut j = usize::MAX;
        let (mut gmin, mut gmax) = (f64::INFINITY, f64::NEG_INFINITY);
        for t in 0..n {
            if alpha[t] < c && grad[t] < gmin {
                gmin = grad[t];
                i = t;
            }
            if alpha[t] > 0.0 && grad[t] > gmax {
                gmax = grad[t];
                j = t;
            }
        }
        let violation = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || violation <= opts.kkt_tol {
            break violation.max(0.0);
        }
        if iterations >= opts.max_iterations {
            return Err(Error::NoConvergence {
                iterations,
                residual: violation,
            });
        }
        iterations += 1;

        let kij = cache.row(i)[j];
        let curvature = (2.0 - 2.0 * kij).max(1e-12);
        let step = (violation / curvature).min(c - alpha[i]).min(alpha[j]);
        alpha[i] += step;
        alpha[j] -= step;
        if c - alpha[i] < 1e-15 * c {
            alpha[i] = c;
        }
        if alpha[j] < 1e-15 * c {
            alpha[j] = 0.0;
        }
        let row_i = cache.row(i).to_vec();
        let row_j = cache.row(j);
        for t in 0..n {
            grad[t] += step * (row_i[t] - row_j[t]);
        }
    };

    let free: Vec<usize> = (0..n)
        .filter(|&t| alpha[t] > tol && alpha[t] < c - tol)
        .collect();
    let rho = if !free.is_empty() {
        free.iter().map(|&t| grad[t]).sum::<f64>() / free.len() as f64
    } else {
        let lo = (0..n)
            .filter(|&t| alpha[t] >= c - tol)
            .map(|t| grad[t])
            .fold(f64::NEG_INFINITY, f64::max);
        let hi = (0..n)
            .filter(|&t| alpha[t] <= tol)
            .map(|t| grad[t])
            .fold(f64::INFINITY, f64::min);
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi,
            (false, false) => 0.0,
        }
    };

    let objective = 0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * g).sum::<f64>();

    // Drop negligible weights; their mass goes to the free vector with the
    // most room so the equality constraint still holds.
    let mut kept = alpha.clone();
    let mut dropped = 0.0;
    for a in kept.iter_mut() {
        if *a <= tol {
            dropped += *a;
            *a = 0.0;
        }
    }
    if dropped > 0.0 {
        if let Some(t) = (0..n)
            .filter(|&t| kept[t] > 0.0 && kept[t] + dropped <= c)
            .min_by(|&a, &b| kept[a].total_cmp(&kept[b]))
        {
            kept[t] += dropped;
        }
    }
    let support_indices: Vec<usize> = (0..n).filter(|&t| kept[t] > 0.0).collect();
    let model = OneClassSvmModel {
        schema: MODEL_SCHEMA.into(),
        nu,
        kernel,
        rho,
        n_train: n,
        support_vectors: support_indices
            .iter()
            .map(|&t| cloud.point(t).to_vec())
            .collect(),
        alphas: support_indices.iter().map(|&t| kept[t]).collect(),
        scaler: None,
    };
    Ok((
        model,
        TrainStats {
            iterations,
            kkt_residual: residual,
            objective,
            alpha,
            support_indices,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSelection {
    pub gamma: f64,
    /// `(gamma, support vector count)` for every schedule entry tried.
    pub diagnostics: Vec<(f64, usize)>,
    /// Set when the schedule ran out before the count levelled off.
    pub exhausted: bool,
}

/// Default schedule: 24 values from 8 down to about 0.04, geometric.
pub fn default_gamma_schedule() -> Vec<f64> {
    (0..24).map(|k| 8.0 * 0.8f64.powi(k)).collect()
}

/// Walks a decreasing schedule and stops at the first gamma whose support
/// vector count dropped by less than `plateau` relative to the previous one.
pub fn select_gamma(
    cloud: &PointCloud,
    nu: f64,
    schedule: &[f64],
    plateau: f64,
    opts: &TrainOptions,
) -> Result<GammaSelection> {
    if schedule.is_empty() {
        return Err(Error::Config("gamma schedule is empty".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) || schedule.iter().any(|g| !(*g > 0.0)) {
        return Err(Error::Config(
            "gamma schedule must be strictly decreasing and positive".into(),
        ));
    }
    let mut diagnostics = Vec::with_capacity(schedule.len());
    for &gamma in schedule {
        let (model, _) = train_with_stats(cloud, nu, KernelSpec::rbf(gamma)?, opts)?;
        let count = model.n_support();
        if let Some(&(_, prev)) = diagnostics.last() {
            diagnostics.push((gamma, count));
            let drop = (prev as f64 - count as f64) / prev as f64;
            if drop < plateau {
                return Ok(GammaSelection {
                    gamma,
                    diagnostics,
                    exhausted: false,
                });
            }
        } else {
            diagnostics.push((gamma, count));
        }
    }
    Ok(GammaSelection {
        gamma: *schedule.last().unwrap(),
        diagnostics,
        exhausted: schedule.len() > 1,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NuReport {
    pub outlier_fraction: f64,
    pub sv_fraction: f64,
    pub pass: bool,
}

/// Checks that at most `nu` of the data are outliers and at least `nu` are
/// support vectors, each with a slack of `2/N`.
pub fn validate_nu_property(
    model: &OneClassSvmModel,
    cloud: &PointCloud,
    tol: f64,
) -> Result<NuReport> {
    let n = cloud.len() as f64;
    let mut outliers = 0usize;
    for p in cloud.points() {
        if model.decision(p)? < -10.0 * tol {
            outliers += 1;
        }
    }
    let outlier_fraction = outliers as f64 / n;
    let sv_fraction = model.n_support() as f64 / n;
    Ok(NuReport {
        outlier_fraction,
        sv_fraction,
        pass: outlier_fraction <= model.nu + 2.0 / n && sv_fraction >= model.nu - 2.0 / n,
    })
}

/// Sign map of the decision function over the cloud's bounding box with
/// the training points on top. Cells inside the learned domain are shaded.
pub fn svm_overlay_svg(
    cloud: &PointCloud,
    model: &OneClassSvmModel,
    resolution: usize,
) -> Result<String> {
    if cloud.dim() != 2 || model.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: cloud.dim().max(model.dim()),
        });
    }
    let b = cloud.bounds();
    let mut canvas = crate::svg::Canvas::new(b[0], b[1]);
    let n = resolution.max(2);
    let (dx, dy) = ((b[0].1 - b[0].0) / n as f64, (b[1].1 - b[1].0) / n as f64);
    for i in 0..n {
        for j in 0..n {
            let lo = (b[0].0 + i as f64 * dx, b[1].0 + j as f64 * dy);
            let c = [lo.0 + 0.5 * dx, lo.1 + 0.5 * dy];
            if model.decision(&c)? >= 0.0 {
                canvas.rect(lo, (lo.0 + dx, lo.1 + dy), "#f3d9a4");
            }
        }
    }
    canvas.axes("x1", "x2");
    for p in cloud.points() {
        canvas.circle((p[0], p[1]), 1.5, "#4a7ab5");
    }
    Ok(canvas.finish())
}
