//! One open-loop control step for a sulfur recovery unit: choose the
//! secondary air flow `x3[k]` so that the predicted tail gas satisfies
//! `c_H2S = 2 c_SO2`, with every other input fixed at an observed operating
//! point and the lagged input vector kept inside the SVM validity domain.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ann::{self, MlpModel, TrainConfig};
use crate::datasets::{
    build_lag_features, load_timeseries_csv, write_table_csv, LagSpec, PointCloud, Table,
};
use crate::error::{Error, Result};
use crate::pipeline::{analyze_topology, stage, train_svm, SvmSettings, TdaSettings};
use crate::relax::{Input, Interval};
use crate::solver::{self, Problem, SolveReport, SolverOptions, Surrogate, Validity};
use crate::tda::{self, TopologySummary};

/// Public source of the plant data.
pub const SRU_DOWNLOAD: &str = "https://www.openml.org/d/23515";

/// Observed inputs at lags 0, 5, 7 and 9; `None` marks the decision variable.
pub const OPERATING_POINT: [[Option<f64>; 4]; 5] = [
    [Some(0.627), Some(0.6215), Some(0.623), Some(0.622)],
    [Some(0.770), Some(0.769), Some(0.754), Some(0.769)],
    [None, Some(0.174), Some(0.192), Some(0.198)],
    [Some(0.376), Some(0.399), Some(0.415), Some(0.410)],
    [Some(0.513), Some(0.512), Some(0.511), Some(0.504)],
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SruColumns {
    /// Gas MEA, air MEA, secondary air MEA, air SWS, gas SWS.
    pub inputs: Vec<String>,
    pub h2s: String,
    pub so2: String,
}

impl Default for SruColumns {
    fn default() -> Self {
        SruColumns {
            inputs: ["a1", "a2", "a3", "a4", "a5"].map(String::from).to_vec(),
            h2s: "y1".into(),
            so2: "y2".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SruConfig {
    /// Plant data; falls back to the `SRU_CSV` environment variable.
    pub csv: Option<PathBuf>,
    pub columns: SruColumns,
    pub lags: Vec<usize>,
    pub train_fraction: f64,
    pub svm: SvmSettings,
    /// Rows used for the SVM and its gamma search, taken at even stride.
    pub svm_rows: usize,
    pub h2s_hidden: Vec<usize>,
    pub so2_hidden: Vec<usize>,
    pub train: TrainConfig,
    pub tda: TdaSettings,
    pub solver: SolverOptions,
    pub output_dir: Option<PathBuf>,
}

impl Default for SruConfig {
    fn default() -> Self {
        SruConfig {
            csv: None,
            columns: SruColumns::default(),
            lags: vec![0, 5, 7, 9],
            train_fraction: 0.9,
            svm: SvmSettings::default(),
            svm_rows: 2000,
            h2s_hidden: vec![8, 8],
            so2_hidden: vec![8],
            train: TrainConfig {
                max_epochs: 1000,
                learning_rate: 5e-3,
                ..TrainConfig::default()
            },
            tda: TdaSettings::default(),
            solver: SolverOptions::default(),
            output_dir: None,
        }
    }
}

impl SruConfig {
    pub fn load_json(path: &Path) -> Result<SruConfig> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }
}

#[derive(Debug, Clone)]
pub struct SruOutcome {
    pub report: SolveReport,
    /// Chosen secondary air flow.
    pub x3: Option<f64>,
    pub c_h2s: Option<f64>,
    pub c_so2: Option<f64>,
    /// `|c_H2S - 2 c_SO2|` at the chosen action.
    pub objective: Option<f64>,
    pub summary: TopologySummary,
    pub gamma: f64,
    pub n_train: usize,
    pub h2s: MlpModel,
    pub so2: MlpModel,
}

fn resolve_csv(cfg: &SruConfig) -> Result<PathBuf> {
    let path = cfg
        .csv
        .clone()
        .or_else(|| std::env::var_os("SRU_CSV").map(PathBuf::from))
        .ok_or_else(|| {
            Error::Config(format!(
                "no SRU data given; download the sulfur recovery data set from {SRU_DOWNLOAD}, export it as CSV \
                 and pass its path (or set SRU_CSV)"
            ))
        })?;
    if !path.exists() {
        return Err(Error::Config(format!(
            "SRU data {} not found; it can be downloaded from {SRU_DOWNLOAD}",
            path.display()
        )));
    }
    Ok(path)
}

/// Deterministic stand-in with the plant's column layout: five
/// mean-reverting inputs around the operating point and two outputs that
/// respond in opposite directions to the air excess, so that `H2S = 2 SO2`
/// is reachable by adjusting the secondary air.
pub fn synthetic_sru_table(n_rows: usize, seed: u64) -> Table {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = [0.62, 0.76, 0.2, 0.39, 0.51];
    let phi = [0.97, 0.97, 0.85, 0.97, 0.97];
    let sigma = [0.008, 0.008, 0.05, 0.008, 0.008];
    let mut x = mean;
    let mut cols = vec![Vec::with_capacity(n_rows); 7];
    let mut a3 = vec![mean[2]; 6];
    for _ in 0..n_rows {
        for i in 0..5 {
            let e: f64 = StandardNormal.sample(&mut rng);
            x[i] = (mean[i] + phi[i] * (x[i] - mean[i]) + sigma[i] * e).clamp(0.0, 1.0);
        }
        a3.remove(0);
        a3.push(x[2]);
        let excess =
            0.6 * x[1] + 0.9 * x[2] + 0.3 * a3[0] + 0.4 * x[3] - 0.8 * x[0] - 0.5 * x[4] - 0.15;
        let n1: f64 = StandardNormal.sample(&mut rng);
        let n2: f64 = StandardNormal.sample(&mut rng);
        let h2s = 0.2 * (-3.0 * excess).exp() + 0.002 * n1;
        let so2 = 0.1 * (3.0 * excess).exp() + 0.002 * n2;
        for i in 0..5 {
            cols[i].push(x[i]);
        }
        cols[5].push(h2s);
        cols[6].push(so2);
    }
    let cols_default = SruColumns::default();
    let mut names = cols_default.inputs.clone();
    names.push(cols_default.h2s);
    names.push(cols_default.so2);
    Table {
        names,
        columns: cols,
    }
}

/// Writes the synthetic stand-in as CSV.
pub fn write_synthetic_sru_csv(path: &Path, n_rows: usize, seed: u64) -> Result<()> {
    write_table_csv(&synthetic_sru_table(n_rows, seed), path)
}

fn targets(col: &[f64], lag: usize, rows: usize) -> Result<PointCloud> {
    PointCloud::new(col[lag..lag + rows].iter().map(|&v| vec![v]).collect())
}

/// Trains the validity model and both concentration networks on the first
/// part of the series, then solves the control step at the operating point.
pub fn run_sru(cfg: &SruConfig) -> Result<SruOutcome> {
    let path = stage("data", resolve_csv(cfg))?;
    let c = &cfg.columns;
    if c.inputs.len() != 5 {
        return Err(Error::Config("SRU needs exactly five input columns".into()));
    }
    let mut names: Vec<&str> = c.inputs.iter().map(String::as_str).collect();
    names.push(&c.h2s);
    names.push(&c.so2);
    let table = stage("data", load_timeseries_csv(&path, &names))?;
    let n_train_rows = (table.n_rows() as f64 * cfg.train_fraction).floor() as usize;
    let train = table.slice_rows(0, n_train_rows);
    let spec = LagSpec::new(c.inputs.clone(), cfg.lags.clone())?;
    let features = stage("data", build_lag_features(&train, &spec))?;
    let max_lag = spec.max_lag();

    let (diagram, summary) = stage("tda", analyze_topology(&features, &cfg.tda))?;
    let stride = features.len().div_ceil(cfg.svm_rows.max(1)).max(1);
    let svm_rows: Vec<usize> = (0..features.len()).step_by(stride).collect();
    let svm_data = features.subset(&svm_rows);
    let svm = stage("validity", train_svm(&svm_data, &cfg.svm))?;

    let h2s_t = targets(train.column(&c.h2s).unwrap(), max_lag, features.len())?;
    let so2_t = targets(train.column(&c.so2).unwrap(), max_lag, features.len())?;
    let (h2s, _) = stage(
        "surrogate",
        ann::train_mlp(&features, &h2s_t, &cfg.h2s_hidden, &cfg.train),
    )?;
    let (so2, _) = stage(
        "surrogate",
        ann::train_mlp(&features, &so2_t, &cfg.so2_hidden, &cfg.train),
    )?;

    let mut inputs = vec![Input::Fixed(0.0); spec.feature_dim()];
    for (s, signal) in c.inputs.iter().enumerate() {
        for (l, &lag) in cfg.lags.iter().enumerate() {
            let idx = spec.feature_index(signal, lag).unwrap();
            inputs[idx] = match OPERATING_POINT.get(s).and_then(|r| r.get(l)) {
                Some(Some(v)) => Input::Fixed(*v),
                Some(None) => Input::Var(0),
                None => {
                    return Err(Error::Config(format!(
                        "no operating point for {signal} at lag {lag}"
                    )))
                }
            };
        }
    }
    let mut problem = Problem::new(
        vec![Interval::new(0.0, 1.0)],
        Surrogate::Balance {
            h2s: h2s.clone(),
            so2: so2.clone(),
        },
        Validity::Svm(svm.clone()),
    )
    .with_inputs(inputs);
    problem.fixed_parameters = spec
        .feature_names()
        .into_iter()
        .zip(&problem.inputs)
        .filter_map(|(n, i)| match i {
            Input::Fixed(v) => Some((n, *v)),
            Input::Var(_) => None,
        })
        .collect();
    let report = stage("optimize", solver::solve(&problem, &cfg.solver))?;

    let (x3, c_h2s, c_so2, objective) = match &report.x_star {
        Some(x) => {
            let u = problem.full_input(x);
            let a = h2s.forward(&u)?[0];
            let b = so2.forward(&u)?[0];
            (Some(x[0]), Some(a), Some(b), Some((a - 2.0 * b).abs()))
        }
        None => (None, None, None, None),
    };

    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        tda::write_diagram_csv(&diagram, &dir.join("diagram.csv"))?;
        tda::write_diagram_svg(&diagram, &dir.join("diagram.svg"))?;
        std::fs::write(
            dir.join("summary.json"),
            serde_json::to_string_pretty(&summary)?,
        )?;
        svm.save_json(&dir.join("model.json"))?;
        h2s.save_json(&dir.join("ann_h2s.json"))?;
        so2.save_json(&dir.join("ann_so2.json"))?;
        report.save_json(&dir.join("solve.json"))?;
        let fmt = |v: Option<f64>| v.map_or("-".into(), |v| format!("{v:.6}"));
        let table = format!(
            "status           {:?}\nx3[k]            {}\nc_H2S            {}\nc_SO2            {}\n|c_H2S - 2c_SO2| {}\ngamma            {}\nsupport vectors  {}\n",
            report.status,
            fmt(x3),
            fmt(c_h2s),
            fmt(c_so2),
            fmt(objective),
            svm.kernel.gamma(),
            svm.n_support()
        );
        std::fs::write(dir.join("table.txt"), table)?;
    }

    Ok(SruOutcome {
        report,
        x3,
        c_h2s,
        c_so2,
        objective,
        summary,
        gamma: svm.kernel.gamma(),
        n_train: features.len(),
        h2s,
        so2,
    })
}
