//! End-to-end runs: topology analysis, validity model, surrogate and
//! constrained optimization, with every intermediate written to disk.
//!
//! A run directory `runs/<name>/` holds
//!
//! | file | content |
//! |---|---|
//! | `diagram.csv`, `diagram.svg` | persistence diagram |
//! | `summary.json` | topology summary and recommendation |
//! | `facets.csv` or `model.json` | validity model |
//! | `overlay.svg` | data with the validity boundary (2-D only) |
//! | `surrogate.json` | trained network, when one is used |
//! | `solve.json` | solver report |
//! | `table.txt` | human-readable summary |

mod case;
mod sru;
mod suite;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

pub use case::{
    case_problem, case_study_train_config, prepare_case_study, CaseSettings, CaseStudy,
};
pub use sru::{
    run_sru, synthetic_sru_table, write_synthetic_sru_csv, SruColumns, SruConfig, SruOutcome,
    OPERATING_POINT, SRU_DOWNLOAD,
};
pub use suite::{run_case_study_suite, SuiteCell, SuiteOptions, SuiteTable};

use crate::ann::{self, MlpModel, TrainConfig};
use crate::datasets::{generate_dataset, DatasetSpec, PointCloud, Shape};
use crate::error::{Error, Result};
use crate::hull;
use crate::ocsvm::{self, KernelSpec, OneClassSvmModel, TrainOptions};
use crate::relax::Interval;
use crate::solver::{self, Problem, SolveReport, SolverOptions, Surrogate, Validity};
use crate::tda::{self, PersistenceDiagram, Recommendation, TopologySummary};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Generate {
        shape: Shape,
        #[serde(default = "default_n_points")]
        n_points: usize,
        #[serde(default)]
        seed: u64,
    },
    Csv {
        path: PathBuf,
    },
}

fn default_n_points() -> usize {
    crate::datasets::DEFAULT_N_POINTS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TdaSettings {
    pub max_eps: Option<f64>,
    pub subsample_cap: usize,
    pub threshold: f64,
    pub seed: u64,
}

impl Default for TdaSettings {
    fn default() -> Self {
        TdaSettings {
            max_eps: None,
            subsample_cap: 512,
            threshold: tda::DEFAULT_PERSISTENCE_RATIO,
            seed: 7,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelChoice {
    Auto,
    Hull,
    Svm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmSettings {
    pub nu: f64,
    pub gamma: Option<f64>,
    pub schedule: Option<Vec<f64>>,
}

impl Default for SvmSettings {
    fn default() -> Self {
        SvmSettings {
            nu: 0.03,
            gamma: None,
            schedule: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SurrogateSettings {
    /// Optimize the analytic peaks function directly.
    Peaks,
    /// Fit a network to peaks on the data and optimize the network.
    Ann {
        hidden: Vec<usize>,
        train: TrainConfig,
    },
}

impl Default for SurrogateSettings {
    fn default() -> Self {
        SurrogateSettings::Ann {
            hidden: vec![6, 8],
            train: case_study_train_config(7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub name: String,
    pub data: DataSource,
    pub tda: TdaSettings,
    pub model: ModelChoice,
    pub svm: SvmSettings,
    pub surrogate: SurrogateSettings,
    pub solver: SolverOptions,
    /// Variable bounds; the data bounding box when absent.
    pub bounds: Option<Vec<[f64; 2]>>,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            name: "run".into(),
            data: DataSource::Generate {
                shape: Shape::Box,
                n_points: default_n_points(),
                seed: 7,
            },
            tda: TdaSettings::default(),
            model: ModelChoice::Auto,
            svm: SvmSettings::default(),
            surrogate: SurrogateSettings::default(),
            solver: SolverOptions::default(),
            bounds: None,
            output_dir: PathBuf::from("runs"),
        }
    }
}

impl RunConfig {
    pub fn load_json(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn run_dir(&self) -> PathBuf {
        self.output_dir.join(&self.name)
    }
}

/// Everything a run produced, besides the files.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub dir: PathBuf,
    pub diagram: PersistenceDiagram,
    pub summary: TopologySummary,
    pub model_used: ModelChoice,
    pub report: SolveReport,
    /// `|surrogate(x*) - peaks(x*)|`, when a network is optimized.
    pub delta: Option<f64>,
    pub table: String,
}

fn stage<T>(name: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| Error::stage(name, e))
}

pub fn load_data(source: &DataSource) -> Result<PointCloud> {
    match source {
        DataSource::Generate {
            shape,
            n_points,
            seed,
        } => generate_dataset(&DatasetSpec::new(*shape, *n_points, *seed)),
        DataSource::Csv { path } => PointCloud::read_csv(path),
    }
}

/// Persistence diagram of the cloud, maxmin-subsampled to the cap first.
pub fn analyze_topology(
    cloud: &PointCloud,
    settings: &TdaSettings,
) -> Result<(PersistenceDiagram, TopologySummary)> {
    let sub;
    let target = if cloud.len() > settings.subsample_cap {
        sub = tda::maxmin_subsample(cloud, settings.subsample_cap, settings.seed)?.cloud;
        &sub
    } else {
        cloud
    };
    let diagram = tda::rips_persistence(target, settings.max_eps);
    let summary = tda::summarize(&diagram, settings.threshold);
    Ok((diagram, summary))
}

/// Trains the one-class SVM, picking gamma from the schedule unless fixed.
pub fn train_svm(cloud: &PointCloud, settings: &SvmSettings) -> Result<OneClassSvmModel> {
    let gamma = match settings.gamma {
        Some(g) => g,
        None => {
            let schedule = settings
                .schedule
                .clone()
                .unwrap_or_else(ocsvm::default_gamma_schedule);
            ocsvm::select_gamma(
                cloud,
                settings.nu,
                &schedule,
                ocsvm::DEFAULT_PLATEAU,
                &TrainOptions::default(),
            )?
            .gamma
        }
    };
    ocsvm::train(cloud, settings.nu, KernelSpec::rbf(gamma)?)
}

/// Network fitted to peaks on the cloud.
pub fn train_peaks_surrogate(
    cloud: &PointCloud,
    hidden: &[usize],
    cfg: &TrainConfig,
) -> Result<MlpModel> {
    if cloud.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: cloud.dim(),
        });
    }
    let targets = PointCloud::new(
        cloud
            .points()
            .iter()
            .map(|p| vec![ann::peaks(p[0], p[1])])
            .collect(),
    )?;
    Ok(ann::train_mlp(cloud, &targets, hidden, cfg)?.0)
}

pub fn bounds_of(cloud: &PointCloud) -> Vec<Interval> {
    cloud
        .bounds()
        .into_iter()
        .map(|(lo, hi)| Interval::new(lo, hi))
        .collect()
}

fn fmt_vec(x: &Option<Vec<f64>>) -> String {
    match x {
        Some(v) => format!(
            "({})",
            v.iter()
                .map(|c| format!("{c:.4}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
        None => "-".into(),
    }
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.6}"))
}

/// Runs the three stages and writes the run directory.
pub fn run_pipeline(config: &RunConfig) -> Result<RunOutcome> {
    let dir = config.run_dir();
    std::fs::create_dir_all(&dir)?;
    let cloud = stage("data", load_data(&config.data))?;

    let (diagram, summary) = stage("tda", analyze_topology(&cloud, &config.tda))?;
    stage(
        "tda",
        tda::write_diagram_csv(&diagram, &dir.join("diagram.csv")),
    )?;
    stage(
        "tda",
        tda::write_diagram_svg(&diagram, &dir.join("diagram.svg")),
    )?;
    std::fs::write(
        dir.join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;

    let model_used = match config.model {
        ModelChoice::Auto => match summary.recommendation {
            Recommendation::ConvexHull => ModelChoice::Hull,
            Recommendation::OneClassSvm => ModelChoice::Svm,
        },
        other => other,
    };
    let validity = match model_used {
        ModelChoice::Svm => {
            let m = stage("validity", train_svm(&cloud, &config.svm))?;
            m.save_json(&dir.join("model.json"))?;
            if cloud.dim() == 2 {
                std::fs::write(
                    dir.join("overlay.svg"),
                    ocsvm::svm_overlay_svg(&cloud, &m, 80)?,
                )?;
            }
            Validity::Svm(m)
        }
        _ => {
            let f = stage("validity", hull::facets_for_cloud(&cloud))?;
            hull::write_facets_csv(&f, &dir.join("facets.csv"))?;
            if cloud.dim() == 2 {
                let v = hull::convex_hull_2d(&cloud)?;
                std::fs::write(dir.join("overlay.svg"), hull::hull_overlay_svg(&cloud, &v)?)?;
            }
            Validity::Facets(f)
        }
    };

    let (objective, net) = match &config.surrogate {
        SurrogateSettings::Peaks => (Surrogate::Peaks, None),
        SurrogateSettings::Ann { hidden, train } => {
            let m = stage("surrogate", train_peaks_surrogate(&cloud, hidden, train))?;
            m.save_json(&dir.join("surrogate.json"))?;
            (Surrogate::Mlp(m.clone()), Some(m))
        }
    };
    let bounds = match &config.bounds {
        Some(b) => b.iter().map(|r| Interval::new(r[0], r[1])).collect(),
        None => bounds_of(&cloud),
    };
    let problem = Problem::new(bounds, objective, validity);
    let report = stage("optimize", solver::solve(&problem, &config.solver))?;
    report.save_json(&dir.join("solve.json"))?;

    let delta = match (&net, &report.x_star) {
        (Some(m), Some(x)) => Some((m.forward(x)?[0] - ann::peaks(x[0], x[1])).abs()),
        _ => None,
    };
    let model_name = match model_used {
        ModelChoice::Svm => "one_class_svm",
        _ => "convex_hull",
    };
    let rows = [
        ("run", config.name.clone()),
        ("points", cloud.len().to_string()),
        ("long clusters", summary.n_long_clusters.to_string()),
        ("long holes", summary.n_long_holes.to_string()),
        ("recommendation", format!("{:?}", summary.recommendation)),
        ("validity model", model_name.into()),
        ("mode", format!("{:?}", report.mode)),
        ("status", format!("{:?}", report.status)),
        ("x*", fmt_vec(&report.x_star)),
        ("f*", fmt_opt(report.f_star)),
        ("lower bound", fmt_opt(report.lower_bound)),
        ("delta vs peaks", fmt_opt(delta)),
        ("nodes", report.nodes_processed.to_string()),
    ];
    let table: String = rows.iter().map(|(k, v)| format!("{k:<16} {v}\n")).collect();
    std::fs::write(dir.join("table.txt"), &table)?;

    Ok(RunOutcome {
        dir,
        diagram,
        summary,
        model_used,
        report,
        delta,
        table,
    })
}
