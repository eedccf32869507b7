use crate::ann::{MlpModel, TrainConfig};
use crate::datasets::{generate_dataset, DatasetSpec, PointCloud, Shape};
use crate::error::Result;
use crate::hull::{self, FacetSystem};
use crate::ocsvm::OneClassSvmModel;
use crate::pipeline::{
    analyze_topology, bounds_of, train_peaks_surrogate, train_svm, SvmSettings, TdaSettings,
};
use crate::solver::{Problem, Surrogate, Validity};
use crate::tda::{PersistenceDiagram, TopologySummary};

/// Training settings for the case-study networks: the library defaults with
/// a larger Adam step, which the 600-point clouds need to reach a good fit
/// within the epoch budget.
pub fn case_study_train_config(seed: u64) -> TrainConfig {
    TrainConfig {
        learning_rate: 5e-3,
        seed,
        ..TrainConfig::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSettings {
    pub n_points: usize,
    pub tda: TdaSettings,
    pub svm: SvmSettings,
    pub hidden: Vec<usize>,
}

impl Default for CaseSettings {
    fn default() -> Self {
        CaseSettings {
            n_points: crate::datasets::DEFAULT_N_POINTS,
            tda: TdaSettings::default(),
            svm: SvmSettings::default(),
            hidden: vec![6, 8],
        }
    }
}

/// One 2-D case study with both validity models and its surrogate.
#[derive(Debug, Clone)]
pub struct CaseStudy {
    pub shape: Shape,
    pub cloud: PointCloud,
    pub diagram: PersistenceDiagram,
    pub summary: TopologySummary,
    pub hull: FacetSystem,
    pub svm: OneClassSvmModel,
    pub surrogate: MlpModel,
}

pub fn prepare_case_study(shape: Shape, seed: u64, settings: &CaseSettings) -> Result<CaseStudy> {
    let cloud = generate_dataset(&DatasetSpec::new(shape, settings.n_points, seed))?;
    let tda = crate::pipeline::TdaSettings {
        seed,
        ..settings.tda.clone()
    };
    let (diagram, summary) = analyze_topology(&cloud, &tda)?;
    let hull = hull::facets_for_cloud(&cloud)?;
    let svm = train_svm(&cloud, &settings.svm)?;
    let surrogate =
        train_peaks_surrogate(&cloud, &settings.hidden, &case_study_train_config(seed))?;
    Ok(CaseStudy {
        shape,
        cloud,
        diagram,
        summary,
        hull,
        svm,
        surrogate,
    })
}

/// Surrogate minimization over the data bounding box under the hull
/// (`svm = false`) or the SVM.
pub fn case_problem(cs: &CaseStudy, svm: bool) -> Problem {
    let validity = if svm {
        Validity::Svm(cs.svm.clone())
    } else {
        Validity::Facets(cs.hull.clone())
    };
    Problem::new(
        bounds_of(&cs.cloud),
        Surrogate::Mlp(cs.surrogate.clone()),
        validity,
    )
}
