use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use validom::ann::{self, TrainConfig};
use validom::datasets::{generate_dataset, DatasetSpec, PointCloud, Shape};
use validom::hull;
use validom::ocsvm;
use validom::pipeline::{
    self, run_case_study_suite, run_pipeline, run_sru, write_synthetic_sru_csv, ModelChoice,
    RunConfig, SruConfig, SuiteOptions, SvmSettings, TdaSettings,
};
use validom::solver::{Mode, SolverOptions, Status};
use validom::tda;
use validom::Error;

#[derive(Parser)]
#[command(
    name = "validom",
    version,
    about = "Validity-domain modeling and global optimization of surrogate models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample one of the 2-D case-study point clouds.
    Generate {
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 600)]
        n: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Persistence diagram and topology summary of a point cloud.
    Analyze {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        max_eps: Option<f64>,
        #[arg(long, default_value_t = 512)]
        cap: usize,
        #[arg(long, default_value_t = tda::DEFAULT_PERSISTENCE_RATIO)]
        threshold: f64,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Directory receiving diagram.csv, diagram.svg and summary.json.
        #[arg(long)]
        out: PathBuf,
    },
    /// Convex hull facets `A x + b <= 0` of a point cloud.
    Hull {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Optional overlay plot (2-D only).
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// One-class SVM with an RBF kernel.
    TrainSvm {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, default_value_t = 0.03)]
        nu: f64,
        /// Kernel width; chosen from the default schedule when absent.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Feed-forward tanh network fitted by minibatch Adam.
    TrainAnn {
        #[arg(long)]
        data: PathBuf,
        /// Target CSV with one row per input row; peaks of the inputs when absent.
        #[arg(long)]
        targets: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "6,8")]
        hidden: Vec<usize>,
        #[arg(long, default_value_t = 4000)]
        epochs: usize,
        #[arg(long, default_value_t = 1e-3)]
        lr: f64,
        #[arg(long, default_value_t = 128)]
        batch: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Per-epoch loss log.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Full run: topology, validity model, surrogate and global optimization.
    Optimize {
        /// JSON run configuration; flags override its entries.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        name: Option<String>,
        #[arg(long)]
        shape: Option<String>,
        #[arg(long)]
        data: Option<PathBuf>,
        /// auto, hull or svm.
        #[arg(long)]
        model: Option<String>,
        /// Optimize analytic peaks instead of a fitted network.
        #[arg(long)]
        peaks: bool,
        #[arg(long)]
        output_dir: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// All eight case studies under both validity models and both formulations.
    Suite {
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "rs,fs")]
        modes: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        shapes: Vec<String>,
        #[arg(long, default_value = "runs/suite")]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// One open-loop control step of the sulfur recovery unit.
    Sru {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Plant data CSV (also read from SRU_CSV).
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Write a synthetic series of this many rows to the output directory and use it.
        #[arg(long)]
        synthetic: Option<usize>,
        #[arg(long, default_value = "runs/sru")]
        out: PathBuf,
        #[command(flatten)]
        solver: SolverFlags,
    },
}

#[derive(Args, Default)]
struct SolverFlags {
    /// rs or fs.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    abs_tol: Option<f64>,
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Seconds.
    #[arg(long)]
    time_limit: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
}

impl SolverFlags {
    fn apply(&self, o: &mut SolverOptions) -> validom::Result<()> {
        if let Some(m) = &self.mode {
            o.mode = m.parse()?;
        }
        if let Some(v) = self.abs_tol {
            o.abs_tol = v;
        }
        if let Some(v) = self.rel_tol {
            o.rel_tol = v;
        }
        if let Some(v) = self.time_limit {
            o.time_limit = v;
        }
        if let Some(v) = self.seed {
            o.seed = v;
        }
        Ok(())
    }
}

const EXIT_CONFIG: u8 = 2;
const EXIT_STAGE: u8 = 3;
const EXIT_TIME_LIMIT: u8 = 4;

fn model_choice(s: &str) -> validom::Result<ModelChoice> {
    match s {
        "auto" => Ok(ModelChoice::Auto),
        "hull" => Ok(ModelChoice::Hull),
        "svm" => Ok(ModelChoice::Svm),
        _ => Err(Error::Config(format!(
            "unknown model `{s}` (expected auto, hull or svm)"
        ))),
    }
}

fn status_code(status: Status) -> u8 {
    match status {
        Status::TimeLimit => EXIT_TIME_LIMIT,
        _ => 0,
    }
}

fn run(cli: Cli) -> validom::Result<u8> {
    match cli.command {
        Command::Generate {
            shape,
            n,
            seed,
            out,
        } => {
            let shape: Shape = shape.parse()?;
            generate_dataset(&DatasetSpec::new(shape, n, seed))?.write_csv(&out)?;
            Ok(0)
        }
        Command::Analyze {
            data,
            max_eps,
            cap,
            threshold,
            seed,
            out,
        } => {
            let cloud = PointCloud::read_csv(&data)?;
            let settings = TdaSettings {
                max_eps,
                subsample_cap: cap,
                threshold,
                seed,
            };
            let (diagram, summary) = pipeline::analyze_topology(&cloud, &settings)?;
            std::fs::create_dir_all(&out)?;
            tda::write_diagram_csv(&diagram, &out.join("diagram.csv"))?;
            tda::write_diagram_svg(&diagram, &out.join("diagram.svg"))?;
            let json = serde_json::to_string_pretty(&summary)?;
            std::fs::write(out.join("summary.json"), &json)?;
            println!("{json}");
            Ok(0)
        }
        Command::Hull { data, out, svg } => {
            let cloud = PointCloud::read_csv(&data)?;
            let facets = hull::facets_for_cloud(&cloud)?;
            hull::write_facets_csv(&facets, &out)?;
            if let Some(svg) = svg {
                let v = hull::convex_hull_2d(&cloud)?;
                std::fs::write(svg, hull::hull_overlay_svg(&cloud, &v)?)?;
            }
            println!("{} facets", facets.n_facets());
            Ok(0)
        }
        Command::TrainSvm {
            data,
            nu,
            gamma,
            out,
            svg,
        } => {
            let cloud = PointCloud::read_csv(&data)?;
            let model = pipeline::train_svm(
                &cloud,
                &SvmSettings {
                    nu,
                    gamma,
                    schedule: None,
                },
            )?;
            model.save_json(&out)?;
            if let Some(svg) = svg {
                std::fs::write(svg, ocsvm::svm_overlay_svg(&cloud, &model, 80)?)?;
            }
            println!(
                "gamma {} support vectors {}",
                model.kernel.gamma(),
                model.n_support()
            );
            Ok(0)
        }
        Command::TrainAnn {
            data,
            targets,
            hidden,
            epochs,
            lr,
            batch,
            seed,
            out,
            log,
        } => {
            let inputs = PointCloud::read_csv(&data)?;
            let targets = match targets {
                Some(p) => PointCloud::read_csv(&p)?,
                None => {
                    if inputs.dim() != 2 {
                        return Err(Error::Config(
                            "peaks targets need 2-D inputs; pass --targets".into(),
                        ));
                    }
                    PointCloud::new(
                        inputs
                            .points()
                            .iter()
                            .map(|p| vec![ann::peaks(p[0], p[1])])
                            .collect(),
                    )?
                }
            };
            let cfg = TrainConfig {
                batch_size: batch,
                max_epochs: epochs,
                learning_rate: lr,
                seed,
                ..TrainConfig::default()
            };
            let (model, report) = ann::train_mlp(&inputs, &targets, &hidden, &cfg)?;
            model.save_json(&out)?;
            if let Some(log) = log {
                report.write_log_csv(&log)?;
            }
            println!("scaled mse {:.6}", report.final_mse);
            Ok(0)
        }
        Command::Optimize {
            config,
            name,
            shape,
            data,
            model,
            peaks,
            output_dir,
            solver,
        } => {
            let mut cfg = match config {
                Some(p) => RunConfig::load_json(&p)?,
                None => RunConfig::default(),
            };
            if let Some(n) = name {
                cfg.name = n;
            }
            if let Some(s) = shape {
                cfg.data = pipeline::DataSource::Generate {
                    shape: s.parse()?,
                    n_points: validom::datasets::DEFAULT_N_POINTS,
                    seed: 7,
                };
            }
            if let Some(path) = data {
                cfg.data = pipeline::DataSource::Csv { path };
            }
            if let Some(m) = model {
                cfg.model = model_choice(&m)?;
            }
            if peaks {
                cfg.surrogate = pipeline::SurrogateSettings::Peaks;
            }
            if let Some(d) = output_dir {
                cfg.output_dir = d;
            }
            solver.apply(&mut cfg.solver)?;
            let outcome = run_pipeline(&cfg)?;
            print!("{}", outcome.table);
            Ok(status_code(outcome.report.status))
        }
        Command::Suite {
            seed,
            modes,
            shapes,
            out,
            solver,
        } => {
            let mut opts = SuiteOptions::default();
            solver.apply(&mut opts.solver)?;
            opts.modes = modes
                .iter()
                .map(|m| m.parse())
                .collect::<validom::Result<Vec<Mode>>>()?;
            if !shapes.is_empty() {
                opts.shapes = shapes
                    .iter()
                    .map(|s| s.parse())
                    .collect::<validom::Result<Vec<Shape>>>()?;
            }
            let table = run_case_study_suite(seed, &opts)?;
            table.write(&out)?;
            print!("{}", table.to_text());
            let limited = table.cells.iter().any(|c| c.status == Status::TimeLimit);
            Ok(if limited { EXIT_TIME_LIMIT } else { 0 })
        }
        Command::Sru {
            config,
            csv,
            synthetic,
            out,
            solver,
        } => {
            let mut cfg: SruConfig = match config {
                Some(p) => SruConfig::load_json(&p)?,
                None => SruConfig::default(),
            };
            std::fs::create_dir_all(&out)?;
            if let Some(n) = synthetic {
                let path = out.join("synthetic_sru.csv");
                write_synthetic_sru_csv(&path, n, 7)?;
                cfg.csv = Some(path);
            }
            if let Some(c) = csv {
                cfg.csv = Some(c);
            }
            cfg.output_dir = Some(out.clone());
            solver.apply(&mut cfg.solver)?;
            let outcome = run_sru(&cfg)?;
            print!("{}", std::fs::read_to_string(out.join("table.txt"))?);
            Ok(status_code(outcome.report.status))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => EXIT_CONFIG,
        Error::Stage { source, .. } if matches!(**source, Error::Config(_)) => EXIT_CONFIG,
        _ => EXIT_STAGE,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
