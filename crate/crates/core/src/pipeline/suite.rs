use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ann;
use crate::datasets::Shape;
use crate::error::Result;
use crate::pipeline::{case_problem, prepare_case_study, CaseSettings};
use crate::solver::{self, Mode, SolverOptions, Status};

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOptions {
    pub case: CaseSettings,
    pub solver: SolverOptions,
    pub modes: Vec<Mode>,
    pub shapes: Vec<Shape>,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        SuiteOptions {
            case: CaseSettings::default(),
            solver: SolverOptions::default(),
            modes: vec![Mode::Rs, Mode::Fs],
            shapes: Shape::ALL.to_vec(),
        }
    }
}

/// One (dataset, validity model, formulation) solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteCell {
    pub shape: Shape,
    pub validity: String,
    pub mode: Mode,
    pub status: Status,
    pub x_star: Option<Vec<f64>>,
    pub f_star: Option<f64>,
    pub delta: Option<f64>,
    pub nodes: usize,
    pub n_variables: usize,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteTable {
    pub seed: u64,
    pub cells: Vec<SuiteCell>,
}

/// Solves every case study under both validity models in every requested
/// formulation. Time-limited cells are recorded, not fatal.
pub fn run_case_study_suite(seed: u64, opts: &SuiteOptions) -> Result<SuiteTable> {
    let mut cells = Vec::new();
    for &shape in &opts.shapes {
        let cs = prepare_case_study(shape, seed, &opts.case)?;
        for svm in [false, true] {
            let problem = case_problem(&cs, svm);
            for &mode in &opts.modes {
                let r = solver::solve(
                    &problem,
                    &SolverOptions {
                        mode,
                        ..opts.solver.clone()
                    },
                )?;
                let delta = r
                    .x_star
                    .as_ref()
                    .map(|x| (problem.objective_value(x) - ann::peaks(x[0], x[1])).abs());
                cells.push(SuiteCell {
                    shape,
                    validity: if svm { "svm" } else { "hull" }.into(),
                    mode,
                    status: r.status,
                    x_star: r.x_star,
                    f_star: r.f_star,
                    delta,
                    nodes: r.nodes_processed,
                    n_variables: r.n_variables,
                    seconds: r.cpu_seconds,
                });
            }
        }
    }
    Ok(SuiteTable { seed, cells })
}

fn num(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| format!("{v}"))
}

impl SuiteTable {
    pub fn cell(&self, shape: Shape, validity: &str, mode: Mode) -> Option<&SuiteCell> {
        self.cells
            .iter()
            .find(|c| c.shape == shape && c.validity == validity && c.mode == mode)
    }

    /// One line per cell.
    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "dataset,validity,mode,status,x1,x2,f_star,delta,nodes,variables,seconds\n",
        );
        for c in &self.cells {
            let (x1, x2) = match &c.x_star {
                Some(x) => (format!("{}", x[0]), format!("{}", x[1])),
                None => (String::new(), String::new()),
            };
            let _ = writeln!(
                s,
                "{},{},{:?},{:?},{x1},{x2},{},{},{},{},{:.4}",
                c.shape,
                c.validity,
                c.mode,
                c.status,
                num(c.f_star),
                num(c.delta),
                c.nodes,
                c.n_variables,
                c.seconds
            );
        }
        s.to_lowercase()
    }

    /// One row per dataset, both validity models side by side.
    pub fn to_text(&self) -> String {
        let mut shapes: Vec<Shape> = Vec::new();
        for c in &self.cells {
            if !shapes.contains(&c.shape) {
                shapes.push(c.shape);
            }
        }
        let mut s = format!(
            "{:<17}| {:>18} {:>9} {:>7} {:>8} {:>8} {:>8} | {:>18} {:>9} {:>7} {:>8} {:>8} {:>8}\n",
            "dataset",
            "hull x*",
            "f*",
            "delta",
            "rs nodes",
            "fs nodes",
            "speedup",
            "svm x*",
            "f*",
            "delta",
            "rs nodes",
            "fs nodes",
            "speedup"
        );
        for shape in shapes {
            let _ = write!(s, "{:<17}", shape.to_string());
            for v in ["hull", "svm"] {
                let rs = self.cell(shape, v, Mode::Rs);
                let fs = self.cell(shape, v, Mode::Fs);
                let best = rs.or(fs);
                let x = best
                    .and_then(|c| c.x_star.as_ref())
                    .map_or("-".into(), |x| format!("({:.3}, {:.3})", x[0], x[1]));
                let f = best
                    .and_then(|c| c.f_star)
                    .map_or("-".into(), |f| format!("{f:.4}"));
                let d = best
                    .and_then(|c| c.delta)
                    .map_or("-".into(), |d| format!("{d:.3}"));
                let nodes = |c: Option<&SuiteCell>| c.map_or("-".into(), |c| c.nodes.to_string());
                let speedup = match (rs, fs) {
                    (Some(a), Some(b)) if a.seconds > 0.0 => {
                        format!("{:.1}", b.seconds / a.seconds)
                    }
                    _ => "-".into(),
                };
                let _ = write!(
                    s,
                    "| {x:>18} {f:>9} {d:>7} {:>8} {:>8} {speedup:>8} ",
                    nodes(rs),
                    nodes(fs)
                );
            }
            s.push('\n');
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("suite.csv"), self.to_csv())?;
        std::fs::write(dir.join("suite.txt"), self.to_text())?;
        Ok(())
    }
}
