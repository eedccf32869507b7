//! Deterministic branch-and-bound for surrogate objectives under a validity
//! constraint.
//!
//! Two formulations of the same problem are available. The reduced-space
//! mode branches on the degrees of freedom only and bounds each box with
//! McCormick relaxations of the composed model. The full-space mode keeps
//! every kernel distance, kernel value and neuron output as a bounded
//! auxiliary variable, couples them through interval constraint propagation
//! and may branch on any of them.

mod local;
mod problem;

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use local::local_refine;
pub use problem::{Problem, Surrogate, Validity};

use crate::error::{Error, Result};
use crate::relax::{
    cc_cut, constraint_bounds, lower_bound_with_cuts, Expr, Interval, LinearCut, NodeId, Op,
};
use local::Refiner;

/// Tolerance on the SVM decision function.
pub const FEAS_TOL: f64 = 1e-6;
/// Tolerance on facet inequalities.
pub const FACET_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Rs,
    Fs,
}

impl std::str::FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "rs" => Ok(Mode::Rs),
            "fs" => Ok(Mode::Fs),
            _ => Err(Error::Config(format!(
                "unknown mode `{s}` (expected rs or fs)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub mode: Mode,
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub time_limit: f64,
    pub seed: u64,
    pub feas_tol: f64,
    pub facet_tol: f64,
    /// Linearization points per lower bound.
    pub bound_steps: usize,
    /// Random starts for the root local search, besides the box center.
    pub local_starts: usize,
    pub max_nodes: Option<usize>,
    pub trace: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            mode: Mode::Rs,
            abs_tol: 1e-3,
            rel_tol: 1e-3,
            time_limit: 1000.0,
            seed: 0,
            feas_tol: FEAS_TOL,
            facet_tol: FACET_TOL,
            bound_steps: crate::relax::DEFAULT_BOUND_STEPS,
            local_starts: 8,
            max_nodes: None,
            trace: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Optimal,
    TimeLimit,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub node: usize,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub lower_bound: f64,
    pub incumbent: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub mode: Mode,
    pub status: Status,
    pub x_star: Option<Vec<f64>>,
    pub f_star: Option<f64>,
    pub lower_bound: Option<f64>,
    pub gap_abs: Option<f64>,
    pub gap_rel: Option<f64>,
    pub nodes_processed: usize,
    pub max_depth: usize,
    /// Optimization variables of the formulation.
    pub n_variables: usize,
    pub cpu_seconds: f64,
    #[serde(skip)]
    pub trace: Vec<TraceRow>,
}

impl SolveReport {
    pub fn save_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON without the timing field, for reproducibility checks.
    pub fn to_json_untimed(&self) -> Result<String> {
        let mut v = serde_json::to_value(self)?;
        if let Some(m) = v.as_object_mut() {
            m.remove("cpu_seconds");
        }
        Ok(serde_json::to_string_pretty(&v)?)
    }

    pub fn write_trace_csv(&self, path: &Path) -> Result<()> {
        let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(f, "node,box,lower_bound,incumbent")?;
        for r in &self.trace {
            let bx: Vec<String> =
                r.lo.iter()
                    .zip(&r.hi)
                    .map(|(l, h)| format!("{l}:{h}"))
                    .collect();
            writeln!(
                f,
                "{},{},{},{}",
                r.node,
                bx.join(";"),
                r.lower_bound,
                r.incumbent
            )?;
        }
        Ok(())
    }
}

pub fn solve(problem: &Problem, opts: &SolverOptions) -> Result<SolveReport> {
    match opts.mode {
        Mode::Rs => solve_reduced_space(problem, opts),
        Mode::Fs => solve_full_space(problem, opts),
    }
}

struct Node {
    bx: Vec<Interval>,
    /// Per-tape-node domains, full-space mode only.
    dom: Vec<Interval>,
    lb: f64,
    depth: usize,
    /// Constraint proven to hold on the whole box.
    feasible: bool,
    volume: f64,
    seq: usize,
}

impl PartialEq for Node {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Node {}
impl PartialOrd for Node {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Node {
    // max-heap: smallest bound first, then larger volume, then older
    fn cmp(&self, o: &Self) -> Ordering {
        o.lb.total_cmp(&self.lb)
            .then(self.volume.total_cmp(&o.volume))
            .then(o.seq.cmp(&self.seq))
    }
}

fn volume(bx: &[Interval], root: &[Interval]) -> f64 {
    bx.iter()
        .zip(root)
        .map(|(b, r)| {
            if r.width() > 0.0 {
                b.width() / r.width()
            } else {
                1.0
            }
        })
        .product()
}

/// Incumbent bookkeeping shared by both modes.
struct Search<'a> {
    problem: &'a Problem,
    opts: &'a SolverOptions,
    refiner: Refiner,
    best: Option<(Vec<f64>, f64)>,
    start: Instant,
    trace: Vec<TraceRow>,
    closed_lb: f64,
}

impl<'a> Search<'a> {
    fn new(problem: &'a Problem, opts: &'a SolverOptions) -> Result<Self> {
        Ok(Search {
            problem,
            opts,
            refiner: Refiner::new(problem, opts)?,
            best: None,
            start: Instant::now(),
            trace: Vec::new(),
            closed_lb: f64::INFINITY,
        })
    }

    fn incumbent(&self) -> f64 {
        self.best.as_ref().map_or(f64::INFINITY, |b| b.1)
    }

    fn offer(&mut self, x: &[f64]) -> bool {
        if !self.refiner.feasible(x) {
            return false;
        }
        let f = self.problem.objective_value(x);
        if f < self.incumbent() {
            self.best = Some((x.to_vec(), f));
            return true;
        }
        false
    }

    /// Offers `x` and, if it is promising, its local refinement.
    fn try_point(&mut self, x: &[f64], refine: bool) {
        let improved = self.offer(x);
        if refine || improved {
            if let Some(y) = self.refiner.refine(x) {
                self.offer(&y);
            }
        }
    }

    fn root_search(&mut self, root: &[Interval]) {
        let mut rng = ChaCha8Rng::seed_from_u64(self.opts.seed);
        let center: Vec<f64> = root.iter().map(|b| b.mid()).collect();
        self.try_point(&center, true);
        for x in self.refiner.anchors() {
            self.try_point(&x, true);
        }
        for _ in 0..self.opts.local_starts {
            let x: Vec<f64> = root
                .iter()
                .map(|b| {
                    if b.width() > 0.0 {
                        rng.gen_range(b.lo..=b.hi)
                    } else {
                        b.lo
                    }
                })
                .collect();
            self.try_point(&x, true);
        }
    }

    /// Bound test; bounds of fathomed nodes are remembered for the final
    /// certificate.
    fn fathomed(&mut self, lb: f64) -> bool {
        let inc = self.incumbent();
        let done = inc.is_finite()
            && (lb >= inc - self.opts.abs_tol || inc - lb <= self.opts.rel_tol * inc.abs());
        if done {
            self.closed_lb = self.closed_lb.min(lb);
        }
        done
    }

    fn timed_out(&self) -> bool {
        self.start.elapsed().as_secs_f64() > self.opts.time_limit
    }

    fn record(&mut self, id: usize, bx: &[Interval], lb: f64) {
        if self.opts.trace {
            self.trace.push(TraceRow {
                node: id,
                lo: bx.iter().map(|b| b.lo).collect(),
                hi: bx.iter().map(|b| b.hi).collect(),
                lower_bound: lb,
                incumbent: self.incumbent(),
            });
        }
    }

    fn finish(
        self,
        mode: Mode,
        status: Status,
        open_lb: f64,
        nodes: usize,
        max_depth: usize,
        n_variables: usize,
    ) -> SolveReport {
        let cpu_seconds = self.start.elapsed().as_secs_f64();
        let (x_star, f_star) = match self.best {
            Some((x, f)) => (Some(x), Some(f)),
            None => (None, None),
        };
        let status = match (status, &f_star) {
            (Status::Optimal, None) => Status::Infeasible,
            (s, _) => s,
        };
        let open_lb = open_lb.min(self.closed_lb);
        let lower_bound = match f_star {
            Some(f) => Some(open_lb.min(f)),
            None if open_lb.is_finite() => Some(open_lb),
            None => None,
        };
        let gap_abs = f_star.zip(lower_bound).map(|(f, l)| f - l);
        let gap_rel = f_star.zip(gap_abs).map(|(f, g)| g / f.abs().max(1e-12));
        SolveReport {
            mode,
            status,
            x_star,
            f_star,
            lower_bound,
            gap_abs,
            gap_rel,
            nodes_processed: nodes,
            max_depth,
            n_variables,
            cpu_seconds,
            trace: self.trace,
        }
    }
}

fn tiny(bx: &[Interval], root: &[Interval]) -> bool {
    bx.iter()
        .zip(root)
        .all(|(b, r)| b.width() <= 1e-10 * (1.0 + r.width()))
}

/// Dimension of largest width relative to the root box.
fn widest(bx: &[Interval], root: &[Interval]) -> usize {
    let mut best = (0, -1.0);
    for (i, (b, r)) in bx.iter().zip(root).enumerate() {
        let w = if r.width() > 0.0 {
            b.width() / r.width()
        } else {
            0.0
        };
        if w > best.1 {
            best = (i, w);
        }
    }
    best.0
}

/// Best-first branch-and-bound over the degrees of freedom only.
pub fn solve_reduced_space(problem: &Problem, opts: &SolverOptions) -> Result<SolveReport> {
    problem.check()?;
    let objective = problem.objective_expr()?;
    let constraint = problem.svm_expr(false);
    let facets = problem.facet_cuts(opts.facet_tol);
    let mut search = Search::new(problem, opts)?;
    let root = problem.bounds.clone();
    search.root_search(&root);

    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node {
        bx: root.clone(),
        dom: Vec::new(),
        lb: f64::NEG_INFINITY,
        depth: 0,
        feasible: constraint.is_none() && facets.is_empty(),
        volume: 1.0,
        seq,
    });
    let mut nodes = 0;
    let mut max_depth = 0;
    let mut dropped_lb = f64::INFINITY;
    let mut status = Status::Optimal;

    while let Some(node) = heap.peek() {
        let open = node.lb.min(dropped_lb);
        if search.fathomed(open) {
            break;
        }
        if search.timed_out() || opts.max_nodes.is_some_and(|m| nodes >= m) {
            status = Status::TimeLimit;
            break;
        }
        let node = heap.pop().unwrap();
        if search.fathomed(node.lb) {
            continue;
        }
        nodes += 1;
        max_depth = max_depth.max(node.depth);
        let bx = node.bx;

        // feasibility first
        let mut cuts: Vec<LinearCut> = Vec::new();
        let mut feasible = node.feasible;
        if !feasible {
            if let Some(g) = &constraint {
                let gb = constraint_bounds(g, &bx);
                if gb.hi < -opts.feas_tol {
                    search.record(nodes, &bx, f64::INFINITY);
                    continue;
                }
                if gb.lo >= 0.0 {
                    feasible = true;
                } else {
                    let mid: Vec<f64> = bx.iter().map(|b| b.mid()).collect();
                    let cut = cc_cut(g, &bx, &mid, -opts.feas_tol);
                    if cut.box_min(&bx) > 0.0 {
                        search.record(nodes, &bx, f64::INFINITY);
                        continue;
                    }
                    cuts.push(cut);
                }
            }
            let mut all_inside = constraint.is_none() || feasible;
            let mut pruned = false;
            for c in &facets {
                let lo = c.box_min(&bx);
                if lo > 0.0 {
                    pruned = true;
                    break;
                }
                let neg: Vec<f64> = c.coef.iter().map(|v| -v).collect();
                let hi = -crate::relax::affine_box_min(&neg, -c.constant, &bx).0;
                if hi > 0.0 {
                    all_inside = false;
                    cuts.push(c.clone());
                }
            }
            if pruned {
                search.record(nodes, &bx, f64::INFINITY);
                continue;
            }
            if constraint.is_none() && all_inside {
                feasible = true;
            }
        }

        let lb = match lower_bound_with_cuts(&objective, &bx, opts.bound_steps, &cuts) {
            Some(v) => v.max(node.lb),
            None => {
                search.record(nodes, &bx, f64::INFINITY);
                continue;
            }
        };
        search.record(nodes, &bx, lb);
        if search.fathomed(lb) {
            continue;
        }

        let mid: Vec<f64> = bx.iter().map(|b| b.mid()).collect();
        search.try_point(&mid, node.depth % 8 == 0);
        if search.fathomed(lb) {
            continue;
        }
        if tiny(&bx, &root) {
            dropped_lb = dropped_lb.min(lb);
            continue;
        }
        let k = widest(&bx, &root);
        let m = bx[k].mid();
        for half in [
            Interval {
                lo: bx[k].lo,
                hi: m,
            },
            Interval {
                lo: m,
                hi: bx[k].hi,
            },
        ] {
            let mut child = bx.clone();
            child[k] = half;
            seq += 1;
            heap.push(Node {
                volume: volume(&child, &root),
                bx: child,
                dom: Vec::new(),
                lb,
                depth: node.depth + 1,
                feasible,
                seq,
            });
        }
    }
    let open_lb = heap.peek().map_or(f64::INFINITY, |n| n.lb).min(dropped_lb);
    Ok(search.finish(Mode::Rs, status, open_lb, nodes, max_depth, problem.dim()))
}

/// Full-space formulation tape with the roots and the branching candidates.
struct FullSpace {
    expr: Expr,
    objective: NodeId,
    constraints: Vec<(NodeId, f64)>,
    branchable: Vec<NodeId>,
}

fn build_full_space(problem: &Problem, opts: &SolverOptions) -> Result<FullSpace> {
    let mut expr = Expr::new(problem.dim());
    for i in 0..problem.dim() {
        expr.var(i);
    }
    let objective = problem.append_objective(&mut expr)?;
    let mut constraints = Vec::new();
    match &problem.validity {
        Validity::None => {}
        Validity::Svm(m) => {
            let g = crate::relax::svm_decision_expr(&mut expr, m, &problem.inputs, true);
            constraints.push((g, -opts.feas_tol));
        }
        Validity::Facets(_) => {
            for c in problem.facet_cuts(opts.facet_tol) {
                let terms: Vec<(NodeId, f64)> = c
                    .coef
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| **a != 0.0)
                    .map(|(i, &a)| (expr.var_node(i).unwrap(), -a))
                    .collect();
                // -(a x + b - tol) >= 0
                let node = expr.affine(&terms, -c.constant);
                constraints.push((node, 0.0));
            }
        }
    }
    let mut branchable: Vec<NodeId> = expr
        .nodes()
        .iter()
        .enumerate()
        .filter(|(_, op)| matches!(op, Op::Var(_) | Op::SqDist(_) | Op::Exp(_) | Op::Tanh(_)))
        .map(|(i, _)| i)
        .collect();
    branchable.push(objective);
    Ok(FullSpace {
        expr,
        objective,
        constraints,
        branchable,
    })
}

/// Interval propagation to a fixed point (at most a few sweeps).
fn tighten(fs: &FullSpace, dom: &mut [Interval], incumbent: f64) -> bool {
    for _ in 0..4 {
        let before: f64 = fs.branchable.iter().map(|&i| dom[i].width()).sum();
        dom[fs.objective] = dom[fs.objective].meet(Interval {
            lo: f64::NEG_INFINITY,
            hi: incumbent,
        });
        for &(c, floor) in &fs.constraints {
            dom[c] = dom[c].meet(Interval {
                lo: floor,
                hi: f64::INFINITY,
            });
        }
        if dom.iter().any(|d| d.is_empty()) || !fs.expr.propagate(dom) {
            return false;
        }
        let after: f64 = fs.branchable.iter().map(|&i| dom[i].width()).sum();
        if !(after < 0.99 * before) {
            break;
        }
    }
    true
}

/// Best-first branch-and-bound over the degrees of freedom and the model
/// auxiliaries, bounded by interval propagation through the defining
/// equations.
pub fn solve_full_space(problem: &Problem, opts: &SolverOptions) -> Result<SolveReport> {
    problem.check()?;
    let fs = build_full_space(problem, opts)?;
    let mut search = Search::new(problem, opts)?;
    let root_box = problem.bounds.clone();
    search.root_search(&root_box);

    let mut root_dom = fs.expr.intervals(&root_box);
    let n_variables = problem.full_space_variables();
    let mut status = Status::Optimal;
    let mut nodes = 0;
    let mut max_depth = 0;
    let mut dropped_lb = f64::INFINITY;
    let mut heap = BinaryHeap::new();
    if tighten(&fs, &mut root_dom, search.incumbent()) {
        let var_box = var_box(&fs, &root_dom);
        heap.push(Node {
            volume: 1.0,
            bx: var_box,
            lb: root_dom[fs.objective].lo,
            dom: root_dom.clone(),
            depth: 0,
            feasible: false,
            seq: 0,
        });
    }
    let ref_width: Vec<f64> = fs.branchable.iter().map(|&i| root_dom[i].width()).collect();
    let mut seq = 0;

    while let Some(node) = heap.peek() {
        if search.fathomed(node.lb.min(dropped_lb)) {
            break;
        }
        if search.timed_out() || opts.max_nodes.is_some_and(|m| nodes >= m) {
            status = Status::TimeLimit;
            break;
        }
        let node = heap.pop().unwrap();
        nodes += 1;
        max_depth = max_depth.max(node.depth);
        let mut dom = node.dom;
        if !tighten(&fs, &mut dom, search.incumbent()) {
            search.record(nodes, &node.bx, f64::INFINITY);
            continue;
        }
        let bx = var_box(&fs, &dom);
        let lb = dom[fs.objective].lo.max(node.lb);
        search.record(nodes, &bx, lb);
        if search.fathomed(lb) {
            continue;
        }
        let mid: Vec<f64> = bx.iter().map(|b| b.mid()).collect();
        search.try_point(&mid, node.depth % 8 == 0);
        if search.fathomed(lb) {
            continue;
        }

        let mut pick = None;
        let mut wmax = 0.0;
        for (k, &id) in fs.branchable.iter().enumerate() {
            let w = dom[id].width();
            if ref_width[k] > 0.0 && w.is_finite() {
                let rel = w / ref_width[k];
                if rel > wmax && w > 1e-10 * (1.0 + dom[id].lo.abs().max(dom[id].hi.abs())) {
                    wmax = rel;
                    pick = Some(id);
                }
            }
        }
        let Some(id) = pick else {
            dropped_lb = dropped_lb.min(lb);
            continue;
        };
        let m = dom[id].mid();
        for half in [
            Interval {
                lo: dom[id].lo,
                hi: m,
            },
            Interval {
                lo: m,
                hi: dom[id].hi,
            },
        ] {
            let mut child = dom.clone();
            child[id] = half;
            seq += 1;
            let cb = var_box(&fs, &child);
            heap.push(Node {
                volume: volume(&cb, &root_box),
                bx: cb,
                dom: child,
                lb,
                depth: node.depth + 1,
                feasible: false,
                seq,
            });
        }
    }
    let open_lb = heap.peek().map_or(f64::INFINITY, |n| n.lb).min(dropped_lb);
    Ok(search.finish(Mode::Fs, status, open_lb, nodes, max_depth, n_variables))
}

fn var_box(fs: &FullSpace, dom: &[Interval]) -> Vec<Interval> {
    (0..fs.expr.n_vars())
        .map(|i| dom[fs.expr.var_node(i).expect("variable node")])
        .collect()
}
