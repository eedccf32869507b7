use super::{Problem, SolverOptions, Validity};
use crate::error::Result;
use crate::relax::{Expr, Input, Interval, LinearCut};

/// Projected descent with feasibility restoration, used for upper bounds.
pub(crate) struct Refiner {
    objective: Expr,
    constraint: Option<Expr>,
    facets: Vec<LinearCut>,
    bounds: Vec<Interval>,
    anchors: Vec<Vec<f64>>,
    feas_tol: f64,
    target: f64,
    active: f64,
    max_iter: usize,
    problem: Problem,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Refiner {
    pub(crate) fn new(problem: &Problem, opts: &SolverOptions) -> Result<Refiner> {
        let (target, active) = match problem.validity {
            Validity::Facets(_) => (0.5 * opts.facet_tol, 1e-7),
            _ => (1e-8, 100.0 * opts.feas_tol),
        };
        let anchors = match &problem.validity {
            Validity::Svm(m) => {
                let (centers, _) = m.raw_terms();
                centers
                    .iter()
                    .map(|c| {
                        let mut x: Vec<f64> = problem.bounds.iter().map(|b| b.mid()).collect();
                        for (v, inp) in c.iter().zip(&problem.inputs) {
                            if let Input::Var(i) = *inp {
                                x[i] = v.clamp(problem.bounds[i].lo, problem.bounds[i].hi);
                            }
                        }
                        x
                    })
                    .collect()
            }
            _ => Vec::new(),
        };
        Ok(Refiner {
            objective: problem.objective_expr()?,
            constraint: problem.svm_expr(false),
            // half the tolerance keeps accepted points clear of rounding at the limit
            facets: problem.facet_cuts(0.5 * opts.facet_tol),
            bounds: problem.bounds.clone(),
            anchors,
            feas_tol: opts.feas_tol,
            target,
            active,
            max_iter: 100,
            problem: problem.clone(),
        })
    }

    pub(crate) fn anchors(&self) -> Vec<Vec<f64>> {
        self.anchors.clone()
    }

    pub(crate) fn feasible(&self, x: &[f64]) -> bool {
        if self.bounds.iter().zip(x).any(|(b, v)| !b.contains(*v)) {
            return false;
        }
        match &self.problem.validity {
            Validity::None => true,
            Validity::Svm(_) => self.problem.margin(x) >= -self.feas_tol,
            Validity::Facets(_) => self.facets.iter().all(|c| c.eval(x) <= 0.0),
        }
    }

    /// Margin (nonnegative when feasible) and its gradient in the variables.
    fn margin(&self, x: &[f64]) -> Option<(f64, Vec<f64>)> {
        if let Some(g) = &self.constraint {
            return Some(g.gradient(x, g.output()));
        }
        if self.facets.is_empty() {
            return None;
        }
        let (i, v) = self.facets.iter().map(|c| c.eval(x)).enumerate().fold(
            (0, f64::NEG_INFINITY),
            |a, (i, v)| if v > a.1 { (i, v) } else { a },
        );
        Some((-v, self.facets[i].coef.iter().map(|a| -a).collect()))
    }

    fn clamp(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(&self.bounds)
            .map(|(v, b)| v.clamp(b.lo, b.hi))
            .collect()
    }

    /// Newton steps on the margin toward the feasible side.
    fn restore(&self, x0: &[f64], steps: usize) -> Option<Vec<f64>> {
        let mut x = self.clamp(x0);
        for _ in 0..steps {
            if self.feasible(&x) {
                return Some(x);
            }
            let (m, n) = self.margin(&x)?;
            let nn = dot(&n, &n);
            if !(nn > 1e-300) {
                return None;
            }
            let s = (self.target - m) / nn;
            let y: Vec<f64> = x.iter().zip(&n).map(|(v, g)| v + s * g).collect();
            x = self.clamp(&y);
        }
        self.feasible(&x).then_some(x)
    }

    /// Last feasible point on the segment from feasible `x` to `y`.
    fn bisect(&self, x: &[f64], y: &[f64]) -> Option<Vec<f64>> {
        let at = |t: f64| -> Vec<f64> { x.iter().zip(y).map(|(a, b)| a + t * (b - a)).collect() };
        let (mut lo, mut hi) = (0.0, 1.0);
        for _ in 0..40 {
            let m = 0.5 * (lo + hi);
            if self.feasible(&at(m)) {
                lo = m;
            } else {
                hi = m;
            }
        }
        (lo > 0.0).then(|| at(lo))
    }

    fn project_box(&self, x: &[f64], d: &mut [f64]) {
        for ((di, xi), b) in d.iter_mut().zip(x).zip(&self.bounds) {
            if b.width() == 0.0 || (*xi <= b.lo && *di < 0.0) || (*xi >= b.hi && *di > 0.0) {
                *di = 0.0;
            }
        }
    }

    pub(crate) fn refine(&self, x0: &[f64]) -> Option<Vec<f64>> {
        let mut x = self.clamp(x0);
        if !self.feasible(&x) {
            x = self.restore(&x, 30)?;
        }
        let mut f = self.problem.objective_value(&x);
        let diam = self
            .bounds
            .iter()
            .map(|b| b.width() * b.width())
            .sum::<f64>()
            .sqrt();
        let mut t = 0.05 * diam;
        for _ in 0..self.max_iter {
            let (_, g) = self.objective.gradient(&x, self.objective.output());
            let mut d: Vec<f64> = g.iter().map(|v| -v).collect();
            self.project_box(&x, &mut d);
            if let Some((m, n)) = self.margin(&x) {
                let dn = dot(&d, &n);
                if m < self.active && dn < 0.0 {
                    let s = dn / dot(&n, &n).max(1e-300);
                    d.iter_mut().zip(&n).for_each(|(di, ni)| *di -= s * ni);
                    self.project_box(&x, &mut d);
                }
            }
            let norm = dot(&d, &d).sqrt();
            if !(norm > 1e-12) {
                break;
            }
            d.iter_mut().for_each(|v| *v /= norm);
            let mut accepted = false;
            while t > 1e-12 * diam {
                let y = self.clamp(&x.iter().zip(&d).map(|(a, b)| a + t * b).collect::<Vec<_>>());
                let y = if self.feasible(&y) {
                    Some(y)
                } else {
                    self.restore(&y, 5)
                        .filter(|z| self.problem.objective_value(z) < f)
                        .or_else(|| self.bisect(&x, &y))
                };
                if let Some(y) = y {
                    let fy = self.problem.objective_value(&y);
                    if fy < f - 1e-12 * (1.0 + f.abs()) {
                        x = y;
                        f = fy;
                        accepted = true;
                        t = (2.0 * t).min(diam);
                        break;
                    }
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        Some(x)
    }
}

/// Local descent from `x0` that keeps the validity constraint; `None` when
/// no feasible point is reached.
pub fn local_refine(problem: &Problem, x0: &[f64]) -> Option<Vec<f64>> {
    let r = Refiner::new(problem, &SolverOptions::default()).ok()?;
    r.refine(x0)
}
