//! Lower bounds from affine relaxations minimized over a box, optionally
//! intersected with linear cuts.

use super::expr::Expr;
use super::interval::Interval;

/// Linearization points used by [`lower_bound_objective`].
pub const DEFAULT_BOUND_STEPS: usize = 5;

/// The half-space `coef . x + constant <= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearCut {
    pub coef: Vec<f64>,
    pub constant: f64,
}

impl LinearCut {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.coef.iter().zip(x).map(|(a, v)| a * v).sum::<f64>()
    }

    /// Smallest value over the box.
    pub fn box_min(&self, bx: &[Interval]) -> f64 {
        affine_box_min(&self.coef, self.constant, bx).0
    }
}

/// Minimum of `coef . x + constant` over the box and a minimizing point
/// (midpoint in coordinates with zero coefficient).
pub fn affine_box_min(coef: &[f64], constant: f64, bx: &[Interval]) -> (f64, Vec<f64>) {
    let mut v = constant;
    let mut x = Vec::with_capacity(bx.len());
    for (&c, b) in coef.iter().zip(bx) {
        let t = if c > 0.0 {
            b.lo
        } else if c < 0.0 {
            b.hi
        } else {
            b.mid()
        };
        if c != 0.0 {
            v += c * t;
        }
        x.push(t);
    }
    (v, x)
}

/// Lower bound on `min coef . x + constant` over the box intersected with the
/// cuts, by coordinate ascent on the Lagrangian dual. Each multiplier update
/// is an exact one-dimensional maximization of a concave piecewise-linear
/// function. Returns `None` when some cut alone excludes the whole box.
pub fn lp_box_min(
    coef: &[f64],
    constant: f64,
    cuts: &[LinearCut],
    bx: &[Interval],
    sweeps: usize,
) -> Option<(f64, Vec<f64>)> {
    if cuts.iter().any(|c| c.box_min(bx) > 0.0) {
        return None;
    }
    let (mut best, mut best_x) = affine_box_min(coef, constant, bx);
    if cuts.is_empty() {
        return Some((best, best_x));
    }
    let n = coef.len();
    let mut lambda = vec![0.0; cuts.len()];
    let mut g = coef.to_vec();
    let mut h = constant;
    for _ in 0..sweeps {
        let before = best;
        for (i, cut) in cuts.iter().enumerate() {
            for j in 0..n {
                g[j] -= lambda[i] * cut.coef[j];
            }
            h -= lambda[i] * cut.constant;
            let phi = |t: f64| {
                let c: Vec<f64> = (0..n).map(|j| g[j] + t * cut.coef[j]).collect();
                affine_box_min(&c, h + t * cut.constant, bx).0
            };
            let mut cands = vec![0.0];
            for j in 0..n {
                if cut.coef[j] != 0.0 {
                    let t = -g[j] / cut.coef[j];
                    if t > 0.0 && t.is_finite() {
                        cands.push(t);
                    }
                }
            }
            let mut t_best = 0.0;
            let mut v_best = phi(0.0);
            for &t in &cands[1..] {
                let v = phi(t);
                if v > v_best {
                    v_best = v;
                    t_best = t;
                }
            }
            lambda[i] = t_best;
            for j in 0..n {
                g[j] += t_best * cut.coef[j];
            }
            h += t_best * cut.constant;
            if v_best > best {
                best = v_best;
                best_x = affine_box_min(&g, h, bx).1;
            }
        }
        if best - before <= 1e-12 * (1.0 + best.abs()) {
            break;
        }
    }
    Some((best, best_x))
}

/// Affine underestimator of the expression output at `x`, as
/// `(coef, constant)`.
fn linearize_cv(expr: &Expr, bx: &[Interval], x: &[f64]) -> (Vec<f64>, f64, Interval) {
    let r = expr.relax(bx, x);
    let r = r.last().expect("empty expression");
    let constant = r.cv - r.cv_sub.iter().zip(x).map(|(s, v)| s * v).sum::<f64>();
    (r.cv_sub.clone(), constant, r.interval)
}

/// Lower bound of the expression output over the box: the best of the
/// interval bound and the box minima of affine underestimators taken at the
/// box center and then at successive minimizers.
pub fn lower_bound_objective(expr: &Expr, bx: &[Interval], steps: usize) -> f64 {
    lower_bound_with_cuts(expr, bx, steps, &[]).unwrap_or(f64::INFINITY)
}

/// As [`lower_bound_objective`], restricted to the cuts; `None` when the
/// cuts prove the box infeasible.
pub fn lower_bound_with_cuts(
    expr: &Expr,
    bx: &[Interval],
    steps: usize,
    cuts: &[LinearCut],
) -> Option<f64> {
    let mut x: Vec<f64> = bx.iter().map(|b| b.mid()).collect();
    let mut lb = f64::NEG_INFINITY;
    for _ in 0..steps.max(1) {
        let (coef, constant, iv) = linearize_cv(expr, bx, &x);
        lb = lb.max(iv.lo);
        let (v, next) = lp_box_min(&coef, constant, cuts, bx, 20)?;
        if v.is_finite() {
            lb = lb.max(v);
        }
        if next == x {
            break;
        }
        x = next;
    }
    Some(lb)
}

/// Enclosure of the expression output over the box, tightened by the box
/// extrema of the affine relaxations at the center.
pub fn constraint_bounds(expr: &Expr, bx: &[Interval]) -> Interval {
    let x: Vec<f64> = bx.iter().map(|b| b.mid()).collect();
    let r = expr.relax(bx, &x);
    let r = r.last().expect("empty expression");
    let lo_c = r.cv - r.cv_sub.iter().zip(&x).map(|(s, v)| s * v).sum::<f64>();
    let hi_c = r.cc - r.cc_sub.iter().zip(&x).map(|(s, v)| s * v).sum::<f64>();
    let lo = affine_box_min(&r.cv_sub, lo_c, bx).0;
    let neg: Vec<f64> = r.cc_sub.iter().map(|s| -s).collect();
    let hi = -affine_box_min(&neg, -hi_c, bx).0;
    Interval {
        lo: r.interval.lo.max(lo),
        hi: r.interval.hi.min(hi),
    }
}

/// Concave overestimator of the output linearized at `x`, turned into the
/// cut `-(cc linearization) <= -floor`, i.e. the output can reach `floor`
/// only where the linearization does.
pub fn cc_cut(expr: &Expr, bx: &[Interval], x: &[f64], floor: f64) -> LinearCut {
    let r = expr.relax(bx, x);
    let r = r.last().expect("empty expression");
    let c = r.cc - r.cc_sub.iter().zip(x).map(|(s, v)| s * v).sum::<f64>();
    LinearCut {
        coef: r.cc_sub.iter().map(|s| -s).collect(),
        constant: floor - c,
    }
}
