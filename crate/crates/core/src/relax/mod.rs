//! Interval arithmetic and McCormick relaxations over factorable
//! expressions, plus the affine lower bounds the solver builds from them.
//!
//! Expressions are tapes of [`Op`] nodes over `n_vars` variables. For a box
//! and a point inside it, [`Expr::relax`] returns per node an interval
//! enclosure and the values and subgradients of a convex underestimator and
//! a concave overestimator. The RBF kernel term `exp(-d(x))` is a single node
//! so that it can be relaxed tighter than the naive composition.

mod bound;
mod envelope;
mod expr;
mod interval;

pub use bound::{
    affine_box_min, cc_cut, constraint_bounds, lower_bound_objective, lower_bound_with_cuts,
    lp_box_min, LinearCut, DEFAULT_BOUND_STEPS,
};
pub use envelope::{bump_cc, secant, tanh_cc, tanh_cv};
pub use expr::{rbf_naive, Expr, Kernel, NodeId, Op, RelaxValue};
pub use interval::{Interval, INFLATE};

use crate::ann::{Activation, MlpModel};
use crate::ocsvm::OneClassSvmModel;

/// Where a model input comes from: an optimization variable or a fixed
/// parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Input {
    Var(usize),
    Fixed(f64),
}

fn input_node(e: &mut Expr, input: Input) -> NodeId {
    match input {
        Input::Var(i) => e.var(i),
        Input::Fixed(v) => e.constant(v),
    }
}

/// Kernel in variable space for one center: fixed inputs fold into the
/// offset.
fn embed_kernel(center: &[f64], weights: &[f64], inputs: &[Input]) -> Kernel {
    let mut k = Kernel {
        vars: Vec::new(),
        center: Vec::new(),
        weights: Vec::new(),
        offset: 0.0,
    };
    for ((&c, &w), inp) in center.iter().zip(weights).zip(inputs) {
        match *inp {
            Input::Var(i) => {
                k.vars.push(i);
                k.center.push(c);
                k.weights.push(w);
            }
            Input::Fixed(v) => k.offset += w * (v - c) * (v - c),
        }
    }
    k
}

/// The adapted peaks function of variables `i1`, `i2`.
pub fn peaks_expr(e: &mut Expr, i1: usize, i2: usize) -> NodeId {
    let x = e.var(i1);
    let y = e.var(i2);
    let gauss = |e: &mut Expr, cx: f64, cy: f64| {
        e.rbf(Kernel {
            vars: vec![i1, i2],
            center: vec![cx, cy],
            weights: vec![1.0, 1.0],
            offset: 0.0,
        })
    };
    let one_minus_x = e.affine(&[(x, -1.0)], 1.0);
    let sq = e.sqr(one_minus_x);
    let g1 = gauss(e, 0.0, -1.0);
    let t1 = e.mul(sq, g1);

    let x2 = e.sqr(x);
    let x3 = e.mul(x, x2);
    let y2 = e.sqr(y);
    let y4 = e.sqr(y2);
    let y5 = e.mul(y, y4);
    let poly = e.affine(&[(x, 0.2), (x3, -1.0), (y5, -1.0)], 0.0);
    let g2 = gauss(e, 0.0, 0.0);
    let t2 = e.mul(poly, g2);

    let g3 = gauss(e, -1.0, 0.0);
    e.affine(&[(t1, 3.0), (t2, -10.0), (g3, -1.0 / 3.0), (y, -1.3)], 0.0)
}

/// Appends a trained network; returns one node per output, in raw units.
pub fn mlp_expr(e: &mut Expr, model: &MlpModel, inputs: &[NodeId]) -> Vec<NodeId> {
    assert_eq!(inputs.len(), model.n_inputs(), "input count");
    let sc = &model.input_scaler;
    let mut h: Vec<NodeId> = inputs
        .iter()
        .enumerate()
        .map(|(j, &id)| e.affine(&[(id, sc.gains[j])], -sc.offsets[j] * sc.gains[j]))
        .collect();
    for layer in &model.layers {
        h = layer
            .weights
            .iter()
            .zip(&layer.biases)
            .map(|(row, &b)| {
                let terms: Vec<(NodeId, f64)> =
                    h.iter().copied().zip(row.iter().copied()).collect();
                let pre = e.affine(&terms, b);
                match layer.activation {
                    Activation::Tanh => e.tanh(pre),
                    Activation::Linear => pre,
                }
            })
            .collect();
    }
    let out = &model.output_scaler;
    h.iter()
        .enumerate()
        .map(|(k, &id)| e.affine(&[(id, 1.0 / out.gains[k])], out.offsets[k]))
        .collect()
}

/// Appends the SVM decision function. With `expanded`, every kernel term is
/// split into a squared-distance node and an exponential node, the
/// auxiliary-variable form; otherwise each term is one RBF node.
pub fn svm_decision_expr(
    e: &mut Expr,
    model: &OneClassSvmModel,
    inputs: &[Input],
    expanded: bool,
) -> NodeId {
    assert_eq!(inputs.len(), model.dim(), "input count");
    for inp in inputs {
        if let Input::Var(i) = *inp {
            e.var(i);
        }
    }
    let (centers, weights) = model.raw_terms();
    let mut terms = Vec::with_capacity(centers.len());
    for (c, &a) in centers.iter().zip(&model.alphas) {
        let k = embed_kernel(c, &weights, inputs);
        let node = if k.vars.is_empty() {
            e.constant((-k.offset).exp())
        } else if expanded {
            let d = e.sq_dist(k);
            let neg = e.scale(d, -1.0);
            e.exp(neg)
        } else {
            e.rbf(k)
        };
        terms.push((node, a));
    }
    e.affine(&terms, -model.rho)
}

/// Appends the model inputs as nodes.
pub fn input_nodes(e: &mut Expr, inputs: &[Input]) -> Vec<NodeId> {
    inputs.iter().map(|&i| input_node(e, i)).collect()
}
