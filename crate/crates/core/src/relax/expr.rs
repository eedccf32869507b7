use std::collections::HashMap;

use super::envelope::{bump_cc, secant, tanh_cc, tanh_cv};
use super::interval::Interval;
use crate::error::{Error, Result};

pub type NodeId = usize;

/// Weighted squared distance `offset + sum_k w_k (x[vars[k]] - center[k])^2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    pub vars: Vec<usize>,
    pub center: Vec<f64>,
    pub weights: Vec<f64>,
    pub offset: f64,
}

impl Kernel {
    fn value(&self, x: &[f64]) -> f64 {
        self.offset
            + self
                .vars
                .iter()
                .zip(&self.center)
                .zip(&self.weights)
                .map(|((&v, c), w)| w * (x[v] - c) * (x[v] - c))
                .sum::<f64>()
    }

    fn interval(&self, bx: &[Interval]) -> Interval {
        let mut acc = Interval::point(self.offset);
        for ((&v, &c), &w) in self.vars.iter().zip(&self.center).zip(&self.weights) {
            acc = acc.add(bx[v].sq_dist(c).scale(w));
        }
        acc.meet(Interval::new(self.offset.max(0.0), f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Op {
    Var(usize),
    Const(f64),
    Affine {
        terms: Vec<(NodeId, f64)>,
        constant: f64,
    },
    Mul(NodeId, NodeId),
    Sqr(NodeId),
    Exp(NodeId),
    Tanh(NodeId),
    Abs(NodeId),
    SqDist(Box<Kernel>),
    /// `exp(-d)` of a kernel distance, relaxed as one unit.
    Rbf(Box<Kernel>),
}

impl Op {
    pub fn name(&self) -> &'static str {
        match self {
            Op::Var(_) => "var",
            Op::Const(_) => "const",
            Op::Affine { .. } => "affine",
            Op::Mul(..) => "mul",
            Op::Sqr(_) => "sqr",
            Op::Exp(_) => "exp",
            Op::Tanh(_) => "tanh",
            Op::Abs(_) => "abs",
            Op::SqDist(_) => "sqdist",
            Op::Rbf(_) => "rbf",
        }
    }

    fn children(&self) -> Vec<NodeId> {
        match self {
            Op::Var(_) | Op::Const(_) | Op::SqDist(_) | Op::Rbf(_) => vec![],
            Op::Affine { terms, .. } => terms.iter().map(|t| t.0).collect(),
            Op::Mul(a, b) => vec![*a, *b],
            Op::Sqr(a) | Op::Exp(a) | Op::Tanh(a) | Op::Abs(a) => vec![*a],
        }
    }
}

/// Convex underestimator and concave overestimator at a point, with
/// subgradients in the original variables.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxValue {
    pub interval: Interval,
    pub cv: f64,
    pub cc: f64,
    pub cv_sub: Vec<f64>,
    pub cc_sub: Vec<f64>,
}

/// A factorable function stored as a tape in topological order.
#[derive(Debug, Clone, Default)]
pub struct Expr {
    n_vars: usize,
    nodes: Vec<Op>,
    var_nodes: HashMap<usize, NodeId>,
}

impl Expr {
    pub fn new(n_vars: usize) -> Expr {
        Expr {
            n_vars,
            nodes: Vec::new(),
            var_nodes: HashMap::new(),
        }
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Op] {
        &self.nodes
    }

    /// The most recently added node.
    pub fn output(&self) -> NodeId {
        self.nodes.len() - 1
    }

    fn push(&mut self, op: Op) -> NodeId {
        self.nodes.push(op);
        self.nodes.len() - 1
    }

    pub fn var(&mut self, i: usize) -> NodeId {
        assert!(i < self.n_vars, "variable {i} out of range");
        if let Some(&id) = self.var_nodes.get(&i) {
            return id;
        }
        let id = self.push(Op::Var(i));
        self.var_nodes.insert(i, id);
        id
    }

    pub fn var_node(&self, i: usize) -> Option<NodeId> {
        self.var_nodes.get(&i).copied()
    }

    pub fn constant(&mut self, c: f64) -> NodeId {
        self.push(Op::Const(c))
    }

    pub fn const_value(&self, id: NodeId) -> Option<f64> {
        match self.nodes[id] {
            Op::Const(c) => Some(c),
            _ => None,
        }
    }

    /// `sum w_k node_k + constant`; constant children are folded.
    pub fn affine(&mut self, terms: &[(NodeId, f64)], constant: f64) -> NodeId {
        let mut c = constant;
        let mut kept: Vec<(NodeId, f64)> = Vec::with_capacity(terms.len());
        for &(id, w) in terms {
            match self.const_value(id) {
                Some(v) => c += w * v,
                None if w != 0.0 => kept.push((id, w)),
                None => {}
            }
        }
        if kept.is_empty() {
            return self.constant(c);
        }
        self.push(Op::Affine {
            terms: kept,
            constant: c,
        })
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.affine(&[(a, 1.0), (b, 1.0)], 0.0)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.affine(&[(a, 1.0), (b, -1.0)], 0.0)
    }

    pub fn scale(&mut self, a: NodeId, k: f64) -> NodeId {
        self.affine(&[(a, k)], 0.0)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        if a == b {
            return self.sqr(a);
        }
        match (self.const_value(a), self.const_value(b)) {
            (Some(x), _) => self.scale(b, x),
            (_, Some(y)) => self.scale(a, y),
            _ => self.push(Op::Mul(a, b)),
        }
    }

    pub fn sqr(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Sqr(a))
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Exp(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Tanh(a))
    }

    pub fn abs(&mut self, a: NodeId) -> NodeId {
        self.push(Op::Abs(a))
    }

    pub fn sq_dist(&mut self, k: Kernel) -> NodeId {
        k.vars.iter().for_each(|&v| {
            self.var(v);
        });
        self.push(Op::SqDist(Box::new(k)))
    }

    pub fn rbf(&mut self, k: Kernel) -> NodeId {
        k.vars.iter().for_each(|&v| {
            self.var(v);
        });
        self.push(Op::Rbf(Box::new(k)))
    }

    /// Checks that every node refers to earlier nodes and valid variables.
    pub fn validate(&self) -> Result<()> {
        for (i, op) in self.nodes.iter().enumerate() {
            if op.children().iter().any(|&c| c >= i) {
                return Err(Error::Expression(format!(
                    "{} at node {i} refers forward",
                    op.name()
                )));
            }
            let vars_ok = match op {
                Op::Var(v) => *v < self.n_vars,
                Op::SqDist(k) | Op::Rbf(k) => {
                    k.vars.iter().all(|&v| v < self.n_vars)
                        && k.vars.len() == k.center.len()
                        && k.vars.len() == k.weights.len()
                        && k.weights.iter().all(|&w| w > 0.0)
                }
                _ => true,
            };
            if !vars_ok {
                return Err(Error::Expression(format!("{} at node {i}", op.name())));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.nodes.len());
        for op in &self.nodes {
            let val = match op {
                Op::Var(i) => x[*i],
                Op::Const(c) => *c,
                Op::Affine { terms, constant } => {
                    constant + terms.iter().map(|&(id, w)| w * v[id]).sum::<f64>()
                }
                Op::Mul(a, b) => v[*a] * v[*b],
                Op::Sqr(a) => v[*a] * v[*a],
                Op::Exp(a) => f64::exp(v[*a]),
                Op::Tanh(a) => f64::tanh(v[*a]),
                Op::Abs(a) => f64::abs(v[*a]),
                Op::SqDist(k) => k.value(x),
                Op::Rbf(k) => (-k.value(x)).exp(),
            };
            v.push(val);
        }
        v
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        *self.eval(x).last().expect("empty expression")
    }

    /// Value of `root` and its gradient by reverse accumulation. At kinks of
    /// `abs` the zero subgradient is used.
    pub fn gradient(&self, x: &[f64], root: NodeId) -> (f64, Vec<f64>) {
        let v = self.eval(x);
        let mut adj = vec![0.0; root + 1];
        adj[root] = 1.0;
        let mut grad = vec![0.0; self.n_vars];
        for i in (0..=root).rev() {
            let a = adj[i];
            if a == 0.0 {
                continue;
            }
            match &self.nodes[i] {
                Op::Var(j) => grad[*j] += a,
                Op::Const(_) => {}
                Op::Affine { terms, .. } => {
                    for &(id, w) in terms {
                        adj[id] += w * a;
                    }
                }
                Op::Mul(p, q) => {
                    adj[*p] += v[*q] * a;
                    adj[*q] += v[*p] * a;
                }
                Op::Sqr(p) => adj[*p] += 2.0 * v[*p] * a,
                Op::Exp(p) => adj[*p] += v[i] * a,
                Op::Tanh(p) => adj[*p] += (1.0 - v[i] * v[i]) * a,
                Op::Abs(p) => adj[*p] += v[*p].signum() * if v[*p] == 0.0 { 0.0 } else { a },
                Op::SqDist(k) => {
                    for ((&j, c), w) in k.vars.iter().zip(&k.center).zip(&k.weights) {
                        grad[j] += 2.0 * w * (x[j] - c) * a;
                    }
                }
                Op::Rbf(k) => {
                    for ((&j, c), w) in k.vars.iter().zip(&k.center).zip(&k.weights) {
                        grad[j] -= 2.0 * w * (x[j] - c) * v[i] * a;
                    }
                }
            }
        }
        (v[root], grad)
    }

    fn interval_of(&self, i: usize, iv: &[Interval], bx: &[Interval]) -> Interval {
        match &self.nodes[i] {
            Op::Var(j) => bx[*j],
            Op::Const(c) => Interval::point(*c),
            Op::Affine { terms, constant } => {
                let mut acc = Interval::point(*constant);
                for &(id, w) in terms {
                    acc = acc.add(iv[id].scale(w));
                }
                acc
            }
            Op::Mul(a, b) => iv[*a].mul(iv[*b]),
            Op::Sqr(a) => iv[*a].sqr(),
            Op::Exp(a) => iv[*a].exp(),
            Op::Tanh(a) => iv[*a].tanh(),
            Op::Abs(a) => iv[*a].abs(),
            Op::SqDist(k) => k.interval(bx),
            Op::Rbf(k) => {
                let d = k.interval(bx);
                Interval {
                    lo: (-d.hi).exp(),
                    hi: (-d.lo).exp(),
                }
                .inflate()
                .meet(Interval::new(0.0, 1.0))
            }
        }
    }

    /// Natural interval extension over a box.
    pub fn intervals(&self, bx: &[Interval]) -> Vec<Interval> {
        let mut iv = Vec::with_capacity(self.nodes.len());
        for i in 0..self.nodes.len() {
            let r = self.interval_of(i, &iv, bx);
            iv.push(r);
        }
        iv
    }

    /// McCormick relaxations of every node over `bx`, evaluated at `x`.
    pub fn relax(&self, bx: &[Interval], x: &[f64]) -> Vec<RelaxValue> {
        let n = self.n_vars;
        let mut out: Vec<RelaxValue> = Vec::with_capacity(self.nodes.len());
        let mut iv: Vec<Interval> = Vec::with_capacity(self.nodes.len());
        for i in 0..self.nodes.len() {
            let interval = self.interval_of(i, &iv, bx);
            iv.push(interval);
            let zero = || vec![0.0; n];
            let r = match &self.nodes[i] {
                Op::Var(j) => {
                    let mut s = zero();
                    s[*j] = 1.0;
                    RelaxValue {
                        interval,
                        cv: x[*j],
                        cc: x[*j],
                        cv_sub: s.clone(),
                        cc_sub: s,
                    }
                }
                Op::Const(c) => RelaxValue {
                    interval,
                    cv: *c,
                    cc: *c,
                    cv_sub: zero(),
                    cc_sub: zero(),
                },
                Op::Affine { terms, constant } => {
                    let (mut cv, mut cc) = (*constant, *constant);
                    let (mut cvs, mut ccs) = (zero(), zero());
                    for &(id, w) in terms {
                        let c = &out[id];
                        let (lo, lo_s, hi, hi_s) = if w >= 0.0 {
                            (c.cv, &c.cv_sub, c.cc, &c.cc_sub)
                        } else {
                            (c.cc, &c.cc_sub, c.cv, &c.cv_sub)
                        };
                        cv += w * lo;
                        cc += w * hi;
                        axpy(&mut cvs, w, lo_s);
                        axpy(&mut ccs, w, hi_s);
                    }
                    RelaxValue {
                        interval,
                        cv,
                        cc,
                        cv_sub: cvs,
                        cc_sub: ccs,
                    }
                }
                Op::Mul(a, b) => mul_relax(&out[*a], &out[*b], interval, n),
                Op::Sqr(a) => {
                    let c = &out[*a];
                    convex_compose(c, interval, |t| (t * t, 2.0 * t), n)
                }
                Op::Abs(a) => {
                    let c = &out[*a];
                    convex_compose(
                        c,
                        interval,
                        |t| {
                            (
                                t.abs(),
                                if t > 0.0 {
                                    1.0
                                } else if t < 0.0 {
                                    -1.0
                                } else {
                                    0.0
                                },
                            )
                        },
                        n,
                    )
                }
                Op::Exp(a) => {
                    let c = &out[*a];
                    let (l, u) = (c.interval.lo, c.interval.hi);
                    let e = c.cv.exp();
                    let (cc, m) = secant(l, l.exp(), u, u.exp(), c.cc);
                    RelaxValue {
                        interval,
                        cv: e,
                        cc,
                        cv_sub: scaled(&c.cv_sub, e),
                        cc_sub: scaled(&c.cc_sub, m),
                    }
                }
                Op::Tanh(a) => {
                    let c = &out[*a];
                    let (l, u) = (c.interval.lo, c.interval.hi);
                    let (cv, m1) = tanh_cv(l, u, c.cv.clamp(l, u));
                    let (cc, m2) = tanh_cc(l, u, c.cc.clamp(l, u));
                    RelaxValue {
                        interval,
                        cv,
                        cc,
                        cv_sub: scaled(&c.cv_sub, m1),
                        cc_sub: scaled(&c.cc_sub, m2),
                    }
                }
                Op::SqDist(k) => {
                    let (cc, ccs) = kernel_secant(k, bx, x, n);
                    let mut cvs = zero();
                    for ((&j, c), w) in k.vars.iter().zip(&k.center).zip(&k.weights) {
                        cvs[j] += 2.0 * w * (x[j] - c);
                    }
                    RelaxValue {
                        interval,
                        cv: k.value(x),
                        cc,
                        cv_sub: cvs,
                        cc_sub: ccs,
                    }
                }
                Op::Rbf(k) => rbf_relax(k, bx, x, interval, n),
            };
            out.push(tighten(r));
        }
        out
    }

    /// One forward and one backward sweep of interval constraint
    /// propagation over per-node domains. Returns false when a domain
    /// empties, proving the box infeasible.
    pub fn propagate(&self, dom: &mut [Interval]) -> bool {
        let var_box: Vec<Interval> = (0..self.n_vars)
            .map(|v| {
                self.var_nodes
                    .get(&v)
                    .map_or(Interval::ENTIRE, |&id| dom[id])
            })
            .collect();
        for i in 0..self.nodes.len() {
            let r = self.interval_of(i, dom, &var_box);
            dom[i] = dom[i].meet(r);
            if dom[i].is_empty() {
                return false;
            }
        }
        for i in (0..self.nodes.len()).rev() {
            let y = dom[i];
            match &self.nodes[i] {
                Op::Var(_) | Op::Const(_) => {}
                Op::Affine { terms, constant } => {
                    let parts: Vec<Interval> =
                        terms.iter().map(|&(id, w)| dom[id].scale(w)).collect();
                    if parts.iter().any(|p| !p.lo.is_finite() || !p.hi.is_finite()) {
                        continue;
                    }
                    let lo: f64 = parts.iter().map(|p| p.lo).sum();
                    let hi: f64 = parts.iter().map(|p| p.hi).sum();
                    for (k, &(id, w)) in terms.iter().enumerate() {
                        let rest = Interval {
                            lo: lo - parts[k].lo,
                            hi: hi - parts[k].hi,
                        }
                        .inflate();
                        let target = y.shift(-constant).sub(rest).scale(1.0 / w).inflate();
                        dom[id] = dom[id].meet(target);
                        if dom[id].is_empty() {
                            return false;
                        }
                    }
                }
                Op::Mul(a, b) => {
                    let (da, db) = (dom[*a], dom[*b]);
                    dom[*a] = da.meet(y.div(db));
                    dom[*b] = db.meet(y.div(da));
                }
                Op::Sqr(a) => {
                    if y.hi < 0.0 {
                        return false;
                    }
                    let r = y.hi.sqrt() * (1.0 + 1e-12) + 1e-300;
                    let s = if y.lo > 0.0 {
                        y.lo.sqrt() * (1.0 - 1e-12)
                    } else {
                        0.0
                    };
                    dom[*a] = split_meet(dom[*a], Interval { lo: s, hi: r });
                }
                Op::Exp(a) => dom[*a] = dom[*a].meet(y.ln()),
                Op::Tanh(a) => dom[*a] = dom[*a].meet(y.atanh()),
                Op::Abs(a) => {
                    dom[*a] = split_meet(
                        dom[*a],
                        Interval {
                            lo: y.lo.max(0.0),
                            hi: y.hi,
                        }
                        .inflate(),
                    )
                }
                Op::SqDist(k) => {
                    if !narrow_kernel(k, y.hi, dom, &self.var_nodes) {
                        return false;
                    }
                }
                Op::Rbf(k) => {
                    let dmax = if y.lo > 0.0 {
                        -y.lo.ln()
                    } else {
                        f64::INFINITY
                    };
                    if !narrow_kernel(k, dmax, dom, &self.var_nodes) {
                        return false;
                    }
                }
            }
            if self.nodes[i].children().iter().any(|&c| dom[c].is_empty()) {
                return false;
            }
        }
        true
    }
}

/// Intersection of `d` with `r` and its mirror `-r`, as one hull.
fn split_meet(d: Interval, r: Interval) -> Interval {
    let pos = d.meet(r);
    let neg = d.meet(Interval {
        lo: -r.hi,
        hi: -r.lo,
    });
    match (pos.is_empty(), neg.is_empty()) {
        (true, true) => pos,
        (false, true) => pos,
        (true, false) => neg,
        (false, false) => pos.hull(neg),
    }
}

fn narrow_kernel(
    k: &Kernel,
    dmax: f64,
    dom: &mut [Interval],
    vars: &HashMap<usize, NodeId>,
) -> bool {
    if !dmax.is_finite() {
        return true;
    }
    let ids: Vec<NodeId> = k.vars.iter().map(|v| vars[v]).collect();
    let mins: Vec<f64> = ids
        .iter()
        .zip(&k.center)
        .zip(&k.weights)
        .map(|((&id, &c), &w)| w * dom[id].sq_dist(c).lo)
        .collect();
    let total: f64 = k.offset + mins.iter().sum::<f64>();
    if total > dmax * (1.0 + 1e-12) + 1e-12 {
        return false;
    }
    for (j, &id) in ids.iter().enumerate() {
        let room = (dmax - (total - mins[j])).max(0.0);
        let r = (room / k.weights[j]).sqrt() * (1.0 + 1e-12) + 1e-12;
        dom[id] = dom[id].meet(Interval {
            lo: k.center[j] - r,
            hi: k.center[j] + r,
        });
        if dom[id].is_empty() {
            return false;
        }
    }
    true
}

fn axpy(y: &mut [f64], a: f64, x: &[f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += a * xi;
    }
}

fn scaled(x: &[f64], a: f64) -> Vec<f64> {
    x.iter().map(|v| v * a).collect()
}

/// Clips relaxations to the interval bounds.
fn tighten(mut r: RelaxValue) -> RelaxValue {
    if r.cv < r.interval.lo {
        r.cv = r.interval.lo;
        r.cv_sub.iter_mut().for_each(|s| *s = 0.0);
    }
    if r.cc > r.interval.hi {
        r.cc = r.interval.hi;
        r.cc_sub.iter_mut().for_each(|s| *s = 0.0);
    }
    r
}

/// Composition with a convex univariate `phi`: the underestimator uses the
/// inner relaxation value closest to the minimizer of `phi`, the
/// overestimator uses the secant of `phi`.
fn convex_compose(
    c: &RelaxValue,
    interval: Interval,
    phi: impl Fn(f64) -> (f64, f64),
    n: usize,
) -> RelaxValue {
    let (l, u) = (c.interval.lo, c.interval.hi);
    // phi here is sqr or abs, minimized at 0
    let zmin = 0.0f64.clamp(l, u);
    let (t, t_sub) = if c.cv > zmin {
        (c.cv, Some(&c.cv_sub))
    } else if c.cc < zmin {
        (c.cc, Some(&c.cc_sub))
    } else {
        (zmin, None)
    };
    let (cv, m1) = phi(t);
    let cv_sub = t_sub.map_or(vec![0.0; n], |s| scaled(s, m1));
    let (fl, fu) = (phi(l).0, phi(u).0);
    let slope = if u > l { (fu - fl) / (u - l) } else { 0.0 };
    let (arg, arg_sub) = if slope >= 0.0 {
        (c.cc, &c.cc_sub)
    } else {
        (c.cv, &c.cv_sub)
    };
    let (cc, m2) = secant(l, fl, u, fu, arg);
    RelaxValue {
        interval,
        cv,
        cc,
        cv_sub,
        cc_sub: scaled(arg_sub, m2),
    }
}

fn mul_relax(a: &RelaxValue, b: &RelaxValue, interval: Interval, n: usize) -> RelaxValue {
    let (al, au, bl, bu) = (a.interval.lo, a.interval.hi, b.interval.lo, b.interval.hi);
    // k * f using whichever relaxation keeps the term convex (under) or
    // concave (over)
    let term = |k: f64, f: &RelaxValue, under: bool| -> (f64, Vec<f64>) {
        let use_cv = (k >= 0.0) == under;
        if use_cv {
            (k * f.cv, scaled(&f.cv_sub, k))
        } else {
            (k * f.cc, scaled(&f.cc_sub, k))
        }
    };
    let combine = |ka: f64, kb: f64, c0: f64, under: bool| -> (f64, Vec<f64>) {
        let (va, sa) = term(ka, a, under);
        let (vb, sb) = term(kb, b, under);
        let mut s = sa;
        axpy(&mut s, 1.0, &sb);
        (va + vb + c0, s)
    };
    let (cv1, s1) = combine(bl, al, -al * bl, true);
    let (cv2, s2) = combine(bu, au, -au * bu, true);
    let (cc1, t1) = combine(bu, al, -al * bu, false);
    let (cc2, t2) = combine(bl, au, -au * bl, false);
    let (cv, cv_sub) = if cv1 >= cv2 { (cv1, s1) } else { (cv2, s2) };
    let (cc, cc_sub) = if cc1 <= cc2 { (cc1, t1) } else { (cc2, t2) };
    let _ = n;
    RelaxValue {
        interval,
        cv,
        cc,
        cv_sub,
        cc_sub,
    }
}

/// Separable secant overestimator of a kernel distance.
fn kernel_secant(k: &Kernel, bx: &[Interval], x: &[f64], n: usize) -> (f64, Vec<f64>) {
    let mut v = k.offset;
    let mut s = vec![0.0; n];
    for ((&j, &c), &w) in k.vars.iter().zip(&k.center).zip(&k.weights) {
        let (l, u) = (bx[j].lo - c, bx[j].hi - c);
        let (val, m) = secant(l, l * l, u, u * u, x[j] - c);
        v += w * val;
        s[j] += w * m;
    }
    (v, s)
}

/// Relaxation of `exp(-d(x))`. The underestimator is the composition with
/// the concave overestimator of `d`; the overestimator is the tighter of the
/// secant composition and the per-coordinate bump envelopes
/// `exp(-offset) * env(exp(-w_j (x_j - c_j)^2))`, each of which bounds the
/// kernel from above because the other factors are at most one.
fn rbf_relax(k: &Kernel, bx: &[Interval], x: &[f64], interval: Interval, n: usize) -> RelaxValue {
    let (dcc, dcc_sub) = kernel_secant(k, bx, x, n);
    let cv = (-dcc).exp();
    let cv_sub = scaled(&dcc_sub, -cv);

    let d = k.interval(bx);
    let dx = k.value(x);
    let (mut cc, m) = secant(d.lo, (-d.lo).exp(), d.hi, (-d.hi).exp(), dx);
    let mut cc_sub = vec![0.0; n];
    for ((&j, c), w) in k.vars.iter().zip(&k.center).zip(&k.weights) {
        cc_sub[j] += m * 2.0 * w * (x[j] - c);
    }
    let scale = (-k.offset).exp();
    for ((&j, &c), &w) in k.vars.iter().zip(&k.center).zip(&k.weights) {
        let (v, slope) = bump_cc(w, bx[j].lo - c, bx[j].hi - c, x[j] - c);
        if scale * v < cc {
            cc = scale * v;
            cc_sub = vec![0.0; n];
            cc_sub[j] = scale * slope;
        }
    }
    RelaxValue {
        interval,
        cv,
        cc,
        cv_sub,
        cc_sub,
    }
}

/// Naive composition for comparison: `exp(-d)` relaxed through the generic
/// rules, with `d` relaxed as a sum of squares.
pub fn rbf_naive(k: &Kernel, bx: &[Interval], x: &[f64]) -> (f64, f64) {
    let n = x.len();
    let (dcc, _) = kernel_secant(k, bx, x, n);
    let d = k.interval(bx);
    let cv = (-dcc).exp();
    let (cc, _) = secant(d.lo, (-d.lo).exp(), d.hi, (-d.hi).exp(), k.value(x));
    (cv, cc)
}
