//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use validom::datasets::PointCloud;

pub fn rbf(gamma: f64, a: &[f64], b: &[f64]) -> f64 {
    let d2: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    (-gamma * d2).exp()
}

pub fn kernel_matrix(cloud: &PointCloud, gamma: f64) -> Vec<Vec<f64>> {
    let n = cloud.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| rbf(gamma, cloud.point(i), cloud.point(j)))
                .collect()
        })
        .collect()
}

pub fn dual_objective(k: &[Vec<f64>], alpha: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..alpha.len() {
        for j in 0..alpha.len() {
            s += alpha[i] * alpha[j] * k[i][j];
        }
    }
    0.5 * s
}

/// Euclidean projection onto {sum a = 1, 0 <= a <= c} by bisection on the
/// shift.
fn project(v: &[f64], c: f64) -> Vec<f64> {
    let mass = |t: f64| v.iter().map(|x| (x - t).clamp(0.0, c)).sum::<f64>();
    let (mut lo, mut hi) = (
        v.iter().cloned().fold(f64::INFINITY, f64::min) - c - 1.0,
        v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0,
    );
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    v.iter().map(|x| (x - t).clamp(0.0, c)).collect()
}

/// Accelerated projected gradient on the one-class dual.
pub fn qp_oracle(k: &[Vec<f64>], c: f64, iterations: usize) -> Vec<f64> {
    let n = k.len();
    // Lipschitz constant via power iteration, padded.
    let mut v = vec![1.0; n];
    let mut lambda = 0.0;
    for _ in 0..100 {
        let w: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| k[i][j] * v[j]).sum())
            .collect();
        let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        lambda = norm / v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = w.iter().map(|x| x / norm).collect();
    }
    let step = 1.0 / (1.05 * lambda);
    let mut x = project(&vec![1.0 / n as f64; n], c);
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iterations {
        let g: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| k[i][j] * y[j]).sum())
            .collect();
        let next = project(
            &y.iter()
                .zip(&g)
                .map(|(a, b)| a - step * b)
                .collect::<Vec<_>>(),
            c,
        );
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        y = next
            .iter()
            .zip(&x)
            .map(|(a, b)| a + (t - 1.0) / t_next * (a - b))
            .collect();
        x = next;
        t = t_next;
    }
    x
}

/// Largest violation of the dual optimality conditions: the gradient of
/// every weight that can still grow must not undercut the gradient of any
/// weight that can still shrink.
pub fn kkt_residual(k: &[Vec<f64>], alpha: &[f64], c: f64) -> f64 {
    let n = alpha.len();
    let g: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| k[i][j] * alpha[j]).sum())
        .collect();
    let up = (0..n)
        .filter(|&i| alpha[i] < c)
        .map(|i| g[i])
        .fold(f64::INFINITY, f64::min);
    let down = (0..n)
        .filter(|&i| alpha[i] > 0.0)
        .map(|i| g[i])
        .fold(f64::NEG_INFINITY, f64::max);
    (down - up).max(0.0)
}

/// Adapted peaks, transcribed independently from the library.
pub fn peaks_reference(x1: f64, x2: f64) -> f64 {
    let t1 = 3.0 * (1.0 - x1) * (1.0 - x1) * f64::exp(-(x1 * x1) - (x2 + 1.0) * (x2 + 1.0));
    let t2 =
        -10.0 * (x1 / 5.0 - x1 * x1 * x1 - x2 * x2 * x2 * x2 * x2) * f64::exp(-x1 * x1 - x2 * x2);
    let t3 = -f64::exp(-(x1 + 1.0) * (x1 + 1.0) - x2 * x2) / 3.0;
    t1 + t2 + t3 - 1.3 * x2
}

/// Compass search from `x0` restricted to a box and a feasibility test.
pub fn compass_polish(
    f: &dyn Fn(&[f64]) -> f64,
    feasible: &dyn Fn(&[f64]) -> bool,
    lo: &[f64],
    hi: &[f64],
    x0: &[f64],
    h0: f64,
) -> (Vec<f64>, f64) {
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    let mut h = h0;
    while h > 1e-10 {
        let mut improved = false;
        for d in 0..x.len() {
            for s in [-1.0, 1.0] {
                let mut y = x.clone();
                y[d] = (y[d] + s * h).clamp(lo[d], hi[d]);
                if feasible(&y) {
                    let fy = f(&y);
                    if fy < fx {
                        x = y;
                        fx = fy;
                        improved = true;
                    }
                }
            }
        }
        if !improved {
            h *= 0.5;
        }
    }
    (x, fx)
}

/// Minimum of `f` over a uniform `n x n` grid on a 2D box, restricted to
/// feasible grid points. The best grid-local minima are polished by compass
/// search.
pub fn grid_oracle_2d(
    f: &dyn Fn(&[f64]) -> f64,
    feasible: &dyn Fn(&[f64]) -> bool,
    lo: [f64; 2],
    hi: [f64; 2],
    n: usize,
) -> Option<(Vec<f64>, f64)> {
    let at = |i: usize, j: usize| {
        vec![
            lo[0] + (hi[0] - lo[0]) * i as f64 / (n - 1) as f64,
            lo[1] + (hi[1] - lo[1]) * j as f64 / (n - 1) as f64,
        ]
    };
    let mut vals = vec![f64::NAN; n * n];
    for i in 0..n {
        for j in 0..n {
            let x = at(i, j);
            if feasible(&x) {
                vals[i * n + j] = f(&x);
            }
        }
    }
    let mut cands: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = vals[i * n + j];
            if v.is_nan() {
                continue;
            }
            let mut is_min = true;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (a, b) = (i as i64 + di, j as i64 + dj);
                    if a < 0 || b < 0 || a >= n as i64 || b >= n as i64 || (di == 0 && dj == 0) {
                        continue;
                    }
                    if vals[a as usize * n + b as usize] < v {
                        is_min = false;
                    }
                }
            }
            if is_min {
                cands.push((v, i, j));
            }
        }
    }
    cands.sort_by(|a, b| a.0.total_cmp(&b.0));
    let h = (hi[0] - lo[0]) / (n - 1) as f64;
    let mut best: Option<(Vec<f64>, f64)> = None;
    for &(v, i, j) in cands.iter().take(8) {
        let (y, fy) = compass_polish(f, feasible, &lo, &hi, &at(i, j), h);
        let (y, fy) = if fy <= v { (y, fy) } else { (at(i, j), v) };
        if best.as_ref().is_none_or(|b| fy < b.1) {
            best = Some((y, fy));
        }
    }
    best
}

pub struct RelaxCase {
    pub name: &'static str,
    pub expr: validom::relax::Expr,
    pub f: fn(&[f64]) -> f64,
}

const KC: [f64; 2] = [0.4, -0.9];
const KW: [f64; 2] = [0.7, 1.3];

fn sq_dist_ref(x: &[f64]) -> f64 {
    KW[0] * (x[0] - KC[0]).powi(2) + KW[1] * (x[1] - KC[1]).powi(2)
}

/// One expression per supported primitive plus composites, each paired with
/// a direct closed-form evaluation.
pub fn relax_cases() -> Vec<RelaxCase> {
    use validom::relax::{Expr, Kernel};
    let kernel = || Kernel {
        vars: vec![0, 1],
        center: KC.to_vec(),
        weights: KW.to_vec(),
        offset: 0.0,
    };
    let mut out = Vec::new();
    let mut push = |name, build: &dyn Fn(&mut Expr), f: fn(&[f64]) -> f64| {
        let mut e = Expr::new(2);
        build(&mut e);
        out.push(RelaxCase { name, expr: e, f });
    };
    push(
        "affine",
        &|e| {
            let (a, b) = (e.var(0), e.var(1));
            e.affine(&[(a, 1.7), (b, -0.4)], 0.3);
        },
        |x| 1.7 * x[0] - 0.4 * x[1] + 0.3,
    );
    push(
        "product",
        &|e| {
            let (a, b) = (e.var(0), e.var(1));
            e.mul(a, b);
        },
        |x| x[0] * x[1],
    );
    push(
        "square",
        &|e| {
            let (a, b) = (e.var(0), e.var(1));
            let s = e.affine(&[(a, 1.0), (b, -0.5)], 0.0);
            e.sqr(s);
        },
        |x| (x[0] - 0.5 * x[1]).powi(2),
    );
    push(
        "exp",
        &|e| {
            let (a, b) = (e.var(0), e.var(1));
            let s = e.affine(&[(a, 0.8), (b, -0.3)], 0.0);
            e.exp(s);
        },
        |x| (0.8 * x[0] - 0.3 * x[1]).exp(),
    );
    push(
        "tanh",
        &|e| {
            let (a, b) = (e.var(0), e.var(1));
            let s = e.affine(&[(a, 1.5), (b, 1.0)], 0.0);
            e.tanh(s);
        },
        |x| (1.5 * x[0] + x[1]).tanh(),
    );
    push(
        "abs",
        &|e| {
            let (a, b) = (e.var(0), e.var(1));
            let s = e.sub(a, b);
            e.abs(s);
        },
        |x| (x[0] - x[1]).abs(),
    );
    push(
        "sq_dist",
        &|e| {
            e.sq_dist(kernel());
        },
        sq_dist_ref,
    );
    push(
        "rbf",
        &|e| {
            e.rbf(kernel());
        },
        |x| (-sq_dist_ref(x)).exp(),
    );
    push(
        "tanh_times_exp",
        &|e| {
            let (a, b) = (e.var(0), e.var(1));
            let t = e.tanh(a);
            let s = e.scale(b, 0.5);
            let x = e.exp(s);
            e.mul(t, x);
        },
        |x| x[0].tanh() * (0.5 * x[1]).exp(),
    );
    push(
        "peaks",
        &|e| {
            validom::relax::peaks_expr(e, 0, 1);
        },
        |x| peaks_reference(x[0], x[1]),
    );
    out
}

/// Random box (some sides degenerate) and a point in it.
pub fn random_box(rng: &mut impl rand::Rng) -> (Vec<validom::relax::Interval>, Vec<f64>) {
    use validom::relax::Interval;
    let mut bx = Vec::new();
    let mut x = Vec::new();
    for _ in 0..2 {
        let c = rng.gen_range(-3.0..3.0);
        let w = if rng.gen_bool(0.05) {
            0.0
        } else {
            rng.gen_range(0.0..4.0)
        };
        let iv = Interval::new(c - 0.5 * w, c + 0.5 * w);
        x.push(rng.gen_range(iv.lo..=iv.hi));
        bx.push(iv);
    }
    (bx, x)
}

pub fn sample_in(bx: &[validom::relax::Interval], rng: &mut impl rand::Rng) -> Vec<f64> {
    bx.iter().map(|b| rng.gen_range(b.lo..=b.hi)).collect()
}

/// Checks enclosure, sandwich and the affine underestimator/overestimator
/// of one relaxation against `samples` random points of the box.
pub fn check_relax_trial(
    case: &RelaxCase,
    rng: &mut impl rand::Rng,
    samples: usize,
) -> Result<(), String> {
    let slack = 1e-9;
    let (bx, x) = random_box(rng);
    let r = case.expr.relax(&bx, &x);
    let r = r.last().unwrap();
    let fx = (case.f)(&x);
    let tol = |_: f64| slack;
    if !(r.cv <= fx + tol(fx) && fx <= r.cc + tol(fx)) {
        return Err(format!(
            "{}: cv {} f {} cc {} at {:?} in {:?}",
            case.name, r.cv, fx, r.cc, x, bx
        ));
    }
    if !(r.interval.lo <= r.cv + tol(r.cv) && r.cc <= r.interval.hi + tol(r.cc)) {
        return Err(format!(
            "{}: relaxation outside interval {:?}",
            case.name, r.interval
        ));
    }
    for _ in 0..samples {
        let y = sample_in(&bx, rng);
        let fy = (case.f)(&y);
        if !(r.interval.lo <= fy + tol(fy) && fy <= r.interval.hi + tol(fy)) {
            return Err(format!(
                "{}: f({:?}) = {} outside {:?}",
                case.name, y, fy, r.interval
            ));
        }
        let under = r.cv
            + r.cv_sub
                .iter()
                .zip(y.iter().zip(&x))
                .map(|(s, (a, b))| s * (a - b))
                .sum::<f64>();
        let over = r.cc
            + r.cc_sub
                .iter()
                .zip(y.iter().zip(&x))
                .map(|(s, (a, b))| s * (a - b))
                .sum::<f64>();
        let t = 1e-9
            * (1.0
                + fy.abs()
                + r.cv_sub
                    .iter()
                    .chain(&r.cc_sub)
                    .map(|s| s.abs())
                    .sum::<f64>());
        if under > fy + t || over < fy - t {
            return Err(format!(
                "{}: linearization at {:?} gives [{under}, {over}] but f({:?}) = {fy}",
                case.name, x, y
            ));
        }
    }
    Ok(())
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Rank over GF(2) of a matrix whose columns are bit masks.
fn gf2_rank(mut cols: Vec<u64>) -> usize {
    let mut rank = 0;
    for bit in 0..64 {
        let Some(p) = cols.iter().position(|c| c >> bit & 1 == 1) else {
            continue;
        };
        let pivot = cols.swap_remove(p);
        for c in cols.iter_mut() {
            if *c >> bit & 1 == 1 {
                *c ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers of the Rips clique complex at `eps`, from explicit
/// boundary matrices. Needs at most 11 points.
pub fn brute_betti(cloud: &PointCloud, eps: f64) -> (usize, usize) {
    let n = cloud.len();
    assert!(n * (n - 1) / 2 <= 64);
    let d = |i: usize, j: usize| dist(cloud.point(i), cloud.point(j));
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if d(i, j) <= eps {
                edges.push((i, j));
            }
        }
    }
    let edge_id = |a: usize, b: usize| edges.iter().position(|&e| e == (a, b));
    let d1: Vec<u64> = edges.iter().map(|&(i, j)| 1u64 << i | 1u64 << j).collect();
    let mut d2 = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                if let (Some(a), Some(b), Some(c)) = (edge_id(i, j), edge_id(i, k), edge_id(j, k)) {
                    d2.push(1u64 << a | 1u64 << b | 1u64 << c);
                }
            }
        }
    }
    let r1 = gf2_rank(d1);
    let r2 = gf2_rank(d2);
    (n - r1, edges.len() - r1 - r2)
}

/// Edge lengths of a Euclidean minimum spanning tree (Prim), sorted.
pub fn mst_lengths(cloud: &PointCloud) -> Vec<f64> {
    let n = cloud.len();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    best[0] = 0.0;
    for step in 0..n {
        let v = (0..n)
            .filter(|&i| !in_tree[i])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[v] = true;
        if step > 0 {
            out.push(best[v]);
        }
        for u in 0..n {
            if !in_tree[u] {
                best[u] = best[u].min(dist(cloud.point(u), cloud.point(v)));
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// All pairwise distances, sorted and deduplicated.
pub fn edge_lengths(cloud: &PointCloud) -> Vec<f64> {
    let n = cloud.len();
    let mut v = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            v.push(dist(cloud.point(i), cloud.point(j)));
        }
    }
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

pub fn random_cloud(rng: &mut impl rand::Rng, n: usize, dim: usize) -> PointCloud {
    PointCloud::new(
        (0..n)
            .map(|_| (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect(),
    )
    .unwrap()
}

/// Number of single-linkage clusters when points closer than `eps` merge.
pub fn single_linkage_components(cloud: &PointCloud, eps: f64) -> usize {
    let n = cloud.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let mut comps = n;
    for i in 0..n {
        for j in i + 1..n {
            if dist(cloud.point(i), cloud.point(j)) <= eps {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                    comps -= 1;
                }
            }
        }
    }
    comps
}
