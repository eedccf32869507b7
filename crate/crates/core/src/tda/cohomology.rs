use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashMap};

use super::{distance_matrix, h0_pairs, PersistenceDiagram, PersistencePair};
use crate::datasets::PointCloud;

/// Smallest radius `r` such that some point is within `r` of every other
/// point. Above it the Rips complex is a cone, so no H1 class survives.
pub fn enclosing_radius(cloud: &PointCloud) -> f64 {
    let n = cloud.len();
    let d = distance_matrix(cloud);
    (0..n)
        .map(|i| d[i * n..(i + 1) * n].iter().cloned().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Edge {
    eps: f64,
    a: u32,
    b: u32,
}

impl Edge {
    fn cmp_filtration(&self, other: &Self) -> Ordering {
        self.eps
            .total_cmp(&other.eps)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Tri {
    eps: f64,
    v: [u32; 3],
}

impl Eq for Tri {}

impl Ord for Tri {
    fn cmp(&self, other: &Self) -> Ordering {
        self.eps.total_cmp(&other.eps).then(self.v.cmp(&other.v))
    }
}

impl PartialOrd for Tri {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Tri {
    fn key(&self) -> u64 {
        let [a, b, c] = self.v.map(u64::from);
        c * (c.saturating_sub(1)) * (c.saturating_sub(2)) / 6 + b * (b.saturating_sub(1)) / 2 + a
    }
}

struct Coboundary<'a> {
    n: usize,
    d: &'a [f64],
    threshold: f64,
}

impl Coboundary<'_> {
    fn cofaces(&self, e: &Edge, mut f: impl FnMut(Tri)) {
        let (a, b) = (e.a as usize, e.b as usize);
        for k in 0..self.n {
            if k == a || k == b {
                continue;
            }
            let dak = self.d[a * self.n + k];
            let dbk = self.d[b * self.n + k];
            if dak > self.threshold || dbk > self.threshold {
                continue;
            }
            let eps = e.eps.max(dak).max(dbk);
            let mut v = [a as u32, b as u32, k as u32];
            v.sort_unstable();
            f(Tri { eps, v });
        }
    }

    fn min_coface(&self, e: &Edge) -> Option<Tri> {
        let mut best: Option<Tri> = None;
        self.cofaces(e, |t| {
            if best.map_or(true, |b| t < b) {
                best = Some(t);
            }
        });
        best
    }
}

/// Pops the smallest entry that survives Z/2 cancellation and pushes it back.
fn pivot(heap: &mut BinaryHeap<Reverse<Tri>>) -> Option<Tri> {
    loop {
        let Reverse(top) = heap.pop()?;
        let mut count = 1;
        while heap.peek().is_some_and(|Reverse(t)| *t == top) {
            heap.pop();
            count += 1;
        }
        if count % 2 == 1 {
            heap.push(Reverse(top));
            return Some(top);
        }
    }
}

/// Rips persistence in dimensions 0 and 1 without materializing triangles.
///
/// Triangles are restricted to `min(max_eps, enclosing radius)`; H0 always
/// uses the full edge set. Agrees with [`super::compute_persistence`] on the
/// explicit filtration truncated at the same value.
pub fn rips_persistence(cloud: &PointCloud, max_eps: Option<f64>) -> PersistenceDiagram {
    let n = cloud.len();
    let d = distance_matrix(cloud);
    let radius = (0..n)
        .map(|i| d[i * n..(i + 1) * n].iter().cloned().fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min);
    let threshold = max_eps.map_or(radius, |m| m.min(radius));
    let h0_limit = max_eps.unwrap_or(f64::INFINITY);

    let mut edges: Vec<Edge> = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for a in 0..n {
        for b in (a + 1)..n {
            let eps = d[a * n + b];
            if eps <= h0_limit {
                edges.push(Edge {
                    eps,
                    a: a as u32,
                    b: b as u32,
                });
            }
        }
    }
    edges.sort_by(Edge::cmp_filtration);

    let mut is_death = vec![false; edges.len()];
    let mut uf = super::UnionFind::new(n);
    let (mut pairs, _) = h0_pairs(
        n,
        edges.iter().enumerate().filter_map(|(i, e)| {
            // h0_pairs consumes lazily; mark deaths as they happen
            let merged = uf.union(e.a as usize, e.b as usize);
            if merged {
                is_death[i] = true;
                Some((e.a as usize, e.b as usize, e.eps))
            } else {
                None
            }
        }),
    );

    let cob = Coboundary {
        n,
        d: &d,
        threshold,
    };
    let mut pivot_owner: HashMap<u64, usize> = HashMap::new();
    let mut reduction: HashMap<usize, Vec<usize>> = HashMap::new();

    for idx in (0..edges.len()).rev() {
        let e = edges[idx];
        if is_death[idx] || e.eps > threshold {
            continue;
        }
        let first = cob.min_coface(&e);
        let Some(first) = first else {
            pairs.push(PersistencePair {
                dim: 1,
                birth: e.eps,
                death: f64::INFINITY,
            });
            continue;
        };
        if !pivot_owner.contains_key(&first.key()) {
            pivot_owner.insert(first.key(), idx);
            if first.eps > e.eps {
                pairs.push(PersistencePair {
                    dim: 1,
                    birth: e.eps,
                    death: first.eps,
                });
            }
            continue;
        }

        let mut heap = BinaryHeap::new();
        cob.cofaces(&e, |t| heap.push(Reverse(t)));
        let mut combo: Vec<usize> = Vec::new();
        let result = loop {
            match pivot(&mut heap) {
                None => break None,
                Some(p) => match pivot_owner.get(&p.key()) {
                    Some(&other) => {
                        combo.push(other);
                        cob.cofaces(&edges[other], |t| heap.push(Reverse(t)));
                        if let Some(extra) = reduction.get(&other) {
                            for &o in extra {
                                combo.push(o);
                                cob.cofaces(&edges[o], |t| heap.push(Reverse(t)));
                            }
                        }
                    }
                    None => break Some(p),
                },
            }
        };
        match result {
            None => pairs.push(PersistencePair {
                dim: 1,
                birth: e.eps,
                death: f64::INFINITY,
            }),
            Some(p) => {
                pivot_owner.insert(p.key(), idx);
                combo.sort_unstable();
                let mut kept = Vec::with_capacity(combo.len());
                let mut i = 0;
                while i < combo.len() {
                    let mut j = i;
                    while j < combo.len() && combo[j] == combo[i] {
                        j += 1;
                    }
                    if (j - i) % 2 == 1 {
                        kept.push(combo[i]);
                    }
                    i = j;
                }
                if !kept.is_empty() {
                    reduction.insert(idx, kept);
                }
                if p.eps > e.eps {
                    pairs.push(PersistencePair {
                        dim: 1,
                        birth: e.eps,
                        death: p.eps,
                    });
                }
            }
        }
    }

    let mut diagram = PersistenceDiagram { pairs, n_points: n };
    diagram.sort();
    diagram
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tda::{build_rips, compute_persistence};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cloud(rng: &mut ChaCha8Rng, n: usize) -> PointCloud {
        PointCloud::new(
            (0..n)
                .map(|_| vec![rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn agrees_with_explicit_reduction() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for trial in 0..40 {
            let n = rng.gen_range(3..40);
            let c = random_cloud(&mut rng, n);
            let r = enclosing_radius(&c);
            let explicit = compute_persistence(&build_rips(&c, r, 2).unwrap());
            let implicit = rips_persistence(&c, None);
            assert_eq!(explicit.pairs, implicit.pairs, "trial {trial}, n = {n}");
        }
    }

    #[test]
    fn truncation_below_enclosing_radius() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let c = random_cloud(&mut rng, 25);
            let t = 0.4;
            let explicit = compute_persistence(&build_rips(&c, t, 2).unwrap());
            let implicit = rips_persistence(&c, Some(t));
            assert_eq!(explicit.pairs, implicit.pairs);
        }
    }

    #[test]
    fn circle_has_one_long_cycle() {
        let pts: Vec<Vec<f64>> = (0..60)
            .map(|k| {
                let t = k as f64 * std::f64::consts::TAU / 60.0;
                vec![2.0 * t.cos(), 2.0 * t.sin()]
            })
            .collect();
        let dgm = rips_persistence(&PointCloud::new(pts).unwrap(), None);
        let h1: Vec<_> = dgm.dim_pairs(1).collect();
        assert_eq!(h1.len(), 1);
        assert!(h1[0].lifespan() > 3.0);
    }
}
