//! Vietoris-Rips persistent homology in dimensions 0 and 1.
//!
//! Two routes produce a [`PersistenceDiagram`]:
//!
//! * [`build_rips`] + [`compute_persistence`] materialize the filtration and
//!   reduce the Z/2 boundary matrix column by column. Suitable for small and
//!   moderate clouds.
//! * [`rips_persistence`] never materializes triangles; it reduces the
//!   coboundary matrix with clearing and computes cofaces on the fly, which
//!   scales to the case-study clouds.
//!
//! Both routes use the same total order on simplices, so they yield the same
//! pairs.

mod cohomology;
mod export;
mod rips;
mod subsample;
mod summary;

pub use cohomology::{enclosing_radius, rips_persistence};
pub use export::{write_diagram_csv, write_diagram_svg};
pub use rips::{
    build_rips, build_rips_capped, compute_persistence, RipsFiltration, Simplex, DEFAULT_EDGE_CAP,
};
pub use subsample::{maxmin_subsample, Subsample};
pub use summary::{summarize, Recommendation, TopologySummary, DEFAULT_PERSISTENCE_RATIO};

use serde::{Deserialize, Serialize};

use crate::datasets::PointCloud;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PersistencePair {
    pub dim: u8,
    pub birth: f64,
    /// `f64::INFINITY` for classes that never die (stored as `null` in JSON).
    #[serde(with = "inf_as_null")]
    pub death: f64,
}

impl PersistencePair {
    pub fn lifespan(&self) -> f64 {
        self.death - self.birth
    }

    pub fn is_finite(&self) -> bool {
        self.death.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PersistenceDiagram {
    pub pairs: Vec<PersistencePair>,
    pub n_points: usize,
}

impl PersistenceDiagram {
    pub fn dim_pairs(&self, dim: u8) -> impl Iterator<Item = &PersistencePair> {
        self.pairs.iter().filter(move |p| p.dim == dim)
    }

    /// Number of classes of dimension `dim` alive at `eps` (born at or before
    /// `eps`, dying strictly after).
    pub fn betti(&self, dim: u8, eps: f64) -> usize {
        self.dim_pairs(dim)
            .filter(|p| p.birth <= eps && eps < p.death)
            .count()
    }

    /// Canonical order: by dimension, birth, death.
    pub(crate) fn sort(&mut self) {
        self.pairs.sort_by(|a, b| {
            a.dim
                .cmp(&b.dim)
                .then(a.birth.total_cmp(&b.birth))
                .then(a.death.total_cmp(&b.death))
        });
    }
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Full pairwise distance matrix, row-major.
pub(crate) fn distance_matrix(cloud: &PointCloud) -> Vec<f64> {
    let n = cloud.len();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let v = distance(cloud.point(i), cloud.point(j));
            d[i * n + j] = v;
            d[j * n + i] = v;
        }
    }
    d
}

/// Disjoint-set forest with path halving and union by size.
#[derive(Debug, Clone)]
pub(crate) struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already connected.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

/// H0 pairs from edges given in filtration order: every vertex is born at 0,
/// and each merging edge kills one component.
pub(crate) fn h0_pairs(
    n: usize,
    edges_in_order: impl Iterator<Item = (usize, usize, f64)>,
) -> (Vec<PersistencePair>, Vec<(usize, usize)>) {
    let mut uf = UnionFind::new(n);
    let mut pairs = Vec::with_capacity(n);
    let mut deaths = Vec::with_capacity(n.saturating_sub(1));
    for (a, b, eps) in edges_in_order {
        if uf.union(a, b) {
            pairs.push(PersistencePair {
                dim: 0,
                birth: 0.0,
                death: eps,
            });
            deaths.push((a, b));
            if deaths.len() + 1 == n {
                break;
            }
        }
    }
    let components = n - deaths.len();
    pairs.extend((0..components).map(|_| PersistencePair {
        dim: 0,
        birth: 0.0,
        death: f64::INFINITY,
    }));
    (pairs, deaths)
}

mod inf_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}
