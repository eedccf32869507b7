use std::cmp::Ordering;
use std::collections::HashMap;

use super::{distance_matrix, h0_pairs, PersistenceDiagram, PersistencePair};
use crate::datasets::PointCloud;
use crate::error::{Error, Result};

/// Edge budget for the explicit filtration.
pub const DEFAULT_EDGE_CAP: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Simplex {
    /// Sorted vertex indices, 1 to 3 of them.
    pub vertices: Vec<usize>,
    pub eps: f64,
}

impl Simplex {
    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }
}

/// Filtration order: value, then dimension, then lexicographic vertices.
pub(crate) fn filtration_cmp(a: &Simplex, b: &Simplex) -> Ordering {
    a.eps
        .total_cmp(&b.eps)
        .then(a.vertices.len().cmp(&b.vertices.len()))
        .then_with(|| a.vertices.cmp(&b.vertices))
}

#[derive(Debug, Clone)]
pub struct RipsFiltration {
    pub n_vertices: usize,
    pub max_eps: f64,
    pub simplices: Vec<Simplex>,
}

impl RipsFiltration {
    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.iter().filter(|s| s.dim() == dim).count()
    }
}

pub fn build_rips(cloud: &PointCloud, max_eps: f64, max_dim: usize) -> Result<RipsFiltration> {
    build_rips_capped(cloud, max_eps, max_dim, DEFAULT_EDGE_CAP)
}

/// Vertices at 0, edges at their length, triangles at their longest edge,
/// all restricted to `eps <= max_eps`.
pub fn build_rips_capped(
    cloud: &PointCloud,
    max_eps: f64,
    max_dim: usize,
    edge_cap: usize,
) -> Result<RipsFiltration> {
    if !(max_eps > 0.0) {
        return Err(Error::Config("max_eps must be positive".into()));
    }
    let n = cloud.len();
    let d = distance_matrix(cloud);
    let mut simplices: Vec<Simplex> = (0..n)
        .map(|i| Simplex {
            vertices: vec![i],
            eps: 0.0,
        })
        .collect();
    if max_dim >= 1 {
        let mut edges = 0usize;
        for i in 0..n {
            for j in (i + 1)..n {
                if d[i * n + j] <= max_eps {
                    edges += 1;
                    if edges > edge_cap {
                        return Err(Error::FiltrationTooLarge {
                            edges,
                            cap: edge_cap,
                        });
                    }
                    simplices.push(Simplex {
                        vertices: vec![i, j],
                        eps: d[i * n + j],
                    });
                }
            }
        }
    }
    if max_dim >= 2 {
        for i in 0..n {
            for j in (i + 1)..n {
                let dij = d[i * n + j];
                if dij > max_eps {
                    continue;
                }
                for k in (j + 1)..n {
                    let eps = dij.max(d[i * n + k]).max(d[j * n + k]);
                    if eps <= max_eps {
                        simplices.push(Simplex {
                            vertices: vec![i, j, k],
                            eps,
                        });
                    }
                }
            }
        }
    }
    simplices.sort_by(filtration_cmp);
    Ok(RipsFiltration {
        n_vertices: n,
        max_eps,
        simplices,
    })
}

/// Standard persistence reduction over Z/2.
///
/// H0 comes from union-find over the edges in filtration order. H1 comes from
/// reducing the edge/triangle boundary matrix; edges that kill a component
/// are skipped as pivots can never land on them. H1 pairs of zero lifespan
/// are dropped.
pub fn compute_persistence(filtration: &RipsFiltration) -> PersistenceDiagram {
    let n = filtration.n_vertices;
    let edges: Vec<&Simplex> = filtration
        .simplices
        .iter()
        .filter(|s| s.dim() == 1)
        .collect();
    let edge_pos: HashMap<(usize, usize), usize> = edges
        .iter()
        .enumerate()
        .map(|(p, s)| ((s.vertices[0], s.vertices[1]), p))
        .collect();

    let (mut pairs, _) = h0_pairs(
        n,
        edges.iter().map(|s| (s.vertices[0], s.vertices[1], s.eps)),
    );

    // pivot (edge position) -> reduced column
    let mut reduced: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut killed = vec![false; edges.len()];
    for tri in filtration.simplices.iter().filter(|s| s.dim() == 2) {
        let v = &tri.vertices;
        let mut col = vec![
            edge_pos[&(v[0], v[1])],
            edge_pos[&(v[0], v[2])],
            edge_pos[&(v[1], v[2])],
        ];
        col.sort_unstable();
        while let Some(&low) = col.last() {
            match reduced.get(&low) {
                Some(other) => col = xor_sorted(&col, other),
                None => break,
            }
        }
        if let Some(&low) = col.last() {
            killed[low] = true;
            let birth = edges[low].eps;
            if tri.eps > birth {
                pairs.push(PersistencePair {
                    dim: 1,
                    birth,
                    death: tri.eps,
                });
            }
            reduced.insert(low, col);
        }
    }

    // Positive edges never killed by a triangle are essential H1 classes.
    let mut uf = super::UnionFind::new(n);
    for (p, e) in edges.iter().enumerate() {
        let merges = uf.union(e.vertices[0], e.vertices[1]);
        if !merges && !killed[p] {
            pairs.push(PersistencePair {
                dim: 1,
                birth: e.eps,
                death: f64::INFINITY,
            });
        }
    }

    let mut diagram = PersistenceDiagram { pairs, n_points: n };
    diagram.sort();
    diagram
}

fn xor_sorted(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}
