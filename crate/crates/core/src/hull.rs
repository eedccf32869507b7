//! Convex hulls and their facet form `A x + b <= 0`.
//!
//! Exact hulls are built for two dimensions (monotone chain) and three
//! dimensions (incremental). Higher-dimensional facet systems can be read
//! from CSV with [`import_facets`].

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::datasets::{PointCloud, ScaleMode, Scaler};
use crate::error::{Error, Result};
use crate::svg::Canvas;

/// Tolerance on cross products of scaled coordinates.
pub const COLLINEAR_TOL: f64 = 1e-12;

/// Membership slack used when validating imported facets against data.
pub const IMPORT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FacetSystem {
    /// One unit outward normal per facet.
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub dim: usize,
}

impl FacetSystem {
    /// Builds a system from raw rows, normalizing each to unit length.
    pub fn new(a: Vec<Vec<f64>>, b: Vec<f64>) -> Result<FacetSystem> {
        if a.is_empty() || a.len() != b.len() {
            return Err(Error::Format(
                "facet system needs matching nonempty A and b".into(),
            ));
        }
        let dim = a[0].len();
        let mut rows = Vec::with_capacity(a.len());
        let mut offsets = Vec::with_capacity(b.len());
        for (row, (ai, bi)) in a.into_iter().zip(b).enumerate() {
            if ai.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: ai.len(),
                });
            }
            let norm = ai.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 1e-300) || !norm.is_finite() || !bi.is_finite() {
                return Err(Error::ZeroFacet { row });
            }
            rows.push(ai.iter().map(|v| v / norm).collect());
            offsets.push(bi / norm);
        }
        Ok(FacetSystem {
            a: rows,
            b: offsets,
            dim,
        })
    }

    pub fn n_facets(&self) -> usize {
        self.a.len()
    }

    /// Value of facet `i` at `x`.
    pub fn row_value(&self, i: usize, x: &[f64]) -> f64 {
        self.a[i].iter().zip(x).map(|(a, v)| a * v).sum::<f64>() + self.b[i]
    }

    /// Indices of points whose margin exceeds `tol`.
    pub fn violators(&self, cloud: &PointCloud, tol: f64) -> Result<Vec<usize>> {
        check_dim(self.dim, cloud.dim())?;
        Ok((0..cloud.len())
            .filter(|&i| margin_unchecked(self, cloud.point(i)) > tol)
            .collect())
    }

    pub fn validate(&self, cloud: &PointCloud, tol: f64) -> Result<()> {
        let violators = self.violators(cloud, tol)?;
        if violators.is_empty() {
            Ok(())
        } else {
            Err(Error::FacetValidation { violators })
        }
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

fn margin_unchecked(fs: &FacetSystem, x: &[f64]) -> f64 {
    (0..fs.n_facets())
        .map(|i| fs.row_value(i, x))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest facet value at `x`: nonpositive inside the hull, and equal to the
/// distance to the hull for points beyond a single facet.
pub fn hull_margin(fs: &FacetSystem, x: &[f64]) -> Result<f64> {
    check_dim(fs.dim, x.len())?;
    Ok(margin_unchecked(fs, x))
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Indices of the counter-clockwise hull vertices, starting at the
/// lexicographically smallest point. Collinear boundary points are dropped.
pub fn convex_hull_2d_indices(cloud: &PointCloud) -> Result<Vec<usize>> {
    check_dim(2, cloud.dim())?;
    if cloud.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    let scaler = Scaler::fit(cloud, ScaleMode::MinmaxToUnitIntervalSigned)
        .map_err(|_| Error::DegenerateHull)?;
    let pts: Vec<[f64; 2]> = cloud
        .points()
        .iter()
        .map(|p| {
            let s = scaler.apply(p);
            [s[0], s[1]]
        })
        .collect();
    let mut order: Vec<usize> = (0..pts.len()).collect();
    order.sort_by(|&i, &j| {
        pts[i][0]
            .total_cmp(&pts[j][0])
            .then(pts[i][1].total_cmp(&pts[j][1]))
    });
    order.dedup_by(|i, j| pts[*i] == pts[*j]);

    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(order.iter())
        } else {
            Box::new(order.iter().rev())
        };
        for &i in iter {
            while hull.len() >= start + 2 {
                let (p, q) = (hull[hull.len() - 2], hull[hull.len() - 1]);
                if cross(pts[p], pts[q], pts[i]) <= COLLINEAR_TOL {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(i);
        }
        hull.pop();
    }
    if hull.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    Ok(hull)
}

/// Counter-clockwise hull vertices in the original coordinates.
pub fn convex_hull_2d(cloud: &PointCloud) -> Result<Vec<[f64; 2]>> {
    Ok(convex_hull_2d_indices(cloud)?
        .into_iter()
        .map(|i| [cloud.point(i)[0], cloud.point(i)[1]])
        .collect())
}

/// Facets of a counter-clockwise polygon: row `i` is the outward normal of
/// the edge from vertex `i` to vertex `i + 1`.
pub fn facets_from_hull(vertices: &[[f64; 2]]) -> Result<FacetSystem> {
    if vertices.len() < 3 {
        return Err(Error::DegenerateHull);
    }
    let n = vertices.len();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let (v, w) = (vertices[i], vertices[(i + 1) % n]);
        let (dx, dy) = (w[0] - v[0], w[1] - v[1]);
        let len = dx.hypot(dy);
        if !(len > 0.0) {
            return Err(Error::DegenerateHull);
        }
        let normal = vec![dy / len, -dx / len];
        b.push(-(normal[0] * v[0] + normal[1] * v[1]));
        a.push(normal);
    }
    FacetSystem::new(a, b)
}

/// Hull facets for a 2D or 3D cloud.
pub fn facets_for_cloud(cloud: &PointCloud) -> Result<FacetSystem> {
    match cloud.dim() {
        2 => facets_from_hull(&convex_hull_2d(cloud)?),
        3 => convex_hull_3d(cloud),
        d => Err(Error::Config(format!(
            "exact hulls are built for 2 or 3 dimensions, not {d}; import an external facet file"
        ))),
    }
}

type V3 = [f64; 3];

fn sub3(a: V3, b: V3) -> V3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross3(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm3(a: V3) -> f64 {
    dot3(a, a).sqrt()
}

/// Signed distance of `p` from the plane through face `f`, positive on the
/// side its orientation points to.
fn face_side(pts: &[V3], f: [usize; 3], p: V3) -> f64 {
    let n = cross3(sub3(pts[f[1]], pts[f[0]]), sub3(pts[f[2]], pts[f[0]]));
    let len = norm3(n);
    if len == 0.0 {
        return 0.0;
    }
    dot3(n, sub3(p, pts[f[0]])) / len
}

/// Triangulated hull faces of a 3D cloud, oriented outward, as indices.
pub fn convex_hull_3d_faces(cloud: &PointCloud) -> Result<Vec<[usize; 3]>> {
    check_dim(3, cloud.dim())?;
    if cloud.len() < 4 {
        return Err(Error::DegenerateHull);
    }
    let scaler = Scaler::fit(cloud, ScaleMode::MinmaxToUnitIntervalSigned)
        .map_err(|_| Error::DegenerateHull)?;
    let pts: Vec<V3> = cloud
        .points()
        .iter()
        .map(|p| {
            let s = scaler.apply(p);
            [s[0], s[1], s[2]]
        })
        .collect();
    let n = pts.len();
    let tol = 1e-10;

    let p0 = (0..n)
        .min_by(|&i, &j| pts[i][0].total_cmp(&pts[j][0]))
        .unwrap();
    let p1 = (0..n)
        .max_by(|&i, &j| norm3(sub3(pts[i], pts[p0])).total_cmp(&norm3(sub3(pts[j], pts[p0]))))
        .unwrap();
    let line = sub3(pts[p1], pts[p0]);
    if norm3(line) < tol {
        return Err(Error::DegenerateHull);
    }
    let line_dist = |i: usize| norm3(cross3(line, sub3(pts[i], pts[p0]))) / norm3(line);
    let p2 = (0..n)
        .max_by(|&i, &j| line_dist(i).total_cmp(&line_dist(j)))
        .unwrap();
    if line_dist(p2) < tol {
        return Err(Error::DegenerateHull);
    }
    let plane_dist = |i: usize| face_side(&pts, [p0, p1, p2], pts[i]).abs();
    let p3 = (0..n)
        .max_by(|&i, &j| plane_dist(i).total_cmp(&plane_dist(j)))
        .unwrap();
    if plane_dist(p3) < tol {
        return Err(Error::DegenerateHull);
    }

    let mut faces: Vec<[usize; 3]> = vec![[p0, p1, p2], [p0, p3, p1], [p1, p3, p2], [p2, p3, p0]];
    let centroid = {
        let s = [p0, p1, p2, p3].iter().fold([0.0; 3], |acc, &i| {
            [acc[0] + pts[i][0], acc[1] + pts[i][1], acc[2] + pts[i][2]]
        });
        [s[0] / 4.0, s[1] / 4.0, s[2] / 4.0]
    };
    for f in faces.iter_mut() {
        if face_side(&pts, *f, centroid) > 0.0 {
            f.swap(1, 2);
        }
    }

    let seed = [p0, p1, p2, p3];
    for i in 0..n {
        if seed.contains(&i) {
            continue;
        }
        let visible: Vec<bool> = faces
            .iter()
            .map(|&f| face_side(&pts, f, pts[i]) > tol)
            .collect();
        if !visible.iter().any(|&v| v) {
            continue;
        }
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for (f, _) in faces.iter().zip(&visible).filter(|(_, &v)| v) {
            for k in 0..3 {
                edges.push((f[k], f[(k + 1) % 3]));
            }
        }
        let horizon: Vec<(usize, usize)> = edges
            .iter()
            .filter(|&&(u, v)| !edges.contains(&(v, u)))
            .cloned()
            .collect();
        let mut kept: Vec<[usize; 3]> = faces
            .iter()
            .zip(&visible)
            .filter(|(_, &v)| !v)
            .map(|(f, _)| *f)
            .collect();
        kept.extend(horizon.into_iter().map(|(u, v)| [u, v, i]));
        faces = kept;
    }
    Ok(faces)
}

/// Facet system of a 3D hull; coplanar triangles are merged into one facet.
pub fn convex_hull_3d(cloud: &PointCloud) -> Result<FacetSystem> {
    let faces = convex_hull_3d_faces(cloud)?;
    let p = |i: usize| -> V3 {
        let q = cloud.point(i);
        [q[0], q[1], q[2]]
    };
    let mut a: Vec<Vec<f64>> = Vec::new();
    let mut b: Vec<f64> = Vec::new();
    let scale = cloud.bbox_diagonal().max(1.0);
    for f in faces {
        let nrm = cross3(sub3(p(f[1]), p(f[0])), sub3(p(f[2]), p(f[0])));
        let len = norm3(nrm);
        if len == 0.0 {
            continue;
        }
        let unit = [nrm[0] / len, nrm[1] / len, nrm[2] / len];
        let off = -dot3(unit, p(f[0]));
        let duplicate = a.iter().zip(&b).any(|(ai, &bi)| {
            (ai[0] - unit[0]).abs() < 1e-9
                && (ai[1] - unit[1]).abs() < 1e-9
                && (ai[2] - unit[2]).abs() < 1e-9
                && (bi - off).abs() < 1e-9 * scale
        });
        if !duplicate {
            a.push(unit.to_vec());
            b.push(off);
        }
    }
    // Every data point must satisfy the system; widen offsets by the residual
    // left from near-coplanar merges.
    for (ai, bi) in a.iter().zip(b.iter_mut()) {
        let worst = cloud
            .points()
            .iter()
            .map(|q| ai.iter().zip(q).map(|(x, y)| x * y).sum::<f64>() + *bi)
            .fold(f64::NEG_INFINITY, f64::max);
        if worst > 0.0 {
            *bi -= worst;
        }
    }
    FacetSystem::new(a, b)
}

pub fn write_facets_csv(fs: &FacetSystem, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header: Vec<String> = (1..=fs.dim).map(|j| format!("a{j}")).collect();
    header.push("b".into());
    w.write_record(&header)?;
    for (ai, bi) in fs.a.iter().zip(&fs.b) {
        let mut rec: Vec<String> = ai.iter().map(|v| format!("{v:e}")).collect();
        rec.push(format!("{bi:e}"));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a facet CSV (`a1,...,aD,b`). Rows are normalized; when `points` is
/// given, every point must satisfy the system within [`IMPORT_TOL`].
pub fn import_facets(path: &Path, points: Option<&PointCloud>) -> Result<FacetSystem> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.clone();
    if header.len() < 2 || &header[header.len() - 1] != "b" {
        return Err(Error::Format("facet CSV header must be a1,...,aD,b".into()));
    }
    let dim = header.len() - 1;
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        let mut vals = Vec::with_capacity(dim + 1);
        for (j, cell) in rec.iter().enumerate() {
            vals.push(cell.trim().parse::<f64>().map_err(|_| Error::NonNumeric {
                row: row + 1,
                column: header[j].to_string(),
                value: cell.to_string(),
            })?);
        }
        if vals.len() != dim + 1 {
            return Err(Error::DimensionMismatch {
                expected: dim + 1,
                got: vals.len(),
            });
        }
        b.push(vals.pop().unwrap());
        if vals.iter().all(|v| *v == 0.0) {
            return Err(Error::ZeroFacet { row: row + 1 });
        }
        a.push(vals);
    }
    if a.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let fs = FacetSystem::new(a, b)?;
    if let Some(cloud) = points {
        fs.validate(cloud, IMPORT_TOL)?;
    }
    Ok(fs)
}

/// Scatter of a 2D cloud with its hull polygon drawn on top.
pub fn hull_overlay_svg(cloud: &PointCloud, vertices: &[[f64; 2]]) -> Result<String> {
    check_dim(2, cloud.dim())?;
    let bounds = cloud.bounds();
    let mut canvas = Canvas::new(bounds[0], bounds[1]);
    canvas.axes("x1", "x2");
    for p in cloud.points() {
        canvas.circle((p[0], p[1]), 1.5, "#4a7ab5");
    }
    let poly: Vec<(f64, f64)> = vertices.iter().map(|v| (v[0], v[1])).collect();
    canvas.polygon(&poly, "fill:none;stroke:#c0392b;stroke-width:2");
    Ok(canvas.finish())
}
