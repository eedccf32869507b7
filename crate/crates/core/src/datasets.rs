//! Point clouds, the synthetic two-dimensional case-study generators, input
//! and output scaling, and time-series ingestion with lag features.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A set of `N` points of common dimension `D`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    points: Vec<Vec<f64>>,
    dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| Error::InvalidCloud("no points".into()))?;
        let dim = first.len();
        if dim == 0 {
            return Err(Error::InvalidCloud("dimension must be at least 1".into()));
        }
        for (i, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidCloud(format!(
                    "point {i} has dimension {} instead of {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidCloud(format!(
                    "point {i} has a non-finite coordinate"
                )));
            }
        }
        Ok(Self {
            points,
            dim,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Vec<String>) -> Result<Self> {
        if labels.len() != self.points.len() {
            return Err(Error::InvalidCloud(format!(
                "{} labels for {} points",
                labels.len(),
                self.points.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Per-dimension `(min, max)`.
    pub fn bounds(&self) -> Vec<(f64, f64)> {
        (0..self.dim)
            .map(|d| {
                self.points
                    .iter()
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                        (lo.min(p[d]), hi.max(p[d]))
                    })
            })
            .collect()
    }

    /// Length of the diagonal of the axis-aligned bounding box.
    pub fn bbox_diagonal(&self) -> f64 {
        self.bounds()
            .iter()
            .map(|(lo, hi)| (hi - lo).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    pub fn subset(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            points: indices.iter().map(|&i| self.points[i].clone()).collect(),
            dim: self.dim,
            labels: self
                .labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i].clone()).collect()),
        }
    }

    pub fn map_points(&self, f: impl Fn(&[f64]) -> Vec<f64>) -> Result<PointCloud> {
        let mut out = PointCloud::new(self.points.iter().map(|p| f(p)).collect())?;
        out.labels = self.labels.clone();
        Ok(out)
    }

    /// Writes `x1,...,xD[,label]` with a header row.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let mut header: Vec<String> = (1..=self.dim).map(|d| format!("x{d}")).collect();
        if self.labels.is_some() {
            header.push("label".into());
        }
        w.write_record(&header)?;
        for (i, p) in self.points.iter().enumerate() {
            let mut rec: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
            if let Some(l) = &self.labels {
                rec.push(l[i].clone());
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads every numeric column of a headered CSV (a trailing `label`
    /// column is kept as labels).
    pub fn read_csv(path: &Path) -> Result<PointCloud> {
        let mut r = csv::Reader::from_path(path)?;
        let headers = r.headers()?.clone();
        let label_col = headers.iter().position(|h| h == "label");
        let mut points = Vec::new();
        let mut labels = Vec::new();
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let mut p = Vec::new();
            for (c, cell) in rec.iter().enumerate() {
                if Some(c) == label_col {
                    labels.push(cell.to_string());
                    continue;
                }
                p.push(parse_cell(cell, row + 1, &headers[c])?);
            }
            points.push(p);
        }
        if points.is_empty() {
            return Err(Error::EmptyFile(path.to_path_buf()));
        }
        let cloud = PointCloud::new(points)?;
        if label_col.is_some() {
            cloud.with_labels(labels)
        } else {
            Ok(cloud)
        }
    }
}

fn parse_cell(cell: &str, row: usize, column: &str) -> Result<f64> {
    cell.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| Error::NonNumeric {
            row,
            column: column.to_string(),
            value: cell.to_string(),
        })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScaleMode {
    /// Per-dimension min maps to -1 and max to +1.
    MinmaxToUnitIntervalSigned,
    /// Zero mean, unit population variance.
    Standardize,
}

/// Per-dimension affine map `x' = (x - offset) * gain`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mode: ScaleMode,
    pub offsets: Vec<f64>,
    pub gains: Vec<f64>,
}

impl Scaler {
    pub fn fit(data: &PointCloud, mode: ScaleMode) -> Result<Scaler> {
        let n = data.len() as f64;
        let mut offsets = Vec::with_capacity(data.dim());
        let mut gains = Vec::with_capacity(data.dim());
        match mode {
            ScaleMode::MinmaxToUnitIntervalSigned => {
                for (d, (lo, hi)) in data.bounds().into_iter().enumerate() {
                    let half = 0.5 * (hi - lo);
                    if !(half > 0.0) {
                        return Err(Error::DegenerateDimension { dim: d });
                    }
                    offsets.push(0.5 * (hi + lo));
                    gains.push(1.0 / half);
                }
            }
            ScaleMode::Standardize => {
                for d in 0..data.dim() {
                    let mean = data.points().iter().map(|p| p[d]).sum::<f64>() / n;
                    let var = data
                        .points()
                        .iter()
                        .map(|p| (p[d] - mean).powi(2))
                        .sum::<f64>()
                        / n;
                    if !(var > 0.0) {
                        return Err(Error::DegenerateDimension { dim: d });
                    }
                    offsets.push(mean);
                    gains.push(1.0 / var.sqrt());
                }
            }
        }
        Ok(Scaler {
            mode,
            offsets,
            gains,
        })
    }

    pub fn identity(dim: usize) -> Scaler {
        Scaler {
            mode: ScaleMode::Standardize,
            offsets: vec![0.0; dim],
            gains: vec![1.0; dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.gains.len()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.offsets.iter().zip(&self.gains))
            .map(|(v, (o, g))| (v - o) * g)
            .collect()
    }

    pub fn invert(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.offsets.iter().zip(&self.gains))
            .map(|(v, (o, g))| v / g + o)
            .collect()
    }

    pub fn apply_cloud(&self, cloud: &PointCloud) -> Result<PointCloud> {
        cloud.map_points(|p| self.apply(p))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Box,
    Oval,
    Box2,
    Banana,
    TwoCircles,
    TwoOvals,
    BoxWithHole,
    CircleWithHole,
}

impl Shape {
    pub const ALL: [Shape; 8] = [
        Shape::Box,
        Shape::Oval,
        Shape::Box2,
        Shape::Banana,
        Shape::TwoCircles,
        Shape::TwoOvals,
        Shape::BoxWithHole,
        Shape::CircleWithHole,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Shape::Box => "box",
            Shape::Oval => "oval",
            Shape::Box2 => "box2",
            Shape::Banana => "banana",
            Shape::TwoCircles => "two_circles",
            Shape::TwoOvals => "two_ovals",
            Shape::BoxWithHole => "box_with_hole",
            Shape::CircleWithHole => "circle_with_hole",
        }
    }

    /// Shapes whose data contain a hole or separate clusters.
    pub fn has_nontrivial_topology(self) -> bool {
        matches!(
            self,
            Shape::TwoCircles | Shape::TwoOvals | Shape::BoxWithHole | Shape::CircleWithHole
        )
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Shape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Shape> {
        Shape::ALL
            .into_iter()
            .find(|sh| sh.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown shape `{s}`")))
    }
}

/// Primitive regions the generators are built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    Rect {
        lo: [f64; 2],
        hi: [f64; 2],
    },
    /// Filled ellipse rotated by `angle` radians.
    Ellipse {
        center: [f64; 2],
        semi_axes: [f64; 2],
        angle: f64,
    },
    /// Filled square rotated by 45 degrees.
    Diamond {
        center: [f64; 2],
        half_diagonal: f64,
    },
    /// Circular arc swept from `theta0` to `theta1` (radians), uniformly
    /// jittered radially by up to `half_thickness`.
    Arc {
        center: [f64; 2],
        radius: f64,
        theta0: f64,
        theta1: f64,
        half_thickness: f64,
    },
    Annulus {
        center: [f64; 2],
        inner: f64,
        outer: f64,
    },
}

impl Region {
    fn bbox(&self) -> ([f64; 2], [f64; 2]) {
        match *self {
            Region::Rect { lo, hi } => (lo, hi),
            Region::Ellipse {
                center,
                semi_axes: [a, b],
                angle,
            } => {
                let (s, c) = angle.sin_cos();
                let ex = ((a * c).powi(2) + (b * s).powi(2)).sqrt();
                let ey = ((a * s).powi(2) + (b * c).powi(2)).sqrt();
                (
                    [center[0] - ex, center[1] - ey],
                    [center[0] + ex, center[1] + ey],
                )
            }
            Region::Diamond {
                center,
                half_diagonal: h,
            } => (
                [center[0] - h, center[1] - h],
                [center[0] + h, center[1] + h],
            ),
            Region::Arc {
                center,
                radius,
                half_thickness,
                ..
            } => {
                let r = radius + half_thickness;
                (
                    [center[0] - r, center[1] - r],
                    [center[0] + r, center[1] + r],
                )
            }
            Region::Annulus { center, outer, .. } => (
                [center[0] - outer, center[1] - outer],
                [center[0] + outer, center[1] + outer],
            ),
        }
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        match *self {
            Region::Rect { lo, hi } => {
                p[0] >= lo[0] && p[0] <= hi[0] && p[1] >= lo[1] && p[1] <= hi[1]
            }
            Region::Ellipse {
                center,
                semi_axes: [a, b],
                angle,
            } => {
                let (s, c) = angle.sin_cos();
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let u = c * dx + s * dy;
                let v = -s * dx + c * dy;
                (u / a).powi(2) + (v / b).powi(2) <= 1.0
            }
            Region::Diamond {
                center,
                half_diagonal,
            } => (p[0] - center[0]).abs() + (p[1] - center[1]).abs() <= half_diagonal,
            Region::Arc {
                center,
                radius,
                theta0,
                theta1,
                half_thickness,
            } => {
                let (dx, dy) = (p[0] - center[0], p[1] - center[1]);
                let r = dx.hypot(dy);
                let mut t = dy.atan2(dx);
                while t < theta0 {
                    t += std::f64::consts::TAU;
                }
                (r - radius).abs() <= half_thickness && t <= theta1
            }
            Region::Annulus {
                center,
                inner,
                outer,
            } => {
                let r = (p[0] - center[0]).hypot(p[1] - center[1]);
                r >= inner && r <= outer
            }
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> [f64; 2] {
        match *self {
            Region::Arc {
                center,
                radius,
                theta0,
                theta1,
                half_thickness,
            } => {
                let t = rng.gen_range(theta0..=theta1);
                let r = radius + rng.gen_range(-half_thickness..=half_thickness);
                [center[0] + r * t.cos(), center[1] + r * t.sin()]
            }
            _ => {
                let (lo, hi) = self.bbox();
                loop {
                    let p = [rng.gen_range(lo[0]..=hi[0]), rng.gen_range(lo[1]..=hi[1])];
                    if self.contains(p) {
                        return p;
                    }
                }
            }
        }
    }
}

/// Disk-shaped exclusion region; generated points never fall inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Hole {
    pub fn contains(&self, p: &[f64]) -> bool {
        (p[0] - self.center[0]).hypot(p[1] - self.center[1]) < self.radius
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    pub shape: Shape,
    pub n_points: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Regions sampled with equal probability.
    pub regions: Vec<Region>,
    #[serde(default)]
    pub holes: Vec<Hole>,
}

/// Default number of points per case study.
pub const DEFAULT_N_POINTS: usize = 600;
/// Default Gaussian noise standard deviation.
pub const DEFAULT_NOISE: f64 = 0.1;

impl DatasetSpec {
    /// Pinned geometry for each case study.
    ///
    /// | shape | geometry |
    /// |---|---|
    /// | box | uniform on `[-2,4]^2`, the four corners emitted first |
    /// | oval | ellipse centered `(1,1)`, semi-axes `(3, 1.8)`, rotated 30 deg |
    /// | box2 | square rotated 45 deg, centered `(1,1)`, half-diagonal 3 |
    /// | banana | arc centered `(0.5,3)`, radius 4, 200..340 deg, half-thickness 0.7 |
    /// | two_circles | disks of radius 1.2 at `(-0.6,-1.2)` and `(2.6,1.2)` (centers 4 apart, gap 1.6) |
    /// | two_ovals | ellipses semi-axes `(1.4,0.8)` at `(-1.2,0.4)` and `(2.6,2.4)`, rotated 20 deg |
    /// | box_with_hole | `[-2,4]^2` minus the disk of radius 1.5 at `(1,1)` |
    /// | circle_with_hole | annulus at `(0.2,1)` with radii 1.5 and 3.5 |
    ///
    /// Noise is Gaussian, truncated at four standard deviations, and
    /// re-drawn whenever it would land in a hole.
    pub fn new(shape: Shape, n_points: usize, seed: u64) -> DatasetSpec {
        use std::f64::consts::PI;
        let deg = PI / 180.0;
        let (regions, holes) = match shape {
            Shape::Box => (
                vec![Region::Rect {
                    lo: [-2.0, -2.0],
                    hi: [4.0, 4.0],
                }],
                vec![],
            ),
            Shape::Oval => (
                vec![Region::Ellipse {
                    center: [1.0, 1.0],
                    semi_axes: [3.0, 1.8],
                    angle: 30.0 * deg,
                }],
                vec![],
            ),
            Shape::Box2 => (
                vec![Region::Diamond {
                    center: [1.0, 1.0],
                    half_diagonal: 3.0,
                }],
                vec![],
            ),
            Shape::Banana => (
                vec![Region::Arc {
                    center: [0.5, 3.0],
                    radius: 4.0,
                    theta0: 200.0 * deg,
                    theta1: 340.0 * deg,
                    half_thickness: 0.7,
                }],
                vec![],
            ),
            Shape::TwoCircles => (
                vec![
                    Region::Ellipse {
                        center: [-0.6, -1.2],
                        semi_axes: [1.2, 1.2],
                        angle: 0.0,
                    },
                    Region::Ellipse {
                        center: [2.6, 1.2],
                        semi_axes: [1.2, 1.2],
                        angle: 0.0,
                    },
                ],
                vec![],
            ),
            Shape::TwoOvals => (
                vec![
                    Region::Ellipse {
                        center: [-1.2, 0.4],
                        semi_axes: [1.4, 0.8],
                        angle: 20.0 * deg,
                    },
                    Region::Ellipse {
                        center: [2.6, 2.4],
                        semi_axes: [1.4, 0.8],
                        angle: 20.0 * deg,
                    },
                ],
                vec![],
            ),
            Shape::BoxWithHole => (
                vec![Region::Rect {
                    lo: [-2.0, -2.0],
                    hi: [4.0, 4.0],
                }],
                vec![Hole {
                    center: [1.0, 1.0],
                    radius: 1.5,
                }],
            ),
            Shape::CircleWithHole => (
                vec![Region::Annulus {
                    center: [0.2, 1.0],
                    inner: 1.5,
                    outer: 3.5,
                }],
                vec![Hole {
                    center: [0.2, 1.0],
                    radius: 1.5,
                }],
            ),
        };
        DatasetSpec {
            shape,
            n_points,
            noise_sigma: DEFAULT_NOISE,
            seed,
            regions,
            holes,
        }
    }

    pub fn with_noise(mut self, sigma: f64) -> Self {
        self.noise_sigma = sigma;
        self
    }

    /// Union of the region bounding boxes (before noise).
    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        self.regions.iter().map(Region::bbox).fold(
            ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]),
            |(lo, hi), (l, h)| {
                (
                    [lo[0].min(l[0]), lo[1].min(l[1])],
                    [hi[0].max(h[0]), hi[1].max(h[1])],
                )
            },
        )
    }

    fn validate(&self) -> Result<()> {
        if self.n_points == 0 {
            return Err(Error::Config("n_points must be positive".into()));
        }
        if !(self.noise_sigma >= 0.0) {
            return Err(Error::Config("noise_sigma must be nonnegative".into()));
        }
        if self.regions.is_empty() {
            return Err(Error::Config("dataset needs at least one region".into()));
        }
        Ok(())
    }
}

/// Generates the point cloud described by `spec`; bitwise reproducible for a
/// fixed seed.
pub fn generate_dataset(spec: &DatasetSpec) -> Result<PointCloud> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut points = Vec::with_capacity(spec.n_points);

    if spec.shape == Shape::Box {
        if let Some(Region::Rect { lo, hi }) = spec.regions.first() {
            for c in [
                [lo[0], lo[1]],
                [hi[0], lo[1]],
                [hi[0], hi[1]],
                [lo[0], hi[1]],
            ] {
                if points.len() < spec.n_points {
                    points.push(perturb(c, spec, &mut rng));
                }
            }
        }
    }

    let mut attempts = 0usize;
    while points.len() < spec.n_points {
        attempts += 1;
        if attempts > 1000 * spec.n_points + 1000 {
            return Err(Error::Config(
                "exclusion regions reject every sample".into(),
            ));
        }
        let region = &spec.regions[rng.gen_range(0..spec.regions.len())];
        let base = region.sample(&mut rng);
        if spec.holes.iter().any(|h| h.contains(&base)) {
            continue;
        }
        points.push(perturb(base, spec, &mut rng));
    }
    let cloud = PointCloud::new(points)?;
    Ok(cloud)
}

fn perturb(base: [f64; 2], spec: &DatasetSpec, rng: &mut ChaCha8Rng) -> Vec<f64> {
    if spec.noise_sigma == 0.0 {
        return base.to_vec();
    }
    loop {
        let mut p = base.to_vec();
        for v in p.iter_mut() {
            let z: f64 = loop {
                let z: f64 = StandardNormal.sample(rng);
                if z.abs() <= 4.0 {
                    break z;
                }
            };
            *v += spec.noise_sigma * z;
        }
        if !spec.holes.iter().any(|h| h.contains(&p)) {
            return p;
        }
    }
}

/// Named numeric columns in file order.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn n_rows(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    /// Rows `[start, end)` of every column.
    pub fn slice_rows(&self, start: usize, end: usize) -> Table {
        Table {
            names: self.names.clone(),
            columns: self
                .columns
                .iter()
                .map(|c| c[start..end].to_vec())
                .collect(),
        }
    }
}

/// Reads the named columns of a comma-separated file with a header row.
/// Row numbers in errors count data rows from 1.
pub fn load_timeseries_csv(path: &Path, column_names: &[&str]) -> Result<Table> {
    let mut r = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    let idx: Vec<usize> = column_names
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| Error::MissingColumn(name.to_string()))
        })
        .collect::<Result<_>>()?;
    let mut columns = vec![Vec::new(); idx.len()];
    for (row, rec) in r.records().enumerate() {
        let rec = rec?;
        for (k, &c) in idx.iter().enumerate() {
            let cell = rec.get(c).unwrap_or("");
            columns[k].push(parse_cell(cell, row + 1, column_names[k])?);
        }
    }
    if columns[0].is_empty() {
        return Err(Error::EmptyFile(path.to_path_buf()));
    }
    Ok(Table {
        names: column_names.iter().map(|s| s.to_string()).collect(),
        columns,
    })
}

/// Writes a table as CSV with a header row.
pub fn write_table_csv(table: &Table, path: &Path) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "{}", table.names.join(","))?;
    for r in 0..table.n_rows() {
        let row: Vec<String> = table.columns.iter().map(|c| format!("{}", c[r])).collect();
        writeln!(f, "{}", row.join(","))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagSpec {
    pub base_signals: Vec<String>,
    pub lags: Vec<usize>,
}

impl LagSpec {
    pub fn new(base_signals: Vec<String>, lags: Vec<usize>) -> Result<LagSpec> {
        if lags.is_empty() || lags.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(
                "lags must be non-empty and strictly increasing".into(),
            ));
        }
        if base_signals.is_empty() {
            return Err(Error::Config("at least one base signal is required".into()));
        }
        Ok(LagSpec { base_signals, lags })
    }

    pub fn max_lag(&self) -> usize {
        *self.lags.last().unwrap_or(&0)
    }

    pub fn feature_dim(&self) -> usize {
        self.base_signals.len() * self.lags.len()
    }

    /// Feature names in output order, e.g. `x1[k-5]`.
    pub fn feature_names(&self) -> Vec<String> {
        self.base_signals
            .iter()
            .flat_map(|s| {
                self.lags.iter().map(move |&l| {
                    if l == 0 {
                        format!("{s}[k]")
                    } else {
                        format!("{s}[k-{l}]")
                    }
                })
            })
            .collect()
    }

    /// Position of `(signal, lag)` in the feature vector.
    pub fn feature_index(&self, signal: &str, lag: usize) -> Option<usize> {
        let s = self.base_signals.iter().position(|n| n == signal)?;
        let l = self.lags.iter().position(|&v| v == lag)?;
        Some(s * self.lags.len() + l)
    }
}

/// Row `k` of the output concatenates, signal by signal, the values at
/// `k - lag` for every lag. The first `max_lag` rows are dropped, so output
/// row `r` corresponds to table row `r + max_lag`.
pub fn build_lag_features(table: &Table, spec: &LagSpec) -> Result<PointCloud> {
    let n = table.n_rows();
    let max_lag = spec.max_lag();
    if n <= max_lag {
        return Err(Error::InsufficientRows {
            needed: max_lag,
            have: n,
        });
    }
    let cols: Vec<&[f64]> = spec
        .base_signals
        .iter()
        .map(|s| {
            table
                .column(s)
                .ok_or_else(|| Error::MissingColumn(s.clone()))
        })
        .collect::<Result<_>>()?;
    let points = (max_lag..n)
        .map(|k| {
            cols.iter()
                .flat_map(|c| spec.lags.iter().map(move |&l| c[k - l]))
                .collect()
        })
        .collect();
    PointCloud::new(points)
}
