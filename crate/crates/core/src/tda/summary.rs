use serde::{Deserialize, Serialize};

use super::PersistenceDiagram;

/// Ratio over the median H0 death that makes a feature significant.
pub const DEFAULT_PERSISTENCE_RATIO: f64 = 7.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    ConvexHull,
    OneClassSvm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologySummary {
    pub n_long_clusters: usize,
    pub n_long_holes: usize,
    /// Largest finite H0 death, a proxy for the widest gap between clusters.
    pub cluster_gap_scale: f64,
    pub hole_scales: Vec<(f64, f64)>,
    /// Reference scales the significance test compared against.
    pub h0_reference: f64,
    pub h1_reference: f64,
    pub threshold: f64,
    pub recommendation: Recommendation,
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let m = values.len() / 2;
    Some(if values.len() % 2 == 1 {
        values[m]
    } else {
        0.5 * (values[m - 1] + values[m])
    })
}

/// Counts long-lived clusters and holes.
///
/// Both tests are relative to the sampling scale, the median finite H0 death.
/// A finite H0 death is long when it is at least `threshold` times that
/// scale; the cluster count is one plus the number of long deaths. An H1
/// lifespan is long under the same rule. Essential H1 classes always count.
///
/// The median H1 lifespan is reported as `h1_reference` but not used: noise
/// cycles crowd the diagonal, so their median is small and the ratio test
/// against it flags noise.
pub fn summarize(diagram: &PersistenceDiagram, threshold: f64) -> TopologySummary {
    let mut deaths: Vec<f64> = diagram
        .dim_pairs(0)
        .filter(|p| p.is_finite())
        .map(|p| p.death)
        .collect();
    let cluster_gap_scale = deaths.iter().cloned().fold(0.0, f64::max);
    let mut h0_reference = median(&mut deaths).unwrap_or(0.0);
    if h0_reference <= 0.0 {
        let mut positive: Vec<f64> = deaths.iter().cloned().filter(|&d| d > 0.0).collect();
        h0_reference = median(&mut positive).unwrap_or(0.0);
    }
    let n_long_clusters = 1 + if h0_reference > 0.0 {
        deaths
            .iter()
            .filter(|&&d| d >= threshold * h0_reference)
            .count()
    } else {
        0
    };

    let mut lifespans: Vec<f64> = diagram
        .dim_pairs(1)
        .filter(|p| p.is_finite())
        .map(|p| p.lifespan())
        .collect();
    let h1_reference = median(&mut lifespans).unwrap_or(0.0);
    let hole_scales: Vec<(f64, f64)> = diagram
        .dim_pairs(1)
        .filter(|p| {
            !p.is_finite() || (h0_reference > 0.0 && p.lifespan() >= threshold * h0_reference)
        })
        .map(|p| (p.birth, p.death))
        .collect();
    let n_long_holes = hole_scales.len();
    let recommendation = if n_long_clusters > 1 || n_long_holes >= 1 {
        Recommendation::OneClassSvm
    } else {
        Recommendation::ConvexHull
    };
    TopologySummary {
        n_long_clusters,
        n_long_holes,
        cluster_gap_scale,
        hole_scales,
        h0_reference,
        h1_reference,
        threshold,
        recommendation,
    }
}
