use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::distance;
use crate::datasets::PointCloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Subsample {
    pub cloud: PointCloud,
    /// Indices into the original cloud, in selection order.
    pub indices: Vec<usize>,
    /// Largest distance from an original point to its nearest landmark.
    pub hausdorff: f64,
}

/// Greedy farthest-point (maxmin) landmark selection starting from a seeded
/// random point. Ties go to the lowest index.
pub fn maxmin_subsample(cloud: &PointCloud, m: usize, seed: u64) -> Result<Subsample> {
    let n = cloud.len();
    if m == 0 || m > n {
        return Err(Error::Config(format!(
            "subsample size {m} must be in 1..={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let start = rng.gen_range(0..n);
    let mut indices = Vec::with_capacity(m);
    let mut nearest = vec![f64::INFINITY; n];
    let mut current = start;
    loop {
        indices.push(current);
        let p = cloud.point(current);
        for (i, best) in nearest.iter_mut().enumerate() {
            let d = distance(p, cloud.point(i));
            if d < *best {
                *best = d;
            }
        }
        if indices.len() == m {
            break;
        }
        current = nearest
            .iter()
            .enumerate()
            .fold(
                (0, f64::NEG_INFINITY),
                |acc, (i, &d)| if d > acc.1 { (i, d) } else { acc },
            )
            .0;
    }
    let hausdorff = nearest.iter().cloned().fold(0.0, f64::max);
    Ok(Subsample {
        cloud: cloud.subset(&indices),
        indices,
        hausdorff,
    })
}
