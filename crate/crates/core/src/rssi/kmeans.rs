use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 100;

/// Lloyd's algorithm on scalar samples.
///
/// Seeding is farthest-point: one sample picked with `seed`, then repeatedly
/// the sample farthest from every chosen centroid. Iterates until the
/// assignment stops changing or [`MAX_ITERATIONS`] passes. Centroids come back
/// in decreasing order.
pub fn kmeans_1d(samples: &[f64], clusters: usize, seed: u64) -> Result<Vec<f64>> {
    if clusters == 0 {
        return Err(Error::Config("k-means needs at least one cluster".into()));
    }
    if let Some(bad) = samples.iter().find(|v| !v.is_finite()) {
        return Err(Error::Domain(format!("non-finite sample {bad}")));
    }
    let mut distinct = samples.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    if distinct.len() < clusters {
        return Err(Error::Degenerate(format!(
            "{} distinct samples cannot form {clusters} clusters",
            distinct.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = Vec::with_capacity(clusters);
    centroids.push(samples[rng.random_range(0..samples.len())]);
    while centroids.len() < clusters {
        let mut best = (f64::NEG_INFINITY, 0.0);
        for &v in samples {
            let d = centroids
                .iter()
                .map(|c: &f64| (v - c).abs())
                .fold(f64::INFINITY, f64::min);
            if d > best.0 {
                best = (d, v);
            }
        }
        centroids.push(best.1);
    }

    let mut assignment = vec![usize::MAX; samples.len()];
    for _ in 0..MAX_ITERATIONS {
        let mut changed = false;
        for (slot, &v) in assignment.iter_mut().zip(samples) {
            let nearest = nearest(&centroids, v);
            if *slot != nearest {
                *slot = nearest;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = vec![0.0; clusters];
        let mut counts = vec![0usize; clusters];
        for (&a, &v) in assignment.iter().zip(samples) {
            sums[a] += v;
            counts[a] += 1;
        }
        for ((c, s), n) in centroids.iter_mut().zip(sums).zip(counts) {
            // an emptied cluster keeps its previous centroid
            if n > 0 {
                *c = s / n as f64;
            }
        }
    }

    centroids.sort_by(|a, b| b.total_cmp(a));
    Ok(centroids)
}

fn nearest(centroids: &[f64], v: f64) -> usize {
    let mut best = (f64::INFINITY, 0);
    for (i, c) in centroids.iter().enumerate() {
        let d = (v - c).abs();
        if d < best.0 {
            best = (d, i);
        }
    }
    best.1
}
