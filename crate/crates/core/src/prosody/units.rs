//! Discrete pseudo-units: k-means over log-mel frames, nearest-centroid
//! labelling and run-length encoding into `[unit, duration]` pairs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ProsodyError;
use crate::matrix::Matrix;
use crate::signal::MelSpectrogram;

pub const DEFAULT_CODEBOOK_SIZE: usize = 100;
pub const KMEANS_MAX_ITERS: usize = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct Codebook {
    centroids: Matrix,
}

impl Codebook {
    pub fn new(centroids: Matrix) -> Result<Self, ProsodyError> {
        if centroids.rows() < 2 {
            return Err(ProsodyError::InsufficientData(
                "a codebook needs at least 2 centroids".into(),
            ));
        }
        if !centroids.is_finite() {
            return Err(ProsodyError::InvalidConfig("non-finite centroid".into()));
        }
        Ok(Self { centroids })
    }

    pub fn centroids(&self) -> &Matrix {
        &self.centroids
    }

    pub fn size(&self) -> usize {
        self.centroids.rows()
    }

    pub fn dim(&self) -> usize {
        self.centroids.cols()
    }

    /// Index of the closest centroid; ties go to the lowest index.
    pub fn nearest(&self, x: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (k, c) in self.centroids.iter_rows().enumerate() {
            let d = sq_dist(x, c);
            if d < best_d {
                best_d = d;
                best = k;
            }
        }
        best
    }
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn distinct_rows(points: &Matrix) -> usize {
    let mut rows: Vec<Vec<u64>> = points
        .iter_rows()
        .map(|r| r.iter().map(|v| v.to_bits()).collect())
        .collect();
    rows.sort_unstable();
    rows.dedup();
    rows.len()
}

/// k-means++ seeding followed by at most [`KMEANS_MAX_ITERS`] Lloyd
/// iterations. Deterministic for a given seed.
pub fn train_codebook(points: &Matrix, k: usize, seed: u64) -> Result<Codebook, ProsodyError> {
    let n = points.rows();
    if k < 2 {
        return Err(ProsodyError::InsufficientData(format!(
            "codebook size must be at least 2, got {k}"
        )));
    }
    if n < k {
        return Err(ProsodyError::InsufficientData(format!(
            "{n} frames cannot support {k} clusters"
        )));
    }
    let distinct = distinct_rows(points);
    if distinct < k {
        return Err(ProsodyError::InsufficientData(format!(
            "only {distinct} distinct frames for {k} clusters"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = points.cols();
    let mut chosen: Vec<usize> = vec![rng.random_range(0..n)];
    let mut nearest_d: Vec<f64> = points
        .iter_rows()
        .map(|p| sq_dist(p, points.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = nearest_d.iter().sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = None;
        for (i, &d) in nearest_d.iter().enumerate() {
            if d > 0.0 {
                pick = Some(i);
                if target < d {
                    break;
                }
                target -= d;
            }
        }
        // `distinct >= k` guarantees some point is still at positive distance.
        let pick = pick.expect("positive-distance point exists");
        chosen.push(pick);
        for (i, p) in points.iter_rows().enumerate() {
            nearest_d[i] = nearest_d[i].min(sq_dist(p, points.row(pick)));
        }
    }
    let mut centroids = Matrix::from_fn(k, dim, |c, j| points[(chosen[c], j)]);

    let mut assignment = vec![usize::MAX; n];
    for _ in 0..KMEANS_MAX_ITERS {
        let book = Codebook {
            centroids: centroids.clone(),
        };
        let mut changed = false;
        for (i, p) in points.iter_rows().enumerate() {
            let a = book.nearest(p);
            if assignment[i] != a {
                assignment[i] = a;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        let mut sums = Matrix::zeros(k, dim);
        let mut counts = vec![0usize; k];
        for (i, p) in points.iter_rows().enumerate() {
            let a = assignment[i];
            counts[a] += 1;
            for (s, v) in sums.row_mut(a).iter_mut().zip(p) {
                *s += v;
            }
        }
        for c in 0..k {
            // Empty clusters keep their previous centroid.
            if counts[c] > 0 {
                let inv = 1.0 / counts[c] as f64;
                for (dst, s) in centroids.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
    }
    Codebook::new(centroids)
}

/// Trains a unit codebook over the frames of several log-mel spectrograms.
pub fn train_unit_codebook(
    features: &[MelSpectrogram],
    k: usize,
    seed: u64,
) -> Result<Codebook, ProsodyError> {
    let dim = match features.first() {
        Some(f) => f.n_mels(),
        None => {
            return Err(ProsodyError::InsufficientData(
                "no feature matrices supplied".into(),
            ))
        }
    };
    let mut data = Vec::new();
    let mut rows = 0;
    for f in features {
        if f.n_mels() != dim {
            return Err(ProsodyError::DimMismatch {
                expected: dim,
                got: f.n_mels(),
            });
        }
        data.extend_from_slice(f.values.as_slice());
        rows += f.n_frames();
    }
    train_codebook(&Matrix::from_vec(rows, dim, data), k, seed)
}

/// Maximal run-length encoding of per-frame unit labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitSequence {
    pairs: Vec<(usize, usize)>,
}

impl UnitSequence {
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for &l in labels {
            match pairs.last_mut() {
                Some((id, dur)) if *id == l => *dur += 1,
                _ => pairs.push((l, 1)),
            }
        }
        Self { pairs }
    }

    /// Accepts arbitrary pairs, merging adjacent runs of the same unit and
    /// rejecting zero durations.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self, ProsodyError> {
        let mut out: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        for &(id, dur) in pairs {
            if dur == 0 {
                return Err(ProsodyError::InvalidTrack(format!(
                    "unit {id} has zero duration"
                )));
            }
            match out.last_mut() {
                Some((last, d)) if *last == id => *d += dur,
                _ => out.push((id, dur)),
            }
        }
        Ok(Self { pairs: out })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn total_frames(&self) -> usize {
        self.pairs.iter().map(|p| p.1).sum()
    }

    pub fn mean_duration(&self) -> Result<f64, ProsodyError> {
        if self.pairs.is_empty() {
            return Err(ProsodyError::EmptySequence);
        }
        Ok(self.total_frames() as f64 / self.pairs.len() as f64)
    }
}

pub fn unitize(feats: &MelSpectrogram, cb: &Codebook) -> Result<UnitSequence, ProsodyError> {
    if feats.n_mels() != cb.dim() {
        return Err(ProsodyError::DimMismatch {
            expected: cb.dim(),
            got: feats.n_mels(),
        });
    }
    let labels: Vec<usize> = feats.values.iter_rows().map(|r| cb.nearest(r)).collect();
    Ok(UnitSequence::from_labels(&labels))
}

/// Units per frame: the inverse of the mean unit duration.
pub fn speaking_rate(units: &UnitSequence) -> Result<f64, ProsodyError> {
    Ok(1.0 / units.mean_duration()?)
}
