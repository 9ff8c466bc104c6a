//! Bias-adjusted sum-of-squares spectral clustering.
//!
//! The layers are aggregated as `sum_l (A_l^2 - D_l)`, the leading
//! eigenvectors of that matrix embed the nodes, and k-means on the
//! embedding rows gives the labels.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::{symmetric_eigen, EigenPairs, Matrix};
use crate::model::{Adjacency, CommunityLabels, MultiLayerNetwork};
use crate::rng::{derive_seed, rng_from_seed, Rng};

pub const KMEANS_RESTARTS: usize = 10;
pub const KMEANS_MAX_ITER: usize = 100;

fn bitset_rows(adj: &Adjacency) -> (usize, Vec<u64>) {
    let n = adj.n();
    let words = n.div_ceil(64);
    let mut bits = vec![0u64; n * words];
    for i in 0..n {
        let row = &mut bits[i * words..(i + 1) * words];
        for j in adj.neighbors(i) {
            row[j / 64] |= 1 << (j % 64);
        }
    }
    (words, bits)
}

/// `sum_l (A_l^2 - D_l)` where `D_l` is the degree matrix of layer `l`.
///
/// Off-diagonal entry `(i, j)` counts common neighbours of `i` and `j`
/// summed over layers; the diagonal is exactly zero.
pub fn bias_adjusted_aggregate(net: &MultiLayerNetwork) -> Matrix {
    let n = net.n();
    let mut counts = vec![0u32; n * n];
    for adj in net.layers() {
        let (words, bits) = bitset_rows(adj);
        for i in 0..n {
            let ri = &bits[i * words..(i + 1) * words];
            for j in (i + 1)..n {
                let rj = &bits[j * words..(j + 1) * words];
                let common: u32 = ri.iter().zip(rj).map(|(a, b)| (a & b).count_ones()).sum();
                counts[i * n + j] += common;
            }
        }
    }
    let mut m = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let c = counts[i * n + j] as f64;
            m[(i, j)] = c;
            m[(j, i)] = c;
        }
    }
    m
}

/// The `k0` algebraically largest eigenpairs of a symmetric matrix.
pub fn top_eigenvectors(m: &Matrix, k0: usize) -> Result<EigenPairs> {
    if k0 > m.rows() {
        return Err(Error::InvalidArgument(format!(
            "K0 = {k0} exceeds matrix order {}",
            m.rows()
        )));
    }
    Ok(symmetric_eigen(m)?.truncated(k0))
}

/// Result of a k-means fit.
#[derive(Clone, Debug)]
pub struct KMeansFit {
    pub labels: CommunityLabels,
    /// Within-cluster sum of squared distances.
    pub objective: f64,
    /// Objective after each Lloyd update of the winning restart.
    pub history: Vec<f64>,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn nearest(point: &[f64], centers: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let d = sq_dist(point, centers.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn plus_plus_init(points: &Matrix, k: usize, rng: &mut Rng) -> Matrix {
    let n = points.rows();
    let mut centers = Matrix::zeros(k, points.cols());
    let first = rng.gen_range(0..n);
    centers.row_mut(0).copy_from_slice(points.row(first));
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(points.row(i), centers.row(0)))
        .collect();
    for c in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centers.row_mut(c).copy_from_slice(points.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(points.row(i), centers.row(c)));
        }
    }
    centers
}

fn lloyd(points: &Matrix, mut centers: Matrix, max_iter: usize) -> (Vec<usize>, f64, Vec<f64>) {
    let n = points.rows();
    let k = centers.rows();
    let dim = points.cols();
    let mut assign: Vec<usize> = (0..n).map(|i| nearest(points.row(i), &centers).0).collect();
    let mut history = Vec::new();
    let mut objective = f64::INFINITY;

    for _ in 0..max_iter {
        // Reseed empty clusters with the point farthest from its centroid,
        // as long as moving it actually lowers the objective.
        let mut sizes = vec![0usize; k];
        assign.iter().for_each(|&a| sizes[a] += 1);
        for empty in 0..k {
            if sizes[empty] != 0 {
                continue;
            }
            let far = (0..n)
                .filter(|&i| sizes[assign[i]] > 1)
                .map(|i| (i, sq_dist(points.row(i), centers.row(assign[i]))))
                .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                    Some((_, bd)) if bd >= d => best,
                    _ => Some((i, d)),
                });
            if let Some((i, d)) = far {
                if d > 0.0 {
                    sizes[assign[i]] -= 1;
                    sizes[empty] += 1;
                    assign[i] = empty;
                }
            }
        }

        let mut sums = Matrix::zeros(k, dim);
        for (i, &a) in assign.iter().enumerate() {
            for (s, x) in sums.row_mut(a).iter_mut().zip(points.row(i)) {
                *s += x;
            }
        }
        for (c, &size) in sizes.iter().enumerate() {
            if size > 0 {
                let inv = 1.0 / size as f64;
                for (dst, s) in centers.row_mut(c).iter_mut().zip(sums.row(c)) {
                    *dst = s * inv;
                }
            }
        }
        objective = (0..n)
            .map(|i| sq_dist(points.row(i), centers.row(assign[i])))
            .sum();
        history.push(objective);

        let next: Vec<usize> = (0..n).map(|i| nearest(points.row(i), &centers).0).collect();
        if next == assign {
            break;
        }
        assign = next;
    }
    (assign, objective, history)
}

/// Rename clusters in order of first appearance.
fn canonical(assign: &[usize], k: usize) -> Vec<usize> {
    let mut map = vec![usize::MAX; k];
    let mut next = 0;
    for &a in assign {
        if map[a] == usize::MAX {
            map[a] = next;
            next += 1;
        }
    }
    for m in map.iter_mut().filter(|m| **m == usize::MAX) {
        *m = next;
        next += 1;
    }
    assign.iter().map(|&a| map[a]).collect()
}

/// Lloyd's algorithm with k-means++ seeding and restarts; the restart with
/// the lowest objective wins (earliest on ties).
pub fn kmeans_fit(points: &Matrix, k0: usize, seed: u64) -> Result<KMeansFit> {
    let n = points.rows();
    if k0 == 0 {
        return Err(Error::InvalidArgument("K0 must be at least 1".into()));
    }
    if k0 > n {
        return Err(Error::InvalidArgument(format!("K0 = {k0} exceeds n = {n}")));
    }
    let mut best: Option<(Vec<usize>, f64, Vec<f64>)> = None;
    for restart in 0..KMEANS_RESTARTS {
        let mut rng = rng_from_seed(derive_seed(seed, restart as u64));
        let init = plus_plus_init(points, k0, &mut rng);
        let run = lloyd(points, init, KMEANS_MAX_ITER);
        if best.as_ref().is_none_or(|b| run.1 < b.1) {
            best = Some(run);
        }
    }
    let (assign, objective, history) = best.expect("at least one restart");
    Ok(KMeansFit {
        labels: CommunityLabels::new(canonical(&assign, k0), k0)?,
        objective,
        history,
    })
}

pub fn kmeans_rows(u: &Matrix, k0: usize, seed: u64) -> Result<CommunityLabels> {
    Ok(kmeans_fit(u, k0, seed)?.labels)
}

/// Leading eigenvectors of the bias-adjusted aggregate, computed once and
/// reused for every candidate `K0`.
#[derive(Clone, Debug)]
pub struct SpectralEmbedding {
    n: usize,
    pairs: EigenPairs,
}

impl SpectralEmbedding {
    /// Embedding with room for up to `max_k` clusters.
    pub fn compute(net: &MultiLayerNetwork, max_k: usize) -> Result<Self> {
        let n = net.n();
        if max_k > n {
            return Err(Error::InvalidArgument(format!(
                "K0 = {max_k} exceeds n = {n}"
            )));
        }
        let pairs = if max_k <= 1 {
            EigenPairs {
                values: Vec::new(),
                vectors: Matrix::zeros(n, 0),
            }
        } else {
            top_eigenvectors(&bias_adjusted_aggregate(net), max_k)?
        };
        Ok(Self { n, pairs })
    }

    pub fn max_k(&self) -> usize {
        self.pairs.len().max(1)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.pairs.values
    }

    pub fn detect(&self, k0: usize, seed: u64) -> Result<CommunityLabels> {
        if k0 == 0 || k0 > self.n {
            return Err(Error::InvalidArgument(format!(
                "K0 = {k0} must lie in 1..={}",
                self.n
            )));
        }
        if k0 == 1 {
            return Ok(CommunityLabels::uniform(self.n));
        }
        if k0 > self.pairs.len() {
            return Err(Error::InvalidArgument(format!(
                "embedding holds {} vectors, K0 = {k0} requested",
                self.pairs.len()
            )));
        }
        kmeans_rows(&self.pairs.truncated(k0).vectors, k0, seed)
    }
}

pub fn detect_communities(
    net: &MultiLayerNetwork,
    k0: usize,
    seed: u64,
) -> Result<CommunityLabels> {
    SpectralEmbedding::compute(net, k0)?.detect(k0, seed)
}
