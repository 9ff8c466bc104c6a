//! Normalized aggregation matrices and the cubic-trace statistic.

use crate::error::{Error, Result};
use crate::estimation::ProbabilityMatrices;
use crate::linalg::Matrix;
use crate::model::MultiLayerNetwork;

/// Clamp applied to plug-in probabilities inside the variance term.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Symmetric zero-diagonal aggregate `sum_l (A_l - P_l) / sqrt(n D)` together
/// with the per-pair variance mass `D_ij = sum_l P_l,ij (1 - P_l,ij)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregationMatrix {
    matrix: Matrix,
    variance_sums: Matrix,
}

impl AggregationMatrix {
    /// Wrap an arbitrary symmetric zero-diagonal matrix (variance sums unknown,
    /// stored as zeros).
    pub fn from_matrix(matrix: Matrix) -> Result<Self> {
        matrix.check_symmetric(0.0)?;
        if (0..matrix.rows()).any(|i| matrix[(i, i)] != 0.0) {
            return Err(Error::InvalidArgument("diagonal must be zero".into()));
        }
        let n = matrix.rows();
        Ok(Self {
            matrix,
            variance_sums: Matrix::zeros(n, n),
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn variance_sums(&self) -> &Matrix {
        &self.variance_sums
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct StatisticValue(pub f64);

impl StatisticValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_shapes(net: &MultiLayerNetwork, probs: &ProbabilityMatrices) -> Result<()> {
    if probs.n() != net.n() || probs.num_layers() != net.num_layers() {
        return Err(Error::DimensionMismatch(format!(
            "probabilities cover n={}, L={} but the network has n={}, L={}",
            probs.n(),
            probs.num_layers(),
            net.n(),
            net.num_layers()
        )));
    }
    Ok(())
}

/// Per block pair `(k, l)`: the numerator offset `sum_l P` and the variance mass.
fn block_terms(probs: &ProbabilityMatrices, floor: Option<f64>) -> (Vec<f64>, Vec<f64>) {
    let k = probs.labels().k();
    let mut mean = vec![0.0; k * k];
    let mut var = vec![0.0; k * k];
    for b in probs.blocks() {
        for r in 0..k {
            for c in 0..k {
                let p = b[(r, c)];
                let q = match floor {
                    Some(f) => p.clamp(f, 1.0 - f),
                    None => p,
                };
                mean[r * k + c] += p;
                var[r * k + c] += q * (1.0 - q);
            }
        }
    }
    (mean, var)
}

fn aggregate(
    net: &MultiLayerNetwork,
    probs: &ProbabilityMatrices,
    floor: Option<f64>,
) -> Result<AggregationMatrix> {
    check_shapes(net, probs)?;
    let n = net.n();
    let k = probs.labels().k();
    let labels = probs.labels().as_slice();
    let (mean, var) = block_terms(probs, floor);

    let mut edge_sums = vec![0u16; n * n];
    for adj in net.layers() {
        for i in 0..n {
            for (dst, &a) in edge_sums[i * n..(i + 1) * n].iter_mut().zip(adj.row(i)) {
                *dst += a as u16;
            }
        }
    }

    let nf = n as f64;
    let mut matrix = Matrix::zeros(n, n);
    let mut variance_sums = Matrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let idx = labels[i] * k + labels[j];
            let v = var[idx];
            if v <= 0.0 {
                return Err(Error::ZeroVariance(i + 1, j + 1));
            }
            let x = (edge_sums[i * n + j] as f64 - mean[idx]) / (nf * v).sqrt();
            matrix[(i, j)] = x;
            matrix[(j, i)] = x;
            variance_sums[(i, j)] = v;
            variance_sums[(j, i)] = v;
        }
    }
    Ok(AggregationMatrix {
        matrix,
        variance_sums,
    })
}

/// Aggregate centred at the true probabilities. Fails if any node pair has
/// zero variance mass.
pub fn ideal_aggregation(
    net: &MultiLayerNetwork,
    true_probs: &ProbabilityMatrices,
) -> Result<AggregationMatrix> {
    aggregate(net, true_probs, None)
}

/// Aggregate centred at plug-in estimates. Probabilities are clamped into
/// `[VARIANCE_FLOOR, 1 - VARIANCE_FLOOR]` in the variance term only.
pub fn normalized_aggregation(
    net: &MultiLayerNetwork,
    probs: &ProbabilityMatrices,
) -> Result<AggregationMatrix> {
    aggregate(net, probs, Some(VARIANCE_FLOOR))
}

/// `tr(M^3)` through the upper triangle of `M^2`.
pub fn trace_cubed(m: &Matrix) -> f64 {
    let n = m.rows();
    let mut total = 0.0;
    let mut row = vec![0.0; n];
    for i in 0..n {
        // row = (M^2)[i, i..]
        row[i..].iter_mut().for_each(|x| *x = 0.0);
        let mi = m.row(i);
        for (k, &a) in mi.iter().enumerate() {
            if a == 0.0 {
                continue;
            }
            let mk = &m.row(k)[i..];
            for (dst, &b) in row[i..].iter_mut().zip(mk) {
                *dst += a * b;
            }
        }
        let diag = row[i] * mi[i];
        let off: f64 = row[i + 1..]
            .iter()
            .zip(&mi[i + 1..])
            .map(|(x, y)| x * y)
            .sum();
        total += diag + 2.0 * off;
    }
    total
}

/// `T = tr(M^3) / sqrt(6)`.
pub fn trace_cubed_statistic(agg: &AggregationMatrix) -> StatisticValue {
    StatisticValue(trace_cubed(&agg.matrix) / 6f64.sqrt())
}

/// Brute-force `6 sum_{a<b<c} M_ab M_bc M_ca / sqrt(6)` with Kahan summation.
pub fn triple_product_trace(agg: &AggregationMatrix) -> StatisticValue {
    let m = &agg.matrix;
    let n = m.rows();
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for a in 0..n {
        for b in (a + 1)..n {
            let mab = m[(a, b)];
            if mab == 0.0 {
                continue;
            }
            for c in (b + 1)..n {
                let y = mab * m[(b, c)] * m[(c, a)] - comp;
                let t = sum + y;
                comp = (t - sum) - y;
                sum = t;
            }
        }
    }
    StatisticValue(6.0 * sum / 6f64.sqrt())
}
