//! Plug-in estimation of block connectivity and node-pair probabilities.

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::model::{CommunityLabels, MultiLayerNetwork};
use crate::spectral::{detect_communities, SpectralEmbedding};

/// Estimated `K0 x K0` connectivity per layer.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockEstimates {
    k0: usize,
    blocks: Vec<Matrix>,
}

impl BlockEstimates {
    pub fn k0(&self) -> usize {
        self.k0
    }

    pub fn block(&self, l: usize) -> &Matrix {
        &self.blocks[l]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }
}

/// Node-pair probabilities `P_l = Theta B_l Theta^T`, kept in factored form:
/// entry `(i, j)` of layer `l` is `B_l[labels_i][labels_j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbabilityMatrices {
    blocks: Vec<Matrix>,
    labels: CommunityLabels,
}

impl ProbabilityMatrices {
    pub fn from_blocks(blocks: Vec<Matrix>, labels: CommunityLabels) -> Result<Self> {
        let k = labels.k();
        if blocks.is_empty() {
            return Err(Error::InvalidArgument("no layers".into()));
        }
        if let Some(b) = blocks.iter().find(|b| b.rows() != k || b.cols() != k) {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} block matrix for {k} labels",
                b.rows(),
                b.cols()
            )));
        }
        Ok(Self { blocks, labels })
    }

    pub fn n(&self) -> usize {
        self.labels.n()
    }

    pub fn num_layers(&self) -> usize {
        self.blocks.len()
    }

    pub fn labels(&self) -> &CommunityLabels {
        &self.labels
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    #[inline]
    pub fn get(&self, layer: usize, i: usize, j: usize) -> f64 {
        self.blocks[layer][(self.labels.get(i), self.labels.get(j))]
    }

    pub fn dense_layer(&self, layer: usize) -> Matrix {
        let n = self.n();
        let mut out = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.get(layer, i, j);
            }
        }
        out
    }
}

pub fn estimate_connectivity(
    net: &MultiLayerNetwork,
    labels: &CommunityLabels,
) -> Result<BlockEstimates> {
    if labels.n() != net.n() {
        return Err(Error::LengthMismatch {
            left: labels.n(),
            right: net.n(),
        });
    }
    let k0 = labels.k();
    let sizes = labels.sizes();
    let lab = labels.as_slice();
    let blocks = net
        .layers()
        .iter()
        .map(|adj| {
            // Edge counts over unordered pairs, accumulated in the upper block triangle.
            let mut counts = vec![0u64; k0 * k0];
            for (i, &ki) in lab.iter().enumerate() {
                for j in adj.neighbors(i).filter(|&j| j > i) {
                    let kj = lab[j];
                    let (a, b) = if ki <= kj { (ki, kj) } else { (kj, ki) };
                    counts[a * k0 + b] += 1;
                }
            }
            let mut b = Matrix::zeros(k0, k0);
            for r in 0..k0 {
                for c in r..k0 {
                    let pairs = if r == c {
                        sizes[r] * sizes[r].saturating_sub(1) / 2
                    } else {
                        sizes[r] * sizes[c]
                    };
                    let est = if pairs == 0 {
                        0.0
                    } else {
                        counts[r * k0 + c] as f64 / pairs as f64
                    };
                    b[(r, c)] = est;
                    b[(c, r)] = est;
                }
            }
            b
        })
        .collect();
    Ok(BlockEstimates { k0, blocks })
}

pub fn expand_probabilities(
    est: &BlockEstimates,
    labels: &CommunityLabels,
) -> Result<ProbabilityMatrices> {
    if est.k0 != labels.k() {
        return Err(Error::DimensionMismatch(format!(
            "estimates for K0={} but labels use K0={}",
            est.k0,
            labels.k()
        )));
    }
    ProbabilityMatrices::from_blocks(est.blocks.clone(), labels.clone())
}

/// Detect communities with `k0` clusters, then fit the block model to them.
pub fn estimate_parameters(
    net: &MultiLayerNetwork,
    k0: usize,
    seed: u64,
) -> Result<(CommunityLabels, ProbabilityMatrices)> {
    let labels = detect_communities(net, k0, seed)?;
    fit_labels(net, labels)
}

/// Same as [`estimate_parameters`] but reusing a precomputed embedding.
pub fn estimate_parameters_with(
    net: &MultiLayerNetwork,
    embedding: &SpectralEmbedding,
    k0: usize,
    seed: u64,
) -> Result<(CommunityLabels, ProbabilityMatrices)> {
    let labels = embedding.detect(k0, seed)?;
    fit_labels(net, labels)
}

fn fit_labels(
    net: &MultiLayerNetwork,
    labels: CommunityLabels,
) -> Result<(CommunityLabels, ProbabilityMatrices)> {
    let est = estimate_connectivity(net, &labels)?;
    let probs = expand_probabilities(&est, &labels)?;
    Ok((labels, probs))
}
