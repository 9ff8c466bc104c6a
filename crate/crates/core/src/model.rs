//! Multi-layer networks, connectivity models, community labels and the
//! multi-layer SBM generator.

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, rng_from_seed, stream, Rng};

/// Symmetric binary adjacency matrix with a zero diagonal, stored densely.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Adjacency {
    n: usize,
    data: Vec<u8>,
}

impl Adjacency {
    pub fn empty(n: usize) -> Self {
        Self {
            n,
            data: vec![0; n * n],
        }
    }

    pub fn from_dense(n: usize, data: Vec<u8>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for {n} nodes",
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0 {
                return Err(Error::InvalidArgument(format!(
                    "self-loop at node {}",
                    i + 1
                )));
            }
            for j in (i + 1)..n {
                let a = data[i * n + j];
                if a > 1 {
                    return Err(Error::InvalidArgument(format!(
                        "entry {a} at ({}, {}) is not binary",
                        i + 1,
                        j + 1
                    )));
                }
                if a != data[j * n + i] {
                    return Err(Error::NotSymmetric(1.0));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = Self::empty(n);
        for &(i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!(
                    "edge ({i}, {j}) outside {n} nodes"
                )));
            }
            if i != j {
                adj.set(i, j, true);
            }
        }
        Ok(adj)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.get(i, j) != 0
    }

    /// Set or clear the undirected edge `{i, j}`. Self-loops are ignored.
    pub fn set(&mut self, i: usize, j: usize, present: bool) {
        if i == j {
            return;
        }
        let v = u8::from(present);
        self.data[i * self.n + j] = v;
        self.data[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[u8] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.row(i).iter().map(|&x| x as usize).sum()
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.row(i)
            .iter()
            .enumerate()
            .filter(|(_, &a)| a != 0)
            .map(|(j, _)| j)
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n)
            .map(|i| {
                self.row(i)[i + 1..]
                    .iter()
                    .map(|&x| x as usize)
                    .sum::<usize>()
            })
            .sum()
    }

    /// Upper-triangle edge list, 0-indexed.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.has_edge(i, j) {
                    out.push((i, j));
                }
            }
        }
        out
    }
}

/// `n` nodes observed across `L` layers sharing one node set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MultiLayerNetwork {
    n: usize,
    layers: Vec<Adjacency>,
}

impl MultiLayerNetwork {
    pub fn new(layers: Vec<Adjacency>) -> Result<Self> {
        let n = layers
            .first()
            .map(Adjacency::n)
            .ok_or_else(|| Error::InvalidArgument("a network needs at least one layer".into()))?;
        if n == 0 {
            return Err(Error::InvalidArgument(
                "a network needs at least one node".into(),
            ));
        }
        if let Some(bad) = layers.iter().find(|a| a.n() != n) {
            return Err(Error::DimensionMismatch(format!(
                "layer with {} nodes in a {n}-node network",
                bad.n()
            )));
        }
        Ok(Self { n, layers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn layer(&self, l: usize) -> &Adjacency {
        &self.layers[l]
    }

    pub fn layers(&self) -> &[Adjacency] {
        &self.layers
    }
}

/// Per-layer `K x K` block connectivity matrices.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityModel {
    k: usize,
    blocks: Vec<Matrix>,
    pub rho: Option<f64>,
    pub delta: Option<f64>,
}

impl ConnectivityModel {
    pub fn new(blocks: Vec<Matrix>) -> Result<Self> {
        let k = blocks
            .first()
            .map(Matrix::rows)
            .ok_or_else(|| Error::InvalidArgument("no layers in connectivity model".into()))?;
        if k == 0 {
            return Err(Error::InvalidArgument("K must be at least 1".into()));
        }
        for (l, b) in blocks.iter().enumerate() {
            if b.rows() != k || b.cols() != k {
                return Err(Error::DimensionMismatch(format!(
                    "layer {} block matrix is {}x{}, expected {k}x{k}",
                    l + 1,
                    b.rows(),
                    b.cols()
                )));
            }
            for r in 0..k {
                for c in 0..k {
                    let p = b[(r, c)];
                    if !(0.0..=1.0).contains(&p) {
                        return Err(Error::InvalidProbability {
                            value: p,
                            location: format!("layer {}, block ({}, {})", l + 1, r + 1, c + 1),
                        });
                    }
                    if p != b[(c, r)] {
                        return Err(Error::NotSymmetric((p - b[(c, r)]).abs()));
                    }
                }
            }
        }
        Ok(Self {
            k,
            blocks,
            rho: None,
            delta: None,
        })
    }

    /// Declare a margin; every entry must lie in `[delta, 1 - delta]`.
    pub fn with_delta(mut self, delta: f64) -> Result<Self> {
        for (l, b) in self.blocks.iter().enumerate() {
            if let Some(&p) = b.data().iter().find(|&&p| p < delta || p > 1.0 - delta) {
                return Err(Error::InvalidProbability {
                    value: p,
                    location: format!("layer {} (declared delta {delta})", l + 1),
                });
            }
        }
        self.delta = Some(delta);
        Ok(self)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_layers(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, l: usize) -> &Matrix {
        &self.blocks[l]
    }

    pub fn blocks(&self) -> &[Matrix] {
        &self.blocks
    }

    fn entries(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flat_map(|b| b.data().iter().copied())
    }
}

/// A community assignment, 0-indexed internally.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CommunityLabels {
    labels: Vec<usize>,
    k: usize,
}

impl CommunityLabels {
    /// Build from 0-indexed labels in `0..k`.
    pub fn new(labels: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument(
                "label space must be nonempty".into(),
            ));
        }
        if let Some(&bad) = labels.iter().find(|&&x| x >= k) {
            return Err(Error::LabelOutOfRange { label: bad + 1, k });
        }
        Ok(Self { labels, k })
    }

    /// Build from 1-indexed labels in `1..=k`.
    pub fn from_one_based(labels: &[usize], k: usize) -> Result<Self> {
        if let Some(&bad) = labels.iter().find(|&&x| x == 0 || x > k) {
            return Err(Error::LabelOutOfRange { label: bad, k });
        }
        Self::new(labels.iter().map(|&x| x - 1).collect(), k)
    }

    pub fn uniform(n: usize) -> Self {
        Self {
            labels: vec![0; n],
            k: 1,
        }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.labels
    }

    #[inline]
    pub fn get(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.labels.iter().map(|&x| x + 1).collect()
    }

    /// Community sizes `n_k`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &x in &self.labels {
            sizes[x] += 1;
        }
        sizes
    }

    /// Member lists `C_k`, each sorted ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.k];
        for (i, &x) in self.labels.iter().enumerate() {
            out[x].push(i);
        }
        out
    }

    /// Apply `perm` (old label to new label) to every node.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.k {
            return Err(Error::LengthMismatch {
                left: perm.len(),
                right: self.k,
            });
        }
        Self::new(self.labels.iter().map(|&x| perm[x]).collect(), self.k)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Recipe {
    /// Diagonal blocks Uniform(0.65, 0.75), off-diagonal Uniform(0.25, 0.35).
    Exp1,
    /// `rho * (0.3 + eps_l + 0.4 [k == l])`, one `eps_l ~ Uniform(-0.1, 0.1)` per layer.
    Exp2or3,
}

impl std::str::FromStr for Recipe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exp1" => Ok(Recipe::Exp1),
            "exp2or3" | "exp2" | "exp3" => Ok(Recipe::Exp2or3),
            other => Err(Error::InvalidArgument(format!("unknown recipe `{other}`"))),
        }
    }
}

impl std::fmt::Display for Recipe {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Recipe::Exp1 => "exp1",
            Recipe::Exp2or3 => "exp2or3",
        })
    }
}

pub fn make_experiment_connectivity(
    recipe: Recipe,
    k: usize,
    layers: usize,
    rho: f64,
    seed: u64,
) -> Result<ConnectivityModel> {
    if k == 0 || layers == 0 {
        return Err(Error::InvalidArgument("K and L must be at least 1".into()));
    }
    let mut rng = rng_from_seed(seed);
    match recipe {
        Recipe::Exp1 => {
            let blocks = (0..layers)
                .map(|_| {
                    let mut b = Matrix::zeros(k, k);
                    for r in 0..k {
                        for c in r..k {
                            let p = if r == c {
                                rng.gen_range(0.65..0.75)
                            } else {
                                rng.gen_range(0.25..0.35)
                            };
                            b[(r, c)] = p;
                            b[(c, r)] = p;
                        }
                    }
                    b
                })
                .collect();
            let mut model = ConnectivityModel::new(blocks)?;
            model.rho = Some(rho);
            Ok(model)
        }
        Recipe::Exp2or3 => {
            let offsets: Vec<f64> = (0..layers).map(|_| rng.gen_range(-0.1..0.1)).collect();
            exp2or3_connectivity(k, rho, &offsets)
        }
    }
}

/// The layer-offset recipe with explicit per-layer offsets `eps_l`.
pub fn exp2or3_connectivity(k: usize, rho: f64, offsets: &[f64]) -> Result<ConnectivityModel> {
    if k == 0 || offsets.is_empty() {
        return Err(Error::InvalidArgument("K and L must be at least 1".into()));
    }
    let blocks = offsets
        .iter()
        .map(|&eps| {
            let mut b = Matrix::zeros(k, k);
            for r in 0..k {
                for c in 0..k {
                    let assortative = if r == c { 0.4 } else { 0.0 };
                    b[(r, c)] = rho * (0.3 + eps + assortative);
                }
            }
            b
        })
        .collect();
    let mut model = ConnectivityModel::new(blocks)?;
    model.rho = Some(rho);
    Ok(model)
}

#[derive(Clone, Debug)]
pub enum Connectivity {
    Explicit(ConnectivityModel),
    Recipe { recipe: Recipe, rho: f64 },
}

#[derive(Clone, Debug)]
pub enum Membership {
    /// Each node joins each community with probability `1/K`.
    Random,
    Explicit(CommunityLabels),
}

#[derive(Clone, Debug)]
pub struct GeneratorConfig {
    pub n: usize,
    pub layers: usize,
    pub k: usize,
    pub connectivity: Connectivity,
    pub membership: Membership,
    pub seed: u64,
}

impl GeneratorConfig {
    pub fn recipe(n: usize, layers: usize, k: usize, recipe: Recipe, rho: f64, seed: u64) -> Self {
        Self {
            n,
            layers,
            k,
            connectivity: Connectivity::Recipe { recipe, rho },
            membership: Membership::Random,
            seed,
        }
    }

    pub fn explicit(n: usize, model: ConnectivityModel, seed: u64) -> Self {
        Self {
            n,
            layers: model.num_layers(),
            k: model.k(),
            connectivity: Connectivity::Explicit(model),
            membership: Membership::Random,
            seed,
        }
    }

    /// Resolve the connectivity, drawing it from the config seed for recipes.
    pub fn connectivity_model(&self) -> Result<ConnectivityModel> {
        match &self.connectivity {
            Connectivity::Explicit(m) => Ok(m.clone()),
            Connectivity::Recipe { recipe, rho } => make_experiment_connectivity(
                *recipe,
                self.k,
                self.layers,
                *rho,
                derive_seed(self.seed, stream::CONNECTIVITY),
            ),
        }
    }
}

/// A sampled network together with the model it was drawn from.
#[derive(Clone, Debug)]
pub struct PlantedNetwork {
    pub network: MultiLayerNetwork,
    pub labels: CommunityLabels,
    pub model: ConnectivityModel,
}

pub fn generate_msbm(config: &GeneratorConfig) -> Result<(MultiLayerNetwork, CommunityLabels)> {
    let planted = generate_planted(config)?;
    Ok((planted.network, planted.labels))
}

pub fn generate_planted(config: &GeneratorConfig) -> Result<PlantedNetwork> {
    if config.n == 0 || config.layers == 0 || config.k == 0 {
        return Err(Error::InvalidArgument(
            "n, L and K must be at least 1".into(),
        ));
    }
    if config.k > config.n {
        return Err(Error::InvalidArgument(format!(
            "K = {} exceeds n = {}",
            config.k, config.n
        )));
    }
    let model = config.connectivity_model()?;
    if model.k() != config.k || model.num_layers() != config.layers {
        return Err(Error::DimensionMismatch(format!(
            "connectivity is K={}, L={} but config asks for K={}, L={}",
            model.k(),
            model.num_layers(),
            config.k,
            config.layers
        )));
    }
    let labels = match &config.membership {
        Membership::Explicit(labels) => {
            if labels.n() != config.n || labels.k() != config.k {
                return Err(Error::DimensionMismatch(format!(
                    "explicit labels cover n={}, K={}",
                    labels.n(),
                    labels.k()
                )));
            }
            labels.clone()
        }
        Membership::Random => {
            let mut rng = rng_from_seed(derive_seed(config.seed, stream::MEMBERSHIP));
            let raw = (0..config.n).map(|_| rng.gen_range(0..config.k)).collect();
            CommunityLabels::new(raw, config.k)?
        }
    };
    let layers = model
        .blocks()
        .iter()
        .enumerate()
        .map(|(l, b)| {
            let seed = derive_seed(derive_seed(config.seed, stream::EDGES), l as u64);
            sample_layer(b, &labels, &mut rng_from_seed(seed))
        })
        .collect();
    let network = MultiLayerNetwork::new(layers)?;
    Ok(PlantedNetwork {
        network,
        labels,
        model,
    })
}

fn sample_layer(block: &Matrix, labels: &CommunityLabels, rng: &mut Rng) -> Adjacency {
    let n = labels.n();
    let mut adj = Adjacency::empty(n);
    for i in 0..n {
        let ki = labels.get(i);
        for j in (i + 1)..n {
            let p = block[(ki, labels.get(j))];
            // gen::<f64>() is in [0, 1), so p = 0 never fires and p = 1 always does.
            if rng.gen::<f64>() < p {
                adj.set(i, j, true);
            }
        }
    }
    adj
}

/// Ground-truth probability `P_l[i][j] = B_l[theta_i][theta_j]` for the model.
pub fn true_probabilities(
    model: &ConnectivityModel,
    labels: &CommunityLabels,
) -> Result<crate::estimation::ProbabilityMatrices> {
    crate::estimation::ProbabilityMatrices::from_blocks(model.blocks().to_vec(), labels.clone())
}

#[derive(Clone, Debug, PartialEq)]
pub struct MisclusterReport {
    /// Minimum number of disagreeing nodes over relabelings of `a`.
    pub m: usize,
    /// `permutation[x] = Some(y)` maps label `x` of `a` onto label `y` of `b`.
    pub permutation: Vec<Option<usize>>,
}

const EXACT_SEARCH_MAX_K: usize = 8;

pub fn misclustering_error(a: &CommunityLabels, b: &CommunityLabels) -> Result<MisclusterReport> {
    if a.n() != b.n() {
        return Err(Error::LengthMismatch {
            left: a.n(),
            right: b.n(),
        });
    }
    let mut agree = vec![vec![0usize; b.k()]; a.k()];
    for (&x, &y) in a.as_slice().iter().zip(b.as_slice()) {
        agree[x][y] += 1;
    }
    let permutation = if a.k() == b.k() && a.k() <= EXACT_SEARCH_MAX_K {
        best_permutation_exact(&agree)
    } else {
        best_assignment(&agree)
    };
    let matched: usize = permutation
        .iter()
        .enumerate()
        .filter_map(|(x, y)| y.map(|y| agree[x][y]))
        .sum();
    Ok(MisclusterReport {
        m: a.n() - matched,
        permutation,
    })
}

fn best_permutation_exact(agree: &[Vec<usize>]) -> Vec<Option<usize>> {
    fn search(
        agree: &[Vec<usize>],
        row: usize,
        used: &mut [bool],
        current: &mut Vec<usize>,
        score: usize,
        best: &mut (usize, Vec<usize>),
    ) {
        if row == agree.len() {
            if score > best.0 || best.1.is_empty() {
                *best = (score, current.clone());
            }
            return;
        }
        for col in 0..used.len() {
            if !used[col] {
                used[col] = true;
                current.push(col);
                search(agree, row + 1, used, current, score + agree[row][col], best);
                current.pop();
                used[col] = false;
            }
        }
    }
    let k = agree.len();
    let mut best = (0, Vec::new());
    search(agree, 0, &mut vec![false; k], &mut Vec::new(), 0, &mut best);
    best.1.into_iter().map(Some).collect()
}

/// Maximum-agreement matching via the Hungarian algorithm on the
/// zero-padded square cost matrix.
fn best_assignment(agree: &[Vec<usize>]) -> Vec<Option<usize>> {
    let rows = agree.len();
    let cols = agree.first().map_or(0, Vec::len);
    let size = rows.max(cols);
    let max = agree.iter().flatten().copied().max().unwrap_or(0) as i64;
    let cost = |r: usize, c: usize| -> i64 {
        if r < rows && c < cols {
            max - agree[r][c] as i64
        } else {
            max
        }
    };

    // 1-indexed potentials formulation.
    let inf = i64::MAX / 4;
    let mut u = vec![0i64; size + 1];
    let mut v = vec![0i64; size + 1];
    let mut p = vec![0usize; size + 1];
    let mut way = vec![0usize; size + 1];
    for i in 1..=size {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; size + 1];
        let mut used = vec![false; size + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=size {
                if !used[j] {
                    let cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=size {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![None; rows];
    for (j, &pj) in p.iter().enumerate().skip(1) {
        let r = pj - 1;
        if r < rows && j - 1 < cols {
            out[r] = Some(j - 1);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct AssumptionReport {
    /// `min(min entry, 1 - max entry)` over all layers and blocks.
    pub delta: f64,
    /// `min_k n_k / (n / K)`.
    pub balance_ratio: f64,
    pub warnings: Vec<String>,
}

pub fn check_assumptions(model: &ConnectivityModel, labels: &CommunityLabels) -> AssumptionReport {
    let (lo, hi) = model
        .entries()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
            (lo.min(p), hi.max(p))
        });
    let delta = lo.min(1.0 - hi);
    let mut warnings = Vec::new();
    if delta <= 0.0 {
        warnings.push(format!(
            "connectivity entries reach the boundary (min {lo}, max {hi}); edge variances vanish"
        ));
    }
    if let Some(declared) = model.delta {
        if delta < declared {
            warnings.push(format!(
                "achievable delta {delta} is below declared {declared}"
            ));
        }
    }
    let sizes = labels.sizes();
    let n = labels.n() as f64;
    let expected = n / labels.k() as f64;
    let smallest = sizes.iter().copied().min().unwrap_or(0) as f64;
    let balance_ratio = if expected > 0.0 {
        smallest / expected
    } else {
        0.0
    };
    if sizes.contains(&0) {
        warnings.push("at least one community is empty".into());
    }
    if labels.k() != model.k() {
        warnings.push(format!(
            "labels use K={} but the model has K={}",
            labels.k(),
            model.k()
        ));
    }
    AssumptionReport {
        delta,
        balance_ratio,
        warnings,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn labels(xs: &[usize], k: usize) -> CommunityLabels {
        CommunityLabels::from_one_based(xs, k).unwrap()
    }

    fn single_block(p: f64, layers: usize) -> ConnectivityModel {
        ConnectivityModel::new(vec![Matrix::from_vec(1, 1, vec![p]).unwrap(); layers]).unwrap()
    }

    #[test]
    fn probability_one_gives_complete_graph() {
        let cfg = GeneratorConfig::explicit(3, single_block(1.0, 1), 9);
        let (net, lab) = generate_msbm(&cfg).unwrap();
        assert_eq!(net.layer(0).edge_count(), 3);
        assert_eq!(lab.to_one_based(), vec![1, 1, 1]);
    }

    #[test]
    fn probability_zero_gives_empty_graphs() {
        let cfg = GeneratorConfig::explicit(5, single_block(0.0, 2), 9);
        let (net, _) = generate_msbm(&cfg).unwrap();
        assert_eq!(net.num_layers(), 2);
        assert!(net.layers().iter().all(|a| a.edge_count() == 0));
    }

    #[test]
    fn generated_layers_satisfy_invariants_and_are_reproducible() {
        let cfg = GeneratorConfig::recipe(60, 3, 3, Recipe::Exp1, 1.0, 5);
        let (a, la) = generate_msbm(&cfg).unwrap();
        let (b, lb) = generate_msbm(&cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        for layer in a.layers() {
            let n = layer.n();
            let dense: Vec<u8> = (0..n).flat_map(|i| layer.row(i).to_vec()).collect();
            assert!(Adjacency::from_dense(n, dense).is_ok());
        }
        let other = GeneratorConfig { seed: 6, ..cfg };
        assert_ne!(generate_msbm(&other).unwrap().0, a);
    }

    #[test]
    fn within_community_frequency_matches_block_probability() {
        let b = Matrix::from_rows(&[vec![0.7, 0.3], vec![0.3, 0.7]]).unwrap();
        let model = ConnectivityModel::new(vec![b]).unwrap();
        let (mut hits, mut pairs) = (0usize, 0usize);
        for rep in 0..200 {
            let cfg = GeneratorConfig::explicit(200, model.clone(), rep);
            let (net, lab) = generate_msbm(&cfg).unwrap();
            let adj = net.layer(0);
            for i in 0..200 {
                for j in (i + 1)..200 {
                    if lab.get(i) == lab.get(j) {
                        pairs += 1;
                        hits += adj.get(i, j) as usize;
                    }
                }
            }
        }
        let freq = hits as f64 / pairs as f64;
        let se = (0.7 * 0.3 / pairs as f64).sqrt();
        assert!((freq - 0.7).abs() <= 3.0 * se, "freq {freq}, se {se}");
    }

    #[test]
    fn dimension_errors() {
        let model = single_block(0.5, 2);
        let cfg = GeneratorConfig {
            layers: 3,
            ..GeneratorConfig::explicit(10, model, 1)
        };
        assert!(matches!(
            generate_msbm(&cfg),
            Err(Error::DimensionMismatch(_))
        ));
        let bad = ConnectivityModel::new(vec![Matrix::from_vec(1, 1, vec![1.5]).unwrap()]);
        assert!(matches!(bad, Err(Error::InvalidProbability { .. })));
    }

    #[test]
    fn exp2or3_with_zero_offset() {
        let m = exp2or3_connectivity(3, 0.5, &[0.0]).unwrap();
        let b = m.block(0);
        assert!((b[(0, 0)] - 0.35).abs() < 1e-15);
        assert!((b[(0, 1)] - 0.15).abs() < 1e-15);
    }

    #[test]
    fn exp1_ranges() {
        let m = make_experiment_connectivity(Recipe::Exp1, 2, 5, 1.0, 3).unwrap();
        for b in m.blocks() {
            for r in 0..2 {
                for c in 0..2 {
                    let range = if r == c { 0.65..=0.75 } else { 0.25..=0.35 };
                    assert!(range.contains(&b[(r, c)]));
                }
            }
        }
        let report = check_assumptions(&m, &CommunityLabels::uniform(4));
        assert!(report.delta >= 0.25);
    }

    #[test]
    fn exp2or3_sparse_range() {
        let m = make_experiment_connectivity(Recipe::Exp2or3, 5, 10, 0.01, 11).unwrap();
        for b in m.blocks() {
            assert!(b.data().iter().all(|&p| (0.002..=0.008).contains(&p)));
        }
        // one offset per layer: all off-diagonal entries in a layer agree
        let b = m.block(0);
        assert_eq!(b[(0, 1)], b[(3, 4)]);
        assert!((b[(0, 0)] - b[(0, 1)] - 0.004).abs() < 1e-15);
    }

    #[test]
    fn misclustering_examples() {
        let a = labels(&[1, 1, 2, 2], 2);
        assert_eq!(misclustering_error(&a, &a).unwrap().m, 0);
        let b = labels(&[2, 2, 1, 1], 2);
        let r = misclustering_error(&a, &b).unwrap();
        assert_eq!(r.m, 0);
        assert_eq!(r.permutation, vec![Some(1), Some(0)]);
        let a = labels(&[1, 1, 2, 2, 3], 3);
        let b = labels(&[1, 2, 2, 3, 3], 3);
        assert_eq!(misclustering_error(&a, &b).unwrap().m, 2);
        let short = labels(&[1], 3);
        assert!(misclustering_error(&a, &short).is_err());
    }

    #[test]
    fn misclustering_unequal_k() {
        let a = labels(&[1, 1, 2, 2, 3, 3], 3);
        let b = labels(&[1, 1, 2, 2, 2, 2], 2);
        let r = misclustering_error(&a, &b).unwrap();
        assert_eq!(r.m, 2);
        assert_eq!(r.permutation.iter().filter(|p| p.is_none()).count(), 1);
    }

    #[test]
    fn assumption_diagnostics() {
        let b = Matrix::from_rows(&[vec![0.75, 0.25], vec![0.25, 0.5]]).unwrap();
        let model = ConnectivityModel::new(vec![b]).unwrap();
        let lab = labels(&[1, 2, 1, 2], 2);
        let r = check_assumptions(&model, &lab);
        assert_eq!(r.delta, 0.25);
        assert_eq!(r.balance_ratio, 1.0);
        assert!(r.warnings.is_empty());

        let b = Matrix::from_rows(&[vec![0.0, 0.5], vec![0.5, 0.5]]).unwrap();
        let model = ConnectivityModel::new(vec![b]).unwrap();
        let r = check_assumptions(&model, &lab);
        assert_eq!(r.delta, 0.0);
        assert!(!r.warnings.is_empty());
    }

    fn brute_force_m(a: &[usize], b: &[usize], k: usize) -> usize {
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for p in perms(k - 1) {
                for pos in 0..=p.len() {
                    let mut q = p.clone();
                    q.insert(pos, k - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(k)
            .iter()
            .map(|p| a.iter().zip(b).filter(|(x, y)| p[**x] != **y).count())
            .min()
            .unwrap()
    }

    proptest! {
        #[test]
        fn misclustering_matches_brute_force_and_is_relabel_invariant(
            k in 1usize..5,
            raw in proptest::collection::vec((0usize..4, 0usize..4), 1..30),
            shift in 0usize..4,
        ) {
            let a: Vec<usize> = raw.iter().map(|(x, _)| x % k).collect();
            let b: Vec<usize> = raw.iter().map(|(_, y)| y % k).collect();
            let la = CommunityLabels::new(a.clone(), k).unwrap();
            let lb = CommunityLabels::new(b.clone(), k).unwrap();
            let m = misclustering_error(&la, &lb).unwrap().m;
            prop_assert_eq!(m, brute_force_m(&a, &b, k));
            let perm: Vec<usize> = (0..k).map(|x| (x + shift) % k).collect();
            let ra = la.relabeled(&perm).unwrap();
            prop_assert_eq!(misclustering_error(&ra, &lb).unwrap().m, m);
            // the matching route agrees with the exhaustive one
            let mut agree = vec![vec![0usize; k]; k];
            for (&x, &y) in a.iter().zip(&b) { agree[x][y] += 1; }
            let hung: usize = best_assignment(&agree).iter().enumerate()
                .filter_map(|(x, y)| y.map(|y| agree[x][y])).sum();
            prop_assert_eq!(a.len() - hung, m);
        }
    }
}
