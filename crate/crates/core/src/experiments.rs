//! Monte Carlo harness for the simulation studies.
//!
//! Every run produces long-format records (one per cell and replicate) and
//! a summary that is computed from those records alone. Each replicate owns
//! a seed derived from the base seed, the cell identity and the replicate
//! index, so serial and parallel runs give identical output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{generate_msbm, GeneratorConfig, MultiLayerNetwork, Recipe};
use crate::rng::{derive_seed, stream};
use crate::sequential::{critical_value, default_k_max, nast, statistic_profile, test_at_k0};
use crate::stats;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExperimentKind {
    /// Null distribution of `T` at `K0 = K`.
    Normality,
    /// Rejection rates at `K = K0` (size) and `K = K0 + 1` (power).
    SizePower,
    /// Proportion of sequential-test estimates equal to the true `K`.
    Accuracy,
    /// Mean `T` over a grid of candidate `K0` for each true `K`.
    TProfile,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Normality => "normality",
            ExperimentKind::SizePower => "size_power",
            ExperimentKind::Accuracy => "accuracy",
            ExperimentKind::TProfile => "t_profile",
        }
    }

    pub fn default_recipe(self) -> Recipe {
        match self {
            ExperimentKind::Normality => Recipe::Exp1,
            _ => Recipe::Exp2or3,
        }
    }
}

impl std::str::FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normality" => Ok(ExperimentKind::Normality),
            "size_power" | "size-power" => Ok(ExperimentKind::SizePower),
            "accuracy" => Ok(ExperimentKind::Accuracy),
            "t_profile" | "t-profile" => Ok(ExperimentKind::TProfile),
            other => Err(Error::InvalidArgument(format!(
                "unknown experiment `{other}`"
            ))),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub ns: Vec<usize>,
    pub layers: usize,
    /// True `K` values; for size/power these are the tested `K0`.
    pub ks: Vec<usize>,
    pub rhos: Vec<f64>,
    pub recipe: Recipe,
    pub replicates: usize,
    pub alpha: f64,
    pub seed: u64,
    /// Sequential-test bound; `ceil(sqrt(n))` when `None`.
    pub k_max: Option<usize>,
    /// Largest `K0` in the statistic profile.
    pub profile_k0_max: usize,
    pub parallel: bool,
}

impl ExperimentConfig {
    /// Desk-scale defaults: `n = 400`, `L = 5`, 100 replicates.
    pub fn desk(kind: ExperimentKind) -> Self {
        let (ks, rhos) = match kind {
            ExperimentKind::Normality => (vec![2, 3, 4], vec![1.0]),
            ExperimentKind::SizePower => (vec![1, 2, 3, 4, 5], vec![0.5]),
            ExperimentKind::Accuracy => (vec![1, 2, 3, 4, 5], vec![0.01, 0.05, 0.1, 0.2, 0.3]),
            ExperimentKind::TProfile => (vec![1, 2, 3, 4, 5], vec![0.1]),
        };
        Self {
            kind,
            ns: vec![400],
            layers: 5,
            ks,
            rhos,
            recipe: kind.default_recipe(),
            replicates: 100,
            alpha: 0.05,
            seed: 0,
            k_max: None,
            profile_k0_max: 10,
            parallel: true,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::InvalidArgument(
                "replicates must be at least 1".into(),
            ));
        }
        if self.ns.is_empty() || self.ks.is_empty() || self.rhos.is_empty() {
            return Err(Error::InvalidArgument(
                "n, K and rho lists must be nonempty".into(),
            ));
        }
        if self.layers == 0 || self.ks.contains(&0) || self.ns.contains(&0) {
            return Err(Error::InvalidArgument(
                "n, L and K must be at least 1".into(),
            ));
        }
        critical_value(self.alpha)?;
        Ok(())
    }
}

/// One long-format row.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub experiment: &'static str,
    pub cell_id: String,
    pub k: usize,
    pub n: usize,
    pub layers: usize,
    pub rho: f64,
    pub k0: usize,
    pub replicate: usize,
    pub quantity: &'static str,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SummaryRow {
    pub cell_id: String,
    pub k: usize,
    pub n: usize,
    pub layers: usize,
    pub rho: f64,
    pub k0: usize,
    pub statistic: &'static str,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub alpha: f64,
    pub records: Vec<Record>,
    pub summary: Vec<SummaryRow>,
}

impl ExperimentReport {
    pub fn summary_value(&self, cell_id: &str, statistic: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.cell_id == cell_id && r.statistic == statistic)
            .map(|r| r.value)
    }

    /// Samples of one cell in replicate order.
    pub fn cell_values(&self, cell_id: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.cell_id == cell_id)
            .map(|r| r.value)
            .collect()
    }

    pub fn write_records_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"experiment,cell_id,K,n,L,rho,K0,replicate,quantity,value\n")?;
        for r in &self.records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.experiment,
                r.cell_id,
                r.k,
                r.n,
                r.layers,
                fmt_float(r.rho),
                r.k0,
                r.replicate,
                r.quantity,
                fmt_float(r.value)
            )?;
        }
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(b"experiment,cell_id,K,n,L,rho,K0,statistic,value\n")?;
        for r in &self.summary {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.kind.name(),
                r.cell_id,
                r.k,
                r.n,
                r.layers,
                fmt_float(r.rho),
                r.k0,
                r.statistic,
                fmt_float(r.value)
            )?;
        }
        Ok(())
    }
}

/// 17 significant digits, scientific notation.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".to_string()
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Clone, Debug)]
struct Cell {
    id: String,
    k: usize,
    n: usize,
    rho: f64,
    /// Candidate count under test; 0 where the cell spans several.
    k0: usize,
}

impl Cell {
    fn network_seed(&self, base: u64, replicate: usize) -> u64 {
        let cell = derive_seed(
            derive_seed(derive_seed(base, self.k as u64), self.n as u64),
            self.rho.to_bits(),
        );
        derive_seed(cell, replicate as u64)
    }
}

fn fmt_rho(rho: f64) -> String {
    let mut s = String::new();
    let _ = write!(s, "{rho}");
    s
}

struct Sample {
    network: MultiLayerNetwork,
    detection_seed: u64,
}

fn sample(cfg: &ExperimentConfig, cell: &Cell, replicate: usize) -> Result<Sample> {
    let seed = cell.network_seed(cfg.seed, replicate);
    let gen = GeneratorConfig::recipe(cell.n, cfg.layers, cell.k, cfg.recipe, cell.rho, seed);
    let (network, _) = generate_msbm(&gen)?;
    Ok(Sample {
        network,
        detection_seed: derive_seed(seed, stream::DETECTION),
    })
}

fn run_cells<F>(cfg: &ExperimentConfig, cells: &[Cell], job: F) -> Result<Vec<Record>>
where
    F: Fn(&Cell, usize) -> Result<Vec<Record>> + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..cells.len())
        .flat_map(|c| (0..cfg.replicates).map(move |r| (c, r)))
        .collect();
    let batches: Vec<Vec<Record>> = if cfg.parallel {
        jobs.par_iter()
            .map(|&(c, r)| job(&cells[c], r))
            .collect::<Result<_>>()?
    } else {
        jobs.iter()
            .map(|&(c, r)| job(&cells[c], r))
            .collect::<Result<_>>()?
    };
    Ok(batches.into_iter().flatten().collect())
}

fn record(
    cfg: &ExperimentConfig,
    cell: &Cell,
    k0: usize,
    replicate: usize,
    quantity: &'static str,
    value: f64,
) -> Record {
    Record {
        experiment: cfg.kind.name(),
        cell_id: cell.id.clone(),
        k: cell.k,
        n: cell.n,
        layers: cfg.layers,
        rho: cell.rho,
        k0,
        replicate,
        quantity,
        value,
    }
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    match cfg.kind {
        ExperimentKind::Normality => run_normality(cfg),
        ExperimentKind::SizePower => run_size_power(cfg),
        ExperimentKind::Accuracy => run_accuracy(cfg),
        ExperimentKind::TProfile => run_t_profile(cfg),
    }
}

fn finish(cfg: &ExperimentConfig, records: Vec<Record>) -> Result<ExperimentReport> {
    let summary = summarize(cfg.kind, cfg.alpha, &records)?;
    Ok(ExperimentReport {
        kind: cfg.kind,
        alpha: cfg.alpha,
        records,
        summary,
    })
}

/// `T` at `K0 = K` for every `(K, n, rho)` cell.
pub fn run_normality(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let cells: Vec<Cell> = cfg
        .ks
        .iter()
        .flat_map(|&k| {
            cfg.ns.iter().flat_map(move |&n| {
                cfg.rhos.iter().map(move |&rho| Cell {
                    id: format!("K{k}-n{n}-rho{}", fmt_rho(rho)),
                    k,
                    n,
                    rho,
                    k0: k,
                })
            })
        })
        .collect();
    let records = run_cells(cfg, &cells, |cell, rep| {
        let s = sample(cfg, cell, rep)?;
        let out = test_at_k0(&s.network, cell.k, cfg.alpha, s.detection_seed)?;
        Ok(vec![record(cfg, cell, cell.k, rep, "T", out.t)])
    })?;
    finish(cfg, records)
}

/// Size cells test `K0` on `K = K0` networks, power cells on `K = K0 + 1`.
pub fn run_size_power(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &k0 in &cfg.ks {
        for &n in &cfg.ns {
            for &rho in &cfg.rhos {
                for (tag, k) in [("size", k0), ("power", k0 + 1)] {
                    cells.push(Cell {
                        id: format!("{tag}-K0{k0}-n{n}-rho{}", fmt_rho(rho)),
                        k,
                        n,
                        rho,
                        k0,
                    });
                }
            }
        }
    }
    let records = run_cells(cfg, &cells, |cell, rep| {
        let s = sample(cfg, cell, rep)?;
        let out = test_at_k0(&s.network, cell.k0, cfg.alpha, s.detection_seed)?;
        Ok(vec![record(cfg, cell, cell.k0, rep, "T", out.t)])
    })?;
    finish(cfg, records)
}

/// Sequential estimate per replicate; exhausted runs are recorded as 0.
pub fn run_accuracy(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let cells: Vec<Cell> = cfg
        .ks
        .iter()
        .flat_map(|&k| {
            cfg.ns.iter().flat_map(move |&n| {
                cfg.rhos.iter().map(move |&rho| Cell {
                    id: format!("K{k}-n{n}-rho{}", fmt_rho(rho)),
                    k,
                    n,
                    rho,
                    k0: 0,
                })
            })
        })
        .collect();
    let records = run_cells(cfg, &cells, |cell, rep| {
        let s = sample(cfg, cell, rep)?;
        let k_max = cfg.k_max.unwrap_or_else(|| default_k_max(cell.n));
        let res = nast(&s.network, cfg.alpha, k_max, s.detection_seed)?;
        let k_hat = res.k_hat.unwrap_or(0) as f64;
        Ok(vec![record(cfg, cell, 0, rep, "K_hat", k_hat)])
    })?;
    finish(cfg, records)
}

/// `T(K0)` for `K0 = 1..=profile_k0_max`, reusing each network across the row.
pub fn run_t_profile(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    if cfg.profile_k0_max < 2 {
        return Err(Error::InvalidArgument(
            "profile needs K0 up to at least 2".into(),
        ));
    }
    let rows: Vec<Cell> = cfg
        .ks
        .iter()
        .flat_map(|&k| {
            cfg.ns.iter().flat_map(move |&n| {
                cfg.rhos.iter().map(move |&rho| Cell {
                    id: format!("K{k}-n{n}-rho{}", fmt_rho(rho)),
                    k,
                    n,
                    rho,
                    k0: 0,
                })
            })
        })
        .collect();
    let mut records = run_cells(cfg, &rows, |cell, rep| {
        let s = sample(cfg, cell, rep)?;
        let k0_max = cfg.profile_k0_max.min(cell.n);
        let ts = statistic_profile(&s.network, k0_max, s.detection_seed)?;
        Ok(ts
            .into_iter()
            .enumerate()
            .map(|(i, t)| {
                let mut r = record(cfg, cell, i + 1, rep, "T", t);
                r.cell_id = format!("{}-K0{}", cell.id, i + 1);
                r
            })
            .collect())
    })?;
    // group by (row, K0) so that each cell's replicates are contiguous
    records.sort_by(|a, b| {
        (a.k, a.n, a.rho.to_bits(), a.k0, a.replicate).cmp(&(
            b.k,
            b.n,
            b.rho.to_bits(),
            b.k0,
            b.replicate,
        ))
    });
    finish(cfg, records)
}

/// Recompute the summary table from long-format records.
pub fn summarize(kind: ExperimentKind, alpha: f64, records: &[Record]) -> Result<Vec<SummaryRow>> {
    let z = critical_value(alpha)?;
    let mut cells: Vec<(&Record, Vec<f64>)> = Vec::new();
    let mut index: BTreeMap<&str, usize> = BTreeMap::new();
    for r in records {
        match index.get(r.cell_id.as_str()) {
            Some(&i) => cells[i].1.push(r.value),
            None => {
                index.insert(&r.cell_id, cells.len());
                cells.push((r, vec![r.value]));
            }
        }
    }

    let row = |head: &Record, statistic: &'static str, value: f64| SummaryRow {
        cell_id: head.cell_id.clone(),
        k: head.k,
        n: head.n,
        layers: head.layers,
        rho: head.rho,
        k0: head.k0,
        statistic,
        value,
    };
    let reject_rate =
        |xs: &[f64]| xs.iter().filter(|t| t.abs() >= z).count() as f64 / xs.len() as f64;

    let mut out = Vec::new();
    match kind {
        ExperimentKind::Normality => {
            for (head, xs) in &cells {
                let d = stats::ks_distance_normal(xs);
                out.push(row(head, "mean", stats::mean(xs)));
                out.push(row(head, "variance", stats::variance(xs)));
                out.push(row(head, "ks_distance", d));
                out.push(row(head, "ks_p_value", stats::ks_p_value(d, xs.len())));
                out.push(row(head, "reject_rate", reject_rate(xs)));
            }
        }
        ExperimentKind::SizePower => {
            for (head, xs) in &cells {
                out.push(row(head, "reject_rate", reject_rate(xs)));
                out.push(row(head, "mean_T", stats::mean(xs)));
            }
        }
        ExperimentKind::Accuracy => {
            for (head, xs) in &cells {
                let hits = xs.iter().filter(|&&k| k == head.k as f64).count();
                out.push(row(
                    head,
                    "proportion_correct",
                    hits as f64 / xs.len() as f64,
                ));
            }
        }
        ExperimentKind::TProfile => {
            let mut accepted_rows: Vec<(usize, usize, u64)> = Vec::new();
            for (head, xs) in &cells {
                let m = stats::mean(xs);
                out.push(row(head, "mean_T", m));
                out.push(row(
                    head,
                    "mean_abs_T",
                    stats::mean(&xs.iter().map(|x| x.abs()).collect::<Vec<_>>()),
                ));
                let key = (head.k, head.n, head.rho.to_bits());
                let first = m.abs() < z && !accepted_rows.contains(&key);
                if first {
                    accepted_rows.push(key);
                }
                out.push(row(head, "first_accept", if first { 1.0 } else { 0.0 }));
            }
        }
    }
    Ok(out)
}
