use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mlsbm::experiments::fmt_float;
use mlsbm::sequential::{critical_value, default_k_max, statistic_profile};
use mlsbm::{
    detect_communities, estimate_connectivity, eta_from_statistics, generate_msbm,
    load_multilayer_edgelist, nast, run_experiment, test_at_k0, write_edgelist, write_labels,
    ExperimentConfig, ExperimentKind, GeneratorConfig, MultiLayerNetwork, Recipe, Termination,
};

#[derive(Parser)]
#[command(
    name = "mlsbm",
    version,
    about = "Community-count estimation for multi-layer SBMs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a network and write it as an edge list.
    Generate(GenerateArgs),
    /// Spectral community detection with K0 clusters.
    Detect(FitArgs),
    /// Block connectivity estimates for K0 clusters.
    Estimate(FitArgs),
    /// Goodness-of-fit test at a single K0.
    Test(TestArgs),
    /// Sequential test over K0 = 1, 2, ...
    Nast(SequentialArgs),
    /// Drop-ratio estimator over K0 = 1..k_max.
    Eta(SequentialArgs),
    /// Monte Carlo simulation study.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InputArgs {
    /// Edge list `layer src dst [weight]`, 1-indexed.
    input: PathBuf,
    /// Declared node count; inferred when omitted.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: Option<u64>,
    /// Declared layer count; inferred when omitted.
    #[arg(long = "L", value_parser = clap::value_parser!(u64).range(1..))]
    layers: Option<u64>,
}

impl InputArgs {
    fn load(&self) -> mlsbm::Result<MultiLayerNetwork> {
        load_multilayer_edgelist(
            &self.input,
            self.n.map(|v| v as usize),
            self.layers.map(|v| v as usize),
        )
    }
}

fn parse_alpha(s: &str) -> Result<f64, String> {
    let a: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if a > 0.0 && a < 1.0 {
        Ok(a)
    } else {
        Err("alpha must lie in (0, 1)".into())
    }
}

fn parse_rho(s: &str) -> Result<f64, String> {
    let r: f64 = s.parse().map_err(|_| format!("`{s}` is not a number"))?;
    if r > 0.0 && r <= 1.0 {
        Ok(r)
    } else {
        Err("rho must lie in (0, 1]".into())
    }
}

fn parse_recipe(s: &str) -> Result<Recipe, String> {
    s.parse().map_err(|e: mlsbm::Error| e.to_string())
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    n: u64,
    #[arg(long = "L", value_parser = clap::value_parser!(u64).range(1..))]
    layers: u64,
    #[arg(long = "K", value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, default_value = "exp2or3", value_parser = parse_recipe)]
    recipe: Recipe,
    #[arg(long, default_value_t = 1.0, value_parser = parse_rho)]
    rho: f64,
    /// Also write the planted labels as `node,label` CSV.
    #[arg(long)]
    labels_out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct FitArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k0: u64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct TestArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k0: u64,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct SequentialArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    /// Largest K0 tried; defaults to ceil(sqrt(n)).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k_max: Option<u64>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct ExperimentArgs {
    /// normality, size_power, accuracy or t_profile.
    kind: String,
    #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    n: Vec<u64>,
    #[arg(long = "L", value_parser = clap::value_parser!(u64).range(1..))]
    layers: Option<u64>,
    #[arg(long = "K", value_delimiter = ',', value_parser = clap::value_parser!(u64).range(1..))]
    k: Vec<u64>,
    #[arg(long, value_delimiter = ',', value_parser = parse_rho)]
    rho: Vec<f64>,
    #[arg(long, value_parser = parse_recipe)]
    recipe: Option<Recipe>,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    replicates: Option<u64>,
    #[arg(long, default_value_t = 0.05, value_parser = parse_alpha)]
    alpha: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    k_max: Option<u64>,
    /// Largest K0 in the statistic profile.
    #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
    k0_max: Option<u64>,
    /// Summary table destination; stdout when omitted.
    #[arg(long)]
    summary_out: Option<PathBuf>,
    /// `--out` receives the per-replicate records.
    #[command(flatten)]
    common: Common,
}

fn emit(path: Option<&PathBuf>, bytes: &[u8]) -> io::Result<()> {
    match path {
        Some(p) => File::create(p)?.write_all(bytes),
        None => io::stdout().lock().write_all(bytes),
    }
}

fn run(command: Command) -> mlsbm::Result<()> {
    let mut buf = Vec::new();
    let out = match command {
        Command::Generate(a) => {
            let cfg = GeneratorConfig::recipe(
                a.n as usize,
                a.layers as usize,
                a.k as usize,
                a.recipe,
                a.rho,
                a.common.seed,
            );
            let (net, labels) = generate_msbm(&cfg)?;
            write_edgelist(&net, &mut buf)?;
            if let Some(p) = &a.labels_out {
                write_labels(&labels, File::create(p)?)?;
            }
            a.common.out
        }
        Command::Detect(a) => {
            let net = a.input.load()?;
            let labels = detect_communities(&net, a.k0 as usize, a.common.seed)?;
            write_labels(&labels, &mut buf)?;
            a.common.out
        }
        Command::Estimate(a) => {
            let net = a.input.load()?;
            let labels = detect_communities(&net, a.k0 as usize, a.common.seed)?;
            let est = estimate_connectivity(&net, &labels)?;
            writeln!(buf, "layer,row,col,B_hat")?;
            for (l, b) in est.blocks().iter().enumerate() {
                for r in 0..b.rows() {
                    for c in 0..b.cols() {
                        writeln!(
                            buf,
                            "{},{},{},{}",
                            l + 1,
                            r + 1,
                            c + 1,
                            fmt_float(b[(r, c)])
                        )?;
                    }
                }
            }
            a.common.out
        }
        Command::Test(a) => {
            let net = a.input.load()?;
            let o = test_at_k0(&net, a.k0 as usize, a.alpha, a.common.seed)?;
            writeln!(buf, "K0,T,z_crit,decision")?;
            writeln!(
                buf,
                "{},{},{},{}",
                o.k0,
                fmt_float(o.t),
                fmt_float(o.z_crit),
                decision(o.reject)
            )?;
            a.common.out
        }
        Command::Nast(a) => {
            let net = a.input.load()?;
            let k_max = a
                .k_max
                .map_or_else(|| default_k_max(net.n()), |k| k as usize);
            let res = nast(&net, a.alpha, k_max, a.common.seed)?;
            let ts: Vec<f64> = res.trace.iter().map(|o| o.t).collect();
            let rejects: Vec<bool> = res.trace.iter().map(|o| o.reject).collect();
            write_table(&mut buf, &ts, &rejects)?;
            match res.terminated_by {
                Termination::Accepted => writeln!(buf, "K_hat,{}", res.k_hat.unwrap_or(0))?,
                Termination::KMaxExhausted => writeln!(buf, "K_hat,NA,{}", res.terminated_by)?,
            }
            a.common.out
        }
        Command::Eta(a) => {
            let net = a.input.load()?;
            let k_max = a
                .k_max
                .map_or_else(|| default_k_max(net.n()), |k| k as usize);
            let z = critical_value(a.alpha)?;
            let ts = statistic_profile(&net, k_max, a.common.seed)?;
            let rejects: Vec<bool> = ts.iter().map(|t| t.abs() >= z).collect();
            write_table(&mut buf, &ts, &rejects)?;
            writeln!(buf, "K_hat,{}", eta_from_statistics(&ts)?.k_hat)?;
            a.common.out
        }
        Command::Experiment(a) => {
            let kind: ExperimentKind = a.kind.parse()?;
            let mut cfg = ExperimentConfig::desk(kind);
            if !a.n.is_empty() {
                cfg.ns = a.n.iter().map(|&v| v as usize).collect();
            }
            if let Some(l) = a.layers {
                cfg.layers = l as usize;
            }
            if !a.k.is_empty() {
                cfg.ks = a.k.iter().map(|&v| v as usize).collect();
            }
            if !a.rho.is_empty() {
                cfg.rhos = a.rho.clone();
            }
            if let Some(r) = a.recipe {
                cfg.recipe = r;
            }
            if let Some(r) = a.replicates {
                cfg.replicates = r as usize;
            }
            if let Some(k) = a.k0_max {
                cfg.profile_k0_max = k as usize;
            }
            cfg.alpha = a.alpha;
            cfg.seed = a.common.seed;
            cfg.k_max = a.k_max.map(|k| k as usize);
            let report = run_experiment(&cfg)?;
            if let Some(p) = &a.common.out {
                report.write_records_csv(File::create(p)?)?;
            }
            report.write_summary_csv(&mut buf)?;
            a.summary_out
        }
    };
    emit(out.as_ref(), &buf)?;
    Ok(())
}

fn decision(reject: bool) -> &'static str {
    if reject {
        "reject"
    } else {
        "accept"
    }
}

/// `K0,T,eta,decision` rows; eta is empty for `K0 = 1`.
fn write_table(buf: &mut Vec<u8>, ts: &[f64], rejects: &[bool]) -> io::Result<()> {
    writeln!(buf, "K0,T,eta,decision")?;
    let etas = eta_from_statistics(ts).map(|e| e.etas).unwrap_or_default();
    for (i, (&t, &rej)) in ts.iter().zip(rejects).enumerate() {
        let eta = i
            .checked_sub(1)
            .and_then(|j| etas.get(j))
            .map_or(String::new(), |&e| fmt_float(e));
        writeln!(buf, "{},{},{},{}", i + 1, fmt_float(t), eta, decision(rej))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
