//! Full-size reproductions (n = 1000, L = 10). Slow; run with
//! `cargo test --release --test published_scale -- --ignored`.

use mlsbm::experiments::{run_size_power, run_t_profile, ExperimentConfig, ExperimentKind};
use mlsbm::Recipe;

fn full(kind: ExperimentKind) -> ExperimentConfig {
    ExperimentConfig {
        ns: vec![1000],
        layers: 10,
        recipe: Recipe::Exp2or3,
        ..ExperimentConfig::desk(kind)
    }
}

#[test]
#[ignore]
fn profile_underfit_means_for_three_communities() {
    let cfg = ExperimentConfig {
        ks: vec![3],
        rhos: vec![0.1],
        replicates: 20,
        profile_k0_max: 3,
        seed: 31,
        ..full(ExperimentKind::TProfile)
    };
    let rep = run_t_profile(&cfg).unwrap();
    for (k0, published) in [(1, 213.2543), (2, 81.9688)] {
        let m = rep
            .summary_value(&format!("K3-n1000-rho0.1-K0{k0}"), "mean_T")
            .unwrap();
        assert!(
            (m - published).abs() <= 0.1 * published,
            "K0={k0}: {m} vs {published}"
        );
    }
    let m = rep.summary_value("K3-n1000-rho0.1-K03", "mean_T").unwrap();
    assert!(m.abs() <= 2.0, "{m}");
}

#[test]
#[ignore]
fn size_and_power_at_two_communities() {
    let cfg = ExperimentConfig {
        ks: vec![2],
        rhos: vec![0.5],
        replicates: 200,
        seed: 32,
        ..full(ExperimentKind::SizePower)
    };
    let rep = run_size_power(&cfg).unwrap();
    let size = rep
        .summary_value("size-K02-n1000-rho0.5", "reject_rate")
        .unwrap();
    let power = rep
        .summary_value("power-K02-n1000-rho0.5", "reject_rate")
        .unwrap();
    assert!((0.01..=0.12).contains(&size), "size {size}");
    assert_eq!(power, 1.0);
}
