//! Seeded Monte Carlo checks of detection, estimation and the test statistic.

use mlsbm::experiments::{ExperimentConfig, ExperimentKind};
use mlsbm::model::{generate_planted, true_probabilities, ConnectivityModel, Membership};
use mlsbm::rng::derive_seed;
use mlsbm::sequential::test_at_k0;
use mlsbm::{
    detect_communities, estimate_connectivity, estimate_parameters, generate_msbm,
    ideal_aggregation, misclustering_error, nast, normalized_aggregation, run_experiment,
    CommunityLabels, GeneratorConfig, Matrix, Recipe, Termination,
};

fn two_block(within: f64, between: f64, layers: usize) -> ConnectivityModel {
    let b = Matrix::from_rows(&[vec![within, between], vec![between, within]]).unwrap();
    ConnectivityModel::new(vec![b; layers]).unwrap()
}

#[test]
fn dense_blocks_are_recovered() {
    let model = two_block(0.9, 0.05, 3);
    let good = (0..100u64)
        .filter(|&rep| {
            let cfg = GeneratorConfig::explicit(100, model.clone(), derive_seed(1, rep));
            let (net, truth) = generate_msbm(&cfg).unwrap();
            let labels = detect_communities(&net, 2, rep).unwrap();
            misclustering_error(&labels, &truth).unwrap().m <= 2
        })
        .count();
    assert!(good >= 95, "{good}/100");
}

#[test]
fn block_estimates_are_accurate_at_n400() {
    let model = two_block(0.7, 0.3, 3);
    let reps = 40u64;
    let good = (0..reps)
        .filter(|&rep| {
            let cfg = GeneratorConfig::explicit(400, model.clone(), derive_seed(2, rep));
            let (net, truth) = generate_msbm(&cfg).unwrap();
            let labels = detect_communities(&net, 2, rep).unwrap();
            let perm = misclustering_error(&labels, &truth).unwrap().permutation;
            let est = estimate_connectivity(&net, &labels).unwrap();
            est.blocks().iter().zip(model.blocks()).all(|(bh, b)| {
                (0..2).all(|r| {
                    (0..2).all(|c| {
                        (bh[(r, c)] - b[(perm[r].unwrap(), perm[c].unwrap())]).abs() <= 0.05
                    })
                })
            })
        })
        .count();
    assert!(good as f64 >= 0.95 * reps as f64, "{good}/{reps}");
}

#[test]
fn plugin_aggregate_is_close_to_ideal_at_n1000() {
    for rep in 0..2u64 {
        let cfg = GeneratorConfig::recipe(1000, 5, 3, Recipe::Exp1, 1.0, derive_seed(3, rep));
        let planted = generate_planted(&cfg).unwrap();
        let truth = true_probabilities(&planted.model, &planted.labels).unwrap();
        let ideal = ideal_aggregation(&planted.network, &truth).unwrap();
        let (labels, probs) = estimate_parameters(&planted.network, 3, rep).unwrap();
        assert_eq!(misclustering_error(&labels, &planted.labels).unwrap().m, 0);
        let plug = normalized_aggregation(&planted.network, &probs).unwrap();
        let mut worst: f64 = 0.0;
        for (a, b) in plug.matrix().data().iter().zip(ideal.matrix().data()) {
            worst = worst.max((a - b).abs());
        }
        assert!(worst <= 0.05, "max-norm distance {worst}");
    }
}

#[test]
fn underfit_statistic_is_large() {
    let cfg = GeneratorConfig::recipe(400, 5, 2, Recipe::Exp2or3, 0.5, 17);
    let (net, _) = generate_msbm(&cfg).unwrap();
    let out = test_at_k0(&net, 1, 0.05, 0).unwrap();
    assert!(out.reject && out.t > 50.0, "T = {}", out.t);
}

#[test]
fn nast_on_complete_triangle_with_k_max_one() {
    let cfg = GeneratorConfig::explicit(
        3,
        ConnectivityModel::new(vec![Matrix::from_vec(1, 1, vec![1.0]).unwrap()]).unwrap(),
        0,
    );
    let (net, _) = generate_msbm(&cfg).unwrap();
    let a = nast(&net, 0.05, 1, 8).unwrap();
    assert_eq!(a, nast(&net, 0.05, 1, 8).unwrap());
    match a.terminated_by {
        Termination::Accepted => assert_eq!(a.k_hat, Some(1)),
        Termination::KMaxExhausted => assert_eq!(a.k_hat, None),
    }
    assert_eq!(a.trace.len(), 1);
}

#[test]
fn null_statistic_moments_at_n200() {
    let cfg = ExperimentConfig {
        ns: vec![200],
        layers: 5,
        ks: vec![2],
        rhos: vec![1.0],
        replicates: 500,
        seed: 12,
        ..ExperimentConfig::desk(ExperimentKind::Normality)
    };
    let rep = run_experiment(&cfg).unwrap();
    let m = rep.summary_value("K2-n200-rho1", "mean").unwrap();
    let v = rep.summary_value("K2-n200-rho1", "variance").unwrap();
    assert!(m.abs() <= 0.15, "mean {m}");
    assert!((0.8..=1.25).contains(&v), "variance {v}");
}

#[test]
fn sequential_accuracy_for_one_community() {
    let cfg = ExperimentConfig {
        ns: vec![300],
        layers: 5,
        ks: vec![1],
        rhos: vec![0.05],
        replicates: 40,
        seed: 13,
        ..ExperimentConfig::desk(ExperimentKind::Accuracy)
    };
    let rep = run_experiment(&cfg).unwrap();
    let p = rep
        .summary_value("K1-n300-rho0.05", "proportion_correct")
        .unwrap();
    assert!(p >= 0.9, "{p}");
}

#[test]
fn explicit_membership_is_respected() {
    let labels = CommunityLabels::new((0..20).map(|i| i / 10).collect(), 2).unwrap();
    let cfg = GeneratorConfig {
        membership: Membership::Explicit(labels.clone()),
        ..GeneratorConfig::explicit(20, two_block(0.5, 0.1, 1), 4)
    };
    let (_, got) = generate_msbm(&cfg).unwrap();
    assert_eq!(got, labels);
}
