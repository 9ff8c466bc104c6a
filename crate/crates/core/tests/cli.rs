use std::path::Path;
use std::process::{Command, Output};

use mlsbm::{generate_msbm, load_multilayer_edgelist, GeneratorConfig, Recipe};

fn mlsbm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlsbm"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn generate(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name);
    let p = path.to_str().unwrap().to_string();
    let mut full = vec!["generate"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", &p]);
    stdout(&mlsbm(&full));
    p
}

fn k_hat_line(text: &str) -> &str {
    text.lines().last().unwrap()
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let net = generate(
        dir.path(),
        "g.txt",
        &["--n", "30", "--L", "2", "--K", "2", "--seed", "1"],
    );
    assert_eq!(mlsbm(&["test", &net, "--k0", "0"]).status.code(), Some(2));
    assert_eq!(
        mlsbm(&["test", &net, "--k0", "2", "--alpha", "1.5"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        mlsbm(&["nast", &net, "--k-max", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(mlsbm(&["bogus"]).status.code(), Some(2));
    assert_eq!(
        mlsbm(&["test", "/nonexistent/file", "--k0", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(mlsbm(&["test", &net, "--k0", "31"]).status.code(), Some(1));
    assert_eq!(
        mlsbm(&["test", &net, "--k0", "2", "--n", "10"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(mlsbm(&["experiment", "nonsense"]).status.code(), Some(1));
    assert_eq!(mlsbm(&["--help"]).status.code(), Some(0));
}

#[test]
fn generate_round_trips_through_loader() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(
        dir.path(),
        "g.txt",
        &[
            "--n", "80", "--L", "3", "--K", "3", "--recipe", "exp1", "--seed", "9",
        ],
    );
    let cfg = GeneratorConfig::recipe(80, 3, 3, Recipe::Exp1, 1.0, 9);
    let (expected, _) = generate_msbm(&cfg).unwrap();
    let loaded = load_multilayer_edgelist(&path, Some(80), Some(3)).unwrap();
    assert_eq!(loaded, expected);
    assert_eq!(
        load_multilayer_edgelist(&path, Some(80), Some(3)).unwrap(),
        loaded
    );
}

#[test]
fn generate_writes_planted_labels() {
    let dir = tempfile::tempdir().unwrap();
    let labels = dir.path().join("labels.csv");
    let out = mlsbm(&[
        "generate",
        "--n",
        "12",
        "--L",
        "1",
        "--K",
        "3",
        "--seed",
        "2",
        "--labels-out",
        labels.to_str().unwrap(),
    ]);
    assert!(stdout(&out).starts_with("# n=12 L=1\n"));
    let text = std::fs::read_to_string(labels).unwrap();
    assert_eq!(text.lines().count(), 13);
    assert_eq!(text.lines().next(), Some("node,label"));
}

#[test]
fn nast_recovers_three_communities_at_full_scale() {
    let dir = tempfile::tempdir().unwrap();
    let net = generate(
        dir.path(),
        "k3.txt",
        &[
            "--n", "1000", "--L", "10", "--K", "3", "--rho", "0.1", "--recipe", "exp2or3",
            "--seed", "11",
        ],
    );
    let text = stdout(&mlsbm(&["nast", &net, "--seed", "5"]));
    assert_eq!(k_hat_line(&text), "K_hat,3");
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "K0,T,eta,decision");
    assert!(rows[1].starts_with("1,") && rows[1].ends_with(",reject"));
    assert!(rows[3].starts_with("3,") && rows[3].ends_with(",accept"));
}

#[test]
fn eta_on_separated_single_layer_graph() {
    let dir = tempfile::tempdir().unwrap();
    let net = generate(
        dir.path(),
        "k2.txt",
        &[
            "--n", "150", "--L", "1", "--K", "2", "--recipe", "exp1", "--seed", "4",
        ],
    );
    let text = stdout(&mlsbm(&["eta", &net, "--k-max", "6", "--seed", "1"]));
    assert_eq!(k_hat_line(&text), "K_hat,2");
    assert_eq!(text.lines().count(), 1 + 6 + 1);
}

#[test]
fn fit_commands_report_k0_rows() {
    let dir = tempfile::tempdir().unwrap();
    let net = generate(
        dir.path(),
        "g.txt",
        &["--n", "60", "--L", "2", "--K", "2", "--seed", "3"],
    );
    let labels = stdout(&mlsbm(&["detect", &net, "--k0", "2", "--seed", "1"]));
    assert_eq!(labels.lines().count(), 61);
    let blocks = stdout(&mlsbm(&["estimate", &net, "--k0", "2", "--seed", "1"]));
    assert_eq!(blocks.lines().count(), 1 + 2 * 4);
    let test = stdout(&mlsbm(&["test", &net, "--k0", "2"]));
    assert!(test.starts_with("K0,T,z_crit,decision\n2,"));
}

#[test]
fn experiment_writes_records_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.csv");
    let summary = stdout(&mlsbm(&[
        "experiment",
        "size_power",
        "--n",
        "50",
        "--L",
        "2",
        "--K",
        "1,2",
        "--rho",
        "0.5",
        "--replicates",
        "3",
        "--out",
        records.to_str().unwrap(),
    ]));
    assert!(summary.starts_with("experiment,cell_id,K,n,L,rho,K0,statistic,value\n"));
    let text = std::fs::read_to_string(records).unwrap();
    // 2 tested K0 x (size, power) x 3 replicates
    assert_eq!(text.lines().count(), 1 + 12);
}
