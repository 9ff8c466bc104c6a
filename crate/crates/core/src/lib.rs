//! Community-count estimation for multi-layer stochastic block models.
//!
//! A multi-layer network is summarised by a normalized aggregation matrix
//! whose cubic trace is asymptotically standard normal when the candidate
//! community count is right. Testing `K0 = 1, 2, ...` in sequence gives an
//! estimate of the number of communities; a drop-ratio variant handles
//! networks where the null calibration breaks down.

pub mod error;
pub mod estimation;
pub mod experiments;
pub mod io;
pub mod linalg;
pub mod model;
pub mod rng;
pub mod sequential;
pub mod spectral;
pub mod statistic;
pub mod stats;

pub use error::{Error, Result};
pub use estimation::{
    estimate_connectivity, estimate_parameters, expand_probabilities, BlockEstimates,
    ProbabilityMatrices,
};
pub use experiments::{run_experiment, ExperimentConfig, ExperimentKind, ExperimentReport};
pub use io::{load_multilayer_edgelist, read_multilayer_edgelist, write_edgelist, write_labels};
pub use linalg::{EigenPairs, Matrix};
pub use model::{
    check_assumptions, generate_msbm, make_experiment_connectivity, misclustering_error, Adjacency,
    AssumptionReport, CommunityLabels, ConnectivityModel, GeneratorConfig, MisclusterReport,
    MultiLayerNetwork, Recipe,
};
pub use sequential::{
    eta_estimate, eta_from_statistics, nast, normal_quantile, test_at_k0, EtaResult, NastResult,
    Termination, TestOutcome,
};
pub use spectral::{bias_adjusted_aggregate, detect_communities, kmeans_rows, top_eigenvectors};
pub use statistic::{
    ideal_aggregation, normalized_aggregation, trace_cubed_statistic, triple_product_trace,
    AggregationMatrix, StatisticValue,
};
