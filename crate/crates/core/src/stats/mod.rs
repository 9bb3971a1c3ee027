//! Distribution tests for eigenvector entries: empirical cdfs, KS distances,
//! limiting covariances and multinormal probabilities.

mod hypothesis;
mod ks;
mod limiting;
mod mvn;

pub use hypothesis::{
    bivariate_cdf_deviation, hypothesis_one_univariate, hypothesis_two_univariate,
    kolmogorov_dominance, Dominance, HypothesisError, KsRecord,
};
pub use ks::{
    kolmogorov_cdf, ks_distance, normal_cdf, normal_quantile, EmpiricalCdf, KsStatistic,
    KOLMOGOROV_Q99,
};
pub use limiting::{
    certify_in_graph, check_tree_metric, limiting_covariance, star_distance_matrix,
    tree_distance_matrix, ConfigError, Goodness, LimitingCovariance, ReducedCovariance,
};
pub use mvn::{mvn_box, mvn_orthant, MvnError, MvnEstimate, MvnOptions};
