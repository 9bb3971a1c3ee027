//! Eigenvector covariance at graph distance `k` and its tree limit.

mod empirical;
mod tree;

pub use empirical::{deviation, empirical_cov, norm_deviation, CovarianceTable, NormDeviation};
pub use tree::{
    chebyshev_u, orthogonality_check, tree_cov_closed, tree_cov_envelope, tree_cov_recursive,
    OrthogonalityCheck,
};
