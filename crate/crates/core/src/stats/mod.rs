//! Correlation machinery, the Fisher-Z conditional-independence test,
//! ordinary least squares and z-score normalization.

mod correlation;
mod dataset;
mod dist;
mod fisher;
mod normalize;
mod ols;

pub use correlation::{
    correlation_matrix, covariance_matrix, partial_correlation, reciprocal_condition,
    SINGULAR_RCOND,
};
pub use dataset::Dataset;
pub use dist::{normal_two_sided_p, student_t_two_sided_p};
pub use fisher::{fisher_z_ci_test, CiTestResult, FisherZ, DEGENERATE_R};
pub use normalize::{zscore_normalize, NormalizationRecord};
pub use ols::{ols_fit, OlsFit};

pub(crate) use correlation::submatrix;
