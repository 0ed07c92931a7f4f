//! One-dimensional probability laws of all three Lebesgue-decomposition
//! classes, with CDF, quantile, and density/pmf evaluation.

mod cantor;
mod literal;
mod pmf;
mod scalar;

pub use cantor::{cantor_cdf, cantor_quantile};
pub use literal::DistributionSpec;
pub use pmf::DiscretePmf;
pub use scalar::{ClassTag, ScalarDistribution};
