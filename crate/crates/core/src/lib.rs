//! Simulation of one random variable from another, with exactly computed
//! approximation errors.
//!
//! The library builds two families of simulators for a real-valued target
//! law `Q_Y`:
//!
//! * **seed-aware** maps (`nonuniversal`): inverse transforms, atom-midpoint
//!   tables for discrete seeds, a greedy discrete-to-discrete assignment,
//!   and digit-interleaving for vector targets;
//! * **seed-blind** maps (`sawtooth`, `typeclass`): the Δ-periodic sawtooth
//!   for absolutely continuous seeds and type-class rank maps for i.i.d. or
//!   Markov sequence seeds, which depend only on the seed *class*.
//!
//! Errors are never sampled: output laws are computed in closed form or by
//! quadrature/enumeration, and compared to the target under Kolmogorov–
//! Smirnov, total-variation, and Rényi measures (`metrics`). The `squeeze`
//! module quantifies how fast a periodicized function decorrelates from an
//! integrable one as the period shrinks, which is the mechanism behind the
//! sawtooth error bounds.

pub mod distributions;
pub mod error;
pub mod metrics;
pub mod nonuniversal;
pub mod quad;
pub mod sawtooth;
pub mod special;
pub mod squeeze;
pub mod typeclass;

pub use distributions::{DiscretePmf, DistributionSpec, ScalarDistribution};
pub use error::{Error, Result};
pub use nonuniversal::MappingTable;
pub use typeclass::MarkovChainSpec;
