//! Bound-chain verdicts, tradeoffs and the Monte-Carlo estimation harness.

mod chain;
mod covariance;
mod estimation;
mod evaluate;
mod tradeoff;

pub use chain::{verify_chain, verify_report, ChainTolerances, ChainVerdict, Link};
pub use covariance::{covariance_vs_bound, CovarianceReport, EstimateSet, MIN_REPLICATIONS};
pub use estimation::{
    mle, mle_with, replication_seed, run_replications, sample_experiment, Estimated, Experiment, Likelihood,
    MleEstimate, MleOptions, Record, GAMMA_MAX, GAMMA_MIN,
};
pub use evaluate::evaluate;
pub use tradeoff::{tradeoffs, Tradeoffs};
