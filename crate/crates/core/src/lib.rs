//! Achievable decode-forward rates on one-dimensional Gaussian
//! multiple-relay channels, for both unconstrained (full-view) cooperation
//! and `k`-hop myopic cooperation where each node only addresses a bounded
//! neighborhood.
//!
//! The crate is organized around the data flow of a rate study:
//!
//! * [`channel`]: geometry, path loss, pairwise power gains;
//! * [`allocation`]: per-node power splits over superposition layers,
//!   constrained to the view window;
//! * [`rates`]: per-node reception rates, the end-to-end bottleneck, and
//!   the relay-order search;
//! * [`mi_oracle`]: an independent Gaussian conditional mutual information
//!   computation used to validate the closed-form rates;
//! * [`optimizer`]: max-min power-split optimization (exhaustive grid and
//!   compass-search refinement);
//! * [`pipeline`]: the block-Markov transmission schedule and windowed
//!   decoding behind the rate expressions.
//!
//! All computations are pure functions over immutable inputs and are safe to
//! evaluate concurrently.

pub mod allocation;
pub mod channel;
pub mod error;
pub mod mi_oracle;
pub mod optimizer;
pub mod pipeline;
pub mod rates;

pub use allocation::{PowerSplit, ViewSpec};
pub use channel::{GainMatrix, NetworkConfig};
pub use error::{Error, Result};
pub use mi_oracle::JointGaussianModel;
pub use optimizer::{OptimizationResult, OptimizerOptions};
pub use pipeline::BlockSchedule;
pub use rates::{RateEvaluator, RateReport};
