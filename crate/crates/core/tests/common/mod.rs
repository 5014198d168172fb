//! Shared random-instance generators for the integration suites.
//!
//! Positions keep a minimum pairwise separation so path-loss gains stay
//! bounded; near-coincident nodes are a conditioning hazard, not an
//! interesting test case.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use relayrate_core::allocation::{self, PowerSplit, ViewSpec};
use relayrate_core::NetworkConfig;

pub const MIN_SEPARATION: f64 = 0.5;

/// Log-uniform draw over `[lo, hi]`.
pub fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// Distinct positions in `[0, 10]` with pairwise gaps of at least
/// [`MIN_SEPARATION`], in random order (data flow need not follow geometry).
pub fn random_positions(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    loop {
        let mut positions: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..=10.0)).collect();
        let mut sorted = positions.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|w| w[1] - w[0] >= MIN_SEPARATION) {
            positions.shuffle(rng);
            return positions;
        }
    }
}

/// A random network with powers and noises log-uniform on `[0.01, 10]`.
pub fn random_config(rng: &mut ChaCha8Rng, node_count: usize) -> NetworkConfig {
    NetworkConfig::new(
        random_positions(rng, node_count),
        (0..node_count - 1)
            .map(|_| log_uniform(rng, 0.01, 10.0))
            .collect(),
        (0..node_count - 1)
            .map(|_| log_uniform(rng, 0.01, 10.0))
            .collect(),
        1.0,
        2.0,
    )
    .unwrap()
}

/// Random `(config, view, split)` with `T in 2..=6` and `k in 1..T`.
pub fn random_instance(rng: &mut ChaCha8Rng) -> (NetworkConfig, ViewSpec, PowerSplit) {
    let node_count = rng.gen_range(2..=6);
    let k = rng.gen_range(1..node_count);
    let view = ViewSpec::new(k, node_count).unwrap();
    let config = random_config(rng, node_count);
    let split = allocation::random_split(&view, rng);
    (config, view, split)
}
