//! One-dimensional Gaussian multiple-relay channel geometry.
//!
//! Node 1 is the source, node `T` the destination, and nodes `2..T-1` relays.
//! Nodes `1..T-1` transmit with per-node power constraints, nodes `2..T`
//! receive with per-node noise variances, and the power gain between a
//! transmitter and a receiver follows the simplified path-loss law
//! `g = kappa * d^(-eta)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Geometry and radio parameters of a `T`-node relay chain.
///
/// All quantities are dimensionful: positions in meters, powers and noise
/// variances in watts. Positions need not be increasing; data flows in node
/// index order regardless of physical placement (the permutation search
/// reorders indices, not coordinates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Node coordinates, one per node `1..=T`.
    pub positions: Vec<f64>,
    /// Transmit power constraints for nodes `1..=T-1`.
    pub powers: Vec<f64>,
    /// Receiver noise variances for nodes `2..=T`.
    pub noises: Vec<f64>,
    /// Path-loss gain constant, `> 0`.
    pub kappa: f64,
    /// Path-loss exponent, `> 0` (`>= 2` for physical propagation).
    pub eta: f64,
}

impl NetworkConfig {
    /// Validates and builds a configuration.
    ///
    /// Exponents below 2 are accepted with a warning: the free-space bound is
    /// physical, not mathematical.
    pub fn new(
        positions: Vec<f64>,
        powers: Vec<f64>,
        noises: Vec<f64>,
        kappa: f64,
        eta: f64,
    ) -> Result<Self> {
        let config = Self {
            positions,
            powers,
            noises,
            kappa,
            eta,
        };
        config.validate()?;
        Ok(config)
    }

    /// Number of nodes `T`.
    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    /// Transmit power of node `i`, `1 <= i <= T-1`.
    pub fn power(&self, i: usize) -> f64 {
        assert!(
            i >= 1 && i < self.node_count(),
            "transmitter index {i} out of range 1..={}",
            self.node_count() - 1
        );
        self.powers[i - 1]
    }

    /// Noise variance at node `t`, `2 <= t <= T`.
    pub fn noise(&self, t: usize) -> f64 {
        assert!(
            t >= 2 && t <= self.node_count(),
            "receiver index {t} out of range 2..={}",
            self.node_count()
        );
        self.noises[t - 2]
    }

    /// Checks every structural invariant, returning the first failure.
    pub fn validate(&self) -> Result<()> {
        let t_count = self.positions.len();
        if t_count < 2 {
            return Err(Error::Config(format!(
                "need at least 2 nodes, got {t_count}"
            )));
        }
        if self.powers.len() != t_count - 1 {
            return Err(Error::Config(format!(
                "expected {} transmit powers for {} nodes, got {}",
                t_count - 1,
                t_count,
                self.powers.len()
            )));
        }
        if self.noises.len() != t_count - 1 {
            return Err(Error::Config(format!(
                "expected {} noise variances for {} nodes, got {}",
                t_count - 1,
                t_count,
                self.noises.len()
            )));
        }
        for (idx, p) in self.positions.iter().enumerate() {
            if !p.is_finite() {
                return Err(Error::Config(format!(
                    "position of node {} is not finite",
                    idx + 1
                )));
            }
        }
        for i in 0..t_count {
            for j in i + 1..t_count {
                if self.positions[i] == self.positions[j] {
                    return Err(Error::Config(format!(
                        "nodes {} and {} share position {}",
                        i + 1,
                        j + 1,
                        self.positions[i]
                    )));
                }
            }
        }
        // Zero transmit power is the meaningful silent-node limit and is
        // allowed; negative power is not.
        for (idx, p) in self.powers.iter().enumerate() {
            if !(p.is_finite() && *p >= 0.0) {
                return Err(Error::Config(format!(
                    "transmit power of node {} must be finite and >= 0, got {p}",
                    idx + 1
                )));
            }
        }
        for (idx, n) in self.noises.iter().enumerate() {
            if !(n.is_finite() && *n > 0.0) {
                return Err(Error::Config(format!(
                    "noise variance of node {} must be finite and > 0, got {n}",
                    idx + 2
                )));
            }
        }
        if !(self.kappa.is_finite() && self.kappa > 0.0) {
            return Err(Error::Config(format!(
                "kappa must be finite and > 0, got {}",
                self.kappa
            )));
        }
        if !(self.eta.is_finite() && self.eta > 0.0) {
            return Err(Error::Config(format!(
                "eta must be finite and > 0, got {}",
                self.eta
            )));
        }
        if self.eta < 2.0 {
            log::warn!(
                "path-loss exponent eta = {} is below the free-space value 2; \
                 accepted, but the geometry is unphysical",
                self.eta
            );
        }
        Ok(())
    }
}

/// Pairwise power gains `g[i][t] = kappa * |x_i - x_t|^(-eta)` for
/// transmitters `i in 1..=T-1` and receivers `t in 2..=T`, `i != t`.
///
/// The diagonal is never defined: a node does not receive its own signal.
#[derive(Debug, Clone)]
pub struct GainMatrix {
    node_count: usize,
    // entries[(i-1) * T + (t-1)]; undefined slots hold NaN so that any
    // accidental read poisons the result instead of passing silently.
    entries: Vec<f64>,
}

impl GainMatrix {
    /// Power gain from transmitter `i` to receiver `t`.
    pub fn gain(&self, i: usize, t: usize) -> f64 {
        assert!(
            i >= 1 && i < self.node_count,
            "transmitter index {i} out of range 1..={}",
            self.node_count - 1
        );
        assert!(
            t >= 2 && t <= self.node_count,
            "receiver index {t} out of range 2..={}",
            self.node_count
        );
        assert!(i != t, "gain is undefined for i = t = {i}");
        self.entries[(i - 1) * self.node_count + (t - 1)]
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }
}

/// Power gain from node `i` to node `t` under `config`'s path-loss law.
pub fn gain(i: usize, t: usize, config: &NetworkConfig) -> Result<f64> {
    let t_count = config.node_count();
    if !(1..t_count).contains(&i) {
        return Err(Error::Usage(format!(
            "transmitter index {i} out of range 1..={}",
            t_count - 1
        )));
    }
    if !(2..=t_count).contains(&t) {
        return Err(Error::Usage(format!(
            "receiver index {t} out of range 2..={t_count}"
        )));
    }
    if i == t {
        return Err(Error::Usage(format!(
            "gain from node {i} to itself is undefined"
        )));
    }
    let d = (config.positions[i - 1] - config.positions[t - 1]).abs();
    if d == 0.0 {
        return Err(Error::Config(format!(
            "nodes {i} and {t} are coincident; the path-loss gain diverges"
        )));
    }
    let gain = config.kappa * d.powf(-config.eta);
    if !(gain.is_finite() && gain > 0.0) {
        return Err(Error::Config(format!(
            "gain from node {i} to node {t} over distance {d} is not a \
             positive finite number ({gain})"
        )));
    }
    Ok(gain)
}

/// Tabulates `gain(i, t)` for every defined `(i, t)` pair.
pub fn build_gain_matrix(config: &NetworkConfig) -> Result<GainMatrix> {
    config.validate()?;
    let t_count = config.node_count();
    let mut entries = vec![f64::NAN; t_count * t_count];
    for i in 1..t_count {
        for t in 2..=t_count {
            if i == t {
                continue;
            }
            entries[(i - 1) * t_count + (t - 1)] = gain(i, t, config)?;
        }
    }
    Ok(GainMatrix {
        node_count: t_count,
        entries,
    })
}
