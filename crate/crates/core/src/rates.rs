//! Per-node reception rates and the end-to-end decode-forward rate.
//!
//! Under a `k`-hop view, receiver `t` sees the `T-1` unit-variance layers
//! partitioned three ways:
//!
//! * signal layers `J_sig(t) = [max(1, t-k), t-1]`: the messages node `t`
//!   is currently decoding;
//! * conditioned layers `J_cond(t) = [t, min(t+k-1, T-1)]`: exactly the
//!   layers node `t` itself transmits, hence known and cancellable;
//! * interference layers `J_int(t)`: everything else. A myopic node does
//!   not hold those codebooks, so their transmissions stay as noise even
//!   when the messages they carry are old.
//!
//! Amplitudes of the same layer from different transmitters add coherently
//! before squaring, and the reception rate is the Gaussian SINR form
//! `R_t = 1/2 log2(1 + S_t / (N_t + I_t))` in bits per channel use.

use serde::Serialize;

use crate::allocation::{PowerSplit, ViewSpec};
use crate::channel::{build_gain_matrix, GainMatrix, NetworkConfig};
use crate::error::{Error, Result};

/// Layer indices `J_sig(t)`: carried messages still being decoded at `t`.
pub fn signal_layers(t: usize, view: &ViewSpec) -> std::ops::RangeInclusive<usize> {
    t.saturating_sub(view.k).max(1)..=t - 1
}

/// Layer indices `J_cond(t)`: the layers node `t` transmits itself.
pub fn conditioned_layers(t: usize, view: &ViewSpec) -> std::ops::RangeInclusive<usize> {
    t..=(t + view.k - 1).min(view.node_count - 1)
}

/// Layer indices `J_int(t)` as two (possibly empty) contiguous runs.
pub fn interference_layers(
    t: usize,
    view: &ViewSpec,
) -> (
    std::ops::RangeInclusive<usize>,
    std::ops::RangeInclusive<usize>,
) {
    #[allow(clippy::reversed_empty_ranges)]
    let lower = 1..=t.saturating_sub(view.k + 1);
    let upper = t + view.k..=view.node_count - 1;
    (lower, upper)
}

/// Transmitters repeating layer `j`: `max(1, j-k+1)..=j`.
pub fn senders(j: usize, view: &ViewSpec) -> std::ops::RangeInclusive<usize> {
    j.saturating_sub(view.k - 1).max(1)..=j
}

/// Rate and power decomposition at a single receiving node.
#[derive(Debug, Clone, Serialize)]
pub struct NodeRate {
    /// Receiving node index, `2..=T`.
    pub t: usize,
    /// Reception rate in bits per channel use.
    pub rate: f64,
    /// Coherent signal power `S_t`.
    pub signal_power: f64,
    /// Residual interference power `I_t`.
    pub interference_power: f64,
    pub j_sig: Vec<usize>,
    pub j_cond: Vec<usize>,
    pub j_int: Vec<usize>,
}

/// Reception rates for every node plus the end-to-end bottleneck.
#[derive(Debug, Clone, Serialize)]
pub struct RateReport {
    pub per_node: Vec<NodeRate>,
    /// `min_t R_t` over `t in 2..=T`.
    pub end_to_end: f64,
    /// Smallest `t` attaining the minimum.
    pub bottleneck: usize,
}

/// Shared evaluation state: a validated view plus the tabulated gains.
///
/// Building one evaluator and reusing it across many splits keeps grid
/// search from recomputing path-loss powers per candidate.
pub struct RateEvaluator<'a> {
    view: ViewSpec,
    config: &'a NetworkConfig,
    gains: GainMatrix,
}

impl<'a> RateEvaluator<'a> {
    pub fn new(view: ViewSpec, config: &'a NetworkConfig) -> Result<Self> {
        if view.node_count != config.node_count() {
            return Err(Error::Usage(format!(
                "view is for {} nodes but the network has {}",
                view.node_count,
                config.node_count()
            )));
        }
        let gains = build_gain_matrix(config)?;
        Ok(Self { view, config, gains })
    }

    pub fn view(&self) -> &ViewSpec {
        &self.view
    }

    pub fn config(&self) -> &NetworkConfig {
        self.config
    }

    pub fn gains(&self) -> &GainMatrix {
        &self.gains
    }

    /// Coherent amplitude of layer `j` at receiver `t`:
    /// the sum over senders of `sqrt(g[i][t] * a[i][j] * P_i)`, excluding
    /// node `t`'s own transmission.
    pub fn layer_coefficient(&self, j: usize, t: usize, split: &PowerSplit) -> f64 {
        let mut amplitude = 0.0;
        for i in senders(j, &self.view) {
            if i == t {
                continue;
            }
            let fraction = split.fraction(i, j);
            if fraction > 0.0 {
                amplitude +=
                    (self.gains.gain(i, t) * fraction * self.config.power(i)).sqrt();
            }
        }
        amplitude
    }

    /// All layer amplitudes `c[j]` at receiver `t` for `j in 1..=T-1`.
    pub fn layer_coefficients(&self, t: usize, split: &PowerSplit) -> Vec<f64> {
        (1..self.view.node_count)
            .map(|j| self.layer_coefficient(j, t, split))
            .collect()
    }

    fn signal_and_interference(&self, t: usize, split: &PowerSplit) -> (f64, f64) {
        let sig = signal_layers(t, &self.view);
        let (int_lower, int_upper) = interference_layers(t, &self.view);
        let mut signal = 0.0;
        for j in sig {
            // node t's own layers all lie in the conditioned set
            assert!(!senders(j, &self.view).contains(&t));
            let c = self.layer_coefficient(j, t, split);
            signal += c * c;
        }
        let mut interference = 0.0;
        for j in int_lower.chain(int_upper) {
            assert!(!senders(j, &self.view).contains(&t));
            let c = self.layer_coefficient(j, t, split);
            interference += c * c;
        }
        (signal, interference)
    }

    fn rate_from_decomposition(&self, t: usize, signal: f64, interference: f64) -> f64 {
        0.5 * (1.0 + signal / (self.config.noise(t) + interference)).log2()
    }

    /// Reception rate at node `t` for a validated split.
    pub fn reception_rate(&self, t: usize, split: &PowerSplit) -> Result<f64> {
        self.check_receiver(t)?;
        split.ensure_valid(&self.view)?;
        let (signal, interference) = self.signal_and_interference(t, split);
        Ok(self.rate_from_decomposition(t, signal, interference))
    }

    /// The bottleneck rate `min_t R_t` without assembling a report.
    pub fn min_rate(&self, split: &PowerSplit) -> Result<f64> {
        split.ensure_valid(&self.view)?;
        let mut min = f64::INFINITY;
        for t in 2..=self.view.node_count {
            let (signal, interference) = self.signal_and_interference(t, split);
            min = min.min(self.rate_from_decomposition(t, signal, interference));
        }
        Ok(min)
    }

    /// Full per-node report with the end-to-end minimum and its bottleneck.
    pub fn end_to_end(&self, split: &PowerSplit) -> Result<RateReport> {
        split.ensure_valid(&self.view)?;
        let mut per_node = Vec::with_capacity(self.view.node_count - 1);
        for t in 2..=self.view.node_count {
            let (signal, interference) = self.signal_and_interference(t, split);
            let (int_lower, int_upper) = interference_layers(t, &self.view);
            per_node.push(NodeRate {
                t,
                rate: self.rate_from_decomposition(t, signal, interference),
                signal_power: signal,
                interference_power: interference,
                j_sig: signal_layers(t, &self.view).collect(),
                j_cond: conditioned_layers(t, &self.view).collect(),
                j_int: int_lower.chain(int_upper).collect(),
            });
        }
        let (bottleneck, end_to_end) = per_node
            .iter()
            .map(|n| (n.t, n.rate))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("rates are finite"))
            .expect("at least one receiver");
        Ok(RateReport {
            per_node,
            end_to_end,
            bottleneck,
        })
    }

    fn check_receiver(&self, t: usize) -> Result<()> {
        if t < 2 || t > self.view.node_count {
            return Err(Error::Usage(format!(
                "receiver index {t} out of range 2..={}",
                self.view.node_count
            )));
        }
        Ok(())
    }
}

/// Reception rate at node `t` (one-shot convenience over [`RateEvaluator`]).
pub fn reception_rate(
    t: usize,
    view: &ViewSpec,
    split: &PowerSplit,
    config: &NetworkConfig,
) -> Result<f64> {
    RateEvaluator::new(*view, config)?.reception_rate(t, split)
}

/// End-to-end rate report (one-shot convenience over [`RateEvaluator`]).
pub fn end_to_end_rate(
    view: &ViewSpec,
    split: &PowerSplit,
    config: &NetworkConfig,
) -> Result<RateReport> {
    RateEvaluator::new(*view, config)?.end_to_end(split)
}

/// Outcome of the relay-order search: the winning logical order (physical
/// node ids, source first, destination last), the per-order optimization's
/// split and report, and the reordered configuration they refer to.
#[derive(Debug, Clone)]
pub struct PermutationSearch {
    pub order: Vec<usize>,
    pub split: PowerSplit,
    pub report: RateReport,
    pub config: NetworkConfig,
}

/// Reorders positions, powers and noises so that logical slot `l` holds the
/// physical node `order[l-1]`.
fn permute_config(config: &NetworkConfig, order: &[usize]) -> NetworkConfig {
    let t_count = config.node_count();
    let positions = order.iter().map(|&p| config.positions[p - 1]).collect();
    let powers = order[..t_count - 1]
        .iter()
        .map(|&p| config.powers[p - 1])
        .collect();
    let noises = order[1..]
        .iter()
        .map(|&p| config.noises[p - 2])
        .collect();
    NetworkConfig {
        positions,
        powers,
        noises,
        kappa: config.kappa,
        eta: config.eta,
    }
}

/// Exhausts every logical relay order for the full-view case, runs the
/// supplied split optimization on each reordered network, and keeps the best.
///
/// The identity order is evaluated first and wins ties; replacement requires
/// a strictly larger end-to-end rate til the search stays deterministic.
pub fn omniscient_rate_with_permutation<F>(
    config: &NetworkConfig,
    mut optimize_split: F,
) -> Result<PermutationSearch>
where
    F: FnMut(&NetworkConfig) -> Result<(PowerSplit, RateReport)>,
{
    config.validate()?;
    let t_count = config.node_count();
    let relay_count = t_count - 2;
    if relay_count > 7 {
        return Err(Error::Unsupported(format!(
            "permutation search enumerates (T-2)! relay orders; T = {t_count} \
             has {relay_count} relays, supported maximum is 7"
        )));
    }

    let relays: Vec<usize> = (2..t_count).collect();
    let mut best: Option<PermutationSearch> = None;
    // lexicographic enumeration of a sorted list starts at the identity
    for relay_order in permutations_lex(&relays) {
        let mut order = Vec::with_capacity(t_count);
        order.push(1);
        order.extend_from_slice(&relay_order);
        order.push(t_count);
        let permuted = permute_config(config, &order);
        let (split, report) = optimize_split(&permuted)?;
        let better = best
            .as_ref()
            .is_none_or(|b| report.end_to_end > b.report.end_to_end);
        if better {
            best = Some(PermutationSearch {
                order,
                split,
                report,
                config: permuted,
            });
        }
    }
    Ok(best.expect("at least the identity order is evaluated"))
}

/// All permutations of `items` in lexicographic order.
fn permutations_lex(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    use itertools::Itertools;
    items
        .iter()
        .copied()
        .permutations(items.len())
        .collect()
}
