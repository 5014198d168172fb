//! The unified k-hop rate must collapse to the two classic special cases:
//! the full-view coherent-sum formula at `k = T-1` and the single-link SINR
//! at `k = 1`. Both references below are written directly from those forms,
//! independent of the evaluator's layer-set bookkeeping.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use relayrate_core::allocation::{self, next_hop_split, ViewSpec};
use relayrate_core::rates::RateEvaluator;
use relayrate_core::NetworkConfig;

/// Full-view reference: amplitudes from all nodes behind the layer's target
/// combine coherently, layer sums indexed by receiving node, path-loss
/// constant pulled out front.
fn full_view_reference(t: usize, config: &NetworkConfig, split: &allocation::PowerSplit) -> f64 {
    let mut total = 0.0;
    for target in 2..=t {
        let mut amplitude = 0.0;
        for i in 1..target {
            let d = (config.positions[i - 1] - config.positions[t - 1]).abs();
            amplitude +=
                (d.powf(-config.eta) * split.fraction(i, target - 1) * config.power(i)).sqrt();
        }
        total += amplitude * amplitude;
    }
    0.5 * (1.0 + config.kappa / config.noise(t) * total).log2()
}

/// One-hop reference: node `t-1`'s full power is the signal; every other
/// transmitter except `t` itself is noise.
fn one_hop_reference(t: usize, config: &NetworkConfig) -> f64 {
    let gain = |i: usize| {
        let d = (config.positions[i - 1] - config.positions[t - 1]).abs();
        config.kappa * d.powf(-config.eta)
    };
    let signal = gain(t - 1) * config.power(t - 1);
    let mut interference = 0.0;
    for i in 1..config.node_count() {
        if i == t || i == t - 1 {
            continue;
        }
        interference += gain(i) * config.power(i);
    }
    0.5 * (1.0 + signal / (config.noise(t) + interference)).log2()
}

#[test]
fn full_view_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xF011);
    for _ in 0..500 {
        let node_count = rand::Rng::gen_range(&mut rng, 2..=6);
        let config = common::random_config(&mut rng, node_count);
        let view = ViewSpec::omniscient(node_count).unwrap();
        let split = allocation::random_split(&view, &mut rng);
        let evaluator = RateEvaluator::new(view, &config).unwrap();
        for t in 2..=node_count {
            let unified = evaluator.reception_rate(t, &split).unwrap();
            let reference = full_view_reference(t, &config, &split);
            assert!(
                (unified - reference).abs() < 1e-12,
                "t={t}, T={node_count}: unified {unified} vs reference {reference}"
            );
            // no residual interference under the full view
            let report = evaluator.end_to_end(&split).unwrap();
            assert!(report.per_node.iter().all(|n| n.j_int.is_empty()));
        }
    }
}

#[test]
fn one_hop_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0E07);
    for _ in 0..500 {
        let node_count = rand::Rng::gen_range(&mut rng, 2..=6);
        let config = common::random_config(&mut rng, node_count);
        let view = ViewSpec::new(1, node_count).unwrap();
        // the only feasible one-hop split puts all power on the next hop
        let split = next_hop_split(&view);
        let evaluator = RateEvaluator::new(view, &config).unwrap();
        for t in 2..=node_count {
            let unified = evaluator.reception_rate(t, &split).unwrap();
            let reference = one_hop_reference(t, &config);
            assert!(
                (unified - reference).abs() < 1e-12,
                "t={t}, T={node_count}: unified {unified} vs reference {reference}"
            );
        }
    }
}

#[test]
fn signal_power_monotone_in_contributing_transmit_power() {
    // raising P_i never lowers S_t at receivers node i serves
    let mut rng = ChaCha8Rng::seed_from_u64(0x5161);
    for _ in 0..200 {
        let (config, view, split) = common::random_instance(&mut rng);
        let evaluator = RateEvaluator::new(view, &config).unwrap();
        let before = evaluator.end_to_end(&split).unwrap();

        let i = rand::Rng::gen_range(&mut rng, 1..config.node_count());
        let mut boosted = config.clone();
        boosted.powers[i - 1] *= 4.0;
        let evaluator = RateEvaluator::new(view, &boosted).unwrap();
        let after = evaluator.end_to_end(&split).unwrap();

        for (node_before, node_after) in before.per_node.iter().zip(after.per_node.iter()) {
            let serves_signal_layer = node_before.j_sig.iter().any(|&j| {
                relayrate_core::rates::senders(j, &view).contains(&i)
                    && split.fraction(i, j) > 0.0
            });
            if serves_signal_layer {
                assert!(
                    node_after.signal_power >= node_before.signal_power,
                    "S_{} dropped from {} to {} after boosting P_{i}",
                    node_before.t,
                    node_before.signal_power,
                    node_after.signal_power
                );
            }
        }
    }
}
