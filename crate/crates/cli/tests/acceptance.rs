//! Acceptance suite: one test per release criterion, each printing a
//! PASS line when it holds. Run with
//! `cargo test -p relayrate-cli --test acceptance -- --nocapture`.

use std::process::Command;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use relayrate_cli::scenario::{Scenario, SweepParameter};
use relayrate_core::allocation::{
    self, named_omniscient_parameters, next_hop_split, PowerSplit, ViewSpec,
};
use relayrate_core::mi_oracle::{conditional_mi, monte_carlo_mi, JointGaussianModel};
use relayrate_core::optimizer::{grid_search, optimize, OptimizerOptions};
use relayrate_core::pipeline::{
    build_schedule, effective_rate_factor, verify_schedule, BlockWindow,
};
use relayrate_core::rates::{conditioned_layers, signal_layers, RateEvaluator};
use relayrate_core::NetworkConfig;

// ---------------------------------------------------------------------------
// randomized-instance generator shared by criteria 1-3 and 11
// ---------------------------------------------------------------------------

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

/// Distinct positions in [0, 10]; a 0.5 m minimum separation keeps gains
/// bounded so the comparison probes indexing, not cancellation limits.
fn random_positions(rng: &mut ChaCha8Rng, count: usize) -> Vec<f64> {
    loop {
        let mut positions: Vec<f64> = (0..count).map(|_| rng.gen_range(0.0..=10.0)).collect();
        let mut sorted = positions.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if sorted.windows(2).all(|w| w[1] - w[0] >= 0.5) {
            positions.shuffle(rng);
            return positions;
        }
    }
}

fn random_config(rng: &mut ChaCha8Rng, node_count: usize) -> NetworkConfig {
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

fn random_instance(rng: &mut ChaCha8Rng) -> (NetworkConfig, ViewSpec, PowerSplit) {
    let node_count = rng.gen_range(2..=6);
    let k = rng.gen_range(1..node_count);
    let view = ViewSpec::new(k, node_count).unwrap();
    let config = random_config(rng, node_count);
    let split = allocation::random_split(&view, rng);
    (config, view, split)
}

fn preset_network(name: &str, power: f64) -> NetworkConfig {
    Scenario::preset(name)
        .unwrap()
        .at_sweep_value(SweepParameter::PowerAll, power)
        .network()
        .unwrap()
}

fn optimized_rate(name: &str, power: f64, k: usize) -> f64 {
    let config = preset_network(name, power);
    let view = ViewSpec::new(k, 5).unwrap();
    optimize(&view, &config, &OptimizerOptions::default())
        .unwrap()
        .report
        .end_to_end
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_oracle_equivalence() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let (config, view, split) = random_instance(&mut rng);
        let evaluator = RateEvaluator::new(view, &config).unwrap();
        for t in 2..=view.node_count {
            let closed = evaluator.reception_rate(t, &split).unwrap();
            let coefficients = evaluator.layer_coefficients(t, &split);
            let model = JointGaussianModel::new(coefficients, config.noise(t)).unwrap();
            let sig: Vec<usize> = signal_layers(t, &view).collect();
            let cond: Vec<usize> = conditioned_layers(t, &view).collect();
            let oracle = conditional_mi(&sig, &cond, &model).unwrap();
            let relative = (closed - oracle).abs() / closed.max(1e-12);
            worst = worst.max(relative);
            assert!(
                relative < 1e-9,
                "closed form {closed} vs oracle {oracle} (rel {relative:e}) at t={t}, \
                 k={}, T={}",
                view.k,
                view.node_count
            );
        }
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 30.0,
        "runtime target missed: {elapsed:?}"
    );
    println!(
        "ACCEPTANCE 1 oracle-equivalence: PASS (1000 instances, max rel err {worst:.3e}, {elapsed:.2?})"
    );
}

/// Literal full-view reference: layer sums indexed by receiving node,
/// coherent amplitudes inside, path-loss constant out front.
fn full_view_reference(t: usize, config: &NetworkConfig, split: &PowerSplit) -> f64 {
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

#[test]
fn criterion_02_full_view_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let node_count = rng.gen_range(2..=6);
        let config = random_config(&mut rng, node_count);
        let view = ViewSpec::omniscient(node_count).unwrap();
        let split = allocation::random_split(&view, &mut rng);
        let evaluator = RateEvaluator::new(view, &config).unwrap();
        for t in 2..=node_count {
            let unified = evaluator.reception_rate(t, &split).unwrap();
            let reference = full_view_reference(t, &config, &split);
            let difference = (unified - reference).abs();
            worst = worst.max(difference);
            assert!(
                difference < 1e-12,
                "unified {unified} vs literal {reference} at t={t}, T={node_count}"
            );
        }
    }
    println!("ACCEPTANCE 2 full-view-reduction: PASS (500 instances, max abs err {worst:.3e})");
}

/// Literal one-hop reference: previous node's full power over everything
/// else as noise, the receiver's own transmission cancelled.
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
fn criterion_03_one_hop_reduction() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let node_count = rng.gen_range(2..=6);
        let config = random_config(&mut rng, node_count);
        let view = ViewSpec::new(1, node_count).unwrap();
        let split = next_hop_split(&view);
        let evaluator = RateEvaluator::new(view, &config).unwrap();
        for t in 2..=node_count {
            let unified = evaluator.reception_rate(t, &split).unwrap();
            let reference = one_hop_reference(t, &config);
            let difference = (unified - reference).abs();
            worst = worst.max(difference);
            assert!(
                difference < 1e-12,
                "unified {unified} vs literal {reference} at t={t}, T={node_count}"
            );
        }
    }
    println!("ACCEPTANCE 3 one-hop-reduction: PASS (500 instances, max abs err {worst:.3e})");
}

#[test]
fn criterion_04_grid_nesting() {
    for preset in ["equal_spacing_5", "node2_close_5"] {
        let config = preset_network(preset, 1.0);
        let mut previous = f64::NEG_INFINITY;
        for k in 1..=4 {
            let view = ViewSpec::new(k, 5).unwrap();
            let rate = grid_search(&view, &config, 0.1)
                .unwrap()
                .report
                .end_to_end;
            assert!(
                rate >= previous,
                "{preset}: grid rate dropped from {previous} to {rate} at k={k}"
            );
            previous = rate;
        }
    }
    println!("ACCEPTANCE 4 k-nesting: PASS (grid resolution 0.1, both presets, exact)");
}

#[test]
fn criterion_05_equal_spacing_zero_splits() {
    for power in [0.1, 1.0, 10.0] {
        let config = preset_network("equal_spacing_5", power);
        let view = ViewSpec::new(4, 5).unwrap();
        let result = optimize(&view, &config, &OptimizerOptions::default()).unwrap();
        let (alpha1, beta1, gamma1, _, beta2, _) =
            named_omniscient_parameters(&result.best_split).unwrap();
        for (name, value) in [
            ("alpha1", alpha1),
            ("beta1", beta1),
            ("gamma1", gamma1),
            ("beta2", beta2),
        ] {
            assert!(
                value <= 0.05,
                "equal spacing, P/N = {power}: expected {name} near zero, got {value}"
            );
        }
    }
    println!("ACCEPTANCE 5 equal-spacing finding: PASS (alpha1, beta1, gamma1, beta2 <= 0.05)");
}

#[test]
fn criterion_06_node2_close_zero_splits() {
    for power in [0.1, 1.0, 10.0] {
        let config = preset_network("node2_close_5", power);
        let view = ViewSpec::new(4, 5).unwrap();
        let result = optimize(&view, &config, &OptimizerOptions::default()).unwrap();
        let (alpha1, beta1, _, alpha2, beta2, _) =
            named_omniscient_parameters(&result.best_split).unwrap();
        for (name, value) in [
            ("alpha1", alpha1),
            ("beta1", beta1),
            ("alpha2", alpha2),
            ("beta2", beta2),
        ] {
            assert!(
                value <= 0.05,
                "node 2 close, P/N = {power}: expected {name} near zero, got {value}"
            );
        }
    }
    println!("ACCEPTANCE 6 node-2-close finding: PASS (alpha1, beta1, alpha2, beta2 <= 0.05)");
}

#[test]
fn criterion_07_low_snr_closeness() {
    let gap = |power: f64| {
        let omniscient = optimized_rate("node2_close_5", power, 4);
        let twohop = optimized_rate("node2_close_5", power, 2);
        (omniscient - twohop) / omniscient
    };
    let low = gap(0.01);
    let high = gap(10.0);
    assert!(low < high, "low-SNR gap {low} not below high-SNR gap {high}");
    assert!(low < 0.05, "low-SNR gap {low} not under 5%");
    println!(
        "ACCEPTANCE 7 low-SNR closeness: PASS (gap {:.4}% at P/N=0.01 vs {:.2}% at P/N=10)",
        low * 100.0,
        high * 100.0
    );
}

#[test]
fn criterion_08_one_hop_penalty() {
    let one_hop = optimized_rate("node2_close_5", 1.0, 1);
    let two_hop = optimized_rate("node2_close_5", 1.0, 2);
    let omniscient = optimized_rate("node2_close_5", 1.0, 4);
    let gain = two_hop - one_hop;
    let headroom = omniscient - one_hop;
    assert!(
        gain > 0.25 * headroom,
        "two-hop gain {gain} below a quarter of the full-view headroom {headroom}"
    );
    println!(
        "ACCEPTANCE 8 one-hop penalty: PASS (two-hop recovers {:.0}% of the full-view headroom)",
        100.0 * gain / headroom
    );
}

#[test]
fn criterion_09_pipeline_correctness() {
    for node_count in 2..=8 {
        for k in 1..node_count {
            for messages in 1..=50 {
                let schedule = build_schedule(node_count, k, messages).unwrap();
                let violations = verify_schedule(&schedule);
                assert!(
                    violations.is_empty(),
                    "violations at T={node_count}, k={k}, B={messages}: {violations:?}"
                );
            }
        }
    }

    assert_eq!(effective_rate_factor(5, 100), 100.0 / 103.0);

    // two-hop decode windows follow the two-block rule
    let schedule = build_schedule(6, 2, 30).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for _ in 0..20 {
        let t = rng.gen_range(2..=6);
        let m = rng.gen_range(2..=30);
        let window = schedule.decode_windows[t - 2][m - 1];
        assert_eq!(
            window,
            BlockWindow {
                from: m + t - 3,
                to: m + t - 2
            },
            "two-hop window at t={t}, m={m}"
        );
    }
    println!(
        "ACCEPTANCE 9 pipeline: PASS (exhaustive T<=8, k<T, B<=50; factor 100/103 exact; \
         two-block windows)"
    );
}

#[test]
fn criterion_10_byte_determinism() {
    // vary the worker count so different parallel schedules must agree
    let run = |args: &[&str], threads: &str| {
        let output = Command::new(env!("CARGO_BIN_EXE_relayrate"))
            .env("RAYON_NUM_THREADS", threads)
            .args(args)
            .output()
            .expect("binary runs");
        assert!(
            output.status.success(),
            "command failed: {:?}",
            String::from_utf8_lossy(&output.stderr)
        );
        output.stdout
    };
    let sweep_args = ["sweep", "--preset", "node2_close_5"];
    assert_eq!(
        run(&sweep_args, "1"),
        run(&sweep_args, "4"),
        "sweep bytes differ across thread counts"
    );
    let verify_args = [
        "verify",
        "--preset",
        "equal_spacing_5",
        "--k",
        "2",
        "--trials",
        "300",
        "--seed",
        "11",
    ];
    assert_eq!(
        run(&verify_args, "1"),
        run(&verify_args, "4"),
        "verify bytes differ across thread counts"
    );
    println!(
        "ACCEPTANCE 10 determinism: PASS (sweep and verify byte-identical across runs \
         and worker counts)"
    );
}

#[test]
fn criterion_11_monte_carlo_agreement() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let samples = 1_000_000usize;
    let mut worst_pull = 0.0f64;
    for trial in 0..50 {
        let (config, view, split) = random_instance(&mut rng);
        let evaluator = RateEvaluator::new(view, &config).unwrap();
        let t = rng.gen_range(2..=view.node_count);
        let coefficients = evaluator.layer_coefficients(t, &split);
        let model = JointGaussianModel::new(coefficients, config.noise(t)).unwrap();
        let sig: Vec<usize> = signal_layers(t, &view).collect();
        let cond: Vec<usize> = conditioned_layers(t, &view).collect();

        let analytic = conditional_mi(&sig, &cond, &model).unwrap();
        let estimate = monte_carlo_mi(&sig, &cond, &model, samples, 5_000 + trial).unwrap();

        // delta-method standard error of the Gaussian residual-variance-ratio
        // estimator: SE = sqrt(2 (1 - r^2) / n) / (2 ln 2), r = 2^(-2 I)
        let ratio = (2.0f64).powf(-2.0 * analytic);
        let se = (2.0 * (1.0 - ratio * ratio) / samples as f64).sqrt() / (2.0 * 2.0f64.ln());
        let pull = if se > 0.0 {
            (estimate - analytic).abs() / se
        } else {
            0.0
        };
        worst_pull = worst_pull.max(pull);
        assert!(
            (estimate - analytic).abs() <= 3.0 * se,
            "trial {trial}: MC {estimate} vs analytic {analytic}, |diff| = {} > 3 SE = {}",
            (estimate - analytic).abs(),
            3.0 * se
        );
    }
    let elapsed = started.elapsed();
    assert!(
        elapsed.as_secs_f64() < 120.0,
        "runtime target missed: {elapsed:?}"
    );
    println!(
        "ACCEPTANCE 11 Monte Carlo agreement: PASS (50 instances at 1e6 samples, \
         worst pull {worst_pull:.2} SE, {elapsed:.2?})"
    );
}
