//! Subcommand implementations. Every command assembles its complete output
//! string before writing anything, so a failing run never leaves partial
//! output behind.

use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use relayrate_core::allocation::{self, named_omniscient_parameters, PowerSplit, ViewSpec};
use relayrate_core::mi_oracle::{conditional_mi, JointGaussianModel};
use relayrate_core::optimizer::{self, OptimizationResult, OptimizerOptions};
use relayrate_core::pipeline;
use relayrate_core::rates::{
    conditioned_layers, signal_layers, RateEvaluator, RateReport,
};
use relayrate_core::NetworkConfig;

use crate::format::{csv_line, sig12};
use crate::scenario::{Scenario, SplitSpec};
use crate::{CliError, OptimizeArgs, OutputFormat, ScenarioArgs, ScheduleArgs, VerifyArgs};

/// Verification passes when the closed form and the oracle agree to this
/// relative tolerance.
const VERIFY_TOLERANCE: f64 = 1e-9;

fn load_scenario(args: &ScenarioArgs) -> Result<Scenario, CliError> {
    match (&args.scenario, &args.preset) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|err| {
                CliError::usage(format!("cannot read scenario {}: {err}", path.display()))
            })?;
            Scenario::from_json(&text)
        }
        (None, Some(name)) => Scenario::preset(name),
        (None, None) => Err(CliError::usage(
            "either --scenario <path> or --preset <name> is required",
        )),
        (Some(_), Some(_)) => unreachable!("clap rejects the combination"),
    }
}

fn resolve_view(args: &ScenarioArgs, scenario: &Scenario) -> Result<ViewSpec, CliError> {
    let k = args
        .k
        .or(scenario.k)
        .ok_or_else(|| CliError::usage("view depth required: pass --k or set \"k\" in the scenario"))?;
    ViewSpec::new(k, scenario.positions.len()).map_err(CliError::from)
}

fn emit(args: &ScenarioArgs, output: String) -> Result<(), CliError> {
    match &args.out {
        Some(path) => fs::write(path, output)?,
        None => print!("{output}"),
    }
    Ok(())
}

fn rate_csv(report: &RateReport) -> String {
    let mut out = String::from("t,rate,signal_power,interference_power,bottleneck\n");
    for node in &report.per_node {
        out.push_str(&csv_line([
            node.t.to_string(),
            sig12(node.rate),
            sig12(node.signal_power),
            sig12(node.interference_power),
            usize::from(node.t == report.bottleneck).to_string(),
        ]));
    }
    out
}

#[derive(Serialize)]
struct RateOutput<'a> {
    k: usize,
    report: &'a RateReport,
}

pub fn rate(args: &ScenarioArgs) -> Result<(), CliError> {
    let scenario = load_scenario(args)?;
    let view = resolve_view(args, &scenario)?;
    let config = scenario.network()?;
    let split = scenario
        .power_split()?
        .ok_or_else(|| CliError::usage("the rate command needs a \"split\" in the scenario"))?;
    let report = relayrate_core::rates::end_to_end_rate(&view, &split, &config)?;

    let output = match args.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => rate_csv(&report),
        OutputFormat::Json => to_pretty_json(&RateOutput {
            k: view.k,
            report: &report,
        })?,
        OutputFormat::Text => {
            return Err(CliError::usage("rate emits csv or json, not text"))
        }
    };
    emit(args, output)
}

#[derive(Serialize)]
struct NamedParameters {
    alpha1: f64,
    beta1: f64,
    gamma1: f64,
    alpha2: f64,
    beta2: f64,
    alpha3: f64,
}

#[derive(Serialize)]
struct OptimizeOutput<'a> {
    k: usize,
    #[serde(flatten)]
    result: &'a OptimizationResult,
    #[serde(skip_serializing_if = "Option::is_none")]
    named: Option<NamedParameters>,
}

fn optimizer_options(args: &OptimizeArgs, scenario: &Scenario) -> OptimizerOptions {
    let mut options = scenario.optimizer_options();
    if let Some(resolution) = args.resolution {
        options.resolution = resolution;
    }
    if let Some(budget) = args.budget {
        options.budget = budget;
    }
    if args.permute {
        options.permute = true;
    }
    options
}

fn named_view(view: &ViewSpec, result: &OptimizationResult) -> Option<NamedParameters> {
    if view.node_count != 5 || !view.is_omniscient() {
        return None;
    }
    named_omniscient_parameters(&result.best_split)
        .ok()
        .map(|(alpha1, beta1, gamma1, alpha2, beta2, alpha3)| NamedParameters {
            alpha1,
            beta1,
            gamma1,
            alpha2,
            beta2,
            alpha3,
        })
}

fn method_name(method: optimizer::Method) -> &'static str {
    match method {
        optimizer::Method::Grid => "grid",
        optimizer::Method::Refined => "refined",
        optimizer::Method::GridThenRefined => "grid_then_refined",
    }
}

fn optimize_csv(result: &OptimizationResult) -> String {
    let layer_count = result.best_split.transmitter_count();
    let mut header = vec!["i".to_string()];
    header.extend((1..=layer_count).map(|j| format!("a_{j}")));
    header.extend(
        [
            "t",
            "rate",
            "signal_power",
            "interference_power",
            "bottleneck",
            "end_to_end",
            "method",
            "evaluations",
        ]
        .map(str::to_string),
    );
    let mut out = csv_line(header);
    for (row, node) in result.report.per_node.iter().enumerate() {
        let i = row + 1;
        let mut fields = vec![i.to_string()];
        fields.extend((1..=layer_count).map(|j| sig12(result.best_split.fraction(i, j))));
        fields.extend([
            node.t.to_string(),
            sig12(node.rate),
            sig12(node.signal_power),
            sig12(node.interference_power),
            usize::from(node.t == result.report.bottleneck).to_string(),
            sig12(result.report.end_to_end),
            method_name(result.method).to_string(),
            result.evaluations.to_string(),
        ]);
        out.push_str(&csv_line(fields));
    }
    out
}

pub fn optimize(args: &OptimizeArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let view = resolve_view(&args.scenario, &scenario)?;
    let config = scenario.network()?;
    let options = optimizer_options(args, &scenario);
    let result = optimizer::optimize(&view, &config, &options)?;

    let output = match args.scenario.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => optimize_csv(&result),
        OutputFormat::Json => to_pretty_json(&OptimizeOutput {
            k: view.k,
            named: named_view(&view, &result),
            result: &result,
        })?,
        OutputFormat::Text => {
            return Err(CliError::usage("optimize emits csv or json, not text"))
        }
    };
    emit(&args.scenario, output)
}

fn depth_label(k: usize, node_count: usize) -> String {
    if k == node_count - 1 {
        "omniscient".to_string()
    } else {
        format!("k{k}")
    }
}

#[derive(Serialize)]
struct SweepCell {
    k: usize,
    label: String,
    rate: f64,
    bottleneck: usize,
}

#[derive(Serialize)]
struct SweepRow {
    value: f64,
    results: Vec<SweepCell>,
}

pub fn sweep(args: &OptimizeArgs) -> Result<(), CliError> {
    let scenario = load_scenario(&args.scenario)?;
    let sweep_spec = scenario
        .sweep
        .clone()
        .ok_or_else(|| CliError::usage("the sweep command needs a \"sweep\" in the scenario"))?;
    if sweep_spec.values.is_empty() {
        return Err(CliError::usage("sweep values list is empty"));
    }
    let node_count = scenario.positions.len();
    if node_count < 2 {
        return Err(CliError::usage("need at least 2 nodes"));
    }

    let mut rows = Vec::with_capacity(sweep_spec.values.len());
    for &value in &sweep_spec.values {
        let point = scenario.at_sweep_value(sweep_spec.parameter, value);
        let config = point.network()?;
        let options = optimizer_options(args, &point);
        let mut results = Vec::with_capacity(node_count - 1);
        for k in 1..node_count {
            let view = ViewSpec::new(k, node_count)?;
            let result = optimizer::optimize(&view, &config, &options)?;
            results.push(SweepCell {
                k,
                label: depth_label(k, node_count),
                rate: result.report.end_to_end,
                bottleneck: result.report.bottleneck,
            });
        }
        rows.push(SweepRow { value, results });
    }

    let output = match args.scenario.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut header = vec!["value".to_string()];
            header.extend((1..node_count).map(|k| format!("rate_{}", depth_label(k, node_count))));
            header.extend(
                (1..node_count).map(|k| format!("bottleneck_{}", depth_label(k, node_count))),
            );
            let mut out = csv_line(header);
            for row in &rows {
                let mut fields = vec![sig12(row.value)];
                fields.extend(row.results.iter().map(|cell| sig12(cell.rate)));
                fields.extend(row.results.iter().map(|cell| cell.bottleneck.to_string()));
                out.push_str(&csv_line(fields));
            }
            out
        }
        OutputFormat::Json => to_pretty_json(&rows)?,
        OutputFormat::Text => {
            return Err(CliError::usage("sweep emits csv or json, not text"))
        }
    };
    emit(&args.scenario, output)
}

pub fn schedule(args: &ScheduleArgs) -> Result<(), CliError> {
    let schedule = pipeline::build_schedule(args.nodes, args.k, args.blocks)?;
    let from = args.from.unwrap_or(1);
    let to = args.to.unwrap_or(schedule.total_blocks);

    let output = match args.format.unwrap_or(OutputFormat::Text) {
        OutputFormat::Text => pipeline::render_schedule(&schedule, from, to)?,
        OutputFormat::Json => to_pretty_json(&schedule)?,
        OutputFormat::Csv => {
            return Err(CliError::usage("schedule emits text or json, not csv"))
        }
    };
    match &args.out {
        Some(path) => fs::write(path, output)?,
        None => print!("{output}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyOutput {
    trials: usize,
    seed: u64,
    k: usize,
    max_relative_error: f64,
    worst_trial: usize,
    worst_node: usize,
    status: &'static str,
}

struct WorstCase {
    relative_error: f64,
    trial: usize,
    node: usize,
    split: PowerSplit,
}

fn verify_trial(
    evaluator: &RateEvaluator,
    config: &NetworkConfig,
    view: &ViewSpec,
    split: &PowerSplit,
) -> Result<(f64, usize), CliError> {
    let mut worst = (0.0f64, 2usize);
    for t in 2..=view.node_count {
        let closed = evaluator.reception_rate(t, split)?;
        let coefficients = evaluator.layer_coefficients(t, split);
        let model = JointGaussianModel::new(coefficients, config.noise(t))?;
        let sig: Vec<usize> = signal_layers(t, view).collect();
        let cond: Vec<usize> = conditioned_layers(t, view).collect();
        let oracle = conditional_mi(&sig, &cond, &model)?;
        let relative = (closed - oracle).abs() / closed.max(1e-12);
        if relative > worst.0 {
            worst = (relative, t);
        }
    }
    Ok(worst)
}

pub fn verify(args: &VerifyArgs) -> Result<(), CliError> {
    if args.trials < 1 {
        return Err(CliError::usage("at least one verification trial is required"));
    }
    let scenario = load_scenario(&args.scenario)?;
    let view = resolve_view(&args.scenario, &scenario)?;
    let config = scenario.network()?;
    let evaluator = RateEvaluator::new(view, &config)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    let mut worst = WorstCase {
        relative_error: -1.0,
        trial: 0,
        node: 2,
        split: allocation::uniform_split(&view),
    };
    for trial in 0..args.trials {
        // trial 0 re-checks the scenario's own split when one is given
        let split = match (trial, scenario.power_split()?) {
            (0, Some(split)) => split,
            _ => allocation::random_split(&view, &mut rng),
        };
        let (relative, node) = verify_trial(&evaluator, &config, &view, &split)?;
        if relative > worst.relative_error {
            worst = WorstCase {
                relative_error: relative,
                trial,
                node,
                split,
            };
        }
    }

    let passed = worst.relative_error < VERIFY_TOLERANCE;
    let report = VerifyOutput {
        trials: args.trials,
        seed: args.seed,
        k: view.k,
        max_relative_error: worst.relative_error.max(0.0),
        worst_trial: worst.trial,
        worst_node: worst.node,
        status: if passed { "PASS" } else { "FAIL" },
    };
    let output = match args.scenario.format.unwrap_or(OutputFormat::Text) {
        OutputFormat::Text => format!(
            "trials: {}\nseed: {}\nk: {}\nmax_relative_error: {}\nworst_trial: {}\nworst_node: {}\nstatus: {}\n",
            report.trials,
            report.seed,
            report.k,
            sig12(report.max_relative_error),
            report.worst_trial,
            report.worst_node,
            report.status,
        ),
        OutputFormat::Json => to_pretty_json(&report)?,
        OutputFormat::Csv => {
            return Err(CliError::usage("verify emits text or json, not csv"))
        }
    };
    emit(&args.scenario, output)?;

    if !passed {
        // dump the failing instance as a runnable scenario
        let failing = Scenario {
            positions: scenario.positions.clone(),
            powers: scenario.powers.clone(),
            noises: scenario.noises.clone(),
            kappa: scenario.kappa,
            eta: scenario.eta,
            k: Some(view.k),
            split: Some(SplitSpec::Matrix(worst.split.matrix().to_vec())),
            sweep: None,
            optimizer: None,
        };
        let path = "verify_failure.json";
        fs::write(path, to_pretty_json(&failing)?)?;
        return Err(CliError::verification(format!(
            "closed form and oracle disagree: relative error {} at trial {}, node {}; \
             failing instance written to {path}",
            sig12(worst.relative_error),
            worst.trial,
            worst.node
        )));
    }
    Ok(())
}

fn to_pretty_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|err| CliError::usage(format!("serialization failed: {err}")))?;
    text.push('\n');
    Ok(text)
}
