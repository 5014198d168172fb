//! Max-min power-split optimization.
//!
//! The objective `min_t R_t` is non-concave under myopic interference, so the
//! ground truth is an exhaustive grid over each node's window simplex, with a
//! derivative-free compass search for refinement. Candidate evaluation is
//! pure and runs in parallel; the reduction is deterministic (higher rate
//! wins, exact ties go to the lexicographically smallest flattened split).

use rayon::prelude::*;
use serde::Serialize;

use crate::allocation::{next_hop_split, uniform_split, PowerSplit, ViewSpec};
use crate::channel::NetworkConfig;
use crate::error::{Error, Result};
use crate::rates::{omniscient_rate_with_permutation, RateEvaluator, RateReport};

/// Minimum rate gain for a compass move (or a grid refinement) to count as
/// an improvement.
pub const IMPROVEMENT_THRESHOLD: f64 = 1e-12;

/// Search strategy recorded on a result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Grid,
    Refined,
    GridThenRefined,
}

/// Tunables for [`optimize`]; `Default` matches the documented CLI defaults.
#[derive(Debug, Clone)]
pub struct OptimizerOptions {
    /// Grid step fraction; must divide 1.
    pub resolution: f64,
    /// Maximum number of grid evaluations tolerated before erroring out.
    pub budget: u64,
    /// Exhaust relay orders (full-view only).
    pub permute: bool,
    /// Initial compass step.
    pub step0: f64,
    /// Compass step at which refinement stops.
    pub step_floor: f64,
    /// Record (iteration, best-rate) pairs while refining.
    pub record_trace: bool,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            resolution: 0.1,
            budget: 100_000_000,
            permute: false,
            step0: 0.25,
            step_floor: 1e-4,
            record_trace: false,
        }
    }
}

/// Best split found, its recomputed rate report, and search metadata.
#[derive(Debug, Clone, Serialize)]
pub struct OptimizationResult {
    pub best_split: PowerSplit,
    pub report: RateReport,
    pub method: Method,
    pub evaluations: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<(u64, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<f64>,
    /// Logical node order when the relay-order search ran (identity = `1..=T`).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permutation: Option<Vec<usize>>,
    /// The reordered network the split and report refer to, when a
    /// non-identity order won.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub permuted_config: Option<NetworkConfig>,
}

/// Compares splits by flattened fraction vectors (total order; all finite).
fn lex_order(a: &PowerSplit, b: &PowerSplit) -> std::cmp::Ordering {
    let fa = a.flattened();
    let fb = b.flattened();
    for (x, y) in fa.iter().zip(fb.iter()) {
        match x.partial_cmp(y).expect("fractions are finite") {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    fa.len().cmp(&fb.len())
}

/// All compositions of `total` into `parts` non-negative integers, in
/// lexicographic order.
fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut tail in compositions(total - first, parts - 1) {
            let mut row = Vec::with_capacity(parts);
            row.push(first);
            row.append(&mut tail);
            out.push(row);
        }
    }
    out
}

fn grid_steps(resolution: f64) -> Result<u32> {
    if !(resolution.is_finite() && resolution > 0.0 && resolution <= 1.0) {
        return Err(Error::Usage(format!(
            "grid resolution must lie in (0, 1], got {resolution}"
        )));
    }
    let steps = (1.0 / resolution).round();
    if ((steps * resolution) - 1.0).abs() > 1e-9 {
        return Err(Error::Usage(format!(
            "grid resolution {resolution} does not divide 1"
        )));
    }
    Ok(steps as u32)
}

/// Exhaustively maximizes the end-to-end rate over all window allocations
/// with fractions on the grid `{0, r, 2r, ..., 1}` summing to exactly 1
/// per node.
pub fn grid_search(
    view: &ViewSpec,
    config: &NetworkConfig,
    resolution: f64,
) -> Result<OptimizationResult> {
    grid_search_with_budget(view, config, resolution, OptimizerOptions::default().budget)
}

/// `C(total + parts - 1, parts - 1)`, the number of compositions, saturating.
fn composition_count(total: u32, parts: usize) -> u128 {
    let n = u128::from(total) + parts as u128 - 1;
    let k = (parts as u128 - 1).min(n - (parts as u128 - 1));
    let mut count: u128 = 1;
    for step in 1..=k {
        count = match count.checked_mul(n - k + step) {
            Some(value) => value / step,
            None => return u128::MAX,
        };
    }
    count
}

pub fn grid_search_with_budget(
    view: &ViewSpec,
    config: &NetworkConfig,
    resolution: f64,
    budget: u64,
) -> Result<OptimizationResult> {
    let steps = grid_steps(resolution)?;
    let evaluator = RateEvaluator::new(*view, config)?;
    let node_count = view.node_count;

    // the candidate count is known combinatorially; enforce the budget
    // before materializing any composition list
    let mut required: u128 = 1;
    for i in 1..node_count {
        let width = view.window(i).count();
        required = required.saturating_mul(composition_count(steps, width));
    }
    if required > u128::from(budget) {
        return Err(Error::BudgetExceeded { required, budget });
    }

    // per-node candidate rows over the window simplex, in lexicographic order
    let per_node: Vec<Vec<Vec<f64>>> = (1..node_count)
        .map(|i| {
            let width = view.window(i).count();
            compositions(steps, width)
                .into_iter()
                .map(|counts| {
                    counts
                        .iter()
                        .map(|&c| f64::from(c) / f64::from(steps))
                        .collect()
                })
                .collect()
        })
        .collect();

    let total: u128 = per_node.iter().map(|rows| rows.len() as u128).product();
    debug_assert_eq!(total, required);
    let total = total as u64;

    // node 1 varies slowest, so the flat candidate index enumerates flattened
    // split vectors in lexicographic order; ties resolve to the smallest index
    let fill = |split: &mut PowerSplit, candidate: u64| {
        let mut remainder = candidate;
        for i in (1..node_count).rev() {
            let rows = &per_node[i - 1];
            let pick = (remainder % rows.len() as u64) as usize;
            remainder /= rows.len() as u64;
            for (offset, j) in view.window(i).enumerate() {
                split.set_fraction(i, j, rows[pick][offset]);
            }
        }
    };

    let zero = PowerSplit::from_matrix(vec![vec![0.0; node_count - 1]; node_count - 1]);
    let (best_rate, best_index) = (0..total)
        .into_par_iter()
        .map_init(
            || zero.clone(),
            |scratch, candidate| {
                fill(scratch, candidate);
                let rate = evaluator
                    .min_rate(scratch)
                    .expect("grid candidates are feasible by construction");
                (rate, candidate)
            },
        )
        .reduce(
            || (f64::NEG_INFINITY, u64::MAX),
            |a, b| {
                if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                    b
                } else {
                    a
                }
            },
        );
    debug_assert!(best_rate.is_finite());

    let mut best_split = zero;
    fill(&mut best_split, best_index);
    let report = evaluator.end_to_end(&best_split)?;
    Ok(OptimizationResult {
        best_split,
        report,
        method: Method::Grid,
        evaluations: total,
        trace: None,
        grid_resolution: Some(resolution),
        permutation: None,
        permuted_config: None,
    })
}

/// Free coordinates of the remainder parameterization: every window slot
/// except the first; the first slot absorbs `1 - sum(free)`.
fn free_coordinates(view: &ViewSpec) -> Vec<(usize, usize)> {
    let mut coords = Vec::new();
    for i in 1..view.node_count {
        for j in view.window(i).skip(1) {
            coords.push((i, j));
        }
    }
    coords
}

fn rebalance_first_slot(split: &mut PowerSplit, view: &ViewSpec, node: usize) {
    let window: Vec<usize> = view.window(node).collect();
    let free_sum: f64 = window[1..]
        .iter()
        .map(|&j| split.fraction(node, j))
        .sum();
    split.set_fraction(node, window[0], (1.0 - free_sum).max(0.0));
}

/// Derivative-free compass search from `start`, over each node's free window
/// coordinates, clamped to the feasible simplex. The step halves whenever no
/// single-coordinate move improves the min-rate by more than
/// [`IMPROVEMENT_THRESHOLD`], and the search stops below `step_floor`.
pub fn refine(
    start: &PowerSplit,
    view: &ViewSpec,
    config: &NetworkConfig,
    step0: f64,
    step_floor: f64,
) -> Result<OptimizationResult> {
    refine_with_trace(start, view, config, step0, step_floor, false)
}

pub fn refine_with_trace(
    start: &PowerSplit,
    view: &ViewSpec,
    config: &NetworkConfig,
    step0: f64,
    step_floor: f64,
    record_trace: bool,
) -> Result<OptimizationResult> {
    if !(step_floor > 0.0 && step_floor < step0 && step0 <= 0.5) {
        return Err(Error::Usage(format!(
            "need 0 < step_floor < step0 <= 0.5, got step0 = {step0}, \
             step_floor = {step_floor}"
        )));
    }
    let evaluator = RateEvaluator::new(*view, config)?;
    start.ensure_valid(view)?;

    let coords = free_coordinates(view);
    let mut current = start.clone();
    let mut current_rate = evaluator.min_rate(&current)?;
    let mut evaluations = 1u64;
    let mut step = step0;
    let mut iteration = 0u64;
    let mut trace = record_trace.then(|| vec![(0, current_rate)]);

    while step >= step_floor {
        // evaluate every +/- single-coordinate move; accept the best strict
        // improvement (first such move wins exact ties)
        let mut best_move: Option<(PowerSplit, f64)> = None;
        for &(node, layer) in &coords {
            for direction in [1.0, -1.0] {
                let window: Vec<usize> = view.window(node).collect();
                let others: f64 = window[1..]
                    .iter()
                    .filter(|&&j| j != layer)
                    .map(|&j| current.fraction(node, j))
                    .sum();
                let headroom = (1.0 - others).max(0.0);
                let proposed = (current.fraction(node, layer) + direction * step)
                    .clamp(0.0, headroom);
                if proposed == current.fraction(node, layer) {
                    continue;
                }
                let mut candidate = current.clone();
                candidate.set_fraction(node, layer, proposed);
                rebalance_first_slot(&mut candidate, view, node);
                let rate = evaluator.min_rate(&candidate)?;
                evaluations += 1;
                if rate - current_rate > IMPROVEMENT_THRESHOLD
                    && best_move.as_ref().is_none_or(|(_, r)| rate > *r)
                {
                    best_move = Some((candidate, rate));
                }
            }
        }
        match best_move {
            Some((candidate, rate)) => {
                current = candidate;
                current_rate = rate;
                iteration += 1;
                if let Some(trace) = trace.as_mut() {
                    trace.push((iteration, current_rate));
                }
            }
            None => step *= 0.5,
        }
    }

    let report = evaluator.end_to_end(&current)?;
    Ok(OptimizationResult {
        best_split: current,
        report,
        method: Method::Refined,
        evaluations,
        trace,
        grid_resolution: None,
        permutation: None,
        permuted_config: None,
    })
}

/// Multi-start optimization: the uniform split, the next-hop-only split and
/// the coarse grid optimum are each refined, and the best result wins. With
/// `options.permute` set and a full view, every relay order is tried through
/// the same per-order multi-start.
pub fn optimize(
    view: &ViewSpec,
    config: &NetworkConfig,
    options: &OptimizerOptions,
) -> Result<OptimizationResult> {
    if options.permute && !view.is_omniscient() {
        log::warn!(
            "relay-order search applies to the full view only; ignoring it at k = {}",
            view.k
        );
    }
    if options.permute && view.is_omniscient() {
        let mut evaluations = 0u64;
        let inner = OptimizerOptions {
            permute: false,
            ..options.clone()
        };
        let search = omniscient_rate_with_permutation(config, |permuted| {
            let result = optimize(view, permuted, &inner)?;
            evaluations += result.evaluations;
            Ok((result.best_split, result.report))
        })?;
        let identity: Vec<usize> = (1..=view.node_count).collect();
        let non_identity = search.order != identity;
        return Ok(OptimizationResult {
            best_split: search.split,
            report: search.report,
            method: Method::GridThenRefined,
            evaluations,
            trace: None,
            grid_resolution: Some(options.resolution),
            permutation: Some(search.order),
            permuted_config: non_identity.then_some(search.config),
        });
    }

    let grid = grid_search_with_budget(view, config, options.resolution, options.budget)?;
    let mut evaluations = grid.evaluations;
    let starts = [
        uniform_split(view),
        next_hop_split(view),
        grid.best_split.clone(),
    ];

    let mut best: Option<OptimizationResult> = None;
    for start in &starts {
        let refined = refine_with_trace(
            start,
            view,
            config,
            options.step0,
            options.step_floor,
            options.record_trace,
        )?;
        evaluations += refined.evaluations;
        let replace = match &best {
            None => true,
            Some(current) => {
                refined.report.end_to_end > current.report.end_to_end
                    || (refined.report.end_to_end == current.report.end_to_end
                        && lex_order(&refined.best_split, &current.best_split)
                            == std::cmp::Ordering::Less)
            }
        };
        if replace {
            best = Some(refined);
        }
    }
    let mut best = best.expect("three starts were evaluated");

    // refinement never loses to the grid it started from, but keep the
    // stronger of the two under the deterministic tie-break anyway
    if grid.report.end_to_end > best.report.end_to_end {
        best = grid;
    }
    best.method = Method::GridThenRefined;
    best.evaluations = evaluations;
    best.grid_resolution = Some(options.resolution);
    // the invariant is a recomputed report, not one cached from the search
    let evaluator = RateEvaluator::new(*view, config)?;
    best.report = evaluator.end_to_end(&best.best_split)?;
    Ok(best)
}
