//! Per-node power splits over superposition layers.
//!
//! Layer `U_j` (for `j in 1..=T-1`) carries node `j`'s freshest decoded
//! message; nodes behind `j` repeat `U_j` so their amplitudes combine
//! coherently at node `j+1`. Under a `k`-hop view, node `i` may place power
//! only on layers `i..=min(i+k-1, T-1)`, and always spends its full power
//! budget: each row of the split matrix sums to 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute tolerance on row sums. Splits are constructed, not measured.
pub const ROW_SUM_TOLERANCE: f64 = 1e-12;

/// The cooperation window: how many nodes ahead each node may address.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewSpec {
    /// Hop count, `1 <= k <= T-1`. `k = T-1` is the omniscient case.
    pub k: usize,
    /// Total node count `T`.
    pub node_count: usize,
}

impl ViewSpec {
    pub fn new(k: usize, node_count: usize) -> Result<Self> {
        if node_count < 2 {
            return Err(Error::Usage(format!(
                "need at least 2 nodes, got {node_count}"
            )));
        }
        if k < 1 || k > node_count - 1 {
            return Err(Error::Usage(format!(
                "hop count k = {k} outside 1..={} for {node_count} nodes",
                node_count - 1
            )));
        }
        Ok(Self { k, node_count })
    }

    /// The unconstrained view: every node addresses all nodes in front.
    pub fn omniscient(node_count: usize) -> Result<Self> {
        Self::new(node_count.saturating_sub(1).max(1), node_count)
    }

    /// Layers node `i` may carry: `i..=min(i+k-1, T-1)`.
    pub fn window(&self, i: usize) -> std::ops::RangeInclusive<usize> {
        debug_assert!(i >= 1 && i < self.node_count);
        i..=(i + self.k - 1).min(self.node_count - 1)
    }

    /// Is this the `k = T-1` case?
    pub fn is_omniscient(&self) -> bool {
        self.k == self.node_count - 1
    }
}

/// One invariant failure found by [`validate`].
#[derive(Debug, Clone, PartialEq)]
pub enum SplitViolation {
    Shape { rows: usize, expected: usize },
    Negative { node: usize, layer: usize, value: f64 },
    OutsideWindow { node: usize, layer: usize, value: f64 },
    RowSum { node: usize, sum: f64 },
}

impl std::fmt::Display for SplitViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitViolation::Shape { rows, expected } => {
                write!(f, "split has {rows} rows, expected {expected} square")
            }
            SplitViolation::Negative { node, layer, value } => {
                write!(f, "node {node} layer {layer}: negative fraction {value}")
            }
            SplitViolation::OutsideWindow { node, layer, value } => write!(
                f,
                "node {node} places fraction {value} on layer {layer} outside its view window"
            ),
            SplitViolation::RowSum { node, sum } => {
                write!(f, "node {node} power fractions sum to {sum}, expected 1")
            }
        }
    }
}

/// Fractions `a[i][j]` of node `i`'s power placed on layer `U_j`.
///
/// Stored as a dense `(T-1) x (T-1)` row-major matrix, which is also the
/// serialized "matrix" form. Named alpha/beta/gamma parameterizations are
/// converters onto this one representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerSplit {
    rows: Vec<Vec<f64>>,
}

impl PowerSplit {
    /// Wraps a raw `(T-1) x (T-1)` fraction matrix without validating it.
    pub fn from_matrix(rows: Vec<Vec<f64>>) -> Self {
        Self { rows }
    }

    /// Fraction of node `i`'s power on layer `j` (both 1-based).
    pub fn fraction(&self, i: usize, j: usize) -> f64 {
        self.rows[i - 1][j - 1]
    }

    pub fn set_fraction(&mut self, i: usize, j: usize, value: f64) {
        self.rows[i - 1][j - 1] = value;
    }

    /// Number of transmitting nodes `T-1`.
    pub fn transmitter_count(&self) -> usize {
        self.rows.len()
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Concatenated rows, used for deterministic lexicographic tie-breaks.
    pub fn flattened(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    /// Shorthand returning `Err` on the first violation.
    pub fn ensure_valid(&self, view: &ViewSpec) -> Result<()> {
        let violations = validate(self, view);
        if violations.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(
                violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            ))
        }
    }
}

/// Spreads each node's power equally over its view window.
pub fn uniform_split(view: &ViewSpec) -> PowerSplit {
    let n = view.node_count - 1;
    let mut rows = vec![vec![0.0; n]; n];
    for i in 1..=n {
        let window = view.window(i);
        let width = window.end() - window.start() + 1;
        for j in window {
            rows[i - 1][j - 1] = 1.0 / width as f64;
        }
    }
    PowerSplit { rows }
}

/// Puts every node's full power on its own layer (the next-hop-only split).
/// Feasible under every view since layer `i` is always in node `i`'s window.
pub fn next_hop_split(view: &ViewSpec) -> PowerSplit {
    let n = view.node_count - 1;
    let mut rows = vec![vec![0.0; n]; n];
    for i in 1..=n {
        rows[i - 1][i - 1] = 1.0;
    }
    PowerSplit { rows }
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(value.is_finite() && (0.0..=1.0).contains(&value)) {
        return Err(Error::Validation(format!(
            "{name} = {value} outside [0, 1]"
        )));
    }
    Ok(())
}

fn check_group(names: &str, sum: f64) -> Result<()> {
    // One ulp of slack for sums of exact literals; anything larger is a
    // genuine simplex violation.
    if sum > 1.0 + ROW_SUM_TOLERANCE {
        return Err(Error::Validation(format!("{names} = {sum} exceeds 1")));
    }
    Ok(())
}

/// Builds the five-node full-view split from its named parameters.
///
/// Node 1 keeps `1 - alpha1 - beta1 - gamma1` on its own layer and spends
/// `gamma1`, `beta1`, `alpha1` on layers 2, 3, 4 (aimed at nodes 3, 4, 5);
/// node 2 likewise with `beta2`, `alpha2`; node 3 with `alpha3`; node 4 has
/// a single slot.
pub fn from_named_omniscient(
    alpha1: f64,
    beta1: f64,
    gamma1: f64,
    alpha2: f64,
    beta2: f64,
    alpha3: f64,
) -> Result<PowerSplit> {
    for (name, value) in [
        ("alpha1", alpha1),
        ("beta1", beta1),
        ("gamma1", gamma1),
        ("alpha2", alpha2),
        ("beta2", beta2),
        ("alpha3", alpha3),
    ] {
        check_unit(name, value)?;
    }
    check_group("alpha1 + beta1 + gamma1", alpha1 + beta1 + gamma1)?;
    check_group("alpha2 + beta2", alpha2 + beta2)?;

    let rows = vec![
        vec![
            (1.0 - alpha1 - beta1 - gamma1).max(0.0),
            gamma1,
            beta1,
            alpha1,
        ],
        vec![0.0, (1.0 - alpha2 - beta2).max(0.0), beta2, alpha2],
        vec![0.0, 0.0, 1.0 - alpha3, alpha3],
        vec![0.0, 0.0, 0.0, 1.0],
    ];
    Ok(PowerSplit { rows })
}

/// Builds the five-node two-hop split: node `t` spends `alpha_t` on the layer
/// two hops ahead and the remainder on its own layer; node 4 has one slot.
pub fn from_named_twohop(alpha1: f64, alpha2: f64, alpha3: f64) -> Result<PowerSplit> {
    for (name, value) in [("alpha1", alpha1), ("alpha2", alpha2), ("alpha3", alpha3)] {
        check_unit(name, value)?;
    }
    let mut rows = vec![vec![0.0; 4]; 4];
    for (t, alpha) in [(1, alpha1), (2, alpha2), (3, alpha3)] {
        rows[t - 1][t - 1] = 1.0 - alpha;
        rows[t - 1][t] = alpha;
    }
    rows[3][3] = 1.0;
    Ok(PowerSplit { rows })
}

/// Reads the named five-node full-view parameters back out of a split.
/// Returns `(alpha1, beta1, gamma1, alpha2, beta2, alpha3)`.
pub fn named_omniscient_parameters(split: &PowerSplit) -> Result<(f64, f64, f64, f64, f64, f64)> {
    if split.transmitter_count() != 4 {
        return Err(Error::Usage(format!(
            "named parameters are defined for 5 nodes, split has {}",
            split.transmitter_count() + 1
        )));
    }
    Ok((
        split.fraction(1, 4),
        split.fraction(1, 3),
        split.fraction(1, 2),
        split.fraction(2, 4),
        split.fraction(2, 3),
        split.fraction(3, 4),
    ))
}

/// Reports every violated invariant; an empty list means the split is valid
/// under `view`.
pub fn validate(split: &PowerSplit, view: &ViewSpec) -> Vec<SplitViolation> {
    let n = view.node_count - 1;
    let mut violations = Vec::new();
    if split.rows.len() != n || split.rows.iter().any(|r| r.len() != n) {
        violations.push(SplitViolation::Shape {
            rows: split.rows.len(),
            expected: n,
        });
        return violations;
    }
    for i in 1..=n {
        let window = view.window(i);
        let mut sum = 0.0;
        for j in 1..=n {
            let value = split.fraction(i, j);
            sum += value;
            if value < 0.0 || value.is_nan() {
                violations.push(SplitViolation::Negative {
                    node: i,
                    layer: j,
                    value,
                });
            } else if value > 0.0 && !window.contains(&j) {
                violations.push(SplitViolation::OutsideWindow {
                    node: i,
                    layer: j,
                    value,
                });
            }
        }
        if (sum - 1.0).abs() > ROW_SUM_TOLERANCE {
            violations.push(SplitViolation::RowSum { node: i, sum });
        }
    }
    violations
}

/// Draws a random feasible split: each node's window fractions are sampled
/// as normalized Gamma(2, 1) weights, which keeps entries away from zero
/// while exercising the whole simplex.
pub fn random_split<R: Rng>(view: &ViewSpec, rng: &mut R) -> PowerSplit {
    let n = view.node_count - 1;
    let mut rows = vec![vec![0.0; n]; n];
    for i in 1..=n {
        let window: Vec<usize> = view.window(i).collect();
        let weights: Vec<f64> = window
            .iter()
            .map(|_| {
                // sum of two Exp(1) draws = Gamma(2, 1)
                let u1: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                let u2: f64 = rng.gen::<f64>().max(f64::MIN_POSITIVE);
                -u1.ln() - u2.ln()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        for (j, w) in window.iter().zip(&weights) {
            rows[i - 1][j - 1] = w / total;
        }
        // force the row to sum to exactly its normalized value budget
        let sum: f64 = rows[i - 1].iter().sum();
        rows[i - 1][window[0] - 1] += 1.0 - sum;
    }
    PowerSplit { rows }
}
