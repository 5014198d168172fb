//! Block-Markov transmission schedule and windowed decoding, generalized to
//! a `k`-hop view.
//!
//! `B` messages cross the chain in `B + T - 2` blocks. In block `b`, node `i`
//! sends, for each layer `j` in its window, the message `b - j + 1` (or a
//! null filler when that index falls outside `1..=B`). Node `t` decodes
//! message `m` from the `k` consecutive blocks ending at `m + t - 2`, one
//! block before it first forwards `m` itself.
//!
//! The two-hop case reproduces the classic two-block decode window; the
//! general-`k` window is the natural extrapolation of the same per-node
//! one-block forwarding delay and is validated against the two-hop shape.
//! The simulator is symbolic: indices only, no channel noise.

use serde::Serialize;

use crate::allocation::ViewSpec;
use crate::error::{Error, Result};

/// Null message marker used during pipeline fill and drain.
pub const NULL_MESSAGE: usize = 0;

/// One `(layer, message)` transmission component within a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LayerMessage {
    /// Layer index `j`.
    pub layer: usize,
    /// Message index `m` in `1..=B`, or [`NULL_MESSAGE`] for filler.
    pub message: usize,
}

/// Inclusive block interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BlockWindow {
    pub from: usize,
    pub to: usize,
}

/// Complete transmission and decoding timetable.
#[derive(Debug, Clone, Serialize)]
pub struct BlockSchedule {
    /// Node count `T`.
    pub node_count: usize,
    /// View depth `k`.
    pub k: usize,
    /// Number of source messages `B`.
    pub message_count: usize,
    /// `B + T - 2`.
    pub total_blocks: usize,
    /// `tx[b-1][i-1]`: what node `i` sends in block `b`, one entry per
    /// window layer.
    pub tx: Vec<Vec<Vec<LayerMessage>>>,
    /// `decode_windows[t-2][m-1]`: blocks over which node `t` decodes
    /// message `m`.
    pub decode_windows: Vec<Vec<BlockWindow>>,
}

/// A consistency failure found by [`verify_schedule`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ScheduleViolation {
    Shape(String),
    Coherence {
        block: usize,
        node: usize,
        layer: usize,
        found: usize,
        expected: usize,
    },
    Causality {
        node: usize,
        message: usize,
        transmit_block: usize,
        decode_end: usize,
    },
    Drain {
        message: usize,
        needed_block: usize,
        available_blocks: usize,
    },
    Window {
        t: usize,
        message: usize,
        found: BlockWindow,
        expected: BlockWindow,
    },
}

impl std::fmt::Display for ScheduleViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ScheduleViolation::Shape(detail) => write!(f, "shape: {detail}"),
            ScheduleViolation::Coherence {
                block,
                node,
                layer,
                found,
                expected,
            } => write!(
                f,
                "coherence: block {block}, node {node}, layer {layer} carries \
                 message {found}, expected {expected}"
            ),
            ScheduleViolation::Causality {
                node,
                message,
                transmit_block,
                decode_end,
            } => write!(
                f,
                "causality: node {node} transmits message {message} in block \
                 {transmit_block} but finishes decoding it only in block {decode_end}"
            ),
            ScheduleViolation::Drain {
                message,
                needed_block,
                available_blocks,
            } => write!(
                f,
                "drain: message {message} reaches the destination in block \
                 {needed_block} but the schedule has {available_blocks} blocks"
            ),
            ScheduleViolation::Window {
                t,
                message,
                found,
                expected,
            } => write!(
                f,
                "decode window: node {t}, message {message} uses blocks \
                 {}..={}, expected {}..={}",
                found.from, found.to, expected.from, expected.to
            ),
        }
    }
}

fn check_parameters(node_count: usize, k: usize, message_count: usize) -> Result<ViewSpec> {
    if message_count < 1 {
        return Err(Error::Usage(format!(
            "need at least one message, got {message_count}"
        )));
    }
    ViewSpec::new(k, node_count)
}

fn expected_message(block: usize, layer: usize, message_count: usize) -> usize {
    // message index b - j + 1, or the null filler outside 1..=B
    let m = block as i64 - layer as i64 + 1;
    if m >= 1 && m <= message_count as i64 {
        m as usize
    } else {
        NULL_MESSAGE
    }
}

fn expected_window(
    t: usize,
    m: usize,
    k: usize,
    total_blocks: usize,
) -> BlockWindow {
    let to = (m + t - 2).min(total_blocks);
    let from = (m + t - 1).saturating_sub(k).max(1);
    BlockWindow { from, to }
}

/// Builds the full timetable for `T` nodes, view depth `k` and `B` messages.
pub fn build_schedule(node_count: usize, k: usize, message_count: usize) -> Result<BlockSchedule> {
    let view = check_parameters(node_count, k, message_count)?;
    let total_blocks = message_count + node_count - 2;

    let tx = (1..=total_blocks)
        .map(|block| {
            (1..node_count)
                .map(|node| {
                    view.window(node)
                        .map(|layer| LayerMessage {
                            layer,
                            message: expected_message(block, layer, message_count),
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    let decode_windows = (2..=node_count)
        .map(|t| {
            (1..=message_count)
                .map(|m| expected_window(t, m, k, total_blocks))
                .collect()
        })
        .collect();

    Ok(BlockSchedule {
        node_count,
        k,
        message_count,
        total_blocks,
        tx,
        decode_windows,
    })
}

/// Checks coherence, causality and drain on the stored timetable, returning
/// every violation found (an empty list means the schedule is consistent).
pub fn verify_schedule(schedule: &BlockSchedule) -> Vec<ScheduleViolation> {
    let mut violations = Vec::new();
    let t_count = schedule.node_count;
    let b_count = schedule.message_count;
    let view = match check_parameters(t_count, schedule.k, b_count) {
        Ok(view) => view,
        Err(err) => {
            violations.push(ScheduleViolation::Shape(err.to_string()));
            return violations;
        }
    };

    let available_blocks = schedule.tx.len();
    if schedule.total_blocks != b_count + t_count - 2 {
        violations.push(ScheduleViolation::Shape(format!(
            "total_blocks = {} but B + T - 2 = {}",
            schedule.total_blocks,
            b_count + t_count - 2
        )));
    }
    if schedule.decode_windows.len() != t_count - 1
        || schedule.decode_windows.iter().any(|w| w.len() != b_count)
    {
        violations.push(ScheduleViolation::Shape(
            "decode window table is not (T-1) x B".into(),
        ));
        return violations;
    }

    // coherence: every stored transmission carries the message its block and
    // layer dictate, and each node sends exactly its window
    for (block_idx, block) in schedule.tx.iter().enumerate() {
        let block_no = block_idx + 1;
        if block.len() != t_count - 1 {
            violations.push(ScheduleViolation::Shape(format!(
                "block {block_no} lists {} transmitters, expected {}",
                block.len(),
                t_count - 1
            )));
            continue;
        }
        for (node_idx, entries) in block.iter().enumerate() {
            let node = node_idx + 1;
            let window: Vec<usize> = view.window(node).collect();
            let layers: Vec<usize> = entries.iter().map(|e| e.layer).collect();
            if layers != window {
                violations.push(ScheduleViolation::Shape(format!(
                    "block {block_no}, node {node} sends layers {layers:?}, \
                     expected window {window:?}"
                )));
                continue;
            }
            for entry in entries {
                let expected = expected_message(block_no, entry.layer, b_count);
                if entry.message != expected {
                    violations.push(ScheduleViolation::Coherence {
                        block: block_no,
                        node,
                        layer: entry.layer,
                        found: entry.message,
                        expected,
                    });
                }
            }
        }
    }

    // decode windows match the k-block rule
    for t in 2..=t_count {
        for m in 1..=b_count {
            let found = schedule.decode_windows[t - 2][m - 1];
            let expected = expected_window(t, m, schedule.k, schedule.total_blocks);
            if found != expected {
                violations.push(ScheduleViolation::Window {
                    t,
                    message: m,
                    found,
                    expected,
                });
            }
        }
    }

    // causality: a relay only forwards a message after its decode window
    for node in 2..t_count {
        for m in 1..=b_count {
            let first_tx = schedule
                .tx
                .iter()
                .enumerate()
                .find(|(_, block)| {
                    block
                        .get(node - 1)
                        .is_some_and(|entries| entries.iter().any(|e| e.message == m))
                })
                .map(|(idx, _)| idx + 1);
            let decode_end = schedule.decode_windows[node - 2][m - 1].to;
            if let Some(block) = first_tx {
                if block <= decode_end {
                    violations.push(ScheduleViolation::Causality {
                        node,
                        message: m,
                        transmit_block: block,
                        decode_end,
                    });
                }
            }
        }
    }

    // drain: the destination's window for every message fits the schedule
    for m in 1..=b_count {
        let needed = schedule.decode_windows[t_count - 2][m - 1].to;
        if needed > available_blocks {
            violations.push(ScheduleViolation::Drain {
                message: m,
                needed_block: needed,
                available_blocks,
            });
        }
    }

    violations
}

/// Pipeline fill/drain overhead: `B / (B + T - 2)`, increasing in `B` with
/// limit 1.
pub fn effective_rate_factor(node_count: usize, message_count: usize) -> f64 {
    assert!(node_count >= 2, "need at least 2 nodes");
    assert!(message_count >= 1, "need at least one message");
    message_count as f64 / (message_count + node_count - 2) as f64
}

fn render_entry(entry: &LayerMessage) -> String {
    if entry.message == NULL_MESSAGE {
        format!("u_{}(∅)", entry.layer)
    } else {
        format!("u_{}(w^{})", entry.layer, entry.message)
    }
}

/// Renders blocks `from..=to` as a fixed-width table: one row per
/// transmitting node, one column per block, cells listing the layer
/// components. The output is stable across runs.
pub fn render_schedule(schedule: &BlockSchedule, from: usize, to: usize) -> Result<String> {
    if from < 1 || to > schedule.total_blocks || from > to {
        return Err(Error::Usage(format!(
            "block range {from}..={to} outside 1..={}",
            schedule.total_blocks
        )));
    }

    let blocks: Vec<usize> = (from..=to).collect();
    let mut header: Vec<String> = vec!["node".into()];
    header.extend(blocks.iter().map(|b| format!("block {b}")));

    let mut rows: Vec<Vec<String>> = Vec::new();
    for node in 1..schedule.node_count {
        let mut row = vec![format!("{node}")];
        for &b in &blocks {
            let cell = schedule.tx[b - 1][node - 1]
                .iter()
                .map(render_entry)
                .collect::<Vec<_>>()
                .join("+");
            row.push(cell);
        }
        rows.push(row);
    }

    let columns = header.len();
    let width = |col: usize| {
        rows.iter()
            .map(|r| r[col].chars().count())
            .chain(std::iter::once(header[col].chars().count()))
            .max()
            .unwrap_or(0)
    };
    let widths: Vec<usize> = (0..columns).map(width).collect();

    let format_row = |row: &[String]| {
        row.iter()
            .enumerate()
            .map(|(col, cell)| {
                let pad = widths[col] - cell.chars().count();
                format!("{cell}{}", " ".repeat(pad))
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };

    let mut out = String::new();
    out.push_str(&format_row(&header));
    out.push('\n');
    for row in &rows {
        out.push_str(&format_row(row));
        out.push('\n');
    }
    Ok(out)
}
