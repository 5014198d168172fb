//! Scenario files: a strict JSON schema describing the network, the view
//! depth, an optional power split, an optional sweep and optimizer options.
//! Unknown fields are rejected so that typos fail loudly instead of being
//! silently ignored.

use serde::{Deserialize, Serialize};

use relayrate_core::allocation::{from_named_omniscient, from_named_twohop, PowerSplit};
use relayrate_core::NetworkConfig;
use relayrate_core::OptimizerOptions;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub positions: Vec<f64>,
    pub powers: Vec<f64>,
    pub noises: Vec<f64>,
    pub kappa: f64,
    pub eta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimizer: Option<OptimizerSpec>,
}

/// Either the canonical matrix form or a named five-node parameterization.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitSpec {
    Matrix(Vec<Vec<f64>>),
    Named(NamedSplit),
}

/// Named five-node forms. The `scheme` tag is required because the two
/// parameterizations assign `alpha` to different layers: under the full view
/// `alpha_t` is power aimed at the destination side, under two-hop it is the
/// power sent two hops ahead.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "scheme", rename_all = "snake_case")]
pub enum NamedSplit {
    Omniscient {
        alpha1: f64,
        beta1: f64,
        gamma1: f64,
        alpha2: f64,
        beta2: f64,
        alpha3: f64,
    },
    TwoHop {
        alpha1: f64,
        alpha2: f64,
        alpha3: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// Set every node's transmit power to the sweep value.
    PowerAll,
    /// Set every receiver's noise variance to the sweep value.
    NoiseAll,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: SweepParameter,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolution: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub permute: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_floor: Option<f64>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text)
            .map_err(|err| CliError::usage(format!("invalid scenario: {err}")))
    }

    /// Built-in scenarios. Both sweep total transmit power over a log range
    /// spanning low and high SNR.
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let positions = match name {
            "equal_spacing_5" => vec![0.0, 1.0, 2.0, 3.0, 4.0],
            // node 2 pulled toward the source: d_12 = 0.5, d_23 = 1.5,
            // unit spacing beyond
            "node2_close_5" => vec![0.0, 0.5, 2.0, 3.0, 4.0],
            other => {
                return Err(CliError::usage(format!(
                    "unknown preset '{other}'; available: equal_spacing_5, node2_close_5"
                )))
            }
        };
        Ok(Self {
            positions,
            powers: vec![1.0; 4],
            noises: vec![1.0; 4],
            kappa: 1.0,
            eta: 2.0,
            k: None,
            split: None,
            sweep: Some(SweepSpec {
                parameter: SweepParameter::PowerAll,
                values: vec![0.01, 0.1, 1.0, 10.0],
            }),
            optimizer: None,
        })
    }

    pub fn network(&self) -> Result<NetworkConfig, CliError> {
        NetworkConfig::new(
            self.positions.clone(),
            self.powers.clone(),
            self.noises.clone(),
            self.kappa,
            self.eta,
        )
        .map_err(CliError::from)
    }

    /// Materializes the split, if any, into the canonical matrix form.
    pub fn power_split(&self) -> Result<Option<PowerSplit>, CliError> {
        let Some(spec) = &self.split else {
            return Ok(None);
        };
        let split = match spec {
            SplitSpec::Matrix(rows) => PowerSplit::from_matrix(rows.clone()),
            SplitSpec::Named(named) => {
                if self.positions.len() != 5 {
                    return Err(CliError::usage(format!(
                        "named splits are defined for 5 nodes, scenario has {}",
                        self.positions.len()
                    )));
                }
                match *named {
                    NamedSplit::Omniscient {
                        alpha1,
                        beta1,
                        gamma1,
                        alpha2,
                        beta2,
                        alpha3,
                    } => from_named_omniscient(alpha1, beta1, gamma1, alpha2, beta2, alpha3)?,
                    NamedSplit::TwoHop {
                        alpha1,
                        alpha2,
                        alpha3,
                    } => from_named_twohop(alpha1, alpha2, alpha3)?,
                }
            }
        };
        Ok(Some(split))
    }

    /// Optimizer options with scenario values layered over the defaults.
    pub fn optimizer_options(&self) -> OptimizerOptions {
        let mut options = OptimizerOptions::default();
        if let Some(spec) = &self.optimizer {
            if let Some(resolution) = spec.resolution {
                options.resolution = resolution;
            }
            if let Some(budget) = spec.budget {
                options.budget = budget;
            }
            if let Some(permute) = spec.permute {
                options.permute = permute;
            }
            if let Some(step0) = spec.step0 {
                options.step0 = step0;
            }
            if let Some(step_floor) = spec.step_floor {
                options.step_floor = step_floor;
            }
        }
        options
    }

    /// A copy with the swept parameter set to `value`.
    pub fn at_sweep_value(&self, parameter: SweepParameter, value: f64) -> Self {
        let mut scenario = self.clone();
        match parameter {
            SweepParameter::PowerAll => {
                scenario.powers = vec![value; scenario.powers.len()];
            }
            SweepParameter::NoiseAll => {
                scenario.noises = vec![value; scenario.noises.len()];
            }
        }
        scenario
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strict_parsing_rejects_unknown_fields() {
        let text = r#"{
            "positions": [0, 1], "powers": [1], "noises": [1],
            "kappa": 1, "eta": 2, "bogus": 3
        }"#;
        assert!(Scenario::from_json(text).is_err());
    }

    #[test]
    fn named_split_requires_scheme() {
        let text = r#"{
            "positions": [0, 1, 2, 3, 4], "powers": [1, 1, 1, 1],
            "noises": [1, 1, 1, 1], "kappa": 1, "eta": 2,
            "split": {"named": {"alpha1": 0.1, "alpha2": 0.2, "alpha3": 0.3}}
        }"#;
        assert!(Scenario::from_json(text).is_err());
    }

    #[test]
    fn two_hop_named_split_parses() {
        let text = r#"{
            "positions": [0, 1, 2, 3, 4], "powers": [1, 1, 1, 1],
            "noises": [1, 1, 1, 1], "kappa": 1, "eta": 2,
            "split": {"named": {"scheme": "two_hop", "alpha1": 0.1, "alpha2": 0.2, "alpha3": 0.3}}
        }"#;
        let scenario = Scenario::from_json(text).unwrap();
        let split = scenario.power_split().unwrap().unwrap();
        assert_eq!(split.fraction(1, 2), 0.1);
        assert_eq!(split.fraction(3, 4), 0.3);
    }

    #[test]
    fn presets_have_stated_geometry() {
        let equal = Scenario::preset("equal_spacing_5").unwrap();
        assert_eq!(equal.positions, vec![0.0, 1.0, 2.0, 3.0, 4.0]);
        let close = Scenario::preset("node2_close_5").unwrap();
        assert_eq!(close.positions[1] - close.positions[0], 0.5);
        assert_eq!(close.positions[2] - close.positions[1], 1.5);
        assert!(Scenario::preset("nope").is_err());
    }

    #[test]
    fn matrix_split_roundtrip() {
        let text = r#"{
            "positions": [0, 1, 2], "powers": [1, 1], "noises": [1, 1],
            "kappa": 1, "eta": 2, "k": 2,
            "split": {"matrix": [[0.5, 0.5], [0.0, 1.0]]}
        }"#;
        let scenario = Scenario::from_json(text).unwrap();
        let split = scenario.power_split().unwrap().unwrap();
        assert_eq!(split.fraction(1, 2), 0.5);
    }
}
