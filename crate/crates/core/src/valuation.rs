//! Amygdala model: a label-to-value table (lateral nucleus) and a
//! threshold gate on that value (central nucleus).

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn unit(what: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::OutOfUnitRange { what, value })
    }
}

/// Learned or preset value per label, with a default for unseen labels.
#[derive(Clone, Debug, PartialEq)]
pub struct ValueMemory {
    table: BTreeMap<String, f64>,
    default: f64,
    alpha: f64,
}

impl ValueMemory {
    pub fn new(default: f64, alpha: f64) -> Result<Self> {
        unit("default value", default)?;
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "learning rate must lie in (0, 1], got {alpha}"
            )));
        }
        Ok(ValueMemory {
            table: BTreeMap::new(),
            default,
            alpha,
        })
    }

    pub fn with_value(mut self, label: impl Into<String>, value: f64) -> Result<Self> {
        self.set(label, value)?;
        Ok(self)
    }

    pub fn set(&mut self, label: impl Into<String>, value: f64) -> Result<()> {
        self.table.insert(label.into(), unit("stored value", value)?);
        Ok(())
    }

    pub fn evaluate(&self, label: &str) -> f64 {
        self.table.get(label).copied().unwrap_or(self.default)
    }

    /// Rescorla-Wagner step `V += alpha * (outcome - V)`.
    pub fn reinforce(&mut self, label: &str, outcome: f64) -> Result<f64> {
        unit("outcome", outcome)?;
        let v = self.evaluate(label);
        let updated = (v + self.alpha * (outcome - v)).clamp(0.0, 1.0);
        self.table.insert(label.to_owned(), updated);
        Ok(updated)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn default_value(&self) -> f64 {
        self.default
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, f64)> {
        self.table.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateDecision {
    pub label: usize,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
}

/// Inclusive threshold test. A threshold above 1 is accepted and closes the
/// gate for every value.
pub fn gate(value: f64, threshold: f64) -> Result<bool> {
    unit("value", value)?;
    if threshold.is_nan() || threshold < 0.0 {
        return Err(Error::OutOfUnitRange {
            what: "threshold",
            value: threshold,
        });
    }
    Ok(value >= threshold)
}

/// Amygdala block of the scenario configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AmygdalaConfig {
    pub values: BTreeMap<String, f64>,
    #[serde(default)]
    pub default: f64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_alpha() -> f64 {
    0.5
}

fn default_threshold() -> f64 {
    0.5
}

impl Default for AmygdalaConfig {
    fn default() -> Self {
        AmygdalaConfig {
            values: BTreeMap::from([("person".to_owned(), 1.0)]),
            default: 0.0,
            alpha: default_alpha(),
            threshold: default_threshold(),
        }
    }
}

/// Value table plus gate threshold, owned by a single episode.
#[derive(Clone, Debug)]
pub struct Amygdala {
    memory: ValueMemory,
    threshold: f64,
}

impl Amygdala {
    pub fn from_config(config: &AmygdalaConfig) -> Result<Self> {
        let mut memory = ValueMemory::new(config.default, config.alpha)?;
        for (label, v) in &config.values {
            memory.set(label.clone(), *v)?;
        }
        gate(0.0, config.threshold)?;
        Ok(Amygdala {
            memory,
            threshold: config.threshold,
        })
    }

    pub fn memory(&self) -> &ValueMemory {
        &self.memory
    }

    pub fn memory_mut(&mut self) -> &mut ValueMemory {
        &mut self.memory
    }

    pub fn judge(&self, label_index: usize, label: &str) -> Result<GateDecision> {
        let value = self.memory.evaluate(label);
        Ok(GateDecision {
            label: label_index,
            value,
            threshold: self.threshold,
            passed: gate(value, self.threshold)?,
        })
    }
}
