use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::community::Method;
use crate::error::{Error, Result};
use crate::graph::AttributeSchema;
use crate::netgen::{GeneratorConfig, OpennessMatrix, OpennessOverride};
use crate::rng::{derive_seed, Purpose};

/// Name accepted by [`ExperimentConfig::load`] for the built-in configuration.
pub const DEFAULT_CONFIG_NAME: &str = "default";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct GeneratorSettings {
    pub nodes: usize,
    pub links_per_newcomer: usize,
    pub seed_clique: usize,
    pub internal_edges_per_step: usize,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        GeneratorSettings {
            nodes: 500,
            links_per_newcomer: 3,
            seed_clique: 3,
            internal_edges_per_step: 1,
        }
    }
}

/// A named set of openness overrides; unlisted pairs stay at 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HomophilyCondition {
    pub name: String,
    pub openness: Vec<OpennessOverride>,
}

impl HomophilyCondition {
    /// Sets the openness of every pair of distinct `values` to `lambda`.
    pub fn uniform_cross(name: &str, values: &[&str], lambda: f64) -> Self {
        let mut openness = Vec::new();
        for (i, a) in values.iter().enumerate() {
            for b in &values[i + 1..] {
                openness.push(OpennessOverride(a.to_string(), b.to_string(), lambda));
            }
        }
        HomophilyCondition {
            name: name.to_string(),
            openness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct UntrustedSpec {
    pub attribute: String,
    pub value: String,
    pub count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct DiffusionGrid {
    /// Community method whose ACL is attacked.
    pub method: Method,
    pub beta: f64,
    pub seed_counts: Vec<usize>,
    pub removal_fractions: Vec<f64>,
    pub replications: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ExperimentConfig {
    pub master_seed: u64,
    pub output_dir: String,
    pub schema: AttributeSchema,
    pub generator: GeneratorSettings,
    pub homophily_conditions: Vec<HomophilyCondition>,
    pub untrusted: UntrustedSpec,
    pub methods: Vec<Method>,
    pub diffusion: DiffusionGrid,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let workplaces = ["Starbucks", "Google", "Ikea"];
        ExperimentConfig {
            master_seed: 42,
            output_dir: "results".into(),
            schema: AttributeSchema::default_scenario(),
            generator: GeneratorSettings::default(),
            homophily_conditions: vec![
                HomophilyCondition::uniform_cross("H1", &workplaces, 0.7),
                HomophilyCondition::uniform_cross("H2", &workplaces, 0.3),
                HomophilyCondition::uniform_cross("H3", &workplaces, 0.01),
            ],
            untrusted: UntrustedSpec {
                attribute: "workplace".into(),
                value: "Ikea".into(),
                count: 10,
            },
            methods: Method::ALL.to_vec(),
            diffusion: DiffusionGrid {
                method: Method::LeadingEigenvector,
                beta: 0.6,
                seed_counts: vec![75, 150],
                removal_fractions: vec![0.0, 1.0 / 3.0, 2.0 / 3.0],
                replications: 100,
            },
        }
    }
}

impl ExperimentConfig {
    /// Reads a JSON config file, or returns the built-in config for
    /// [`DEFAULT_CONFIG_NAME`].
    pub fn load(source: &str) -> Result<Self> {
        if source == DEFAULT_CONFIG_NAME {
            return Ok(Self::default());
        }
        let text = std::fs::read_to_string(Path::new(source))
            .map_err(|e| Error::InvalidConfig(format!("cannot read `{source}`: {e}")))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(Error::from_json_parse)
    }

    pub fn to_json_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// Applies `key=value` overrides. Keys are dotted camelCase paths
    /// (`diffusion.beta`, `homophilyConditions.0.name`); values are parsed as
    /// JSON, falling back to a plain string.
    pub fn with_overrides<S: AsRef<str>>(&self, overrides: &[S]) -> Result<Self> {
        if overrides.is_empty() {
            return Ok(self.clone());
        }
        let mut doc = serde_json::to_value(self)?;
        for raw in overrides {
            let raw = raw.as_ref();
            let (key, value) = raw
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("override `{raw}` is not KEY=VALUE")))?;
            let value = serde_json::from_str(value).unwrap_or_else(|_| Value::String(value.to_string()));
            set_path(&mut doc, key, value)?;
        }
        serde_json::from_value(doc).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.homophily_conditions.is_empty() {
            return Err(Error::InvalidConfig("no homophily conditions".into()));
        }
        let mut names = BTreeSet::new();
        for (i, c) in self.homophily_conditions.iter().enumerate() {
            let ok = !c.name.is_empty()
                && c.name.chars().all(|ch| ch.is_ascii_alphanumeric() || ch == '-' || ch == '_');
            if !ok {
                return Err(Error::InvalidConfig(format!(
                    "condition name `{}` must be non-empty ASCII letters, digits, `-` or `_`",
                    c.name
                )));
            }
            if !names.insert(c.name.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate condition `{}`", c.name)));
            }
            self.generator_config(i)?.validate()?;
        }
        self.schema.lookup(&self.untrusted.attribute, &self.untrusted.value)?;
        if self.untrusted.count == 0 {
            return Err(Error::InvalidConfig("untrusted.count must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidConfig("no community methods".into()));
        }
        if self.methods.iter().collect::<BTreeSet<_>>().len() != self.methods.len() {
            return Err(Error::InvalidConfig("duplicate community method".into()));
        }
        let d = &self.diffusion;
        if !(0.0..=1.0).contains(&d.beta) {
            return Err(Error::InvalidConfig(format!("diffusion.beta {} outside [0, 1]", d.beta)));
        }
        if d.seed_counts.is_empty() || d.removal_fractions.is_empty() || d.replications == 0 {
            return Err(Error::InvalidConfig("diffusion grid must be non-empty".into()));
        }
        if let Some(f) = d.removal_fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::InvalidConfig(format!("removal fraction {f} outside [0, 1]")));
        }
        let cells = self.homophily_conditions.len() * d.seed_counts.len() * d.removal_fractions.len();
        if cells >= 1 << 24 || d.replications as u64 >= 1 << 32 {
            return Err(Error::InvalidConfig("diffusion grid too large".into()));
        }
        Ok(())
    }

    pub fn condition_index(&self, name: &str) -> Result<usize> {
        self.homophily_conditions
            .iter()
            .position(|c| c.name == name)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown condition `{name}`")))
    }

    /// Generator configuration for the network of condition `index`.
    pub fn generator_config(&self, index: usize) -> Result<GeneratorConfig> {
        let condition = self
            .homophily_conditions
            .get(index)
            .ok_or_else(|| Error::InvalidConfig(format!("condition index {index} out of range")))?;
        Ok(GeneratorConfig {
            nodes: self.generator.nodes,
            links_per_newcomer: self.generator.links_per_newcomer,
            seed_clique: self.generator.seed_clique,
            internal_edges_per_step: self.generator.internal_edges_per_step,
            openness: OpennessMatrix::from_overrides(&self.schema, &condition.openness)?,
            schema: self.schema.clone(),
            rng_seed: derive_seed(self.master_seed, Purpose::Network, index as u64, 0),
        })
    }
}

fn set_path(doc: &mut Value, key: &str, value: Value) -> Result<()> {
    let missing = || Error::InvalidConfig(format!("unknown config key `{key}`"));
    let mut node = doc;
    let parts: Vec<&str> = key.split('.').collect();
    let (last, path) = parts.split_last().ok_or_else(missing)?;
    for part in path {
        node = match node {
            Value::Object(map) => map.get_mut(*part).ok_or_else(missing)?,
            Value::Array(items) => part
                .parse::<usize>()
                .ok()
                .and_then(|i| items.get_mut(i))
                .ok_or_else(missing)?,
            _ => return Err(missing()),
        };
    }
    match node {
        Value::Object(map) if map.contains_key(*last) => {
            map.insert(last.to_string(), value);
        }
        Value::Array(items) => {
            let slot = last.parse::<usize>().ok().and_then(|i| items.get_mut(i)).ok_or_else(missing)?;
            *slot = value;
        }
        _ => return Err(missing()),
    }
    Ok(())
}
