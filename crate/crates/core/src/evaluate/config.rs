use std::collections::BTreeSet;
use std::path::PathBuf;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};

/// A registry name plus its parameter block. In JSON either a bare string or
/// an object `{"name": ..., "alias": ..., "params": {...}}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComponentSpec {
    pub name: String,
    /// Label used in records and reports; defaults to `name`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alias: Option<String>,
    #[serde(skip_serializing_if = "Map::is_empty")]
    pub params: Map<String, Value>,
}

impl ComponentSpec {
    pub fn named(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            alias: None,
            params: Map::new(),
        }
    }

    pub fn with_params(name: impl Into<String>, params: Value) -> Self {
        let params = match params {
            Value::Object(m) => m,
            _ => Map::new(),
        };
        Self {
            name: name.into(),
            alias: None,
            params,
        }
    }

    pub fn label(&self) -> &str {
        self.alias.as_deref().unwrap_or(&self.name)
    }

    fn from_value(value: Value) -> std::result::Result<Self, String> {
        match value {
            Value::String(name) => Ok(Self::named(name)),
            Value::Object(mut obj) => {
                if let Some(key) = obj
                    .keys()
                    .find(|k| !matches!(k.as_str(), "name" | "alias" | "params"))
                {
                    return Err(format!("unknown field `{key}` in component, expected one of `name`, `alias`, `params`"));
                }
                let name = match obj.remove("name") {
                    Some(Value::String(s)) => s,
                    Some(_) => return Err("component `name` must be a string".into()),
                    None => return Err("component is missing `name`".into()),
                };
                let alias = match obj.remove("alias") {
                    None | Some(Value::Null) => None,
                    Some(Value::String(s)) => Some(s),
                    Some(_) => return Err("component `alias` must be a string".into()),
                };
                let params = match obj.remove("params") {
                    None | Some(Value::Null) => Map::new(),
                    Some(Value::Object(m)) => m,
                    Some(_) => return Err(format!("params of `{name}` must be an object")),
                };
                Ok(Self {
                    name,
                    alias,
                    params,
                })
            }
            other => Err(format!(
                "component must be a string or an object, got {other}"
            )),
        }
    }
}

impl<'de> Deserialize<'de> for ComponentSpec {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        Self::from_value(Value::deserialize(deserializer)?).map_err(D::Error::custom)
    }
}

fn default_rounds() -> u64 {
    1
}

fn default_seed() -> u64 {
    42
}

fn default_strategy() -> ComponentSpec {
    ComponentSpec::named("supervised")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_samples: u64,
    pub n_pretrain: u64,
    #[serde(default = "default_rounds")]
    pub n_rounds: u64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
    pub models: Vec<ComponentSpec>,
    pub streams: Vec<ComponentSpec>,
    #[serde(default = "default_strategy")]
    pub strategy: ComponentSpec,
}

impl ExperimentConfig {
    pub fn new(
        models: Vec<ComponentSpec>,
        streams: Vec<ComponentSpec>,
        n_samples: u64,
        n_pretrain: u64,
    ) -> Self {
        Self {
            n_samples,
            n_pretrain,
            n_rounds: default_rounds(),
            seed: default_seed(),
            out_dir: None,
            models,
            streams,
            strategy: default_strategy(),
        }
    }

    /// Checks the numeric constraints and label uniqueness. Name resolution
    /// happens in [`resolve`](super::resolve).
    pub fn validate(&self) -> Result<()> {
        if self.n_samples == 0 {
            return Err(Error::Config("n_samples must be positive".into()));
        }
        if self.n_pretrain >= self.n_samples {
            return Err(Error::Config(format!(
                "constraint n_pretrain < n_samples violated ({} >= {})",
                self.n_pretrain, self.n_samples
            )));
        }
        if self.n_rounds == 0 {
            return Err(Error::Config("n_rounds must be positive".into()));
        }
        for (what, list) in [("models", &self.models), ("streams", &self.streams)] {
            if list.is_empty() {
                return Err(Error::Config(format!(
                    "`{what}` must list at least one component"
                )));
            }
            let mut seen = BTreeSet::new();
            for spec in list {
                if !seen.insert(spec.label()) {
                    return Err(Error::Config(format!(
                        "duplicate {what} label `{}`; set distinct `alias` values",
                        spec.label()
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn n_jobs(&self) -> usize {
        self.models.len() * self.streams.len() * self.n_rounds as usize
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg: ExperimentConfig = serde_json::from_str(
            r#"{"models":["MajorityClass"],"streams":["sea"],"n_samples":1000,"n_pretrain":100}"#,
        )
        .unwrap();
        cfg.validate().unwrap();
        assert_eq!(cfg.n_rounds, 1);
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.strategy, ComponentSpec::named("supervised"));
        assert_eq!(cfg.n_jobs(), 1);
    }

    #[test]
    fn component_forms() {
        let spec: ComponentSpec =
            serde_json::from_str(r#"{"name":"KNN","alias":"knn3","params":{"k":3}}"#).unwrap();
        assert_eq!(spec.label(), "knn3");
        assert_eq!(spec.params["k"], 3);
        let err =
            serde_json::from_str::<ComponentSpec>(r#"{"name":"KNN","parms":{}}"#).unwrap_err();
        assert!(err.to_string().contains("parms"), "{err}");
    }

    #[test]
    fn unknown_key_and_constraint_errors() {
        let err = serde_json::from_str::<ExperimentConfig>(
            r#"{"models":["KNN"],"streams":["sea"],"n_samples":10,"n_pretrain":1,"sed":3}"#,
        )
        .unwrap_err();
        assert!(err.to_string().contains("sed"));
        let cfg = ExperimentConfig::new(
            vec![ComponentSpec::named("KNN")],
            vec![ComponentSpec::named("sea")],
            1000,
            1000,
        );
        let msg = cfg.validate().unwrap_err().to_string();
        assert!(msg.contains("n_pretrain < n_samples"), "{msg}");
    }

    #[test]
    fn duplicate_labels_are_rejected() {
        let mut cfg = ExperimentConfig::new(
            vec![ComponentSpec::named("KNN"), ComponentSpec::named("KNN")],
            vec![ComponentSpec::named("sea")],
            100,
            10,
        );
        assert!(cfg.validate().is_err());
        cfg.models[1].alias = Some("knn-b".into());
        cfg.validate().unwrap();
    }
}
