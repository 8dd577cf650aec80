use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::exit;
use crate::clf::SigmaSelector;
use crate::error::ScenarioError;
use crate::rcbf::GammaSelector;
use crate::sim::{ControllerKind, ControllerSpec, SimConfig};
use crate::types::{rho, Scenario, Vec2};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse {path}: {source}")]
    Parse {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
}

impl ConfigError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ConfigError::Scenario(_) => exit::SCENARIO,
            _ => exit::CONFIG,
        }
    }
}

/// Scenario given inline or as a path relative to the run config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioSource {
    Path(PathBuf),
    Inline(Scenario),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NamedController {
    pub name: String,
    pub kind: ControllerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<SigmaSelector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<GammaSelector>,
}

impl NamedController {
    pub fn new(name: impl Into<String>, spec: ControllerSpec) -> Self {
        Self {
            name: name.into(),
            kind: spec.kind,
            sigma: spec.sigma,
            gamma: spec.gamma,
        }
    }

    pub fn spec(&self) -> ControllerSpec {
        ControllerSpec {
            kind: self.kind,
            sigma: self.sigma.clone(),
            gamma: self.gamma.clone(),
        }
    }
}

/// Settings for the `verify` suites.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySettings {
    pub grid_min: Vec2,
    pub grid_max: Vec2,
    pub grid_n: usize,
    pub random_samples: usize,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            grid_min: Vec2::new(-3.0, -2.0),
            grid_max: Vec2::new(9.0, 6.0),
            grid_n: 200,
            random_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRunConfig {
    scenario: ScenarioSource,
    controllers: Vec<NamedController>,
    #[serde(default)]
    sim: SimConfig,
    x0: Vec2,
    #[serde(default = "default_output_dir")]
    output_dir: PathBuf,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    verify: VerifySettings,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Fully resolved and validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub controllers: Vec<NamedController>,
    pub sim: SimConfig,
    pub x0: Vec2,
    pub output_dir: PathBuf,
    pub seed: u64,
    pub verify: VerifySettings,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base).map_err(|e| match e {
            ConfigError::Parse { source, .. } => ConfigError::Parse {
                path: path.to_path_buf(),
                source,
            },
            other => other,
        })
    }

    /// Parses config text; relative scenario paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawRunConfig = serde_json::from_str(text).map_err(|source| ConfigError::Parse {
            path: PathBuf::from("<config>"),
            source,
        })?;
        let scenario = match raw.scenario {
            ScenarioSource::Inline(s) => s,
            ScenarioSource::Path(p) => {
                let p = base.join(p);
                let text = fs::read_to_string(&p).map_err(|source| ConfigError::Io {
                    path: p.clone(),
                    source,
                })?;
                Scenario::from_json(&text).map_err(|source| ConfigError::Parse { path: p, source })?
            }
        };
        let config = RunConfig {
            scenario,
            controllers: raw.controllers,
            sim: raw.sim,
            x0: raw.x0,
            output_dir: raw.output_dir,
            seed: raw.seed,
            verify: raw.verify,
        };
        config.validate()
    }

    fn validate(self) -> Result<Self, ConfigError> {
        if self.controllers.is_empty() {
            return Err(ConfigError::Invalid("no controllers configured".into()));
        }
        let mut names = HashSet::new();
        for c in &self.controllers {
            if c.name.is_empty() || c.name.contains(['/', '\\']) {
                return Err(ConfigError::Invalid(format!("invalid controller name {:?}", c.name)));
            }
            if !names.insert(c.name.as_str()) {
                return Err(ConfigError::Invalid(format!("duplicate controller name {:?}", c.name)));
            }
            c.spec()
                .validate()
                .map_err(|e| ConfigError::Invalid(format!("controller {:?}: {e}", c.name)))?;
        }

        let scenario = self.scenario.validate()?;

        self.sim
            .validate(&scenario)
            .map_err(|e| ConfigError::Invalid(format!("sim: {e}")))?;
        if scenario
            .obstacles
            .iter()
            .any(|o| rho(self.x0, o).is_nan() || rho(self.x0, o) <= 0.0)
        {
            return Err(ConfigError::Invalid(format!(
                "x0 {} is not strictly outside every obstacle",
                self.x0
            )));
        }
        let v = &self.verify;
        if v.grid_n < 2 || !(v.grid_min.x < v.grid_max.x && v.grid_min.y < v.grid_max.y) {
            return Err(ConfigError::Invalid(
                "verify grid must be non-empty with grid_n >= 2".into(),
            ));
        }
        Ok(RunConfig { scenario, ..self })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SCENARIO: &str = r#"{"goal":[7,3.2],"obstacles":[{"center":[2,3.3],"radius":0.5,"rho0":0.2}],"k_att":1,"k_rep":1,"alpha_gain":1}"#;

    fn config(controllers: &str) -> String {
        format!(r#"{{"scenario":{SCENARIO},"controllers":{controllers},"x0":[-2,0]}}"#)
    }

    #[test]
    fn parses_inline_config() {
        let text = config(
            r#"[{"name":"g1","kind":"generalized","sigma":{"kind":"grad_norm_squared"},"gamma":{"kind":"zero"}}]"#,
        );
        let cfg = RunConfig::parse(&text, Path::new(".")).unwrap();
        assert_eq!(
            cfg.controllers[0].spec(),
            ControllerSpec::generalized(SigmaSelector::GradNormSquared, GammaSelector::Zero)
        );
        assert_eq!(cfg.sim, SimConfig::default());
        assert_eq!(cfg.output_dir, PathBuf::from("out"));
    }

    #[test]
    fn empty_controller_list() {
        let err = RunConfig::parse(&config("[]"), Path::new(".")).unwrap_err();
        assert_eq!(err.to_string(), "no controllers configured");
        assert_eq!(err.exit_code(), exit::CONFIG);
    }

    #[test]
    fn custom_gamma_without_table() {
        let text = config(
            r#"[{"name":"c","kind":"generalized","sigma":{"kind":"grad_norm_squared"},"gamma":{"kind":"custom"}}]"#,
        );
        let err = RunConfig::parse(&text, Path::new(".")).unwrap_err();
        assert!(matches!(err, ConfigError::Parse { .. }));
        assert_eq!(err.exit_code(), exit::CONFIG);
    }

    #[test]
    fn duplicate_names_and_unknown_keys() {
        let text = config(r#"[{"name":"a","kind":"apf"},{"name":"a","kind":"apf"}]"#);
        assert!(RunConfig::parse(&text, Path::new(".")).is_err());
        let text = config(r#"[{"name":"a","kind":"apf","colour":"red"}]"#);
        assert!(matches!(
            RunConfig::parse(&text, Path::new(".")),
            Err(ConfigError::Parse { .. })
        ));
    }

    #[test]
    fn invalid_scenario_maps_to_exit_3() {
        let text = r#"{"scenario":{"goal":[2,3.3],"obstacles":[{"center":[2,3.3],"radius":0.5,"rho0":0.2}],"k_att":0,"k_rep":1,"alpha_gain":1},"controllers":[{"name":"a","kind":"apf"}],"x0":[-2,0]}"#;
        let err = RunConfig::parse(text, Path::new(".")).unwrap_err();
        assert_eq!(err.exit_code(), exit::SCENARIO);
        let ConfigError::Scenario(s) = err else { panic!() };
        assert_eq!(s.violations.len(), 2);
    }
}
