//! Fleet configuration files.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use flexhull::domain::{DerSpec, FlexDomain};
use flexhull::fit::{DegreeConfig, InnerFitParams};
use flexhull::prototype::{PrototypePolygon, PrototypeSpec};
use serde::{Deserialize, Serialize};

/// Certificate degree: `"auto"` or a positive even integer.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Degree {
    Fixed(u32),
    Named(String),
}

impl Default for Degree {
    fn default() -> Self {
        Degree::Named("auto".into())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSettings {
    pub degree: Degree,
    pub bisection_tol: f64,
    pub epsilon_step: f64,
    pub max_outer_iters: usize,
    pub seed: u64,
}

fn default_samples() -> usize {
    10_000
}

fn default_grid() -> usize {
    41
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FleetConfig {
    pub ders: Vec<DerSpec>,
    pub prototype: PrototypeSpec,
    pub fit: FitSettings,
    pub outputs: PathBuf,
    /// Sum the inner homothets that exist even when some DER has none.
    #[serde(default)]
    pub partial_inner: bool,
    /// Number of Minkowski-sum samples written for plotting.
    #[serde(default = "default_samples")]
    pub plot_samples: usize,
    /// Grid resolution of the brute-force inner oracle.
    #[serde(default = "default_grid")]
    pub oracle_grid: usize,
    /// Free-form description; ignored by the pipeline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// A config rejected before any fitting started.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

/// A validated config with its domains and prototype built.
#[derive(Clone, Debug)]
pub struct Fleet {
    pub config: FleetConfig,
    pub domains: Vec<FlexDomain>,
    pub prototype: Arc<PrototypePolygon>,
    pub params: InnerFitParams,
    pub degree: DegreeConfig,
}

impl FleetConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
            .map_err(|ConfigError(m)| ConfigError(format!("{}: {m}", path.display())))
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))
    }

    pub fn degree_config(&self) -> Result<DegreeConfig, ConfigError> {
        let certificate_degree = match &self.fit.degree {
            Degree::Named(s) if s == "auto" => None,
            Degree::Named(s) => {
                return Err(ConfigError(format!(
                    "fit.degree: expected \"auto\" or an even integer, got {s:?}"
                )))
            }
            Degree::Fixed(d) if *d == 0 || d % 2 == 1 => {
                return Err(ConfigError(format!(
                    "fit.degree: must be a positive even integer, got {d}"
                )))
            }
            Degree::Fixed(d) => Some(*d),
        };
        Ok(DegreeConfig {
            certificate_degree,
            ..DegreeConfig::default()
        })
    }

    pub fn inner_params(&self) -> Result<InnerFitParams, ConfigError> {
        let f = &self.fit;
        let params = InnerFitParams {
            bisection_tol: f.bisection_tol,
            epsilon_step: f.epsilon_step,
            max_outer_iters: f.max_outer_iters,
            ..InnerFitParams::default()
        };
        params
            .validate()
            .map_err(|e| ConfigError(format!("fit: {e}")))?;
        Ok(params)
    }

    /// Checks every invariant and builds the domains and the prototype.
    pub fn build(self) -> Result<Fleet, ConfigError> {
        if self.ders.is_empty() {
            return Err(ConfigError("ders: must contain at least one DER".into()));
        }
        if self.plot_samples == 0 {
            return Err(ConfigError("plot_samples: must be positive".into()));
        }
        if self.oracle_grid < 3 {
            return Err(ConfigError(format!(
                "oracle_grid: must be at least 3, got {}",
                self.oracle_grid
            )));
        }
        let degree = self.degree_config()?;
        let params = self.inner_params()?;
        let prototype = self
            .prototype
            .build()
            .map_err(|e| ConfigError(format!("prototype: {e}")))?;
        let domains = self
            .ders
            .iter()
            .enumerate()
            .map(|(i, s)| {
                s.build()
                    .map_err(|e| ConfigError(format!("ders[{i}] ({}): {e}", s.type_name())))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Fleet {
            config: self,
            domains,
            prototype: Arc::new(prototype),
            params,
            degree,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "ders": [{"type": "battery", "params": {"p_max": 1.0, "s": 1.5}}],
        "prototype": {"kind": "regular", "n": 4},
        "fit": {"degree": "auto", "bisection_tol": 1e-3, "epsilon_step": 0.1,
                "max_outer_iters": 20, "seed": 7},
        "outputs": "out"
    }"#;

    #[test]
    fn minimal_config_builds() {
        let fleet = FleetConfig::from_json(MINIMAL).unwrap().build().unwrap();
        assert_eq!(fleet.domains.len(), 1);
        assert_eq!(fleet.prototype.n_edges(), 4);
        assert_eq!(fleet.degree.certificate_degree, None);
        assert_eq!(fleet.config.plot_samples, 10_000);
    }

    #[test]
    fn fixed_degree() {
        let text = MINIMAL.replace("\"auto\"", "4");
        let fleet = FleetConfig::from_json(&text).unwrap().build().unwrap();
        assert_eq!(fleet.degree.certificate_degree, Some(4));
        let odd = MINIMAL.replace("\"auto\"", "3");
        let err = FleetConfig::from_json(&odd).unwrap().build().unwrap_err();
        assert!(err.0.contains("fit.degree"), "{err}");
        let bad = MINIMAL.replace("\"auto\"", "\"high\"");
        assert!(FleetConfig::from_json(&bad).unwrap().build().is_err());
    }

    #[test]
    fn rejects_bad_values_by_field() {
        let cases = [
            (
                "\"bisection_tol\": 1e-3",
                "\"bisection_tol\": -1.0",
                "bisection_tol",
            ),
            (
                "\"epsilon_step\": 0.1",
                "\"epsilon_step\": 0.0",
                "epsilon_step",
            ),
            (
                "\"max_outer_iters\": 20",
                "\"max_outer_iters\": 0",
                "max_outer_iters",
            ),
            ("\"s\": 1.5", "\"s\": 0.5", "ders[0]"),
            ("\"n\": 4", "\"n\": 2", "prototype"),
        ];
        for (from, to, field) in cases {
            let text = MINIMAL.replace(from, to);
            let err = FleetConfig::from_json(&text).unwrap().build().unwrap_err();
            assert!(err.0.contains(field), "{field}: {err}");
        }
        let empty = MINIMAL.replace(
            r#"[{"type": "battery", "params": {"p_max": 1.0, "s": 1.5}}]"#,
            "[]",
        );
        let err = FleetConfig::from_json(&empty).unwrap().build().unwrap_err();
        assert!(err.0.starts_with("ders"));
    }

    #[test]
    fn missing_fields_are_named() {
        for field in ["ders", "prototype", "fit", "outputs"] {
            let v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
            let mut obj = v.as_object().unwrap().clone();
            obj.remove(field);
            let err = FleetConfig::from_json(&serde_json::to_string(&obj).unwrap()).unwrap_err();
            assert!(err.0.contains(&format!("`{field}`")), "{err}");
        }
        for field in [
            "degree",
            "bisection_tol",
            "epsilon_step",
            "max_outer_iters",
            "seed",
        ] {
            let mut v: serde_json::Value = serde_json::from_str(MINIMAL).unwrap();
            v["fit"].as_object_mut().unwrap().remove(field);
            let err = FleetConfig::from_json(&v.to_string()).unwrap_err();
            assert!(err.0.contains(&format!("`{field}`")), "{err}");
        }
    }

    #[test]
    fn unknown_fields_rejected() {
        let text = MINIMAL.replace("\"outputs\"", "\"outptus\": 1, \"outputs\"");
        assert!(FleetConfig::from_json(&text).is_err());
    }
}
