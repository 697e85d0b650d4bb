//! Run configuration: JSON file, command-line overrides, resolved defaults.

use std::path::PathBuf;

use pam_core::initial::InitialMeasure;
use pam_core::params::FractionalParams;
use pam_core::{Measure, Params};
use serde::{Deserialize, Deserializer, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every knob any subcommand reads. Unset fields fall back to per-command
/// defaults; the resolved value is what gets logged.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(rename = "H0", default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<f64>,
    #[serde(rename = "H", default, skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(rename = "b_H0", default, skip_serializing_if = "Option::is_none")]
    pub b_h0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<Measure>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub t: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, deserialize_with = "one_or_many", skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(rename = "C", default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub betas: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

fn one_or_many<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum OneOrMany {
        One(f64),
        Many(Vec<f64>),
    }
    Ok(Some(match OneOrMany::deserialize(d)? {
        OneOrMany::One(v) => vec![v],
        OneOrMany::Many(v) => v,
    }))
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serialises")
    }

    /// Fields set in `other` replace ours.
    pub fn overlay(mut self, other: RunConfig) -> Self {
        macro_rules! take {
            ($($f:ident),*) => { $( if other.$f.is_some() { self.$f = other.$f; } )* };
        }
        take!(h0, h, b_h0, measure, n, n_max, t, x, p, c, alphas, betas, oracle, grid, count, seed, samples, workers, format, output);
        self
    }

    pub fn params(&self) -> Result<Params, CliError> {
        let p = FractionalParams::new(self.h0.unwrap_or(0.75), self.h.unwrap_or(0.3))
            .and_then(|p| p.with_lhs_constant(self.b_h0.unwrap_or(1.0)))
            .map_err(|e| CliError::Usage(format!("H0/H/b_H0: {e}")))?;
        Ok(p)
    }

    pub fn measure(&self) -> Result<Measure, CliError> {
        let m = self.measure.clone().unwrap_or(InitialMeasure::Dirac { x0: 0.0 });
        m.validate().map_err(|e| CliError::Usage(format!("measure: {e}")))?;
        Ok(m)
    }

    pub fn times(&self, default: &[f64]) -> Vec<f64> {
        self.t.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// `dirac:X0`, `lebesgue:C`, `gaussian:MEAN,VAR`, `quadratic`, or a JSON
/// object such as `{"type":"dirac","x0":0}`.
pub fn parse_measure(s: &str) -> Result<Measure, String> {
    let s = s.trim();
    if s.starts_with('{') {
        return serde_json::from_str(s).map_err(|e| e.to_string());
    }
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let nums: Result<Vec<f64>, _> = rest.split(',').filter(|v| !v.is_empty()).map(str::parse::<f64>).collect();
    let nums = nums.map_err(|e| format!("{s}: {e}"))?;
    let m = match (kind, nums.as_slice()) {
        ("dirac", []) => InitialMeasure::Dirac { x0: 0.0 },
        ("dirac", [x0]) => InitialMeasure::Dirac { x0: *x0 },
        ("lebesgue", []) => InitialMeasure::Lebesgue { c: 1.0 },
        ("lebesgue", [c]) => InitialMeasure::Lebesgue { c: *c },
        ("gaussian", [mean, variance]) => InitialMeasure::Gaussian { mean: *mean, variance: *variance },
        ("quadratic", []) => InitialMeasure::Quadratic,
        _ => return Err(format!("unrecognised measure {s:?}")),
    };
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let cfg = RunConfig {
            h0: Some(0.8),
            h: Some(0.25),
            measure: Some(InitialMeasure::Gaussian { mean: 0.5, variance: 2.0 }),
            t: Some(vec![1.0, 2.0]),
            seed: Some(7),
            format: Some(Format::Json),
            ..Default::default()
        };
        let again = RunConfig::from_json(&cfg.to_json()).unwrap();
        assert_eq!((again.h0, again.seed, again.format), (cfg.h0, cfg.seed, cfg.format));
        assert_eq!(again.to_json(), cfg.to_json());
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_json(r#"{"H0": 0.7, "Hx": 0.2}"#).unwrap_err();
        assert!(err.to_string().contains("Hx"), "{err}");
    }

    #[test]
    fn scalar_time_is_accepted() {
        let cfg = RunConfig::from_json(r#"{"t": 2.5, "measure": {"type": "lebesgue", "c": 2}}"#).unwrap();
        assert_eq!(cfg.t, Some(vec![2.5]));
        assert!(matches!(cfg.measure, Some(InitialMeasure::Lebesgue { .. })));
    }

    #[test]
    fn measure_shorthand() {
        assert!(matches!(parse_measure("dirac:1.5"), Ok(InitialMeasure::Dirac { x0 }) if x0 == 1.5));
        assert!(matches!(parse_measure("gaussian:0,2"), Ok(InitialMeasure::Gaussian { .. })));
        assert!(parse_measure("cauchy:1").is_err());
        assert!(matches!(parse_measure(r#"{"type":"quadratic"}"#), Ok(InitialMeasure::Quadratic)));
    }

    #[test]
    fn overlay_prefers_flags() {
        let file = RunConfig { h0: Some(0.6), seed: Some(1), ..Default::default() };
        let flags = RunConfig { seed: Some(9), ..Default::default() };
        let merged = file.overlay(flags);
        assert_eq!((merged.h0, merged.seed), (Some(0.6), Some(9)));
    }
}
