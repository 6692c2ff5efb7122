//! Experiment settings: preset defaults, overlaid by a JSON config file,
//! overlaid by command-line flags.

use std::path::{Path, PathBuf};

use fwl_core::engine::{Preset, Strategy, TrainConfig};
use fwl_core::experiments::{BudgetSizes, DEFAULT_BETAS};
use fwl_core::{Error, Result};
use serde::Deserialize;
use serde_json::Value;

/// Shape of the `--config` file. Every field is optional.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub preset: Option<Preset>,
    /// Presets for `sweep-beta`.
    pub presets: Option<Vec<Preset>>,
    pub strategies: Option<Vec<String>>,
    pub beta: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    /// Partial training settings merged over the preset defaults.
    pub train: Option<serde_json::Map<String, Value>>,
    pub weak_fractions: Option<Vec<f64>>,
    pub strong_fractions: Option<Vec<f64>>,
    pub soft_fractions: Option<Vec<f64>>,
    pub budget_sizes: Option<BudgetSizes>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::ConfigParse(format!("{}: {e}", path.display())))
    }
}

/// Command-line values that override the file.
#[derive(Debug, Default)]
pub struct Overrides {
    pub preset: Option<Preset>,
    pub strategies: Option<Vec<Strategy>>,
    pub beta: Option<f64>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub struct Settings {
    file: FileConfig,
    flags: Overrides,
}

pub const DEFAULT_FRACTIONS: [f64; 6] = [0.1, 0.2, 0.4, 0.6, 0.8, 1.0];
pub const DEFAULT_SOFT_FRACTIONS: [f64; 10] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];

impl Settings {
    pub fn new(file: FileConfig, flags: Overrides) -> Self {
        Self { file, flags }
    }

    pub fn preset(&self) -> Preset {
        self.flags.preset.or(self.file.preset).unwrap_or(Preset::Toy)
    }

    /// Presets for the β sweep: the `--preset` flag, else the file, else the
    /// three toy regimes.
    pub fn sweep_presets(&self) -> Vec<Preset> {
        if let Some(p) = self.flags.preset {
            return vec![p];
        }
        self.file
            .presets
            .clone()
            .or(self.file.preset.map(|p| vec![p]))
            .unwrap_or_else(|| Preset::TOYS.to_vec())
    }

    pub fn strategies(&self, default: &[Strategy]) -> Result<Vec<Strategy>> {
        if let Some(s) = &self.flags.strategies {
            return Ok(s.clone());
        }
        match &self.file.strategies {
            Some(names) => names.iter().map(|n| n.parse()).collect(),
            None => Ok(default.to_vec()),
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        self.flags
            .seeds
            .clone()
            .or_else(|| self.file.seeds.clone())
            .unwrap_or_else(|| vec![1])
    }

    pub fn out_dir(&self) -> PathBuf {
        self.flags
            .out
            .clone()
            .or_else(|| self.file.out.clone())
            .unwrap_or_else(|| PathBuf::from("out"))
    }

    pub fn betas(&self) -> Vec<f64> {
        if let Some(b) = self.flags.beta {
            return vec![b];
        }
        self.file.betas.clone().unwrap_or_else(|| DEFAULT_BETAS.to_vec())
    }

    pub fn weak_fractions(&self) -> Vec<f64> {
        self.file.weak_fractions.clone().unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec())
    }

    pub fn strong_fractions(&self) -> Vec<f64> {
        self.file.strong_fractions.clone().unwrap_or_else(|| DEFAULT_FRACTIONS.to_vec())
    }

    pub fn soft_fractions(&self) -> Vec<f64> {
        self.file.soft_fractions.clone().unwrap_or_else(|| DEFAULT_SOFT_FRACTIONS.to_vec())
    }

    pub fn budget_sizes(&self) -> BudgetSizes {
        self.file.budget_sizes.unwrap_or_default()
    }

    /// Training settings for `preset`: its defaults, then the file's `train`
    /// keys, then `beta` from the file and the flag.
    pub fn train_config(&self, preset: Preset) -> Result<TrainConfig> {
        let mut value = serde_json::to_value(preset.train_config())?;
        if let (Some(over), Value::Object(base)) = (&self.file.train, &mut value) {
            for (k, v) in over {
                base.insert(k.clone(), v.clone());
            }
        }
        let mut config: TrainConfig =
            serde_json::from_value(value).map_err(|e| Error::ConfigParse(format!("train settings: {e}")))?;
        if let Some(b) = self.flags.beta.or(self.file.beta) {
            config.beta = b;
        }
        config.validate()?;
        Ok(config)
    }
}

/// Parses `1..10` (inclusive), `1,4,9` or mixtures such as `1..3,7`.
pub fn parse_seeds(text: &str) -> Result<Vec<u64>> {
    let bad = || Error::ConfigParse(format!("invalid seed list `{text}`"));
    let mut seeds = Vec::new();
    for part in text.split(',').map(str::trim) {
        if let Some((a, b)) = part.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad())?;
            let b: u64 = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
            if a > b {
                return Err(bad());
            }
            seeds.extend(a..=b);
        } else {
            seeds.push(part.parse().map_err(|_| bad())?);
        }
    }
    if seeds.is_empty() {
        return Err(bad());
    }
    Ok(seeds)
}

/// Parses a comma-separated strategy list.
pub fn parse_strategies(text: &str) -> Result<Vec<Strategy>> {
    text.split(',').map(|s| s.trim().parse()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_lists() {
        assert_eq!(parse_seeds("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_seeds("1..=2,7").unwrap(), vec![1, 2, 7]);
        assert_eq!(parse_seeds("5").unwrap(), vec![5]);
        assert!(parse_seeds("").is_err());
        assert!(parse_seeds("3..1").is_err());
        assert!(parse_seeds("a").is_err());
    }

    #[test]
    fn precedence() {
        let file: FileConfig =
            serde_json::from_str(r#"{"preset": "toy-star", "beta": 2.0, "train": {"batch_size": 5}}"#).unwrap();
        let s = Settings::new(
            file,
            Overrides {
                beta: Some(0.5),
                ..Overrides::default()
            },
        );
        assert_eq!(s.preset(), Preset::ToyStar);
        let c = s.train_config(s.preset()).unwrap();
        assert_eq!(c.beta, 0.5);
        assert_eq!(c.batch_size, 5);
        assert_eq!(c.clusters, Some(1));
        assert_eq!(s.seeds(), vec![1]);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(serde_json::from_str::<FileConfig>(r#"{"sedes": [1]}"#).is_err());
        let file: FileConfig = serde_json::from_str(r#"{"train": {"bta": 1}}"#).unwrap();
        let err = Settings::new(file, Overrides::default()).train_config(Preset::Toy).unwrap_err();
        assert_eq!(err.category(), "ConfigParse");
    }
}
