use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::deploy::TrimRule;
use crate::encoder::BackendConfig;
use crate::error::{Error, Result};
use crate::finetune::{
    LlrdDirection, PostWarmup, Strategy, TrainConfig, DEFAULT_EPOCHS, DEPLOYED_EPOCHS, LLRD_DECAY,
    LLRD_HEAD_LR, LLRD_TOP_LR,
};
use crate::preprocess::DEFAULT_BATCH_SIZE;

/// Strategy parameters as written in a config file. Which keys apply
/// depends on the strategy name; unset keys take the grid defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct StrategyParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub post: Option<PostWarmup>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub top_lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub head_lr: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<LlrdDirection>,
    /// Allows values outside the standard grid.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub custom: bool,
}

/// One point on the strategy axis: a name plus its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct StrategyChoice {
    pub strategy: String,
    #[serde(default)]
    pub strategy_params: StrategyParams,
}

impl StrategyChoice {
    pub fn resolve(&self) -> Result<Strategy> {
        resolve_strategy(&self.strategy, &self.strategy_params)
    }
}

impl From<Strategy> for StrategyChoice {
    fn from(s: Strategy) -> Self {
        let custom = !s.is_standard();
        let (name, params) = match s {
            Strategy::None => ("none", StrategyParams::default()),
            Strategy::Discriminative {
                top_lr,
                decay,
                head_lr,
                direction,
            } => (
                "discriminative",
                StrategyParams {
                    top_lr: Some(top_lr),
                    decay: Some(decay),
                    head_lr: Some(head_lr),
                    direction: Some(direction),
                    ..Default::default()
                },
            ),
            Strategy::Warmup { steps, post } => (
                "warmup",
                StrategyParams {
                    steps: Some(steps),
                    post: Some(post),
                    ..Default::default()
                },
            ),
            Strategy::Unfreeze { layers } => (
                "unfreeze",
                StrategyParams {
                    layers: Some(layers),
                    ..Default::default()
                },
            ),
        };
        StrategyChoice {
            strategy: name.to_string(),
            strategy_params: StrategyParams { custom, ..params },
        }
    }
}

fn resolve_strategy(name: &str, p: &StrategyParams) -> Result<Strategy> {
    let need = |v: Option<usize>, key: &str| {
        v.ok_or_else(|| Error::Config(format!("strategy `{name}` needs strategy-params.{key}")))
    };
    let strategy = match name.trim().to_ascii_lowercase().as_str() {
        "none" | "base" => Strategy::None,
        "discriminative" | "discrimination" | "llrd" => Strategy::Discriminative {
            top_lr: p.top_lr.unwrap_or(LLRD_TOP_LR),
            decay: p.decay.unwrap_or(LLRD_DECAY),
            head_lr: p.head_lr.unwrap_or(LLRD_HEAD_LR),
            direction: p.direction.unwrap_or_default(),
        },
        "warmup" => Strategy::Warmup {
            steps: need(p.steps, "steps")?,
            post: p.post.unwrap_or_default(),
        },
        "unfreeze" | "gradual-unfreeze" => Strategy::Unfreeze {
            layers: need(p.layers, "layers")?,
        },
        other => return Err(Error::Config(format!("unknown strategy `{other}`"))),
    };
    if !strategy.is_standard() && !p.custom {
        return Err(Error::Config(format!(
            "{strategy} is outside the standard grid; set strategy-params.custom = true"
        )));
    }
    Ok(strategy)
}

/// Deployment applied to the training dataset before it is split.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct DeployConfig {
    /// Trim rule names, applied in order.
    #[serde(default)]
    pub trim: Vec<String>,
    /// Hate duplication factor.
    #[serde(default)]
    pub augment: Option<usize>,
    /// Augment only the training split instead of the whole dataset.
    #[serde(default)]
    pub augment_train_only: bool,
}

impl DeployConfig {
    pub fn is_empty(&self) -> bool {
        self.trim.is_empty() && self.augment.is_none()
    }

    pub fn trim_rules(&self) -> Result<Vec<TrimRule>> {
        self.trim
            .iter()
            .map(|n| {
                TrimRule::parse(n).ok_or_else(|| Error::Config(format!("unknown trim rule `{n}`")))
            })
            .collect()
    }
}

fn default_seed() -> u64 {
    42
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("runs")
}

fn default_strategy() -> String {
    "none".to_string()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Training dataset name, resolved through the dataset catalog.
    pub dataset: String,
    /// Evaluated datasets; empty means the training dataset only.
    #[serde(default)]
    pub test_datasets: Vec<String>,
    #[serde(default)]
    pub clean: bool,
    #[serde(default = "default_strategy")]
    pub strategy: String,
    #[serde(default)]
    pub strategy_params: StrategyParams,
    /// Defaults to 4, 5 for deployed datasets, or the unfreeze depth.
    #[serde(default)]
    pub epochs: Option<usize>,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub batch_size: Option<usize>,
    #[serde(default)]
    pub backend: BackendConfig,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default, skip_serializing_if = "DeployConfig::is_empty")]
    pub deploy: DeployConfig,
}

impl ExperimentConfig {
    pub fn new(dataset: impl Into<String>) -> Self {
        ExperimentConfig {
            dataset: dataset.into(),
            test_datasets: Vec::new(),
            clean: false,
            strategy: default_strategy(),
            strategy_params: StrategyParams::default(),
            epochs: None,
            seed: default_seed(),
            batch_size: None,
            backend: BackendConfig::default(),
            output_dir: default_output_dir(),
            deploy: DeployConfig::default(),
        }
    }

    pub fn with_strategy(mut self, strategy: Strategy) -> Self {
        self.set_strategy(strategy.into());
        self
    }

    pub fn set_strategy(&mut self, choice: StrategyChoice) {
        self.strategy = choice.strategy;
        self.strategy_params = choice.strategy_params;
    }

    pub fn resolved_strategy(&self) -> Result<Strategy> {
        resolve_strategy(&self.strategy, &self.strategy_params)
    }

    pub fn test_dataset_names(&self) -> Vec<String> {
        if self.test_datasets.is_empty() {
            vec![self.dataset.clone()]
        } else {
            self.test_datasets.clone()
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let strategy = self.resolved_strategy()?;
        let default_epochs = if self.deploy.is_empty() {
            DEFAULT_EPOCHS
        } else {
            DEPLOYED_EPOCHS
        };
        let epochs = self
            .epochs
            .or(strategy.forced_epochs())
            .unwrap_or(default_epochs);
        let config = TrainConfig {
            epochs,
            seed: self.seed,
            batch_size: self.batch_size.unwrap_or(DEFAULT_BATCH_SIZE),
            strategy,
            ..TrainConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    /// Row label for the training set, e.g. `covid-hate-2022-trim (clean)`.
    pub fn training_set_label(&self) -> String {
        let mut name = self.dataset.clone();
        if !self.deploy.trim.is_empty() {
            name.push_str("-trim");
        }
        if self.deploy.augment.is_some() {
            name.push_str("-agu");
        }
        if self.clean {
            name.push_str(" (clean)");
        }
        name
    }

    /// Row label for the technique; falls back to the raw name when the
    /// strategy does not resolve.
    pub fn technique_label(&self) -> String {
        self.resolved_strategy()
            .map(|s| s.to_string())
            .unwrap_or_else(|_| self.strategy.clone())
    }

    /// Hex SHA-256 of the canonical semantic configuration. Formatting, key
    /// order, defaults written out explicitly and the output directory do
    /// not affect it.
    pub fn config_hash(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Canonical<'a> {
            dataset: &'a str,
            test_datasets: Vec<String>,
            clean: bool,
            train: TrainConfig,
            backend: &'a BackendConfig,
            deploy: &'a DeployConfig,
        }
        let canonical = Canonical {
            dataset: &self.dataset,
            test_datasets: self.test_dataset_names(),
            clean: self.clean,
            train: self.train_config()?,
            backend: &self.backend,
            deploy: &self.deploy,
        };
        // serde_json::Value keeps object keys sorted.
        let value = serde_json::to_value(&canonical)?;
        let digest = Sha256::digest(serde_json::to_vec(&value)?);
        Ok(digest.iter().map(|b| format!("{b:02x}")).collect())
    }
}

/// Axes of an experiment grid. Unset axes take the base config's value;
/// unset strategies mean the nine standard techniques.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GridAxes {
    #[serde(default)]
    pub datasets: Vec<String>,
    #[serde(default)]
    pub clean: Vec<bool>,
    #[serde(default)]
    pub strategies: Vec<StrategyChoice>,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn or_base<T: Clone>(axis: &[T], base: T) -> Vec<T> {
    if axis.is_empty() {
        vec![base]
    } else {
        axis.to_vec()
    }
}

impl GridAxes {
    /// Cartesian product in dataset → clean → strategy → seed order.
    pub fn cells(&self, base: &ExperimentConfig) -> Result<Vec<ExperimentConfig>> {
        let datasets = or_base(&self.datasets, base.dataset.clone());
        let cleans = or_base(&self.clean, base.clean);
        let seeds = or_base(&self.seeds, base.seed);
        let strategies: Vec<StrategyChoice> = if self.strategies.is_empty() {
            Strategy::grid()
                .into_iter()
                .map(StrategyChoice::from)
                .collect()
        } else {
            self.strategies.clone()
        };
        let mut cells = Vec::new();
        for dataset in &datasets {
            for &clean in &cleans {
                for choice in &strategies {
                    for &seed in &seeds {
                        let mut cell = base.clone();
                        cell.dataset = dataset.clone();
                        cell.clean = clean;
                        cell.seed = seed;
                        cell.set_strategy(choice.clone());
                        if choice
                            .resolve()
                            .ok()
                            .and_then(|s| s.forced_epochs())
                            .is_some()
                        {
                            cell.epochs = None;
                        }
                        cells.push(cell);
                    }
                }
            }
        }
        if cells.is_empty() {
            return Err(Error::Config("grid has no cells".into()));
        }
        Ok(cells)
    }
}

/// A config file: experiment keys at top level plus an optional `[grid]` table.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigFile {
    pub experiment: ExperimentConfig,
    pub grid: Option<GridAxes>,
}

impl ConfigFile {
    pub fn parse_toml(text: &str) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e| Error::Config(format!("{e}")))?;
        let grid = table
            .remove("grid")
            .map(|g| g.try_into::<GridAxes>())
            .transpose()
            .map_err(|e| Error::Config(format!("[grid]: {e}")))?;
        let experiment = toml::Value::Table(table)
            .try_into()
            .map_err(|e| Error::Config(format!("{e}")))?;
        Ok(ConfigFile { experiment, grid })
    }

    pub fn parse_json(text: &str) -> Result<Self> {
        let mut value: serde_json::Value = serde_json::from_str(text)?;
        let grid = value
            .as_object_mut()
            .and_then(|o| o.remove("grid"))
            .map(serde_json::from_value)
            .transpose()?;
        Ok(ConfigFile {
            experiment: serde_json::from_value(value)?,
            grid,
        })
    }

    /// Reads `.json` files as JSON and everything else as TOML.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingFile(path.to_path_buf()),
            _ => Error::Io(e),
        })?;
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Self::parse_json(&text),
            _ => Self::parse_toml(&text),
        }
    }
}
