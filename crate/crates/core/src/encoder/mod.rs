//! Layered text-classifier abstraction.
//!
//! A model exposes its parameters as ordered groups, bottom to top:
//! `EMBEDDINGS, LAYER_1 … LAYER_N, HEAD`. Schedules (per-group learning
//! rates, gradual unfreezing) operate on these groups only.

mod mock;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Label;
use crate::error::{Error, Result};

pub use mock::{MockConfig, MockEncoder};

/// Encoder depth of the base classifier.
pub const BASE_ENCODER_LAYERS: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Group {
    Embeddings,
    /// 1-based encoder layer index.
    Layer(usize),
    Head,
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Group::Embeddings => f.write_str("EMBEDDINGS"),
            Group::Layer(i) => write!(f, "LAYER_{i}"),
            Group::Head => f.write_str("HEAD"),
        }
    }
}

impl FromStr for Group {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        match upper.as_str() {
            "EMBEDDINGS" => Ok(Group::Embeddings),
            "HEAD" => Ok(Group::Head),
            _ => upper
                .strip_prefix("LAYER_")
                .and_then(|n| n.parse::<usize>().ok())
                .filter(|&n| n >= 1)
                .map(Group::Layer)
                .ok_or_else(|| Error::UnknownGroup(s.to_string())),
        }
    }
}

impl Serialize for Group {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Group {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderSpec {
    pub n_encoder_layers: usize,
}

impl EncoderSpec {
    pub fn new(n_encoder_layers: usize) -> Self {
        EncoderSpec { n_encoder_layers }
    }

    pub fn base() -> Self {
        EncoderSpec::new(BASE_ENCODER_LAYERS)
    }

    /// Bottom → top: EMBEDDINGS, LAYER_1 … LAYER_N, HEAD.
    pub fn groups(&self) -> Vec<Group> {
        std::iter::once(Group::Embeddings)
            .chain((1..=self.n_encoder_layers).map(Group::Layer))
            .chain(std::iter::once(Group::Head))
            .collect()
    }

    pub fn contains(&self, group: Group) -> bool {
        match group {
            Group::Embeddings | Group::Head => true,
            Group::Layer(i) => (1..=self.n_encoder_layers).contains(&i),
        }
    }

    /// Position of `group` in [`EncoderSpec::groups`].
    pub fn index_of(&self, group: Group) -> Result<usize> {
        match group {
            Group::Embeddings => Ok(0),
            Group::Layer(i) if self.contains(group) => Ok(i),
            Group::Head => Ok(self.n_encoder_layers + 1),
            _ => Err(Error::UnknownGroup(group.to_string())),
        }
    }

    pub fn n_groups(&self) -> usize {
        self.n_encoder_layers + 2
    }
}

/// Token ids right-padded to a common length.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PaddedBatch {
    pub rows: Vec<Vec<u32>>,
    pub pad_id: u32,
}

impl PaddedBatch {
    pub fn new(rows: Vec<Vec<u32>>, pad_id: u32) -> Self {
        PaddedBatch { rows, pad_id }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// One `[NON_HATE, HATE]` score pair per sequence.
pub type Logits = Vec<[f64; 2]>;

/// Index of the larger logit; ties go to the lower index (NON_HATE).
pub fn argmax_label(logits: &[f64; 2]) -> Label {
    if logits[1] > logits[0] {
        Label::Hate
    } else {
        Label::NonHate
    }
}

/// Per-group flat gradients, aligned with [`EncoderSpec::groups`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub groups: Vec<Vec<f64>>,
}

/// A trainable two-class sequence classifier.
pub trait Encoder: Send {
    fn spec(&self) -> &EncoderSpec;

    fn is_trainable(&self, group: Group) -> bool;

    fn set_trainable(&mut self, groups: &[Group], trainable: bool) -> Result<()>;

    fn forward(&self, batch: &PaddedBatch) -> Result<Logits>;

    /// Mean two-class cross-entropy over the batch and its gradients. Groups
    /// that are frozen may be returned as empty vectors.
    fn loss_and_gradients(&self, batch: &PaddedBatch, labels: &[Label])
        -> Result<(f64, Gradients)>;

    fn group_params(&self, group: Group) -> Result<&[f64]>;

    fn group_params_mut(&mut self, group: Group) -> Result<&mut [f64]>;

    /// Multiplier applied to every step size. Lets a backend whose
    /// parameters live on a different scale reuse the standard schedules.
    fn rate_scale(&self) -> f64 {
        1.0
    }

    fn list_parameter_groups(&self) -> Vec<Group> {
        self.spec().groups()
    }

    fn trainable_groups(&self) -> Vec<Group> {
        self.spec()
            .groups()
            .into_iter()
            .filter(|g| self.is_trainable(*g))
            .collect()
    }
}

/// Mean cross-entropy of `[NON_HATE, HATE]` logits against labels.
pub fn cross_entropy(logits: &[[f64; 2]], labels: &[Label]) -> f64 {
    let n = logits.len().max(1) as f64;
    logits
        .iter()
        .zip(labels)
        .map(|(z, l)| {
            let m = z[0].max(z[1]);
            let lse = m + ((z[0] - m).exp() + (z[1] - m).exp()).ln();
            lse - z[l.index()]
        })
        .sum::<f64>()
        / n
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum BackendConfig {
    Mock(MockConfig),
    /// A backend provided by a registered constructor, e.g. a pretrained
    /// bidirectional encoder loaded from `weights`.
    External {
        backend: String,
        #[serde(default)]
        weights: Option<std::path::PathBuf>,
    },
}

impl Default for BackendConfig {
    fn default() -> Self {
        BackendConfig::Mock(MockConfig::default())
    }
}

impl BackendConfig {
    pub fn name(&self) -> &str {
        match self {
            BackendConfig::Mock(_) => "mock",
            BackendConfig::External { backend, .. } => backend,
        }
    }
}

type Constructor =
    Box<dyn Fn(Option<&std::path::Path>, u64) -> Result<Box<dyn Encoder>> + Send + Sync>;

/// Name-keyed backend constructors. `mock` is always available.
#[derive(Default)]
pub struct BackendRegistry {
    constructors: BTreeMap<String, Constructor>,
}

impl BackendRegistry {
    pub fn new() -> Self {
        BackendRegistry::default()
    }

    pub fn register(
        &mut self,
        name: impl Into<String>,
        constructor: impl Fn(Option<&std::path::Path>, u64) -> Result<Box<dyn Encoder>>
            + Send
            + Sync
            + 'static,
    ) {
        self.constructors.insert(name.into(), Box::new(constructor));
    }

    pub fn names(&self) -> Vec<String> {
        std::iter::once("mock".to_string())
            .chain(self.constructors.keys().cloned())
            .collect()
    }

    pub fn resolves(&self, config: &BackendConfig) -> bool {
        match config {
            BackendConfig::Mock(_) => true,
            BackendConfig::External { backend, .. } => self.constructors.contains_key(backend),
        }
    }

    pub fn build(&self, config: &BackendConfig, seed: u64) -> Result<Box<dyn Encoder>> {
        match config {
            BackendConfig::Mock(cfg) => Ok(Box::new(MockEncoder::new(cfg.clone(), seed)?)),
            BackendConfig::External { backend, weights } => {
                let ctor = self.constructors.get(backend).ok_or_else(|| {
                    Error::Config(format!(
                        "backend `{backend}` is not registered (available: {})",
                        self.names().join(", ")
                    ))
                })?;
                ctor(weights.as_deref(), seed)
            }
        }
    }
}
