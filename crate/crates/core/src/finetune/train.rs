use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::optim::{AdamW, AdamWConfig};
use super::schedule::{
    discriminative_lrs, freeze_plan, uniform_rates, FreezePlan, LlrdDirection, LrSchedule,
    PostWarmup, BASE_LR, LLRD_DECAY, LLRD_HEAD_LR, LLRD_TOP_LR,
};
use crate::corpus::{DatasetBundle, Label};
use crate::encoder::{argmax_label, cross_entropy, Encoder, Group, PaddedBatch};
use crate::error::{Error, Result};
use crate::eval::{accuracy, confusion, mcc};
use crate::preprocess::{pad_sequences, plan_batches, Tokenizer, DEFAULT_BATCH_SIZE};

pub const DEFAULT_EPOCHS: usize = 4;
/// Epoch count used by the deployed-dataset variants.
pub const DEPLOYED_EPOCHS: usize = 5;
pub const WARMUP_GRID: [usize; 4] = [25, 50, 75, 100];
pub const UNFREEZE_GRID: [usize; 3] = [4, 8, 12];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Strategy {
    /// Constant rate, no warmup.
    None,
    Discriminative {
        top_lr: f64,
        decay: f64,
        head_lr: f64,
        #[serde(default)]
        direction: LlrdDirection,
    },
    Warmup {
        steps: usize,
        #[serde(default)]
        post: PostWarmup,
    },
    Unfreeze {
        layers: usize,
    },
}

impl Strategy {
    pub fn discriminative() -> Self {
        Strategy::Discriminative {
            top_lr: LLRD_TOP_LR,
            decay: LLRD_DECAY,
            head_lr: LLRD_HEAD_LR,
            direction: LlrdDirection::TopDown,
        }
    }

    pub fn warmup(steps: usize) -> Self {
        Strategy::Warmup {
            steps,
            post: PostWarmup::Linear,
        }
    }

    pub fn unfreeze(layers: usize) -> Self {
        Strategy::Unfreeze { layers }
    }

    /// The nine techniques compared per training set.
    pub fn grid() -> Vec<Strategy> {
        let mut v = vec![Strategy::None, Strategy::discriminative()];
        v.extend(WARMUP_GRID.map(Strategy::warmup));
        v.extend(UNFREEZE_GRID.map(Strategy::unfreeze));
        v
    }

    /// True when every parameter is one of the standard grid values.
    pub fn is_standard(&self) -> bool {
        match *self {
            Strategy::None => true,
            Strategy::Discriminative {
                top_lr,
                decay,
                head_lr,
                direction,
            } => {
                top_lr == LLRD_TOP_LR
                    && decay == LLRD_DECAY
                    && head_lr == LLRD_HEAD_LR
                    && direction == LlrdDirection::TopDown
            }
            Strategy::Warmup { steps, post } => {
                WARMUP_GRID.contains(&steps) && post == PostWarmup::Linear
            }
            Strategy::Unfreeze { layers } => UNFREEZE_GRID.contains(&layers),
        }
    }

    /// Epoch count this strategy requires, if it fixes one.
    pub fn forced_epochs(&self) -> Option<usize> {
        match *self {
            Strategy::Unfreeze { layers } => Some(layers),
            _ => None,
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Strategy::None => f.write_str("None"),
            Strategy::Discriminative { .. } if self.is_standard() => f.write_str("Discrimination"),
            Strategy::Discriminative {
                top_lr,
                decay,
                head_lr,
                direction,
            } => write!(
                f,
                "Discrimination (top {top_lr:e}, decay {decay}, head {head_lr:e}, {direction:?})"
            ),
            Strategy::Warmup {
                steps,
                post: PostWarmup::Linear,
            } => write!(f, "{steps} Warmup Steps"),
            Strategy::Warmup { steps, .. } => write!(f, "{steps} Warmup Steps (constant after)"),
            Strategy::Unfreeze { layers } => {
                write!(f, "Gradually Unfreeze the Last {layers} Layers")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub base_lr: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub optimizer: AdamWConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            base_lr: BASE_LR,
            batch_size: DEFAULT_BATCH_SIZE,
            epochs: DEFAULT_EPOCHS,
            seed: 42,
            strategy: Strategy::None,
            optimizer: AdamWConfig::default(),
        }
    }
}

impl TrainConfig {
    /// Default configuration for `strategy`, with the epoch count it forces.
    pub fn with_strategy(strategy: Strategy) -> Self {
        TrainConfig {
            epochs: strategy.forced_epochs().unwrap_or(DEFAULT_EPOCHS),
            strategy,
            ..TrainConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::Schedule("epochs must be positive".into()));
        }
        if self.batch_size == 0 {
            return Err(Error::Schedule("batch size must be positive".into()));
        }
        if let Some(forced) = self.strategy.forced_epochs() {
            if forced != self.epochs {
                return Err(Error::Schedule(format!(
                    "{} requires {forced} epochs, configured {}",
                    self.strategy, self.epochs
                )));
            }
        }
        Ok(())
    }

    /// Learning-rate schedule for `total_steps` optimizer steps.
    pub fn schedule(&self, model: &dyn Encoder, total_steps: usize) -> Result<LrSchedule> {
        let spec = model.spec();
        let schedule = match self.strategy {
            Strategy::None | Strategy::Unfreeze { .. } => {
                LrSchedule::constant(uniform_rates(spec, self.base_lr)?, total_steps)
            }
            Strategy::Discriminative {
                top_lr,
                decay,
                head_lr,
                direction,
            } => LrSchedule::constant(
                discriminative_lrs(spec, top_lr, decay, head_lr, direction)?,
                total_steps,
            ),
            Strategy::Warmup { steps, post } => LrSchedule {
                base: uniform_rates(spec, self.base_lr)?,
                warmup_steps: steps,
                total_steps,
                post,
            },
        };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn freeze_plan(&self, model: &dyn Encoder) -> Result<Option<FreezePlan>> {
        match self.strategy {
            Strategy::Unfreeze { layers } => freeze_plan(model.spec(), layers).map(Some),
            _ => Ok(None),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    /// Absent when the validation split is empty.
    pub val_loss: Option<f64>,
    pub val_accuracy: Option<f64>,
    pub val_mcc: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainHistory {
    pub epochs: Vec<EpochRecord>,
}

impl TrainHistory {
    pub fn len(&self) -> usize {
        self.epochs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.epochs.is_empty()
    }

    pub fn last(&self) -> Option<&EpochRecord> {
        self.epochs.last()
    }
}

/// Hooks called around each epoch and optimizer step.
pub trait TrainObserver {
    fn on_epoch_start(&mut self, _epoch: usize, _model: &dyn Encoder) {}
    fn on_step(&mut self, _step: usize, _realized: &[(Group, f64)]) {}
    fn on_epoch_end(&mut self, _epoch: usize, _model: &dyn Encoder, _record: &EpochRecord) {}
}

impl TrainObserver for () {}

struct Encoded {
    batches: Vec<(PaddedBatch, Vec<Label>)>,
}

fn encode(
    bundle: &DatasetBundle,
    tokenizer: &dyn Tokenizer,
    batch_size: usize,
    labels: Option<&[Label]>,
) -> Result<Encoded> {
    let ids: Vec<Vec<u32>> = bundle
        .records()
        .iter()
        .map(|r| tokenizer.encode(&r.text))
        .collect::<Result<_>>()?;
    let lengths: Vec<usize> = ids.iter().map(Vec::len).collect();
    let plan = plan_batches(&lengths, batch_size)?;
    let batches = plan
        .batches
        .iter()
        .map(|b| {
            let seqs: Vec<&[u32]> = b.members.iter().map(|&i| ids[i].as_slice()).collect();
            let rows = pad_sequences(&seqs, b.max_length, tokenizer.pad_id());
            let y = labels
                .map(|l| b.members.iter().map(|&i| l[i]).collect())
                .unwrap_or_default();
            (PaddedBatch::new(rows, tokenizer.pad_id()), y)
        })
        .collect();
    Ok(Encoded { batches })
}

/// Fine-tunes `model` in place and returns one history entry per epoch.
pub fn train(
    model: &mut dyn Encoder,
    train_set: &DatasetBundle,
    validate_set: &DatasetBundle,
    tokenizer: &dyn Tokenizer,
    config: &TrainConfig,
) -> Result<TrainHistory> {
    train_observed(model, train_set, validate_set, tokenizer, config, &mut ())
}

pub fn train_observed(
    model: &mut dyn Encoder,
    train_set: &DatasetBundle,
    validate_set: &DatasetBundle,
    tokenizer: &dyn Tokenizer,
    config: &TrainConfig,
    observer: &mut dyn TrainObserver,
) -> Result<TrainHistory> {
    config.validate()?;
    if train_set.is_empty() {
        return Err(Error::EmptyTraining);
    }
    let train_labels = train_set.labels()?;
    let val_labels = validate_set.labels()?;
    let train_data = encode(train_set, tokenizer, config.batch_size, Some(&train_labels))?;
    let val_data = encode(
        validate_set,
        tokenizer,
        config.batch_size,
        Some(&val_labels),
    )?;

    let total_steps = config.epochs * train_data.batches.len();
    let schedule = config.schedule(model, total_steps)?;
    let plan = config.freeze_plan(model)?;
    let groups = model.list_parameter_groups();
    let mut optimizer = AdamW::new(config.optimizer, groups.len());

    let mut history = TrainHistory::default();
    let mut step = 0;
    for epoch in 1..=config.epochs {
        let trainable: BTreeSet<Group> = match &plan {
            Some(plan) => plan.epoch(epoch).cloned().unwrap_or_default(),
            None => groups.iter().copied().collect(),
        };
        model.set_trainable(&groups, false)?;
        model.set_trainable(&trainable.into_iter().collect::<Vec<_>>(), true)?;
        observer.on_epoch_start(epoch, model);

        let mut loss_sum = 0.0;
        for (batch, labels) in &train_data.batches {
            let (loss, grads) = model.loss_and_gradients(batch, labels)?;
            let realized = optimizer.step(model, &grads, &schedule, step)?;
            observer.on_step(step, &realized);
            loss_sum += loss;
            step += 1;
        }
        let train_loss = loss_sum / train_data.batches.len() as f64;
        let record = evaluate_epoch(model, &val_data, &val_labels, epoch, train_loss)?;
        observer.on_epoch_end(epoch, model, &record);
        history.epochs.push(record);
    }
    Ok(history)
}

fn evaluate_epoch(
    model: &dyn Encoder,
    data: &Encoded,
    labels: &[Label],
    epoch: usize,
    train_loss: f64,
) -> Result<EpochRecord> {
    if labels.is_empty() {
        return Ok(EpochRecord {
            epoch,
            train_loss,
            val_loss: None,
            val_accuracy: None,
            val_mcc: None,
        });
    }
    let mut logits = Vec::with_capacity(labels.len());
    for (batch, _) in &data.batches {
        logits.extend(model.forward(batch)?);
    }
    let preds: Vec<Label> = logits.iter().map(argmax_label).collect();
    let cm = confusion(labels, &preds)?;
    Ok(EpochRecord {
        epoch,
        train_loss,
        val_loss: Some(cross_entropy(&logits, labels)),
        val_accuracy: Some(accuracy(&cm)?),
        val_mcc: Some(mcc(&cm)?),
    })
}

/// Argmax label per record (index 0 = NON_HATE, 1 = HATE; ties → NON_HATE).
pub fn predict(
    model: &dyn Encoder,
    bundle: &DatasetBundle,
    tokenizer: &dyn Tokenizer,
) -> Result<Vec<Label>> {
    if bundle.is_empty() {
        return Ok(Vec::new());
    }
    let data = encode(bundle, tokenizer, DEFAULT_BATCH_SIZE, None)?;
    let mut out = Vec::with_capacity(bundle.len());
    for (batch, _) in &data.batches {
        out.extend(model.forward(batch)?.iter().map(argmax_label));
    }
    Ok(out)
}
