//! Per-group learning rates, warmup multipliers and gradual-unfreezing plans.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::encoder::{EncoderSpec, Group};
use crate::error::{Error, Result};

pub const BASE_LR: f64 = 2e-5;
pub const LLRD_TOP_LR: f64 = 1.9e-5;
pub const LLRD_DECAY: f64 = 0.9;
pub const LLRD_HEAD_LR: f64 = 2e-5;

/// Which end of the encoder receives `top_lr` before decay is applied.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LlrdDirection {
    /// LAYER_N gets `top_lr`; each lower group is multiplied by `decay`.
    #[default]
    TopDown,
    /// EMBEDDINGS gets `top_lr`; each higher encoder layer is multiplied by `decay`.
    BottomUp,
}

/// Rate per parameter group, ordered bottom → top.
pub type GroupRates = BTreeMap<Group, f64>;

pub fn uniform_rates(spec: &EncoderSpec, lr: f64) -> Result<GroupRates> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::Schedule(format!(
            "learning rate must be positive, got {lr}"
        )));
    }
    Ok(spec.groups().into_iter().map(|g| (g, lr)).collect())
}

/// Layer-wise decayed rates with a separately set head rate.
pub fn discriminative_lrs(
    spec: &EncoderSpec,
    top_lr: f64,
    decay: f64,
    head_lr: f64,
    direction: LlrdDirection,
) -> Result<GroupRates> {
    for (name, v) in [("top_lr", top_lr), ("head_lr", head_lr)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::Schedule(format!("{name} must be positive, got {v}")));
        }
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::Schedule(format!(
            "decay must be in (0, 1], got {decay}"
        )));
    }
    let n = spec.n_encoder_layers as i32;
    Ok(spec
        .groups()
        .into_iter()
        .map(|g| {
            let depth = match (direction, g) {
                (_, Group::Head) => return (g, head_lr),
                (LlrdDirection::TopDown, Group::Layer(j)) => n - j as i32,
                (LlrdDirection::TopDown, Group::Embeddings) => n,
                (LlrdDirection::BottomUp, Group::Layer(j)) => j as i32,
                (LlrdDirection::BottomUp, Group::Embeddings) => 0,
            };
            (g, top_lr * decay.powi(depth))
        })
        .collect())
}

/// What happens after the warmup ramp.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostWarmup {
    /// Linear decay to zero at the last step.
    #[default]
    Linear,
    Constant,
}

/// Linear warmup over `warmup_steps`, then linear decay to zero at `total_steps`.
/// `warmup_steps = 0` leaves the rate constant.
pub fn warmup_multiplier(step: usize, warmup_steps: usize, total_steps: usize) -> Result<f64> {
    warmup_multiplier_with(step, warmup_steps, total_steps, PostWarmup::Linear)
}

pub fn warmup_multiplier_with(
    step: usize,
    warmup_steps: usize,
    total_steps: usize,
    post: PostWarmup,
) -> Result<f64> {
    if step >= total_steps {
        return Err(Error::Schedule(format!(
            "step {step} outside [0, {total_steps})"
        )));
    }
    if warmup_steps >= total_steps {
        return Err(Error::Schedule(format!(
            "{warmup_steps} warmup steps do not fit in {total_steps} total steps"
        )));
    }
    if warmup_steps == 0 {
        return Ok(1.0);
    }
    if step < warmup_steps {
        return Ok((step + 1) as f64 / warmup_steps as f64);
    }
    Ok(match post {
        PostWarmup::Linear => (total_steps - step) as f64 / (total_steps - warmup_steps) as f64,
        PostWarmup::Constant => 1.0,
    })
}

/// Per-group base rates times a per-step multiplier.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub base: GroupRates,
    pub warmup_steps: usize,
    pub total_steps: usize,
    pub post: PostWarmup,
}

impl LrSchedule {
    pub fn constant(base: GroupRates, total_steps: usize) -> Self {
        LrSchedule {
            base,
            warmup_steps: 0,
            total_steps,
            post: PostWarmup::Constant,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 {
            return Err(Error::Schedule("schedule has no steps".into()));
        }
        if self.warmup_steps >= self.total_steps {
            return Err(Error::Schedule(format!(
                "{} warmup steps do not fit in {} total steps",
                self.warmup_steps, self.total_steps
            )));
        }
        if let Some((g, r)) = self.base.iter().find(|(_, r)| r.is_nan() || **r <= 0.0) {
            return Err(Error::Schedule(format!("rate for {g} is {r}")));
        }
        Ok(())
    }

    pub fn multiplier(&self, step: usize) -> Result<f64> {
        warmup_multiplier_with(step, self.warmup_steps, self.total_steps, self.post)
    }

    pub fn rate(&self, group: Group, step: usize) -> Result<f64> {
        let base = self
            .base
            .get(&group)
            .ok_or_else(|| Error::UnknownGroup(group.to_string()))?;
        Ok(base * self.multiplier(step)?)
    }
}

/// Trainable groups per epoch for gradual unfreezing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FreezePlan {
    pub epochs: usize,
    pub trainable: Vec<BTreeSet<Group>>,
}

impl FreezePlan {
    /// Trainable set of 1-based `epoch`.
    pub fn epoch(&self, epoch: usize) -> Option<&BTreeSet<Group>> {
        epoch.checked_sub(1).and_then(|e| self.trainable.get(e))
    }
}

/// Epoch `e` trains HEAD plus the top `e` encoder layers; EMBEDDINGS stay frozen.
pub fn freeze_plan(spec: &EncoderSpec, k: usize) -> Result<FreezePlan> {
    let n = spec.n_encoder_layers;
    if k == 0 || k > n {
        return Err(Error::Schedule(format!(
            "cannot unfreeze {k} layers of a {n}-layer encoder"
        )));
    }
    let trainable = (1..=k)
        .map(|e| {
            std::iter::once(Group::Head)
                .chain((n + 1 - e..=n).map(Group::Layer))
                .collect()
        })
        .collect();
    Ok(FreezePlan {
        epochs: k,
        trainable,
    })
}
