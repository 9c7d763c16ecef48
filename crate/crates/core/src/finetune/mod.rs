//! Training loop, AdamW and the fine-tuning schedule families.

mod optim;
mod schedule;
mod train;

pub use optim::{AdamW, AdamWConfig};
pub use schedule::{
    discriminative_lrs, freeze_plan, uniform_rates, warmup_multiplier, warmup_multiplier_with,
    FreezePlan, GroupRates, LlrdDirection, LrSchedule, PostWarmup, BASE_LR, LLRD_DECAY,
    LLRD_HEAD_LR, LLRD_TOP_LR,
};
pub use train::{
    predict, train, train_observed, EpochRecord, Strategy, TrainConfig, TrainHistory,
    TrainObserver, DEFAULT_EPOCHS, DEPLOYED_EPOCHS, UNFREEZE_GRID, WARMUP_GRID,
};
