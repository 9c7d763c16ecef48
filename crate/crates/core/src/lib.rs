//! Fine-tuning and evaluation workbench for anti-Asian hate-speech detection
//! on tweets: corpus handling, cleaning and batching, schedule-driven
//! fine-tuning, dataset deployment and MCC-based reporting.

pub mod corpus;
pub mod deploy;
pub mod encoder;
pub mod error;
pub mod eval;
pub mod finetune;
pub mod fixtures;
pub mod preprocess;
pub mod runner;

pub use error::{Error, Result};
