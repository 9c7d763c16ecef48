//! Cleaning, splitting, tokenization and batch planning.

mod batch;
mod clean;
mod split;
mod tokenizer;

pub use batch::{
    pad_sequences, padded_length, plan_batches, BatchPlan, PlannedBatch, DEFAULT_BATCH_SIZE,
    MAX_SEQUENCE_TOKENS, PAD_MULTIPLE,
};
pub use clean::{clean_bundle, clean_tweet, is_emoji, CleanConfig, EMOJI_RANGES};
pub use split::{split_dataset, Split, SplitConfig};
pub use tokenizer::{HashTokenizer, Tokenizer};
