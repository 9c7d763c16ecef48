use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_BATCH_SIZE: usize = 24;
/// Padded lengths are multiples of this.
pub const PAD_MULTIPLE: usize = 128;
/// Encoder sequence limit.
pub const MAX_SEQUENCE_TOKENS: usize = 512;

/// Least multiple of 128 that is ≥ `longest`.
pub fn padded_length(longest: usize) -> usize {
    longest.div_ceil(PAD_MULTIPLE) * PAD_MULTIPLE
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedBatch {
    /// Positions into the planned sequence list.
    pub members: Vec<usize>,
    pub longest: usize,
    pub max_length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BatchPlan {
    pub batches: Vec<PlannedBatch>,
    pub batch_size: usize,
}

/// Groups sequences consecutively into batches of at most `batch_size`.
/// Padding is appended after each sequence up to the batch's `max_length`.
pub fn plan_batches(token_lengths: &[usize], batch_size: usize) -> Result<BatchPlan> {
    if batch_size == 0 {
        return Err(Error::Config("batch size must be positive".into()));
    }
    if let Some((index, &length)) = token_lengths
        .iter()
        .enumerate()
        .find(|(_, &l)| l == 0 || l > MAX_SEQUENCE_TOKENS)
    {
        return Err(Error::LengthOutOfRange { index, length });
    }
    let batches = token_lengths
        .chunks(batch_size)
        .enumerate()
        .map(|(b, chunk)| {
            let longest = chunk.iter().copied().max().unwrap_or(1);
            PlannedBatch {
                members: (b * batch_size..b * batch_size + chunk.len()).collect(),
                longest,
                max_length: padded_length(longest),
            }
        })
        .collect();
    Ok(BatchPlan {
        batches,
        batch_size,
    })
}

/// Right-pads every sequence with `pad_id` to `max_length`.
pub fn pad_sequences(sequences: &[&[u32]], max_length: usize, pad_id: u32) -> Vec<Vec<u32>> {
    sequences
        .iter()
        .map(|s| {
            let mut row = s.to_vec();
            row.resize(max_length.max(s.len()), pad_id);
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_boundaries() {
        assert_eq!(padded_length(1), 128);
        assert_eq!(padded_length(128), 128);
        assert_eq!(padded_length(129), 256);
        assert_eq!(padded_length(512), 512);
    }

    #[test]
    fn grouping() {
        let plan = plan_batches(&[10; 50], DEFAULT_BATCH_SIZE).unwrap();
        let sizes: Vec<_> = plan.batches.iter().map(|b| b.members.len()).collect();
        assert_eq!(sizes, vec![24, 24, 2]);
        assert_eq!(plan.batches[2].members, vec![48, 49]);
    }

    #[test]
    fn batch_max_length_uses_longest() {
        let plan = plan_batches(&[3, 200, 40], 2).unwrap();
        assert_eq!(plan.batches[0].longest, 200);
        assert_eq!(plan.batches[0].max_length, 256);
        assert_eq!(plan.batches[1].max_length, 128);
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(matches!(
            plan_batches(&[4, 0], 24),
            Err(Error::LengthOutOfRange {
                index: 1,
                length: 0
            })
        ));
        assert!(matches!(
            plan_batches(&[513], 24),
            Err(Error::LengthOutOfRange {
                index: 0,
                length: 513
            })
        ));
    }

    #[test]
    fn padding_goes_at_the_end() {
        let a = [5u32, 6];
        let b = [7u32];
        let rows = pad_sequences(&[&a, &b], 4, 0);
        assert_eq!(rows, vec![vec![5, 6, 0, 0], vec![7, 0, 0, 0]]);
    }

    #[test]
    fn plan_invariants_hold_for_any_lengths() {
        let lengths: Vec<usize> = (1..=512).chain((1..=512).rev()).collect();
        let plan = plan_batches(&lengths, 24).unwrap();
        for batch in &plan.batches {
            assert!(batch.max_length <= MAX_SEQUENCE_TOKENS);
            assert_eq!(batch.max_length % PAD_MULTIPLE, 0);
            for &m in &batch.members {
                assert!(lengths[m] <= batch.longest);
            }
        }
    }
}
