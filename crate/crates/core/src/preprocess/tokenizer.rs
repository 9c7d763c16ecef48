use unicode_segmentation::UnicodeSegmentation;

use crate::error::{Error, Result};

/// Token-id encoder used to feed a classifier.
///
/// Implementations must keep any 280-character input within 512 ids.
pub trait Tokenizer: Send + Sync {
    fn encode(&self, text: &str) -> Result<Vec<u32>>;
    fn vocab_size(&self) -> usize;
    fn pad_id(&self) -> u32;
}

/// Lowercasing word-piece-free tokenizer that hashes each Unicode word (or
/// punctuation mark) into a fixed vocabulary. Every id is in range, so it
/// never fails on text input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HashTokenizer {
    vocab_size: usize,
}

impl HashTokenizer {
    pub const PAD: u32 = 0;
    pub const UNK: u32 = 1;
    pub const CLS: u32 = 2;
    pub const SEP: u32 = 3;
    const RESERVED: usize = 4;

    pub fn new(vocab_size: usize) -> Result<Self> {
        if vocab_size <= Self::RESERVED {
            return Err(Error::Config(format!(
                "vocabulary size must exceed {}, got {vocab_size}",
                Self::RESERVED
            )));
        }
        Ok(HashTokenizer { vocab_size })
    }

    pub fn token_id(&self, piece: &str) -> u32 {
        let buckets = (self.vocab_size - Self::RESERVED) as u64;
        (Self::RESERVED as u64 + fnv1a(piece.as_bytes()) % buckets) as u32
    }

    pub fn pieces(text: &str) -> Vec<String> {
        text.split_word_bounds()
            .filter(|w| !w.chars().all(char::is_whitespace))
            .map(str::to_lowercase)
            .collect()
    }
}

impl Tokenizer for HashTokenizer {
    fn encode(&self, text: &str) -> Result<Vec<u32>> {
        let mut ids = vec![Self::CLS];
        ids.extend(Self::pieces(text).iter().map(|p| self.token_id(p)));
        ids.push(Self::SEP);
        Ok(ids)
    }

    fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    fn pad_id(&self) -> u32 {
        Self::PAD
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    bytes
        .iter()
        .fold(OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(PRIME))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::preprocess::MAX_SEQUENCE_TOKENS;
    use proptest::prelude::*;

    #[test]
    fn brackets_and_lowercases() {
        let t = HashTokenizer::new(1000).unwrap();
        let ids = t.encode("Hello, hello").unwrap();
        assert_eq!(ids.len(), 5);
        assert_eq!(ids[0], HashTokenizer::CLS);
        assert_eq!(ids[4], HashTokenizer::SEP);
        assert_eq!(ids[1], ids[3]);
        assert_eq!(
            t.encode("").unwrap(),
            vec![HashTokenizer::CLS, HashTokenizer::SEP]
        );
    }

    #[test]
    fn rejects_tiny_vocab() {
        assert!(HashTokenizer::new(4).is_err());
    }

    proptest! {
        #[test]
        fn tweet_never_exceeds_encoder_limit(text in "\\PC{0,280}") {
            let t = HashTokenizer::new(512).unwrap();
            let ids = t.encode(&text).unwrap();
            prop_assert!(ids.len() <= MAX_SEQUENCE_TOKENS);
            prop_assert!(ids.iter().all(|&i| (i as usize) < t.vocab_size()));
        }
    }
}
